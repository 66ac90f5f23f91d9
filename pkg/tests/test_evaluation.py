import itertools
import random

import pytest

from promptner.corpus import GoldEntity
from promptner.errors import EmptyMatchSet, ZeroGold
from promptner.evaluation import (
    MatchRecord,
    classification_metrics,
    extraction_metrics,
    match_predictions,
    match_records_csv,
    render_classification_table,
    render_extraction_table,
    render_timing_table,
    timing_report,
)
from promptner.gateway import CompletionRecord
from promptner.parser import ExtractedEntity
from promptner.vocab import GOLD_LABELS, EntityLabel, PromptStrategy

from synthetic import SimilarityTable

P, T, TR, U = EntityLabel.PROBLEM, EntityLabel.TEST, EntityLabel.TREATMENT, EntityLabel.UNKNOWN

# (predict, match, unknown, printed accuracy), gold_total = 190
PUBLISHED_COUNTS = [
    (76, 71, 0, 0.37),
    (121, 108, 7, 0.56),
    (117, 112, 0, 0.59),
    (139, 123, 0, 0.65),
    (75, 70, 0, 0.37),
    (54, 50, 3, 0.26),
    (84, 79, 0, 0.41),
    (106, 99, 0, 0.52),
    (58, 53, 0, 0.28),
    (49, 42, 3, 0.22),
]


def pred(text, label=P, i=0):
    return ExtractedEntity(text, text, label, PromptStrategy.ZERO_SHOT, i)


def gold(text, label=P, line=1):
    return GoldEntity(text, label, "t", line, 0, len(text.split()) - 1)


def records_for(predict, match, unknown):
    """Synthetic match records with the given published counts."""
    out = []
    for i in range(predict):
        label = U if i >= predict - unknown else P
        out.append(MatchRecord(pred(f"p{i}", label, i), gold(f"g{i}") if i < match else None, 1.0 if i < match else None))
    return out


@pytest.mark.parametrize("predict,match,unknown,printed", PUBLISHED_COUNTS)
def test_published_accuracy_cells(predict, match, unknown, printed):
    m = extraction_metrics(records_for(predict, match, unknown), 190)
    assert (m.predict, m.match, m.unknown) == (predict, match, unknown)
    assert abs(m.accuracy - printed) <= 0.01


def test_accuracy_examples():
    assert round(extraction_metrics(records_for(76, 71, 0), 190).accuracy, 4) == 0.3737
    assert round(extraction_metrics(records_for(139, 123, 0), 190).accuracy, 4) == 0.6474
    assert extraction_metrics(records_for(5, 0, 0), 190).accuracy == 0.0
    with pytest.raises(ZeroGold):
        extraction_metrics([], 0)


def test_accuracy_monotone_in_match():
    values = [extraction_metrics(records_for(50, k, 0), 190).accuracy for k in range(51)]
    assert values == sorted(values)


def test_published_pair_matching():
    table = SimilarityTable(["angiogram", "angiography", "fluid", "urine"], {("angiogram", "angiography"): 0.96, ("fluid", "urine"): 0.90})
    recs = match_predictions([pred("angiogram"), pred("fluid")], [gold("angiography"), gold("urine")], table, similarity=table.similarity)
    assert recs[0].gold.text == "angiography" and recs[0].similarity == 0.96
    assert recs[1].gold is None and recs[1].similarity is None


def test_two_predictions_one_gold():
    table = SimilarityTable(["a", "b", "g"], {("a", "g"): 0.95, ("b", "g"): 0.97})
    recs = match_predictions([pred("a"), pred("b")], [gold("g")], table, similarity=table.similarity)
    assert [r.matched for r in recs] == [False, True]


def test_match_requires_gold():
    with pytest.raises(ZeroGold):
        match_predictions([pred("a")], [], SimilarityTable(["a"]))


def oracle_matching(scores, tau):
    """Repeatedly take the best remaining pair (lowest indices on ties)."""
    pairs = {(i, j): s for (i, j), s in scores.items() if s >= tau}
    taken = {}
    while pairs:
        best = max(pairs.values())
        i, j = min(k for k, s in pairs.items() if s == best)
        taken[i] = j
        pairs = {(a, b): s for (a, b), s in pairs.items() if a != i and b != j}
    return taken


def test_matching_matches_greedy_oracle():
    rng = random.Random(2)
    for _ in range(300):
        n_p, n_g = rng.randint(1, 6), rng.randint(1, 6)
        preds = [f"p{i}" for i in range(n_p)]
        golds = [f"g{j}" for j in range(n_g)]
        scores = {(i, j): rng.choice([0.99, 0.95, 0.95, 0.92, 0.91, 0.3]) for i in range(n_p) for j in range(n_g)}
        table = SimilarityTable(preds + golds, {(preds[i], golds[j]): s for (i, j), s in scores.items()})
        recs = match_predictions([pred(p, i=i) for i, p in enumerate(preds)], [gold(g) for g in golds], table, similarity=table.similarity)
        got = {i: golds.index(r.gold.text) for i, r in enumerate(recs) if r.matched}
        assert got == oracle_matching(scores, 0.92)
        # one-to-one
        assert len(set(got.values())) == len(got)
        for i, r in enumerate(recs):
            assert r.matched == (r.similarity is not None)
            if r.matched:
                assert r.similarity >= 0.92


# -- classification -----------------------------------------------------------


def matched(pairs):
    return [MatchRecord(pred(f"x{i}", p, i), gold(f"x{i}", g), 1.0) for i, (g, p) in enumerate(pairs)]


def oracle_classification(pairs):
    """Confusion-matrix oracle: rows are gold labels, columns predicted labels."""
    cols = [*GOLD_LABELS, U]
    cm = {(g, p): 0 for g in GOLD_LABELS for p in cols}
    for g, p in pairs:
        cm[g, p] += 1
    out = {}
    for label in GOLD_LABELS:
        tp = cm[label, label]
        col = sum(cm[g, label] for g in GOLD_LABELS)
        row = sum(cm[label, p] for p in cols)
        prec = tp / col if col else 0.0
        rec = tp / row if row else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        out[label] = (prec, rec, f1, row)
    return out


def test_confusion_example():
    m = classification_metrics(matched([(P, P), (P, T), (T, T), (TR, U)]))
    assert (m.per_label[P].precision, m.per_label[P].recall) == (1.0, 0.5)
    assert (m.per_label[T].precision, m.per_label[T].recall) == (0.5, 1.0)
    assert (m.per_label[TR].precision, m.per_label[TR].recall, m.per_label[TR].f1) == (0.0, 0.0, 0.0)
    assert m.macro.f1 == pytest.approx((2 / 3 + 2 / 3 + 0) / 3)


def test_perfect_and_empty():
    m = classification_metrics(matched([(P, P), (T, T), (TR, TR)]))
    for s in [*m.per_label.values(), m.macro, m.weighted, m.micro]:
        assert (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0)
    with pytest.raises(EmptyMatchSet):
        classification_metrics([MatchRecord(pred("a"))])


def test_zero_support_flagged():
    m = classification_metrics(matched([(P, P), (P, T)]))
    assert m.per_label[TR].zero_support and m.per_label[TR].support == 0
    assert not m.per_label[P].zero_support


def test_unmatched_records_ignored():
    recs = matched([(P, P)]) + [MatchRecord(pred("z", T))]
    assert classification_metrics(recs).per_label[T].precision == 0.0


def test_all_small_fixtures_match_oracle():
    labels_out = [P, T, TR, U]
    # every multiset of up to 3 pairs, plus random ones up to 20
    space = [(g, p) for g in GOLD_LABELS for p in labels_out]
    fixtures = [list(c) for n in range(1, 4) for c in itertools.combinations_with_replacement(space, n)]
    rng = random.Random(9)
    fixtures += [[rng.choice(space) for _ in range(rng.randint(4, 20))] for _ in range(500)]
    for pairs in fixtures:
        m = classification_metrics(matched(pairs))
        expected = oracle_classification(pairs)
        for label in GOLD_LABELS:
            s = m.per_label[label]
            assert (s.precision, s.recall, s.f1, s.support) == pytest.approx(expected[label], abs=1e-12)
        assert m.macro.f1 == pytest.approx(sum(e[2] for e in expected.values()) / 3, abs=1e-12)
        total = sum(e[3] for e in expected.values())
        assert m.weighted.recall == pytest.approx(sum(e[1] * e[3] for e in expected.values()) / total, abs=1e-12)
        for s in [*m.per_label.values(), m.macro, m.weighted, m.micro]:
            assert 0 <= s.precision <= 1 and 0 <= s.recall <= 1 and 0 <= s.f1 <= 1
        if U not in {p for _, p in pairs}:
            assert m.micro.precision == pytest.approx(m.micro.recall)


# -- timing and rendering -----------------------------------------------------


def completion(latency):
    return CompletionRecord("h", "", latency)


def test_timing_report():
    rep = timing_report({"Zero-shot": [completion(8.88)]})
    assert rep.rows == [("Zero-shot", 8.88)]
    rep = timing_report({"Zero-shot": [completion(8.88)], "Few-shot 3": [completion(20.98)]})
    assert len(rep.rows) == 2 and rep.total == pytest.approx(29.86)
    assert render_timing_table(rep).splitlines()[-1].split() == ["Total", "29.86"]
    with pytest.raises(ValueError):
        timing_report({"x": []})


def test_rendered_tables():
    text = render_extraction_table([("Zero-shot", extraction_metrics(records_for(76, 71, 0), 190)), ("Ensemble", "ZeroGold")])
    assert text.splitlines()[0].split() == ["Prompt", "Predict", "Match", "Unknown", "Accuracy"]
    assert text.splitlines()[2].split() == ["Zero-shot", "76", "71", "0", "0.3737"]
    cls = render_classification_table([("Zero-shot", classification_metrics(matched([(P, P)])))])
    assert cls.splitlines()[2].split() == ["Zero-shot", "0.3333", "0.3333", "0.3333"]


def test_csv_export():
    csv_text = match_records_csv([("Zero-shot", [MatchRecord(pred("a, b"), gold("a b"), 0.95), MatchRecord(pred("c"))])], "run-1", "v1")
    lines = csv_text.splitlines()
    assert lines[1] == 'run-1,v1,Zero-shot,"a, b",problem,a b,problem,1,0.95'
    assert lines[2] == "run-1,v1,Zero-shot,c,problem,,,,"
