"""Similarity-based matching against gold entities and extraction/classification metrics."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from typing import Mapping, Protocol, Sequence

from .corpus import GoldEntity
from .embedding import EmbeddingProvider, cosine_similarity, embed_texts
from .ensemble import DEFAULT_TAU, Similarity
from .errors import EmptyMatchSet, ZeroGold
from .vocab import GOLD_LABELS, EntityLabel


class Prediction(Protocol):
    text: str
    label: EntityLabel


@dataclass(frozen=True)
class MatchRecord:
    predicted: Prediction
    gold: GoldEntity | None = None
    similarity: float | None = None

    @property
    def matched(self) -> bool:
        return self.gold is not None


@dataclass(frozen=True)
class ExtractionMetrics:
    predict: int
    match: int
    unknown: int
    gold_total: int
    accuracy: float


@dataclass(frozen=True)
class LabelScores:
    precision: float
    recall: float
    f1: float
    support: int
    zero_support: bool = False


@dataclass(frozen=True)
class AverageScores:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ClassificationMetrics:
    per_label: dict[EntityLabel, LabelScores]
    macro: AverageScores
    weighted: AverageScores
    micro: AverageScores

    def to_dict(self) -> dict:
        return {
            "per_label": {label.value: asdict(s) for label, s in self.per_label.items()},
            "macro": asdict(self.macro),
            "weighted": asdict(self.weighted),
            "micro": asdict(self.micro),
        }


@dataclass(frozen=True)
class TimingReport:
    rows: list[tuple[str, float]] = field(default_factory=list)

    @property
    def total(self) -> float:
        return sum(latency for _, latency in self.rows)


def match_predictions(
    predictions: Sequence[Prediction],
    gold: Sequence[GoldEntity],
    provider: EmbeddingProvider,
    tau: float = DEFAULT_TAU,
    similarity: Similarity = cosine_similarity,
) -> list[MatchRecord]:
    """One-to-one greedy matching by descending similarity.

    Ties are broken by prediction order, then gold order. The result has one
    record per prediction, in prediction order.
    """
    if not gold:
        raise ZeroGold("no gold entities to match against")
    if not predictions:
        return []
    pred_vecs = embed_texts([p.text for p in predictions], provider)
    gold_vecs = embed_texts([g.text for g in gold], provider)
    candidates = []
    for i, pv in enumerate(pred_vecs):
        for j, gv in enumerate(gold_vecs):
            s = similarity(pv, gv)
            if s >= tau:
                candidates.append((-s, i, j))
    candidates.sort()
    pred_to_gold: dict[int, tuple[int, float]] = {}
    used_gold: set[int] = set()
    for neg_s, i, j in candidates:
        if i in pred_to_gold or j in used_gold:
            continue
        pred_to_gold[i] = (j, -neg_s)
        used_gold.add(j)
    records = []
    for i, pred in enumerate(predictions):
        if i in pred_to_gold:
            j, s = pred_to_gold[i]
            records.append(MatchRecord(pred, gold[j], s))
        else:
            records.append(MatchRecord(pred))
    return records


def extraction_metrics(records: Sequence[MatchRecord], gold_total: int) -> ExtractionMetrics:
    if gold_total <= 0:
        raise ZeroGold("gold_total must be positive")
    match = sum(1 for r in records if r.matched)
    unknown = sum(1 for r in records if r.predicted.label is EntityLabel.UNKNOWN)
    return ExtractionMetrics(len(records), match, unknown, gold_total, match / gold_total)


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def classification_metrics(records: Sequence[MatchRecord]) -> ClassificationMetrics:
    """Per-label and averaged P/R/F1 over matched pairs (gold label is the truth).

    Unknown predictions are never true positives; they count as misses for
    the gold label and as false positives for nobody.
    """
    pairs = [(r.gold.label, r.predicted.label) for r in records if r.matched]
    if not pairs:
        raise EmptyMatchSet("no matched predictions to classify")
    per_label = {}
    tp_sum = fp_sum = fn_sum = 0
    for label in GOLD_LABELS:
        tp = sum(1 for g, p in pairs if g is label and p is label)
        fp = sum(1 for g, p in pairs if g is not label and p is label)
        fn = sum(1 for g, p in pairs if g is label and p is not label)
        support = tp + fn
        precision, recall = _ratio(tp, tp + fp), _ratio(tp, tp + fn)
        per_label[label] = LabelScores(precision, recall, _f1(precision, recall), support, support == 0)
        tp_sum, fp_sum, fn_sum = tp_sum + tp, fp_sum + fp, fn_sum + fn

    n = len(GOLD_LABELS)
    macro = AverageScores(
        sum(s.precision for s in per_label.values()) / n,
        sum(s.recall for s in per_label.values()) / n,
        sum(s.f1 for s in per_label.values()) / n,
    )
    total = sum(s.support for s in per_label.values())
    weighted = AverageScores(
        sum(s.precision * s.support for s in per_label.values()) / total,
        sum(s.recall * s.support for s in per_label.values()) / total,
        sum(s.f1 * s.support for s in per_label.values()) / total,
    )
    micro_p, micro_r = _ratio(tp_sum, tp_sum + fp_sum), _ratio(tp_sum, tp_sum + fn_sum)
    micro = AverageScores(micro_p, micro_r, _f1(micro_p, micro_r))
    return ClassificationMetrics(per_label, macro, weighted, micro)


def timing_report(records: Mapping[str, Sequence]) -> TimingReport:
    """Sum ``latency_seconds`` of each strategy's completion records."""
    rows = []
    for name, group in records.items():
        if not group:
            raise ValueError(f"no completion records for {name}")
        rows.append((name, sum(r.latency_seconds for r in group)))
    return TimingReport(rows)


# -- rendering ----------------------------------------------------------------


def _table(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    fmt = lambda row: "  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip()  # noqa: E731
    rule = "-" * len(fmt(["-" * w for w in widths]))
    return "\n".join([fmt(header), rule, *(fmt(r) for r in rows)])


def render_extraction_table(rows: Sequence[tuple[str, ExtractionMetrics | str]]) -> str:
    out = []
    for name, m in rows:
        if isinstance(m, str):
            out.append([name, "-", "-", "-", m])
        else:
            out.append([name, str(m.predict), str(m.match), str(m.unknown), f"{m.accuracy:.4f}"])
    return _table(["Prompt", "Predict", "Match", "Unknown", "Accuracy"], out)


def render_classification_table(
    rows: Sequence[tuple[str, ClassificationMetrics | str]], average: str = "macro"
) -> str:
    out = []
    for name, m in rows:
        if isinstance(m, str):
            out.append([name, "-", "-", m])
        else:
            avg: AverageScores = getattr(m, average)
            out.append([name, f"{avg.precision:.4f}", f"{avg.recall:.4f}", f"{avg.f1:.4f}"])
    return _table(["Prompt", "Precision", "Recall", "F1"], out)


def render_per_label_table(rows: Sequence[tuple[str, ClassificationMetrics | str]]) -> str:
    out = []
    for name, m in rows:
        if isinstance(m, str):
            continue
        for label, s in m.per_label.items():
            flag = " (no support)" if s.zero_support else ""
            out.append(
                [name, label.display + flag, f"{s.precision:.4f}", f"{s.recall:.4f}", f"{s.f1:.4f}", str(s.support)]
            )
    return _table(["Prompt", "Label", "Precision", "Recall", "F1", "Support"], out)


def render_timing_table(report: TimingReport) -> str:
    rows = [[name, f"{latency:.2f}"] for name, latency in report.rows]
    rows.append(["Total", f"{report.total:.2f}"])
    return _table(["Prompt", "Seconds"], rows)


def match_records_csv(
    rows: Sequence[tuple[str, Sequence[MatchRecord]]], run_id: str = "", template_version: str = ""
) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["run_id", "template_version", "prompt", "predicted_text", "predicted_label", "gold_text", "gold_label", "gold_line", "similarity"])
    for name, records in rows:
        for r in records:
            writer.writerow(
                [
                    run_id,
                    template_version,
                    name,
                    r.predicted.text,
                    r.predicted.label.value,
                    r.gold.text if r.gold else "",
                    r.gold.label.value if r.gold else "",
                    r.gold.line if r.gold else "",
                    repr(r.similarity) if r.similarity is not None else "",
                ]
            )
    return buf.getvalue()
