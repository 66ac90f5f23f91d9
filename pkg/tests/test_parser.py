from hypothesis import given
from hypothesis import strategies as st

from promptner.parser import match_entity_line, parse_response, strip_preamble
from promptner.vocab import EntityLabel, PromptStrategy, normalize

S = PromptStrategy.FEW_SHOT_DOCUMENT


def test_single_entity():
    report = parse_response("aspirin | treatment", S)
    [ent] = report.entities
    assert (ent.text, ent.label, ent.source, ent.ordinal) == ("aspirin", EntityLabel.TREATMENT, S, 0)


def test_duplicates_collapsed():
    report = parse_response("glucose | test\nglucose | test", S)
    assert len(report.entities) == 1
    assert report.duplicate_count == 1


def test_prose_line_is_malformed():
    report = parse_response("the patient was admitted", S)
    assert report.entities == []
    assert len(report.malformed) == 1
    assert report.malformed[0].line_no == 1


def test_unknown_label_mapping():
    report = parse_response("colitis | medication", S)
    assert report.entities[0].label is EntityLabel.UNKNOWN
    assert report.entities[0].text == "colitis"
    assert len(report.warnings) == 1


def test_labels_case_insensitive_and_text_normalized():
    report = parse_response("  Lower  Abd Pain |  PROBLEM ", S)
    ent = report.entities[0]
    assert ent.label is EntityLabel.PROBLEM
    assert ent.text == "lower abd pain"
    assert ent.raw_text == "Lower  Abd Pain"


def test_same_text_different_labels_both_kept():
    report = parse_response("fluid | test\nfluid | treatment", S)
    assert [e.label for e in report.entities] == [EntityLabel.TEST, EntityLabel.TREATMENT]
    assert [e.ordinal for e in report.entities] == [0, 1]


def test_pipe_inside_entity_text_uses_last_delimiter():
    assert match_entity_line("a | b | test") == ("a | b", "test")


def test_empty_entity_is_malformed():
    report = parse_response(" -- | test", S)
    assert report.entities == [] and len(report.malformed) == 1


def test_strip_preamble_examples():
    assert strip_preamble("Here are the entities:\naspirin | treatment") == "aspirin | treatment"
    assert strip_preamble("aspirin | treatment") == "aspirin | treatment"
    text = "```\naspirin | treatment\nglucose | test\n```\nLet me know if you need more."
    assert strip_preamble(text) == "aspirin | treatment\nglucose | test"
    assert strip_preamble("nothing useful here") == ""


def test_strip_preamble_keeps_interior_lines():
    text = "Sure.\na | test\nnote: more below\nb | problem\nThanks!"
    assert strip_preamble(text) == "a | test\nnote: more below\nb | problem"


def _grammar_oracle(line: str) -> bool:
    # independent per-line check: "<something> | <word>"
    if line.lstrip().startswith("```") or "|" not in line:
        return False
    head, _, tail = line.rpartition("|")
    tail = tail.strip()
    return bool(normalize(head)) and tail[:1].isascii() and tail[:1].isalpha() and all(
        c.isalnum() or c in "_-" for c in tail
    )


lines = st.one_of(
    st.builds(
        lambda t, l: f"{t} | {l}",
        st.text(alphabet="abcdefgh -.()", min_size=1, max_size=12),
        st.sampled_from(["problem", "Test", "TREATMENT", "unknown", "drug"]),
    ),
    st.sampled_from(["", "Here you go:", "```", "```text", "Let me know if...", "| x |", "note: a|", "   "]),
    st.text(alphabet="abc |\n", max_size=12),
)
responses = st.lists(lines, max_size=12).map("\n".join)


@given(responses)
def test_strip_preamble_preserves_entities(text):
    stripped = strip_preamble(text)
    assert parse_response(stripped, S).entities == parse_response(text, S).entities


@given(responses)
def test_strip_preamble_idempotent(text):
    once = strip_preamble(text)
    assert strip_preamble(once) == once


@given(responses)
def test_strip_preamble_edges_match_grammar(text):
    out = strip_preamble(text).splitlines()
    if out:
        assert _grammar_oracle(out[0]) and _grammar_oracle(out[-1])


@given(responses)
def test_line_accounting(text):
    report = parse_response(text, S)
    n_lines = len(text.splitlines())
    assert n_lines == len(report.entities) + len(report.malformed) + report.blank_lines + report.duplicate_count


@given(responses)
def test_entities_are_normalized_and_non_empty(text):
    for ent in parse_response(text, S).entities:
        assert ent.text and normalize(ent.text) == ent.text
        assert ent.text == normalize(ent.raw_text)
        assert ent.label in EntityLabel
