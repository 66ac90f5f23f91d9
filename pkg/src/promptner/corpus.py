"""Clinical document and concept-annotation ingestion, tagging and sampling.

Annotations follow the i2b2 concept line form::

    c="hypertension" 12:4 12:4||t="problem"

Lines are 1-indexed, tokens are 0-indexed whitespace tokens and the token
range is inclusive on both ends.
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .errors import InsufficientCorpus, OverlappingSpans, TestLeakage
from .vocab import GOLD_LABELS, EntityLabel, PromptStrategy, normalize

logger = logging.getLogger(__name__)

CONCEPT_RE = re.compile(
    r'^c="(?P<text>.*)" (?P<l1>\d+):(?P<t1>\d+) (?P<l2>\d+):(?P<t2>\d+)'
    r'\|\|t="(?P<label>[^"]*)"$'
)
TAG_RE = re.compile(r"</?(?:problem|test|treatment)>")
_TOKEN_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class ClinicalDocument:
    doc_id: str
    lines: tuple[str, ...]

    def line(self, number: int) -> str:
        """Return line ``number`` (1-indexed)."""
        if not 1 <= number <= len(self.lines):
            raise IndexError(f"{self.doc_id}: no line {number}")
        return self.lines[number - 1]

    @property
    def text(self) -> str:
        return "\n".join(self.lines)

    @classmethod
    def from_text(cls, doc_id: str, text: str) -> ClinicalDocument:
        return cls(doc_id, tuple(text.splitlines()))


@dataclass(frozen=True)
class GoldEntity:
    text: str
    label: EntityLabel
    doc_id: str
    line: int
    token_start: int
    token_end: int


@dataclass(frozen=True)
class MalformedAnnotation:
    line_no: int
    reason: str
    raw: str = ""
    doc_id: str = ""

    def __str__(self) -> str:
        where = f"{self.doc_id}:{self.line_no}" if self.doc_id else f"line {self.line_no}"
        return f"{where}: {self.reason}"


@dataclass(frozen=True)
class TaggedSentence:
    doc_id: str
    line: int
    text: str
    tagged: str
    entities: tuple[GoldEntity, ...]


@dataclass(frozen=True)
class TaggedDocument:
    doc_id: str
    tagged: str
    entities: tuple[GoldEntity, ...]


@dataclass
class SampleSet:
    strategy: PromptStrategy
    documents: list[TaggedDocument] = field(default_factory=list)
    sentences: list[TaggedSentence] = field(default_factory=list)
    entities: dict[EntityLabel, list[str]] = field(default_factory=dict)

    def mention_counts(self) -> dict[EntityLabel, int]:
        """Per-label totals of the material this sample set carries."""
        counts = {label: 0 for label in GOLD_LABELS}
        if self.strategy is PromptStrategy.FEW_SHOT_ENTITIES:
            for label, items in self.entities.items():
                counts[label] += len(items)
            return counts
        for unit in (*self.documents, *self.sentences):
            for ent in unit.entities:
                counts[ent.label] += 1
        return counts


@dataclass
class SamplingConfig:
    """Knobs for :func:`build_sample_set`.

    Explicit id lists win over counts; counts are resolved with ``seed``.
    """

    test_doc_id: str | None = None
    seed: int = 13
    document_id: str | None = None
    sentence_doc_ids: Sequence[str] | None = None
    sentence_doc_count: int = 5
    sentence_count: int = 100
    entity_doc_ids: Sequence[str] | None = None
    entity_doc_count: int | None = None
    exclude_texts: frozenset[str] = frozenset()


Corpus = Sequence[tuple[ClinicalDocument, Sequence[GoldEntity]]]


# -- annotation files ---------------------------------------------------------


def parse_concept_line(raw: str, doc_id: str = "") -> GoldEntity:
    """Parse one annotation line; raises ``ValueError`` with a reason."""
    m = CONCEPT_RE.match(raw)
    if m is None:
        raise ValueError("line does not match the concept grammar")
    label = EntityLabel.parse(m["label"])
    if label is None or label is EntityLabel.UNKNOWN or m["label"] != label.value:
        raise ValueError(f"unsupported label {m['label']!r}")
    line, t1, line2, t2 = (int(m[k]) for k in ("l1", "t1", "l2", "t2"))
    if line != line2:
        raise ValueError("span crosses lines")
    if line < 1:
        raise ValueError("line numbers start at 1")
    if t1 > t2:
        raise ValueError("token_start after token_end")
    # Reject anything that would not serialize back to the same bytes.
    if str(line) != m["l1"] or str(t1) != m["t1"] or str(line2) != m["l2"] or str(t2) != m["t2"]:
        raise ValueError("non-canonical offsets")
    return GoldEntity(m["text"], label, doc_id, line, t1, t2)


def parse_concept_file(
    raw: TextIO | Iterable[str], doc_id: str
) -> tuple[list[GoldEntity], list[MalformedAnnotation]]:
    """Parse an annotation stream into entities plus per-line errors."""
    entities: list[GoldEntity] = []
    errors: list[MalformedAnnotation] = []
    for line_no, line in enumerate(raw, start=1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        try:
            entities.append(parse_concept_line(line, doc_id))
        except ValueError as exc:
            errors.append(MalformedAnnotation(line_no, str(exc), line, doc_id))
    return entities, errors


def format_concept(entity: GoldEntity) -> str:
    return (
        f'c="{entity.text}" {entity.line}:{entity.token_start} '
        f'{entity.line}:{entity.token_end}||t="{entity.label.value}"'
    )


def token_offsets(line: str) -> list[tuple[int, int]]:
    """Character ``(start, end)`` offsets of the whitespace tokens of ``line``."""
    return [m.span() for m in _TOKEN_RE.finditer(line)]


def span_text(line: str, token_start: int, token_end: int) -> str:
    tokens = line.split()
    return " ".join(tokens[token_start : token_end + 1])


def check_entity(doc: ClinicalDocument, entity: GoldEntity) -> str | None:
    """Return a reason string when ``entity`` does not fit ``doc``, else None."""
    if not 1 <= entity.line <= len(doc.lines):
        return f"line {entity.line} outside document ({len(doc.lines)} lines)"
    n_tokens = len(doc.line(entity.line).split())
    if entity.token_end >= n_tokens:
        return f"token {entity.token_end} outside line of {n_tokens} tokens"
    actual = span_text(doc.line(entity.line), entity.token_start, entity.token_end)
    if normalize(actual) != normalize(entity.text):
        return f"text {entity.text!r} does not match tokens {actual!r}"
    return None


def load_document(path: Path, doc_id: str | None = None) -> ClinicalDocument:
    text = Path(path).read_text(encoding="utf-8")
    return ClinicalDocument.from_text(doc_id or Path(path).stem, text)


def load_corpus_dir(
    root: Path,
) -> tuple[list[tuple[ClinicalDocument, list[GoldEntity]]], list[MalformedAnnotation]]:
    """Load ``root/docs/*.txt`` with matching ``root/concepts/*.con`` files.

    Documents without an annotation file are loaded with no entities.
    Entities failing :func:`check_entity` are reported and dropped.
    """
    root = Path(root)
    docs_dir = root / "docs"
    concepts_dir = root / "concepts"
    corpus = []
    errors: list[MalformedAnnotation] = []
    if not docs_dir.is_dir():
        return corpus, errors
    for doc_path in sorted(docs_dir.glob("*.txt")):
        doc = load_document(doc_path)
        con_path = concepts_dir / f"{doc.doc_id}.con"
        entities: list[GoldEntity] = []
        if con_path.exists():
            with con_path.open(encoding="utf-8") as fh:
                parsed, errs = parse_concept_file(fh, doc.doc_id)
            errors.extend(errs)
            for ent in parsed:
                reason = check_entity(doc, ent)
                if reason:
                    errors.append(MalformedAnnotation(0, reason, format_concept(ent), doc.doc_id))
                else:
                    entities.append(ent)
        corpus.append((doc, entities))
    return corpus, errors


# -- tagging ------------------------------------------------------------------


def tag_text(line: str, entities: Sequence[GoldEntity]) -> str:
    """Wrap each entity's token span in ``<label>...</label>`` tags."""
    if not entities:
        return line
    offsets = token_offsets(line)
    spans = sorted(entities, key=lambda e: (e.token_start, e.token_end))
    for prev, cur in zip(spans, spans[1:]):
        if cur.token_start <= prev.token_end:
            raise OverlappingSpans(
                f"{prev.text!r} [{prev.token_start},{prev.token_end}] overlaps "
                f"{cur.text!r} [{cur.token_start},{cur.token_end}]"
            )
    out = []
    pos = 0
    for ent in spans:
        if ent.token_end >= len(offsets):
            raise ValueError(f"span of {ent.text!r} exceeds line tokens")
        start = offsets[ent.token_start][0]
        end = offsets[ent.token_end][1]
        tag = ent.label.value
        out.append(line[pos:start])
        out.append(f"<{tag}>{line[start:end]}</{tag}>")
        pos = end
    out.append(line[pos:])
    return "".join(out)


def untag(text: str) -> str:
    return TAG_RE.sub("", text)


def _by_line(entities: Iterable[GoldEntity]) -> dict[int, list[GoldEntity]]:
    grouped: dict[int, list[GoldEntity]] = {}
    for ent in entities:
        grouped.setdefault(ent.line, []).append(ent)
    return grouped


def tag_document(doc: ClinicalDocument, entities: Sequence[GoldEntity]) -> TaggedDocument:
    grouped = _by_line(entities)
    lines = [tag_text(line, grouped.get(no, [])) for no, line in enumerate(doc.lines, start=1)]
    return TaggedDocument(doc.doc_id, "\n".join(lines), tuple(entities))


# -- sampling -----------------------------------------------------------------


def build_sample_set(
    strategy: PromptStrategy, corpus: Corpus, limits: SamplingConfig | None = None
) -> SampleSet:
    """Draw the few-shot material for ``strategy`` from the training pool."""
    limits = limits or SamplingConfig()
    by_id = {doc.doc_id: (doc, list(ents)) for doc, ents in corpus}
    if limits.test_doc_id is not None and limits.test_doc_id in by_id:
        raise TestLeakage(f"test document {limits.test_doc_id!r} is in the training pool")

    if strategy is PromptStrategy.ZERO_SHOT:
        return SampleSet(strategy)
    if not by_id:
        raise InsufficientCorpus("training corpus is empty")
    rng = random.Random(limits.seed)
    if strategy is PromptStrategy.FEW_SHOT_DOCUMENT:
        return _sample_document(by_id, limits, rng)
    if strategy is PromptStrategy.FEW_SHOT_SENTENCES:
        return _sample_sentences(by_id, limits, rng)
    return _sample_entities(by_id, limits, rng)


def _lookup(by_id, doc_id):
    try:
        return by_id[doc_id]
    except KeyError:
        raise InsufficientCorpus(f"document {doc_id!r} not in the training pool") from None


def _sample_document(by_id, limits: SamplingConfig, rng: random.Random) -> SampleSet:
    if limits.document_id is not None:
        doc_id = limits.document_id
    else:
        annotated = sorted(d for d, (_, ents) in by_id.items() if ents)
        if not annotated:
            raise InsufficientCorpus("no annotated document available")
        doc_id = rng.choice(annotated)
    doc, ents = _lookup(by_id, doc_id)
    return SampleSet(PromptStrategy.FEW_SHOT_DOCUMENT, documents=[tag_document(doc, ents)])


def _sample_sentences(by_id, limits: SamplingConfig, rng: random.Random) -> SampleSet:
    candidates: dict[str, list[int]] = {
        doc_id: sorted(_by_line(ents)) for doc_id, (_, ents) in by_id.items()
    }
    if limits.sentence_doc_ids is not None:
        chosen = list(limits.sentence_doc_ids)
        for doc_id in chosen:
            _lookup(by_id, doc_id)
    else:
        eligible = sorted(d for d, lines in candidates.items() if lines)
        if len(eligible) < limits.sentence_doc_count:
            raise InsufficientCorpus(
                f"need {limits.sentence_doc_count} annotated documents, have {len(eligible)}"
            )
        rng.shuffle(eligible)
        # Stable sort keeps the seeded order among equally rich documents.
        eligible.sort(key=lambda d: -len(candidates[d]))
        chosen = eligible[: limits.sentence_doc_count]

    available = sum(len(candidates[d]) for d in chosen)
    if available < limits.sentence_count:
        raise InsufficientCorpus(
            f"need {limits.sentence_count} annotated sentences, documents {chosen} have {available}"
        )

    queues = {}
    for doc_id in sorted(chosen):
        lines = list(candidates[doc_id])
        rng.shuffle(lines)
        queues[doc_id] = lines
    picked: list[tuple[str, int]] = []
    while len(picked) < limits.sentence_count:
        for doc_id in sorted(queues):
            if queues[doc_id] and len(picked) < limits.sentence_count:
                picked.append((doc_id, queues[doc_id].pop()))

    sentences = []
    for doc_id, line_no in sorted(picked):
        doc, ents = by_id[doc_id]
        on_line = tuple(e for e in ents if e.line == line_no)
        text = doc.line(line_no)
        sentences.append(TaggedSentence(doc_id, line_no, text, tag_text(text, on_line), on_line))
    return SampleSet(PromptStrategy.FEW_SHOT_SENTENCES, sentences=sentences)


def _sample_entities(by_id, limits: SamplingConfig, rng: random.Random) -> SampleSet:
    if limits.entity_doc_ids is not None:
        doc_ids = sorted(limits.entity_doc_ids)
        for doc_id in doc_ids:
            _lookup(by_id, doc_id)
    elif limits.entity_doc_count is not None:
        pool = sorted(by_id)
        if len(pool) < limits.entity_doc_count:
            raise InsufficientCorpus(
                f"need {limits.entity_doc_count} documents, have {len(pool)}"
            )
        doc_ids = sorted(rng.sample(pool, limits.entity_doc_count))
    else:
        doc_ids = sorted(by_id)

    excluded = {normalize(t) for t in limits.exclude_texts}
    lists: dict[EntityLabel, list[str]] = {label: [] for label in GOLD_LABELS}
    seen: dict[EntityLabel, set[str]] = {label: set() for label in GOLD_LABELS}
    for doc_id in doc_ids:
        _, ents = by_id[doc_id]
        for ent in sorted(ents, key=lambda e: (e.line, e.token_start, e.token_end)):
            text = normalize(ent.text)
            if not text or text in excluded or text in seen[ent.label]:
                continue
            seen[ent.label].add(text)
            lists[ent.label].append(text)
    if not any(lists.values()):
        raise InsufficientCorpus("no entities available for entity sampling")
    return SampleSet(PromptStrategy.FEW_SHOT_ENTITIES, entities=lists)
