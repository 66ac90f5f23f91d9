"""Synthetic corpora and stub similarity tables for tests.

The corpus generator knows exactly how many mentions it planted, so its
return value doubles as the expected-count oracle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from promptner.corpus import ClinicalDocument, GoldEntity
from promptner.embedding import EmbeddingVector
from promptner.vocab import GOLD_LABELS, EntityLabel

FILLER = "the patient was seen today and noted to be stable overall".split()


@dataclass
class SyntheticCorpus:
    documents: list[tuple[ClinicalDocument, list[GoldEntity]]] = field(default_factory=list)
    planted: dict[EntityLabel, int] = field(default_factory=dict)
    distinct: dict[EntityLabel, int] = field(default_factory=dict)

    def write(self, root: Path) -> None:
        """Write i2b2-style ``docs/*.txt`` and ``concepts/*.con`` under ``root``."""
        (root / "docs").mkdir(parents=True, exist_ok=True)
        (root / "concepts").mkdir(parents=True, exist_ok=True)
        for doc, ents in self.documents:
            (root / "docs" / f"{doc.doc_id}.txt").write_text("\n".join(doc.lines) + "\n", encoding="utf-8")
            lines = [
                f'c="{e.text}" {e.line}:{e.token_start} {e.line}:{e.token_end}||t="{e.label.value}"' for e in ents
            ]
            (root / "concepts" / f"{doc.doc_id}.con").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _line_with(mentions: list[tuple[EntityLabel, str]], doc_id: str, line_no: int, rng: random.Random):
    tokens: list[str] = []
    ents = []
    for label, text in mentions:
        tokens.extend(rng.sample(FILLER, rng.randint(1, 3)))
        start = len(tokens)
        tokens.extend(text.split())
        ents.append(GoldEntity(text, label, doc_id, line_no, start, len(tokens) - 1))
    tokens.extend(rng.sample(FILLER, rng.randint(0, 2)))
    return " ".join(tokens), ents


def sentence_corpus(counts: dict[EntityLabel, int], n_docs: int = 5, n_lines: int = 100, seed: int = 0):
    """``n_docs`` documents holding exactly ``n_lines`` annotated lines with ``counts`` mentions."""
    rng = random.Random(seed)
    labels = [label for label in GOLD_LABELS for _ in range(counts[label])]
    rng.shuffle(labels)
    per_line: list[list[EntityLabel]] = [[labels[i]] for i in range(n_lines)]
    for label in labels[n_lines:]:
        per_line[rng.randrange(n_lines)].append(label)
    corpus = SyntheticCorpus(planted=dict(counts))
    for d in range(n_docs):
        doc_id = f"sent-{d:02d}"
        lines, ents = [], []
        for k, line_labels in enumerate(per_line[d::n_docs]):
            # an unannotated line between annotated ones
            lines.append(" ".join(rng.sample(FILLER, 5)))
            text, line_ents = _line_with(
                [(lab, f"{lab.value}{rng.randrange(10**6)} finding") for lab in line_labels], doc_id, len(lines) + 1, rng
            )
            lines.append(text)
            ents.extend(line_ents)
        corpus.documents.append((ClinicalDocument(doc_id, tuple(lines)), ents))
    return corpus


def entity_corpus(distinct: dict[EntityLabel, int], n_docs: int = 73, repeats: float = 0.3, seed: int = 0):
    """``n_docs`` documents with ``distinct`` unique entity strings per label, plus repeats."""
    rng = random.Random(seed)
    pool = [(label, f"{label.value} term {i}") for label in GOLD_LABELS for i in range(distinct[label])]
    mentions = pool + [rng.choice(pool) for _ in range(int(len(pool) * repeats))]
    rng.shuffle(mentions)
    corpus = SyntheticCorpus(distinct=dict(distinct))
    planted = {label: 0 for label in GOLD_LABELS}
    chunks = [mentions[i::n_docs] for i in range(n_docs)]
    for d, chunk in enumerate(chunks):
        doc_id = f"ent-{d:03d}"
        lines, ents = [], []
        for i in range(0, len(chunk), 3):
            text, line_ents = _line_with(chunk[i : i + 3], doc_id, len(lines) + 1, rng)
            lines.append(text)
            ents.extend(line_ents)
        for e in ents:
            planted[e.label] += 1
        corpus.documents.append((ClinicalDocument(doc_id, tuple(lines)), ents))
    corpus.planted = planted
    return corpus


class SimilarityTable:
    """Stub embedding provider whose similarities come from a fixed table.

    Each text embeds to a one-hot vector of its index; :meth:`similarity`
    reads the table instead of computing a cosine.
    """

    provider_id = "table"

    def __init__(self, texts: list[str], scores: dict[tuple[str, str], float] | None = None, default: float = 0.0):
        self.texts = list(dict.fromkeys(texts))
        self.index = {t: i for i, t in enumerate(self.texts)}
        n = len(self.texts)
        self.matrix = np.full((n, n), default)
        np.fill_diagonal(self.matrix, 1.0)
        for (a, b), s in (scores or {}).items():
            self.set(a, b, s)

    def set(self, a: str, b: str, score: float) -> None:
        i, j = self.index[a], self.index[b]
        self.matrix[i, j] = self.matrix[j, i] = score

    def vector(self, text: str) -> EmbeddingVector:
        v = np.zeros(len(self.texts))
        v[self.index[text]] = 1.0
        return EmbeddingVector(v, self.provider_id)

    def embed_many(self, texts):
        return [self.vector(t) for t in texts]

    def similarity(self, a: EmbeddingVector, b: EmbeddingVector) -> float:
        return float(self.matrix[int(np.argmax(a.values)), int(np.argmax(b.values))])


CLINICAL_TERMS = [
    "lower abdominal pain",
    "angiography",
    "urea nitrogen",
    "chest pain",
    "blood pressure",
    "heparin drip",
    "shortness of breath",
    "chest x-ray",
    "metoprolol",
    "creatinine",
    "pneumonia",
    "atrial fibrillation",
]


def variant(base: str, rng: random.Random) -> str:
    """A surface variant of ``base``: a suffix, a dropped character or a prefix."""
    kind = rng.randrange(4)
    if kind == 0:
        return base
    if kind == 1:
        return f"{base} {rng.choice(['-25', 'x2', 'noted', 'acute'])}"
    if kind == 2 and len(base) > 4:
        i = rng.randrange(1, len(base) - 1)
        return base[:i] + base[i + 1 :]
    return f"{rng.choice(['mild', 'severe', 'left', 'new'])} {base}"


def random_entity_texts(rng: random.Random, n_min: int = 3, n_max: int = 12) -> list[str]:
    bases = rng.sample(CLINICAL_TERMS, rng.randint(1, 4))
    return [variant(rng.choice(bases), rng) for _ in range(rng.randint(n_min, n_max))]
