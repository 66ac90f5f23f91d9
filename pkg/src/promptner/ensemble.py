"""Prompt ensemble: cluster entities across prompt runs, then vote on labels.

Entities from all runs are scanned in a fixed order (strategy name, then
position in the response). Each entity joins the first existing cluster whose
representative (first member) has similarity >= tau, otherwise it founds a
new cluster. A cluster gets the label held by at least two members when that
label is the unique most frequent one; otherwise it is labeled unknown.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .embedding import EmbeddingProvider, EmbeddingVector, cosine_similarity, embed_texts
from .errors import MissingRuns
from .parser import ExtractedEntity
from .vocab import EntityLabel, PromptStrategy

DEFAULT_TAU = 0.92
MIN_VOTES = 2

Similarity = Callable[[EmbeddingVector, EmbeddingVector], float]


@dataclass
class PredictionSet:
    runs: dict[PromptStrategy, list[ExtractedEntity]]

    def __post_init__(self):
        if len(self.runs) < 2:
            raise MissingRuns(f"ensemble needs at least 2 runs, got {len(self.runs)}")
        for strategy, entities in self.runs.items():
            for ent in entities:
                if ent.source is not strategy:
                    raise ValueError(f"{ent.text!r} comes from {ent.source.value}, filed under {strategy.value}")

    def flatten(self) -> list[ExtractedEntity]:
        """All entities ordered by strategy name, then ordinal."""
        out = []
        for strategy in sorted(self.runs, key=lambda s: s.value):
            out.extend(sorted(self.runs[strategy], key=lambda e: e.ordinal))
        return out


@dataclass
class EntityCluster:
    members: list[tuple[ExtractedEntity, EmbeddingVector]] = field(default_factory=list)

    @property
    def representative(self) -> str:
        return self.members[0][0].text

    @property
    def sources(self) -> set[PromptStrategy]:
        return {ent.source for ent, _ in self.members}

    @property
    def labels(self) -> list[EntityLabel]:
        return [ent.label for ent, _ in self.members]


@dataclass(frozen=True)
class EnsemblePrediction:
    text: str
    label: EntityLabel
    support: int
    cluster_size: int
    members: tuple[ExtractedEntity, ...] = ()

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "label": self.label.value,
            "support": self.support,
            "cluster_size": self.cluster_size,
            "members": [
                {"text": m.text, "label": m.label.value, "source": m.source.value} for m in self.members
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> EnsemblePrediction:
        members = tuple(
            ExtractedEntity(m["text"], m["text"], EntityLabel(m["label"]), PromptStrategy(m["source"]), i)
            for i, m in enumerate(data.get("members", []))
        )
        return cls(data["text"], EntityLabel(data["label"]), int(data["support"]), int(data["cluster_size"]), members)


def cluster_entities(
    items: Sequence[tuple[ExtractedEntity, EmbeddingVector]],
    tau: float = DEFAULT_TAU,
    similarity: Similarity = cosine_similarity,
) -> list[EntityCluster]:
    clusters: list[EntityCluster] = []
    for ent, vec in items:
        for cluster in clusters:
            if similarity(cluster.members[0][1], vec) >= tau:
                cluster.members.append((ent, vec))
                break
        else:
            clusters.append(EntityCluster([(ent, vec)]))
    return clusters


def majority_vote(cluster: EntityCluster) -> EnsemblePrediction:
    freq = Counter(label for label in cluster.labels if label is not EntityLabel.UNKNOWN)
    members = tuple(ent for ent, _ in cluster.members)
    top = freq.most_common()
    if top and top[0][1] >= MIN_VOTES and (len(top) == 1 or top[1][1] < top[0][1]):
        label, support = top[0]
    else:
        label, support = EntityLabel.UNKNOWN, 0
    return EnsemblePrediction(cluster.representative, label, support, len(members), members)


def run_ensemble(
    predictions: PredictionSet | Mapping[PromptStrategy, list[ExtractedEntity]],
    provider: EmbeddingProvider,
    tau: float = DEFAULT_TAU,
    similarity: Similarity = cosine_similarity,
) -> list[EnsemblePrediction]:
    if not isinstance(predictions, PredictionSet):
        predictions = PredictionSet(dict(predictions))
    entities = predictions.flatten()
    vectors = embed_texts([e.text for e in entities], provider)
    clusters = cluster_entities(list(zip(entities, vectors)), tau, similarity)
    return [majority_vote(c) for c in clusters]
