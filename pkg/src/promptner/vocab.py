"""Shared vocabulary: entity labels, prompt strategies and text normalization."""

from __future__ import annotations

import enum
import re


class EntityLabel(str, enum.Enum):
    PROBLEM = "problem"
    TEST = "test"
    TREATMENT = "treatment"
    UNKNOWN = "unknown"

    @property
    def display(self) -> str:
        return self.value.capitalize()

    @classmethod
    def parse(cls, token: str) -> EntityLabel | None:
        """Case-insensitive lookup; ``None`` when the token is not a label."""
        try:
            return cls(token.strip().lower())
        except ValueError:
            return None


GOLD_LABELS = (EntityLabel.PROBLEM, EntityLabel.TEST, EntityLabel.TREATMENT)


class PromptStrategy(str, enum.Enum):
    ZERO_SHOT = "zero"
    FEW_SHOT_DOCUMENT = "doc"
    FEW_SHOT_SENTENCES = "sent"
    FEW_SHOT_ENTITIES = "ent"

    @property
    def display(self) -> str:
        return _DISPLAY[self]

    @classmethod
    def from_name(cls, name: str) -> PromptStrategy:
        name = name.strip().lower()
        for member in cls:
            if name in (member.value, member.name.lower(), member.display.lower()):
                return member
        raise ValueError(f"unknown prompt strategy: {name!r}")


_DISPLAY = {
    PromptStrategy.ZERO_SHOT: "Zero-shot",
    PromptStrategy.FEW_SHOT_DOCUMENT: "Few-shot 1",
    PromptStrategy.FEW_SHOT_SENTENCES: "Few-shot 2",
    PromptStrategy.FEW_SHOT_ENTITIES: "Few-shot 3",
}

FEW_SHOT_STRATEGIES = (
    PromptStrategy.FEW_SHOT_DOCUMENT,
    PromptStrategy.FEW_SHOT_SENTENCES,
    PromptStrategy.FEW_SHOT_ENTITIES,
)

_EDGE_JUNK = re.compile(r"^[\W_]+|[\W_]+$")


def normalize(text: str) -> str:
    """Lower-case, collapse internal whitespace, strip edge punctuation.

    >>> normalize("  UREA  N. ")
    'urea n'
    """
    out = " ".join(text.lower().split())
    out = _EDGE_JUNK.sub("", out)
    # lower() is context sensitive for a handful of characters (final sigma);
    # iterate so the result is a fixed point.
    while True:
        nxt = _EDGE_JUNK.sub("", " ".join(out.lower().split()))
        if nxt == out:
            return out
        out = nxt
