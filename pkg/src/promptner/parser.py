"""Parse model responses of the form ``<entity text> | <label>`` per line."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .vocab import EntityLabel, PromptStrategy, normalize

logger = logging.getLogger(__name__)

LINE_GRAMMAR = "<entity text> | <label>"
ENTITY_LINE_RE = re.compile(r"^(?P<text>.*\S)\s*\|\s*(?P<label>[A-Za-z][\w-]*)\s*$")
FENCE_RE = re.compile(r"^\s*```")


@dataclass(frozen=True)
class ExtractedEntity:
    text: str
    raw_text: str
    label: EntityLabel
    source: PromptStrategy
    ordinal: int

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "raw_text": self.raw_text,
            "label": self.label.value,
            "source": self.source.value,
            "ordinal": self.ordinal,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ExtractedEntity:
        return cls(
            data["text"],
            data["raw_text"],
            EntityLabel(data["label"]),
            PromptStrategy(data["source"]),
            int(data["ordinal"]),
        )


@dataclass(frozen=True)
class MalformedLine:
    line_no: int
    raw_line: str
    reason: str


@dataclass
class ParseReport:
    entities: list[ExtractedEntity] = field(default_factory=list)
    malformed: list[MalformedLine] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    duplicate_count: int = 0
    blank_lines: int = 0


def match_entity_line(line: str) -> tuple[str, str] | None:
    """Return ``(raw_text, label_token)`` when ``line`` fits the grammar."""
    m = ENTITY_LINE_RE.match(line)
    if m is None or FENCE_RE.match(line):
        return None
    raw = m["text"].strip()
    if not normalize(raw):
        return None
    return raw, m["label"]


def parse_response(response_text: str, source: PromptStrategy) -> ParseReport:
    report = ParseReport()
    seen: set[tuple[str, EntityLabel]] = set()
    for line_no, line in enumerate(response_text.splitlines(), start=1):
        if not line.strip():
            report.blank_lines += 1
            continue
        matched = match_entity_line(line)
        if matched is None:
            reason = "no entity delimiter" if "|" not in line else "malformed entity line"
            report.malformed.append(MalformedLine(line_no, line, reason))
            continue
        raw, token = matched
        label = EntityLabel.parse(token)
        if label is None:
            label = EntityLabel.UNKNOWN
            report.warnings.append(f"line {line_no}: unrecognized label {token!r}, using unknown")
        text = normalize(raw)
        if (text, label) in seen:
            report.duplicate_count += 1
            continue
        seen.add((text, label))
        report.entities.append(ExtractedEntity(text, raw, label, source, len(report.entities)))
    if report.warnings:
        logger.debug("%s: %d label warnings", source.value, len(report.warnings))
    return report


def strip_preamble(response_text: str) -> str:
    """Drop fence markers and the prose before the first / after the last entity line."""
    lines = [line for line in response_text.splitlines() if not FENCE_RE.match(line)]
    hits = [i for i, line in enumerate(lines) if match_entity_line(line)]
    if not hits:
        return ""
    return "\n".join(lines[hits[0] : hits[-1] + 1])
