"""Prompt rendering for the zero-shot and few-shot strategies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .corpus import ClinicalDocument, SampleSet
from .errors import BudgetUnsatisfiable
from .vocab import GOLD_LABELS, PromptStrategy

DEFAULT_TEMPLATE_VERSION = "v1"

INSTRUCTION_SECTIONS = (
    "task_definition",
    "context",
    "category_definitions",
    "output_format",
    "unknown_instruction",
)
FEW_SHOT_TEMPLATES = {
    PromptStrategy.FEW_SHOT_DOCUMENT: "few_shot_document",
    PromptStrategy.FEW_SHOT_SENTENCES: "few_shot_sentences",
    PromptStrategy.FEW_SHOT_ENTITIES: "few_shot_entities",
}
SECTION_SEPARATOR = "\n\n"
QUOTE = '"""'


@dataclass(frozen=True)
class TemplateSet:
    version: str
    texts: dict[str, str] = field(hash=False)

    def __getitem__(self, name: str) -> str:
        return self.texts[name]

    @classmethod
    def load(cls, version: str = DEFAULT_TEMPLATE_VERSION, directory: Path | None = None) -> TemplateSet:
        """Load templates bundled with the package, or from ``directory``."""
        names = (*INSTRUCTION_SECTIONS, *FEW_SHOT_TEMPLATES.values(), "test_input")
        texts = {}
        for name in names:
            if directory is not None:
                raw = (Path(directory) / f"{name}.txt").read_text(encoding="utf-8")
            else:
                ref = resources.files("promptner") / "templates" / version / f"{name}.txt"
                raw = ref.read_text(encoding="utf-8")
            texts[name] = raw.rstrip("\n")
        return cls(version, texts)


@dataclass(frozen=True)
class BudgetConfig:
    max_tokens: int | None = 128_000
    trim_fraction: float = 0.10
    max_trims: int = 1


@dataclass(frozen=True)
class PromptArtifact:
    strategy: PromptStrategy
    sections: tuple[tuple[str, str], ...]
    token_estimate: int
    template_version: str
    trims: int = 0
    samples: SampleSet | None = field(default=None, compare=False, repr=False)

    @property
    def text(self) -> str:
        return SECTION_SEPARATOR.join(body for _, body in self.sections)

    def section(self, name: str) -> str:
        for key, body in self.sections:
            if key == name:
                return body
        raise KeyError(name)

    @property
    def section_names(self) -> list[str]:
        return [name for name, _ in self.sections]


def estimate_tokens(text: str) -> int:
    """ceil(utf-8 byte length / 4)."""
    return -(-len(text.encode("utf-8")) // 4)


def trim_entity_samples(samples: SampleSet, fraction: float = 0.10) -> SampleSet:
    """Drop ``ceil(fraction * n)`` items from the tail of every label's list."""
    if not 0 < fraction < 1:
        raise ValueError(f"trim fraction must lie in (0, 1), got {fraction}")
    if samples.strategy is not PromptStrategy.FEW_SHOT_ENTITIES:
        raise ValueError("only entity sample sets can be trimmed")
    # Exact rational arithmetic: 0.1 * 30 must remove 3, not 4.
    frac = Fraction(repr(fraction))
    trimmed = {}
    for label, items in samples.entities.items():
        drop = math.ceil(frac * len(items))
        trimmed[label] = list(items[: len(items) - drop])
    return replace(samples, entities=trimmed)


def render_few_shot_block(samples: SampleSet) -> str:
    if samples.strategy is PromptStrategy.FEW_SHOT_DOCUMENT:
        body = "\n\n".join(doc.tagged for doc in samples.documents)
    elif samples.strategy is PromptStrategy.FEW_SHOT_SENTENCES:
        body = "\n".join(s.tagged for s in samples.sentences)
    elif samples.strategy is PromptStrategy.FEW_SHOT_ENTITIES:
        rows = []
        for label in GOLD_LABELS:
            items = samples.entities.get(label, [])
            if items:
                tag = label.value
                rows.append(f"{label.display}: " + ", ".join(f"<{tag}>{t}</{tag}>" for t in items))
        body = "\n".join(rows)
    else:
        raise ValueError(f"{samples.strategy} has no few-shot block")
    return f"{QUOTE}\n{body}\n{QUOTE}"


def _render(
    strategy: PromptStrategy,
    samples: SampleSet,
    test_document: ClinicalDocument,
    templates: TemplateSet,
    trims: int,
) -> PromptArtifact:
    sections = [(name, templates[name]) for name in INSTRUCTION_SECTIONS]
    if strategy is not PromptStrategy.ZERO_SHOT:
        block = render_few_shot_block(samples)
        sections.append(
            ("few_shot_block", templates[FEW_SHOT_TEMPLATES[strategy]].replace("{FEW_SHOT_BLOCK}", block))
        )
    sections.append(("test_input", templates["test_input"].replace("{TEST_INPUT}", test_document.text)))
    text = SECTION_SEPARATOR.join(body for _, body in sections)
    return PromptArtifact(
        strategy=strategy,
        sections=tuple(sections),
        token_estimate=estimate_tokens(text),
        template_version=templates.version,
        trims=trims,
        samples=samples,
    )


def build_prompt(
    strategy: PromptStrategy,
    samples: SampleSet,
    test_document: ClinicalDocument,
    budget: BudgetConfig | None = None,
    templates: TemplateSet | None = None,
    trims: int = 0,
) -> PromptArtifact:
    """Render the prompt for ``strategy``.

    Entity prompts over ``budget.max_tokens`` are trimmed (at most
    ``budget.max_trims`` times); any prompt still over budget raises
    :class:`BudgetUnsatisfiable`. ``trims`` counts trims already applied to
    ``samples`` by the caller and is carried into the artifact.
    """
    budget = budget or BudgetConfig()
    templates = templates or TemplateSet.load()
    if samples.strategy is not strategy:
        raise ValueError(f"sample set is for {samples.strategy.name}, not {strategy.name}")
    if not any(line.strip() for line in test_document.lines):
        raise ValueError(f"test document {test_document.doc_id!r} is empty")

    artifact = _render(strategy, samples, test_document, templates, trims)
    if budget.max_tokens is None:
        return artifact
    while artifact.token_estimate > budget.max_tokens:
        if strategy is not PromptStrategy.FEW_SHOT_ENTITIES or artifact.trims - trims >= budget.max_trims:
            raise BudgetUnsatisfiable(
                f"{strategy.display} prompt needs ~{artifact.token_estimate} tokens, "
                f"budget is {budget.max_tokens}"
            )
        samples = trim_entity_samples(samples, budget.trim_fraction)
        artifact = _render(strategy, samples, test_document, templates, artifact.trims + 1)
    return artifact
