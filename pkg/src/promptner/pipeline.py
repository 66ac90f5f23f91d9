"""End-to-end pipeline: ingest -> run -> ensemble -> evaluate.

Layout under ``output_dir``::

    corpus.json                      parsed training pool + test document
    runs/<run_id>/manifest.json      written last by ``run``
    runs/<run_id>/entities/<s>.json  one file per prompt strategy
    runs/<run_id>/ensemble.json
    runs/<run_id>/report.{json,txt}, matches.csv
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

import yaml

from .corpus import (
    ClinicalDocument,
    GoldEntity,
    MalformedAnnotation,
    SamplingConfig,
    build_sample_set,
    load_corpus_dir,
)
from .embedding import EmbeddingCache, LocalTrigramEmbedder, RemoteEmbedder
from .ensemble import DEFAULT_TAU, EnsemblePrediction, PredictionSet, run_ensemble
from .errors import (
    DataError,
    EmptyMatchSet,
    InsufficientCorpus,
    MissingRuns,
    PromptNerError,
    RunMismatch,
    TestLeakage,
    ZeroGold,
)
from .evaluation import (
    classification_metrics,
    extraction_metrics,
    match_predictions,
    match_records_csv,
    render_classification_table,
    render_extraction_table,
    render_per_label_table,
    render_timing_table,
    timing_report,
)
from .gateway import CompletionCache, CompletionRecord, Gateway, GenerationConfig, StrategyContext, run_strategy
from .parser import ExtractedEntity
from .prompts import BudgetConfig, TemplateSet
from .transport import Transport
from .vocab import FEW_SHOT_STRATEGIES, GOLD_LABELS, EntityLabel, PromptStrategy

logger = logging.getLogger(__name__)

MATCHING_POLICY = "one-to-one, greedy by descending similarity (ties: prediction order, then gold order)"


@dataclass
class PipelineConfig:
    train_dir: Path
    test_dir: Path
    output_dir: Path
    cache_dir: Path
    test_doc_id: str | None = None
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    endpoint_url: str = "https://api.openai.com/v1/chat/completions"
    api_key_env: str = "PROMPTNER_API_KEY"
    generation: GenerationConfig = field(default_factory=lambda: GenerationConfig("gpt-4o"))
    mode: str = "replay"
    tau: float = DEFAULT_TAU
    budget: BudgetConfig = field(default_factory=BudgetConfig)
    template_version: str = "v1"
    template_dir: Path | None = None
    embedding_provider: str = "local"
    embedding_url: str | None = None
    embedding_api_key_env: str | None = "PROMPTNER_EMBEDDING_API_KEY"
    jobs: int = 1

    def __post_init__(self):
        if not 0 < self.tau <= 1:
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")

    @classmethod
    def from_file(cls, path: Path, check_paths: bool = True) -> PipelineConfig:
        path = Path(path)
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        return cls.from_dict(data, base=path.parent, check_paths=check_paths)

    @classmethod
    def from_dict(cls, data: dict, base: Path = Path("."), check_paths: bool = True) -> PipelineConfig:
        def p(value):
            return None if value is None else (Path(base) / value)

        corpus = data.get("corpus", {})
        sampling = data.get("sampling", {})
        llm = data.get("llm", {})
        emb = data.get("embedding", {})
        budget = data.get("budget", {})
        trim = data.get("trim", {})
        template = data.get("template", {})
        cfg = cls(
            train_dir=p(corpus.get("train", "corpus/train")),
            test_dir=p(corpus.get("test", "corpus/test")),
            test_doc_id=corpus.get("test_doc"),
            output_dir=p(data.get("output_dir", "out")),
            cache_dir=p(data.get("cache_dir", "cache")),
            sampling=SamplingConfig(
                seed=int(sampling.get("seed", 13)),
                document_id=sampling.get("document_id"),
                sentence_doc_ids=sampling.get("sentence_doc_ids"),
                sentence_doc_count=int(sampling.get("sentence_doc_count", 5)),
                sentence_count=int(sampling.get("sentence_count", 100)),
                entity_doc_ids=sampling.get("entity_doc_ids"),
                entity_doc_count=sampling.get("entity_doc_count"),
            ),
            endpoint_url=llm.get("endpoint", "https://api.openai.com/v1/chat/completions"),
            api_key_env=llm.get("api_key_env", "PROMPTNER_API_KEY"),
            generation=GenerationConfig(
                model_id=llm.get("model_id", "gpt-4o"),
                temperature=float(llm.get("temperature", 0.2)),
                top_p=float(llm.get("top_p", 1.0)),
                max_output_tokens=int(llm.get("max_output_tokens", 4096)),
            ),
            mode=llm.get("mode", "replay"),
            tau=float(data.get("tau", DEFAULT_TAU)),
            budget=BudgetConfig(
                max_tokens=budget.get("max_tokens", 128_000),
                trim_fraction=float(trim.get("fraction", 0.10)),
                max_trims=int(trim.get("max_trims", 1)),
            ),
            template_version=template.get("version", "v1"),
            template_dir=p(template.get("dir")),
            embedding_provider=emb.get("provider", "local"),
            embedding_url=emb.get("url"),
            embedding_api_key_env=emb.get("api_key_env", "PROMPTNER_EMBEDDING_API_KEY"),
            jobs=int(data.get("jobs", 1)),
        )
        if check_paths:
            for name in ("train_dir", "test_dir"):
                if not getattr(cfg, name).is_dir():
                    raise DataError(f"{name} {getattr(cfg, name)} does not exist")
        return cfg

    def templates(self) -> TemplateSet:
        return TemplateSet.load(self.template_version, self.template_dir)

    def embedder(self, transport: Transport | None = None) -> EmbeddingCache:
        if self.embedding_provider == "local":
            return EmbeddingCache(LocalTrigramEmbedder())
        if self.embedding_provider == "remote":
            if not self.embedding_url:
                raise DataError("embedding.url is required for the remote provider")
            remote = RemoteEmbedder(
                self.embedding_url,
                provider_id=f"remote:{self.embedding_url}",
                api_key_env=self.embedding_api_key_env,
                transport=transport,
            )
            return EmbeddingCache(remote, self.cache_dir / "embeddings")
        raise DataError(f"unknown embedding provider {self.embedding_provider!r}")


# -- artifact helpers ---------------------------------------------------------


def dump_json(path: Path, data: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def load_json(path: Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _entity_to_dict(e: GoldEntity) -> dict:
    return {
        "text": e.text,
        "label": e.label.value,
        "line": e.line,
        "token_start": e.token_start,
        "token_end": e.token_end,
    }


def _doc_to_dict(doc: ClinicalDocument, entities: Sequence[GoldEntity]) -> dict:
    return {"doc_id": doc.doc_id, "lines": list(doc.lines), "entities": [_entity_to_dict(e) for e in entities]}


def _doc_from_dict(data: dict) -> tuple[ClinicalDocument, list[GoldEntity]]:
    doc = ClinicalDocument(data["doc_id"], tuple(data["lines"]))
    ents = [
        GoldEntity(e["text"], EntityLabel(e["label"]), doc.doc_id, e["line"], e["token_start"], e["token_end"])
        for e in data["entities"]
    ]
    return doc, ents


@dataclass
class LoadedCorpus:
    train: list[tuple[ClinicalDocument, list[GoldEntity]]]
    test_document: ClinicalDocument
    test_gold: list[GoldEntity]
    digest: str = ""


def load_corpus_cache(config: PipelineConfig) -> LoadedCorpus:
    path = config.output_dir / "corpus.json"
    if not path.exists():
        raise DataError(f"{path} not found; run `promptner ingest` first")
    data = load_json(path)
    test_doc, test_gold = _doc_from_dict(data["test"])
    return LoadedCorpus([_doc_from_dict(d) for d in data["train"]], test_doc, test_gold, sha256_file(path))


def sampling_for(config: PipelineConfig, corpus: LoadedCorpus) -> SamplingConfig:
    s = config.sampling
    return SamplingConfig(
        test_doc_id=corpus.test_document.doc_id,
        seed=s.seed,
        document_id=s.document_id,
        sentence_doc_ids=s.sentence_doc_ids,
        sentence_doc_count=s.sentence_doc_count,
        sentence_count=s.sentence_count,
        entity_doc_ids=s.entity_doc_ids,
        entity_doc_count=s.entity_doc_count,
        # Few-shot entity lists leave out anything annotated in the test document.
        exclude_texts=frozenset(e.text for e in corpus.test_gold),
    )


# -- ingest -------------------------------------------------------------------


@dataclass
class IngestSummary:
    train_documents: int
    train_totals: dict[EntityLabel, int]
    test_doc_id: str
    test_totals: dict[EntityLabel, int]
    sample_counts: dict[PromptStrategy, dict[EntityLabel, int] | str]
    errors: list[MalformedAnnotation]

    def render(self) -> str:
        def row(name, detail, counts):
            if isinstance(counts, str):
                return [name, detail, "-", "-", counts]
            return [name, detail, *(str(counts[label]) for label in GOLD_LABELS)]

        detail = {
            PromptStrategy.ZERO_SHOT: "No sample",
            PromptStrategy.FEW_SHOT_DOCUMENT: "Single Doc",
            PromptStrategy.FEW_SHOT_SENTENCES: "Sentences",
            PromptStrategy.FEW_SHOT_ENTITIES: "All Entities",
        }
        rows = [row(s.display, detail[s], c) for s, c in self.sample_counts.items()]
        rows.append(row("Test Sample", self.test_doc_id, self.test_totals))
        rows.append(row("Training pool", f"{self.train_documents} docs", self.train_totals))
        header = ["Prompt", "Samples", "Problem", "Test", "Treatment"]
        widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
        lines = ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() for r in [header, *rows]]
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines)


def _totals(entities) -> dict[EntityLabel, int]:
    counts = {label: 0 for label in GOLD_LABELS}
    for e in entities:
        counts[e.label] += 1
    return counts


def ingest(config: PipelineConfig, allow_errors: bool = False) -> IngestSummary:
    train, train_errors = load_corpus_dir(config.train_dir)
    test, test_errors = load_corpus_dir(config.test_dir)
    errors = [*train_errors, *test_errors]
    if not train:
        raise InsufficientCorpus(f"no documents under {config.train_dir / 'docs'}")
    test_by_id = {doc.doc_id: (doc, ents) for doc, ents in test}
    test_id = config.test_doc_id
    if test_id is None:
        if len(test_by_id) != 1:
            raise DataError(f"set corpus.test_doc: {config.test_dir} holds {len(test_by_id)} documents")
        test_id = next(iter(test_by_id))
    if test_id not in test_by_id:
        raise DataError(f"test document {test_id!r} not found under {config.test_dir}")
    if any(doc.doc_id == test_id for doc, _ in train):
        raise TestLeakage(f"test document {test_id!r} is in the training pool")
    if errors and not allow_errors:
        raise CorpusErrors(errors)

    test_doc, test_gold = test_by_id[test_id]
    corpus = LoadedCorpus(train, test_doc, test_gold)
    limits = sampling_for(config, corpus)
    counts: dict[PromptStrategy, dict[EntityLabel, int] | str] = {}
    for strategy in PromptStrategy:
        try:
            counts[strategy] = build_sample_set(strategy, train, limits).mention_counts()
        except InsufficientCorpus as exc:
            counts[strategy] = f"unavailable: {exc}"
        if strategy is PromptStrategy.ZERO_SHOT:
            counts[strategy] = "-"

    dump_json(
        config.output_dir / "corpus.json",
        {"train": [_doc_to_dict(d, e) for d, e in train], "test": _doc_to_dict(test_doc, test_gold)},
    )
    return IngestSummary(
        train_documents=len(train),
        train_totals=_totals(e for _, ents in train for e in ents),
        test_doc_id=test_id,
        test_totals=_totals(test_gold),
        sample_counts=counts,
        errors=errors,
    )


class CorpusErrors(DataError):
    def __init__(self, errors: list[MalformedAnnotation]):
        self.errors = errors
        super().__init__(f"{len(errors)} malformed annotation(s)")


# -- run ----------------------------------------------------------------------


def _run_id(config: PipelineConfig, strategies: Sequence[PromptStrategy], corpus_digest: str, provider_id: str) -> str:
    key = {
        "template_version": config.template_version,
        "strategies": [s.value for s in strategies],
        "generation": asdict(config.generation),
        "tau": config.tau,
        "budget": asdict(config.budget),
        "sampling": _sampling_dict(config.sampling),
        "corpus": corpus_digest,
        "embedding": provider_id,
    }
    blob = json.dumps(key, sort_keys=True).encode("utf-8")
    return "run-" + hashlib.sha256(blob).hexdigest()[:12]


def _sampling_dict(s: SamplingConfig) -> dict:
    return {
        "seed": s.seed,
        "document_id": s.document_id,
        "sentence_doc_ids": list(s.sentence_doc_ids) if s.sentence_doc_ids is not None else None,
        "sentence_doc_count": s.sentence_doc_count,
        "sentence_count": s.sentence_count,
        "entity_doc_ids": list(s.entity_doc_ids) if s.entity_doc_ids is not None else None,
        "entity_doc_count": s.entity_doc_count,
    }


def run_dir(config: PipelineConfig, run_id: str) -> Path:
    if run_id == "latest":
        latest = config.output_dir / "runs" / "LATEST"
        if not latest.exists():
            raise DataError("no runs recorded yet")
        run_id = latest.read_text(encoding="utf-8").strip()
    path = config.output_dir / "runs" / run_id
    if not (path / "manifest.json").exists():
        raise DataError(f"run {run_id!r} has no manifest under {path}")
    return path


@dataclass
class RunResult:
    run_id: str
    directory: Path
    manifest: dict
    failures: dict[PromptStrategy, PromptNerError]


def run(
    config: PipelineConfig,
    strategies: Sequence[PromptStrategy],
    transport: Transport | None = None,
    sleep: Callable[[float], None] | None = None,
) -> RunResult:
    """Query every strategy, write one entity file each, then the manifest."""
    corpus = load_corpus_cache(config)
    strategies = sorted(set(strategies), key=lambda s: list(PromptStrategy).index(s))
    templates = config.templates()
    cache = CompletionCache(config.cache_dir / "completions") if config.mode != "live" else None
    kwargs = {"sleep": sleep} if sleep is not None else {}
    gateway = Gateway(
        config.endpoint_url, config.generation, cache, config.mode, transport, config.api_key_env, **kwargs
    )
    gateway.check_credentials()

    provider_id = config.embedder().provider_id
    run_id = _run_id(config, strategies, corpus.digest, provider_id)
    if config.mode == "live":
        run_id += "-" + datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
    out = config.output_dir / "runs" / run_id
    limits = sampling_for(config, corpus)

    def one(strategy: PromptStrategy):
        samples = build_sample_set(strategy, corpus.train, limits)
        ctx = StrategyContext(samples, corpus.test_document, gateway, config.budget, templates)
        result = run_strategy(strategy, ctx)
        path = out / "entities" / f"{strategy.value}.json"
        dump_json(
            path,
            {
                "run_id": run_id,
                "template_version": templates.version,
                "strategy": strategy.value,
                "prompt": strategy.display,
                "prompt_hash": result.record.prompt_hash,
                "token_estimate": result.prompt.token_estimate,
                "trims": result.prompt.trims,
                "token_limit_retries": result.token_limit_retries,
                "sample_counts": {k.value: v for k, v in result.prompt.samples.mention_counts().items()},
                "completion": result.record.to_dict(),
                "entities": [e.to_dict() for e in result.entities],
                "malformed": [asdict(m) for m in result.report.malformed],
                "warnings": result.report.warnings,
                "duplicate_count": result.report.duplicate_count,
            },
        )
        return result, path

    results: dict[PromptStrategy, Any] = {}
    failures: dict[PromptStrategy, PromptNerError] = {}
    with ThreadPoolExecutor(max_workers=max(1, config.jobs)) as pool:
        futures = {s: pool.submit(one, s) for s in strategies}
        for strategy in strategies:
            try:
                results[strategy] = futures[strategy].result()
            except PromptNerError as exc:
                logger.error("%s failed: %s", strategy.display, exc)
                failures[strategy] = exc

    strategy_rows = {}
    for strategy in strategies:
        if strategy in failures:
            exc = failures[strategy]
            strategy_rows[strategy.value] = {"status": "failed", "error": type(exc).__name__, "message": str(exc)}
            continue
        result, path = results[strategy]
        strategy_rows[strategy.value] = {
            "status": "ok",
            "file": str(path.relative_to(out)),
            "sha256": sha256_file(path),
            "prompt_hash": result.record.prompt_hash,
            "token_estimate": result.prompt.token_estimate,
            "trims": result.prompt.trims,
            "token_limit_retries": result.token_limit_retries,
            "latency_seconds": result.record.latency_seconds,
            "entities": len(result.entities),
        }
    used = sorted(set(gateway.used_hashes))
    timestamps = [r.record.timestamp for r, _ in results.values() if r.record.timestamp]
    manifest = {
        "run_id": run_id,
        "template_version": templates.version,
        "strategies": [s.value for s in strategies],
        "mode": config.mode,
        "generation": asdict(config.generation),
        "endpoint": config.endpoint_url,
        "tau": config.tau,
        "budget": asdict(config.budget),
        "sampling": _sampling_dict(config.sampling),
        "test_doc_id": corpus.test_document.doc_id,
        "provider_ids": {"llm": config.generation.model_id, "embedding": provider_id},
        "corpus_digest": corpus.digest,
        "cache_digests": {"completions": cache.digest(used) if cache else None, "prompt_hashes": used},
        "timestamp": max(timestamps) if timestamps else None,
        "results": strategy_rows,
    }
    dump_json(out / "manifest.json", manifest)
    (config.output_dir / "runs" / "LATEST").write_text(run_id + "\n", encoding="utf-8")
    return RunResult(run_id, out, manifest, failures)


# -- ensemble -----------------------------------------------------------------


def _load_strategy_files(directory: Path, manifest: dict) -> dict[PromptStrategy, dict]:
    loaded = {}
    for name, row in manifest["results"].items():
        if row.get("status") != "ok":
            continue
        data = load_json(directory / row["file"])
        if data.get("run_id") != manifest["run_id"] or data.get("template_version") != manifest["template_version"]:
            raise RunMismatch(f"{row['file']} belongs to {data.get('run_id')}, not {manifest['run_id']}")
        loaded[PromptStrategy(name)] = data
    return loaded


@dataclass
class EnsembleResult:
    path: Path
    clusters: int
    unknown: int

    @property
    def unknown_rate(self) -> float:
        return self.unknown / self.clusters if self.clusters else 0.0

    def summary(self) -> str:
        return f"clusters={self.clusters} unknown={self.unknown} unknown_rate={self.unknown_rate:.4f}"


def ensemble(
    config: PipelineConfig,
    run_id: str,
    tau: float | None = None,
    strategies: Sequence[PromptStrategy] | None = None,
    transport: Transport | None = None,
) -> EnsembleResult:
    directory = run_dir(config, run_id)
    manifest = load_json(directory / "manifest.json")
    files = _load_strategy_files(directory, manifest)
    wanted = list(strategies) if strategies else list(FEW_SHOT_STRATEGIES)
    runs = {
        s: [ExtractedEntity.from_dict(e) for e in files[s]["entities"]] for s in wanted if s in files
    }
    if len(runs) < 2:
        raise MissingRuns(
            f"ensemble needs at least 2 strategy outputs, {manifest['run_id']} has {sorted(s.value for s in runs)}"
        )
    tau = config.tau if tau is None else tau
    if not 0 < tau <= 1:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    provider = config.embedder(transport)
    predictions = run_ensemble(PredictionSet(runs), provider, tau)
    unknown = sum(1 for p in predictions if p.label is EntityLabel.UNKNOWN)
    path = directory / "ensemble.json"
    dump_json(
        path,
        {
            "run_id": manifest["run_id"],
            "template_version": manifest["template_version"],
            "tau": tau,
            "embedding_provider": provider.provider_id,
            "strategies": sorted(s.value for s in runs),
            "summary": {"clusters": len(predictions), "unknown": unknown},
            "predictions": [p.to_dict() for p in predictions],
        },
    )
    return EnsembleResult(path, len(predictions), unknown)


# -- evaluate -----------------------------------------------------------------


def evaluate(config: PipelineConfig, run_id: str, transport: Transport | None = None) -> dict:
    directory = run_dir(config, run_id)
    manifest = load_json(directory / "manifest.json")
    corpus = load_corpus_cache(config)
    if corpus.test_document.doc_id != manifest["test_doc_id"]:
        raise RunMismatch(f"corpus test document changed since {manifest['run_id']}")
    files = _load_strategy_files(directory, manifest)
    provider = config.embedder(transport)
    gold = corpus.test_gold

    rows: list[tuple[str, list]] = []
    for strategy in PromptStrategy:
        if strategy in files:
            rows.append((strategy.display, [ExtractedEntity.from_dict(e) for e in files[strategy]["entities"]]))
    ensemble_path = directory / "ensemble.json"
    if ensemble_path.exists():
        data = load_json(ensemble_path)
        if data["run_id"] != manifest["run_id"] or data["template_version"] != manifest["template_version"]:
            raise RunMismatch(f"ensemble.json belongs to {data['run_id']}, not {manifest['run_id']}")
        rows.append(("Ensemble", [EnsemblePrediction.from_dict(p) for p in data["predictions"]]))

    extraction_rows, classification_rows, match_rows, json_rows = [], [], [], []
    for name, preds in rows:
        row: dict[str, Any] = {"prompt": name}
        try:
            records = match_predictions(preds, gold, provider, config.tau)
        except ZeroGold as exc:
            extraction_rows.append((name, "ZeroGold"))
            classification_rows.append((name, "ZeroGold"))
            row["error"] = f"ZeroGold: {exc}"
            json_rows.append(row)
            continue
        match_rows.append((name, records))
        ext = extraction_metrics(records, len(gold))
        extraction_rows.append((name, ext))
        row["extraction"] = asdict(ext)
        try:
            cls = classification_metrics(records)
            classification_rows.append((name, cls))
            row["classification"] = cls.to_dict()
        except EmptyMatchSet as exc:
            classification_rows.append((name, "EmptyMatchSet"))
            row["classification_error"] = f"EmptyMatchSet: {exc}"
        json_rows.append(row)

    timing = timing_report(
        {s.display: [CompletionRecord.from_dict(files[s]["completion"])] for s in PromptStrategy if s in files}
    )
    report = {
        "run_id": manifest["run_id"],
        "template_version": manifest["template_version"],
        "test_doc_id": manifest["test_doc_id"],
        "gold_total": len(gold),
        "tau": config.tau,
        "embedding_provider": provider.provider_id,
        "matching_policy": MATCHING_POLICY,
        "rows": json_rows,
        "timing": {"rows": [{"prompt": n, "latency_seconds": t} for n, t in timing.rows], "total": timing.total},
    }
    dump_json(directory / "report.json", report)
    text = "\n\n".join(
        [
            f"Run {manifest['run_id']} (template {manifest['template_version']}, "
            f"tau {config.tau}, gold entities {len(gold)})",
            "Entity extraction\n" + render_extraction_table(extraction_rows),
            "Entity classification (macro average)\n" + render_classification_table(classification_rows, "macro"),
            "Entity classification (weighted average)\n"
            + render_classification_table(classification_rows, "weighted"),
            "Per-label classification\n" + render_per_label_table(classification_rows),
            "Prompt execution time\n" + render_timing_table(timing),
        ]
    )
    (directory / "report.txt").write_text(text + "\n", encoding="utf-8")
    (directory / "matches.csv").write_text(match_records_csv(match_rows, manifest["run_id"], manifest["template_version"]), encoding="utf-8")
    return report


REPORT_FILES = {"json": "report.json", "text": "report.txt", "csv": "matches.csv"}


def report(config: PipelineConfig, run_id: str, fmt: str) -> str:
    path = run_dir(config, run_id) / REPORT_FILES[fmt]
    if not path.exists():
        raise DataError(f"{path} not found; run `promptner evaluate` first")
    return path.read_text(encoding="utf-8")
