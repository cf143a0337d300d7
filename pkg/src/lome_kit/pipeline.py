"""Config-driven composition of annotators over document batches.

A pipeline is an ordered list of stages, each binding a module name to a
scoring backend and module settings.  Stages only ever read the document
value and append new annotation layers plus one metadata entry; existing
annotations are never modified.  Per-document failures are recorded and the
batch continues; only configuration or backend loading aborts a batch.
"""
from __future__ import annotations

import hashlib
import importlib.resources
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence

from . import __version__
from .coref import CorefConfig, cluster_mentions
from .entity_typing import load_ontology, type_entity, type_mention
from .frames import load_lexicon, parse_document
from .schema import (
    Document,
    canonical_json_bytes,
    mention_order_key,
    parse_canonical_json,
    tokenize_whitespace,
    value_to_jsonable,
    AnnotationMetadata,
)
from .scoring import ScorerModel, load_backend
from .temporal import classify_pair, enumerate_event_pairs, get_label_set, load_label_set

MENTION_PRODUCERS = ("frames", "gold_mentions")
MENTION_CONSUMERS = ("coref", "typing", "temporal")
KNOWN_MODULES = MENTION_PRODUCERS + MENTION_CONSUMERS

_ANNOTATION_LAYERS = ("tokenizations", "mentions", "frames", "clusters", "type_assignments", "temporal_links")


class ConfigError(ValueError):
    """Raised for unknown stages, ordering violations, or malformed settings."""


@dataclass(frozen=True)
class StageSpec:
    module: str
    backend: Mapping[str, Any] = field(default_factory=lambda: {"kind": "reference"})
    settings: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "backend", dict(self.backend))
        object.__setattr__(self, "settings", dict(self.settings))


@dataclass(frozen=True)
class PipelineConfig:
    stages: tuple[StageSpec, ...]
    workers: int = 1
    input_dir: Optional[str] = None
    output_dir: Optional[str] = None
    base_dir: Optional[str] = None  # directory config paths resolve against


def packaged_data_path(name: str) -> Path:
    return Path(str(importlib.resources.files("lome_kit") / "data" / name))


def resolve_config_path(base_dir: Optional[str], path: str) -> str:
    p = Path(path)
    if not p.is_absolute() and base_dir is not None:
        p = Path(base_dir) / p
    return str(p)


def load_config(data: bytes, *, base_dir: Optional[str | Path] = None) -> PipelineConfig:
    """Parse and validate a pipeline config from canonical JSON bytes.

    Enforces unique stage names and the ordering constraint: a mention
    producer (frame parser or gold-mention loader) must precede any
    mention-consuming stage.
    """
    obj = parse_canonical_json(data)
    if not isinstance(obj, dict):
        raise ConfigError("pipeline config must be a JSON object")
    allowed = {"stages", "workers", "input_dir", "output_dir"}
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown config field {sorted(unknown)[0]!r}")
    raw_stages = obj.get("stages")
    if not isinstance(raw_stages, list) or not raw_stages:
        raise ConfigError("config needs a non-empty 'stages' list")

    stages: list[StageSpec] = []
    seen: set[str] = set()
    producer_seen = False
    for i, raw in enumerate(raw_stages):
        if not (isinstance(raw, dict) and set(raw) <= {"module", "backend", "settings"} and "module" in raw):
            raise ConfigError(f"stage {i}: expected fields module, backend, settings")
        module = raw["module"]
        if module not in KNOWN_MODULES:
            raise ConfigError(f"stage {i}: unknown stage module {module!r}")
        if module in seen:
            raise ConfigError(f"stage {i}: duplicate stage {module!r}")
        seen.add(module)
        if module in MENTION_CONSUMERS and not producer_seen:
            raise ConfigError(
                f"stage {i}: {module!r} needs a mention source; "
                f"put one of {list(MENTION_PRODUCERS)} before it"
            )
        if module in MENTION_PRODUCERS:
            producer_seen = True
        backend = raw.get("backend", {"kind": "reference"})
        settings = raw.get("settings", {})
        if not isinstance(backend, dict) or not isinstance(settings, dict):
            raise ConfigError(f"stage {i}: backend and settings must be objects")
        stages.append(StageSpec(module=module, backend=backend, settings=settings))

    workers = obj.get("workers", 1)
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        raise ConfigError("'workers' must be an integer >= 1")
    for key in ("input_dir", "output_dir"):
        if key in obj and not isinstance(obj[key], str):
            raise ConfigError(f"{key!r} must be a string")
    return PipelineConfig(
        stages=tuple(stages),
        workers=workers,
        input_dir=obj.get("input_dir"),
        output_dir=obj.get("output_dir"),
        base_dir=None if base_dir is None else str(base_dir),
    )


@dataclass(frozen=True)
class Annotator:
    """A built stage: pure document-to-document function plus provenance.

    `label_sets` carries any custom relation label sets the stage writes, so
    callers can validate and serialize the annotated documents.
    """

    name: str
    version: str
    apply: Callable[[Document], Document]
    label_sets: Optional[Mapping[str, tuple[str, ...]]] = None


def collect_label_sets(annotators: Sequence[Annotator]) -> Optional[dict[str, tuple[str, ...]]]:
    merged: dict[str, tuple[str, ...]] = {}
    for annotator in annotators:
        if annotator.label_sets:
            merged.update(annotator.label_sets)
    return merged or None


def _build_frames(model: ScorerModel, settings: Mapping[str, Any], base_dir: Optional[str]) -> Annotator:
    lexicon_path = settings.get("lexicon_path")
    if not lexicon_path:
        raise ConfigError("frames stage needs settings.lexicon_path")
    lexicon = load_lexicon(resolve_config_path(base_dir, lexicon_path))
    tokenization_id = settings.get("tokenization_id")

    def apply(doc: Document) -> Document:
        return parse_document(model, lexicon, doc, tokenization_id)

    return Annotator("frames", __version__, apply)


def _build_gold_mentions() -> Annotator:
    # The loader consumes mentions already present on the input document; it
    # exists so coreference can run on gold mentions without the frame parser.
    def apply(doc: Document) -> Document:
        return doc

    return Annotator("gold_mentions", __version__, apply)


def _build_coref(model: ScorerModel, settings: Mapping[str, Any]) -> Annotator:
    cap = settings.get("K", 8)
    config = CorefConfig(
        exemplar_cap=None if cap is None else int(cap),
        attach_threshold=float(settings.get("theta", 0.0)),
    )

    def apply(doc: Document) -> Document:
        if doc.clusters:
            raise ValueError(f"document {doc.id!r} already carries clusters")
        mentions = sorted(doc.mentions, key=mention_order_key(doc))
        clusters = cluster_mentions(model, doc, mentions, config)
        return doc.replace(clusters=doc.clusters + tuple(clusters))

    return Annotator("coref", __version__, apply)


def _build_typing(model: ScorerModel, settings: Mapping[str, Any], base_dir: Optional[str]) -> Annotator:
    ontology_path = settings.get("ontology_path")
    if not ontology_path:
        raise ConfigError("typing stage needs settings.ontology_path")
    ontology = load_ontology(resolve_config_path(base_dir, ontology_path))
    max_depth = settings.get("max_depth")
    target = settings.get("target", "mentions")
    if target not in ("mentions", "clusters"):
        raise ConfigError(f"typing target must be 'mentions' or 'clusters', got {target!r}")

    def apply(doc: Document) -> Document:
        if target == "mentions":
            ordered = sorted(doc.mentions, key=mention_order_key(doc))
            added = tuple(type_mention(model, ontology, doc, m, max_depth) for m in ordered)
        else:
            added = tuple(type_entity(model, ontology, doc, c, max_depth) for c in doc.clusters)
        return doc.replace(type_assignments=doc.type_assignments + added)

    return Annotator("typing", __version__, apply)


def _build_temporal(model: ScorerModel, settings: Mapping[str, Any], base_dir: Optional[str]) -> Annotator:
    if "label_set_path" in settings:
        label_set = load_label_set(resolve_config_path(base_dir, settings["label_set_path"]))
    else:
        label_set = get_label_set(settings.get("label_set", "TBD5"))
    window = int(settings.get("window", 1))

    def apply(doc: Document) -> Document:
        links = tuple(
            classify_pair(model, doc, pair, label_set) for pair in enumerate_event_pairs(doc, window)
        )
        return doc.replace(temporal_links=doc.temporal_links + links)

    return Annotator("temporal", __version__, apply, label_sets={label_set.name: label_set.labels})


def build_stage(stage: StageSpec, base_dir: Optional[str] = None) -> Annotator:
    """Load the stage's backend and resources; raises eagerly on any failure."""
    if stage.module == "gold_mentions":
        return _build_gold_mentions()
    backend = dict(stage.backend)
    if backend.get("kind") == "file" and isinstance(backend.get("path"), str):
        backend["path"] = resolve_config_path(base_dir, backend["path"])
    model = load_backend(backend)
    if stage.module == "frames":
        return _build_frames(model, stage.settings, base_dir)
    if stage.module == "coref":
        return _build_coref(model, stage.settings)
    if stage.module == "typing":
        return _build_typing(model, stage.settings, base_dir)
    if stage.module == "temporal":
        return _build_temporal(model, stage.settings, base_dir)
    raise ConfigError(f"unknown stage module {stage.module!r}")


def default_clock() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def payload_digest(before: Document, after: Document) -> str:
    """SHA-256 over the annotation items a stage added, layer by layer.

    Depends only on what was added, not on what other stages did before, so
    reordering independent stages leaves each stage's digest unchanged.
    """
    added: dict[str, list] = {}
    for layer in _ANNOTATION_LAYERS:
        old = set(getattr(before, layer))
        new_items = [value_to_jsonable(x) for x in getattr(after, layer) if x not in old]
        if new_items:
            added[layer] = new_items
    return hashlib.sha256(canonical_json_bytes(added)).hexdigest()


def ingest_document(doc: Document) -> Document:
    """Give untokenized input a whitespace tokenization; empty docs pass through."""
    if doc.text and not doc.tokenizations:
        return doc.replace(tokenizations=(tokenize_whitespace(doc.text),))
    return doc


def apply_stage(
    annotator: Annotator, doc: Document, clock: Optional[Callable[[], str]] = None
) -> Document:
    """Run one annotator and append its metadata entry.

    Empty documents pass through with no annotation changes; the metadata
    entry still records that the annotator ran.
    """
    clock = clock or default_clock
    annotated = doc if doc.text == "" else annotator.apply(doc)
    entry = AnnotationMetadata(
        annotator_name=annotator.name,
        version=annotator.version,
        timestamp=clock(),
        content_digest=payload_digest(doc, annotated),
    )
    return annotated.replace(metadata=annotated.metadata + (entry,))


def annotate_document(
    annotators: Sequence[Annotator], doc: Document, clock: Optional[Callable[[], str]] = None
) -> Document:
    doc = ingest_document(doc)
    for annotator in annotators:
        doc = apply_stage(annotator, doc, clock)
    return doc


@dataclass(frozen=True)
class DocumentResult:
    doc_id: str
    document: Optional[Document] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class BatchResult:
    results: tuple[DocumentResult, ...]
    label_sets: Optional[Mapping[str, tuple[str, ...]]] = None

    @property
    def ok(self) -> bool:
        return all(r.error is None for r in self.results)

    @property
    def documents(self) -> list[Document]:
        return [r.document for r in self.results if r.document is not None]


def run_pipeline(
    config: PipelineConfig,
    documents: Sequence[Document],
    clock: Optional[Callable[[], str]] = None,
) -> BatchResult:
    """Apply all stages to each document; failures isolate per document.

    Worker count changes wall time only: results are returned in input order
    and every output byte is independent of the parallelism degree.
    """
    annotators = [build_stage(stage, config.base_dir) for stage in config.stages]

    def process(doc: Document) -> DocumentResult:
        try:
            return DocumentResult(doc_id=doc.id, document=annotate_document(annotators, doc, clock))
        except Exception as exc:  # per-document fault isolation
            return DocumentResult(doc_id=doc.id, error=f"{type(exc).__name__}: {exc}")

    if config.workers <= 1 or len(documents) <= 1:
        results = [process(doc) for doc in documents]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(process, documents))
    return BatchResult(results=tuple(results), label_sets=collect_label_sets(annotators))
