"""Command line surface: annotate batches, evaluate, serve, inspect.

Exit codes: 0 success, 1 configuration error, 2 partial batch failure.
"""
from __future__ import annotations

import sys
from pathlib import Path
from typing import Any, Optional

import click

from . import __version__
from .metrics import (
    PRF,
    EvalReport,
    b_cubed_counts,
    ceaf_phi4_counts,
    cluster_span_sets,
    frame_match_counts,
    muc_counts,
    relation_counts,
    typing_counts,
)
from .pipeline import ConfigError, load_config, run_pipeline
from .schema import (
    FILE_EXTENSION,
    DeserializeError,
    Document,
    canonical_json_bytes,
    deserialize,
    serialize,
)
from .scoring import BackendError
from .service import serve_annotator
from .temporal import get_label_set, load_label_set


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Multilingual information-extraction pipeline toolkit."""


def _fail(message: str, code: int = 1) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _read_batch(input_dir: Path) -> list[tuple[str, Optional[Document], Optional[str]]]:
    entries: list[tuple[str, Optional[Document], Optional[str]]] = []
    for path in sorted(input_dir.glob(f"*{FILE_EXTENSION}")):
        try:
            entries.append((path.name, deserialize(path.read_bytes()), None))
        except DeserializeError as exc:
            entries.append((path.name, None, str(exc)))
    return entries


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--input", "input_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--output", "output_dir", type=click.Path(file_okay=False, path_type=Path))
def annotate(config_path: Path, input_dir: Optional[Path], output_dir: Optional[Path]) -> None:
    """Run the configured pipeline over a directory of documents."""
    try:
        config = load_config(config_path.read_bytes(), base_dir=config_path.parent)
    except (ConfigError, DeserializeError) as exc:
        _fail(str(exc))
    input_dir = input_dir or (Path(config.input_dir) if config.input_dir else None)
    output_dir = output_dir or (Path(config.output_dir) if config.output_dir else None)
    if input_dir is None or output_dir is None:
        _fail("--input and --output are required unless the config provides them")
    assert input_dir is not None and output_dir is not None

    entries = _read_batch(input_dir)
    documents = [doc for _, doc, _ in entries if doc is not None]
    try:
        batch = run_pipeline(config, documents)
    except (ConfigError, BackendError) as exc:
        _fail(str(exc))
        return
    output_dir.mkdir(parents=True, exist_ok=True)

    failures = 0
    results = iter(batch.results)
    for name, doc, read_error in entries:
        if read_error is not None:
            failures += 1
            click.echo(f"{name}: FAILED ({read_error})", err=True)
            continue
        result = next(results)
        if result.error is not None:
            failures += 1
            click.echo(f"{name}: FAILED ({result.error})", err=True)
            continue
        assert result.document is not None
        (output_dir / name).write_bytes(serialize(result.document, label_sets=batch.label_sets))
        click.echo(f"{name}: ok", err=True)
    if failures:
        _fail(f"{failures} of {len(entries)} documents failed", code=2)


def _paired_documents(gold_dir: Path, pred_dir: Path, label_sets=None) -> list[tuple[Document, Document]]:
    pairs = []
    gold_files = sorted(gold_dir.glob(f"*{FILE_EXTENSION}"))
    if not gold_files:
        _fail(f"no {FILE_EXTENSION} files under {gold_dir}")
    for gold_path in gold_files:
        pred_path = pred_dir / gold_path.name
        if not pred_path.exists():
            _fail(f"missing prediction file for {gold_path.name}")
        try:
            pairs.append(
                (
                    deserialize(gold_path.read_bytes(), label_sets=label_sets),
                    deserialize(pred_path.read_bytes(), label_sets=label_sets),
                )
            )
        except DeserializeError as exc:
            _fail(f"{gold_path.name}: {exc}")
    return pairs


def _sum4(acc: tuple, new: tuple) -> tuple:
    return (acc[0] + new[0], acc[1] + new[1], acc[2] + new[2], acc[3] + new[3])


@main.command()
@click.option("--task", required=True, type=click.Choice(["frames", "coref", "typing", "temporal"]))
@click.option("--gold", "gold_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--pred", "pred_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--label-set", default="TBD5", show_default=True, help="Relation label set for --task temporal.")
@click.option("--label-set-path", type=click.Path(exists=True, path_type=Path),
              help="Custom relation label set file (overrides --label-set).")
@click.option("--roles-only", is_flag=True, help="Score role units only (frames task).")
def evaluate(
    task: str,
    gold_dir: Path,
    pred_dir: Path,
    label_set: str,
    label_set_path: Optional[Path],
    roles_only: bool,
) -> None:
    """Score predictions against gold; per-document counts are summed first."""
    if label_set_path is not None:
        custom = load_label_set(label_set_path)
        label_set = custom.name
        extra_sets = {custom.name: custom.labels}
    else:
        extra_sets = None
    pairs = _paired_documents(gold_dir, pred_dir, label_sets=extra_sets)
    config: dict[str, Any] = {
        "task": task,
        "gold": str(gold_dir),
        "pred": str(pred_dir),
        "documents": len(pairs),
    }
    scores: dict[str, Any] = {}
    counts: dict[str, Any] = {}

    if task == "frames":
        for mode, labeled in (("labeled", True), ("unlabeled", False)):
            total = (0.0, 0.0, 0.0, 0.0)
            for gold, pred in pairs:
                total = _sum4(total, frame_match_counts(gold, pred, labeled=labeled, roles_only=roles_only))
            scores[mode] = PRF.from_counts(total)
            counts[mode] = total
        config["roles_only"] = roles_only
    elif task == "coref":
        totals = {"muc": (0.0,) * 4, "b_cubed": (0.0,) * 4, "ceaf_phi4": (0.0,) * 4}
        for gold, pred in pairs:
            g, p = cluster_span_sets(gold), cluster_span_sets(pred)
            totals["muc"] = _sum4(totals["muc"], muc_counts(g, p))
            totals["b_cubed"] = _sum4(totals["b_cubed"], b_cubed_counts(g, p))
            totals["ceaf_phi4"] = _sum4(totals["ceaf_phi4"], ceaf_phi4_counts(g, p))
        for name, total in totals.items():
            scores[name] = PRF.from_counts(total)
            counts[name] = total
        scores["average_f1"] = sum(scores[n].f1 for n in ("muc", "b_cubed", "ceaf_phi4")) / 3.0
    elif task == "typing":
        total = (0.0, 0.0, 0.0, 0.0)
        for gold, pred in pairs:
            total = _sum4(total, typing_counts(gold.type_assignments, pred.type_assignments))
        scores["micro"] = PRF.from_counts(total)
        counts["micro"] = total
    else:
        labels = extra_sets[label_set] if extra_sets else get_label_set(label_set).labels
        totals = {label: (0.0,) * 4 for label in (*labels, "micro")}
        for gold, pred in pairs:
            for label, c in relation_counts(gold.temporal_links, pred.temporal_links, labels).items():
                totals[label] = _sum4(totals[label], c)
        for label, total in totals.items():
            scores[label] = PRF.from_counts(total)
            counts[label] = total
        config["label_set"] = label_set

    report = EvalReport(task=task, scores=scores, counts=counts, config=config)
    click.echo(canonical_json_bytes(report.to_jsonable()).decode("utf-8"))


@main.command()
@click.option("--module", required=True, help="frames, coref, typing, temporal, gold_mentions, or demo.")
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--demo", "demo_mode", is_flag=True, help="Also serve the web demo's static assets.")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path),
              help="Pipeline config supplying the module's backend and settings.")
@click.option("--assets", "assets_dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Static asset directory for --demo (default: ./frontend/public).")
def serve(
    module: str,
    port: int,
    host: str,
    demo_mode: bool,
    config_path: Optional[Path],
    assets_dir: Optional[Path],
) -> None:
    """Expose a module (or the frames+coref demo composite) over HTTP."""
    settings: dict[str, Any] = {}
    backend: Optional[dict[str, Any]] = None
    base_dir: Optional[str] = None
    if config_path is not None:
        try:
            config = load_config(config_path.read_bytes(), base_dir=config_path.parent)
        except (ConfigError, DeserializeError) as exc:
            _fail(str(exc))
            return
        base_dir = config.base_dir
        wanted = ("frames", "coref") if module == "demo" else (module,)
        for stage in config.stages:
            if stage.module in wanted:
                settings.update(stage.settings)
                backend = dict(stage.backend)
        if backend is None:
            _fail(f"config has no stage for module {module!r}")
    if demo_mode and assets_dir is None:
        default_assets = Path("frontend") / "public"
        assets_dir = default_assets if default_assets.is_dir() else None
        if assets_dir is None:
            click.echo("note: no asset directory found; serving the API only", err=True)
    try:
        server = serve_annotator(
            module,
            settings,
            port,
            backend=backend,
            host=host,
            assets_dir=assets_dir if demo_mode else None,
            base_dir=base_dir,
        )
    except (ConfigError, BackendError, OSError) as exc:
        _fail(str(exc))
        return
    click.echo(f"serving {module!r} on {server.url} (Ctrl-C to stop)", err=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.server_close()


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def inspect(file: Path) -> None:
    """Pretty-print one document file."""
    try:
        doc = deserialize(file.read_bytes())
    except DeserializeError as exc:
        _fail(str(exc))
        return
    preview = doc.text if len(doc.text) <= 60 else doc.text[:57] + "..."
    click.echo(f"document {doc.id!r}  language={doc.language}  {len(doc.text)} code points")
    click.echo(f"text: {preview!r}")
    for tok in doc.tokenizations:
        click.echo(f"tokenization {tok.id!r} ({tok.tool}): {len(tok.tokens)} tokens, {len(tok.sentences)} sentences")
    if doc.mentions:
        click.echo(f"mentions ({len(doc.mentions)}):")
        for m in doc.mentions:
            click.echo(f"  {m.id}  [{m.span.start_token},{m.span.end_token})  {m.surface!r}")
    if doc.frames:
        click.echo(f"frames ({len(doc.frames)}):")
        for f in doc.frames:
            trigger = doc.get_mention(f.trigger)
            parts = [f"{f.id}  {f.frame_label}  trigger={trigger.surface!r}" if trigger else f"{f.id}  {f.frame_label}"]
            for role in f.roles:
                arg = doc.get_mention(role.argument)
                parts.append(f"{role.label}={arg.surface!r}" if arg else f"{role.label}=?")
            click.echo("  " + "  ".join(parts))
    if doc.clusters:
        click.echo(f"clusters ({len(doc.clusters)}):")
        for c in doc.clusters:
            surfaces = [m.surface for m in (doc.get_mention(x) for x in c.mention_ids) if m is not None]
            click.echo(f"  {c.id}: " + " | ".join(repr(s) for s in surfaces))
    if doc.type_assignments:
        click.echo(f"type assignments ({len(doc.type_assignments)}):")
        for a in doc.type_assignments:
            click.echo(f"  {a.target}: {'/'.join(a.path)}")
    if doc.temporal_links:
        click.echo(f"temporal links ({len(doc.temporal_links)}):")
        for link in doc.temporal_links:
            click.echo(f"  {link.source} -{link.relation}-> {link.target}  ({link.label_set})")
    if doc.metadata:
        click.echo(f"metadata ({len(doc.metadata)}):")
        for meta in doc.metadata:
            click.echo(f"  {meta.annotator_name} v{meta.version} at {meta.timestamp}  {meta.content_digest[:12]}")


if __name__ == "__main__":
    main()
