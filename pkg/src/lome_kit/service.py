"""HTTP annotator protocol: remote annotators, scoring routes, demo assets.

One wire stack serves everything: POST /annotate takes a canonical document
and returns it with annotations appended, GET /health reports liveness, and
POST /score/<task> answers scoring requests from remote backends.  The
server is stateless per request; documents never touch disk.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence

import requests

from .pipeline import Annotator, StageSpec, annotate_document, build_stage
from .schema import (
    DeserializeError,
    Document,
    canonical_json_bytes,
    deserialize,
    document_from_jsonable,
    parse_canonical_json,
    serialize,
    validate_document,
)
from .scoring import BackendError, MissingScoreError, ScorerModel, load_backend, score_item


class RemoteAnnotatorError(RuntimeError):
    """Raised when a remote annotator misbehaves; the local document is kept."""


@dataclass(frozen=True)
class AnnotatorEndpoint:
    url: str
    timeout: float = 10.0


def probe_endpoint(url: str, timeout: float = 10.0) -> AnnotatorEndpoint:
    """Health-check the endpoint before first use."""
    url = url.rstrip("/")
    try:
        resp = requests.get(url + "/health", timeout=timeout)
    except requests.RequestException as exc:
        raise RemoteAnnotatorError(f"endpoint {url!r} unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise RemoteAnnotatorError(f"endpoint {url!r} health probe returned {resp.status_code}")
    return AnnotatorEndpoint(url=url, timeout=timeout)


_LAYERS = ("tokenizations", "mentions", "frames", "clusters", "type_assignments", "temporal_links", "metadata")


def check_append_only(before: Document, after: Document) -> Optional[str]:
    """Verify that everything present before is present and unmodified after."""
    for attr in ("id", "text", "language"):
        if getattr(before, attr) != getattr(after, attr):
            return f"document {attr} changed"
    for layer in _LAYERS:
        new_items = set(getattr(after, layer))
        for item in getattr(before, layer):
            if item not in new_items:
                return f"{layer} entry removed or modified"
    return None


def annotate_remote(
    endpoint: AnnotatorEndpoint,
    doc: Document,
    *,
    label_sets: Optional[Mapping[str, Sequence[str]]] = None,
) -> Document:
    """POST the document to a remote annotator and validate the response.

    The response must be a valid canonical document that preserves every
    pre-existing annotation; any violation raises and the caller's document
    is left untouched.
    """
    try:
        resp = requests.post(
            endpoint.url + "/annotate",
            data=serialize(doc, label_sets=label_sets),
            headers={"Content-Type": "application/json"},
            timeout=endpoint.timeout,
        )
    except requests.RequestException as exc:
        raise RemoteAnnotatorError(f"annotate call failed: {exc}") from exc
    if not (200 <= resp.status_code < 300):
        raise RemoteAnnotatorError(f"annotator returned {resp.status_code}: {resp.text[:200]}")
    try:
        annotated = deserialize(resp.content, label_sets=label_sets)
    except DeserializeError as exc:
        raise RemoteAnnotatorError(f"annotator response invalid: {exc}") from exc
    violation = check_append_only(doc, annotated)
    if violation:
        raise RemoteAnnotatorError(f"annotator violated the append-only contract: {violation}")
    return annotated


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class AnnotatorServer(ThreadingHTTPServer):
    """Stateless annotator + scorer service, optionally serving demo assets."""

    daemon_threads = True

    def __init__(
        self,
        address: tuple[str, int],
        annotators: Sequence[Annotator],
        scorer: Optional[ScorerModel] = None,
        assets_dir: Optional[str | Path] = None,
        clock: Optional[Callable[[], str]] = None,
        label_sets: Optional[Mapping[str, Sequence[str]]] = None,
    ) -> None:
        super().__init__(address, _Handler)
        self.annotators = list(annotators)
        self.scorer = scorer
        self.assets_dir = None if assets_dir is None else Path(assets_dir).resolve()
        self.clock = clock
        self.label_sets = label_sets
        self._thread: Optional[threading.Thread] = None

    @property
    def port(self) -> int:
        return self.server_address[1]

    @property
    def url(self) -> str:
        return f"http://{self.server_address[0]}:{self.port}"

    def start_background(self) -> "AnnotatorServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)


class _Handler(BaseHTTPRequestHandler):
    server: AnnotatorServer

    def log_message(self, format: str, *args: Any) -> None:  # noqa: A002 - stdlib signature
        pass

    def _reply(self, code: int, body: bytes, content_type: str = "application/json") -> None:
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, code: int, message: str) -> None:
        self._reply(code, canonical_json_bytes({"error": message}))

    def do_OPTIONS(self) -> None:  # CORS preflight for the browser demo
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self) -> None:
        if self.path == "/health":
            self._reply(200, canonical_json_bytes({"status": "ok"}))
            return
        if self.server.assets_dir is not None:
            self._serve_asset()
            return
        self._error(404, f"no such route: {self.path}")

    def _serve_asset(self) -> None:
        assets = self.server.assets_dir
        assert assets is not None
        relative = self.path.lstrip("/").split("?", 1)[0] or "index.html"
        candidate = (assets / relative).resolve()
        if not candidate.is_relative_to(assets) or not candidate.is_file():
            self._error(404, f"no such asset: {self.path}")
            return
        content_type = _CONTENT_TYPES.get(candidate.suffix, "application/octet-stream")
        self._reply(200, candidate.read_bytes(), content_type)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length)

    def do_POST(self) -> None:
        if self.path == "/annotate":
            self._handle_annotate()
        elif self.path.startswith("/score/"):
            self._handle_score(self.path[len("/score/") :])
        else:
            self._error(404, f"no such route: {self.path}")

    def _handle_annotate(self) -> None:
        try:
            doc = deserialize(self._read_body(), label_sets=self.server.label_sets)
        except DeserializeError as exc:
            self._error(400, str(exc))
            return
        try:
            annotated = annotate_document(self.server.annotators, doc, clock=self.server.clock)
            body = serialize(annotated, label_sets=self.server.label_sets)
        except (MissingScoreError, BackendError, ValueError, KeyError, IndexError) as exc:
            self._error(400, f"{type(exc).__name__}: {exc}")
            return
        self._reply(200, body)

    def _handle_score(self, task: str) -> None:
        if self.server.scorer is None:
            self._error(404, "this service hosts no scorer")
            return
        if task not in ("tags", "span", "pair", "events"):
            self._error(404, f"unknown scoring task: {task!r}")
            return
        try:
            obj = parse_canonical_json(self._read_body())
        except DeserializeError as exc:
            self._error(400, str(exc))
            return
        if not (isinstance(obj, dict) and {"doc", "items", "labels"} <= set(obj)):
            self._error(400, "score request needs 'doc', 'items', and 'labels'")
            return
        try:
            doc = document_from_jsonable(obj["doc"])
            problems = validate_document(doc, label_sets=self.server.label_sets)
            if problems:
                raise DeserializeError(problems[0])
            items = obj["items"]
            if not (isinstance(items, list) and all(isinstance(x, str) for x in items)):
                raise DeserializeError("'items' must be a list of item keys")
            scores = [score_item(self.server.scorer, doc, key) for key in items]
        except (DeserializeError, MissingScoreError, BackendError, ValueError, KeyError, IndexError) as exc:
            self._error(400, f"{type(exc).__name__}: {exc}")
            return
        self._reply(200, canonical_json_bytes({"scores": scores}))


def _demo_stage_specs(settings: Mapping[str, Any], backend: Mapping[str, Any]) -> list[StageSpec]:
    frame_settings = {k: settings[k] for k in ("lexicon_path", "tokenization_id") if k in settings}
    coref_settings = {k: settings[k] for k in ("K", "theta") if k in settings}
    return [
        StageSpec("frames", backend, frame_settings),
        StageSpec("coref", backend, coref_settings),
    ]


def serve_annotator(
    module: str,
    settings: Optional[Mapping[str, Any]] = None,
    port: int = 0,
    *,
    backend: Optional[Mapping[str, Any]] = None,
    host: str = "127.0.0.1",
    assets_dir: Optional[str | Path] = None,
    clock: Optional[Callable[[], str]] = None,
    base_dir: Optional[str] = None,
    label_sets: Optional[Mapping[str, Sequence[str]]] = None,
) -> AnnotatorServer:
    """Build a service for one module (or the frames+coref "demo" composite).

    The returned server is not yet running; call `start_background()` or
    `serve_forever()`.  The same backend also answers /score/<task> routes.
    """
    from .pipeline import resolve_config_path

    settings = dict(settings or {})
    backend = dict(backend or {"kind": "reference"})
    if module == "demo":
        settings.setdefault("lexicon_path", str(_default_lexicon()))
        specs = _demo_stage_specs(settings, backend)
    else:
        if module == "frames":
            settings.setdefault("lexicon_path", str(_default_lexicon()))
        if module == "typing":
            settings.setdefault("ontology_path", str(_default_ontology()))
        specs = [StageSpec(module, backend, settings)]
    annotators = [build_stage(spec, base_dir) for spec in specs]
    scorer_backend = dict(backend)
    if scorer_backend.get("kind") == "file" and isinstance(scorer_backend.get("path"), str):
        scorer_backend["path"] = resolve_config_path(base_dir, scorer_backend["path"])
    scorer = load_backend(scorer_backend)
    from .pipeline import collect_label_sets

    merged_sets = dict(label_sets or {})
    merged_sets.update(collect_label_sets(annotators) or {})
    return AnnotatorServer(
        (host, port),
        annotators,
        scorer=scorer,
        assets_dir=assets_dir,
        clock=clock,
        label_sets=merged_sets or None,
    )


def _default_lexicon() -> Path:
    from .pipeline import packaged_data_path

    return packaged_data_path("mini_lexicon.json")


def _default_ontology() -> Path:
    from .pipeline import packaged_data_path

    return packaged_data_path("mini_ontology.json")
