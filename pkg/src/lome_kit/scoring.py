"""Pluggable scoring backends: the single source of all model scores.

Three interchangeable backends stand in for trained encoders:

* ``reference``: a deterministic hash-featurized pseudo-model (64-bit
  FNV-1a over feature strings, weights mapped into [-1, 1], clamped to
  [-10, 10]).  No stored weights, fully reproducible from its seed.
* ``file``: an oracle score table loaded from canonical JSON; lookups
  either hit or raise, never fabricate.
* ``remote``: scores fetched over HTTP from a ``/score/<task>`` endpoint
  speaking the same wire stack as the annotator service.

Decoders rely only on score order and sign; scores are not normalized
across tasks.
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Protocol, Sequence

import requests

from .schema import (
    Document,
    FrameInstance,
    Mention,
    Sentence,
    Span,
    canonical_json_bytes,
    document_to_jsonable,
    parse_canonical_json,
    resolve_span,
)

SEED_ENV_VAR = "LOME_KIT_SEED"
DEFAULT_SEED = 7
SCORE_CLAMP = 10.0

# Item keys are fields joined by the unit separator; label lists within a
# field are joined by the record separator.
FIELD_SEP = "\x1f"
LIST_SEP = "\x1e"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


class BackendError(ValueError):
    """Raised for unloadable backends and malformed score payloads."""


class MissingScoreError(LookupError):
    """Raised when a file backend has no entry for a requested item."""

    def __init__(self, doc_id: str, item_key: str) -> None:
        super().__init__(f"no score for document {doc_id!r}, item {item_key!r}")
        self.doc_id = doc_id
        self.item_key = item_key


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _U64
    return h


def _clamp(x: float) -> float:
    return max(-SCORE_CLAMP, min(SCORE_CLAMP, x))


def _check_component(value: str, what: str) -> str:
    if FIELD_SEP in value or LIST_SEP in value:
        raise ValueError(f"{what} {value!r} contains a reserved separator character")
    return value


def tags_key(tokenization_id: str, start_token: int, end_token: int, tagset: Sequence[str], condition: str = "") -> str:
    """Item key for a per-token tag score matrix over a token range."""
    return FIELD_SEP.join(
        [
            "tags",
            _check_component(tokenization_id, "tokenization id"),
            str(start_token),
            str(end_token),
            _check_component(condition, "condition"),
            LIST_SEP.join(_check_component(t, "tag") for t in tagset),
        ]
    )


def span_key(span: Span, labels: Sequence[str], condition: str = "") -> str:
    return FIELD_SEP.join(
        [
            "span",
            _check_component(span.tokenization_id, "tokenization id"),
            str(span.start_token),
            str(span.end_token),
            _check_component(condition, "condition"),
            LIST_SEP.join(_check_component(x, "label") for x in labels),
        ]
    )


def pair_key(mention_id: str, exemplar_id: str) -> str:
    return FIELD_SEP.join(
        ["pair", _check_component(mention_id, "mention id"), _check_component(exemplar_id, "mention id")]
    )


def events_key(source_id: str, target_id: str, labels: Sequence[str]) -> str:
    return FIELD_SEP.join(
        [
            "events",
            _check_component(source_id, "frame id"),
            _check_component(target_id, "frame id"),
            LIST_SEP.join(_check_component(x, "label") for x in labels),
        ]
    )


@dataclass(frozen=True)
class ScoreTable:
    """Mapping from (document id, item key) to a fixed score vector."""

    scores: Mapping[str, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "scores", dict(self.scores))

    def lookup(self, doc_id: str, item_key: str) -> tuple[float, ...]:
        try:
            return self.scores[doc_id + FIELD_SEP + item_key]
        except KeyError:
            raise MissingScoreError(doc_id, item_key) from None

    def to_bytes(self) -> bytes:
        return canonical_json_bytes({k: list(v) for k, v in self.scores.items()})

    @classmethod
    def from_bytes(cls, data: bytes) -> "ScoreTable":
        obj = parse_canonical_json(data)
        if not isinstance(obj, dict):
            raise BackendError("score table must be a JSON object")
        scores: dict[str, tuple[float, ...]] = {}
        for key, value in obj.items():
            if not (
                isinstance(value, list)
                and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
            ):
                raise BackendError(f"score table entry {key!r} is not a list of numbers")
            scores[key] = tuple(float(x) for x in value)
        return cls(scores)

    @classmethod
    def load(cls, path: str | Path) -> "ScoreTable":
        return cls.from_bytes(Path(path).read_bytes())


class ScoreTableBuilder:
    """Convenience authoring surface for oracle fixtures."""

    def __init__(self) -> None:
        self._scores: dict[str, tuple[float, ...]] = {}

    def put(self, doc_id: str, item_key: str, values: Sequence[float]) -> "ScoreTableBuilder":
        self._scores[doc_id + FIELD_SEP + item_key] = tuple(float(x) for x in values)
        return self

    def tags(
        self,
        doc_id: str,
        sentence: Sentence,
        tagset: Sequence[str],
        rows: Sequence[Sequence[float]],
        condition: str = "",
    ) -> "ScoreTableBuilder":
        if len(rows) != len(sentence):
            raise ValueError(f"{len(rows)} rows for {len(sentence)}-token sentence")
        flat = [x for row in rows for x in row]
        key = tags_key(sentence.tokenization_id, sentence.start_token, sentence.end_token, tagset, condition)
        return self.put(doc_id, key, flat)

    def gold_bio(
        self,
        doc_id: str,
        sentence: Sentence,
        spans: Sequence[tuple[int, int]],
        condition: str = "",
        hit: float = 1.0,
        miss: float = 0.0,
    ) -> "ScoreTableBuilder":
        """One-hot B/I/O rows encoding absolute token spans within `sentence`."""
        from .frames import BIO_TAGS  # deferred: frames depends on this module

        tags = ["O"] * len(sentence)
        for start, end in spans:
            if not (sentence.start_token <= start < end <= sentence.end_token):
                raise ValueError(f"span [{start},{end}) outside sentence {sentence}")
            tags[start - sentence.start_token] = "B"
            for i in range(start + 1, end):
                tags[i - sentence.start_token] = "I"
        rows = [[hit if tag == t else miss for t in BIO_TAGS] for tag in tags]
        return self.tags(doc_id, sentence, BIO_TAGS, rows, condition)

    def span(
        self, doc_id: str, span: Span, labels: Sequence[str], values: Sequence[float], condition: str = ""
    ) -> "ScoreTableBuilder":
        if len(values) != len(labels):
            raise ValueError(f"{len(values)} scores for {len(labels)} labels")
        return self.put(doc_id, span_key(span, labels, condition), values)

    def one_hot_span(
        self,
        doc_id: str,
        span: Span,
        labels: Sequence[str],
        winner: str,
        condition: str = "",
        hit: float = 1.0,
        miss: float = 0.0,
    ) -> "ScoreTableBuilder":
        if winner not in labels:
            raise ValueError(f"winner {winner!r} not in labels")
        return self.span(doc_id, span, labels, [hit if x == winner else miss for x in labels], condition)

    def pair(self, doc_id: str, mention_id: str, exemplar_id: str, value: float) -> "ScoreTableBuilder":
        return self.put(doc_id, pair_key(mention_id, exemplar_id), [value])

    def events(
        self, doc_id: str, source_id: str, target_id: str, labels: Sequence[str], values: Sequence[float]
    ) -> "ScoreTableBuilder":
        if len(values) != len(labels):
            raise ValueError(f"{len(values)} scores for {len(labels)} labels")
        return self.put(doc_id, events_key(source_id, target_id, labels), values)

    def one_hot_events(
        self,
        doc_id: str,
        source_id: str,
        target_id: str,
        labels: Sequence[str],
        winner: str,
        hit: float = 1.0,
        miss: float = 0.0,
    ) -> "ScoreTableBuilder":
        if winner not in labels:
            raise ValueError(f"winner {winner!r} not in labels")
        return self.events(doc_id, source_id, target_id, labels, [hit if x == winner else miss for x in labels])

    def to_table(self) -> ScoreTable:
        return ScoreTable(dict(self._scores))

    def write(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_table().to_bytes())


@dataclass(frozen=True)
class RemoteEndpoint:
    url: str  # base URL without trailing slash
    timeout: float = 10.0


@dataclass(frozen=True)
class ScorerModel:
    """Read-only scorer handle; identical inputs always yield identical scores."""

    kind: str  # "reference" | "file" | "remote"
    seed: int = DEFAULT_SEED
    table: Optional[ScoreTable] = None
    endpoint: Optional[RemoteEndpoint] = None
    label_inventories: Optional[Mapping[str, tuple[str, ...]]] = None
    parameter_digest: str = ""


def probe_remote_health(url: str, timeout: float) -> None:
    try:
        resp = requests.get(url.rstrip("/") + "/health", timeout=timeout)
    except requests.RequestException as exc:
        raise BackendError(f"remote backend {url!r} unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise BackendError(f"remote backend {url!r} health probe returned {resp.status_code}")


def load_backend(descriptor: Mapping[str, Any]) -> ScorerModel:
    """Build a ScorerModel from a backend descriptor.

    Descriptors: ``{"kind": "reference", "seed": 7}``,
    ``{"kind": "file", "path": "gold.scores.json"}``,
    ``{"kind": "remote", "url": "http://...", "timeout": 10}``.
    The LOME_KIT_SEED environment variable overrides the reference seed.
    """
    if not isinstance(descriptor, Mapping) or "kind" not in descriptor:
        raise BackendError("backend descriptor must be an object with a 'kind' field")
    kind = descriptor["kind"]
    digest = hashlib.sha256(canonical_json_bytes(dict(descriptor))).hexdigest()

    if kind == "reference":
        env_seed = os.environ.get(SEED_ENV_VAR)
        if env_seed is not None:
            try:
                seed = int(env_seed)
            except ValueError:
                raise BackendError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}") from None
        else:
            seed = int(descriptor.get("seed", DEFAULT_SEED))
        return ScorerModel(kind="reference", seed=seed, parameter_digest=digest)

    if kind == "file":
        path = descriptor.get("path")
        if not path:
            raise BackendError("file backend descriptor needs a 'path'")
        try:
            table = ScoreTable.load(path)
        except OSError as exc:
            raise BackendError(f"cannot read score table {path!r}: {exc}") from exc
        return ScorerModel(kind="file", table=table, parameter_digest=digest)

    if kind == "remote":
        url = descriptor.get("url")
        if not url:
            raise BackendError("remote backend descriptor needs a 'url'")
        timeout = float(descriptor.get("timeout", 10.0))
        probe_remote_health(url, timeout)
        return ScorerModel(kind="remote", endpoint=RemoteEndpoint(url.rstrip("/"), timeout), parameter_digest=digest)

    raise BackendError(f"unknown backend kind: {kind!r}")


def _weight(seed: int, feature: str) -> float:
    """Deterministic pseudo-weight in [-1, 1] for a feature string."""
    h = _fnv1a64(f"{seed}{FIELD_SEP}{feature}".encode("utf-8"))
    return (h / _U64) * 2.0 - 1.0


def _sentence_tokens(doc: Document, sentence: Sentence) -> list:
    tok = doc.get_tokenization(sentence.tokenization_id)
    if tok is None:
        raise KeyError(f"unknown tokenization id: {sentence.tokenization_id!r}")
    if not (0 <= sentence.start_token <= sentence.end_token <= len(tok.tokens)):
        raise IndexError(f"sentence {sentence} out of range")
    return list(tok.tokens[sentence.start_token : sentence.end_token])


def _remote_scores(
    model: ScorerModel, doc: Document, task: str, items: Sequence[str], labels: Sequence[str]
) -> list[list[float]]:
    assert model.endpoint is not None
    payload = {"doc": document_to_jsonable(doc), "items": list(items), "labels": list(labels)}
    try:
        resp = requests.post(
            f"{model.endpoint.url}/score/{task}",
            data=canonical_json_bytes(payload),
            headers={"Content-Type": "application/json"},
            timeout=model.endpoint.timeout,
        )
    except requests.RequestException as exc:
        raise BackendError(f"remote scoring failed: {exc}") from exc
    if resp.status_code != 200:
        raise BackendError(f"remote scoring returned {resp.status_code}: {resp.text[:200]}")
    body = resp.json()
    rows = body.get("scores")
    if not (isinstance(rows, list) and len(rows) == len(items)):
        raise BackendError("remote scoring response must carry one score row per item")
    return [[float(x) for x in row] for row in rows]


def _expect_length(values: Sequence[float], expected: int, item_key: str) -> list[float]:
    if len(values) != expected:
        raise BackendError(f"score vector for {item_key!r} has length {len(values)}, expected {expected}")
    return list(values)


def token_tag_scores(
    model: ScorerModel,
    doc: Document,
    sentence: Sentence,
    tagset: Sequence[str],
    condition: str = "",
) -> list[list[float]]:
    """Score matrix of shape |sentence tokens| x |tagset|.

    `condition` scopes the scores to a decoding context (e.g. a role pass
    conditioned on one frame instance) so distinct passes over the same
    tokens never collide.
    """
    if not tagset:
        raise ValueError("tagset must be non-empty")
    tokens = _sentence_tokens(doc, sentence)
    if not tokens:
        return []
    key = tags_key(sentence.tokenization_id, sentence.start_token, sentence.end_token, tagset, condition)

    if model.kind == "file":
        assert model.table is not None
        flat = _expect_length(model.table.lookup(doc.id, key), len(tokens) * len(tagset), key)
    elif model.kind == "remote":
        flat = _expect_length(
            _remote_scores(model, doc, "tags", [key], tagset)[0], len(tokens) * len(tagset), key
        )
    else:
        flat = []
        for position, token in enumerate(tokens):
            for tag in tagset:
                flat.append(
                    _clamp(
                        _weight(model.seed, f"tok{FIELD_SEP}{token.surface}{FIELD_SEP}{tag}{FIELD_SEP}{condition}")
                        + _weight(model.seed, f"parity{FIELD_SEP}{position % 2}{FIELD_SEP}{tag}{FIELD_SEP}{condition}")
                    )
                )
    n = len(tagset)
    return [flat[i * n : (i + 1) * n] for i in range(len(tokens))]


def span_label_scores(
    model: ScorerModel,
    doc: Document,
    span: Span,
    labels: Sequence[str],
    condition: str = "",
) -> list[float]:
    """Score vector over `labels` for one span."""
    if not labels:
        raise ValueError("labels must be non-empty")
    surface = resolve_span(doc, span)  # also validates the span
    key = span_key(span, labels, condition)

    if model.kind == "file":
        assert model.table is not None
        return _expect_length(model.table.lookup(doc.id, key), len(labels), key)
    if model.kind == "remote":
        return _expect_length(_remote_scores(model, doc, "span", [key], labels)[0], len(labels), key)
    return [
        _clamp(
            _weight(model.seed, f"span{FIELD_SEP}{surface}{FIELD_SEP}{label}{FIELD_SEP}{condition}")
            + _weight(
                model.seed,
                f"spanlen{FIELD_SEP}{span.end_token - span.start_token}{FIELD_SEP}{label}{FIELD_SEP}{condition}",
            )
        )
        for label in labels
    ]


class ClusterSummary(Protocol):
    """What the pair scorer needs from a cluster: its retained exemplars."""

    @property
    def exemplars(self) -> Sequence[Mention]: ...


# Fixed positive weight for the shared-surface feature: large enough that an
# exact surface match always outscores disjoint surfaces regardless of the
# hash noise, which stays within [-0.25, 0.25].
_SHARED_SURFACE_WEIGHT = 4.0
_TOKEN_OVERLAP_WEIGHT = 2.0
_PAIR_BIAS = -1.0
_PAIR_NOISE_SCALE = 0.25


def _reference_pair_score(model: ScorerModel, mention: Mention, exemplar: Mention) -> float:
    noise = _PAIR_NOISE_SCALE * _weight(model.seed, f"pair{FIELD_SEP}{mention.surface}{FIELD_SEP}{exemplar.surface}")
    a = set(mention.surface.casefold().split())
    b = set(exemplar.surface.casefold().split())
    overlap = len(a & b) / len(a | b) if a or b else 0.0
    shared = _SHARED_SURFACE_WEIGHT if mention.surface.casefold() == exemplar.surface.casefold() else 0.0
    return _clamp(noise + shared + _TOKEN_OVERLAP_WEIGHT * overlap + _PAIR_BIAS)


def mention_pair_score(model: ScorerModel, doc: Document, mention: Mention, summary: ClusterSummary) -> float:
    """Attachment score of `mention` against a cluster: max over exemplars.

    Positive means "attach".  File backends store one entry per
    (mention, exemplar) pair and every retained exemplar must be present.
    """
    exemplars = list(summary.exemplars)
    if not exemplars:
        raise ValueError("cluster summary has no exemplars")
    if model.kind == "file":
        assert model.table is not None
        return max(
            _expect_length(model.table.lookup(doc.id, pair_key(mention.id, e.id)), 1, pair_key(mention.id, e.id))[0]
            for e in exemplars
        )
    if model.kind == "remote":
        keys = [pair_key(mention.id, e.id) for e in exemplars]
        rows = _remote_scores(model, doc, "pair", keys, [])
        return max(_expect_length(row, 1, key)[0] for key, row in zip(keys, rows))
    return max(_reference_pair_score(model, mention, e) for e in exemplars)


def event_pair_scores(
    model: ScorerModel,
    doc: Document,
    pair: tuple[FrameInstance, FrameInstance],
    labels: Sequence[str],
) -> list[float]:
    """Score vector over relation labels for an ordered frame pair."""
    if not labels:
        raise ValueError("labels must be non-empty")
    source, target = pair
    key = events_key(source.id, target.id, labels)

    if model.kind == "file":
        assert model.table is not None
        return _expect_length(model.table.lookup(doc.id, key), len(labels), key)
    if model.kind == "remote":
        return _expect_length(_remote_scores(model, doc, "events", [key], labels)[0], len(labels), key)

    def surface_of(frame: FrameInstance) -> str:
        m = doc.get_mention(frame.trigger)
        if m is None:
            raise ValueError(f"frame {frame.id!r}: trigger mention {frame.trigger!r} does not resolve")
        return m.surface

    s1, s2 = surface_of(source), surface_of(target)
    return [
        _clamp(
            _weight(model.seed, f"events{FIELD_SEP}{s1}{FIELD_SEP}{s2}{FIELD_SEP}{label}")
            + _weight(model.seed, f"evlabel{FIELD_SEP}{label}")
        )
        for label in labels
    ]


def score_item(model: ScorerModel, doc: Document, item_key: str) -> list[float]:
    """Recompute the score vector an item key stands for.

    This is the server side of the remote scoring protocol: keys are
    self-describing, so any local backend can answer them.
    """
    if model.kind == "file":
        assert model.table is not None
        return list(model.table.lookup(doc.id, item_key))

    parts = item_key.split(FIELD_SEP)
    kind = parts[0] if parts else ""
    if kind == "tags" and len(parts) == 6:
        tok_id, start, end, condition, joined = parts[1:]
        sentence = Sentence(tok_id, int(start), int(end))
        rows = token_tag_scores(model, doc, sentence, joined.split(LIST_SEP), condition)
        return [x for row in rows for x in row]
    if kind == "span" and len(parts) == 6:
        tok_id, start, end, condition, joined = parts[1:]
        return span_label_scores(model, doc, Span(tok_id, int(start), int(end)), joined.split(LIST_SEP), condition)
    if kind == "pair" and len(parts) == 3:
        mention = doc.get_mention(parts[1])
        exemplar = doc.get_mention(parts[2])
        if mention is None or exemplar is None:
            raise BackendError(f"pair item {item_key!r} references unknown mentions")
        if model.kind == "remote":
            return list(_remote_scores(model, doc, "pair", [item_key], [])[0])
        return [_reference_pair_score(model, mention, exemplar)]
    if kind == "events" and len(parts) == 4:
        source = doc.get_frame(parts[1])
        target = doc.get_frame(parts[2])
        if source is None or target is None:
            raise BackendError(f"events item {item_key!r} references unknown frames")
        return event_pair_scores(model, doc, (source, target), parts[3].split(LIST_SEP))
    raise BackendError(f"unintelligible score item key: {item_key!r}")
