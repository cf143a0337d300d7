"""Document data model, tokenization, span arithmetic, and canonical serialization.

Every annotator in the pipeline communicates through `Document` values:
immutable containers holding the source text, one or more tokenizations,
and the annotation layers (mentions, frames, entity clusters, type
assignments, temporal links).  The canonical wire form is UTF-8 JSON with
lexicographically sorted keys and no insignificant whitespace, so
structurally equal documents always serialize to identical bytes.

All character offsets are Unicode code points, never bytes.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import re
from dataclasses import dataclass
from typing import Any, Mapping, NamedTuple, Optional, Sequence

SCHEMA_VERSION = "1"
FILE_EXTENSION = ".lome.json"

_WORD = re.compile(r"\S+")


class DeserializeError(ValueError):
    """Raised when bytes cannot be decoded into a valid Document."""


def canonical_json_bytes(obj: Any) -> bytes:
    """Encode `obj` as canonical JSON: sorted keys, compact, raw UTF-8."""
    return json.dumps(
        obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"), allow_nan=False
    ).encode("utf-8")


def parse_canonical_json(data: bytes) -> Any:
    """Decode JSON bytes, reporting the byte offset of the first defect."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DeserializeError(f"payload is not valid UTF-8 at byte offset {exc.start}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise DeserializeError(f"malformed JSON at byte offset {offset}: {exc.msg}") from exc


class Token(NamedTuple):
    index: int
    char_start: int
    char_end: int
    surface: str


class Sentence(NamedTuple):
    """A half-open token-index range of one tokenization."""

    tokenization_id: str
    start_token: int
    end_token: int

    def __len__(self) -> int:
        return self.end_token - self.start_token


class Role(NamedTuple):
    label: str
    argument: str  # mention id


@dataclass(frozen=True)
class Span:
    """Half-open token range [start_token, end_token) of one tokenization."""

    tokenization_id: str
    start_token: int
    end_token: int


@dataclass(frozen=True)
class Tokenization:
    id: str
    tool: str
    tokens: tuple[Token, ...] = ()
    sentences: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "tokens",
            tuple(t if isinstance(t, Token) else Token(int(t[0]), int(t[1]), int(t[2]), t[3]) for t in self.tokens),
        )
        object.__setattr__(self, "sentences", tuple((int(s), int(e)) for s, e in self.sentences))


@dataclass(frozen=True)
class Mention:
    id: str
    span: Span
    surface: str


@dataclass(frozen=True)
class FrameInstance:
    id: str
    frame_label: str
    trigger: str  # mention id
    roles: tuple[Role, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "roles", tuple(r if isinstance(r, Role) else Role(r[0], r[1]) for r in self.roles))


@dataclass(frozen=True)
class EntityCluster:
    id: str
    mention_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "mention_ids", tuple(self.mention_ids))


@dataclass(frozen=True)
class TypeAssignment:
    target: str  # mention id or cluster id
    path: tuple[str, ...]
    per_level_scores: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "path", tuple(self.path))
        if self.per_level_scores is not None:
            object.__setattr__(self, "per_level_scores", tuple(float(x) for x in self.per_level_scores))


@dataclass(frozen=True)
class TemporalLink:
    source: str  # frame-instance id, earlier in text
    target: str  # frame-instance id
    relation: str
    label_set: str


@dataclass(frozen=True)
class AnnotationMetadata:
    annotator_name: str
    version: str
    timestamp: str
    content_digest: str


_METADATA_ORDER = lambda m: (m.annotator_name, m.version, m.timestamp, m.content_digest)  # noqa: E731


@dataclass(frozen=True)
class Document:
    """Immutable annotated document; mutate by building a new value."""

    id: str
    text: str
    language: Optional[str] = None
    tokenizations: tuple[Tokenization, ...] = ()
    mentions: tuple[Mention, ...] = ()
    frames: tuple[FrameInstance, ...] = ()
    clusters: tuple[EntityCluster, ...] = ()
    type_assignments: tuple[TypeAssignment, ...] = ()
    temporal_links: tuple[TemporalLink, ...] = ()
    metadata: tuple[AnnotationMetadata, ...] = ()

    def __post_init__(self) -> None:
        for name in ("tokenizations", "mentions", "frames", "clusters", "type_assignments", "temporal_links"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        # Metadata is a set-like layer: canonical order keeps serialized bytes
        # independent of the order annotators happened to run in.
        object.__setattr__(self, "metadata", tuple(sorted(self.metadata, key=_METADATA_ORDER)))

    def replace(self, **changes: Any) -> "Document":
        return dataclasses.replace(self, **changes)

    def get_tokenization(self, tokenization_id: str) -> Optional[Tokenization]:
        for t in self.tokenizations:
            if t.id == tokenization_id:
                return t
        return None

    def get_mention(self, mention_id: str) -> Optional[Mention]:
        for m in self.mentions:
            if m.id == mention_id:
                return m
        return None

    def get_frame(self, frame_id: str) -> Optional[FrameInstance]:
        for f in self.frames:
            if f.id == frame_id:
                return f
        return None

    def get_cluster(self, cluster_id: str) -> Optional[EntityCluster]:
        for c in self.clusters:
            if c.id == cluster_id:
                return c
        return None

    def sentences(self, tokenization_id: str) -> tuple[Sentence, ...]:
        tok = self.get_tokenization(tokenization_id)
        if tok is None:
            raise KeyError(f"unknown tokenization id: {tokenization_id!r}")
        return tuple(Sentence(tokenization_id, s, e) for s, e in tok.sentences)


def tokenize_whitespace(text: str, tokenization_id: str = "whitespace", tool: str = "whitespace") -> Tokenization:
    """Split `text` into maximal runs of non-whitespace code points.

    One sentence per line; a final line without a trailing newline is still a
    sentence; lines holding no tokens contribute no sentence.
    """
    tokens: list[Token] = []
    sentences: list[tuple[int, int]] = []
    offset = 0
    for line in text.split("\n"):
        first = len(tokens)
        for match in _WORD.finditer(line):
            tokens.append(Token(len(tokens), offset + match.start(), offset + match.end(), match.group()))
        if len(tokens) > first:
            sentences.append((first, len(tokens)))
        offset += len(line) + 1
    return Tokenization(id=tokenization_id, tool=tool, tokens=tuple(tokens), sentences=tuple(sentences))


def resolve_span(doc: Document, span: Span) -> str:
    """Text slice from the first token's char_start to the last token's char_end."""
    tok = doc.get_tokenization(span.tokenization_id)
    if tok is None:
        raise KeyError(f"unknown tokenization id: {span.tokenization_id!r}")
    n = len(tok.tokens)
    if not (0 <= span.start_token < span.end_token <= n):
        raise IndexError(
            f"span [{span.start_token},{span.end_token}) out of range for "
            f"{n}-token tokenization {span.tokenization_id!r}"
        )
    return doc.text[tok.tokens[span.start_token].char_start : tok.tokens[span.end_token - 1].char_end]


def sentence_index_of(tokenization: Tokenization, token_index: int) -> int:
    for i, (s, e) in enumerate(tokenization.sentences):
        if s <= token_index < e:
            return i
    raise ValueError(f"token index {token_index} not covered by any sentence of {tokenization.id!r}")


def mention_order_key(doc: Document):
    """Sort key placing mentions in document order (tokenization, then span)."""
    tok_order = {t.id: i for i, t in enumerate(doc.tokenizations)}

    def key(mention: Mention) -> tuple[int, int, int, str]:
        return (
            tok_order.get(mention.span.tokenization_id, len(tok_order)),
            mention.span.start_token,
            mention.span.end_token,
            mention.id,
        )

    return key


def _known_label_sets(extra: Optional[Mapping[str, Sequence[str]]]) -> dict[str, tuple[str, ...]]:
    from . import temporal  # deferred: temporal depends on this module

    sets = {name: ls.labels for name, ls in temporal.BUILTIN_LABEL_SETS.items()}
    if extra:
        for name, labels in extra.items():
            sets[name] = tuple(labels)
    return sets


def validate_document(
    doc: Document, label_sets: Optional[Mapping[str, Sequence[str]]] = None
) -> list[str]:
    """Check every structural invariant; violations are data, not failures.

    Returns an empty list for a consistent document, otherwise one message per
    violation naming the offending id and the rule broken.  `label_sets` maps
    additional relation label-set names to their labels; the built-in sets are
    always known.
    """
    problems: list[str] = []
    try:
        doc.text.encode("utf-8")
    except UnicodeEncodeError as exc:
        problems.append(f"document {doc.id!r}: text is not valid Unicode ({exc.reason})")

    tok_ids: set[str] = set()
    for tok in doc.tokenizations:
        if tok.id in tok_ids:
            problems.append(f"tokenization {tok.id!r}: duplicate tokenization id")
            continue
        tok_ids.add(tok.id)
        prev_end = -1
        for pos, token in enumerate(tok.tokens):
            if token.index != pos:
                problems.append(f"tokenization {tok.id!r}: token at position {pos} has index {token.index}")
            if not (0 <= token.char_start < token.char_end <= len(doc.text)):
                problems.append(
                    f"tokenization {tok.id!r}: token {pos} char range "
                    f"[{token.char_start},{token.char_end}) out of bounds"
                )
                continue
            if token.char_start < prev_end:
                problems.append(f"tokenization {tok.id!r}: token {pos} overlaps or precedes its predecessor")
            prev_end = token.char_end
            if doc.text[token.char_start : token.char_end] != token.surface:
                problems.append(f"tokenization {tok.id!r}: token {pos} surface differs from text slice")
        expected_start = 0
        for i, (s, e) in enumerate(tok.sentences):
            if s != expected_start or s >= e:
                problems.append(
                    f"tokenization {tok.id!r}: sentence {i} range [{s},{e}) breaks the partition"
                )
                break
            expected_start = e
        else:
            if expected_start != len(tok.tokens):
                problems.append(
                    f"tokenization {tok.id!r}: sentences cover [0,{expected_start}) "
                    f"but there are {len(tok.tokens)} tokens"
                )

    mention_ids: set[str] = set()
    for mention in doc.mentions:
        if mention.id in mention_ids:
            problems.append(f"mention {mention.id!r}: duplicate mention id")
            continue
        mention_ids.add(mention.id)
        span = mention.span
        tok = doc.get_tokenization(span.tokenization_id)
        if tok is None:
            problems.append(f"mention {mention.id!r}: unknown tokenization {span.tokenization_id!r}")
            continue
        if not (0 <= span.start_token < span.end_token <= len(tok.tokens)):
            problems.append(
                f"mention {mention.id!r}: span [{span.start_token},{span.end_token}) "
                f"out of range for {len(tok.tokens)}-token tokenization {span.tokenization_id!r}"
            )
            continue
        if resolve_span(doc, span) != mention.surface:
            problems.append(f"mention {mention.id!r}: surface snapshot differs from resolved span text")

    frame_ids: set[str] = set()
    for frame in doc.frames:
        if frame.id in frame_ids:
            problems.append(f"frame {frame.id!r}: duplicate frame id")
            continue
        frame_ids.add(frame.id)
        if frame.trigger not in mention_ids:
            problems.append(f"frame {frame.id!r}: trigger mention {frame.trigger!r} does not resolve")
        for role in frame.roles:
            if role.argument not in mention_ids:
                problems.append(
                    f"frame {frame.id!r}: role {role.label!r} argument {role.argument!r} does not resolve"
                )

    cluster_ids: set[str] = set()
    clustered: dict[str, str] = {}
    order_key = mention_order_key(doc)
    for cluster in doc.clusters:
        if cluster.id in cluster_ids:
            problems.append(f"cluster {cluster.id!r}: duplicate cluster id")
            continue
        cluster_ids.add(cluster.id)
        seen: set[str] = set()
        members: list[Mention] = []
        for mid in cluster.mention_ids:
            if mid in seen:
                problems.append(f"cluster {cluster.id!r}: duplicate mention id {mid!r} within cluster")
                continue
            seen.add(mid)
            if mid not in mention_ids:
                problems.append(f"cluster {cluster.id!r}: mention {mid!r} does not resolve")
                continue
            if mid in clustered:
                problems.append(
                    f"cluster {cluster.id!r}: mention {mid!r} already belongs to cluster "
                    f"{clustered[mid]!r} (clusters must be disjoint)"
                )
            clustered[mid] = cluster.id
            members.append(doc.get_mention(mid))  # type: ignore[arg-type]
        keys = [order_key(m) for m in members if m is not None]
        if keys != sorted(keys):
            problems.append(f"cluster {cluster.id!r}: mention ids are not in document order")

    for assignment in doc.type_assignments:
        is_mention = assignment.target in mention_ids
        is_cluster = assignment.target in cluster_ids
        if not (is_mention or is_cluster):
            problems.append(f"type assignment target {assignment.target!r} does not resolve")
        elif is_mention and is_cluster:
            problems.append(f"type assignment target {assignment.target!r} is ambiguous (mention and cluster)")
        if len(assignment.path) < 1:
            problems.append(f"type assignment target {assignment.target!r}: empty type path")
        if assignment.per_level_scores is not None:
            if len(assignment.per_level_scores) != len(assignment.path):
                problems.append(
                    f"type assignment target {assignment.target!r}: "
                    f"{len(assignment.per_level_scores)} scores for {len(assignment.path)} levels"
                )
            elif not all(math.isfinite(x) for x in assignment.per_level_scores):
                problems.append(f"type assignment target {assignment.target!r}: non-finite score")

    known_sets = _known_label_sets(label_sets)
    for link in doc.temporal_links:
        where = f"temporal link {link.source!r}->{link.target!r}"
        if link.source not in frame_ids:
            problems.append(f"{where}: source frame does not resolve")
        if link.target not in frame_ids:
            problems.append(f"{where}: target frame does not resolve")
        if link.source == link.target:
            problems.append(f"{where}: source equals target")
        labels = known_sets.get(link.label_set)
        if labels is None:
            problems.append(f"{where}: unknown label set {link.label_set!r}")
        elif link.relation not in labels:
            problems.append(f"{where}: relation {link.relation!r} not in label set {link.label_set!r}")

    for meta in doc.metadata:
        if not meta.annotator_name:
            problems.append("metadata entry with empty annotator_name")

    return problems


def value_to_jsonable(value: Any) -> Any:
    """JSON-ready form of any schema value, matching the canonical layout."""
    if isinstance(value, Tokenization):
        return {
            "id": value.id,
            "tool": value.tool,
            "tokens": [[t.index, t.char_start, t.char_end, t.surface] for t in value.tokens],
            "sentences": [[s, e] for s, e in value.sentences],
        }
    if isinstance(value, Span):
        return {
            "tokenization_id": value.tokenization_id,
            "start_token": value.start_token,
            "end_token": value.end_token,
        }
    if isinstance(value, Mention):
        return {"id": value.id, "span": value_to_jsonable(value.span), "surface": value.surface}
    if isinstance(value, FrameInstance):
        return {
            "id": value.id,
            "frame_label": value.frame_label,
            "trigger": value.trigger,
            "roles": [[r.label, r.argument] for r in value.roles],
        }
    if isinstance(value, EntityCluster):
        return {"id": value.id, "mention_ids": list(value.mention_ids)}
    if isinstance(value, TypeAssignment):
        return {
            "target": value.target,
            "path": list(value.path),
            "per_level_scores": None if value.per_level_scores is None else list(value.per_level_scores),
        }
    if isinstance(value, TemporalLink):
        return {
            "source": value.source,
            "target": value.target,
            "relation": value.relation,
            "label_set": value.label_set,
        }
    if isinstance(value, AnnotationMetadata):
        return {
            "annotator_name": value.annotator_name,
            "version": value.version,
            "timestamp": value.timestamp,
            "content_digest": value.content_digest,
        }
    raise TypeError(f"no canonical form for {type(value).__name__}")


def document_to_jsonable(doc: Document) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "id": doc.id,
        "text": doc.text,
        "language": doc.language,
        "tokenizations": [value_to_jsonable(t) for t in doc.tokenizations],
        "mentions": [value_to_jsonable(m) for m in doc.mentions],
        "frames": [value_to_jsonable(f) for f in doc.frames],
        "clusters": [value_to_jsonable(c) for c in doc.clusters],
        "type_assignments": [value_to_jsonable(a) for a in doc.type_assignments],
        "temporal_links": [value_to_jsonable(t) for t in doc.temporal_links],
        "metadata": [value_to_jsonable(m) for m in doc.metadata],
    }


def _need(obj: Any, where: str, keys: tuple[str, ...]) -> dict:
    if not isinstance(obj, dict):
        raise DeserializeError(f"{where}: expected a JSON object")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise DeserializeError(f"{where}: missing field {missing[0]!r}")
    extra = [k for k in obj if k not in keys]
    if extra:
        raise DeserializeError(f"{where}: unknown field {sorted(extra)[0]!r}")
    return obj


def _str(obj: dict, key: str, where: str) -> str:
    v = obj[key]
    if not isinstance(v, str):
        raise DeserializeError(f"{where}: field {key!r} must be a string")
    return v


def _opt_str(obj: dict, key: str, where: str) -> Optional[str]:
    v = obj[key]
    if v is not None and not isinstance(v, str):
        raise DeserializeError(f"{where}: field {key!r} must be a string or null")
    return v


def _int(value: Any, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise DeserializeError(f"{where}: expected an integer")
    return value


def _list(obj: dict, key: str, where: str) -> list:
    v = obj[key]
    if not isinstance(v, list):
        raise DeserializeError(f"{where}: field {key!r} must be a list")
    return v


def _span_from(obj: Any, where: str) -> Span:
    o = _need(obj, where, ("tokenization_id", "start_token", "end_token"))
    return Span(
        tokenization_id=_str(o, "tokenization_id", where),
        start_token=_int(o["start_token"], f"{where}.start_token"),
        end_token=_int(o["end_token"], f"{where}.end_token"),
    )


def document_from_jsonable(obj: Any) -> Document:
    """Strictly decode the canonical JSON layout; no unknown fields allowed."""
    top = _need(
        obj,
        "document",
        (
            "schema_version",
            "id",
            "text",
            "language",
            "tokenizations",
            "mentions",
            "frames",
            "clusters",
            "type_assignments",
            "temporal_links",
            "metadata",
        ),
    )
    version = top["schema_version"]
    if version != SCHEMA_VERSION:
        raise DeserializeError(f"unknown schema version: {version!r}")

    tokenizations = []
    for i, t in enumerate(_list(top, "tokenizations", "document")):
        where = f"tokenizations[{i}]"
        o = _need(t, where, ("id", "tool", "tokens", "sentences"))
        tokens = []
        for j, tk in enumerate(_list(o, "tokens", where)):
            if not (isinstance(tk, list) and len(tk) == 4 and isinstance(tk[3], str)):
                raise DeserializeError(f"{where}.tokens[{j}]: expected [index, char_start, char_end, surface]")
            tokens.append(
                Token(
                    _int(tk[0], f"{where}.tokens[{j}]"),
                    _int(tk[1], f"{where}.tokens[{j}]"),
                    _int(tk[2], f"{where}.tokens[{j}]"),
                    tk[3],
                )
            )
        sentences = []
        for j, se in enumerate(_list(o, "sentences", where)):
            if not (isinstance(se, list) and len(se) == 2):
                raise DeserializeError(f"{where}.sentences[{j}]: expected [start, end]")
            sentences.append((_int(se[0], where), _int(se[1], where)))
        tokenizations.append(
            Tokenization(id=_str(o, "id", where), tool=_str(o, "tool", where), tokens=tuple(tokens), sentences=tuple(sentences))
        )

    mentions = []
    for i, m in enumerate(_list(top, "mentions", "document")):
        where = f"mentions[{i}]"
        o = _need(m, where, ("id", "span", "surface"))
        mentions.append(Mention(id=_str(o, "id", where), span=_span_from(o["span"], f"{where}.span"), surface=_str(o, "surface", where)))

    frames = []
    for i, f in enumerate(_list(top, "frames", "document")):
        where = f"frames[{i}]"
        o = _need(f, where, ("id", "frame_label", "trigger", "roles"))
        roles = []
        for j, r in enumerate(_list(o, "roles", where)):
            if not (isinstance(r, list) and len(r) == 2 and all(isinstance(x, str) for x in r)):
                raise DeserializeError(f"{where}.roles[{j}]: expected [role_label, mention_id]")
            roles.append(Role(r[0], r[1]))
        frames.append(
            FrameInstance(
                id=_str(o, "id", where),
                frame_label=_str(o, "frame_label", where),
                trigger=_str(o, "trigger", where),
                roles=tuple(roles),
            )
        )

    clusters = []
    for i, c in enumerate(_list(top, "clusters", "document")):
        where = f"clusters[{i}]"
        o = _need(c, where, ("id", "mention_ids"))
        mids = _list(o, "mention_ids", where)
        if not all(isinstance(x, str) for x in mids):
            raise DeserializeError(f"{where}: mention_ids must be strings")
        clusters.append(EntityCluster(id=_str(o, "id", where), mention_ids=tuple(mids)))

    assignments = []
    for i, a in enumerate(_list(top, "type_assignments", "document")):
        where = f"type_assignments[{i}]"
        o = _need(a, where, ("target", "path", "per_level_scores"))
        path = _list(o, "path", where)
        if not all(isinstance(x, str) for x in path):
            raise DeserializeError(f"{where}: path entries must be strings")
        scores = o["per_level_scores"]
        if scores is not None:
            if not (isinstance(scores, list) and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in scores)):
                raise DeserializeError(f"{where}: per_level_scores must be numbers or null")
            scores = tuple(float(x) for x in scores)
        assignments.append(TypeAssignment(target=_str(o, "target", where), path=tuple(path), per_level_scores=scores))

    links = []
    for i, t in enumerate(_list(top, "temporal_links", "document")):
        where = f"temporal_links[{i}]"
        o = _need(t, where, ("source", "target", "relation", "label_set"))
        links.append(
            TemporalLink(
                source=_str(o, "source", where),
                target=_str(o, "target", where),
                relation=_str(o, "relation", where),
                label_set=_str(o, "label_set", where),
            )
        )

    metadata = []
    for i, m in enumerate(_list(top, "metadata", "document")):
        where = f"metadata[{i}]"
        o = _need(m, where, ("annotator_name", "version", "timestamp", "content_digest"))
        metadata.append(
            AnnotationMetadata(
                annotator_name=_str(o, "annotator_name", where),
                version=_str(o, "version", where),
                timestamp=_str(o, "timestamp", where),
                content_digest=_str(o, "content_digest", where),
            )
        )

    return Document(
        id=_str(top, "id", "document"),
        text=_str(top, "text", "document"),
        language=_opt_str(top, "language", "document"),
        tokenizations=tuple(tokenizations),
        mentions=tuple(mentions),
        frames=tuple(frames),
        clusters=tuple(clusters),
        type_assignments=tuple(assignments),
        temporal_links=tuple(links),
        metadata=tuple(metadata),
    )


def serialize(doc: Document, *, label_sets: Optional[Mapping[str, Sequence[str]]] = None) -> bytes:
    """Canonical bytes of a valid document; byte-deterministic across runs."""
    problems = validate_document(doc, label_sets=label_sets)
    if problems:
        raise ValueError(f"cannot serialize invalid document {doc.id!r}: {problems[0]}")
    return canonical_json_bytes(document_to_jsonable(doc))


def deserialize(data: bytes, *, label_sets: Optional[Mapping[str, Sequence[str]]] = None) -> Document:
    """Parse canonical bytes; rejects malformed or invariant-violating payloads."""
    doc = document_from_jsonable(parse_canonical_json(data))
    problems = validate_document(doc, label_sets=label_sets)
    if problems:
        raise DeserializeError(f"invalid document: {problems[0]}")
    return doc


def document_digest(doc: Document, *, label_sets: Optional[Mapping[str, Sequence[str]]] = None) -> str:
    """SHA-256 of the canonical bytes with metadata timestamps blanked.

    Timestamps are the only non-deterministic field, so this digest is stable
    across reruns and across in-process vs. remote execution.
    """
    stripped = doc.replace(metadata=tuple(dataclasses.replace(m, timestamp="") for m in doc.metadata))
    return hashlib.sha256(serialize(stripped, label_sets=label_sets)).hexdigest()
