"""Pairwise temporal relation classification between frame instances.

Relations are drawn from named label sets; deterministic mappings rewrite
links from one set into another (e.g. collapsing the containment relations
into a single ``overlaps`` label).  Links are stored directed with the
source appearing earlier in the text; ``after`` means the source happens
after the target.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .schema import Document, FrameInstance, TemporalLink, parse_canonical_json, sentence_index_of
from .scoring import ScorerModel, event_pair_scores


class LabelSetError(ValueError):
    """Raised for unknown label sets or ill-formed label-set files."""


class LabelMappingError(ValueError):
    """Raised when a link's relation has no entry in the applied mapping."""


@dataclass(frozen=True)
class RelationLabelSet:
    name: str
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise LabelSetError(f"label set {self.name!r} has duplicate labels")


TBD5 = RelationLabelSet("TBD5", ("before", "after", "includes", "is_included", "vague"))
JOINT4 = RelationLabelSet("JOINT4", ("before", "after", "includes", "is_included"))
MAPPED3 = RelationLabelSet("MAPPED3", ("before", "after", "overlaps"))

BUILTIN_LABEL_SETS: dict[str, RelationLabelSet] = {ls.name: ls for ls in (TBD5, JOINT4, MAPPED3)}


@dataclass(frozen=True)
class LabelMapping:
    source: str
    target: str
    mapping: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "mapping", dict(self.mapping))


def _containment_to_overlaps(source: str) -> LabelMapping:
    return LabelMapping(
        source=source,
        target="MAPPED3",
        mapping={"before": "before", "after": "after", "includes": "overlaps", "is_included": "overlaps"},
    )


# TBD5 -> MAPPED3 deliberately has no entry for "vague": such links must be
# filtered out before mapping, and map_labels errors on them by name.
BUILTIN_MAPPINGS: dict[tuple[str, str], LabelMapping] = {
    ("TBD5", "MAPPED3"): _containment_to_overlaps("TBD5"),
    ("JOINT4", "MAPPED3"): _containment_to_overlaps("JOINT4"),
}


def get_label_set(name: str, extra: Mapping[str, RelationLabelSet] | None = None) -> RelationLabelSet:
    if extra and name in extra:
        return extra[name]
    try:
        return BUILTIN_LABEL_SETS[name]
    except KeyError:
        raise LabelSetError(f"unknown relation label set: {name!r}") from None


def load_label_set(path: str | Path) -> RelationLabelSet:
    """Read a custom label set from canonical JSON {"name":..., "labels":[...]}."""
    obj = parse_canonical_json(Path(path).read_bytes())
    if not (isinstance(obj, dict) and set(obj) == {"name", "labels"}):
        raise LabelSetError(f"label-set file {path}: expected fields 'name' and 'labels'")
    labels = obj["labels"]
    if not (isinstance(obj["name"], str) and isinstance(labels, list) and labels and all(isinstance(x, str) for x in labels)):
        raise LabelSetError(f"label-set file {path}: name must be a string and labels a non-empty string list")
    return RelationLabelSet(obj["name"], tuple(labels))


def load_label_mapping(path: str | Path) -> LabelMapping:
    """Read a custom mapping from canonical JSON {"source":..,"target":..,"map":{..}}."""
    obj = parse_canonical_json(Path(path).read_bytes())
    if not (isinstance(obj, dict) and set(obj) == {"source", "target", "map"}):
        raise LabelSetError(f"mapping file {path}: expected fields 'source', 'target', 'map'")
    if not (isinstance(obj["map"], dict) and all(isinstance(k, str) and isinstance(v, str) for k, v in obj["map"].items())):
        raise LabelSetError(f"mapping file {path}: 'map' must be a string-to-string object")
    return LabelMapping(source=obj["source"], target=obj["target"], mapping=dict(obj["map"]))


def _trigger_position(doc: Document, frame: FrameInstance) -> tuple[int, int, int, int]:
    mention = doc.get_mention(frame.trigger)
    if mention is None:
        raise ValueError(f"frame {frame.id!r}: trigger mention {frame.trigger!r} does not resolve")
    span = mention.span
    tok_order = {t.id: i for i, t in enumerate(doc.tokenizations)}
    tok = doc.get_tokenization(span.tokenization_id)
    if tok is None:
        raise ValueError(f"frame {frame.id!r}: unknown tokenization {span.tokenization_id!r}")
    return (
        tok_order[span.tokenization_id],
        sentence_index_of(tok, span.start_token),
        span.start_token,
        span.end_token,
    )


def enumerate_event_pairs(doc: Document, window: int = 1) -> list[tuple[FrameInstance, FrameInstance]]:
    """All ordered frame pairs (earlier, later) at most `window` sentences apart.

    Frames are ordered by trigger position; pairs across different
    tokenizations are never produced.  Each unordered pair appears once.
    """
    if window < 0:
        raise ValueError("window must be >= 0")
    positioned = sorted(
        ((_trigger_position(doc, f), f) for f in doc.frames), key=lambda item: (item[0], item[1].id)
    )
    pairs: list[tuple[FrameInstance, FrameInstance]] = []
    for i in range(len(positioned)):
        (tok_i, sent_i, _, _), fi = positioned[i]
        for j in range(i + 1, len(positioned)):
            (tok_j, sent_j, _, _), fj = positioned[j]
            if tok_i == tok_j and abs(sent_i - sent_j) <= window:
                pairs.append((fi, fj))
    return pairs


def _argmax_label(labels: Sequence[str], scores: Sequence[float]) -> str:
    best_label, best_score = None, None
    for label, score in zip(labels, scores):
        if best_score is None or score > best_score or (score == best_score and label < best_label):
            best_label, best_score = label, score
    assert best_label is not None
    return best_label


def classify_pair(
    model: ScorerModel,
    doc: Document,
    pair: tuple[FrameInstance, FrameInstance],
    label_set: RelationLabelSet,
) -> TemporalLink:
    """Argmax relation over the label set; ties go to the smaller label."""
    source, target = pair
    scores = event_pair_scores(model, doc, pair, label_set.labels)
    relation = _argmax_label(label_set.labels, scores)
    return TemporalLink(source=source.id, target=target.id, relation=relation, label_set=label_set.name)


def map_labels(links: Sequence[TemporalLink], mapping: LabelMapping) -> list[TemporalLink]:
    """Rewrite link relations under `mapping`, preserving count and endpoints."""
    out: list[TemporalLink] = []
    for link in links:
        if link.label_set != mapping.source:
            raise LabelMappingError(
                f"link {link.source!r}->{link.target!r} has label set {link.label_set!r}, "
                f"mapping expects {mapping.source!r}"
            )
        try:
            relation = mapping.mapping[link.relation]
        except KeyError:
            raise LabelMappingError(
                f"label {link.relation!r} has no entry in mapping {mapping.source}->{mapping.target}"
            ) from None
        out.append(TemporalLink(source=link.source, target=link.target, relation=relation, label_set=mapping.target))
    return out
