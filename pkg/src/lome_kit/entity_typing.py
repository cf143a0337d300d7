"""Hierarchical coarse-to-fine entity typing for mentions and clusters.

A type ontology is a tree of labels with levels counted from 1 (children of
a virtual root).  Mention typing descends greedily: at each level the
candidates are the children of the previous choice and the argmax wins.
Cluster typing shares the descent across all member mentions, choosing each
level by rank-based voting: every mention contributes 1/rank of a candidate
(competition ranking over its own scores) and the candidate with the
largest total wins.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .schema import Document, EntityCluster, Mention, TypeAssignment, parse_canonical_json
from .scoring import ScorerModel, span_label_scores


class OntologyError(ValueError):
    """Raised for ill-formed ontology files: cycles, orphans, duplicates, level gaps."""


@dataclass(frozen=True)
class TypeNode:
    label: str
    parent: Optional[str]
    level: int


@dataclass(frozen=True)
class TypeOntology:
    nodes: Mapping[str, TypeNode] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", dict(self.nodes))
        children: dict[Optional[str], list[str]] = {}
        for node in self.nodes.values():
            children.setdefault(node.parent, []).append(node.label)
        object.__setattr__(
            self, "_children", {parent: tuple(sorted(labels)) for parent, labels in children.items()}
        )

    @property
    def roots(self) -> tuple[str, ...]:
        """Level-1 labels (children of the virtual root), sorted."""
        return self._children.get(None, ())  # type: ignore[attr-defined]

    def children(self, label: str) -> tuple[str, ...]:
        if label not in self.nodes:
            raise OntologyError(f"unknown type label: {label!r}")
        return self._children.get(label, ())  # type: ignore[attr-defined]

    def is_root_path(self, path: Sequence[str]) -> bool:
        """True iff `path` is a root-to-node chain of this ontology."""
        parent: Optional[str] = None
        for label in path:
            node = self.nodes.get(label)
            if node is None or node.parent != parent:
                return False
            parent = label
        return len(path) >= 1


def parse_ontology(obj: object) -> TypeOntology:
    """Validate a node list [{"label":..., "parent":...[, "level":...]}, ...]."""
    if not (isinstance(obj, list) and obj):
        raise OntologyError("ontology must be a non-empty list of nodes")
    raw: dict[str, tuple[Optional[str], Optional[int]]] = {}
    for i, entry in enumerate(obj):
        if not (isinstance(entry, dict) and "label" in entry and set(entry) <= {"label", "parent", "level"}):
            raise OntologyError(f"node {i}: expected fields label, parent and optional level")
        label = entry["label"]
        parent = entry.get("parent")
        declared = entry.get("level")
        if not isinstance(label, str) or (parent is not None and not isinstance(parent, str)):
            raise OntologyError(f"node {i}: label and parent must be strings")
        if declared is not None and (not isinstance(declared, int) or isinstance(declared, bool)):
            raise OntologyError(f"node {label!r}: level must be an integer")
        if label in raw:
            raise OntologyError(f"duplicate type label: {label!r}")
        raw[label] = (parent, declared)

    levels: dict[str, int] = {}

    def level_of(label: str, trail: tuple[str, ...]) -> int:
        if label in trail:
            raise OntologyError(f"cycle through type label {label!r}")
        if label in levels:
            return levels[label]
        parent, _ = raw[label]
        if parent is None:
            level = 1
        else:
            if parent not in raw:
                raise OntologyError(f"node {label!r}: unknown parent {parent!r}")
            level = level_of(parent, trail + (label,)) + 1
        levels[label] = level
        return level

    nodes: dict[str, TypeNode] = {}
    for label, (parent, declared) in raw.items():
        level = level_of(label, ())
        if declared is not None and declared != level:
            raise OntologyError(
                f"node {label!r}: declared level {declared} but parent chain implies {level} (level gap)"
            )
        nodes[label] = TypeNode(label=label, parent=parent, level=level)
    return TypeOntology(nodes)


def load_ontology(path: str | Path) -> TypeOntology:
    return parse_ontology(parse_canonical_json(Path(path).read_bytes()))


@dataclass(frozen=True)
class LevelScores:
    """Per-mention scores, competition ranks, and 1/rank relevances for one level."""

    candidates: tuple[str, ...]
    scores: tuple[tuple[float, ...], ...]  # one row per mention
    ranks: tuple[tuple[int, ...], ...]
    relevances: tuple[tuple[float, ...], ...]


def compute_level_scores(candidates: Sequence[str], score_rows: Sequence[Sequence[float]]) -> LevelScores:
    if not candidates:
        raise ValueError("candidate set must be non-empty")
    if not score_rows:
        raise ValueError("need scores for at least one mention")
    ranks: list[tuple[int, ...]] = []
    relevances: list[tuple[float, ...]] = []
    for row in score_rows:
        if len(row) != len(candidates):
            raise ValueError(f"score row of length {len(row)} for {len(candidates)} candidates")
        # Competition ranking: tied scores share the minimal rank.
        row_ranks = tuple(1 + sum(1 for other in row if other > score) for score in row)
        ranks.append(row_ranks)
        relevances.append(tuple(1.0 / r for r in row_ranks))
    return LevelScores(
        candidates=tuple(candidates),
        scores=tuple(tuple(float(x) for x in row) for row in score_rows),
        ranks=tuple(ranks),
        relevances=tuple(relevances),
    )


def borda_level(candidates: Sequence[str], score_rows: Sequence[Sequence[float]]) -> tuple[str, float]:
    """Rank-based vote over one level; returns (winner, winning total).

    Each mention contributes 1/rank of each candidate; the candidate with the
    largest total wins, ties going to the lexicographically smaller label.
    """
    level = compute_level_scores(candidates, score_rows)
    totals = [sum(rel[i] for rel in level.relevances) for i in range(len(candidates))]
    best, best_total = None, None
    for label, total in zip(level.candidates, totals):
        if best_total is None or total > best_total or (total == best_total and label < best):
            best, best_total = label, total
    assert best is not None and best_total is not None
    return best, best_total


def _type_condition(path: Sequence[str]) -> str:
    return "type:" + "/".join(path)


def _resolve_depth(ontology: TypeOntology, max_depth: Optional[int]) -> int:
    if max_depth is None:
        return max((node.level for node in ontology.nodes.values()), default=0)
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    return max_depth


def type_mention(
    model: ScorerModel,
    ontology: TypeOntology,
    doc: Document,
    mention: Mention,
    max_depth: Optional[int] = None,
) -> TypeAssignment:
    """Greedy root-to-leaf descent for a single mention."""
    depth = _resolve_depth(ontology, max_depth)
    if not ontology.roots:
        raise OntologyError("ontology has no level-1 nodes")
    path: list[str] = []
    scores: list[float] = []
    candidates = ontology.roots
    while candidates and len(path) < depth:
        row = span_label_scores(model, doc, mention.span, candidates, condition=_type_condition(path))
        best, best_score = None, None
        for label, score in zip(candidates, row):
            if best_score is None or score > best_score or (score == best_score and label < best):
                best, best_score = label, score
        path.append(best)  # type: ignore[arg-type]
        scores.append(best_score)  # type: ignore[arg-type]
        candidates = ontology.children(path[-1])
    return TypeAssignment(target=mention.id, path=tuple(path), per_level_scores=tuple(scores))


def type_entity(
    model: ScorerModel,
    ontology: TypeOntology,
    doc: Document,
    cluster: EntityCluster,
    max_depth: Optional[int] = None,
) -> TypeAssignment:
    """Level-by-level descent shared by a whole cluster, one vote per level.

    The recorded per-level score is the winner's vote total, which for a
    singleton cluster is 1.0 at every level.
    """
    if not cluster.mention_ids:
        raise ValueError(f"cluster {cluster.id!r} is empty")
    depth = _resolve_depth(ontology, max_depth)
    if not ontology.roots:
        raise OntologyError("ontology has no level-1 nodes")
    mentions = []
    for mid in cluster.mention_ids:
        mention = doc.get_mention(mid)
        if mention is None:
            raise ValueError(f"cluster {cluster.id!r}: mention {mid!r} does not resolve")
        mentions.append(mention)
    path: list[str] = []
    totals: list[float] = []
    candidates = ontology.roots
    while candidates and len(path) < depth:
        rows = [
            span_label_scores(model, doc, m.span, candidates, condition=_type_condition(path)) for m in mentions
        ]
        winner, total = borda_level(candidates, rows)
        path.append(winner)
        totals.append(total)
        candidates = ontology.children(winner)
    return TypeAssignment(target=cluster.id, path=tuple(path), per_level_scores=tuple(totals))
