"""Reference-exact evaluation for every annotation layer.

Frame parsing is scored by exact unit matching (a role counts only when its
frame is exactly right), coreference by MUC (Vilain et al. 1995), B-cubed
(Bagga and Baldwin 1998) and CEAF phi-4 (Luo 2005) plus their F1 average,
typing by micro-F1 over path node sets, and temporal relations by
per-label and pooled precision/recall/F1.

Every metric is exposed both as a PRF triple and as raw counts
(p_num, p_den, r_num, r_den) so per-document counts can be summed before
the final division when merging a batch.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Mapping, Sequence

from scipy.optimize import linear_sum_assignment

from .schema import Document, TemporalLink, TypeAssignment

Counts = tuple[float, float, float, float]  # p_num, p_den, r_num, r_den


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, counts: Counts) -> "PRF":
        p_num, p_den, r_num, r_den = counts
        p = p_num / p_den if p_den > 0 else 0.0
        r = r_num / r_den if r_den > 0 else 0.0
        f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(p, r, f1)

    def to_jsonable(self) -> dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def _sum_counts(a: Counts, b: Counts) -> Counts:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])


# ---------------------------------------------------------------- frames

def _frame_units(doc: Document, labeled: bool, roles_only: bool) -> Counter:
    """Pooled multiset of frame and role units for exact matching.

    A frame unit is its trigger span (plus the frame label when labeled);
    a role unit embeds its frame unit, so a role can only match when its
    frame matches exactly.
    """
    units: Counter = Counter()
    for frame in doc.frames:
        trigger = doc.get_mention(frame.trigger)
        if trigger is None:
            continue
        t = trigger.span
        tkey = (t.tokenization_id, t.start_token, t.end_token)
        fkey = (tkey, frame.frame_label) if labeled else tkey
        if not roles_only:
            units[("frame", fkey)] += 1
        for role in frame.roles:
            argument = doc.get_mention(role.argument)
            if argument is None:
                continue
            a = argument.span
            akey = (a.tokenization_id, a.start_token, a.end_token)
            rkey = (fkey, role.label, akey) if labeled else (fkey, akey)
            units[("role", rkey)] += 1
    return units


def frame_match_counts(
    gold: Document, pred: Document, labeled: bool = True, roles_only: bool = False
) -> Counts:
    gold_units = _frame_units(gold, labeled, roles_only)
    pred_units = _frame_units(pred, labeled, roles_only)
    matched = sum((gold_units & pred_units).values())
    return (matched, sum(pred_units.values()), matched, sum(gold_units.values()))


def frame_exact_match_f1(
    gold: Document, pred: Document, labeled: bool = True, roles_only: bool = False
) -> PRF:
    """Micro P/R/F1 over pooled frame and role units; both docs share one text."""
    return PRF.from_counts(frame_match_counts(gold, pred, labeled, roles_only))


# ---------------------------------------------------------------- coreference

Clustering = Sequence[frozenset]


def cluster_span_sets(doc: Document) -> list[frozenset]:
    """Clusters as sets of span keys, comparable across documents."""
    out = []
    for cluster in doc.clusters:
        members = set()
        for mid in cluster.mention_ids:
            mention = doc.get_mention(mid)
            if mention is not None:
                s = mention.span
                members.add((s.tokenization_id, s.start_token, s.end_token))
        out.append(frozenset(members))
    return out


def _vilain_side(clusters: Clustering, mapping: Mapping[Hashable, int]) -> tuple[float, float]:
    num = 0.0
    den = 0.0
    for cluster in clusters:
        corresponding = set()
        unaligned = 0
        for m in cluster:
            if m in mapping:
                corresponding.add(mapping[m])
            else:
                unaligned += 1
        num += len(cluster) - unaligned - len(corresponding)
        den += len(cluster) - 1
    return num, den


def _cluster_mapping(clusters: Clustering) -> dict[Hashable, int]:
    return {m: i for i, cluster in enumerate(clusters) for m in cluster}


def muc_counts(gold: Clustering, pred: Clustering) -> Counts:
    p_num, p_den = _vilain_side(pred, _cluster_mapping(gold))
    r_num, r_den = _vilain_side(gold, _cluster_mapping(pred))
    return (p_num, p_den, r_num, r_den)


def muc(gold: Clustering, pred: Clustering) -> PRF:
    """Link-based score: a cluster's recall error is the number of merges needed.

    With no links on either side (all singletons) every count is zero and the
    zero-denominator convention yields (0, 0, 0).
    """
    return PRF.from_counts(muc_counts(gold, pred))


def _b_cubed_side(primary: Clustering, other: Clustering) -> tuple[float, float]:
    other_map = _cluster_mapping(other)
    num = 0.0
    den = 0.0
    for cluster in primary:
        for m in cluster:
            den += 1
            j = other_map.get(m)
            if j is not None:
                num += len(cluster & other[j]) / len(cluster)
    return num, den


def b_cubed_counts(gold: Clustering, pred: Clustering) -> Counts:
    p_num, p_den = _b_cubed_side(pred, gold)
    r_num, r_den = _b_cubed_side(gold, pred)
    return (p_num, p_den, r_num, r_den)


def b_cubed(gold: Clustering, pred: Clustering) -> PRF:
    """Mention-based score averaging per-mention cluster overlap ratios."""
    return PRF.from_counts(b_cubed_counts(gold, pred))


def _phi4(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 0.0
    return 2.0 * len(a & b) / (len(a) + len(b))


def ceaf_phi4_counts(gold: Clustering, pred: Clustering) -> Counts:
    if not gold or not pred:
        return (0.0, float(len(pred)), 0.0, float(len(gold)))
    cost = [[-_phi4(g, p) for p in pred] for g in gold]
    rows, cols = linear_sum_assignment(cost)
    total = -float(sum(cost[r][c] for r, c in zip(rows, cols)))
    return (total, float(len(pred)), total, float(len(gold)))


def ceaf_phi4(gold: Clustering, pred: Clustering) -> PRF:
    """Alignment-based score under the optimal one-to-one cluster matching.

    The alignment maximizing the summed phi-4 similarity is solved exactly as
    an assignment problem.  Singleton clusters are kept on both sides.
    """
    return PRF.from_counts(ceaf_phi4_counts(gold, pred))


def avg_coref_f1(gold: Clustering, pred: Clustering) -> float:
    """Unweighted mean of the MUC, B-cubed, and CEAF phi-4 F1 scores."""
    return (muc(gold, pred).f1 + b_cubed(gold, pred).f1 + ceaf_phi4(gold, pred).f1) / 3.0


# ---------------------------------------------------------------- typing

def typing_counts(gold: Sequence[TypeAssignment], pred: Sequence[TypeAssignment]) -> Counts:
    gold_paths = {a.target: set(a.path) for a in gold}
    pred_paths = {a.target: set(a.path) for a in pred}
    overlap = 0.0
    for target, nodes in pred_paths.items():
        overlap += len(nodes & gold_paths.get(target, set()))
    p_den = float(sum(len(nodes) for nodes in pred_paths.values()))
    r_den = float(sum(len(nodes) for nodes in gold_paths.values()))
    return (overlap, p_den, overlap, r_den)


def micro_f1_typing(gold: Sequence[TypeAssignment], pred: Sequence[TypeAssignment]) -> PRF:
    """Micro P/R/F1 over path node sets, keyed by assignment target."""
    return PRF.from_counts(typing_counts(gold, pred))


# ---------------------------------------------------------------- temporal

def _link_map(links: Iterable[TemporalLink]) -> dict[tuple[str, str], str]:
    return {(l.source, l.target): l.relation for l in links}


def relation_counts(
    gold: Iterable[TemporalLink], pred: Iterable[TemporalLink], labels: Sequence[str]
) -> dict[str, Counts]:
    """Per-label counts keyed on (source, target) pairs, plus a pooled "micro" row."""
    gold_map = _link_map(gold)
    pred_map = _link_map(pred)
    per_label: dict[str, Counts] = {}
    for label in labels:
        tp = sum(
            1 for pair, rel in pred_map.items() if rel == label and gold_map.get(pair) == label
        )
        p_den = sum(1 for rel in pred_map.values() if rel == label)
        r_den = sum(1 for rel in gold_map.values() if rel == label)
        per_label[label] = (float(tp), float(p_den), float(tp), float(r_den))
    tp_all = sum(1 for pair, rel in pred_map.items() if gold_map.get(pair) == rel)
    per_label["micro"] = (float(tp_all), float(len(pred_map)), float(tp_all), float(len(gold_map)))
    return per_label


def relation_prf(
    gold: Iterable[TemporalLink], pred: Iterable[TemporalLink], labels: Sequence[str]
) -> dict[str, PRF]:
    return {label: PRF.from_counts(c) for label, c in relation_counts(gold, pred, labels).items()}


def majority_baseline(gold_labels: Sequence[str]) -> tuple[list[str], float]:
    """Predict the most frequent gold label everywhere; micro F1 is accuracy.

    Frequency ties go to the lexicographically smaller label.
    """
    if not gold_labels:
        return [], 0.0
    counts = Counter(gold_labels)
    best_count = max(counts.values())
    winner = min(label for label, c in counts.items() if c == best_count)
    predictions = [winner] * len(gold_labels)
    correct = sum(1 for g in gold_labels if g == winner)
    return predictions, correct / len(gold_labels)


# ---------------------------------------------------------------- reports

@dataclass(frozen=True)
class EvalReport:
    """Scores plus the counts they were derived from and the invocation echo."""

    task: str
    scores: Mapping[str, Any]
    counts: Mapping[str, Any]
    config: Mapping[str, Any]

    def to_jsonable(self) -> dict[str, Any]:
        def render(value: Any) -> Any:
            if isinstance(value, PRF):
                return value.to_jsonable()
            if isinstance(value, Mapping):
                return {k: render(v) for k, v in value.items()}
            if isinstance(value, tuple):
                return list(value)
            return value

        return {
            "task": self.task,
            "scores": render(dict(self.scores)),
            "counts": render(dict(self.counts)),
            "config": render(dict(self.config)),
        }
