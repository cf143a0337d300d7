"""Incremental, bounded-memory linking of given mentions into entity clusters.

A single left-to-right pass scores each mention against every live cluster
(max pair score over the cluster's retained exemplars) and either attaches
it to the best-scoring cluster or opens a new one.  Live state per cluster
is capped at `exemplar_cap` exemplars (FIFO eviction), so memory stays
constant in document length.  Mention detection is not performed here;
mentions come from the frame parser or from gold annotations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .schema import Document, EntityCluster, Mention
from .scoring import ScorerModel, mention_pair_score


@dataclass(frozen=True)
class CorefConfig:
    exemplar_cap: Optional[int] = 8  # None means unbounded
    attach_threshold: float = 0.0

    def __post_init__(self) -> None:
        if self.exemplar_cap is not None and self.exemplar_cap < 1:
            raise ValueError("exemplar_cap must be >= 1 (or None for unbounded)")


@dataclass(frozen=True)
class ClusterState:
    """Live scoring state of one cluster: capped exemplars plus a size counter."""

    cluster_id: str
    exemplars: tuple[Mention, ...] = ()
    size: int = 0
    peak_exemplars: int = 0


def update_cluster(state: ClusterState, mention: Mention, config: CorefConfig) -> ClusterState:
    """Append the newly attached mention; evict the oldest exemplar past the cap."""
    exemplars = state.exemplars + (mention,)
    if config.exemplar_cap is not None and len(exemplars) > config.exemplar_cap:
        exemplars = exemplars[len(exemplars) - config.exemplar_cap :]
    return ClusterState(
        cluster_id=state.cluster_id,
        exemplars=exemplars,
        size=state.size + 1,
        peak_exemplars=max(state.peak_exemplars, len(exemplars)),
    )


def cluster_mentions_with_states(
    model: ScorerModel,
    doc: Document,
    mentions: Sequence[Mention],
    config: CorefConfig = CorefConfig(),
) -> tuple[list[EntityCluster], list[ClusterState]]:
    """Run the incremental pass; also return final states for instrumentation.

    Ties between clusters go to the earliest-created one; attachment requires
    a score strictly above the threshold.  Mentions must arrive in document
    order; every mention ends up in exactly one cluster.
    """
    states: list[ClusterState] = []
    members: list[list[str]] = []
    for mention in mentions:
        best_index, best_score = None, None
        for index, state in enumerate(states):
            score = mention_pair_score(model, doc, mention, state)
            if best_score is None or score > best_score:
                best_index, best_score = index, score
        if best_index is not None and best_score > config.attach_threshold:
            states[best_index] = update_cluster(states[best_index], mention, config)
            members[best_index].append(mention.id)
        else:
            state = update_cluster(ClusterState(cluster_id=f"c{len(states)}"), mention, config)
            states.append(state)
            members.append([mention.id])
    clusters = [
        EntityCluster(id=state.cluster_id, mention_ids=tuple(ids)) for state, ids in zip(states, members)
    ]
    return clusters, states


def cluster_mentions(
    model: ScorerModel,
    doc: Document,
    mentions: Sequence[Mention],
    config: CorefConfig = CorefConfig(),
) -> list[EntityCluster]:
    clusters, _ = cluster_mentions_with_states(model, doc, mentions, config)
    return clusters
