"""Shared test helpers: seeded random document generation."""
from __future__ import annotations

import random

from lome_kit.schema import (
    AnnotationMetadata,
    Document,
    EntityCluster,
    FrameInstance,
    Mention,
    Role,
    Span,
    TemporalLink,
    TypeAssignment,
    mention_order_key,
    resolve_span,
    tokenize_whitespace,
    validate_document,
)

WORDS = ["the", "rabbit", "eats", "a", "carrot", "naïve", "мир", "東京", "🐇", "fox", "runs", "happy"]

FRAME_POOL = {
    "Ingestion": ("Ingestibles", "Ingestor"),
    "Motion": ("Goal", "Source", "Theme"),
    "Animals": (),
}

TYPE_PATHS = [
    ("PER",),
    ("PER", "artist"),
    ("PER", "artist", "singer"),
    ("ORG",),
    ("GPE",),
    ("activity",),
    ("living_thing",),
    ("living_thing", "animal"),
    ("living_thing", "plant"),
    ("object", "food"),
]

TBD5_LABELS = ("before", "after", "includes", "is_included", "vague")


def random_document(rng: random.Random, doc_id: str = "doc", dense: bool = True) -> Document:
    """A structurally valid document with every annotation layer populated.

    With `dense=True` the document is guaranteed to carry at least one
    multi-mention cluster, one frame with a role, one type assignment, and
    one temporal link, so identity-metric checks are never degenerate.
    """
    lines = [
        " ".join(rng.choice(WORDS) for _ in range(rng.randint(2, 6)))
        for _ in range(rng.randint(2 if dense else 1, 4))
    ]
    text = "\n".join(lines)
    tokenization = tokenize_whitespace(text)
    doc = Document(id=doc_id, text=text, language=rng.choice([None, "en", "ru"]), tokenizations=(tokenization,))

    spans: set[tuple[int, int]] = set()
    want = rng.randint(4 if dense else 0, 8)
    for _ in range(40):
        if len(spans) >= want:
            break
        sent_start, sent_end = rng.choice(tokenization.sentences)
        start = rng.randrange(sent_start, sent_end)
        end = rng.randint(start + 1, sent_end)
        spans.add((start, end))
    mentions = tuple(
        Mention(
            id=f"m{i}",
            span=Span(tokenization.id, start, end),
            surface=resolve_span(doc, Span(tokenization.id, start, end)),
        )
        for i, (start, end) in enumerate(sorted(spans))
    )
    doc = doc.replace(mentions=mentions)

    frames = []
    n_frames = rng.randint(2 if dense else 0, 4) if mentions else 0
    for i in range(n_frames):
        label = rng.choice(sorted(FRAME_POOL))
        if dense and i == 0:
            label = "Ingestion"  # guarantees at least one role below
        role_pool = FRAME_POOL[label]
        roles = []
        for role_label in role_pool:
            if (dense and i == 0 and not roles) or rng.random() < 0.6:
                roles.append(Role(role_label, rng.choice(mentions).id))
        frames.append(FrameInstance(id=f"f{i}", frame_label=label, trigger=rng.choice(mentions).id, roles=tuple(roles)))
    doc = doc.replace(frames=tuple(frames))

    order = mention_order_key(doc)
    clusters = []
    if mentions:
        shuffled = list(mentions)
        rng.shuffle(shuffled)
        i = 0
        while shuffled:
            size = rng.randint(1, min(3, len(shuffled)))
            if dense and i == 0 and len(shuffled) >= 2:
                size = max(2, size)
            members = sorted(shuffled[:size], key=order)
            del shuffled[:size]
            clusters.append(EntityCluster(id=f"c{i}", mention_ids=tuple(m.id for m in members)))
            i += 1
    doc = doc.replace(clusters=tuple(clusters))

    targets = [m.id for m in mentions] + [c.id for c in clusters]
    rng.shuffle(targets)
    n_assign = rng.randint(1 if dense else 0, min(4, len(targets))) if targets else 0
    assignments = []
    for target in targets[:n_assign]:
        path = rng.choice(TYPE_PATHS)
        scores = tuple(round(rng.uniform(-2, 2), 6) for _ in path) if rng.random() < 0.7 else None
        assignments.append(TypeAssignment(target=target, path=path, per_level_scores=scores))
    doc = doc.replace(type_assignments=tuple(assignments))

    links = []
    if len(frames) >= 2:
        pairs = [(a.id, b.id) for i, a in enumerate(frames) for b in frames[i + 1 :]]
        rng.shuffle(pairs)
        n_links = rng.randint(1 if dense else 0, len(pairs))
        for source, target in pairs[:n_links]:
            links.append(TemporalLink(source=source, target=target, relation=rng.choice(TBD5_LABELS), label_set="TBD5"))
    doc = doc.replace(temporal_links=tuple(links))

    metadata = tuple(
        AnnotationMetadata(f"annotator{i}", "1.0", f"2026-01-0{i + 1}T00:00:00Z", f"digest{i}")
        for i in range(rng.randint(0, 2))
    )
    doc = doc.replace(metadata=metadata)

    problems = validate_document(doc)
    assert problems == [], problems
    return doc
