"""Full frame-semantic parsing: trigger finding, frame labeling, role labeling.

The parser runs three passes per sentence: an untyped B/I/O tagging pass
finds trigger spans, a typing pass labels each trigger with a frame, and a
per-frame conditioned B/I/O + typing pass finds and labels that frame's
role spans.  Every trigger and argument span is registered as a Mention so
downstream modules (coreference, typing, temporal) see exactly these
candidate spans.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .schema import (
    Document,
    FrameInstance,
    Mention,
    Role,
    Sentence,
    Span,
    parse_canonical_json,
    resolve_span,
)
from .scoring import ScorerModel, span_label_scores, token_tag_scores

BIO_TAGS = ("O", "B", "I")


class LexiconError(ValueError):
    """Raised for ill-formed lexicon files or unknown frames."""


@dataclass(frozen=True)
class FrameLexicon:
    """Frame labels and, per frame, its set of legal role labels."""

    frames: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", {k: tuple(v) for k, v in dict(self.frames).items()})

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(sorted(self.frames))

    def roles(self, frame_label: str) -> tuple[str, ...]:
        try:
            return self.frames[frame_label]
        except KeyError:
            raise LexiconError(f"frame {frame_label!r} not in lexicon") from None


def load_lexicon(path: str | Path) -> FrameLexicon:
    """Read a lexicon from canonical JSON: {"Frame": ["Role", ...], ...}."""
    obj = parse_canonical_json(Path(path).read_bytes())
    if not isinstance(obj, dict):
        raise LexiconError(f"lexicon file {path}: expected a JSON object")
    frames: dict[str, tuple[str, ...]] = {}
    for frame, roles in obj.items():
        if not (isinstance(roles, list) and all(isinstance(r, str) for r in roles)):
            raise LexiconError(f"lexicon file {path}: roles of {frame!r} must be a string list")
        if len(set(roles)) != len(roles):
            raise LexiconError(f"lexicon file {path}: duplicate role for frame {frame!r}")
        frames[frame] = tuple(roles)
    return FrameLexicon(frames)


def repair_bio(tags: Sequence[str]) -> list[str]:
    """Turn stray I tags (leading, or following O) into B; idempotent."""
    out: list[str] = []
    for i, tag in enumerate(tags):
        if tag not in BIO_TAGS:
            raise ValueError(f"tag {tag!r} at position {i} is not one of {BIO_TAGS}")
        if tag == "I" and (i == 0 or out[i - 1] == "O"):
            tag = "B"
        out.append(tag)
    return out


def decode_bio(tags: Sequence[str]) -> list[tuple[int, int]]:
    """Maximal B I* runs after repair, as half-open token ranges in order."""
    repaired = repair_bio(tags)
    spans: list[tuple[int, int]] = []
    start = None
    for i, tag in enumerate(repaired):
        if tag == "B":
            if start is not None:
                spans.append((start, i))
            start = i
        elif tag == "O":
            if start is not None:
                spans.append((start, i))
                start = None
    if start is not None:
        spans.append((start, len(repaired)))
    return spans


def _argmax_label(labels: Sequence[str], scores: Sequence[float]) -> str:
    best_label, best_score = None, None
    for label, score in zip(labels, scores):
        if best_score is None or score > best_score or (score == best_score and label < best_label):
            best_label, best_score = label, score
    assert best_label is not None
    return best_label


def _argmax_rows(rows: Sequence[Sequence[float]], tagset: Sequence[str]) -> list[str]:
    # Row ties resolve to the earliest tag in tagset order.
    out = []
    for row in rows:
        best = 0
        for i in range(1, len(row)):
            if row[i] > row[best]:
                best = i
        out.append(tagset[best])
    return out


def _role_condition(frame_label: str, trigger: Span) -> str:
    return f"roles:{frame_label}@{trigger.start_token}-{trigger.end_token}"


def _role_type_condition(frame_label: str, trigger: Span) -> str:
    return f"roletype:{frame_label}@{trigger.start_token}-{trigger.end_token}"


def classify_frame(
    model: ScorerModel,
    lexicon: FrameLexicon,
    doc: Document,
    sentence: Sentence,
    trigger: Span,
) -> str:
    """Argmax frame label for a trigger span; ties go to the smaller label."""
    labels = lexicon.labels
    if not labels:
        raise LexiconError("cannot classify a frame with an empty lexicon")
    if not (sentence.start_token <= trigger.start_token and trigger.end_token <= sentence.end_token):
        raise ValueError(f"trigger {trigger} outside sentence {sentence}")
    scores = span_label_scores(model, doc, trigger, labels, condition="frame")
    return _argmax_label(labels, scores)


def label_roles(
    model: ScorerModel,
    lexicon: FrameLexicon,
    doc: Document,
    sentence: Sentence,
    frame_label: str,
    trigger: Span,
) -> list[tuple[str, Span]]:
    """Find and label role spans for one frame instance, within its sentence.

    One B/I/O pass conditioned on the frame finds argument spans; each span
    is labeled by argmax over this frame's role inventory only.  Frames with
    no roles yield no work and an empty list.
    """
    roles = tuple(sorted(lexicon.roles(frame_label)))
    if not roles:
        return []
    rows = token_tag_scores(model, doc, sentence, BIO_TAGS, condition=_role_condition(frame_label, trigger))
    tags = _argmax_rows(rows, BIO_TAGS)
    out: list[tuple[str, Span]] = []
    for rel_start, rel_end in decode_bio(tags):
        span = Span(sentence.tokenization_id, sentence.start_token + rel_start, sentence.start_token + rel_end)
        scores = span_label_scores(model, doc, span, roles, condition=_role_type_condition(frame_label, trigger))
        out.append((_argmax_label(roles, scores), span))
    return out


class _MentionRegistry:
    """Span-keyed mention pool: reuses existing mentions, mints stable ids."""

    def __init__(self, doc: Document) -> None:
        self._doc = doc
        self._by_span: dict[tuple[str, int, int], Mention] = {
            (m.span.tokenization_id, m.span.start_token, m.span.end_token): m for m in doc.mentions
        }
        self.created: list[Mention] = []

    def get_or_create(self, span: Span) -> Mention:
        key = (span.tokenization_id, span.start_token, span.end_token)
        mention = self._by_span.get(key)
        if mention is None:
            mention = Mention(
                id=f"m-{span.tokenization_id}-{span.start_token}-{span.end_token}",
                span=span,
                surface=resolve_span(self._doc, span),
            )
            self._by_span[key] = mention
            self.created.append(mention)
        return mention


def parse_sentence(
    model: ScorerModel,
    lexicon: FrameLexicon,
    doc: Document,
    sentence: Sentence,
    registry: _MentionRegistry | None = None,
) -> tuple[list[FrameInstance], list[Mention]]:
    """Parse one sentence: triggers -> frames -> roles.

    Returns the frame instances in trigger order plus the mentions newly
    registered for their trigger and argument spans.
    """
    if registry is None:
        registry = _MentionRegistry(doc)
    first_new = len(registry.created)
    rows = token_tag_scores(model, doc, sentence, BIO_TAGS, condition="trigger")
    frames: list[FrameInstance] = []
    for rel_start, rel_end in decode_bio(_argmax_rows(rows, BIO_TAGS)):
        trigger = Span(sentence.tokenization_id, sentence.start_token + rel_start, sentence.start_token + rel_end)
        frame_label = classify_frame(model, lexicon, doc, sentence, trigger)
        trigger_mention = registry.get_or_create(trigger)
        role_entries = []
        for role_label, span in label_roles(model, lexicon, doc, sentence, frame_label, trigger):
            role_entries.append(Role(role_label, registry.get_or_create(span).id))
        frames.append(
            FrameInstance(
                id=f"f-{trigger.tokenization_id}-{trigger.start_token}-{trigger.end_token}",
                frame_label=frame_label,
                trigger=trigger_mention.id,
                roles=tuple(role_entries),
            )
        )
    return frames, registry.created[first_new:]


def parse_document(
    model: ScorerModel,
    lexicon: FrameLexicon,
    doc: Document,
    tokenization_id: str | None = None,
) -> Document:
    """Parse every sentence of one tokenization; append mentions and frames."""
    if tokenization_id is None:
        if not doc.tokenizations:
            raise ValueError(f"document {doc.id!r} has no tokenization to parse")
        tokenization_id = doc.tokenizations[0].id
    registry = _MentionRegistry(doc)
    frames: list[FrameInstance] = []
    for sentence in doc.sentences(tokenization_id):
        sentence_frames, _ = parse_sentence(model, lexicon, doc, sentence, registry)
        frames.extend(sentence_frames)
    return doc.replace(
        mentions=doc.mentions + tuple(registry.created),
        frames=doc.frames + tuple(frames),
    )
