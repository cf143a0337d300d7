"""lome-kit: a modular multilingual information-extraction pipeline.

Documents flow through pluggable annotators (frame parsing, coreference,
hierarchical entity typing, temporal relations) that communicate via a
canonical JSON document schema.  All model scores come from interchangeable
backends, so every decoder runs and is testable without trained weights.
"""

__version__ = "0.1.0"

from .schema import (  # noqa: F401
    Document,
    EntityCluster,
    FrameInstance,
    Mention,
    Role,
    Sentence,
    Span,
    TemporalLink,
    Token,
    Tokenization,
    TypeAssignment,
    AnnotationMetadata,
    deserialize,
    resolve_span,
    serialize,
    tokenize_whitespace,
    validate_document,
)
