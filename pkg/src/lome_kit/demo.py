"""Bundled demonstration document with oracle scores for the web demo.

The demo service ships with a small document whose full analysis is known:
one ingestion event with its eater and food, an entity frame for the second
rabbit mention, a two-mention rabbit cluster, hierarchical types, and one
temporal link.  `demo_score_table` encodes exactly that analysis as a file
backend, so the served pipeline reproduces it deterministically.
"""
from __future__ import annotations

import shutil
from pathlib import Path

from .entity_typing import TypeOntology, load_ontology
from .frames import FrameLexicon, load_lexicon
from .pipeline import packaged_data_path
from .schema import (
    Document,
    EntityCluster,
    FrameInstance,
    Mention,
    Role,
    Sentence,
    Span,
    TemporalLink,
    TypeAssignment,
    canonical_json_bytes,
    tokenize_whitespace,
)
from .scoring import ScoreTable, ScoreTableBuilder
from .temporal import TBD5

DEMO_DOC_ID = "demo"
DEMO_TEXT = "The little rabbit eats a carrot\nThe rabbit is happy"
_TOK = "whitespace"

_RABBIT_1 = Span(_TOK, 0, 3)  # "The little rabbit"
_EATS = Span(_TOK, 3, 4)
_CARROT = Span(_TOK, 4, 6)  # "a carrot"
_RABBIT_2 = Span(_TOK, 6, 8)  # "The rabbit"

_M_RABBIT_1 = f"m-{_TOK}-0-3"
_M_EATS = f"m-{_TOK}-3-4"
_M_CARROT = f"m-{_TOK}-4-6"
_M_RABBIT_2 = f"m-{_TOK}-6-8"
_F_EATS = f"f-{_TOK}-3-4"
_F_RABBIT = f"f-{_TOK}-6-8"


def demo_lexicon_path() -> Path:
    return packaged_data_path("mini_lexicon.json")


def demo_ontology_path() -> Path:
    return packaged_data_path("mini_ontology.json")


def demo_lexicon() -> FrameLexicon:
    return load_lexicon(demo_lexicon_path())


def demo_ontology() -> TypeOntology:
    return load_ontology(demo_ontology_path())


def demo_document() -> Document:
    """The unannotated input: raw text only."""
    return Document(id=DEMO_DOC_ID, text=DEMO_TEXT, language="en")


def demo_gold_document() -> Document:
    """The known full analysis the oracle scores encode."""
    doc = demo_document()
    tokenization = tokenize_whitespace(doc.text)
    return doc.replace(
        tokenizations=(tokenization,),
        mentions=(
            Mention(_M_EATS, _EATS, "eats"),
            Mention(_M_RABBIT_1, _RABBIT_1, "The little rabbit"),
            Mention(_M_CARROT, _CARROT, "a carrot"),
            Mention(_M_RABBIT_2, _RABBIT_2, "The rabbit"),
        ),
        frames=(
            FrameInstance(
                _F_EATS,
                "Ingestion",
                _M_EATS,
                roles=(Role("Ingestor", _M_RABBIT_1), Role("Ingestibles", _M_CARROT)),
            ),
            FrameInstance(_F_RABBIT, "Animals", _M_RABBIT_2, roles=()),
        ),
        clusters=(
            EntityCluster("c0", (_M_RABBIT_1, _M_RABBIT_2)),
            EntityCluster("c1", (_M_EATS,)),
            EntityCluster("c2", (_M_CARROT,)),
        ),
        type_assignments=(
            TypeAssignment(_M_RABBIT_1, ("living_thing", "animal"), (1.0, 1.0)),
            TypeAssignment(_M_EATS, ("activity",), (1.0,)),
            TypeAssignment(_M_CARROT, ("living_thing", "plant"), (1.0, 1.0)),
            TypeAssignment(_M_RABBIT_2, ("living_thing", "animal"), (1.0, 1.0)),
        ),
        temporal_links=(TemporalLink(_F_EATS, _F_RABBIT, "before", "TBD5"),),
    )


def demo_score_table() -> ScoreTable:
    """Oracle scores driving every stage to the gold analysis."""
    lexicon = demo_lexicon()
    ontology = demo_ontology()
    doc_id = DEMO_DOC_ID
    s1 = Sentence(_TOK, 0, 6)
    s2 = Sentence(_TOK, 6, 10)
    roots = ontology.roots
    living = ontology.children("living_thing")
    ingestion_roles = tuple(sorted(lexicon.roles("Ingestion")))

    b = ScoreTableBuilder()
    # Trigger pass, then frame labels for each trigger.
    b.gold_bio(doc_id, s1, [(3, 4)], condition="trigger")
    b.gold_bio(doc_id, s2, [(6, 8)], condition="trigger")
    b.one_hot_span(doc_id, _EATS, lexicon.labels, "Ingestion", condition="frame")
    b.one_hot_span(doc_id, _RABBIT_2, lexicon.labels, "Animals", condition="frame")
    # Role pass conditioned on the ingestion frame (the entity frame has no roles).
    b.gold_bio(doc_id, s1, [(0, 3), (4, 6)], condition="roles:Ingestion@3-4")
    b.one_hot_span(doc_id, _RABBIT_1, ingestion_roles, "Ingestor", condition="roletype:Ingestion@3-4")
    b.one_hot_span(doc_id, _CARROT, ingestion_roles, "Ingestibles", condition="roletype:Ingestion@3-4")
    # Pair scores for the left-to-right linking pass: only the two rabbit
    # mentions attract each other.
    b.pair(doc_id, _M_EATS, _M_RABBIT_1, -1.0)
    b.pair(doc_id, _M_CARROT, _M_RABBIT_1, -1.0)
    b.pair(doc_id, _M_CARROT, _M_EATS, -1.0)
    b.pair(doc_id, _M_RABBIT_2, _M_RABBIT_1, 2.0)
    b.pair(doc_id, _M_RABBIT_2, _M_EATS, -1.0)
    b.pair(doc_id, _M_RABBIT_2, _M_CARROT, -1.0)
    # Coarse-to-fine typing descent per mention.
    b.one_hot_span(doc_id, _RABBIT_1, roots, "living_thing", condition="type:")
    b.one_hot_span(doc_id, _RABBIT_1, living, "animal", condition="type:living_thing")
    b.one_hot_span(doc_id, _EATS, roots, "activity", condition="type:")
    b.one_hot_span(doc_id, _CARROT, roots, "living_thing", condition="type:")
    b.one_hot_span(doc_id, _CARROT, living, "plant", condition="type:living_thing")
    b.one_hot_span(doc_id, _RABBIT_2, roots, "living_thing", condition="type:")
    b.one_hot_span(doc_id, _RABBIT_2, living, "animal", condition="type:living_thing")
    # One event pair within the sentence window.
    b.one_hot_events(doc_id, _F_EATS, _F_RABBIT, TBD5.labels, "before")
    return b.to_table()


def demo_pipeline_config(score_path: str, lexicon_path: str, ontology_path: str) -> dict:
    backend = {"kind": "file", "path": score_path}
    return {
        "stages": [
            {"module": "frames", "backend": backend, "settings": {"lexicon_path": lexicon_path}},
            {"module": "coref", "backend": backend, "settings": {"K": 8, "theta": 0.0}},
            {"module": "typing", "backend": backend, "settings": {"ontology_path": ontology_path}},
            {"module": "temporal", "backend": backend, "settings": {"label_set": "TBD5", "window": 1}},
        ],
        "workers": 1,
    }


def write_demo_fixtures(directory: str | Path) -> Path:
    """Materialize a self-contained fixture directory for `serve --config`.

    Writes the oracle score table, copies the packaged lexicon and ontology,
    and emits demo.config.json referencing them by relative path.  Returns
    the config path.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    directory.joinpath("demo.scores.json").write_bytes(demo_score_table().to_bytes())
    shutil.copyfile(demo_lexicon_path(), directory / "mini_lexicon.json")
    shutil.copyfile(demo_ontology_path(), directory / "mini_ontology.json")
    config = demo_pipeline_config("demo.scores.json", "mini_lexicon.json", "mini_ontology.json")
    config_path = directory / "demo.config.json"
    config_path.write_bytes(canonical_json_bytes(config))
    return config_path
