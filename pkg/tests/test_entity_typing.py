import math
import random

import pytest

from lome_kit.entity_typing import (
    OntologyError,
    TypeOntology,
    borda_level,
    compute_level_scores,
    load_ontology,
    parse_ontology,
    type_entity,
    type_mention,
)
from lome_kit.schema import (
    Document,
    EntityCluster,
    Mention,
    Span,
    canonical_json_bytes,
    resolve_span,
    tokenize_whitespace,
)
from lome_kit.scoring import ScoreTableBuilder, ScorerModel
from oracles import borda_oracle

ONTOLOGY = parse_ontology(
    [
        {"label": "PER", "parent": None},
        {"label": "GPE", "parent": None},
        {"label": "artist", "parent": "PER"},
        {"label": "singer", "parent": "artist"},
    ]
)


class TestLoadOntology:
    def test_small_tree(self, tmp_path):
        path = tmp_path / "onto.json"
        path.write_bytes(
            canonical_json_bytes(
                [
                    {"label": "PER", "parent": None},
                    {"label": "artist", "parent": "PER"},
                    {"label": "singer", "parent": "artist"},
                    {"label": "GPE", "parent": None},
                ]
            )
        )
        onto = load_ontology(path)
        assert len(onto.nodes) == 4
        assert max(n.level for n in onto.nodes.values()) == 3
        assert onto.roots == ("GPE", "PER")
        assert onto.children("PER") == ("artist",)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "onto.json"
        path.write_bytes(b"[]")
        with pytest.raises(OntologyError):
            load_ontology(path)

    def test_self_parent_cycle(self):
        with pytest.raises(OntologyError, match="cycle"):
            parse_ontology([{"label": "A", "parent": "A"}])

    def test_two_node_cycle(self):
        with pytest.raises(OntologyError, match="cycle"):
            parse_ontology([{"label": "A", "parent": "B"}, {"label": "B", "parent": "A"}])

    def test_orphan(self):
        with pytest.raises(OntologyError, match="unknown parent"):
            parse_ontology([{"label": "A", "parent": "missing"}])

    def test_duplicate_label(self):
        with pytest.raises(OntologyError, match="duplicate"):
            parse_ontology([{"label": "A", "parent": None}, {"label": "A", "parent": None}])

    def test_level_gap(self):
        with pytest.raises(OntologyError, match="level gap"):
            parse_ontology([{"label": "A", "parent": None}, {"label": "B", "parent": "A", "level": 3}])

    def test_root_path_check(self):
        assert ONTOLOGY.is_root_path(("PER", "artist", "singer"))
        assert not ONTOLOGY.is_root_path(("artist",))
        assert not ONTOLOGY.is_root_path(())


def one_mention_doc():
    text = "maria sings\n"
    doc = Document(id="d", text=text, tokenizations=(tokenize_whitespace(text),))
    span = Span("whitespace", 0, 1)
    mention = Mention("m0", span, resolve_span(doc, span))
    return doc.replace(mentions=(mention,)), mention


class TestTypeMention:
    def test_depth_one_ontology(self):
        doc, mention = one_mention_doc()
        onto = parse_ontology([{"label": "PER", "parent": None}, {"label": "ORG", "parent": None}])
        b = ScoreTableBuilder().span("d", mention.span, ("ORG", "PER"), [0.5, 0.9], condition="type:")
        out = type_mention(ScorerModel(kind="file", table=b.to_table()), onto, doc, mention)
        assert out.path == ("PER",)
        assert out.per_level_scores == (0.9,)
        assert out.target == "m0"

    def test_max_depth_truncates(self):
        doc, mention = one_mention_doc()
        b = ScoreTableBuilder().one_hot_span("d", mention.span, ONTOLOGY.roots, "PER", condition="type:")
        out = type_mention(ScorerModel(kind="file", table=b.to_table()), ONTOLOGY, doc, mention, max_depth=1)
        assert out.path == ("PER",)

    def test_full_descent(self):
        doc, mention = one_mention_doc()
        b = ScoreTableBuilder()
        b.span("d", mention.span, ONTOLOGY.roots, [0.1, 0.9], condition="type:")  # GPE, PER
        b.span("d", mention.span, ("artist",), [0.8], condition="type:PER")
        b.span("d", mention.span, ("singer",), [0.7], condition="type:PER/artist")
        out = type_mention(ScorerModel(kind="file", table=b.to_table()), ONTOLOGY, doc, mention)
        assert out.path == ("PER", "artist", "singer")
        assert out.per_level_scores == (0.9, 0.8, 0.7)
        assert ONTOLOGY.is_root_path(out.path)

    def test_no_roots(self):
        doc, mention = one_mention_doc()
        with pytest.raises(OntologyError):
            type_mention(ScorerModel(kind="reference"), TypeOntology({}), doc, mention)

    def test_bad_max_depth(self):
        doc, mention = one_mention_doc()
        with pytest.raises(ValueError):
            type_mention(ScorerModel(kind="reference"), ONTOLOGY, doc, mention, max_depth=0)


class TestBordaLevel:
    def test_single_voter_is_argmax(self):
        winner, _ = borda_level(("PER", "ORG", "LOC"), [[0.2, 0.9, 0.1]])
        assert winner == "ORG"

    def test_worked_example(self):
        candidates = ("PER", "ORG", "LOC")
        rows = [[0.9, 0.5, 0.1], [0.6, 0.8, 0.2], [0.7, 0.2, 0.6]]
        winner, total = borda_level(candidates, rows)
        assert winner == "PER"
        assert math.isclose(total, 2.5)
        level = compute_level_scores(candidates, rows)
        assert level.ranks[0] == (1, 2, 3)
        assert level.ranks[1] == (2, 1, 3)
        assert level.ranks[2] == (1, 3, 2)
        totals = [sum(rel[i] for rel in level.relevances) for i in range(3)]
        assert math.isclose(totals[1], 0.5 + 1.0 + 1.0 / 3.0)
        assert math.isclose(totals[2], 1.0 / 3.0 + 1.0 / 3.0 + 0.5)

    def test_unanimous(self):
        winner, _ = borda_level(("a", "b"), [[0.1, 0.8]] * 4)
        assert winner == "b"

    def test_tied_scores_share_min_rank(self):
        level = compute_level_scores(("a", "b", "c"), [[0.5, 0.5, 0.1]])
        assert level.ranks[0] == (1, 1, 3)
        assert all(0.0 < r <= 1.0 for row in level.relevances for r in row)

    def test_matches_oracle_on_random_instances(self):
        rng = random.Random(13)
        for _ in range(300):
            n = rng.randint(1, 8)
            k = rng.randint(1, 6)
            candidates = tuple(f"t{i}" for i in range(k))
            rows = [[rng.choice([0.0, 0.25, 0.5, 0.75, 1.0]) for _ in range(k)] for _ in range(n)]
            assert borda_level(candidates, rows)[0] == borda_oracle(candidates, rows)

    def test_monotone_transform_invariance(self):
        rng = random.Random(17)
        for _ in range(200):
            n = rng.randint(1, 6)
            k = rng.randint(2, 6)
            candidates = tuple(f"t{i}" for i in range(k))
            rows = [[rng.uniform(-1, 1) for _ in range(k)] for _ in range(n)]
            transforms = [lambda x: 3 * x + 1, lambda x: x**3, lambda x: math.atan(x), lambda x: math.exp(x)]
            mapped = [[transforms[i % len(transforms)](x) for x in row] for i, row in enumerate(rows)]
            assert borda_level(candidates, rows)[0] == borda_level(candidates, mapped)[0]

    def test_empty_candidates(self):
        with pytest.raises(ValueError):
            borda_level((), [[1.0]])


def cluster_doc(n_mentions: int):
    text = " ".join(f"w{i}" for i in range(n_mentions)) + "\n"
    doc = Document(id="d", text=text, tokenizations=(tokenize_whitespace(text),))
    mentions = tuple(
        Mention(f"m{i}", Span("whitespace", i, i + 1), resolve_span(doc, Span("whitespace", i, i + 1)))
        for i in range(n_mentions)
    )
    cluster = EntityCluster("c0", tuple(m.id for m in mentions))
    return doc.replace(mentions=mentions, clusters=(cluster,)), mentions, cluster


class TestTypeEntity:
    def test_singleton_reduces_to_mention_typing(self):
        doc, mentions, _ = cluster_doc(1)
        singleton = EntityCluster("c0", ("m0",))
        b = ScoreTableBuilder()
        b.span("d", mentions[0].span, ONTOLOGY.roots, [0.2, 0.9], condition="type:")
        b.span("d", mentions[0].span, ("artist",), [0.8], condition="type:PER")
        b.span("d", mentions[0].span, ("singer",), [-0.5], condition="type:PER/artist")
        model = ScorerModel(kind="file", table=b.to_table())
        entity = type_entity(model, ONTOLOGY, doc, singleton)
        mention = type_mention(model, ONTOLOGY, doc, mentions[0])
        assert entity.path == mention.path
        assert entity.target == "c0"

    def test_level_votes_compose(self):
        doc, mentions, cluster = cluster_doc(3)
        onto = parse_ontology(
            [
                {"label": "PER", "parent": None},
                {"label": "ORG", "parent": None},
                {"label": "LOC", "parent": None},
                {"label": "artist", "parent": "PER"},
                {"label": "teacher", "parent": "PER"},
            ]
        )
        b = ScoreTableBuilder()
        # sorted roots are (LOC, ORG, PER); these votes favour PER overall
        worked = [[0.1, 0.5, 0.9], [0.2, 0.8, 0.6], [0.6, 0.2, 0.7]]
        for mention, row in zip(mentions, worked):
            b.span("d", mention.span, onto.roots, row, condition="type:")
        for mention in mentions:
            b.one_hot_span("d", mention.span, ("artist", "teacher"), "artist", condition="type:PER")
        out = type_entity(ScorerModel(kind="file", table=b.to_table()), onto, doc, cluster)
        assert out.path == ("PER", "artist")

    def test_max_depth_one(self):
        doc, mentions, cluster = cluster_doc(2)
        b = ScoreTableBuilder()
        for mention in mentions:
            b.one_hot_span("d", mention.span, ONTOLOGY.roots, "PER", condition="type:")
        out = type_entity(ScorerModel(kind="file", table=b.to_table()), ONTOLOGY, doc, cluster, max_depth=1)
        assert out.path == ("PER",)

    def test_empty_cluster(self):
        doc, _, _ = cluster_doc(1)
        with pytest.raises(ValueError):
            type_entity(ScorerModel(kind="reference"), ONTOLOGY, doc, EntityCluster("cx", ()))
