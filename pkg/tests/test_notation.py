import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiograph.graphs import ConceptNode, ConceptualGraph, Referent, RelationEdge
from semiograph.notation import ParseError, canonical_form, parse_graph, serialize_graph

from oracles import exact_isomorphic
from strategies import random_graph, random_ontology


class TestParse:
    def test_simple_edge(self):
        g = parse_graph("[Langue: guarani] -(partie_de)-> [Famille_de_langues: *]")
        assert len(g.nodes) == 2
        assert len(g.edges) == 1
        assert g.edges[0].rel_id == "partie_de"

    def test_variable_merges(self):
        g = parse_graph("[Mine_lieu: *m]; [Mine_lieu: *m] -(preciser_gisement)-> [Gisement: charbon]")
        assert len(g.nodes) == 2
        assert len(g.edges) == 1

    def test_missing_colon_position(self):
        with pytest.raises(ParseError) as err:
            parse_graph("[Langue guarani]")
        assert err.value.span.line == 1
        assert err.value.span.column == 9

    def test_marker_coreference(self):
        g = parse_graph("[Langue: guarani] -(partie_de)-> [Famille_de_langues: tupi_guarani]\n[Langue: guarani] -(loc_tmp)-> [Epoque: epoque_precolombienne]")
        langue_nodes = [n for n in g.nodes if n.type_id == "Langue"]
        assert len(langue_nodes) == 1
        assert len(g.edges) == 2

    def test_same_marker_different_types_stay_apart(self):
        g = parse_graph("[Mine_lieu: fosse_1] -(identifier_nom)-> [Nom_site: fosse_1]")
        assert len(g.nodes) == 2

    def test_generic_terms_never_merge(self):
        g = parse_graph("[Langue: *]; [Langue: *]")
        assert len(g.nodes) == 2

    def test_variable_type_conflict(self):
        with pytest.raises(ParseError) as err:
            parse_graph("[Langue: *x]; [Lieu: *x]")
        assert "redeclared" in err.value.message

    def test_comments_and_blank_lines(self):
        g = parse_graph("# en-tête\n\n[Langue: *]  # une langue\n")
        assert len(g.nodes) == 1

    def test_quoted_names(self):
        g = parse_graph('["Objet « Mine »": "fosse n°1"] -("partie de")-> [Objet: *]')
        assert g.nodes[0].type_id in ("Objet « Mine »", "Objet")
        marker = [n for n in g.nodes if n.referent.is_marker][0]
        assert marker.referent.value == "fosse n°1"

    def test_escapes_in_strings(self):
        g = parse_graph('[T: "avec \\"guillemets\\" et \\\\"]')
        assert g.nodes[0].referent.value == 'avec "guillemets" et \\'

    def test_diacritics_are_ident_chars(self):
        g = parse_graph("[Époque: année_1906]")
        assert g.nodes[0].type_id == "Époque"

    def test_unterminated_string(self):
        with pytest.raises(ParseError):
            parse_graph('[T: "ouvert]')

    def test_statement_must_end_at_separator(self):
        with pytest.raises(ParseError) as err:
            parse_graph("[A: *] [B: *]")
        assert err.value.span.column == 8

    def test_error_for_each_deleted_token(self):
        good = "[Langue: *l] -(partie_de)-> [Famille_de_langues: *]"
        for token in ("[", "]", ":", "-(", ")->"):
            mutated = good.replace(token, " ", 1)
            with pytest.raises(ParseError) as err:
                parse_graph(mutated)
            assert err.value.span.line == 1
            assert 1 <= err.value.span.column <= len(mutated) + 1


class TestSerialize:
    def test_empty_graph(self):
        assert serialize_graph(ConceptualGraph.empty()) == ""

    def test_single_generic_node(self):
        assert serialize_graph(parse_graph("[Langue: *]")) == "[Langue: *]\n"

    def test_round_trip_samples(self, memomines_ws, language_ws):
        for ws in (memomines_ws, language_ws):
            for seg in ws.corpus.segments.values():
                g = seg.annotation
                assert exact_isomorphic(parse_graph(serialize_graph(g)), g)
            for model in ws.corpus.model_library.values():
                g = model.graph
                assert exact_isomorphic(parse_graph(serialize_graph(g)), g)

    def test_multi_referenced_generic_gets_variable(self):
        g = ConceptualGraph.of(
            [ConceptNode("hub", "T"), ConceptNode("a", "U"), ConceptNode("b", "U")],
            [RelationEdge("e1", "r", "hub", "a"), RelationEdge("e2", "r", "hub", "b")],
        )
        text = serialize_graph(g)
        assert "*v1" in text
        assert exact_isomorphic(parse_graph(text), g)

    def test_self_loop_on_generic_node(self):
        g = ConceptualGraph.of([ConceptNode("a", "T")], [RelationEdge("e", "r", "a", "a")])
        again = parse_graph(serialize_graph(g))
        assert len(again.nodes) == 1
        assert again.edges[0].source == again.edges[0].target

    def test_duplicate_edges_preserved(self):
        g = ConceptualGraph.of(
            [ConceptNode("a", "T", Referent.marker("m")), ConceptNode("b", "U", Referent.marker("k"))],
            [RelationEdge("e1", "r", "a", "b"), RelationEdge("e2", "r", "a", "b")],
        )
        again = parse_graph(serialize_graph(g))
        assert len(again.edges) == 2

    def test_quoting_round_trip(self):
        g = ConceptualGraph.of(
            [ConceptNode("a", 'Objet "Mine (lieu)"', Referent.marker("fosse n°1 (Courrières)"))],
            [],
        )
        assert exact_isomorphic(parse_graph(serialize_graph(g)), g)

    def test_round_trip_random(self, language_ws):
        rng = random.Random(31)
        ont = language_ws.ontology
        for _ in range(100):
            g = random_graph(rng, ont, max_nodes=12, max_edges=14, min_nodes=0)
            assert exact_isomorphic(parse_graph(serialize_graph(g)), g)


class TestCanonicalForm:
    def test_invariant_under_id_shuffle(self, language_ws):
        rng = random.Random(5)
        ont = language_ws.ontology
        for _ in range(40):
            g = random_graph(rng, ont, max_nodes=7, max_edges=8)
            shuffled_nodes = {n.node_id: f"z{rng.randrange(10**6)}_{i}" for i, n in enumerate(g.nodes)}
            relabeled = ConceptualGraph.of(
                [ConceptNode(shuffled_nodes[n.node_id], n.type_id, n.referent) for n in g.nodes],
                [
                    RelationEdge(f"w{rng.randrange(10**6)}_{i}", e.rel_id,
                                 shuffled_nodes[e.source], shuffled_nodes[e.target])
                    for i, e in enumerate(g.edges)
                ],
            )
            assert canonical_form(g) == canonical_form(relabeled)

    def test_different_markers_differ(self):
        assert canonical_form(parse_graph("[Langue: guarani]")) != canonical_form(
            parse_graph("[Langue: basque]")
        )

    def test_agreement_with_isomorphism_oracle(self):
        # equal canonical forms must coincide with brute-force isomorphism,
        # on all pairs drawn from batches of random graphs up to 8 nodes
        rng = random.Random(77)
        for round_ in range(25):
            ont = random_ontology(rng, n_concepts=6, n_relations=3)
            graphs = [random_graph(rng, ont, max_nodes=8, max_edges=8) for _ in range(6)]
            for i, g1 in enumerate(graphs):
                for g2 in graphs[i:]:
                    same_canon = canonical_form(g1) == canonical_form(g2)
                    assert same_canon == exact_isomorphic(g1, g2)

    def test_agreement_on_relabeled_pairs(self):
        # relabeled copies must always land on the same canonical string
        rng = random.Random(78)
        for _ in range(40):
            ont = random_ontology(rng, n_concepts=5, n_relations=3)
            g = random_graph(rng, ont, max_nodes=8, max_edges=8)
            order = [n.node_id for n in g.nodes]
            rng.shuffle(order)
            rename = {nid: f"r{i}" for i, nid in enumerate(order)}
            twin = ConceptualGraph.of(
                [ConceptNode(rename[n.node_id], n.type_id, n.referent) for n in g.nodes],
                [
                    RelationEdge(f"re{i}", e.rel_id, rename[e.source], rename[e.target])
                    for i, e in enumerate(reversed(g.edges))
                ],
            )
            assert canonical_form(g) == canonical_form(twin)
            assert exact_isomorphic(g, twin)

    def test_canonical_output_reparses_and_is_stable(self, memomines_ws):
        for seg in memomines_ws.corpus.segments.values():
            text = canonical_form(seg.annotation)
            again = parse_graph(text)
            assert canonical_form(again) == text  # fmt is byte-stable

    def test_symmetric_star_terminates(self):
        # many interchangeable leaves: the search must collapse, not branch
        nodes = [ConceptNode("hub", "T")] + [ConceptNode(f"leaf{i}", "U") for i in range(12)]
        edges = [RelationEdge(f"e{i}", "r", "hub", f"leaf{i}") for i in range(12)]
        g = ConceptualGraph.of(nodes, edges)
        text = canonical_form(g)
        assert text.count("\n") == 12

    def test_isolated_identical_nodes_terminate(self):
        g = ConceptualGraph.of([ConceptNode(f"a{i}", "T") for i in range(20)], [])
        assert canonical_form(g) == "[T: *]\n" * 20


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_round_trip_property(seed):
    rng = random.Random(seed)
    ont = random_ontology(rng)
    g = random_graph(rng, ont, max_nodes=10, max_edges=12)
    assert exact_isomorphic(parse_graph(serialize_graph(g)), g)
