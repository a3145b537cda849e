import random

import pytest
from hypothesis import given, strategies as st

from graph2text.graphs import (
    GraphError,
    LabeledGraph,
    PenmanError,
    canonical_form,
    isomorphic,
    iter_graph_blocks,
    parse_penman,
    parse_penman_blocks,
    parse_triple_set,
    serialize_penman,
    simplify,
    strip_sense,
)

from conftest import random_rooted_graph

COLOMBIA = """\
(c / country
    :mod (o / only)
    :ARG0-of (h / have-03
        :ARG1 (p / policy
            :consist-of (t / target-01
                :ARG1 (a / aircraft
                    :ARG0-of (t2 / traffic-01
                        :ARG1 (d / drug)))))
        :time (c3 / current))
    :domain (c2 / country
        :wiki "Colombia"
        :name (n / name :op1 "Colombia")))
"""


class TestLabeledGraph:
    def test_minimal(self):
        g = LabeledGraph((("b", "boy"),), (), "b")
        assert g.n_nodes == 1
        assert g.label("b") == "boy"

    def test_duplicate_id_rejected(self):
        with pytest.raises(GraphError, match="duplicate node id"):
            LabeledGraph((("a", "x"), ("a", "y")), (), "a")

    def test_unknown_edge_endpoint_rejected(self):
        with pytest.raises(GraphError, match="unknown node"):
            LabeledGraph((("a", "x"),), (("a", ":r", "b"),), "a")

    def test_self_loop_rejected(self):
        with pytest.raises(GraphError, match="self-loop"):
            LabeledGraph((("a", "x"),), (("a", ":r", "a"),), "a")

    def test_unknown_root_rejected(self):
        with pytest.raises(GraphError, match="root"):
            LabeledGraph((("a", "x"),), (), "b")

    def test_empty_rejected(self):
        with pytest.raises(GraphError, match="at least one node"):
            LabeledGraph((), (), "a")


class TestParsePenman:
    def test_single_node(self):
        g = parse_penman("(b / boy)")
        assert g.nodes == (("b", "boy"),)
        assert g.edges == ()
        assert g.root == "b"

    def test_nested_amr_with_wiki(self):
        g = parse_penman(COLOMBIA)
        concept_vars = [nid for nid, _ in g.nodes if not nid.startswith("_c")]
        assert len(concept_vars) == 11
        assert g.label(g.root) == "country"
        constants = [label for nid, label in g.nodes if nid.startswith("_c")]
        assert constants == ["Colombia", "Colombia"]

    def test_reentrancy_two_incoming_edges(self, boy_wants_graph):
        incoming = [(s, l) for s, l, t in boy_wants_graph.edges if t == "b"]
        assert ("w", ":ARG0") in incoming
        assert ("e", ":accompanier") in incoming
        assert len(incoming) == 2
        assert boy_wants_graph.n_nodes == 6

    def test_forward_reference_resolves(self):
        g = parse_penman("(w / want-01 :ARG1 e :ARG0 (e / eat-01))")
        assert ("w", ":ARG1", "e") in g.edges
        assert g.n_nodes == 2

    def test_bare_symbol_becomes_constant(self):
        g = parse_penman("(s / say-01 :polarity -)")
        labels = dict(g.nodes)
        assert "-" in labels.values()

    def test_unbalanced_open_reports_offset(self):
        with pytest.raises(PenmanError, match="unbalanced") as exc:
            parse_penman("(b / boy")
        assert exc.value.offset == len("(b / boy")

    def test_unbalanced_close_reports_offset(self):
        with pytest.raises(PenmanError, match="unbalanced"):
            parse_penman("(b / boy))")

    def test_relation_without_value(self):
        with pytest.raises(PenmanError, match="without a following value") as exc:
            parse_penman("(b / boy :ARG0)")
        assert exc.value.offset == 9

    def test_duplicate_variable(self):
        with pytest.raises(PenmanError, match="duplicate definition"):
            parse_penman("(b / boy :ARG0 (b / bad))")

    def test_quoted_constants_unescaped(self):
        g = parse_penman('(c / city :name "New \\"York\\"")')
        assert 'New "York"' in dict(g.nodes).values()


class TestSimplify:
    def test_sense_suffix_stripped(self):
        g = parse_penman("(w / want-01)")
        assert simplify(g).label("w") == "want"

    def test_plain_label_unchanged(self):
        assert strip_sense("lunch") == "lunch"

    def test_multi_hyphen_label(self):
        assert strip_sense("have-rel-role-91") == "have-rel-role"

    def test_wiki_dropped(self):
        g = simplify(parse_penman(COLOMBIA))
        assert all(label != ":wiki" for _, label, _ in g.edges)
        constants = [label for nid, label in g.nodes if nid.startswith("_c")]
        assert constants == ["Colombia"]  # only the :name op survives

    def test_idempotent(self):
        g = simplify(parse_penman(COLOMBIA))
        assert simplify(g) == g

    @given(st.text(alphabet="abz-0123456789", min_size=1, max_size=12))
    def test_strip_sense_idempotent(self, label):
        assert strip_sense(strip_sense(label)) == strip_sense(label)


class TestSerializeRoundTrip:
    def test_random_graphs_round_trip(self):
        rng = random.Random(7)
        for _ in range(50):
            g = random_rooted_graph(rng, max_nodes=10)
            again = parse_penman(serialize_penman(g))
            assert isomorphic(g, again)

    def test_boy_wants_round_trip(self, boy_wants_graph):
        again = parse_penman(serialize_penman(boy_wants_graph))
        assert isomorphic(boy_wants_graph, again)

    def test_unreachable_node_rejected(self):
        g = LabeledGraph((("a", "x"), ("b", "y")), (("b", ":r", "a"),), "a")
        with pytest.raises(GraphError, match="unreachable"):
            serialize_penman(g)


class TestCanonicalForm:
    def test_id_renaming_is_isomorphic(self):
        g1 = parse_penman("(a / x :r1 (b / y))")
        g2 = parse_penman("(q / x :r1 (p / y))")
        assert canonical_form(g1) == canonical_form(g2)

    def test_label_change_is_not(self):
        g1 = parse_penman("(a / x :r1 (b / y))")
        g2 = parse_penman("(a / x :r1 (b / z))")
        assert canonical_form(g1) != canonical_form(g2)


class TestParseTripleSet:
    def test_single_line(self):
        g = parse_triple_set(["Above_the_Veil | followedBy | Into_the_Battle"])
        assert g.n_nodes == 2
        assert g.edges == (("Above_the_Veil", "followedBy", "Into_the_Battle"),)
        assert g.root == "Above_the_Veil"

    def test_empty_input_rejected(self):
        with pytest.raises(GraphError, match="empty graph"):
            parse_triple_set([])

    def test_star_shape(self):
        g = parse_triple_set(["s | r1 | a", "s | r2 | b", "s | r3 | c"])
        assert g.n_nodes == 4
        assert len(g.edges) == 3
        assert all(s == "s" for s, _, _ in g.edges)

    def test_bad_separator_count(self):
        with pytest.raises(GraphError, match="expected"):
            parse_triple_set(["a | b"])

    def test_empty_field(self):
        with pytest.raises(GraphError, match="empty field"):
            parse_triple_set(["a |  | c"])

    @given(st.integers(min_value=1, max_value=12))
    def test_edge_count_matches_line_count(self, n):
        lines = [f"e{i} | r | e{i + 1}" for i in range(n)]
        assert len(parse_triple_set(lines).edges) == n


class TestBlocks:
    def test_blank_line_separation_and_comments(self):
        text = "# comment\n(a / x)\n\n(b / y)\n"
        graphs = parse_penman_blocks(text)
        assert [g.label(g.root) for g in graphs] == ["x", "y"]

    def test_multiline_block(self):
        blocks = list(iter_graph_blocks("(a / x\n  :r (b / y))\n\n(c / z)"))
        assert len(blocks) == 2
