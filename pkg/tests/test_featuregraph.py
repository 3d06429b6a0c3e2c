"""Feature-graph edges checked against hand-traced examples and a path oracle.

The dataflow assertions below were worked out by hand from the flow fixture
before anything ran: each terminal is pinned down by its occurrence rank, so
a test failure names the exact edge that moved. The oracle agreement test
recomputes LastRead/LastWrite by brute-force path enumeration (loops unrolled
until the edge sets saturate) and must match the fixpoint builder exactly.
"""

import pytest

from conftest import method_named, nth_terminal

from codecorpus.errors import InvalidArgumentError
from codecorpus.featuregraph import (
    EDGE_TYPES, ast_graph, build_feature_graph, filter_edges, graph_payload,
    parse_graph_payload,
)
from codecorpus.parser import file_view

from oracles import flow_edges_saturated


@pytest.fixture(scope="module")
def flow(views):
    return views["flowlab/flow/Flow.java"]


def _graph(flow_view, name):
    m = method_named(flow_view, name)
    return m, build_feature_graph(m, flow_view.classes[0].fields)


# ---------------------------------------------------------------------------
# Hand-traced dataflow edges
# ---------------------------------------------------------------------------

def test_straight_line_defs_and_uses(flow):
    # int x = 1; int y = x; return y;
    m, g = _graph(flow, "straight")
    x0, x1 = (nth_terminal(m.ast, "x", k) for k in (0, 1))
    y0, y1 = (nth_terminal(m.ast, "y", k) for k in (0, 1))
    assert g.edge_set("LastWrite") == {(x1, x0), (y1, y0)}
    assert g.edge_set("LastRead") == set()          # nothing is read twice
    assert g.edge_set("ComputedFrom") == {(y0, x1)}
    assert g.edge_set("LastLexicalUse") == {(x1, x0), (y1, y0)}


def test_branch_join_unions_writes_and_kills_the_declaration(flow):
    # int b = 0; if (a > 0) { b = a; } else { b = 0; } int c = b; ...
    m, g = _graph(flow, "joinuse")
    b0, b1, b2, b3 = (nth_terminal(m.ast, "b", k) for k in range(4))
    a0, a1, a2 = (nth_terminal(m.ast, "a", k) for k in range(3))
    c0, c1 = (nth_terminal(m.ast, "c", k) for k in (0, 1))
    cond = m.ast.find("Binary")[0]

    # the use after the join may see either branch's write, never the decl
    assert g.edge_set("LastWrite") == {
        (a1, a0), (a2, a0), (b3, b1), (b3, b2), (c1, c0)}
    assert (b3, b0) not in g.edge_set("LastWrite")
    assert g.edge_set("LastRead") == {(a2, a1)}
    assert g.edge_set("GuardedBy") == {(a2, cond)}
    assert g.edge_set("GuardedByNegation") == set()
    assert g.edge_set("ComputedFrom") == {(b1, a2), (c0, b3)}


def test_loop_fixpoint_reaches_back_edge_writes(flow):
    # int i = 0; while (i < n) { i = i + 1; } return i;
    m, g = _graph(flow, "looped")
    i0, i1, i2, i3, i4 = (nth_terminal(m.ast, "i", k) for k in range(5))
    n0, n1 = (nth_terminal(m.ast, "n", k) for k in (0, 1))

    # every i use may see the initializer or the loop-body write
    assert g.edge_set("LastWrite") == {
        (i1, i0), (i1, i2), (i3, i0), (i3, i2), (i4, i0), (i4, i2), (n1, n0)}
    # the condition rereads n each iteration: a self loop after saturation
    assert g.edge_set("LastRead") == {(i1, i3), (i3, i1), (i4, i1), (n1, n1)}
    assert g.edge_set("ComputedFrom") == {(i2, i3)}
    assert g.edge_set("LastLexicalUse") == {
        (i1, i0), (i2, i1), (i3, i2), (i4, i3), (n1, n0)}


def test_assignment_replaces_the_write_set(flow):
    # int x = a + 1; int y = x * 2; x = y - a; return x;
    m, g = _graph(flow, "chain")
    x0, x1, x2, x3 = (nth_terminal(m.ast, "x", k) for k in range(4))
    y0, y1 = (nth_terminal(m.ast, "y", k) for k in (0, 1))
    a0, a1, a2 = (nth_terminal(m.ast, "a", k) for k in range(3))

    assert g.edge_set("LastWrite") == {
        (a1, a0), (x1, x0), (y1, y0), (a2, a0), (x3, x2)}
    assert (x3, x0) not in g.edge_set("LastWrite")  # reassignment wins
    assert g.edge_set("LastRead") == {(a2, a1), (x3, x1)}
    assert g.edge_set("ComputedFrom") == {
        (x0, a1), (y0, x1), (x2, y1), (x2, a2)}


def test_increment_reads_then_writes(flow):
    # a++; return a;
    m, g = _graph(flow, "bump")
    a0, a1, a2 = (nth_terminal(m.ast, "a", k) for k in range(3))
    assert g.edge_set("LastWrite") == {(a1, a0), (a2, a1)}
    assert g.edge_set("LastRead") == {(a2, a1)}


def test_guard_edges_point_at_the_condition(flow):
    m, g = _graph(flow, "guard")
    a2 = nth_terminal(m.ast, "a", 2)                # the a inside the branch
    cond = m.ast.find("Binary")[0]
    assert g.edge_set("GuardedBy") == {(a2, cond)}
    # b appears only in the else branch and not in the condition: no edge
    assert g.edge_set("GuardedByNegation") == set()


def test_negated_guard_for_condition_variable_in_else_branch():
    v = file_view(
        "class A { int f(int a) {"
        " int r = 0;"
        " if (a > 0) { r = a; } else { r = a + 1; }"
        " return r; } }")
    m = v.classes[0].methods[0]
    g = build_feature_graph(m)
    cond = m.ast.find("Binary")[0]
    a_then = nth_terminal(m.ast, "a", 2)
    a_else = nth_terminal(m.ast, "a", 3)
    assert g.edge_set("GuardedBy") == {(a_then, cond)}
    assert g.edge_set("GuardedByNegation") == {(a_else, cond)}


# ---------------------------------------------------------------------------
# Synthetic nodes
# ---------------------------------------------------------------------------

def test_field_use_hangs_off_a_synthetic_definition(flow):
    # total = total + a; return total;
    m, g = _graph(flow, "fieldflow")
    t0, t1, t2 = (nth_terminal(m.ast, "total", k) for k in range(3))
    a0, a1 = (nth_terminal(m.ast, "a", k) for k in (0, 1))
    fdef = len(m.ast)
    assert g.nodes[fdef].node_type == "FieldDef"
    assert g.nodes[fdef].token == "total"
    assert g.edge_set("LastWrite") == {(t1, fdef), (a1, a0), (t2, t0)}
    assert g.edge_set("LastRead") == {(t2, t1)}
    assert g.edge_set("ComputedFrom") == {(t0, t1), (t0, a1)}
    # synthetic nodes never join the token order
    assert fdef not in g.token_order


def test_field_write_without_read_leaves_the_definition_alone(flow):
    # this.total = v;
    m, g = _graph(flow, "setTotal")
    t0 = nth_terminal(m.ast, "total", 0)
    v0, v1 = (nth_terminal(m.ast, "v", k) for k in (0, 1))
    fdef = len(m.ast)
    assert g.nodes[fdef].node_type == "FieldDef"
    assert g.edge_set("LastWrite") == {(v1, v0)}
    assert g.edge_set("ComputedFrom") == {(t0, v1)}


def test_resolved_call_sites_grow_formal_arg_nodes():
    v = file_view("class A { int g(int p, int q) { return p + q; }"
                  " int f() { return g(1, 2); } }")
    m = method_named(v, "f")
    g = build_feature_graph(m, arg_name_resolver=lambda node: ["p", "q"])
    synth = [n for n in g.nodes if n.node_type == "FormalArgName"]
    assert [n.token for n in synth] == ["p", "q"]
    assert [n.index for n in synth] == [len(m.ast), len(m.ast) + 1]
    lit1 = nth_terminal(m.ast, "1", 0)
    lit2 = nth_terminal(m.ast, "2", 0)
    assert g.edge_set("FormalArgName") == {
        (lit1, synth[0].index), (lit2, synth[1].index)}


# ---------------------------------------------------------------------------
# Syntactic families and serialization
# ---------------------------------------------------------------------------

def test_next_token_is_the_terminal_chain(views):
    for rel, view in views.items():
        for cls in view.classes:
            for m in cls.methods:
                g = build_feature_graph(m, cls.fields)
                terms = m.ast.terminals()
                assert g.token_order == terms, (rel, m.name)
                assert g.edge_set("NextToken") == set(zip(terms, terms[1:]))


def test_return_to_points_at_the_declaration(flow):
    m, g = _graph(flow, "straight")
    ret = nth_terminal(m.ast, "return", 0)
    assert g.edge_set("ReturnTo") == {(ret, 0)}


def test_child_edges_alone_reproduce_the_plain_ast(flow):
    for m in flow.classes[0].methods:
        g = build_feature_graph(m, flow.classes[0].fields)
        plain = ast_graph(m)
        pruned = filter_edges(g, {"Child"})
        assert pruned.edges == plain.edges
        assert pruned.nodes[:len(plain.nodes)] == plain.nodes
        assert pruned.token_order == plain.token_order


def test_filter_edges_rejects_bad_edge_sets(flow):
    _, g = _graph(flow, "straight")
    with pytest.raises(InvalidArgumentError):
        filter_edges(g, set())
    with pytest.raises(InvalidArgumentError):
        filter_edges(g, {"Child", "Sibling"})


def test_payload_roundtrip_is_byte_stable(flow):
    for name in ("straight", "joinuse", "fieldflow"):
        _, g = _graph(flow, name)
        payload = graph_payload(g)
        again = graph_payload(parse_graph_payload(payload))
        assert again == payload
        back = parse_graph_payload(payload)
        assert back.nodes == g.nodes
        assert {t: set(es) for t, es in back.edges.items() if es} == \
            {t: set(es) for t, es in g.edges.items() if es}


# ---------------------------------------------------------------------------
# Path-enumeration oracle
# ---------------------------------------------------------------------------

def test_fixpoint_builder_matches_path_enumeration(views):
    subset = ["flowlab/flow/Flow.java", "demo/app/A.java", "demo/app/B.java",
              "demo/lib/C.java", "metricsuite/calc/Calc.java",
              "textzoo/text/Box.java", "textzoo/text/Solo.java"]
    for rel in subset:
        view = views[rel]
        for cls in view.classes:
            for m in cls.methods:
                g = build_feature_graph(m, cls.fields)
                want, _ = flow_edges_saturated(m, cls.fields)
                for fam, expected in want.items():
                    assert g.edge_set(fam) == expected, (rel, m.name, fam)
