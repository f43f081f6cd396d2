from __future__ import annotations

from fractions import Fraction

import pytest

from helpers import interval, ones_divisor, pair_line_graph, theta
from tropls.graph import (
    Divisor,
    MetricGraph,
    Point,
    Refinement,
    complement_components,
)


def test_interval_build():
    g = interval()
    assert g.genus == 0
    assert g.total_length() == 1
    assert g.valence("v") == 1 and g.valence("w") == 1


def test_theta_build():
    g = theta()
    assert g.genus == 2
    assert g.valence("u") == 3 and g.valence("v") == 3


def test_loop_of_loops_genus():
    # three 2-arc circles in a ring, joined by three connector edges
    vertices = ["v1", "w1", "v2", "w2", "v3", "w3"]
    edges = []
    for k, (a, b) in enumerate([("w1", "v2"), ("v3", "w2"), ("v1", "w3")], 1):
        edges.append((f"c{k}_out", a, b, 1))
        edges.append((f"c{k}_in", a, b, 1))
    edges += [("j1", "v1", "w1", 5), ("j2", "v2", "w2", 4), ("j3", "v3", "w3", 3)]
    g = MetricGraph.build(vertices, edges)
    assert len(g.vertices) == 6 and len(g.edges) == 9
    assert g.genus == 4


def test_build_rejects_disconnected():
    with pytest.raises(ValueError):
        MetricGraph.build(["a", "b", "c"], [("e", "a", "b", 1)])


def test_build_rejects_nonpositive_length():
    with pytest.raises(ValueError):
        MetricGraph.build(["a", "b"], [("e", "a", "b", 0)])


def test_valence_of_interior_point_is_two():
    g = theta()
    p = Point.on_edge(g, "e2", Fraction(1, 3))
    # two tangent directions along the edge
    assert not p.is_vertex
    assert len(g.incident("u")) == 3


def test_point_canonicalisation():
    g = interval()
    assert Point.on_edge(g, "e", Fraction(0)) == Point.at_vertex("v")
    assert Point.on_edge(g, "e", Fraction(1)) == Point.at_vertex("w")
    with pytest.raises(ValueError):
        Point.on_edge(g, "e", Fraction(3, 2))


def test_refine_interval_at_midpoint():
    g = interval()
    ref = Refinement(g, [Point.on_edge(g, "e", Fraction(1, 2))])
    assert len(ref.graph.vertices) == 3
    assert sorted(e.length for e in ref.graph.edges) == [Fraction(1, 2)] * 2
    assert ref.graph.total_length() == g.total_length()


def test_refine_transport_preserves_degree():
    g = interval()
    d = Divisor(g, {Point.at_vertex("v"): 2, Point.on_edge(g, "e", Fraction(1, 4)): -1})
    ref = Refinement(g, [Point.on_edge(g, "e", Fraction(1, 2))])
    up = ref.transport_divisor(d)
    assert up.degree == d.degree
    assert ref.transport_divisor(up) == d


def test_refine_loop_to_triangle():
    g = MetricGraph.build(["v"], [("loop", "v", "v", 3)])
    ref = Refinement(
        g, [Point.on_edge(g, "loop", Fraction(1)), Point.on_edge(g, "loop", Fraction(2))]
    )
    t = ref.graph
    assert len(t.vertices) == 3 and len(t.edges) == 3
    assert t.genus == 1
    assert all(t.valence(v) == 2 for v in t.vertices)
    assert sorted(e.length for e in t.edges) == [1, 1, 1]


def test_refine_idempotent_on_vertex_points():
    g = theta()
    ref = Refinement(g, [Point.at_vertex("u"), Point.at_vertex("v")])
    assert ref.graph == g


def test_canonical_divisor_barbell():
    g = MetricGraph.build(
        ["v", "w"],
        [("loop_l", "v", "v", 2), ("bridge", "v", "w", 1), ("loop_r", "w", "w", 2)],
    )
    k = g.canonical_divisor()
    assert k == Divisor(g, {Point.at_vertex("v"): 1, Point.at_vertex("w"): 1})
    assert k.degree == 2 * g.genus - 2


def test_canonical_divisor_theta():
    g = theta()
    k = g.canonical_divisor()
    assert k[Point.at_vertex("u")] == 1 and k[Point.at_vertex("v")] == 1
    assert k.degree == 2


def test_canonical_divisor_interval():
    g = interval()
    k = g.canonical_divisor()
    assert k[Point.at_vertex("v")] == -1 and k[Point.at_vertex("w")] == -1
    assert k.degree == -2


def test_components_interval_midpoint():
    g = interval()
    m = Point.on_edge(g, "e", Fraction(1, 2))
    comps = complement_components(g, [m])
    assert len(comps) == 2
    quarter = Point.on_edge(g, "e", Fraction(1, 4))
    three_quarter = Point.on_edge(g, "e", Fraction(3, 4))
    assert sum(c.contains(quarter) for c in comps) == 1
    assert sum(c.contains(three_quarter) for c in comps) == 1
    assert not any(c.contains(m) for c in comps)
    for c in comps:
        assert c.boundary == (m,)


def test_components_empty_divisor_is_whole_graph():
    g = theta()
    comps = complement_components(g, [])
    assert len(comps) == 1
    assert comps[0].vertices == {"u", "v"}


def test_components_of_incidence_graph():
    # one component per line vertex: the open star of that line
    g, points, lines = pair_line_graph(4)
    d = ones_divisor(g, points)
    comps = complement_components(g, d.support())
    assert len(comps) == len(lines)
    fvert_to_comp = {}
    for c in comps:
        assert len(c.vertices) == 1
        (fv,) = c.vertices
        fvert_to_comp[fv] = c
    assert set(fvert_to_comp) == set(lines)
    # the boundary of the star of line F is exactly the pair of points on F
    for fv, c in fvert_to_comp.items():
        ends = {p.vertex for p in c.boundary}
        assert ends == {f"e{ch}" for ch in fv[1:]}


def test_components_partition_lattice_sample():
    g = theta()
    d = Divisor(g, {Point.at_vertex("u"): 1, Point.on_edge(g, "e1", Fraction(1, 2)): 1})
    comps = complement_components(g, d.support())
    support = set(d.support())
    samples = [Point.at_vertex(v) for v in g.vertices]
    for e in g.edges:
        for k in range(1, 4):
            samples.append(Point.on_edge(g, e.id, Fraction(k, 4) * e.length))
    for p in samples:
        hits = sum(c.contains(p) for c in comps)
        assert hits == (0 if p in support else 1)


def test_two_genus_two_from_valence_sum():
    # sum of (valence - 2) equals 2g - 2 when no valence-1 vertices exist
    for g in (theta(), MetricGraph.build(["a"], [("l1", "a", "a", 1), ("l2", "a", "a", 2)])):
        total = sum(g.valence(v) - 2 for v in g.vertices)
        assert total == 2 * g.genus - 2
