"""Shared graph builders for the test suite."""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from tropls.graph import Divisor, MetricGraph, Point
from tropls.plfun import PLFunction


def interval(length: object = 1) -> MetricGraph:
    return MetricGraph.build(["v", "w"], [("e", "v", "w", length)])


def theta() -> MetricGraph:
    return MetricGraph.build(
        ["u", "v"],
        [("e1", "u", "v", 1), ("e2", "u", "v", 1), ("e3", "u", "v", 1)],
    )


def circle() -> MetricGraph:
    """A circle of circumference 2 with two antipodal vertices."""
    return MetricGraph.build(
        ["a", "b"], [("top", "a", "b", 1), ("bot", "a", "b", 1)]
    )


def barbell() -> MetricGraph:
    """Two loops of circumference 2 joined by a unit bridge."""
    return MetricGraph.build(
        ["v", "w"],
        [
            ("loop_l", "v", "v", 2),
            ("bridge", "v", "w", 1),
            ("loop_r", "w", "w", 2),
        ],
    )


def barbell_peaks() -> tuple[PLFunction, PLFunction]:
    """The two extremal canonical members on the barbell.

    The first is 0 on the right loop and climbs to a peak of 2 at the far
    point of the left loop; the second is its mirror image.
    """
    g = barbell()
    phi_x = PLFunction(
        g,
        {"v": 1, "w": 0},
        {"loop_l": [(Fraction(1), Fraction(2))]},
    )
    phi_y = PLFunction(
        g,
        {"v": 0, "w": 1},
        {"loop_r": [(Fraction(1), Fraction(2))]},
    )
    return phi_x, phi_y


def pair_line_graph(n: int = 4) -> tuple[MetricGraph, list[str], list[str]]:
    """Bipartite incidence graph of n points versus all 2-element subsets,
    with unit lengths: the point-line graph of the rank-3 uniform matroid on
    n elements.  Returns (graph, point vertex names, line vertex names)."""
    points = [f"e{i}" for i in range(n)]
    lines = [f"F{i}{j}" for i, j in combinations(range(n), 2)]
    edges = []
    for i, j in combinations(range(n), 2):
        line = f"F{i}{j}"
        edges.append((f"{line}_{i}", f"e{i}", line, 1))
        edges.append((f"{line}_{j}", f"e{j}", line, 1))
    return MetricGraph.build(points + lines, edges), points, lines


def ones_divisor(g: MetricGraph, names: list[str]) -> Divisor:
    return Divisor(g, {Point.at_vertex(v): 1 for v in names})


def incidence_bump(g: MetricGraph, point: str, lines: list[str]) -> PLFunction:
    """On a point-line incidence graph: 2 at the given point vertex, 1 on the
    lines through it, 0 elsewhere, interpolated linearly."""
    values = {}
    for v in g.vertices:
        if v == point:
            values[v] = 2
        elif v in lines and point in _line_members(v):
            values[v] = 1
        else:
            values[v] = 0
    return PLFunction(g, values)


def _line_members(line_name: str) -> set[str]:
    return {f"e{c}" for c in line_name[1:]}
