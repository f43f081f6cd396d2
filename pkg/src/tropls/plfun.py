"""Piecewise linear functions with integer slopes on a metric graph.

A function is stored as values at the graph's vertices plus a sorted list of
interior breakpoints (offset, value) per edge; it is affine in between.  The
constructor validates that every affine piece has integer slope and prunes
breakpoints where the slope does not actually change, so representations are
canonical and `==` is honest function equality.

Conventions.  The slope of a piece is taken along increasing offset.  The
outgoing slopes at a point are the derivatives leaving the point along each
tangent direction, and the order of the function at a point is minus their
sum.  A local peak therefore has positive order, a local V-shaped dip has
negative order, and the divisor of the function has degree zero.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exact import format_rational
from .graph import (
    ClosedSubset,
    Component,
    Divisor,
    MetricGraph,
    Point,
    complement_components,
)


class PLFunction:
    def __init__(
        self,
        graph: MetricGraph,
        vertex_values: Mapping[str, object],
        breaks: Mapping[str, Sequence[tuple[object, object]]] | None = None,
    ):
        self.graph = graph
        self.vertex_values: dict[str, Fraction] = {}
        for v in graph.vertices:
            if v not in vertex_values:
                raise ValueError(f"missing value at vertex {v!r}")
            self.vertex_values[v] = Fraction(vertex_values[v])
        unknown = set(vertex_values) - set(graph.vertices)
        if unknown:
            raise ValueError(f"values given at unknown vertices {sorted(unknown)}")

        self.breaks: dict[str, tuple[tuple[Fraction, Fraction], ...]] = {}
        raw = breaks or {}
        for eid in raw:
            graph.edge(eid)
        for e in graph.edges:
            pts = sorted((Fraction(t), Fraction(x)) for t, x in raw.get(e.id, ()))
            offs = [t for t, _ in pts]
            if any(not (0 < t < e.length) for t in offs):
                raise ValueError(f"breakpoint outside interior of edge {e.id!r}")
            if len(set(offs)) != len(offs):
                raise ValueError(f"repeated breakpoint offset on edge {e.id!r}")
            self.breaks[e.id] = self._prune(e, pts)
        self._validate_slopes()

    def _stops(self, eid: str) -> list[tuple[Fraction, Fraction]]:
        """All (offset, value) nodes along an edge, endpoints included."""
        e = self.graph.edge(eid)
        return [
            (Fraction(0), self.vertex_values[e.tail]),
            *self.breaks[eid],
            (e.length, self.vertex_values[e.head]),
        ]

    def _prune(self, e, pts: list[tuple[Fraction, Fraction]]):
        # drop nodes where the slope does not change; one pass against the
        # original neighbours is enough, because the interpolated function is
        # unchanged by removing an on-the-line node
        stops = [
            (Fraction(0), self.vertex_values[e.tail]),
            *pts,
            (e.length, self.vertex_values[e.head]),
        ]
        keep = []
        for k in range(1, len(stops) - 1):
            (t0, x0), (t1, x1), (t2, x2) = stops[k - 1], stops[k], stops[k + 1]
            if (x1 - x0) * (t2 - t1) != (x2 - x1) * (t1 - t0):
                keep.append((t1, x1))
        return tuple(keep)

    def _validate_slopes(self) -> None:
        for e in self.graph.edges:
            stops = self._stops(e.id)
            for (t0, x0), (t1, x1) in zip(stops, stops[1:]):
                s = (x1 - x0) / (t1 - t0)
                if s.denominator != 1:
                    raise ValueError(
                        f"non-integer slope {format_rational(s)} on edge {e.id!r}"
                    )

    # -- evaluation ---------------------------------------------------------

    def value(self, p: Point) -> Fraction:
        if p.is_vertex:
            return self.vertex_values[p.vertex]
        stops = self._stops(p.edge)
        for (t0, x0), (t1, x1) in zip(stops, stops[1:]):
            if t0 <= p.offset <= t1:
                return x0 + (x1 - x0) * (p.offset - t0) / (t1 - t0)
        raise AssertionError("offset not covered")

    def segment_slopes(self, eid: str) -> list[tuple[Fraction, Fraction, int]]:
        """(start offset, end offset, slope) pieces along an edge."""
        stops = self._stops(eid)
        return [
            (t0, t1, int((x1 - x0) / (t1 - t0)))
            for (t0, x0), (t1, x1) in zip(stops, stops[1:])
        ]

    def outgoing_slopes(self, p: Point) -> list[int]:
        out: list[int] = []
        if p.is_vertex:
            for e, sign in self.graph.incident(p.vertex):
                pieces = self.segment_slopes(e.id)
                out.append(pieces[0][2] if sign > 0 else -pieces[-1][2])
            return out
        for t0, t1, s in self.segment_slopes(p.edge):
            if t0 == p.offset:
                out.append(s)
            if t1 == p.offset:
                out.append(-s)
            if t0 < p.offset < t1:
                out.extend((s, -s))
        return out

    def order_at(self, p: Point) -> int:
        return -sum(self.outgoing_slopes(p))

    def divisor(self) -> Divisor:
        vals: dict[Point, int] = {}
        for v in self.graph.vertices:
            vals[Point.at_vertex(v)] = self.order_at(Point.at_vertex(v))
        for eid, pts in self.breaks.items():
            for t, _ in pts:
                p = Point.on_edge(self.graph, eid, t)
                vals[p] = self.order_at(p)
        return Divisor(self.graph, vals)

    # -- global shape --------------------------------------------------------

    def _nodes(self):
        for v in self.graph.vertices:
            yield Point.at_vertex(v), self.vertex_values[v]
        for eid, pts in self.breaks.items():
            for t, x in pts:
                yield Point.on_edge(self.graph, eid, t), x

    def min_value(self) -> Fraction:
        return min(x for _, x in self._nodes())

    def max_value(self) -> Fraction:
        return max(x for _, x in self._nodes())

    def oscillation(self) -> Fraction:
        """max minus min; the sup-distance of the function from the constants."""
        return self.max_value() - self.min_value()

    def minimum_locus(self) -> ClosedSubset:
        m = self.min_value()
        return self.level_subset(m)

    def level_subset(self, level: Fraction) -> ClosedSubset:
        """The closed set where the function equals `level` exactly.

        Meaningful when `level` is the minimum (or any value attained on a
        union of vertices, breakpoints, and whole segments); crossings of the
        level in the interior of a sloped piece are included as degenerate
        intervals too.
        """
        verts = [v for v in self.graph.vertices if self.vertex_values[v] == level]
        ivals: list[tuple[str, Fraction, Fraction]] = []
        for e in self.graph.edges:
            stops = self._stops(e.id)
            for (t0, x0), (t1, x1) in zip(stops, stops[1:]):
                if x0 == level and x1 == level:
                    ivals.append((e.id, t0, t1))
                elif min(x0, x1) <= level <= max(x0, x1) and x0 != x1:
                    t = t0 + (t1 - t0) * (level - x0) / (x1 - x0)
                    ivals.append((e.id, t, t))
        return ClosedSubset.normalise(self.graph, verts, ivals)

    def is_constant(self) -> bool:
        vals = {x for _, x in self._nodes()}
        return len(vals) == 1

    def shifted(self, c: object) -> "PLFunction":
        c = Fraction(c)
        return PLFunction(
            self.graph,
            {v: x + c for v, x in self.vertex_values.items()},
            {eid: [(t, x + c) for t, x in pts] for eid, pts in self.breaks.items()},
        )

    def normalised(self) -> "PLFunction":
        return self.shifted(-self.min_value())

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, PLFunction)
            and self.graph == other.graph
            and self.vertex_values == other.vertex_values
            and self.breaks == other.breaks
        )

    def __hash__(self) -> int:
        return hash(
            (
                self.graph,
                tuple(sorted(self.vertex_values.items())),
                tuple(sorted(self.breaks.items())),
            )
        )

    def __repr__(self) -> str:
        nodes = ", ".join(
            f"{p.describe()}={format_rational(x)}" for p, x in sorted(self._nodes(), key=lambda n: n[0].sort_key())
        )
        return f"PLFunction({nodes})"

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def constant(graph: MetricGraph, c: object) -> "PLFunction":
        return PLFunction(graph, {v: Fraction(c) for v in graph.vertices})

    @staticmethod
    def linear_interpolation(graph: MetricGraph, vertex_values: Mapping[str, object]) -> "PLFunction":
        """Affine on every edge; slopes must come out integral."""
        return PLFunction(graph, vertex_values)

    @staticmethod
    def from_point_values(
        graph: MetricGraph, values: Mapping[Point, object]
    ) -> "PLFunction":
        """Build from values at all vertices plus some interior points."""
        vv = {}
        br: dict[str, list[tuple[Fraction, Fraction]]] = {}
        for p, x in values.items():
            if p.is_vertex:
                vv[p.vertex] = Fraction(x)
            else:
                br.setdefault(p.edge, []).append((p.offset, Fraction(x)))
        return PLFunction(graph, vv, br)


# -- pointwise algebra --------------------------------------------------------


def _joint_offsets(f: PLFunction, g: PLFunction, eid: str) -> list[Fraction]:
    offs = {t for t, _ in f._stops(eid)} | {t for t, _ in g._stops(eid)}
    return sorted(offs)


def pointwise_sum(f: PLFunction, g: PLFunction, fc: int = 1, gc: int = 1) -> PLFunction:
    """fc*f + gc*g with integer weights (stays integer-sloped)."""
    if f.graph != g.graph:
        raise ValueError("functions live on different graphs")
    vv = {v: fc * f.vertex_values[v] + gc * g.vertex_values[v] for v in f.graph.vertices}
    br = {}
    for e in f.graph.edges:
        pts = []
        for t in _joint_offsets(f, g, e.id):
            if 0 < t < e.length:
                p = Point.on_edge(f.graph, e.id, t)
                pts.append((t, fc * f.value(p) + gc * g.value(p)))
        br[e.id] = pts
    return PLFunction(f.graph, vv, br)


def difference(f: PLFunction, g: PLFunction) -> PLFunction:
    return pointwise_sum(f, g, 1, -1)


def tropical_min(f: PLFunction, g: PLFunction) -> PLFunction:
    """Pointwise minimum.  Inserts crossing points, so the result is PL."""
    if f.graph != g.graph:
        raise ValueError("functions live on different graphs")
    vv = {
        v: min(f.vertex_values[v], g.vertex_values[v]) for v in f.graph.vertices
    }
    br = {}
    for e in f.graph.edges:
        offs = _joint_offsets(f, g, e.id)
        cross: list[Fraction] = []
        for t0, t1 in zip(offs, offs[1:]):
            p0 = Point.on_edge(f.graph, e.id, t0)
            p1 = Point.on_edge(f.graph, e.id, t1)
            d0 = f.value(p0) - g.value(p0)
            d1 = f.value(p1) - g.value(p1)
            if (d0 < 0 < d1) or (d1 < 0 < d0):
                # affine pieces cross once at the zero of d
                cross.append(t0 + (t1 - t0) * (-d0) / (d1 - d0))
        pts = []
        for t in sorted(set(offs) | set(cross)):
            if 0 < t < e.length:
                p = Point.on_edge(f.graph, e.id, t)
                pts.append((t, min(f.value(p), g.value(p))))
        br[e.id] = pts
    return PLFunction(f.graph, vv, br)


def tropical_combination(
    functions: Sequence[PLFunction], coefficients: Sequence[object]
) -> PLFunction:
    """min_i (functions[i] + coefficients[i]); coefficients are finite rationals."""
    if not functions or len(functions) != len(coefficients):
        raise ValueError("need one finite coefficient per function")
    acc = functions[0].shifted(coefficients[0])
    for fn, c in zip(functions[1:], coefficients[1:]):
        acc = tropical_min(acc, fn.shifted(c))
    return acc


def everywhere_leq(f: PLFunction, g: PLFunction) -> bool:
    """f <= g pointwise (checked at all joint nodes of each edge)."""
    if f.graph != g.graph:
        raise ValueError("functions live on different graphs")
    if any(f.vertex_values[v] > g.vertex_values[v] for v in f.graph.vertices):
        return False
    for e in f.graph.edges:
        for t in _joint_offsets(f, g, e.id):
            p = Point.on_edge(f.graph, e.id, t)
            if f.value(p) > g.value(p):
                return False
    return True


def sup_difference(f: PLFunction, g: PLFunction) -> Fraction:
    """max over the graph of f - g (f, g piecewise linear, so this is exact)."""
    d = difference(f, g)
    return d.max_value()


def in_complete_system(phi: PLFunction, d: Divisor) -> bool:
    """Whether d + div(phi) is effective."""
    if phi.graph != d.graph:
        raise ValueError("function and divisor live on different graphs")
    return (d + phi.divisor()).is_effective()


def component_flat(
    phi: PLFunction, components: Sequence[Component]
) -> tuple[int, ...]:
    """Indices of the components whose closure avoids the minimum locus.

    `components` should be the complement components of the support of the
    base divisor; a component counts as avoiding when its closure is not
    entirely inside the minimum locus of phi.  Empty iff phi is constant.
    """
    locus = phi.minimum_locus()
    return tuple(
        i for i, c in enumerate(components) if not c.closure_inside(locus)
    )


def flat_of(phi: PLFunction, d: Divisor) -> tuple[int, ...]:
    """`component_flat` against the components of the complement of supp(d)."""
    if not in_complete_system(phi, d):
        raise ValueError("function is not compatible with the divisor")
    return component_flat(phi, complement_components(phi.graph, d.support()))
