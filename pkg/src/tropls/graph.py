"""Metric graphs, points, divisors, and refinements.

A metric graph is a finite connected multigraph whose edges carry positive
rational lengths.  Loops and parallel edges are allowed.  Points are either
vertices or interior positions on a named edge; positions at offset 0 or at
the full edge length are canonicalised to the corresponding endpoint vertex,
so point equality is honest geometric equality.

Everything here is exact: offsets and lengths are `fractions.Fraction`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .exact import format_rational, lcm


@dataclass(frozen=True, order=True)
class Edge:
    id: str
    tail: str
    head: str
    length: Fraction

    def other_end(self, v: str) -> str:
        if v == self.tail:
            return self.head
        if v == self.head:
            return self.tail
        raise ValueError(f"vertex {v!r} is not an end of edge {self.id!r}")


class MetricGraph:
    """A connected multigraph with positive rational edge lengths.

    Vertices are strings; edges have string ids, an (unordered, but stored
    oriented) pair of ends, and a positive length.  The stored orientation
    only fixes which end is offset 0.
    """

    def __init__(self, vertices: Iterable[str], edges: Iterable[Edge]):
        self.vertices: tuple[str, ...] = tuple(vertices)
        self.edges: tuple[Edge, ...] = tuple(edges)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex name")
        if len({e.id for e in self.edges}) != len(self.edges):
            raise ValueError("duplicate edge id")
        self._edge_by_id = {e.id: e for e in self.edges}
        vset = set(self.vertices)
        for e in self.edges:
            if e.tail not in vset or e.head not in vset:
                raise ValueError(f"edge {e.id!r} has an unknown end")
            if e.length <= 0:
                raise ValueError(f"edge {e.id!r} has non-positive length")
        self._incidence: dict[str, list[tuple[Edge, int]]] = {v: [] for v in self.vertices}
        for e in self.edges:
            # a loop contributes two tangent directions at its base vertex
            self._incidence[e.tail].append((e, +1))
            self._incidence[e.head].append((e, -1))
        if not self._connected():
            raise ValueError("graph is not connected")

    def _connected(self) -> bool:
        if not self.vertices:
            return False
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for e, _ in self._incidence[v]:
                w = e.other_end(v)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    # -- basic queries ----------------------------------------------------

    def edge(self, edge_id: str) -> Edge:
        return self._edge_by_id[edge_id]

    def incident(self, v: str) -> Sequence[tuple[Edge, int]]:
        """Tangent directions at a vertex: (edge, +1 if leaving the tail end)."""
        return tuple(self._incidence[v])

    def valence(self, v: str) -> int:
        return len(self._incidence[v])

    @property
    def genus(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    def total_length(self) -> Fraction:
        return sum((e.length for e in self.edges), Fraction(0))

    def length_denominator(self) -> int:
        return lcm(*(e.length.denominator for e in self.edges))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, MetricGraph)
            and self.vertices == other.vertices
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.vertices, self.edges))

    def __repr__(self) -> str:
        return f"MetricGraph({len(self.vertices)} vertices, {len(self.edges)} edges, genus {self.genus})"

    # -- construction helpers ---------------------------------------------

    @staticmethod
    def build(vertices: Iterable[str], edges: Iterable[tuple[str, str, str, object]]) -> "MetricGraph":
        """Edges given as (id, tail, head, length) with length int/str/Fraction."""
        from .exact import parse_rational

        return MetricGraph(
            vertices,
            [Edge(i, t, h, parse_rational(l)) for (i, t, h, l) in edges],
        )

    def canonical_divisor(self) -> "Divisor":
        return Divisor(
            self,
            {Point.at_vertex(v): self.valence(v) - 2 for v in self.vertices},
        )


@dataclass(frozen=True)
class Point:
    """A point of a metric graph: a vertex, or an interior edge position.

    Interior positions store the edge id and the offset from the edge's tail.
    Offsets 0 and `length` never occur here: `Point.on_edge` canonicalises
    them to the endpoint vertex.
    """

    vertex: str | None
    edge: str | None
    offset: Fraction

    @staticmethod
    def at_vertex(v: str) -> "Point":
        return Point(v, None, Fraction(0))

    @staticmethod
    def on_edge(graph: MetricGraph, edge_id: str, offset: Fraction) -> "Point":
        e = graph.edge(edge_id)
        offset = Fraction(offset)
        if offset < 0 or offset > e.length:
            raise ValueError(
                f"offset {format_rational(offset)} outside edge {edge_id!r}"
                f" of length {format_rational(e.length)}"
            )
        if offset == 0:
            return Point.at_vertex(e.tail)
        if offset == e.length:
            return Point.at_vertex(e.head)
        return Point(None, edge_id, offset)

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    def sort_key(self) -> tuple:
        if self.vertex is not None:
            return (0, self.vertex, Fraction(0))
        return (1, self.edge, self.offset)

    def describe(self) -> str:
        if self.vertex is not None:
            return self.vertex
        return f"{self.edge}@{format_rational(self.offset)}"


class Divisor:
    """A finite formal sum of points with integer multiplicities."""

    def __init__(self, graph: MetricGraph, values: Mapping[Point, int]):
        self.graph = graph
        self._values: dict[Point, int] = {
            p: int(m) for p, m in values.items() if m != 0
        }
        for p in self._values:
            _check_point(graph, p)

    def __getitem__(self, p: Point) -> int:
        return self._values.get(p, 0)

    def support(self) -> tuple[Point, ...]:
        return tuple(sorted(self._values, key=Point.sort_key))

    def items(self) -> Iterator[tuple[Point, int]]:
        return iter(sorted(self._values.items(), key=lambda kv: kv[0].sort_key()))

    @property
    def degree(self) -> int:
        return sum(self._values.values())

    def is_effective(self) -> bool:
        return all(m >= 0 for m in self._values.values())

    def __add__(self, other: "Divisor") -> "Divisor":
        self._same_graph(other)
        out = dict(self._values)
        for p, m in other._values.items():
            out[p] = out.get(p, 0) + m
        return Divisor(self.graph, out)

    def __sub__(self, other: "Divisor") -> "Divisor":
        return self + (-other)

    def __neg__(self) -> "Divisor":
        return Divisor(self.graph, {p: -m for p, m in self._values.items()})

    def __rmul__(self, k: int) -> "Divisor":
        return Divisor(self.graph, {p: k * m for p, m in self._values.items()})

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Divisor)
            and self.graph == other.graph
            and self._values == other._values
        )

    def __hash__(self) -> int:
        return hash((self.graph, frozenset(self._values.items())))

    def _same_graph(self, other: "Divisor") -> None:
        if self.graph != other.graph:
            raise ValueError("divisors live on different graphs")

    def describe(self) -> str:
        if not self._values:
            return "0"
        return " + ".join(
            (f"{m}({p.describe()})" if m != 1 else f"({p.describe()})")
            for p, m in self.items()
        )

    def offset_denominator(self) -> int:
        return lcm(*(p.offset.denominator for p in self._values if not p.is_vertex)) or 1

    def __repr__(self) -> str:
        return f"Divisor({self.describe()}, degree {self.degree})"


def _check_point(graph: MetricGraph, p: Point) -> None:
    if p.is_vertex:
        if p.vertex not in graph._incidence:
            raise ValueError(f"unknown vertex {p.vertex!r}")
    else:
        e = graph.edge(p.edge)  # KeyError -> informative enough
        if not (0 < p.offset < e.length):
            raise ValueError(f"point {p.describe()} not interior to its edge")


# -- refinement ------------------------------------------------------------


class Refinement:
    """A model of the same metric graph with extra valence-2 vertices.

    Built by cutting a base graph at a set of interior points.  Provides
    coordinate transport both ways: every point of the refined graph is a
    point of the base graph and vice versa.
    """

    def __init__(self, base: MetricGraph, points: Iterable[Point]):
        cuts: dict[str, list[Fraction]] = {}
        for p in points:
            _check_point(base, p)
            if not p.is_vertex:
                cuts.setdefault(p.edge, []).append(p.offset)
        self.base = base
        self._cuts = {e: tuple(sorted(set(offs))) for e, offs in cuts.items()}

        vertices = list(base.vertices)
        vnames = set(vertices)
        self._cut_vertex: dict[tuple[str, Fraction], str] = {}
        for eid in sorted(self._cuts):
            for off in self._cuts[eid]:
                name = f"{eid}@{format_rational(off)}"
                if name in vnames:
                    raise ValueError(f"vertex name collision at {name!r}")
                vnames.add(name)
                vertices.append(name)
                self._cut_vertex[(eid, off)] = name

        edges: list[Edge] = []
        # refined edge id -> (base edge id, start offset, end offset)
        self._span: dict[str, tuple[str, Fraction, Fraction]] = {}
        self._pieces: dict[str, tuple[str, ...]] = {}
        for e in base.edges:
            offs = self._cuts.get(e.id, ())
            if not offs:
                edges.append(e)
                self._span[e.id] = (e.id, Fraction(0), e.length)
                self._pieces[e.id] = (e.id,)
                continue
            stops = [Fraction(0), *offs, e.length]
            names = [e.tail, *(self._cut_vertex[(e.id, o)] for o in offs), e.head]
            piece_ids = []
            for k in range(len(stops) - 1):
                pid = f"{e.id}:{k}"
                if pid in {x.id for x in base.edges}:
                    raise ValueError(f"edge id collision at {pid!r}")
                edges.append(Edge(pid, names[k], names[k + 1], stops[k + 1] - stops[k]))
                self._span[pid] = (e.id, stops[k], stops[k + 1])
                piece_ids.append(pid)
            self._pieces[e.id] = tuple(piece_ids)
        self.graph = MetricGraph(vertices, edges)

    def pieces(self, base_edge_id: str) -> tuple[str, ...]:
        """Refined edge ids covering a base edge, in tail-to-head order."""
        return self._pieces[base_edge_id]

    def span(self, refined_edge_id: str) -> tuple[str, Fraction, Fraction]:
        """Base coordinates (base edge, start offset, end offset) of a piece."""
        return self._span[refined_edge_id]

    def to_refined(self, p: Point) -> Point:
        _check_point(self.base, p)
        if p.is_vertex:
            return p
        cut = self._cut_vertex.get((p.edge, p.offset))
        if cut is not None:
            return Point.at_vertex(cut)
        for pid in self._pieces[p.edge]:
            _, lo, hi = self._span[pid]
            if lo < p.offset < hi:
                return Point.on_edge(self.graph, pid, p.offset - lo)
        raise AssertionError("unreachable: offset not covered by pieces")

    def to_base(self, p: Point) -> Point:
        _check_point(self.graph, p)
        if p.is_vertex:
            for (eid, off), name in self._cut_vertex.items():
                if name == p.vertex:
                    return Point.on_edge(self.base, eid, off)
            return p
        eid, lo, _ = self._span[p.edge]
        return Point.on_edge(self.base, eid, lo + p.offset)

    def transport_divisor(self, d: Divisor) -> Divisor:
        if d.graph == self.base:
            return Divisor(self.graph, {self.to_refined(p): m for p, m in d.items()})
        if d.graph == self.graph:
            return Divisor(self.base, {self.to_base(p): m for p, m in d.items()})
        raise ValueError("divisor belongs to neither side of this refinement")


def common_refinement(base: MetricGraph, *point_sets: Iterable[Point]) -> Refinement:
    pts: list[Point] = []
    for ps in point_sets:
        pts.extend(ps)
    return Refinement(base, pts)


# -- regions and complement components --------------------------------------


@dataclass(frozen=True)
class ClosedSubset:
    """A closed subset of a metric graph: vertices plus closed edge intervals.

    Intervals are in base coordinates, pairwise disjoint per edge, sorted,
    and may be degenerate (a single interior point).  Vertices covered by an
    interval reaching offset 0 or full length must also appear in `vertices`;
    the constructor does not enforce this, `normalise` does.
    """

    graph: MetricGraph
    vertices: frozenset[str]
    intervals: tuple[tuple[str, Fraction, Fraction], ...]

    @staticmethod
    def normalise(
        graph: MetricGraph,
        vertices: Iterable[str],
        intervals: Iterable[tuple[str, Fraction, Fraction]],
    ) -> "ClosedSubset":
        verts = set(vertices)
        by_edge: dict[str, list[tuple[Fraction, Fraction]]] = {}
        for eid, lo, hi in intervals:
            e = graph.edge(eid)
            lo, hi = Fraction(lo), Fraction(hi)
            if not (0 <= lo <= hi <= e.length):
                raise ValueError(f"bad interval on edge {eid!r}")
            if lo == 0:
                verts.add(e.tail)
            if hi == e.length:
                verts.add(e.head)
            if lo == hi and (lo == 0 or hi == e.length):
                continue
            by_edge.setdefault(eid, []).append((lo, hi))
        merged: list[tuple[str, Fraction, Fraction]] = []
        for eid in sorted(by_edge):
            runs = sorted(by_edge[eid])
            acc: list[tuple[Fraction, Fraction]] = []
            for lo, hi in runs:
                if acc and lo <= acc[-1][1]:
                    acc[-1] = (acc[-1][0], max(acc[-1][1], hi))
                else:
                    acc.append((lo, hi))
            merged.extend((eid, lo, hi) for lo, hi in acc)
        return ClosedSubset(graph, frozenset(verts), tuple(merged))

    def contains(self, p: Point) -> bool:
        if p.is_vertex:
            return p.vertex in self.vertices
        for eid, lo, hi in self.intervals:
            if eid == p.edge and lo <= p.offset <= hi:
                return True
        return False

    def is_empty(self) -> bool:
        return not self.vertices and not self.intervals

    def describe(self) -> str:
        parts = sorted(self.vertices)
        parts += [
            f"{eid}[{format_rational(lo)},{format_rational(hi)}]"
            for eid, lo, hi in self.intervals
        ]
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class Component:
    """A connected component of the complement of a finite point set.

    Open subset, stored in base coordinates: interior vertices, open edge
    intervals, and the boundary points (elements of the removed set adherent
    to this component).
    """

    graph: MetricGraph
    vertices: frozenset[str]
    intervals: tuple[tuple[str, Fraction, Fraction], ...]
    boundary: tuple[Point, ...]

    def contains(self, p: Point) -> bool:
        if p.is_vertex:
            return p.vertex in self.vertices
        return any(
            eid == p.edge and lo < p.offset < hi for eid, lo, hi in self.intervals
        )

    def closure_inside(self, region: ClosedSubset) -> bool:
        """Whether the closure of this component lies inside `region`."""
        if any(v not in region.vertices for v in self.vertices):
            return False
        if any(not region.contains(p) for p in self.boundary):
            return False
        for eid, lo, hi in self.intervals:
            if not any(
                reid == eid and rlo <= lo and hi <= rhi
                for reid, rlo, rhi in region.intervals
            ):
                return False
        return True

    def closure(self) -> ClosedSubset:
        ivals = list(self.intervals)
        verts = set(self.vertices)
        for p in self.boundary:
            if p.is_vertex:
                verts.add(p.vertex)
            else:
                ivals.append((p.edge, p.offset, p.offset))
        return ClosedSubset.normalise(self.graph, verts, ivals)

    def sort_key(self) -> tuple:
        vkey = min(self.vertices) if self.vertices else "￿"
        ikey = min(self.intervals) if self.intervals else ("￿", 0, 0)
        return (ikey, vkey)


def complement_components(graph: MetricGraph, points: Iterable[Point]) -> tuple[Component, ...]:
    """Connected components of the graph minus a finite set of points."""
    pts = []
    for p in points:
        _check_point(graph, p)
        pts.append(p)
    ref = Refinement(graph, pts)
    removed = {ref.to_refined(p).vertex for p in pts if not p.is_vertex}
    removed |= {p.vertex for p in pts if p.is_vertex}
    g = ref.graph

    # components of g with `removed` vertices deleted, but edges incident to
    # removed vertices kept as half-open stubs of the component at the other end
    parent: dict[str, str] = {v: v for v in g.vertices if v not in removed}

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    live_edges = []
    for e in g.edges:
        t_in, h_in = e.tail not in removed, e.head not in removed
        if t_in or h_in:
            live_edges.append(e)
        if t_in and h_in:
            rt, rh = find(e.tail), find(e.head)
            if rt != rh:
                parent[rt] = rh

    groups: dict[str, dict] = {}
    isolated_edges = []  # both ends removed: the whole open edge is a component
    for e in live_edges:
        t_in, h_in = e.tail not in removed, e.head not in removed
        if not (t_in or h_in):
            continue
        if t_in and h_in and find(e.tail) == find(e.head):
            root = find(e.tail)
        elif t_in:
            root = find(e.tail)
        else:
            root = find(e.head)
        grp = groups.setdefault(root, {"verts": set(), "edges": [], "bnd": set()})
        grp["edges"].append(e)
        if t_in:
            grp["verts"].add(e.tail)
        else:
            grp["bnd"].add(ref.to_base(Point.at_vertex(e.tail)))
        if h_in:
            grp["verts"].add(e.head)
        else:
            grp["bnd"].add(ref.to_base(Point.at_vertex(e.head)))
    for e in g.edges:
        if e.tail in removed and e.head in removed:
            isolated_edges.append(e)
    for v in g.vertices:
        if v not in removed:
            groups.setdefault(find(v), {"verts": set(), "edges": [], "bnd": set()})
            groups[find(v)]["verts"].add(v)

    comps: list[Component] = []
    for grp in groups.values():
        ivals = []
        verts = set()
        for v in grp["verts"]:
            base_pt = ref.to_base(Point.at_vertex(v))
            if base_pt.is_vertex:
                verts.add(base_pt.vertex)
            else:
                # a cut vertex that was not removed: interior marker, absorb
                ivals.append((base_pt.edge, base_pt.offset, base_pt.offset))
        for e in grp["edges"]:
            eid, lo, hi = ref.span(e.id)
            ivals.append((eid, lo, hi))
        ivals = _merge_open(ivals)
        comps.append(
            Component(
                graph,
                frozenset(verts),
                tuple(ivals),
                tuple(sorted(grp["bnd"], key=Point.sort_key)),
            )
        )
    for e in isolated_edges:
        eid, lo, hi = ref.span(e.id)
        comps.append(
            Component(
                graph,
                frozenset(),
                ((eid, lo, hi),),
                tuple(
                    sorted(
                        {
                            ref.to_base(Point.at_vertex(e.tail)),
                            ref.to_base(Point.at_vertex(e.head)),
                        },
                        key=Point.sort_key,
                    )
                ),
            )
        )
    comps.sort(key=Component.sort_key)
    return tuple(comps)


def _merge_open(ivals: list[tuple[str, Fraction, Fraction]]) -> list[tuple[str, Fraction, Fraction]]:
    by_edge: dict[str, list[tuple[Fraction, Fraction]]] = {}
    for eid, lo, hi in ivals:
        by_edge.setdefault(eid, []).append((lo, hi))
    out = []
    for eid in sorted(by_edge):
        runs = sorted(by_edge[eid])
        acc: list[list[Fraction]] = []
        for lo, hi in runs:
            # strict overlap only: adjacent pieces meet at a removed point
            if acc and lo < acc[-1][1]:
                acc[-1][1] = max(acc[-1][1], hi)
            else:
                acc.append([lo, hi])
        out.extend((eid, lo, hi) for lo, hi in acc)
    return out
