"""Worked constructions and scripted scenarios.

Parametrized images of matroid covector spans on an interval and on a
circle, a cycle-based realizability test for members of the canonical
system, the incidence-graph series driven by a rank-3 matroid and an
adjoint, modular-cut machinery for quotient certificates, and a gallery of
named scenarios whose advertised conclusions are re-checked at run time.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .chip import rank as divisor_rank, reduced_divisor
from .errors import NonRealizableError
from .exact import INF, parse_rational
from .graph import Divisor, MetricGraph, Point, complement_components
from .localmat import local_matroid, translate
from .matroids import (
    Matroid,
    MatroidError,
    free_adjoint,
    is_adjoint,
    is_quotient,
    trop_generators,
)
from .plfun import (
    PLFunction,
    component_flat,
    difference,
    in_complete_system,
    sup_difference,
    tropical_combination,
    tropical_min,
)
from .series import (
    GENERATOR_CAP,
    TropSubmodule,
    cells,
    complete_system,
    divisor_in_system,
    independence_rank,
    is_tls,
    nondegenerate,
    span_coefficients,
)


# -- parametrized images ---------------------------------------------------------------


@dataclass(frozen=True)
class Parametrization:
    """A tropical-module map into the functions compatible with `base`.

    Coordinate i is carried to `images[i]`; a coefficient vector is carried
    to the minimum of the shifted images.  Infinite coefficients drop their
    coordinate from the minimum.
    """

    base: Divisor
    images: tuple[PLFunction, ...]

    @property
    def graph(self) -> MetricGraph:
        return self.base.graph

    def member_image(self, coefficients: Sequence[object]) -> PLFunction:
        if len(coefficients) != len(self.images):
            raise ValueError("need one coefficient per coordinate")
        funcs: list[PLFunction] = []
        coeffs: list[object] = []
        for img, c in zip(self.images, coefficients):
            if c is INF:
                continue
            funcs.append(img)
            coeffs.append(c)
        if not funcs:
            raise ValueError("all coefficients are infinite")
        return tropical_combination(funcs, coeffs)

    def shifted(self, offsets: Sequence[object]) -> "Parametrization":
        """The same map with constants added coordinatewise."""
        if len(offsets) != len(self.images):
            raise ValueError("need one offset per coordinate")
        return Parametrization(
            self.base,
            tuple(img.shifted(c) for img, c in zip(self.images, offsets)),
        )

    def image_series(
        self, matroid: Matroid
    ) -> tuple[TropSubmodule, tuple[int, ...]]:
        """Image of the matroid's covector span, one generator per cocircuit.

        Returns the spanned submodule together with, per cocircuit, the index
        of its image among the stored generators (distinct cocircuits may
        collapse to the same function).  Independent members pull back to
        independent covectors, so the matroid rank is a certified bound on
        the independence rank of the image.
        """
        if matroid.n != len(self.images):
            raise ValueError("matroid ground size does not match the coordinate count")
        images = [self.member_image(w) for w in trop_generators(matroid)]
        sub = TropSubmodule(
            self.base,
            images,
            max_generators=max(GENERATOR_CAP, len(images)),
            rank_bound=matroid.rank_value,
        )
        assignment = tuple(sub.generators.index(g.normalised()) for g in images)
        return sub, assignment


def interval_phi(d: int, length: object = 1) -> Parametrization:
    """Slopes 0 through d on a single edge, based at d chips on the tail.

    Coordinate i maps to the linear function with constant slope i from the
    base vertex; the image of a covector span is then cut out by which slopes
    its members can take.
    """
    if d < 1:
        raise ValueError("need at least one chip")
    span = parse_rational(length)
    if span <= 0:
        raise ValueError("the interval must have positive length")
    graph = MetricGraph.build(["v", "w"], [("e", "v", "w", span)])
    base = Divisor(graph, {Point.at_vertex("v"): d})
    images = tuple(
        PLFunction.linear_interpolation(graph, {"v": 0, "w": i * span})
        for i in range(d + 1)
    )
    return Parametrization(base, images)


def loop_phi(d: int, circumference: object = 2, vertex: str = "v") -> Parametrization:
    """Tent functions on a circle, based at d chips on the marked vertex.

    Coordinate j maps to the function climbing with slope d - j for the first
    j/d of the circle and descending with slope j for the rest; its divisor
    moves all d chips to the peak.  Coordinate 0 is the constant.
    """
    if d < 1:
        raise ValueError("need at least one chip")
    size = parse_rational(circumference)
    if size <= 0:
        raise ValueError("the circle must have positive circumference")
    graph = MetricGraph.build([vertex], [("loop", vertex, vertex, size)])
    base = Divisor(graph, {Point.at_vertex(vertex): d})
    images: list[PLFunction] = [PLFunction.constant(graph, 0)]
    for j in range(1, d):
        peak_at = Fraction(j, d) * size
        peak = (d - j) * peak_at
        images.append(PLFunction(graph, {vertex: 0}, {"loop": [(peak_at, peak)]}))
    return Parametrization(base, tuple(images))


# -- realizability of canonical members ------------------------------------------------


@dataclass(frozen=True)
class InconvenientVertex:
    """A vertex whose steepest outgoing slope overpowers the downward total."""

    vertex: str
    level: Fraction
    slopes: tuple[int, ...]
    cycle: tuple[str, ...] | None


@dataclass(frozen=True)
class LevelTangent:
    """A maximal horizontal stretch of the function inside one edge."""

    edge: str
    lo: Fraction
    hi: Fraction
    level: Fraction
    cycle: tuple[str, ...] | None


@dataclass(frozen=True)
class RealizabilityReport:
    realizable: bool
    inconvenient: tuple[InconvenientVertex, ...]
    level_tangents: tuple[LevelTangent, ...]

    def failures(self) -> tuple[str, ...]:
        out = []
        for iv in self.inconvenient:
            if iv.cycle is None:
                out.append(f"no sublevel cycle through vertex {iv.vertex!r}")
        for lt in self.level_tangents:
            if lt.cycle is None:
                out.append(
                    f"no sublevel cycle for the horizontal stretch on edge {lt.edge!r}"
                )
        return tuple(out)


def _edge_maxima(phi: PLFunction) -> dict[str, Fraction]:
    out = {}
    for e in phi.graph.edges:
        vals = [phi.vertex_values[e.tail], phi.vertex_values[e.head]]
        vals.extend(x for _, x in phi.breaks[e.id])
        out[e.id] = max(vals)
    return out


def _multigraph_bridges(graph: MetricGraph, arcs: Sequence[str]) -> frozenset[str]:
    """Arcs whose removal disconnects the arc multigraph; self-loops never do."""
    adj: dict[str, list[tuple[str, str]]] = {v: [] for v in graph.vertices}
    for eid in arcs:
        e = graph.edge(eid)
        if e.tail == e.head:
            continue
        adj[e.tail].append((e.head, eid))
        adj[e.head].append((e.tail, eid))
    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    bridges: set[str] = set()
    counter = 0
    for root in graph.vertices:
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        stack: list[tuple[str, str | None, Iterable]] = [(root, None, iter(adj[root]))]
        while stack:
            v, entry, neighbours = stack[-1]
            moved = False
            for w, eid in neighbours:
                # skip only the arc we entered on; a parallel arc is a cycle
                if eid == entry:
                    continue
                if w in disc:
                    low[v] = min(low[v], disc[w])
                    continue
                disc[w] = low[w] = counter
                counter += 1
                stack.append((w, eid, iter(adj[w])))
                moved = True
                break
            if moved:
                continue
            stack.pop()
            if stack:
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[v])
                if low[v] > disc[parent]:
                    bridges.add(entry)
    return frozenset(bridges)


def _cycle_through(graph: MetricGraph, arcs: Sequence[str], eid: str):
    """Edge ids of a cycle through the arc, or None when it is a bridge."""
    e = graph.edge(eid)
    if e.tail == e.head:
        return (eid,)
    adj: dict[str, list[tuple[str, str]]] = {v: [] for v in graph.vertices}
    for aid in arcs:
        a = graph.edge(aid)
        if aid == eid or a.tail == a.head:
            continue
        adj[a.tail].append((a.head, aid))
        adj[a.head].append((a.tail, aid))
    prev: dict[str, tuple[str, str] | None] = {e.head: None}
    queue = deque([e.head])
    while queue:
        v = queue.popleft()
        if v == e.tail:
            break
        for w, aid in adj[v]:
            if w not in prev:
                prev[w] = (v, aid)
                queue.append(w)
    if e.tail not in prev:
        return None
    path: list[str] = []
    v = e.tail
    while prev[v] is not None:
        v, aid = prev[v]
        path.append(aid)
    return (eid, *reversed(path))


def muw_realizable(phi: PLFunction) -> RealizabilityReport:
    """Cycle test for realizability of a canonical-system member, after
    Moeller, Ulirsch, and Werner.

    Two conditions, each checked against the multigraph of edges lying
    entirely in the sublevel set at the relevant value.  At every
    inconvenient vertex (all outgoing slopes nonzero, the largest exceeding
    the total downward slope) the sublevel multigraph at the vertex's value
    must carry a cycle through the vertex.  And every maximal horizontal
    stretch must sit on an edge that lies on a cycle of its own sublevel
    multigraph; a stretch on a bridge, or on an edge that leaves the
    sublevel set, has no such cycle.  The report carries one witness cycle
    per obligation, None where the obligation fails.
    """
    graph = phi.graph
    if not in_complete_system(phi, graph.canonical_divisor()):
        raise ValueError("function is not a member of the canonical system")
    maxima = _edge_maxima(phi)
    edge_ids = [e.id for e in graph.edges]
    cache: dict[Fraction, tuple[tuple[str, ...], frozenset[str]]] = {}

    def sublevel(level: Fraction) -> tuple[tuple[str, ...], frozenset[str]]:
        if level not in cache:
            arcs = tuple(eid for eid in edge_ids if maxima[eid] <= level)
            non_bridge = frozenset(arcs) - _multigraph_bridges(graph, arcs)
            cache[level] = (arcs, non_bridge)
        return cache[level]

    inconvenient: list[InconvenientVertex] = []
    for v in graph.vertices:
        slopes = tuple(phi.outgoing_slopes(Point.at_vertex(v)))
        if not slopes or 0 in slopes:
            continue
        downward = -sum(s for s in slopes if s < 0)
        if max(slopes) <= downward:
            continue
        level = phi.vertex_values[v]
        arcs, non_bridge = sublevel(level)
        cycle = None
        for e, _ in graph.incident(v):
            if e.id in non_bridge:
                cycle = _cycle_through(graph, arcs, e.id)
                break
        inconvenient.append(InconvenientVertex(v, level, slopes, cycle))

    tangents: list[LevelTangent] = []
    for e in graph.edges:
        for lo, hi, slope in phi.segment_slopes(e.id):
            if slope != 0:
                continue
            level = phi.value(Point.on_edge(graph, e.id, lo))
            arcs, non_bridge = sublevel(level)
            cycle = _cycle_through(graph, arcs, e.id) if e.id in non_bridge else None
            tangents.append(LevelTangent(e.id, lo, hi, level, cycle))

    ok = all(x.cycle is not None for x in inconvenient) and all(
        x.cycle is not None for x in tangents
    )
    return RealizabilityReport(ok, tuple(inconvenient), tuple(tangents))


def realizable_closure_check(
    phi1: PLFunction, phi2: PLFunction, samples: int = 7
) -> bool:
    """Realizability of min(phi1, b + phi2) across the interaction window.

    Outside the window one argument dominates pointwise and the minimum
    degenerates to a single realizable function, so only offsets b between
    the extreme values of phi1 - phi2 produce genuinely mixed combinations.
    The window endpoints and evenly spaced interior offsets are tested
    exactly; both inputs must already pass the test themselves.
    """
    if samples < 2:
        raise ValueError("need at least two sample offsets")
    for phi in (phi1, phi2):
        if not muw_realizable(phi).realizable:
            raise ValueError("both arguments must be realizable members")
    hi = sup_difference(phi1, phi2)
    lo = -sup_difference(phi2, phi1)
    if lo == hi:
        return True
    step = Fraction(hi - lo, samples - 1)
    for k in range(samples):
        theta = tropical_min(phi1, phi2.shifted(lo + k * step))
        if not muw_realizable(theta).realizable:
            return False
    return True


# -- the incidence construction --------------------------------------------------------


def _flat_name(flat: frozenset) -> str:
    return "F" + "-".join(str(e) for e in sorted(flat))


@dataclass(frozen=True)
class CartwrightModel:
    """Incidence graph of a simple rank-3 matroid, one chip per element.

    Vertices are the matroid elements and its lines; an edge joins each
    element to every line through it.  The chips form a divisor of rank 2,
    and the rank-2 series through that divisor are governed by the adjoints
    of the matroid.
    """

    matroid: Matroid
    graph: MetricGraph
    divisor: Divisor
    element_vertices: tuple[str, ...]
    line_vertices: tuple[str, ...]
    lines: tuple[frozenset, ...]

    def edge_id(self, element: int, line_index: int) -> str:
        return f"e{element}_{self.line_vertices[line_index]}"

    def pencil(self, element: int) -> frozenset:
        """Indices of the lines through an element."""
        return frozenset(i for i, f in enumerate(self.lines) if element in f)


def _edge_length(lengths: object, eid: str) -> object:
    if isinstance(lengths, Mapping):
        if eid not in lengths:
            raise ValueError(f"no length given for edge {eid!r}")
        return lengths[eid]
    return lengths


def cartwright(
    matroid: Matroid, lengths: object = 1, verify: bool = True
) -> CartwrightModel:
    """Build the incidence model of a simple rank-3 matroid.

    `lengths` is one rational for every edge or a mapping from edge id to
    length.  With verify the chip divisor is certified to have rank 2 on
    the chip-firing lattice.
    """
    if matroid.rank_value != 3 or not matroid.is_simple():
        raise MatroidError("the incidence construction needs a simple rank-3 matroid")
    lines = matroid.flats(2)
    element_vertices = tuple(f"e{j}" for j in range(matroid.n))
    line_vertices = tuple(_flat_name(f) for f in lines)
    edges = []
    for i, f in enumerate(lines):
        for j in sorted(f):
            eid = f"e{j}_{line_vertices[i]}"
            edges.append((eid, f"e{j}", line_vertices[i], _edge_length(lengths, eid)))
    graph = MetricGraph.build(element_vertices + line_vertices, edges)
    divisor = Divisor(graph, {Point.at_vertex(v): 1 for v in element_vertices})
    model = CartwrightModel(
        matroid, graph, divisor, element_vertices, line_vertices, lines
    )
    if verify:
        got = divisor_rank(divisor)
        if got != 2:
            raise AssertionError(f"incidence chip divisor has rank {got}, expected 2")
    return model


def distinguished_function(
    model: CartwrightModel, element: int, c: object = Fraction(1, 2)
) -> PLFunction:
    """The member of the chip system pinning a chip at one element.

    Value c at the chosen element and at every line through it, zero
    elsewhere except for a slope-one climb of length c out of each other
    element of those lines.  Adding its divisor keeps the chip at the
    element and slides every other chip to distance c along its edge toward
    the common line, one edge per element because two elements lie on a
    unique line.
    """
    c = parse_rational(c)
    if c <= 0:
        raise ValueError("the climb distance must be positive")
    if not 0 <= element < model.matroid.n:
        raise ValueError("unknown element")
    values: dict[str, object] = {}
    for j, name in enumerate(model.element_vertices):
        values[name] = c if j == element else 0
    for i, name in enumerate(model.line_vertices):
        values[name] = c if element in model.lines[i] else 0
    breaks: dict[str, list] = {}
    for i, f in enumerate(model.lines):
        if element not in f:
            continue
        for j in sorted(f - {element}):
            eid = model.edge_id(j, i)
            if c >= model.graph.edge(eid).length:
                raise ValueError("climb distance reaches past the far end of an edge")
            breaks[eid] = [(c, c)]
    return PLFunction(model.graph, values, breaks)


@dataclass(frozen=True)
class AdjointSeries:
    """Rank-2 series on an incidence model, one generator per adjoint line.

    Pencils of the base matroid contribute a double climb out of their
    element; every other line of the adjoint contributes the indicator of
    its member flats.  `assignment` maps each cocircuit of the adjoint to
    the index of its generator image, and `component_lines` labels the chip
    complement components by the line vertex they contain.  `realizable`
    records caller-supplied knowledge of whether the base matroid has a
    linear representation; nothing here computes that.
    """

    model: CartwrightModel
    adjoint: Matroid
    series: TropSubmodule
    assignment: tuple[int, ...]
    component_lines: tuple[int, ...]
    realizable: bool | None = None

    def require_realizable(self) -> None:
        """Guard for consumers that need a realizable series to exist."""
        if self.realizable is None:
            raise NonRealizableError(
                "realizability of the base matroid was not supplied"
            )
        if not self.realizable:
            raise NonRealizableError(
                "the base matroid has no linear representation, so this series"
                " contains no realizable tropical linear series"
            )


def _pencil_generator(model: CartwrightModel, element: int) -> PLFunction:
    values: dict[str, object] = {name: 0 for name in model.element_vertices}
    values[model.element_vertices[element]] = 2
    for i, name in enumerate(model.line_vertices):
        values[name] = 1 if element in model.lines[i] else 0
    return PLFunction.linear_interpolation(model.graph, values)


def _indicator_generator(model: CartwrightModel, line_set: frozenset) -> PLFunction:
    values: dict[str, object] = {name: 0 for name in model.element_vertices}
    for i, name in enumerate(model.line_vertices):
        values[name] = 1 if i in line_set else 0
    return PLFunction.linear_interpolation(model.graph, values)


def _star_distance(model: CartwrightModel, line_index: int) -> PLFunction:
    """Distance to the closed star of a line vertex, by vertex interpolation.

    Unit edge lengths make every vertex distance an integer, and adjacent
    distances differ by exactly one: a geodesic reaching the line vertex has
    already passed through one of its elements, so the effective targets all
    sit on the element side of the bipartition and no two adjacent vertices
    tie.
    """
    graph = model.graph
    adj: dict[str, list[str]] = {v: [] for v in graph.vertices}
    for e in graph.edges:
        adj[e.tail].append(e.head)
        adj[e.head].append(e.tail)
    targets = {model.line_vertices[line_index]}
    targets.update(model.element_vertices[j] for j in sorted(model.lines[line_index]))
    dist = {v: 0 for v in targets}
    queue = deque(sorted(targets))
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return PLFunction.linear_interpolation(graph, dist)


def cartwright_series_from_adjoint(
    matroid: Matroid,
    adjoint: Matroid | None = None,
    verify: bool = True,
    realizable: bool | None = None,
) -> AdjointSeries:
    """Span the rank-2 series on the incidence model prescribed by an adjoint.

    `adjoint` defaults to the free adjoint.  With verify the construction
    cross-checks itself: every generator against an independent route
    through distances to line stars, the local matroid at the chip divisor
    against the adjoint, the series against the counting test for dimension
    2, and the distinguished one-chip members against their expected flats.
    """
    model = cartwright(matroid, verify=verify)
    W = free_adjoint(matroid) if adjoint is None else adjoint
    if W.n != len(model.lines):
        raise MatroidError("adjoint ground set must be the set of lines")
    if not is_adjoint(W, matroid):
        raise MatroidError("candidate matroid is not an adjoint")
    pencil_of = {model.pencil(j): j for j in range(matroid.n)}
    gens = []
    for g in W.flats(2):
        if g in pencil_of:
            gens.append(_pencil_generator(model, pencil_of[g]))
        else:
            gens.append(_indicator_generator(model, g))
    series = TropSubmodule(
        model.divisor,
        gens,
        max_generators=max(GENERATOR_CAP, len(gens)),
        rank_bound=W.rank_value,
    )
    if len(series.generators) != len(gens):
        raise AssertionError("generator profiles collapsed; the adjoint is degenerate")
    flats2 = W.flats(2)
    assignment = tuple(flats2.index(W.ground - c) for c in W.cocircuits())
    comps = complement_components(model.graph, model.divisor.support())
    line_index = {name: i for i, name in enumerate(model.line_vertices)}
    component_lines = []
    for comp in comps:
        named = [line_index[v] for v in comp.vertices if v in line_index]
        if len(named) != 1:
            raise AssertionError("a chip complement component lost its line vertex")
        component_lines.append(named[0])
    result = AdjointSeries(
        model, W, series, assignment, tuple(component_lines), realizable
    )
    if verify:
        _verify_adjoint_series(result)
    return result


def _verify_adjoint_series(adj: AdjointSeries) -> None:
    model, W, series = adj.model, adj.adjoint, adj.series
    graph = model.graph
    unit = all(e.length == 1 for e in graph.edges)
    if unit:
        psi = [_star_distance(model, i) for i in range(len(model.lines))]
        for k, c in enumerate(W.cocircuits()):
            picks = sorted(c)
            mixed = tropical_combination([psi[i] for i in picks], [0] * len(picks))
            if mixed.normalised() != series.generators[adj.assignment[k]]:
                raise AssertionError(
                    "star-distance route disagrees with a stored generator"
                )
    local = local_matroid(series)
    if local.matroid is None:
        raise AssertionError(
            "chip components carry no matroid: " + "; ".join(local.problems)
        )
    relabeled = Matroid(
        W.n,
        [frozenset(adj.component_lines[c] for c in b) for b in local.matroid.bases],
    )
    if relabeled != W:
        raise AssertionError("local matroid at the chips is not the adjoint")
    report = is_tls(series)
    if not (report.is_tls and report.baker_norine_rank == 2):
        raise AssertionError(
            "series fails the counting test for dimension 2: "
            f"independence {report.independence_rank},"
            f" counting rank {report.baker_norine_rank}"
        )
    if divisor_in_system(model.divisor, series) is None:
        raise AssertionError("chip divisor left its own series")
    if not nondegenerate(model.divisor, series):
        raise AssertionError("chip divisor should be a nondegenerate member")
    if unit:
        comps = complement_components(graph, model.divisor.support())
        for j in range(model.matroid.n):
            phi = distinguished_function(model, j)
            if span_coefficients(phi, series) is None:
                raise AssertionError("a one-chip member escaped the span")
            flat = frozenset(
                adj.component_lines[c] for c in component_flat(phi, comps)
            )
            if flat != model.pencil(j):
                raise AssertionError("a one-chip member selects the wrong pencil")


# -- quotient certificates -------------------------------------------------------------


def _flat_sort(f: frozenset) -> tuple:
    return (len(f), sorted(f))


def modular_cut_closure(
    matroid: Matroid, seeds: Iterable[Iterable[int]]
) -> frozenset:
    """Smallest modular cut of the flat lattice containing the seed flats.

    Grown by alternating upward closure with adding the meet of every
    modular pair (ranks of the pair summing to ranks of join and meet)
    already in the family.  Any single-step rank-lowering map keeping the
    seeds as flats must drop the rank of everything in the closure, so a
    closure that reaches the empty flat certifies that no such map exists.
    """
    flats = matroid.lattice.all_flats()
    cut: set[frozenset] = set()
    seeded = False
    for s in seeds:
        f = frozenset(s)
        if f not in flats:
            raise MatroidError(f"seed {sorted(f)} is not a flat")
        cut.update(g for g in flats if f <= g)
        seeded = True
    if not seeded:
        raise ValueError("need at least one seed flat")
    while True:
        added = False
        for a, b in combinations(sorted(cut, key=_flat_sort), 2):
            meet = a & b
            if meet in cut:
                continue
            join = matroid.closure(a | b)
            if matroid.rank(a) + matroid.rank(b) == matroid.rank(join) + matroid.rank(
                meet
            ):
                cut.update(g for g in flats if meet <= g)
                added = True
        if not added:
            return frozenset(cut)


def elementary_quotient(
    matroid: Matroid, seeds: Iterable[Iterable[int]]
) -> Matroid:
    """The one-step quotient whose rank drops exactly on the cut of the seeds.

    Bases are the independent sets of size rank - 1 whose closure stays out
    of the modular-cut closure.  Raises when the closure reaches the empty
    flat, since then no single-step quotient keeps every seed as a flat.
    """
    cut = modular_cut_closure(matroid, seeds)
    if frozenset() in cut:
        raise MatroidError("the seed flats force every flat into the cut")
    r = matroid.rank_value
    bases = [
        frozenset(c)
        for c in combinations(range(matroid.n), r - 1)
        if matroid.rank(c) == r - 1 and matroid.closure(c) not in cut
    ]
    return Matroid(matroid.n, bases)


def common_rank2_quotients(m1: Matroid, m2: Matroid) -> tuple[Matroid, ...]:
    """Every rank-2 matroid that is a quotient of both inputs.

    A rank-2 matroid is a loop flat plus at least two parallel classes, and
    a common quotient's flats must appear in both flat lattices, so the
    search runs over exact covers of the ground set by common flats.  It is
    exhaustive: an empty answer certifies nonexistence.
    """
    if m1.n != m2.n:
        raise MatroidError("ground sets differ")
    ground = frozenset(range(m1.n))
    common = sorted(
        m1.lattice.all_flats() & m2.lattice.all_flats(), key=_flat_sort
    )
    results: list[Matroid] = []
    for loops_flat in common:
        if loops_flat == ground:
            continue
        pool = [f for f in common if loops_flat < f and f != ground]

        def extend(remaining: frozenset, parts: tuple[frozenset, ...]) -> None:
            if not remaining:
                if len(parts) < 2:
                    return
                q = Matroid.from_flats(m1.n, {loops_flat, ground, *parts})
                if q.rank_value == 2 and is_quotient(q, m1) and is_quotient(q, m2):
                    results.append(q)
                return
            x = min(remaining)
            for f in pool:
                if x in f and (f - loops_flat) <= remaining:
                    extend(remaining - (f - loops_flat), parts + (f,))

        extend(ground - loops_flat, ())
    return tuple(results)


# -- named matroids ---------------------------------------------------------------------


_FANO_LINES = (
    (0, 1, 2),
    (0, 3, 4),
    (0, 5, 6),
    (1, 3, 5),
    (1, 4, 6),
    (2, 3, 6),
    (2, 4, 5),
)

_VAMOS_PLANES = (
    (0, 1, 2, 3),
    (0, 3, 4, 5),
    (1, 2, 4, 5),
    (0, 3, 6, 7),
    (1, 2, 6, 7),
)


def fano_matroid() -> Matroid:
    """The seven-point projective plane of order two."""
    return Matroid.from_rank2_flats(7, _FANO_LINES)


def non_fano_matroid() -> Matroid:
    """The Fano configuration with one three-point line broken up."""
    return Matroid.from_rank2_flats(7, _FANO_LINES[:-1])


def vamos_matroid() -> Matroid:
    """Eight points of rank four with five four-point planes; the smallest
    matroid with no linear representation over any field."""
    return Matroid.from_nonspanning_circuits(4, 8, _VAMOS_PLANES)


def relaxed_vamos_matroid() -> Matroid:
    """The same configuration with the last four-point plane relaxed."""
    return Matroid.from_nonspanning_circuits(4, 8, _VAMOS_PLANES[:-1])


# -- the gallery -----------------------------------------------------------------------


@dataclass(frozen=True)
class GalleryCheck:
    label: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class GalleryReport:
    name: str
    checks: tuple[GalleryCheck, ...]
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> tuple[str, ...]:
        out = []
        for c in self.checks:
            mark = "ok" if c.passed else "FAIL"
            text = f"[{mark:>4}] {c.label}"
            if c.detail:
                text += f" ({c.detail})"
            out.append(text)
        return tuple(out)


def _barbell() -> GalleryReport:
    graph = MetricGraph.build(
        ["v", "w"],
        [("loop_l", "v", "v", 2), ("bridge", "v", "w", 1), ("loop_r", "w", "w", 2)],
    )
    canonical = graph.canonical_divisor()
    peak_l = PLFunction(graph, {"v": 1, "w": 0}, {"loop_l": [(1, 2)]})
    peak_r = PLFunction(graph, {"v": 0, "w": 1}, {"loop_r": [(1, 2)]})
    span = TropSubmodule(canonical, [peak_l, peak_r])
    checks = []
    rep = is_tls(span)
    checks.append(
        GalleryCheck(
            "the two loop peaks span a tropical linear series of dimension 1",
            rep.is_tls and rep.baker_norine_rank == 1,
            f"independence {rep.independence_rank},"
            f" counting rank {rep.baker_norine_rank}",
        )
    )
    checks.append(
        GalleryCheck(
            "the canonical divisor itself is not in the spanned system",
            divisor_in_system(canonical, span) is None,
        )
    )
    full = complete_system(canonical)
    rep_full = is_tls(full)
    checks.append(
        GalleryCheck(
            "the full canonical module is not a tropical linear series",
            not rep_full.is_tls
            and rep_full.independence_rank == 3
            and rep_full.baker_norine_rank == 1,
            f"independence {rep_full.independence_rank} exceeds counting rank"
            f" {rep_full.baker_norine_rank} plus one",
        )
    )
    battery: list[tuple[str, PLFunction]] = [
        ("left peak", peak_l),
        ("right peak", peak_r),
        ("their minimum", tropical_min(peak_l, peak_r)),
        (
            "a shifted minimum",
            tropical_combination([peak_l, peak_r], [Fraction(1, 2), 0]),
        ),
        ("the constant", PLFunction.constant(graph, 0)),
        (
            "a bridge stretch",
            PLFunction(
                graph,
                {"v": 0, "w": Fraction(-2, 3)},
                {"bridge": [(Fraction(1, 3), 0)]},
            ),
        ),
    ]
    for i, ci in enumerate(cells(full).maximal):
        cell = cells(full).cells[ci]
        member = divisor_in_system(cell.representative, full)
        if member is not None:
            battery.append((f"cell {i} representative", member))
    agree = True
    details = []
    for label, phi in battery:
        in_span = span_coefficients(phi, span) is not None
        real = muw_realizable(phi).realizable
        agree = agree and in_span == real
        details.append(
            f"{label}: span {'yes' if in_span else 'no'},"
            f" realizable {'yes' if real else 'no'}"
        )
    checks.append(
        GalleryCheck(
            "realizability agrees with span membership across the sample battery",
            agree,
            "; ".join(details),
        )
    )
    notes = (
        "the canonical class mixes a two-parameter family of bridge divisors with"
        " one-parameter loop families, so no single series carries all of it",
        "the spanned series collects exactly the realizable members among the samples",
    )
    return GalleryReport("barbell", tuple(checks), notes)


def _luo() -> GalleryReport:
    graph = MetricGraph.build(
        ["p", "q", "s", "x", "y", "z"],
        [
            ("ps", "p", "s", 1),
            ("sq", "s", "q", 1),
            ("qp", "q", "p", 1),
            ("px1", "p", "x", 1),
            ("px2", "p", "x", 1),
            ("px3", "p", "x", 1),
            ("sz1", "s", "z", 1),
            ("sz2", "s", "z", 1),
            ("sz3", "s", "z", 1),
            ("qy1", "q", "y", 1),
            ("qy2", "q", "y", 1),
            ("qy3", "q", "y", 1),
        ],
    )
    base = Divisor(graph, {Point.at_vertex(v): 1 for v in ("p", "q", "s")})
    checks = [
        GalleryCheck(
            "the three chips on the central circle have rank 1",
            divisor_rank(base) == 1,
        )
    ]
    profiles = {
        "x": {"p": 1, "q": 0, "s": 0, "x": 2, "y": 0, "z": 0},
        "y": {"p": 0, "q": 1, "s": 0, "x": 0, "y": 2, "z": 0},
        "z": {"p": 0, "q": 0, "s": 1, "x": 0, "y": 0, "z": 2},
    }
    forced = {}
    for target, values in profiles.items():
        phi = PLFunction.linear_interpolation(graph, values)
        forced[target] = phi
        stacked = Divisor(graph, {Point.at_vertex(target): 3})
        reduced, witness = reduced_divisor(base, Point.at_vertex(target))
        checks.append(
            GalleryCheck(
                f"every chip must travel at once to reach {target}",
                base + phi.divisor() == stacked
                and reduced == stacked
                and witness.normalised() == phi.normalised(),
                "integer slopes forbid moving one chip through a three-edge bundle",
            )
        )
    slopes = {t: forced[t].segment_slopes("sq")[0][2] for t in ("x", "y", "z")}
    checks.append(
        GalleryCheck(
            "the three forced members take three distinct slopes along one arc",
            len(set(slopes.values())) == 3,
            f"slopes {sorted(slopes.values())} along the arc between s and q",
        )
    )
    span = TropSubmodule(base, [forced[t] for t in ("x", "y", "z")])
    rep = is_tls(span)
    checks.append(
        GalleryCheck(
            "their span is tropically independent beyond any series of dimension 1",
            rep.independence_rank == 3
            and rep.baker_norine_rank == 1
            and not rep.is_tls,
            f"independence {rep.independence_rank},"
            f" counting rank {rep.baker_norine_rank}",
        )
    )
    notes = (
        "a series of dimension 1 witnessing the rank would contain the three"
        " forced members, but they are already independent",
    )
    return GalleryReport("luo", tuple(checks), notes)


def _loop_of_loops_graph(l1: Fraction, l2: Fraction, l3: Fraction) -> MetricGraph:
    half = Fraction(1, 2)
    vertices = [
        "v1", "w1", "v2", "w2", "v3", "w3",
        "u1", "u1p", "u2", "u2p", "u3", "u3p",
    ]
    edges = [
        # three circles of circumference 2, connector ends antipodal and the
        # marked points u, u' at the midpoints of the two half arcs
        ("top_a", "w1", "u3", half),
        ("top_b", "u3", "v2", half),
        ("top_c", "v2", "u3p", half),
        ("top_d", "u3p", "w1", half),
        ("left_a", "v1", "u2", half),
        ("left_b", "u2", "w3", half),
        ("left_c", "w3", "u2p", half),
        ("left_d", "u2p", "v1", half),
        ("right_a", "w2", "u1", half),
        ("right_b", "u1", "v3", half),
        ("right_c", "v3", "u1p", half),
        ("right_d", "u1p", "w2", half),
        ("e1", "v1", "w1", l1),
        ("e2", "v2", "w2", l2),
        ("e3", "v3", "w3", l3),
    ]
    return MetricGraph.build(vertices, edges)


def _loop_of_loops(
    l1: object = 5,
    l2: object = 4,
    l3: object = 3,
    probes: Sequence[object] | None = None,
) -> GalleryReport:
    l1, l2, l3 = (parse_rational(x) for x in (l1, l2, l3))
    if not l1 > l2 > l3 > 0:
        raise ValueError("connector lengths must satisfy l1 > l2 > l3 > 0")
    if not l2 + l3 > l1:
        raise ValueError("connector lengths must satisfy l2 + l3 > l1")
    graph = _loop_of_loops_graph(l1, l2, l3)
    balanced = (l1 + l2 - l3) / 2
    if probes is None:
        candidates = (balanced - 1, balanced, balanced + 1)
    else:
        candidates = tuple(parse_rational(x) for x in probes)
    xs = tuple(x for x in candidates if l1 - l2 <= x <= l2)
    if not xs:
        raise ValueError("no probe position lies in the allowed window")
    checks = []
    for x in xs:
        d = Divisor(
            graph,
            {
                Point.at_vertex("v1"): 1,
                Point.at_vertex("w3"): 1,
                Point.on_edge(graph, "e2", x): 1,
            },
        )
        checks.append(
            GalleryCheck(
                f"x = {x}: the probe divisor has rank 1", divisor_rank(d) == 1
            )
        )
        witnesses = []
        for u, eid, off in (
            ("u1", "e1", l3 - l2 + x),
            ("u3", "e3", l3 - (l1 - x)),
        ):
            reduced, witness = reduced_divisor(d, Point.at_vertex(u))
            witnesses.append(witness)
            expected = Divisor(
                graph,
                {Point.at_vertex(u): 2, Point.on_edge(graph, eid, off): 1},
            )
            checks.append(
                GalleryCheck(
                    f"x = {x}: seen from {u} the class is two chips there plus"
                    " one on the opposite connector",
                    reduced == expected,
                    f"extra chip at {Point.on_edge(graph, eid, off).describe()}",
                )
            )
        reduced2, witness2 = reduced_divisor(d, Point.at_vertex("u2"))
        witnesses.insert(1, witness2)
        third = [p for p in reduced2.support() if p != Point.at_vertex("u2")]
        on_e2 = all(
            (not p.is_vertex and p.edge == "e2") or p.vertex in ("v2", "w2")
            for p in third
        )
        checks.append(
            GalleryCheck(
                f"x = {x}: seen from u2 the class is two chips there plus one"
                " on the opposite connector",
                reduced2[Point.at_vertex("u2")] == 2 and on_e2,
            )
        )
        triple_rank = independence_rank(TropSubmodule(d, witnesses))
        checks.append(
            GalleryCheck(
                f"x = {x}: a dependence among the three forced members appears"
                " exactly at the balanced position",
                (triple_rank == 2) == (x == balanced),
                f"independence rank {triple_rank}, balanced position {balanced}",
            )
        )
        if x == balanced:
            inner = [
                reduced_divisor(d, Point.at_vertex(u))[1]
                for u in ("u1p", "u2p", "u3p")
            ]
            rep = is_tls(TropSubmodule(d, witnesses + inner))
            checks.append(
                GalleryCheck(
                    f"x = {x}: the six marked-point members span a series of"
                    " dimension 1",
                    rep.is_tls and rep.baker_norine_rank == 1,
                    f"independence {rep.independence_rank},"
                    f" counting rank {rep.baker_norine_rank}",
                )
            )
    notes = (
        "away from the balanced position three independent members are forced,"
        " one more than a series of dimension 1 admits",
        "whether a divisor class supports a series here depends on the exact"
        " position of its chips, not only on the graph",
    )
    return GalleryReport("loop_of_loops", tuple(checks), notes)


def _interval_translate(d: int = 7) -> Parametrization:
    par = interval_phi(d)
    shifts = tuple(
        Fraction((d - i) * (d + 1 - i), 2 * (d + 1)) for i in range(d + 1)
    )
    return par.shifted(shifts)


def _relabel_by_slope(local: Matroid, n: int) -> Matroid:
    # component k of the interval complement carries envelope slope n-1-k
    return Matroid(
        n, [frozenset(n - 1 - c for c in b) for b in local.bases]
    )


def _vamos() -> GalleryReport:
    m = vamos_matroid()
    par = _interval_translate(7)
    sub, _ = par.image_series(m)
    checks = []
    rep = is_tls(sub)
    checks.append(
        GalleryCheck(
            "the eight-slope image of the covector span is a series of dimension 3",
            rep.is_tls and rep.baker_norine_rank == 3 and rep.independence_rank == 4,
            f"independence {rep.independence_rank},"
            f" counting rank {rep.baker_norine_rank}",
        )
    )
    envelope = par.member_image([0] * 8)
    translated = translate(sub, envelope)
    comps = complement_components(par.graph, translated.base.support())
    local = local_matroid(translated)
    checks.append(
        GalleryCheck(
            "the local matroid at the envelope divisor is the matroid itself",
            local.matroid is not None
            and len(comps) == 8
            and _relabel_by_slope(local.matroid, 8) == m,
            f"{len(comps)} complement components",
        )
    )
    planes = tuple(frozenset(p) for p in _VAMOS_PLANES[:3])
    selected = []
    for plane in planes:
        member = par.member_image([INF if i in plane else 0 for i in range(8)])
        picked = frozenset(
            7 - c for c in component_flat(difference(member, envelope), comps)
        )
        selected.append(picked == plane)
    checks.append(
        GalleryCheck(
            "the three designated members select the three special planes as flats",
            all(selected),
            ", ".join(sorted("".join(map(str, sorted(p))) for p in planes)),
        )
    )
    cut = modular_cut_closure(m, planes)
    checks.append(
        GalleryCheck(
            "no single-step quotient keeps all three planes: their cut collapses",
            frozenset() in cut,
            f"the closure reaches {len(cut)} flats including the empty one",
        )
    )
    single = modular_cut_closure(m, [planes[0]])
    control = frozenset() not in single
    if control:
        q = elementary_quotient(m, [planes[0]])
        control = (
            q.rank_value == 3
            and is_quotient(q, m)
            and frozenset(planes[0]) in q.lattice.all_flats()
        )
    checks.append(
        GalleryCheck(
            "one plane alone does admit a quotient, so the collapse is no artifact",
            control,
        )
    )
    notes = (
        "pairs of the three planes are modular, so their meets join any cut"
        " containing them and drag it down to the empty flat",
        "a series of dimension 2 containing the three designated members would"
        " make its local matroid a rank-3 quotient keeping all three planes as"
        " flats; the collapse rules that out",
    )
    return GalleryReport("vamos", tuple(checks), notes)


def _vamos_relaxation(
    q1: Matroid | None = None, q2: Matroid | None = None
) -> GalleryReport:
    if q1 is None or q2 is None:
        raise ValueError(
            "this scenario takes two rank-3 quotient matroids as inputs q1 and"
            " q2; build them with elementary_quotient or supply them from data"
        )
    m = relaxed_vamos_matroid()
    checks = []
    for tag, q in (("q1", q1), ("q2", q2)):
        checks.append(
            GalleryCheck(
                f"{tag} is a rank-3 quotient of the relaxed matroid",
                q.n == m.n and q.rank_value == 3 and is_quotient(q, m),
            )
        )
    par = _interval_translate(7)
    sub, _ = par.image_series(m)
    rep = is_tls(sub)
    checks.append(
        GalleryCheck(
            "the image of the relaxed covector span is a series of dimension 3",
            rep.is_tls and rep.baker_norine_rank == 3,
            f"independence {rep.independence_rank},"
            f" counting rank {rep.baker_norine_rank}",
        )
    )
    envelope = par.member_image([0] * 8)
    comps = complement_components(
        par.graph, (sub.base + envelope.divisor()).support()
    )
    for tag, q in (("q1", q1), ("q2", q2)):
        qsub, _ = par.image_series(q)
        qrep = is_tls(qsub)
        inside = span_coefficients(envelope, qsub) is not None
        local = local_matroid(translate(qsub, envelope))
        checks.append(
            GalleryCheck(
                f"the image of {tag} is a series of dimension 2 carrying {tag}"
                " as its local matroid",
                qrep.is_tls
                and qrep.baker_norine_rank == 2
                and inside
                and local.matroid is not None
                and len(comps) == 8
                and _relabel_by_slope(local.matroid, 8) == q,
                f"independence {qrep.independence_rank},"
                f" counting rank {qrep.baker_norine_rank}",
            )
        )
    found = common_rank2_quotients(q1, q2)
    checks.append(
        GalleryCheck(
            "the exhaustive search finds no common rank-2 quotient",
            len(found) == 0,
            "none found" if not found else f"found {len(found)}",
        )
    )
    notes = (
        "a series of dimension 1 inside both images would make its local"
        " matroid a common rank-2 quotient of the two supplied matroids",
    )
    return GalleryReport("vamos_relaxation", tuple(checks), notes)


def _hyperelliptic_chain() -> GalleryReport:
    graph = MetricGraph.build(
        ["v1", "w2", "v2", "w3"],
        [
            ("loop1", "v1", "v1", 2),
            ("bridge1", "v1", "w2", 1),
            ("mid_top", "w2", "v2", 1),
            ("mid_bot", "w2", "v2", 1),
            ("bridge2", "v2", "w3", 1),
            ("loop3", "w3", "w3", 2),
        ],
    )
    canonical = graph.canonical_divisor()
    ramp = {"v1": 0, "w2": 1, "v2": 2, "w3": 5}
    samples = {
        "all four chips at the far vertex": PLFunction.linear_interpolation(
            graph, ramp
        ),
        "two chips at the vertex, two opposite": PLFunction(
            graph, ramp, {"loop3": [(1, 6)]}
        ),
        "all four chips opposite the vertex": PLFunction(
            graph, ramp, {"loop3": [(1, 7)]}
        ),
        "chip pairs at the two quarter points": PLFunction(
            graph,
            ramp,
            {"loop3": [(Fraction(1, 2), 6), (Fraction(3, 2), 6)]},
        ),
    }
    checks = []
    for label, phi in samples.items():
        moved = canonical + phi.divisor()
        on_loop = all(
            p.vertex == "w3" if p.is_vertex else p.edge == "loop3"
            for p in moved.support()
        )
        report = muw_realizable(phi)
        awkward = tuple(iv.vertex for iv in report.inconvenient)
        checks.append(
            GalleryCheck(
                f"{label}: realizable, every chip on the third loop",
                moved.is_effective()
                and on_loop
                and report.realizable
                and awkward == ("v2",),
                f"inconvenient vertices {list(awkward)}",
            )
        )
    span = TropSubmodule(canonical, list(samples.values()))
    r_ind = independence_rank(span)
    checks.append(
        GalleryCheck(
            "four realizable members are tropically independent",
            r_ind == 4,
            f"independence rank {r_ind}",
        )
    )
    canonical_rank = divisor_rank(canonical)
    checks.append(
        GalleryCheck(
            "the canonical rank is 2, capping any series at independence 3",
            canonical_rank == 2,
            f"canonical rank {canonical_rank}",
        )
    )
    complex_ = cells(span)
    top = max(cell.dimension for cell in complex_.maximal_cells())
    checks.append(
        GalleryCheck(
            "the sampled family moves in a three-dimensional cell",
            top == 3,
            f"maximal cell dimensions"
            f" {sorted({cell.dimension for cell in complex_.maximal_cells()})}",
        )
    )
    checks.append(
        GalleryCheck(
            "the constant member of the canonical system is not realizable",
            not muw_realizable(PLFunction.constant(graph, 0)).realizable,
            "its horizontal stretches run over the two bridges",
        )
    )
    pair = (
        samples["two chips at the vertex, two opposite"],
        samples["chip pairs at the two quarter points"],
    )
    checks.append(
        GalleryCheck(
            "pairwise minima of realizable members stay realizable across the"
            " window",
            realizable_closure_check(*pair),
        )
    )
    notes = (
        "chips confined to the third loop move with three degrees of freedom,"
        " one more than any series inside the canonical class can carry",
        "so the realizable members here are not the members of a single series",
    )
    return GalleryReport("hyperelliptic_chain", tuple(checks), notes)


_SCENARIOS = {
    "barbell": _barbell,
    "luo": _luo,
    "loop_of_loops": _loop_of_loops,
    "vamos": _vamos,
    "vamos_relaxation": _vamos_relaxation,
    "hyperelliptic_chain": _hyperelliptic_chain,
}

GALLERY_NAMES = tuple(_SCENARIOS)


def gallery(name: str, **params) -> GalleryReport:
    """Run one scripted scenario and machine-check its advertised conclusions."""
    try:
        runner = _SCENARIOS[name]
    except KeyError:
        raise ValueError(
            f"unknown scenario {name!r}; choose one of {', '.join(GALLERY_NAMES)}"
        ) from None
    return runner(**params)
