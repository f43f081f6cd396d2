"""Finitely generated submodules of R(D) and their linear-series invariants.

A submodule is spanned by finitely many PL functions under pointwise minimum
and addition of constants.  The coefficient space of a generating set of size
k carries a polyhedral subdivision: a region collects the coefficient vectors
whose min-combination is attained by one fixed generator subset on each edge
of the order refinement.  Each region maps affine-linearly to a cell of
divisors, and everything here (cells of the linear system, dimensions,
residual constraints, nondegeneracy) is computed from those regions with
exact rational arithmetic.

The two ranks have different engines.  The independence rank is the tropical
rank of the evaluation matrix on a canonical sample set, cross-checked
against the cell dimension where cell enumeration is affordable and against
a denser sample grid where it is not.  The Baker-Norine rank certifies
degree-r subtraction over all lattice divisors of a given denominator; each
candidate reduces to difference constraints (choose an attainment set per
constraint point), decided by Bellman-Ford, never by sampling coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from math import comb

from .affine import (
    CanonicalSystem,
    Row,
    canonicalise,
    equality_rows,
    feasible,
    make_row,
    project,
    satisfies,
)
from .chip import equivalence_witness, lattice_for
from .errors import BudgetError, candidate_budget, region_budget
from .exact import ExactnessError, lcm
from .graph import ClosedSubset, Divisor, Edge, MetricGraph, Point, common_refinement
from .plfun import (
    PLFunction,
    in_complete_system,
    sup_difference,
    tropical_combination,
)
from .troplin import TropicalMatrix, max_independent_rows

DEGREE_CAP = 12
GENERATOR_CAP = 12

_F0 = Fraction(0)
_F1 = Fraction(1)


# -- linear expressions in the coefficient variables ---------------------------
# an expression is (terms, constant); constraint rows compare two of them

def _expr(terms: dict[int, Fraction] | None = None, const: object = 0):
    return (dict(terms or {}), Fraction(const))


def _expr_sub(e1, e2):
    terms = dict(e1[0])
    for j, c in e2[0].items():
        terms[j] = terms.get(j, _F0) - c
    return (terms, e1[1] - e2[1])


def _expr_scale(e, c):
    c = Fraction(c)
    return ({j: v * c for j, v in e[0].items()}, e[1] * c)


def _expr_value(e, point: list[Fraction]) -> Fraction:
    terms, const = e
    return const + sum(c * point[j] for j, c in terms.items())


def _leq_row(n: int, lhs, rhs, strict: bool = False) -> Row:
    diff = _expr_sub(lhs, rhs)
    return make_row(n, diff[0], -diff[1], strict=strict)


def _eq_rows(n: int, lhs, rhs) -> list[Row]:
    return [_leq_row(n, lhs, rhs), _leq_row(n, rhs, lhs)]


@dataclass(frozen=True)
class _EdgeData:
    """One edge of the order refinement with per-generator affine data."""

    eid: str
    base_eid: str
    lo: Fraction
    hi: Fraction
    length: Fraction
    values: tuple[Fraction, ...]  # at the tail endpoint
    slopes: tuple[int, ...]       # tail-to-head


class TropSubmodule:
    """Span of finitely many functions in R(D) under min and constants."""

    def __init__(
        self,
        base: Divisor,
        generators,
        max_generators: int = GENERATOR_CAP,
        rank_bound: int | None = None,
    ):
        self.base = base
        self.graph = base.graph
        if base.degree > DEGREE_CAP:
            raise BudgetError(
                f"base divisor degree {base.degree} exceeds the cap {DEGREE_CAP}"
            )
        gens: list[PLFunction] = []
        for g in generators:
            if g.graph != self.graph:
                raise ValueError("generator lives on a different graph")
            if not in_complete_system(g, base):
                raise ValueError("generator is not compatible with the base divisor")
            g = g.normalised()
            if g not in gens:
                gens.append(g)
        if not gens:
            raise ValueError("need at least one generator")
        if len(gens) > max_generators:
            raise BudgetError(f"{len(gens)} generators exceed the cap {max_generators}")
        self.generators: tuple[PLFunction, ...] = tuple(gens)
        if rank_bound is not None and rank_bound < 1:
            raise ValueError("rank bound must be positive")
        self.rank_bound = rank_bound

        breakpoints = [
            Point.on_edge(self.graph, eid, t)
            for g in self.generators
            for eid, pts in g.breaks.items()
            for t, _ in pts
        ]
        self.refinement = common_refinement(self.graph, breakpoints, base.support())
        self.refined = self.refinement.graph
        self._edges: list[_EdgeData] = []
        for e in self.refined.edges:
            base_eid, lo, hi = self.refinement.span(e.id)
            tail = Point.on_edge(self.graph, base_eid, lo)
            head = Point.on_edge(self.graph, base_eid, hi)
            values = tuple(g.value(tail) for g in self.generators)
            slopes = []
            for g, v in zip(self.generators, values):
                s = (g.value(head) - v) / e.length
                assert s.denominator == 1, "refinement misses a breakpoint"
                slopes.append(int(s))
            self._edges.append(
                _EdgeData(e.id, base_eid, lo, hi, e.length, values, tuple(slopes))
            )
        self._edge_index = {ed.eid: i for i, ed in enumerate(self._edges)}
        self._base_refined = self.refinement.transport_divisor(base)
        self._cells: CellComplex | None = None
        self._bn_cache: dict[int, int] = {}

    @property
    def size(self) -> int:
        return len(self.generators)

    def member(self, coefficients) -> PLFunction:
        """The combination min_i(generator_i + coefficients[i])."""
        return tropical_combination(self.generators, list(coefficients))

    def __repr__(self) -> str:
        return (
            f"TropSubmodule(deg {self.base.degree} base, "
            f"{len(self.generators)} generators)"
        )


# -- membership -----------------------------------------------------------------


def span_coefficients(phi: PLFunction, sub: TropSubmodule) -> list[Fraction] | None:
    """Coefficients writing phi as a min-combination of the generators, or None.

    Projection is exact: the tightest admissible coefficient for each
    generator is sup(phi - g), and phi lies in the span iff the combination
    with those coefficients gives phi back.
    """
    if phi.graph != sub.graph:
        raise ValueError("function lives on a different graph")
    coeffs = [sup_difference(phi, g) for g in sub.generators]
    if sub.member(coeffs) == phi:
        return coeffs
    return None


def _in_span(phi: PLFunction, functions) -> bool:
    functions = list(functions)
    if not functions:
        return False
    coeffs = [sup_difference(phi, g) for g in functions]
    return tropical_combination(functions, coeffs) == phi


def divisor_in_system(d0: Divisor, sub: TropSubmodule) -> PLFunction | None:
    """A member function carrying the base divisor to d0, or None.

    d0 belongs to the system iff some member phi has base + div(phi) = d0;
    the connecting function of the divisor class is unique up to a constant,
    so one membership test decides.
    """
    phi = equivalence_witness(sub.base, d0)
    if phi is None:
        return None
    phi = phi.normalised()
    if span_coefficients(phi, sub) is None:
        return None
    return phi


# -- the region subdivision of coefficient space ----------------------------------


def _edge_patterns(sub: TropSubmodule, edge: _EdgeData):
    """Locally feasible attainment patterns on one refined edge.

    A pattern is a tuple of disjoint generator tuples, one per piece of the
    lower envelope, with strictly decreasing slopes along the edge.  Returns
    (pattern, rows) pairs with the edge-local constraint block over the k
    coefficient variables; patterns whose own block is infeasible are
    dropped here.
    """
    k = sub.size
    classes: dict[int, list[int]] = {}
    for i, s in enumerate(edge.slopes):
        classes.setdefault(s, []).append(i)
    slopes_desc = sorted(classes, reverse=True)

    patterns: list[tuple[tuple[int, ...], ...]] = []

    def extend(start: int, chosen: list[tuple[int, ...]]):
        if chosen:
            patterns.append(tuple(chosen))
        for idx in range(start, len(slopes_desc)):
            members = classes[slopes_desc[idx]]
            for size in range(1, len(members) + 1):
                for subset in combinations(members, size):
                    chosen.append(subset)
                    extend(idx + 1, chosen)
                    chosen.pop()

    extend(0, [])

    out = []
    for pattern in patterns:
        rows = _pattern_rows(sub, edge, pattern)
        if feasible(rows, k) is not None:
            out.append((pattern, rows))
    return out


def _pattern_rows(sub: TropSubmodule, edge: _EdgeData, pattern) -> list[Row]:
    k = sub.size
    rows: list[Row] = []
    reps = [piece[0] for piece in pattern]
    vals = edge.values
    slopes = edge.slopes

    def line_at_tail(i):
        return _expr({i: _F1}, vals[i])

    # generators sharing a piece agree on the whole edge
    for piece in pattern:
        for i in piece[1:]:
            rows.extend(_eq_rows(k, line_at_tail(i), line_at_tail(piece[0])))

    q = len(pattern)
    heights = [line_at_tail(r) for r in reps]  # piece value at the tail
    drops = [slopes[reps[j]] - slopes[reps[j + 1]] for j in range(q - 1)]
    # crossing j sits at (height_{j+1} - height_j) / drop_j from the tail
    nums = [_expr_sub(heights[j + 1], heights[j]) for j in range(q - 1)]

    if q > 1:
        rows.append(_leq_row(k, _expr(), nums[0], strict=True))  # 0 < first
        rows.append(
            _leq_row(k, nums[-1], _expr(const=edge.length * drops[-1]), strict=True)
        )  # last < length
        for j in range(q - 2):
            rows.append(
                _leq_row(
                    k,
                    _expr_scale(nums[j], drops[j + 1]),
                    _expr_scale(nums[j + 1], drops[j]),
                    strict=True,
                )
            )

    # every inactive generator stays weakly above each envelope piece at both
    # ends of the piece; a parallel line must stay strictly above
    active = {i for piece in pattern for i in piece}
    for j in range(q):
        s_j = slopes[reps[j]]
        ends = []
        if j == 0:
            ends.append(_expr())
        else:
            ends.append(_expr_scale(nums[j - 1], Fraction(1, drops[j - 1])))
        if j == q - 1:
            ends.append(_expr(const=edge.length))
        else:
            ends.append(_expr_scale(nums[j], Fraction(1, drops[j])))
        for l in range(k):
            if l in active:
                continue
            strict = slopes[l] == s_j
            for tau in ends:
                piece_val = _expr_sub(heights[j], _expr_scale(tau, -s_j))
                line_val = _expr_sub(line_at_tail(l), _expr_scale(tau, -slopes[l]))
                rows.append(_leq_row(k, piece_val, line_val, strict=strict))
    return rows


@dataclass
class _RegionType:
    patterns: tuple  # one pattern per refined edge, in edge order
    witness: list[Fraction]
    cell_index: int = -1


def _enumerate_types(
    sub: TropSubmodule, extra_rows: list[Row] | None = None, gauge: bool = True
) -> list[_RegionType]:
    k = sub.size
    per_edge = [_edge_patterns(sub, ed) for ed in sub._edges]
    base_rows: list[Row] = list(extra_rows or [])
    if gauge:
        base_rows.extend(equality_rows(k, {0: 1}, 0))
    start = feasible(base_rows, k)
    if start is None:
        return []
    budget = region_budget()
    probes = 0
    types: list[_RegionType] = []

    def dfs(edge_idx: int, rows: list[Row], witness: list[Fraction], chosen):
        nonlocal probes
        if edge_idx == len(per_edge):
            if len(types) >= budget:
                raise BudgetError("region enumeration exceeded the budget")
            types.append(_RegionType(tuple(chosen), list(witness)))
            return
        for pattern, block in per_edge[edge_idx]:
            if all(satisfies(witness, r) for r in block):
                chosen.append(pattern)
                dfs(edge_idx + 1, rows + block, witness, chosen)
                chosen.pop()
                continue
            probes += 1
            if probes > 50 * budget:
                raise BudgetError("region search exceeded the probe budget")
            w = feasible(rows + block, k)
            if w is not None:
                chosen.append(pattern)
                dfs(edge_idx + 1, rows + block, w, chosen)
                chosen.pop()

    dfs(0, base_rows, start, [])
    return types


# -- cells of the linear system -----------------------------------------------------


@dataclass
class Cell:
    """One cell of the system: a fixed divisor part plus moving support points.

    The moving points live on the listed base edges; `region` is the exact
    closed polyhedron of their position vectors, in base-edge offsets, one
    coordinate per mover.
    """

    index: int
    fixed: Divisor
    movers: tuple[tuple[str, int], ...]  # (base edge, multiplicity)
    region: CanonicalSystem
    dimension: int
    representative: Divisor
    member: PLFunction

    def interior_support_size(self) -> int:
        return len(self.fixed.support()) + len(self.movers)

    def interior_leaf_degree(self) -> int:
        g = self.fixed.graph
        return sum(
            m
            for p, m in self.fixed.items()
            if p.is_vertex and g.valence(p.vertex) == 1
        )


@dataclass
class CellComplex:
    cells: list[Cell]
    adjacency: list[tuple[int, int]]  # (contained cell, containing cell)
    maximal: tuple[int, ...]
    types: list[_RegionType] = field(repr=False, default_factory=list)

    @property
    def dimension(self) -> int:
        return max(c.dimension for c in self.cells)

    def maximal_cells(self) -> list[Cell]:
        return [self.cells[i] for i in self.maximal]


def _type_vertex_part(sub: TropSubmodule, patterns) -> dict[str, int]:
    out: dict[str, int] = {}
    for v in sub.refined.vertices:
        outflow = 0
        for e, sign in sub.refined.incident(v):
            data = sub._edges[sub._edge_index[e.id]]
            pattern = patterns[sub._edge_index[e.id]]
            if sign > 0:
                outflow += data.slopes[pattern[0][0]]
            else:
                outflow -= data.slopes[pattern[-1][0]]
        m = sub._base_refined[Point.at_vertex(v)] - outflow
        assert m >= 0, "members of R(D) cannot go below the base divisor"
        if m:
            out[v] = m
    return out


def _type_movers(sub: TropSubmodule, patterns):
    """Moving support points of a region type.

    Each crossing of consecutive envelope pieces contributes one mover with
    multiplicity the slope drop; its position, as a base-edge offset, is an
    affine function of the coefficients.
    """
    movers = []
    for edge_idx, pattern in enumerate(patterns):
        data = sub._edges[edge_idx]
        for j in range(len(pattern) - 1):
            r0, r1 = pattern[j][0], pattern[j + 1][0]
            drop = data.slopes[r0] - data.slopes[r1]
            num = _expr_sub(
                _expr({r1: _F1}, data.values[r1]),
                _expr({r0: _F1}, data.values[r0]),
            )
            position = _expr_sub(
                _expr_scale(num, Fraction(1, drop)), _expr(const=-data.lo)
            )
            movers.append({"edge": data.base_eid, "mult": drop, "position": position})
    return movers


def _sorted_movers(sub: TropSubmodule, rt: _RegionType):
    movers = _type_movers(sub, rt.patterns)
    movers.sort(key=lambda m: (m["edge"], _expr_value(m["position"], rt.witness)))
    return movers


def _build_cell(sub: TropSubmodule, rt: _RegionType, index: int) -> Cell:
    k = sub.size
    rows: list[Row] = []
    for edge_idx, pattern in enumerate(rt.patterns):
        rows.extend(_pattern_rows(sub, sub._edges[edge_idx], pattern))

    movers = _sorted_movers(sub, rt)
    q = len(movers)
    n = k + q
    joint: list[Row] = [
        (coeffs + (_F0,) * q, rhs, strict) for coeffs, rhs, strict in rows
    ]
    for t, mover in enumerate(movers):
        joint.extend(_eq_rows(n, _expr({k + t: _F1}), mover["position"]))
    if q:
        shadow = project(joint, n, list(range(k, n)))
        assert shadow is not None, "a feasible region has a nonempty shadow"
        region = canonicalise(shadow, q)
    else:
        region = canonicalise([], 0)
    assert region is not None

    vertex_part = _type_vertex_part(sub, rt.patterns)
    fixed = Divisor(
        sub.graph,
        {
            sub.refinement.to_base(Point.at_vertex(v)): m
            for v, m in vertex_part.items()
        },
    )
    rep_values: dict[Point, int] = dict(fixed.items())
    for mover in movers:
        p = Point.on_edge(
            sub.graph, mover["edge"], _expr_value(mover["position"], rt.witness)
        )
        rep_values[p] = rep_values.get(p, 0) + mover["mult"]
    return Cell(
        index=index,
        fixed=fixed,
        movers=tuple((m["edge"], m["mult"]) for m in movers),
        region=region,
        dimension=region.dimension,
        representative=Divisor(sub.graph, rep_values),
        member=sub.member(rt.witness),
    )


def _pin_candidates(graph: MetricGraph, edge_id: str, p: Point) -> list[Fraction]:
    """Offsets on the given base edge that land exactly on p."""
    e = graph.edge(edge_id)
    if not p.is_vertex:
        return [p.offset] if p.edge == edge_id else []
    out = []
    if e.tail == p.vertex:
        out.append(Fraction(0))
    if e.head == p.vertex:
        out.append(e.length)
    return out


def _pin_assignments(cell: Cell, remaining: dict[Point, int], graph: MetricGraph, exact: bool):
    """Ways of pinning movers onto the remaining demand, as {mover: offset}.

    exact mode matches each point's demand on the nose and uses every mover;
    cover mode only needs the pinned multiplicity to reach the demand.
    """
    points = sorted(remaining, key=lambda p: p.sort_key())
    results: list[dict[int, Fraction]] = []

    def place(idx: int, used: dict[int, Fraction]):
        if idx == len(points):
            if exact and len(used) != len(cell.movers):
                return
            results.append(dict(used))
            return
        p = points[idx]
        demand = remaining[p]
        options = []
        for t, (eid, _mult) in enumerate(cell.movers):
            if t in used:
                continue
            for off in _pin_candidates(graph, eid, p):
                options.append((t, off))
        for size in range(0, len(options) + 1):
            for combo in combinations(options, size):
                if len({t for t, _ in combo}) != size:
                    continue
                total = sum(cell.movers[t][1] for t, _ in combo)
                if exact and total != demand:
                    continue
                if not exact:
                    if total < demand:
                        continue
                    # keep only minimal covers; their faces add nothing
                    if any(
                        total - cell.movers[t][1] >= demand for t, _ in combo
                    ):
                        continue
                for t, off in combo:
                    used[t] = off
                place(idx + 1, used)
                for t, _ in combo:
                    del used[t]

    place(0, {})
    seen = set()
    unique = []
    for r in results:
        key = tuple(sorted(r.items()))
        if key not in seen:
            seen.add(key)
            unique.append(r)
    return unique


def _divisor_fits_cell(cell: Cell, d: Divisor, exact: bool = True) -> bool:
    """Whether d equals (exact) or is dominated by (cover) a divisor of the cell."""
    need: dict[Point, int] = dict(d.items())
    if exact:
        for p, m in cell.fixed.items():
            if need.get(p, 0) < m:
                return False
    remaining: dict[Point, int] = {}
    for p, m in need.items():
        rem = m - cell.fixed[p]
        if rem > 0:
            remaining[p] = rem
    q = len(cell.movers)
    rows = cell.region.rows()
    for pins in _pin_assignments(cell, remaining, d.graph, exact):
        pin_rows = [
            r for t, off in pins.items() for r in equality_rows(q, {t: 1}, off)
        ]
        if feasible(rows + pin_rows, q) is not None:
            return True
    return False


def cells(sub: TropSubmodule) -> CellComplex:
    """The divisor cells of the system from the coefficient-space subdivision.

    Cells are deduplicated by their exact description (fixed part, moving
    multiplicities, canonical position polyhedron); adjacency is containment,
    tested through a relative-interior representative.
    """
    if sub._cells is not None:
        return sub._cells
    if sub.size > GENERATOR_CAP:
        raise BudgetError(f"cell enumeration is capped at {GENERATOR_CAP} generators")
    types = _enumerate_types(sub)
    assert types, "a nonempty submodule meets at least one region"
    cell_list: list[Cell] = []
    by_key: dict[tuple, int] = {}
    for rt in types:
        cell = _build_cell(sub, rt, len(cell_list))
        key = (
            tuple(sorted((p.sort_key(), m) for p, m in cell.fixed.items())),
            cell.movers,
            cell.region,
        )
        if key in by_key:
            rt.cell_index = by_key[key]
            continue
        by_key[key] = cell.index
        rt.cell_index = cell.index
        cell_list.append(cell)

    adjacency: list[tuple[int, int]] = []
    contained = [False] * len(cell_list)
    for a in cell_list:
        for b in cell_list:
            if a.index == b.index or a.dimension > b.dimension:
                continue
            if _divisor_fits_cell(b, a.representative, exact=True):
                adjacency.append((a.index, b.index))
                contained[a.index] = True
    maximal = tuple(i for i, c in enumerate(cell_list) if not contained[i])
    sub._cells = CellComplex(cell_list, adjacency, maximal, types)
    return sub._cells


# -- independence rank ----------------------------------------------------------------


def _sample_points(sub: TropSubmodule, density: int = 1) -> list[Point]:
    """Refinement vertices plus evenly spaced interior points on each edge.

    Higher density adds strictly more points, so the rank is monotone in it.
    """
    pts = [sub.refinement.to_base(Point.at_vertex(v)) for v in sub.refined.vertices]
    for d in range(1, density + 1):
        per_edge = d * (sub.size + 2)
        for data in sub._edges:
            for j in range(1, per_edge + 1):
                off = data.lo + data.length * Fraction(j, per_edge + 1)
                pts.append(Point.on_edge(sub.graph, data.base_eid, off))
    seen = set()
    out = []
    for p in pts:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def _evaluation_matrix(sub: TropSubmodule, density: int = 1) -> TropicalMatrix:
    pts = _sample_points(sub, density)
    return TropicalMatrix.from_rows([[g.value(p) for p in pts] for g in sub.generators])


def independence_rank(sub: TropSubmodule, cross_check: str = "auto") -> int:
    """Largest number of tropically independent members.

    Computed as the tropical rank of the generator evaluation matrix on the
    canonical sample set (independence of arbitrary members reduces to
    generator subsets, and certificates restrict to sample columns).
    Verification policy: a provenance rank bound certifies the answer when
    attained; otherwise the cell dimension is compared when enumeration is
    affordable, falling back to a denser sample grid.  Disagreement raises,
    never degrades to a silent answer.
    """
    if cross_check not in ("auto", "cells", "grid", "never"):
        raise ValueError(f"unknown cross-check mode {cross_check!r}")
    mat = _evaluation_matrix(sub)
    r = max_independent_rows(mat, upper_bound=sub.rank_bound)[0]
    if sub.rank_bound is not None and r == sub.rank_bound:
        return r
    if cross_check == "never":
        return r
    if cross_check in ("auto", "cells"):
        if sub.size <= GENERATOR_CAP:
            try:
                dim = cells(sub).dimension
            except BudgetError:
                if cross_check == "cells":
                    raise
            else:
                if dim + 1 != r:
                    raise ExactnessError(
                        f"independence rank {r} disagrees with cell dimension {dim}"
                    )
                return r
        elif cross_check == "cells":
            raise BudgetError("cell cross-check requested above the generator cap")
    r2 = max_independent_rows(
        _evaluation_matrix(sub, density=2), upper_bound=sub.rank_bound
    )[0]
    if r2 != r:
        raise ExactnessError("independence rank unstable under sample refinement")
    return r


# -- Baker-Norine rank -------------------------------------------------------------------


def _directions_at(sub: TropSubmodule, p: Point):
    """Tangent directions at p as per-generator integer slope vectors."""
    rp = sub.refinement.to_refined(p)
    dirs = []
    if rp.is_vertex:
        for e, sign in sub.refined.incident(rp.vertex):
            data = sub._edges[sub._edge_index[e.id]]
            dirs.append(data.slopes if sign > 0 else tuple(-s for s in data.slopes))
    else:
        data = sub._edges[sub._edge_index[rp.edge]]
        dirs.append(data.slopes)
        dirs.append(tuple(-s for s in data.slopes))
    return dirs


def _attainment_sets(sub: TropSubmodule, p: Point, needed: int):
    """Inclusion-minimal generator sets forcing order >= needed at p.

    The order of a combination at p depends only on which generators attain
    the minimum there: minus the sum over directions of the least attaining
    slope, monotone under enlarging the set.  Minimal qualifying sets are the
    minimal true sets of that monotone predicate, found by exclusion
    branching.
    """
    dirs = _directions_at(sub, p)
    k = sub.size

    def order_of(A) -> int:
        return -sum(min(d[i] for i in A) for d in dirs)

    full = frozenset(range(k))
    if order_of(full) < needed:
        return []

    calls = 0

    def qualifies(A) -> bool:
        nonlocal calls
        calls += 1
        if calls > 200_000:
            raise BudgetError("attainment-set enumeration too large at a point")
        return bool(A) and order_of(A) >= needed

    def shrink(S: frozenset) -> frozenset:
        live = set(S)
        for x in sorted(live):
            if len(live) > 1 and qualifies(frozenset(live - {x})):
                live.discard(x)
        return frozenset(live)

    found: set[frozenset] = set()
    seen: set[frozenset] = set()

    def search(universe: frozenset):
        if universe in seen:
            return
        seen.add(universe)
        if not qualifies(universe):
            return
        minimal = shrink(universe)
        found.add(minimal)
        for x in minimal:
            search(universe - {x})

    search(full)
    return sorted(found, key=lambda A: (len(A), sorted(A)))


def _difference_feasible(k: int, cons) -> list[Fraction] | None:
    """Solve {a_i - a_j <= w}; None exactly on a negative cycle."""
    dist = [_F0] * k
    for _ in range(k):
        changed = False
        for i, j, w in cons:
            if dist[j] + w < dist[i]:
                dist[i] = dist[j] + w
                changed = True
        if not changed:
            return dist
    for i, j, w in cons:
        if dist[j] + w < dist[i]:
            return None
    return dist


def _policy_constraints(sub: TropSubmodule, p: Point, A: frozenset):
    """Difference constraints making every generator of A attain the min at p."""
    values = [g.value(p) for g in sub.generators]
    members = sorted(A)
    rep = members[0]
    cons = []
    for i in members[1:]:
        w = values[rep] - values[i]
        cons.append((i, rep, w))
        cons.append((rep, i, -w))
    for l in range(sub.size):
        if l not in A:
            cons.append((rep, l, values[l] - values[rep]))
    return cons


def _subtraction_feasible(sub: TropSubmodule, demand: dict[Point, int]) -> PLFunction | None:
    """A member phi with base + div(phi) >= demand, or None.

    Searches attainment policies point by point, pruning with Bellman-Ford
    after each choice; a surviving coefficient vector is re-verified through
    the actual divisor of its combination.
    """
    needed = [
        (p, m - sub.base[p])
        for p, m in sorted(demand.items(), key=lambda it: it[0].sort_key())
        if m > 0
    ]
    if not needed:
        return sub.generators[0]
    options = []
    for p, c in needed:
        sets = _attainment_sets(sub, p, c)
        if not sets:
            return None
        options.append((p, sets))
    options.sort(key=lambda it: len(it[1]))

    k = sub.size

    def dfs(idx: int, cons):
        if idx == len(options):
            return _difference_feasible(k, cons)
        p, sets = options[idx]
        for A in sets:
            ext = cons + _policy_constraints(sub, p, A)
            if _difference_feasible(k, ext) is None:
                continue
            sol = dfs(idx + 1, ext)
            if sol is not None:
                return sol
        return None

    sol = dfs(0, [])
    if sol is None:
        return None
    phi = sub.member(sol)
    target = sub.base + phi.divisor()
    for p, m in demand.items():
        assert target[p] >= m, "policy witness failed divisor verification"
    return phi


@dataclass(frozen=True)
class CertifiedRank:
    value: int
    denominator: int
    stable_at_double: bool


def _lattice_model(sub: TropSubmodule, denominator: int | None):
    cuts = [
        Point.on_edge(sub.graph, data.base_eid, data.lo)
        for data in sub._edges
        if data.lo != 0
    ]
    if denominator is None:
        return lattice_for(sub.graph, sub.base, points=cuts)
    return lattice_for(sub.graph, sub.base, points=cuts, min_N=denominator)


def _bn_value(sub: TropSubmodule, model) -> int:
    degree = sub.base.degree
    budget = candidate_budget()
    spent = 0
    for r in range(1, max(degree, 0) + 1):
        spent += comb(model.n + r - 1, r)
        if spent > budget:
            raise BudgetError(
                f"degree-{r} lattice enumeration exceeds the candidate budget"
            )
        for combo in combinations_with_replacement(range(model.n), r):
            demand: dict[Point, int] = {}
            for idx in combo:
                p = model.nodes[idx]
                demand[p] = demand.get(p, 0) + 1
            if _subtraction_feasible(sub, demand) is None:
                return r - 1
    return max(degree, 0)


def baker_norine_rank(sub: TropSubmodule, denominator: int | None = None) -> CertifiedRank:
    """Largest r such that every lattice-effective degree-r divisor can be
    subtracted from the system; certified at the model denominator and
    re-checked at its double."""
    model = _lattice_model(sub, denominator)
    if model.N not in sub._bn_cache:
        sub._bn_cache[model.N] = _bn_value(sub, model)
    value = sub._bn_cache[model.N]
    double = _lattice_model(sub, 2 * model.N)
    if double.N not in sub._bn_cache:
        sub._bn_cache[double.N] = _bn_value(sub, double)
    return CertifiedRank(
        value=value,
        denominator=model.N,
        stable_at_double=sub._bn_cache[double.N] == value,
    )


@dataclass(frozen=True)
class TlsReport:
    is_tls: bool
    independence_rank: int
    baker_norine_rank: int
    denominator: int
    stable_at_double: bool


def is_tls(sub: TropSubmodule, denominator: int | None = None) -> TlsReport:
    """Whether the submodule is a tropical linear series: one more independent
    member than the Baker-Norine rank."""
    r_ind = independence_rank(sub)
    bn = baker_norine_rank(sub, denominator)
    return TlsReport(
        is_tls=(r_ind == bn.value + 1),
        independence_rank=r_ind,
        baker_norine_rank=bn.value,
        denominator=bn.denominator,
        stable_at_double=bn.stable_at_double,
    )


# -- residual constraints -------------------------------------------------------------------


@dataclass
class ResidualPiece:
    cell_index: int
    pins: dict[int, Fraction]
    dimension: int
    witness: PLFunction


@dataclass
class ResidualConstraint:
    """The members phi with base - constraint + div(phi) still effective.

    Described per maximal cell by pinning moving support points onto the
    constraint divisor; each feasible pinning is one affine piece.
    """

    parent: TropSubmodule
    constraint: Divisor
    pieces: list[ResidualPiece]

    def is_empty(self) -> bool:
        return not self.pieces

    def dimension(self) -> int:
        if not self.pieces:
            return -1
        return max(p.dimension for p in self.pieces)

    def contains(self, phi: PLFunction) -> bool:
        if span_coefficients(phi, self.parent) is None:
            return False
        residue = self.parent.base - self.constraint + phi.divisor()
        return residue.is_effective()


def residual(sub: TropSubmodule, constraint: Divisor) -> ResidualConstraint:
    if constraint.graph != sub.graph:
        raise ValueError("constraint divisor lives on a different graph")
    if not constraint.is_effective():
        raise ValueError("constraint divisor must be effective")
    if constraint.degree > sub.base.degree:
        return ResidualConstraint(sub, constraint, [])
    cx = cells(sub)
    pieces: list[ResidualPiece] = []
    for ci in cx.maximal:
        cell = cx.cells[ci]
        remaining: dict[Point, int] = {}
        for p, m in constraint.items():
            rem = m - cell.fixed[p]
            if rem > 0:
                remaining[p] = rem
        q = len(cell.movers)
        for pins in _pin_assignments(cell, remaining, sub.graph, exact=False):
            pin_rows = [
                r for t, off in pins.items() for r in equality_rows(q, {t: 1}, off)
            ]
            system = canonicalise(cell.region.rows() + pin_rows, q)
            if system is None:
                continue
            witness = _piece_witness(sub, cx, cell, pins)
            if witness is None:
                continue
            pieces.append(
                ResidualPiece(
                    cell_index=ci,
                    pins=pins,
                    dimension=system.dimension,
                    witness=witness,
                )
            )
    return ResidualConstraint(sub, constraint, pieces)


def _piece_witness(sub: TropSubmodule, cx: CellComplex, cell: Cell, pins) -> PLFunction | None:
    """A member of the closed cell whose movers satisfy the pins."""
    k = sub.size
    for rt in cx.types:
        if rt.cell_index != cell.index:
            continue
        rows: list[Row] = list(equality_rows(k, {0: 1}, 0))
        for edge_idx, pattern in enumerate(rt.patterns):
            rows.extend(
                (c, b, False)
                for c, b, _ in _pattern_rows(sub, sub._edges[edge_idx], pattern)
            )
        movers = _sorted_movers(sub, rt)
        for t, off in pins.items():
            rows.extend(_eq_rows(k, movers[t]["position"], _expr(const=off)))
        sol = feasible(rows, k)
        if sol is not None:
            return sub.member(sol)
    return None


# -- nondegeneracy ------------------------------------------------------------------------


def _incident_types(sub: TropSubmodule, phi: PLFunction) -> list[_RegionType]:
    """Region types meeting a small box around phi's projection coefficients.

    The box radius is a quarter of the least value gap over the refined
    vertices, scaled down by the degree, so only the regions whose closure
    contains phi's own coefficient vector survive.
    """
    coeffs = [sup_difference(phi, g) for g in sub.generators]
    values = [
        g.value(sub.refinement.to_base(Point.at_vertex(v)))
        for g in sub.generators
        for v in sub.refined.vertices
    ]
    gaps = sorted({abs(x - y) for x in values for y in values if x != y})
    eps = (gaps[0] if gaps else _F1) / (4 * max(sub.base.degree, 1))

    k = sub.size
    box: list[Row] = []
    for i, c in enumerate(coeffs):
        box.append(make_row(k, {i: 1}, c + eps))
        box.append(make_row(k, {i: -1}, -(c - eps)))
    types = _enumerate_types(sub, extra_rows=box, gauge=False)
    assert types, "the box around a member's coefficients meets some region"
    return types


def nondegenerate(d0: Divisor, sub: TropSubmodule) -> bool:
    """Local maximality of support size and local minimality of leaf degree.

    Cells incident to d0 are found by enumerating the coefficient-space
    regions meeting a small box around the projection coefficients of the
    connecting function; interior support statistics are read off the
    region combinatorics.
    """
    phi = divisor_in_system(d0, sub)
    if phi is None:
        raise ValueError("divisor is not in the linear system")
    types = _incident_types(sub, phi)

    supp0 = len(d0.support())
    leaf0 = sum(
        m for p, m in d0.items() if p.is_vertex and sub.graph.valence(p.vertex) == 1
    )
    for rt in types:
        vertex_part = _type_vertex_part(sub, rt.patterns)
        supp = len(vertex_part) + len(_type_movers(sub, rt.patterns))
        leaf = 0
        for v, m in vertex_part.items():
            bp = sub.refinement.to_base(Point.at_vertex(v))
            if bp.is_vertex and sub.graph.valence(bp.vertex) == 1:
                leaf += m
        if supp > supp0 or leaf < leaf0:
            return False
    return True


# -- restriction ---------------------------------------------------------------------------


def _slope_from(g: PLFunction, eid: str, offset: Fraction, direction: int) -> int:
    """Integer slope of g leaving offset along (+1) or against (-1) the edge."""
    for t0, t1, s in g.segment_slopes(eid):
        if direction > 0 and t0 <= offset < t1:
            return s
        if direction < 0 and t0 < offset <= t1:
            return -s
    raise AssertionError("offset outside the edge")


def restrict(sub: TropSubmodule, region: ClosedSubset) -> TropSubmodule:
    """The submodule of restrictions to a closed connected subgraph.

    The base divisor gains, at each boundary point, the largest total
    outflow of any generator into the removed part, which keeps every
    restricted generator compatible by construction.
    """
    if region.graph != sub.graph:
        raise ValueError("region lives on a different graph")
    cuts: list[Point] = []
    for eid, lo, hi in region.intervals:
        for off in (lo, hi):
            if off != 0 and off != sub.graph.edge(eid).length:
                cuts.append(Point.on_edge(sub.graph, eid, off))
    refinement = common_refinement(sub.graph, cuts, sub.base.support())
    refined = refinement.graph

    def base_point(v: str) -> Point:
        return refinement.to_base(Point.at_vertex(v))

    kept_edges = []
    for e in refined.edges:
        beid, lo, hi = refinement.span(e.id)
        mid = Point.on_edge(sub.graph, beid, (lo + hi) / 2)
        if (
            region.contains(base_point(e.tail))
            and region.contains(base_point(e.head))
            and region.contains(mid)
        ):
            kept_edges.append(e)
    touched = {e.tail for e in kept_edges} | {e.head for e in kept_edges}
    kept_vertices = [
        v
        for v in refined.vertices
        if region.contains(base_point(v)) and (v in touched or not kept_edges)
    ]
    if not kept_vertices:
        raise ValueError("the region is empty")
    try:
        subgraph = MetricGraph(
            kept_vertices,
            [Edge(e.id, e.tail, e.head, e.length) for e in kept_edges],
        )
    except ValueError as err:
        raise ValueError(f"region is not a connected subgraph: {err}") from err

    new_gens = []
    for g in sub.generators:
        vv = {v: g.value(base_point(v)) for v in kept_vertices}
        br: dict[str, list[tuple[Fraction, Fraction]]] = {}
        for e in kept_edges:
            beid, lo, hi = refinement.span(e.id)
            pts = [(t - lo, x) for t, x in g.breaks.get(beid, ()) if lo < t < hi]
            if pts:
                br[e.id] = pts
        new_gens.append(PLFunction(subgraph, vv, br))

    base_vals: dict[Point, int] = {}
    kept_names = set(kept_vertices)
    for p, m in sub.base.items():
        rp = refinement.to_refined(p)
        if rp.is_vertex:
            if rp.vertex in kept_names:
                base_vals[Point.at_vertex(rp.vertex)] = m
        elif region.contains(p):
            for e in kept_edges:
                beid, lo, hi = refinement.span(e.id)
                if beid == p.edge and lo < p.offset < hi:
                    base_vals[Point.on_edge(subgraph, e.id, p.offset - lo)] = m
                    break

    kept_ids = {e.id for e in kept_edges}
    for v in kept_vertices:
        exits = []
        for e, sign in refined.incident(v):
            if e.id in kept_ids:
                continue
            beid, lo, hi = refinement.span(e.id)
            exits.append((beid, lo if sign > 0 else hi, sign))
        if not exits:
            continue
        boost = max(
            sum(-_slope_from(g, beid, off, sign) for beid, off, sign in exits)
            for g in sub.generators
        )
        if boost:
            key = Point.at_vertex(v)
            base_vals[key] = base_vals.get(key, 0) + boost

    new_base = Divisor(subgraph, base_vals)
    return TropSubmodule(new_base, new_gens, max_generators=len(new_gens))


# -- generating sets for complete systems -----------------------------------------------------


def complete_system(
    divisor: Divisor,
    denominator: int | None = None,
    max_generators: int = GENERATOR_CAP,
) -> TropSubmodule:
    """A generating set of R(D): the extremal connecting functions of the class.

    Enumerates lattice divisors equivalent to D at a denominator fine enough
    to see every extremal's support, takes connecting functions, and prunes
    the redundant ones by exact span membership.  Pass a larger denominator
    to re-certify: doubling it must not change the span.
    """
    graph = divisor.graph
    degree = divisor.degree
    if degree < 0:
        raise ValueError("a negative-degree divisor has an empty complete system")
    if degree > DEGREE_CAP:
        raise BudgetError(f"degree {degree} exceeds the cap {DEGREE_CAP}")
    if degree == 0:
        witness = equivalence_witness(divisor, Divisor(graph, {}))
        if witness is None:
            raise ValueError("the complete system of this degree-zero class is empty")
        return TropSubmodule(divisor, [witness.normalised()])
    if denominator is None:
        denominator = lcm(
            graph.length_denominator(),
            divisor.offset_denominator(),
            *range(1, 2 * degree + 1),
        )
    model = lattice_for(graph, divisor, min_N=denominator)
    reduced0, fired0 = model.reduce(model.divisor_vector(divisor), 0)

    if comb(model.n + degree - 1, degree) > candidate_budget():
        raise BudgetError("lattice divisor enumeration exceeds the candidate budget")

    witnesses: list[PLFunction] = []
    for combo in combinations_with_replacement(range(model.n), degree):
        vec = [0] * model.n
        for idx in combo:
            vec[idx] += 1
        red, fired = model.reduce(vec, 0)
        if red != reduced0:
            continue
        phi = model.potential([b - a for a, b in zip(fired0, fired)]).normalised()
        if phi not in witnesses:
            witnesses.append(phi)

    # one pass suffices: an extremal is never spanned by the others, and a
    # spanned function stays spanned when other spanned functions leave
    witnesses.sort(key=lambda f: (f.oscillation(), repr(f)))
    survivors = list(witnesses)
    for phi in list(survivors):
        rest = [g for g in survivors if g != phi]
        if rest and _in_span(phi, rest):
            survivors = rest
    return TropSubmodule(divisor, survivors, max_generators=max_generators)


# -- slope statistics --------------------------------------------------------------------------


def direction_slope_sets(sub: TropSubmodule) -> dict[tuple[str, int], set[int]]:
    """Distinct outgoing slopes per directed refinement edge over all regions.

    For a tropical linear series of dimension r every tangent direction
    carries exactly r + 1 values.
    """
    cx = cells(sub)
    out: dict[tuple[str, int], set[int]] = {}
    for data in sub._edges:
        out[(data.eid, 1)] = set()
        out[(data.eid, -1)] = set()
    for rt in cx.types:
        for edge_idx, pattern in enumerate(rt.patterns):
            data = sub._edges[edge_idx]
            out[(data.eid, 1)].add(data.slopes[pattern[0][0]])
            out[(data.eid, -1)].add(-data.slopes[pattern[-1][0]])
    return out
