"""Divisor theory on a metric graph via chip firing on a uniform subdivision.

For a subdivision step 1/N that accommodates all edge lengths and all divisor
support points, linear equivalence and reduced forms of lattice-supported
divisors are computed by integer chip firing on the lattice nodes.  Witness
functions come back as genuine PL functions: a cumulative firing vector h
yields the potential h/N, whose divisor is exactly the net chip movement.

Rank uses the standard quantifier: r(D) >= r iff D - E is equivalent to an
effective divisor for every effective E of degree r.  It is enough to let E
run over lattice nodes of a loopless subdivision, as node sets of such models
determine rank; every loop is therefore split into at least two segments.
Ranks can optionally be confirmed by recomputing at twice the subdivision.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from typing import Sequence

from .errors import BudgetError, candidate_budget
from .exact import lcm
from .graph import Divisor, MetricGraph, Point
from .plfun import PLFunction

_FIRE_GUARD = 10_000_000  # single-set firings before declaring a logic error


class LatticeModel:
    """Nodes at multiples of 1/N along every edge, unit-step adjacency."""

    def __init__(self, graph: MetricGraph, N: int):
        if N < 1:
            raise ValueError("subdivision parameter must be a positive integer")
        self.graph = graph
        self.N = N
        self.nodes: list[Point] = [Point.at_vertex(v) for v in graph.vertices]
        self.index: dict[Point, int] = {p: i for i, p in enumerate(self.nodes)}
        step = Fraction(1, N)
        adj_count: dict[tuple[int, int], int] = {}
        for e in graph.edges:
            segs = e.length * N
            if segs.denominator != 1:
                raise ValueError(
                    f"edge {e.id!r} of length {e.length} is not divided evenly by 1/{N}"
                )
            segs = int(segs)
            chain = [self.index[Point.at_vertex(e.tail)]]
            for k in range(1, segs):
                p = Point.on_edge(graph, e.id, k * step)
                if p not in self.index:
                    self.index[p] = len(self.nodes)
                    self.nodes.append(p)
                chain.append(self.index[p])
            chain.append(self.index[Point.at_vertex(e.head)])
            for a, b in zip(chain, chain[1:]):
                if a == b:
                    continue  # a one-segment loop moves no net chips
                key = (min(a, b), max(a, b))
                adj_count[key] = adj_count.get(key, 0) + 1
        self.n = len(self.nodes)
        self.nbr: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for (a, b), m in sorted(adj_count.items()):
            self.nbr[a].append((b, m))
            self.nbr[b].append((a, m))
        self.deg = [sum(m for _, m in self.nbr[i]) for i in range(self.n)]

    def divisor_vector(self, d: Divisor) -> list[int]:
        vec = [0] * self.n
        for p, m in d.items():
            if p not in self.index:
                raise ValueError(
                    f"divisor point {p.describe()} is not a 1/{self.N} lattice point"
                )
            vec[self.index[p]] += m
        return vec

    def divisor_from_vector(self, vec: Sequence[int]) -> Divisor:
        return Divisor(
            self.graph, {self.nodes[i]: m for i, m in enumerate(vec) if m != 0}
        )

    def potential(self, h: Sequence[int]) -> PLFunction:
        """The PL function taking value h[i]/N at node i, affine in between."""
        return PLFunction.from_point_values(
            self.graph, {p: Fraction(h[i], self.N) for i, p in enumerate(self.nodes)}
        )

    # -- chip dynamics ----------------------------------------------------

    def _bfs_order(self, q: int) -> list[int]:
        order = [q]
        seen = [False] * self.n
        seen[q] = True
        head = 0
        while head < len(order):
            v = order[head]
            head += 1
            for w, _ in self.nbr[v]:
                if not seen[w]:
                    seen[w] = True
                    order.append(w)
        return order

    def _unburnt(self, vec: Sequence[int], q: int) -> list[int]:
        """Nodes left unburnt by the burning pass from q; empty iff reduced."""
        burnt = [False] * self.n
        burnt[q] = True
        heat = [0] * self.n
        stack = [q]
        while stack:
            v = stack.pop()
            for w, m in self.nbr[v]:
                if not burnt[w]:
                    heat[w] += m
                    if heat[w] > vec[w]:
                        burnt[w] = True
                        stack.append(w)
        return [v for v in range(self.n) if not burnt[v]]

    def _fire_set(self, vec: list[int], fired: list[int], members: Sequence[int], times: int = 1) -> None:
        inside = [False] * self.n
        for v in members:
            inside[v] = True
        for v in members:
            for w, m in self.nbr[v]:
                if not inside[w]:
                    vec[v] -= m * times
                    vec[w] += m * times
            fired[v] += times

    def reduce(self, vec: Sequence[int], q: int) -> tuple[list[int], list[int]]:
        """Reduced form of vec with respect to node q.

        Returns (reduced vector, cumulative firing counts h) such that
        reduced = vec + div(potential(-h)) as divisors.
        """
        vec = list(vec)
        fired = [0] * self.n
        order = self._bfs_order(q)
        if len(order) != self.n:
            raise AssertionError("lattice model is disconnected")
        # clear debts outside q, farthest-from-q first, by firing BFS prefixes;
        # each prefix firing can only help the nodes processed later
        for i in range(len(order) - 1, 0, -1):
            v = order[i]
            if vec[v] >= 0:
                continue
            prefix = order[:i]
            inside = [False] * self.n
            for u in prefix:
                inside[u] = True
            gain = sum(m for w, m in self.nbr[v] if inside[w])
            if gain <= 0:
                raise AssertionError("BFS prefix has no edge to the next node")
            times = (-vec[v] + gain - 1) // gain
            self._fire_set(vec, fired, prefix, times)
            if vec[v] < 0:
                raise AssertionError("prefix firing failed to clear a debt")
        # second stage: fire maximal unburnt sets until the burn covers all
        guard = 0
        while True:
            unburnt = self._unburnt(vec, q)
            if not unburnt:
                break
            self._fire_set(vec, fired, unburnt)
            guard += 1
            if guard > _FIRE_GUARD:
                raise AssertionError("burning stage failed to terminate")
        return vec, fired

    def is_reduced(self, vec: Sequence[int], q: int) -> bool:
        if any(m < 0 for i, m in enumerate(vec) if i != q):
            return False
        return not self._unburnt(vec, q)


@lru_cache(maxsize=None)
def _cached_model(graph: MetricGraph, N: int) -> LatticeModel:
    return LatticeModel(graph, N)


def lattice_for(
    graph: MetricGraph, *divisors: Divisor, points: Sequence[Point] = (), min_N: int = 1
) -> LatticeModel:
    """Coarsest uniform model accommodating the given divisors and points.

    Loops are always split into at least two segments so that node sets of
    the model are rank-determining.
    """
    N = lcm(
        graph.length_denominator(),
        *[d.offset_denominator() for d in divisors],
        *[p.offset.denominator for p in points if not p.is_vertex],
        min_N,
    )
    factor = 1
    for e in graph.edges:
        if e.tail == e.head:
            while N * factor * e.length < 2:
                factor += 1
    return _cached_model(graph, N * factor)


def reduced_divisor(
    d: Divisor, base: Point, N: int | None = None
) -> tuple[Divisor, PLFunction]:
    """The reduced form of d with respect to base, plus a witness function phi
    with d + div(phi) equal to the reduced form."""
    model = (
        lattice_for(d.graph, d, points=[base])
        if N is None
        else _cached_model(d.graph, N)
    )
    q = model.index[base]
    vec, fired = model.reduce(model.divisor_vector(d), q)
    return model.divisor_from_vector(vec), model.potential([-h for h in fired])


def is_reduced_at(d: Divisor, base: Point, N: int | None = None) -> bool:
    """Whether d is already in reduced form with respect to base."""
    model = (
        lattice_for(d.graph, d, points=[base])
        if N is None
        else _cached_model(d.graph, N)
    )
    return model.is_reduced(model.divisor_vector(d), model.index[base])


def divisor_distance(d1: Divisor, d2: Divisor, N: int | None = None) -> Fraction:
    """Sup-norm distance between equivalent divisors: the oscillation of the
    connecting function.  Symmetric, and zero exactly for equal divisors."""
    phi = equivalence_witness(d1, d2, N)
    if phi is None:
        raise ValueError("divisors are not equivalent")
    return phi.oscillation()


def equivalence_witness(d1: Divisor, d2: Divisor, N: int | None = None) -> PLFunction | None:
    """A function phi with d1 + div(phi) = d2, or None if not equivalent."""
    if d1.graph != d2.graph:
        raise ValueError("divisors live on different graphs")
    if d1.degree != d2.degree:
        return None
    model = (
        lattice_for(d1.graph, d1, d2) if N is None else _cached_model(d1.graph, N)
    )
    r1, f1 = model.reduce(model.divisor_vector(d1), 0)
    r2, f2 = model.reduce(model.divisor_vector(d2), 0)
    if r1 != r2:
        return None
    # d1 - L f1 = d2 - L f2, so d2 = d1 + div(potential(f2 - f1))
    return model.potential([b - a for a, b in zip(f1, f2)])


def is_equivalent(d1: Divisor, d2: Divisor, N: int | None = None) -> bool:
    return equivalence_witness(d1, d2, N) is not None


def _rank_on_model(model: LatticeModel, vec: list[int], budget: int) -> int:
    degree = sum(vec)
    if degree < 0:
        return -1

    def reaches_effective(v: Sequence[int]) -> bool:
        red, _ = model.reduce(v, 0)
        return red[0] >= 0

    if not reaches_effective(vec):
        return -1
    r = 0
    spent = 0
    while r < degree:
        k = r + 1
        level = comb(model.n + k - 1, k)
        spent += level
        if spent > budget:
            raise BudgetError(
                f"rank search needs {spent} candidates at subtraction degree {k},"
                f" over the budget of {budget}"
            )
        for combo in combinations_with_replacement(range(model.n), k):
            probe = list(vec)
            for i in combo:
                probe[i] -= 1
            if not reaches_effective(probe):
                return r
        r += 1
    return degree


def rank(
    d: Divisor,
    N: int | None = None,
    confirm: bool = False,
    max_degree: int = 12,
    budget: int | None = None,
) -> int:
    """Rank of the complete linear system of d.

    `confirm=True` recomputes at double the subdivision and insists the two
    answers agree.  `max_degree` bounds the exhaustive search; raise it
    explicitly for big inputs.
    """
    if d.degree > max_degree:
        raise BudgetError(
            f"divisor degree {d.degree} exceeds the rank search cap {max_degree}"
        )
    if budget is None:
        budget = candidate_budget()
    model = lattice_for(d.graph, d) if N is None else _cached_model(d.graph, N)
    value = _rank_on_model(model, model.divisor_vector(d), budget)
    if confirm:
        fine = _cached_model(d.graph, 2 * model.N)
        again = _rank_on_model(fine, fine.divisor_vector(d), budget)
        if again != value:
            raise AssertionError(
                f"rank unstable under refinement: {value} at 1/{model.N},"
                f" {again} at 1/{2 * model.N}"
            )
    return value
