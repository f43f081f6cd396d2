"""Exact feasibility, projection, and canonical forms for linear systems.

A system is a list of rows over variables x_0..x_{n-1}; each row is
(coeffs, rhs, strict) and means coeffs . x <= rhs, or < rhs when strict.
Everything is Fraction arithmetic; there are no floats anywhere.

The workhorse is Fourier-Motzkin elimination.  The systems produced by cell
enumeration have at most three nonzero coefficients per row, which keeps the
pairing step small; a hard row cap guards against pathological blowup.
Strictness propagates through combination (a combination is strict as soon as
one ingredient is), which is what makes open-region feasibility exact.

Affine hulls, redundancy pruning, and maximization are all reductions to
feasibility: a row is implicitly tight when its strict reversal is infeasible
against the rest, and the maximum of an objective is read off the bounds on a
fresh variable equated to it.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd

from .errors import BudgetError

Row = tuple[tuple[Fraction, ...], Fraction, bool]

_ROW_CAP = 200_000

_F0 = Fraction(0)
_F1 = Fraction(1)


def make_row(n: int, terms: dict[int, object], rhs: object, strict: bool = False) -> Row:
    coeffs = [_F0] * n
    for j, c in terms.items():
        if not 0 <= j < n:
            raise ValueError(f"variable index {j} out of range")
        coeffs[j] += Fraction(c)
    return (tuple(coeffs), Fraction(rhs), strict)


def equality_rows(n: int, terms: dict[int, object], rhs: object) -> list[Row]:
    r = make_row(n, terms, rhs)
    return [r, _negated(r)]


def _negated(row: Row) -> Row:
    coeffs, rhs, strict = row
    return (tuple(-c for c in coeffs), -rhs, strict)


def reversed_strictly(row: Row) -> Row:
    """The complement half-space: coeffs . x > rhs, as a < row."""
    coeffs, rhs, _ = row
    return (tuple(-c for c in coeffs), -rhs, True)


def _normalised(row: Row) -> Row:
    """Scale by a positive rational to primitive integer coefficients."""
    coeffs, rhs, strict = row
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    den = den * rhs.denominator // gcd(den, rhs.denominator)
    nums = [c.numerator * (den // c.denominator) for c in coeffs]
    g = 0
    for v in nums:
        g = gcd(g, abs(v))
    if g == 0:
        return (tuple(_F0 for _ in coeffs), rhs * den, strict)
    return (
        tuple(Fraction(v, g) for v in nums),
        Fraction(rhs.numerator * (den // rhs.denominator), g),
        strict,
    )


def _tidy(rows: list[Row]) -> list[Row] | None:
    """Normalise, drop tautologies, fold duplicates to the tightest bound.

    Returns None on a visible contradiction (an all-zero row that fails).
    """
    best: dict[tuple[Fraction, ...], tuple[Fraction, bool]] = {}
    for row in rows:
        coeffs, rhs, strict = _normalised(row)
        if all(c == 0 for c in coeffs):
            if rhs < 0 or (strict and rhs == 0):
                return None
            continue
        cur = best.get(coeffs)
        if cur is None or rhs < cur[0] or (rhs == cur[0] and strict and not cur[1]):
            best[coeffs] = (rhs, strict)
    return [(c, b, s) for c, (b, s) in best.items()]


def _eliminate(rows: list[Row], j: int) -> list[Row] | None:
    pos = [r for r in rows if r[0][j] > 0]
    neg = [r for r in rows if r[0][j] < 0]
    out = [r for r in rows if r[0][j] == 0]
    for cp, bp, sp in pos:
        for cn, bn, sn in neg:
            a, b = cp[j], -cn[j]
            coeffs = tuple(b * x + a * y for x, y in zip(cp, cn))
            out.append((coeffs, b * bp + a * bn, sp or sn))
            if len(out) > _ROW_CAP:
                raise BudgetError("linear system elimination exceeded the row cap")
    return _tidy(out)


def _cheapest_variable(rows: list[Row], remaining: list[int]) -> int:
    def cost(j: int) -> int:
        p = sum(1 for r in rows if r[0][j] > 0)
        m = sum(1 for r in rows if r[0][j] < 0)
        return p * m - p - m

    return min(remaining, key=cost)


def feasible(rows: list[Row], n: int) -> list[Fraction] | None:
    """A point satisfying every row, or None.  Exact, strictness respected."""
    tidy = _tidy(rows)
    if tidy is None:
        return None
    stages: list[tuple[int, list[Row]]] = []
    work = tidy
    remaining = list(range(n))
    while remaining:
        j = _cheapest_variable(work, remaining)
        remaining.remove(j)
        stages.append((j, work))
        work = _eliminate(work, j)
        if work is None:
            return None
    if work:
        # only all-zero-coefficient rows can remain, and _tidy vetted them
        raise AssertionError("unexpected rows after full elimination")
    values = [_F0] * n
    fixed = [False] * n
    for j, rows_at in reversed(stages):
        lo: tuple[Fraction, bool] | None = None
        hi: tuple[Fraction, bool] | None = None
        for coeffs, rhs, strict in rows_at:
            cj = coeffs[j]
            if cj == 0:
                continue
            rest = rhs - sum(c * values[i] for i, c in enumerate(coeffs) if i != j and c != 0)
            bound = rest / cj
            if cj > 0:
                if hi is None or bound < hi[0] or (bound == hi[0] and strict):
                    hi = (bound, strict)
            else:
                if lo is None or bound > lo[0] or (bound == lo[0] and strict):
                    lo = (bound, strict)
        if lo is None and hi is None:
            values[j] = _F0
        elif lo is None:
            values[j] = hi[0] - 1 if hi[1] else hi[0]
        elif hi is None:
            values[j] = lo[0] + 1 if lo[1] else lo[0]
        elif lo[0] == hi[0]:
            if lo[1] or hi[1]:
                raise AssertionError("empty interval despite consistent elimination")
            values[j] = lo[0]
        else:
            values[j] = (lo[0] + hi[0]) / 2
        fixed[j] = True
    assert all(fixed)
    return values


def satisfies(point: list[Fraction], row: Row) -> bool:
    coeffs, rhs, strict = row
    lhs = sum(c * x for c, x in zip(coeffs, point) if c != 0)
    return lhs < rhs if strict else lhs <= rhs


def project(rows: list[Row], n: int, keep: list[int]) -> list[Row] | None:
    """Eliminate all variables outside `keep`; relabel survivors in keep-order.

    Returns the shadow system over len(keep) variables, or None when the
    input system is infeasible (closed sense: strict rows stay strict, so an
    open-empty but closure-nonempty system still projects).
    """
    work = _tidy(rows)
    if work is None:
        return None
    drop = [j for j in range(n) if j not in keep]
    while drop:
        j = _cheapest_variable(work, drop)
        drop.remove(j)
        work = _eliminate(work, j)
        if work is None:
            return None
    drop = [j for j in range(n) if j not in keep]
    out = []
    for coeffs, rhs, strict in work:
        if any(coeffs[j] != 0 for j in drop):
            raise AssertionError("eliminated variable resurfaced")
        out.append((tuple(coeffs[j] for j in keep), rhs, strict))
    return out


def supremum(rows: list[Row], n: int, objective: dict[int, object]) -> tuple[Fraction | None, bool]:
    """(sup of objective over the solution set, attained?).

    None means unbounded above.  Raises ValueError on an infeasible system.
    The attained flag is meaningful for closed systems; a strict binding row
    makes it False.
    """
    ext = [(coeffs + (_F0,), rhs, strict) for coeffs, rhs, strict in rows]
    ext.extend(equality_rows(n + 1, {**{j: Fraction(c) for j, c in objective.items()}, n: -1}, 0))
    shadow = project(ext, n + 1, [n])
    if shadow is None:
        raise ValueError("system is infeasible")
    sup: tuple[Fraction, bool] | None = None
    for coeffs, rhs, strict in shadow:
        if coeffs[0] > 0:
            bound = rhs / coeffs[0]
            if sup is None or bound < sup[0] or (bound == sup[0] and strict):
                sup = (bound, strict)
    if sup is None:
        return None, False
    return sup[0], not sup[1]


def _rref(rows: list[tuple[Fraction, ...]]) -> list[tuple[Fraction, ...]]:
    mat = [list(r) for r in rows]
    if not mat:
        return []
    m, width = len(mat), len(mat[0])
    out: list[list[Fraction]] = []
    r = 0
    for col in range(width):
        pivot = next((i for i in range(r, m) if mat[i][col] != 0), None)
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        pv = mat[r][col]
        mat[r] = [x / pv for x in mat[r]]
        for i in range(m):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        r += 1
        if r == m:
            break
    for i in range(r):
        out.append(tuple(mat[i]))
    return out


class CanonicalSystem:
    """Closed polyhedron in canonical form: RREF equalities + pruned facets.

    Two systems describe the same polyhedron iff their canonical forms are
    equal, provided the variable order matches.
    """

    def __init__(self, equalities: tuple, facets: tuple, n: int):
        self.equalities = equalities
        self.facets = facets
        self.n = n

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CanonicalSystem)
            and self.equalities == other.equalities
            and self.facets == other.facets
        )

    def __hash__(self) -> int:
        return hash((self.equalities, self.facets))

    def rows(self) -> list[Row]:
        out: list[Row] = []
        for coeffs, rhs in self.equalities:
            out.extend([(coeffs, rhs, False), ((tuple(-c for c in coeffs)), -rhs, False)])
        out.extend((coeffs, rhs, False) for coeffs, rhs in self.facets)
        return out

    @property
    def dimension(self) -> int:
        return self.n - len(self.equalities)

    def contains_point(self, point: list[Fraction]) -> bool:
        return all(satisfies(point, r) for r in self.rows())

    def contains(self, other: "CanonicalSystem") -> bool:
        mine = self.rows()
        theirs = other.rows()
        for row in mine:
            coeffs, rhs, _ = row
            sup, _ = supremum(theirs, self.n, {j: c for j, c in enumerate(coeffs) if c != 0})
            if sup is None or sup > rhs:
                return False
        return True


def canonicalise(rows: list[Row], n: int) -> CanonicalSystem | None:
    """Canonical form of the closed solution set, or None when empty.

    Strict rows are treated as their closures; callers decide open
    nonemptiness separately with `feasible`.
    """
    closed = [(c, b, False) for c, b, _ in rows]
    if feasible(closed, n) is None:
        return None
    closed = _tidy(closed)
    eqs: list[tuple[tuple[Fraction, ...], Fraction]] = []
    ineqs: list[Row] = []
    for coeffs, rhs, _ in closed:
        # tight on the whole region iff nothing satisfies it strictly
        if feasible(closed + [(coeffs, rhs, True)], n) is None:
            eqs.append((coeffs, rhs))
        else:
            ineqs.append((coeffs, rhs, False))
    basis = _rref([coeffs + (rhs,) for coeffs, rhs in eqs])
    eq_canon = tuple((r[:-1], r[-1]) for r in basis)

    # reduce each facet modulo the equality span so scaling classes align
    reduced: list[Row] = []
    for coeffs, rhs, _ in ineqs:
        vec = list(coeffs) + [rhs]
        for brow in basis:
            col = next(i for i, x in enumerate(brow[:-1]) if x != 0)
            if vec[col] != 0:
                f = vec[col]
                vec = [x - f * y for x, y in zip(vec, brow)]
        reduced.append((tuple(vec[:-1]), vec[-1], False))
    tidied = _tidy(reduced)
    assert tidied is not None
    eq_rows = [
        r
        for coeffs, rhs in eq_canon
        for r in equality_rows(n, dict(enumerate(coeffs)), rhs)
    ]
    keep: list[Row] = []
    for i, row in enumerate(tidied):
        others = [r for k, r in enumerate(tidied) if k != i and (k > i or r in keep)]
        if feasible(others + eq_rows + [reversed_strictly(row)], n) is not None:
            keep.append(row)
    facets = tuple(sorted((coeffs, rhs) for coeffs, rhs, _ in keep))
    return CanonicalSystem(tuple(eq_canon), facets, n)
