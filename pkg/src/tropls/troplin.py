"""Min-plus linear algebra over exact rationals.

Rows of a matrix are "vectors" (say, functions evaluated at a fixed list of
points).  A set of rows is dependent when some finite combination
min_i (a_i + row_i) attains its minimum at least twice in every column.
Independence is certified positively: an assignment of a distinct witness
column to every row, together with coefficients making each row the strict
unique minimiser in its witness column.  The two views are equivalent, and
both directions are constructive here.

The searches are exact.  Strict inequalities between potentials are handled
by Bellman-Ford over lexicographic weights (rational part, then a count of
infinitesimals), and witnesses are materialised back into plain rationals.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterable, Sequence

from .errors import BudgetError
from .exact import INF


@dataclass(frozen=True)
class TropicalMatrix:
    """Rectangular array of Fractions and `INF` (the min-plus zero)."""

    entries: tuple[tuple[object, ...], ...]

    @staticmethod
    def from_rows(rows: Iterable[Iterable[object]]) -> "TropicalMatrix":
        data = tuple(
            tuple(x if x is INF else Fraction(x) for x in row) for row in rows
        )
        if data and any(len(r) != len(data[0]) for r in data):
            raise ValueError("ragged rows")
        return TropicalMatrix(data)

    @property
    def row_count(self) -> int:
        return len(self.entries)

    @property
    def col_count(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def submatrix(self, rows: Sequence[int], cols: Sequence[int] | None = None) -> "TropicalMatrix":
        cols = list(range(self.col_count)) if cols is None else list(cols)
        return TropicalMatrix(
            tuple(tuple(self.entries[i][j] for j in cols) for i in rows)
        )


def min_attained_twice_everywhere(
    mat: TropicalMatrix, coefficients: Sequence[Fraction]
) -> bool:
    """Whether min_i (coefficients[i] + row_i) ties in every column."""
    if len(coefficients) != mat.row_count:
        raise ValueError("need one coefficient per row")
    if mat.row_count < 2:
        return False
    for j in range(mat.col_count):
        vals = [coefficients[i] + mat.entries[i][j] for i in range(mat.row_count)]
        m = min(vals)
        if sum(1 for x in vals if x == m) < 2:
            return False
    return True


# -- strict difference constraints -----------------------------------------
#
# Constraints have the form a_i < a_r + c.  Weights are pairs (c, -1); a cycle
# is infeasible when its rational part is negative, or zero with at least one
# strict edge.  Potentials from Bellman-Ford are lexicographic pairs, turned
# into plain rationals by giving the infinitesimal a small concrete value.


class _StrictSystem:
    def __init__(self, n: int):
        self.n = n
        self.edges: list[tuple[int, int, Fraction]] = []  # a_to <= a_from + c (strict)

    def add(self, to: int, frm: int, bound: Fraction) -> None:
        self.edges.append((to, frm, bound))

    def solve(self) -> list[Fraction] | None:
        ZERO = (Fraction(0), 0)
        dist: list[tuple[Fraction, int]] = [ZERO] * self.n
        for _ in range(self.n):
            changed = False
            for to, frm, c in self.edges:
                cand = (dist[frm][0] + c, dist[frm][1] - 1)
                if cand < dist[to]:
                    dist[to] = cand
                    changed = True
            if not changed:
                break
        for to, frm, c in self.edges:
            if (dist[frm][0] + c, dist[frm][1] - 1) < dist[to]:
                return None  # still relaxing after n rounds: negative cycle
        # materialise the infinitesimal: slack of every edge must stay positive
        slacks = [
            dist[frm][0] + c - dist[to][0] for to, frm, c in self.edges
        ]
        if any(s < 0 for s in slacks):
            raise AssertionError("relaxation left a violated constraint")
        eps_gap = max(
            (dist[to][1] - dist[frm][1] for to, frm, _ in self.edges), default=0
        )
        positive = [s for s in slacks if s > 0]
        if positive and eps_gap > 0:
            delta = min(positive) / (2 * eps_gap)
        else:
            delta = Fraction(1)
        out = [v + e * delta for v, e in dist]
        for to, frm, c in self.edges:
            if not out[to] < out[frm] + c:
                raise AssertionError("infinitesimal materialisation failed")
        return out


def _dedup_columns(mat: TropicalMatrix) -> list[int]:
    """Representative column indices; columns equal up to a constant offset
    impose identical strictness constraints.  All-infinite columns witness
    nothing and are dropped."""
    seen: dict[tuple, int] = {}
    reps = []
    for j in range(mat.col_count):
        col = tuple(mat.entries[i][j] for i in range(mat.row_count))
        finite = [x for x in col if x is not INF]
        if not finite:
            continue
        base = finite[0]
        key = tuple(INF if x is INF else x - base for x in col)
        if key not in seen:
            seen[key] = j
            reps.append(j)
    return reps


def independence_certificate(
    mat: TropicalMatrix, rows: Sequence[int] | None = None
) -> tuple[list[Fraction], dict[int, int]] | None:
    """Coefficients plus an injective row -> column witness map, or None.

    In the witness column of each row, that row is the strict unique
    minimiser of coefficient + entry over the given rows.
    """
    rows = list(range(mat.row_count)) if rows is None else list(rows)
    k = len(rows)
    if k == 0:
        return [], {}
    if k > mat.col_count:
        return None
    if k == 1:
        for j in range(mat.col_count):
            if mat.entries[rows[0]][j] is not INF:
                return [Fraction(0)], {rows[0]: j}
        return None  # the all-infinite row is the zero element
    cols = _dedup_columns(mat.submatrix(rows))

    sys_edges: list[list[tuple[int, int, Fraction]]] = []

    def column_constraints(t: int, j: int) -> list[tuple[int, int, Fraction]]:
        # row rows[t] strictly below every other chosen row in column j;
        # rows sitting at infinity there impose nothing
        out = []
        for s in range(k):
            if s != t and mat.entries[rows[s]][j] is not INF:
                c = mat.entries[rows[s]][j] - mat.entries[rows[t]][j]
                out.append((t, s, c))
        return out

    assignment: dict[int, int] = {}

    def feasible() -> list[Fraction] | None:
        system = _StrictSystem(k)
        for block in sys_edges:
            for e in block:
                system.add(*e)
        return system.solve()

    def dfs(t: int, used: set[int]) -> list[Fraction] | None:
        if t == k:
            return feasible()
        for j in cols:
            if j in used or mat.entries[rows[t]][j] is INF:
                continue
            sys_edges.append(column_constraints(t, j))
            sol = feasible()
            if sol is not None:
                assignment[rows[t]] = j
                used.add(j)
                deeper = dfs(t + 1, used)
                if deeper is not None:
                    return deeper
                used.discard(j)
                del assignment[rows[t]]
            sys_edges.pop()
        return None

    sol = dfs(0, set())
    if sol is None:
        return None
    coeffs = [Fraction(0)] * k
    for t in range(k):
        coeffs[t] = sol[t]
    # double check against the definition
    for t, r in enumerate(rows):
        j = assignment[r]
        mine = coeffs[t] + mat.entries[r][j]
        for s, r2 in enumerate(rows):
            if s != t and not mine < coeffs[s] + mat.entries[r2][j]:
                raise AssertionError("certificate verification failed")
    return coeffs, dict(assignment)


def rows_independent(mat: TropicalMatrix, rows: Sequence[int] | None = None) -> bool:
    return independence_certificate(mat, rows) is not None


def max_independent_rows(
    mat: TropicalMatrix, upper_bound: int | None = None
) -> tuple[int, tuple[int, ...]]:
    """Largest independent row subset (the tropical rank) with one witness set.

    Branch and bound over rows in order; independence is monotone under
    taking subsets, so pruning on the current best is sound.
    """
    n = mat.row_count
    ub = n if upper_bound is None else min(upper_bound, n)
    best: tuple[int, tuple[int, ...]] = (0, ())

    def dfs(start: int, chosen: list[int]) -> None:
        nonlocal best
        if len(chosen) > best[0]:
            best = (len(chosen), tuple(chosen))
        if best[0] >= ub:
            return
        remaining = n - start
        if len(chosen) + remaining <= best[0]:
            return
        for r in range(start, n):
            if len(chosen) + (n - r) <= best[0]:
                break
            if independence_certificate(mat, chosen + [r]) is not None:
                chosen.append(r)
                dfs(r + 1, chosen)
                chosen.pop()
                if best[0] >= ub:
                    return
        return

    dfs(0, [])
    return best


def tropical_rank(mat: TropicalMatrix, upper_bound: int | None = None) -> int:
    return max_independent_rows(mat, upper_bound)[0]


def dependence_coefficients(mat: TropicalMatrix) -> list[Fraction] | None:
    """Finite coefficients tying the minimum twice in every column, or None.

    Monotone fixpoint iteration: a_i must reach at least
    max_j (min_{r != i} a_r + A[r][j]) - A[i][j] for every i; dependence
    witnesses are exactly the vectors above the operator.  On the common
    denominator lattice the iteration either stabilises (dependent) or
    escapes the a-priori window (independent).
    """
    k = mat.row_count
    if k < 2:
        return None
    if any(x is INF for row in mat.entries for x in row):
        raise ValueError("dependence search expects finite entries")
    spread = Fraction(0)
    for j in range(mat.col_count):
        col = [mat.entries[i][j] for i in range(k)]
        spread = max(spread, max(col) - min(col))
    window = (k + 1) * (spread + 1)
    a = [Fraction(0)] * k
    changed = True
    while changed:
        changed = False
        for i in range(k):
            target = None
            for j in range(mat.col_count):
                others = min(
                    a[r] + mat.entries[r][j] for r in range(k) if r != i
                )
                t = others - mat.entries[i][j]
                if target is None or t > target:
                    target = t
            if target is not None and target > a[i]:
                a[i] = target
                changed = True
                if a[i] > window:
                    return None
    if not min_attained_twice_everywhere(mat, a):
        raise AssertionError("fixpoint reached but tie check failed")
    return a


# -- determinant and minor rank (small sizes; used for cross-checks) ---------


def tropical_determinant(mat: TropicalMatrix) -> tuple[object, bool]:
    """(min over permutations of the diagonal sum, nonsingularity flag).

    Nonsingular means the minimising permutation is unique and the value is
    finite.
    """
    k = mat.row_count
    if k != mat.col_count:
        raise ValueError("square matrices only")
    if k > 8:
        raise BudgetError("permutation expansion capped at 8x8")
    best, count = None, 0
    for perm in permutations(range(k)):
        s: object = Fraction(0)
        for i in range(k):
            x = mat.entries[i][perm[i]]
            if x is INF:
                s = INF
                break
            s = s + x
        if best is None or s < best:
            best, count = s, 1
        elif s == best:
            count += 1
    return best, (count == 1 and best is not INF)


def square_tropically_singular(mat: TropicalMatrix) -> bool:
    return not tropical_determinant(mat)[1]


def tropical_rank_by_minors(mat: TropicalMatrix) -> int:
    """Largest k with a tropically nonsingular k x k minor (brute force)."""
    n, p = mat.row_count, mat.col_count
    for k in range(min(n, p, 8), 0, -1):
        for rows in combinations(range(n), k):
            for cols in combinations(range(p), k):
                if not square_tropically_singular(mat.submatrix(rows, cols)):
                    return k
    return 0
