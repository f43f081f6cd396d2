"""Matroids, their flat lattices, and valuated matroids given by covectors.

Ground sets are {0, ..., n-1} and subsets travel as frozensets.  Construction
is eager and validating: a Matroid that exists has passed the basis exchange
check, so downstream code never revalidates.  Everything here is desk scale,
capped at twelve ground elements.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

from .exact import INF

MAX_GROUND = 12


class MatroidError(ValueError):
    """The input violates a matroid axiom or a structural precondition."""


def _key(s: frozenset) -> tuple:
    return (len(s), tuple(sorted(s)))


def _fmt(s: Iterable[int]) -> str:
    return "{" + ",".join(str(e) for e in sorted(s)) + "}"


class FlatLattice:
    """Flats grouped by rank; meet is set intersection, top is the ground set."""

    def __init__(self, ground: frozenset, by_rank: Sequence[Iterable[frozenset]]):
        self.ground = ground
        self.by_rank: tuple[tuple[frozenset, ...], ...] = tuple(
            tuple(sorted(level, key=_key)) for level in by_rank
        )
        self.rank_of_flat: dict[frozenset, int] = {
            f: k for k, level in enumerate(self.by_rank) for f in level
        }

    @property
    def length(self) -> int:
        return len(self.by_rank) - 1

    def all_flats(self) -> frozenset:
        return frozenset(self.rank_of_flat)

    def meet(self, f: frozenset, g: frozenset) -> frozenset:
        h = f & g
        if h not in self.rank_of_flat:
            raise MatroidError(f"meet of {_fmt(f)} and {_fmt(g)} is not a flat")
        return h

    def validate(self) -> list[str]:
        return flat_family_problems(len(self.ground), self.rank_of_flat)


def flat_family_problems(n: int, family: Iterable[frozenset]) -> list[str]:
    """Violations of the matroid flat-lattice axioms in the given family:
    the ground set present, closure under intersection, and at every member
    the partition property (each outside element in exactly one cover)."""
    ground = frozenset(range(n))
    fam = {frozenset(f) for f in family}
    problems = []
    for f in sorted(fam, key=_key):
        if not f <= ground:
            problems.append(f"set {_fmt(f)} leaves the ground set")
    if problems:
        return problems
    if ground not in fam:
        problems.append("the ground set itself is missing from the family")
    members = sorted(fam, key=_key)
    for f, g in combinations(members, 2):
        if f & g not in fam:
            problems.append(
                f"intersection of {_fmt(f)} and {_fmt(g)} escapes the family"
            )
    for f in members:
        if f == ground:
            continue
        above = [g for g in members if f < g]
        covers = [g for g in above if not any(f < h < g for h in above)]
        for e in sorted(ground - f):
            hits = sum(1 for g in covers if e in g)
            if hits != 1:
                problems.append(
                    f"element {e} lies in {hits} covers of {_fmt(f)} instead of one"
                )
    return problems


def intersection_closure(sets: Iterable[frozenset]) -> set[frozenset]:
    closed = {frozenset(s) for s in sets}
    frontier = list(closed)
    while frontier:
        s = frontier.pop()
        for t in list(closed):
            u = s & t
            if u not in closed:
                closed.add(u)
                frontier.append(u)
    return closed


class Matroid:
    """Defined by its bases; the rank function and flats are derived lazily."""

    def __init__(self, n: int, bases: Iterable[Iterable[int]]):
        if not 1 <= n <= MAX_GROUND:
            raise MatroidError(f"ground size must be between 1 and {MAX_GROUND}")
        self.n = n
        self.ground = frozenset(range(n))
        clean = {frozenset(b) for b in bases}
        if not clean:
            raise MatroidError("at least one basis is required")
        for b in clean:
            if not b <= self.ground:
                raise MatroidError(f"basis {_fmt(b)} leaves the ground set")
        sizes = {len(b) for b in clean}
        if len(sizes) > 1:
            raise MatroidError("bases must all have the same size")
        self.rank_value = sizes.pop()
        self.bases = tuple(sorted(clean, key=_key))
        self._basis_masks = [sum(1 << e for e in b) for b in self.bases]
        self._rank_cache: dict[int, int] = {}
        self._lattice: FlatLattice | None = None
        self._check_exchange(clean)

    def _check_exchange(self, basis_set: set[frozenset]) -> None:
        for b1 in self.bases:
            for b2 in self.bases:
                for x in b1 - b2:
                    rest = b1 - {x}
                    if not any(rest | {y} in basis_set for y in b2 - b1):
                        raise MatroidError(
                            "basis exchange fails for the pair "
                            f"{_fmt(b1)}, {_fmt(b2)}: no replacement for {x}"
                        )

    # -- rank and closure ---------------------------------------------------

    def rank(self, subset: Iterable[int]) -> int:
        m = 0
        for e in subset:
            if not 0 <= e < self.n:
                raise MatroidError(f"element {e} is outside the ground set")
            m |= 1 << e
        cached = self._rank_cache.get(m)
        if cached is None:
            cached = max((m & bm).bit_count() for bm in self._basis_masks)
            self._rank_cache[m] = cached
        return cached

    def closure(self, subset: Iterable[int]) -> frozenset:
        s = frozenset(subset)
        r = self.rank(s)
        return frozenset(
            e for e in self.ground if e in s or self.rank(s | {e}) == r
        )

    def loops(self) -> frozenset:
        return self.closure(())

    def is_loopless(self) -> bool:
        return not self.loops()

    def is_simple(self) -> bool:
        return self.is_loopless() and all(
            self.rank(p) == 2 for p in combinations(range(self.n), 2)
        )

    # -- flats ----------------------------------------------------------------

    @property
    def lattice(self) -> FlatLattice:
        if self._lattice is None:
            levels = [[self.closure(())]]
            for _ in range(self.rank_value):
                nxt = {
                    self.closure(f | {e})
                    for f in levels[-1]
                    for e in self.ground - f
                }
                levels.append(sorted(nxt, key=_key))
            self._lattice = FlatLattice(self.ground, levels)
        return self._lattice

    def flats(self, k: int) -> tuple[frozenset, ...]:
        if not 0 <= k <= self.rank_value:
            raise MatroidError(f"no flats of rank {k} in a rank-{self.rank_value} matroid")
        return self.lattice.by_rank[k]

    def hyperplanes(self) -> tuple[frozenset, ...]:
        if self.rank_value == 0:
            return ()
        return self.flats(self.rank_value - 1)

    def cocircuits(self) -> tuple[frozenset, ...]:
        return tuple(sorted((self.ground - h for h in self.hyperplanes()), key=_key))

    # -- identity ---------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Matroid)
            and self.n == other.n
            and self.bases == other.bases
        )

    def __hash__(self) -> int:
        return hash((self.n, self.bases))

    def __repr__(self) -> str:
        return f"Matroid(n={self.n}, rank={self.rank_value}, bases={len(self.bases)})"

    # -- constructors -------------------------------------------------------------

    @classmethod
    def from_nonspanning_circuits(
        cls, rank: int, n: int, circuits: Iterable[Iterable[int]]
    ) -> "Matroid":
        circs = [frozenset(c) for c in circuits]
        for c in circs:
            if len(c) > rank:
                raise MatroidError(
                    f"circuit {_fmt(c)} has more than {rank} elements and spans"
                )
            if not c:
                raise MatroidError("the empty set cannot be a circuit")
        for c, d in combinations(circs, 2):
            if c <= d or d <= c:
                raise MatroidError(
                    f"circuits {_fmt(c)} and {_fmt(d)} are comparable"
                )
        bases = [
            frozenset(b)
            for b in combinations(range(n), rank)
            if not any(c <= frozenset(b) for c in circs)
        ]
        if not bases:
            raise MatroidError("every candidate basis contains a listed circuit")
        m = cls(n, bases)
        for c in circs:
            if not (
                m.rank(c) == len(c) - 1
                and all(m.rank(c - {x}) == len(c) - 1 for x in c)
            ):
                raise MatroidError(
                    f"listed set {_fmt(c)} is not a circuit of the result"
                )
        return m

    @classmethod
    def from_flats(cls, n: int, family: Iterable[frozenset]) -> "Matroid":
        fam = {frozenset(f) for f in family}
        problems = flat_family_problems(n, fam)
        if problems:
            raise MatroidError("not a matroid flat lattice: " + problems[0])
        ground = frozenset(range(n))
        # longest chain below each member; the family is graded once the
        # partition property holds, so this is the rank of the flat
        height: dict[frozenset, int] = {}
        for f in sorted(fam, key=len):
            height[f] = max((height[g] + 1 for g in fam if g < f), default=0)
        r = height[ground]
        proper = [f for f in fam if f != ground]
        bases = [
            frozenset(c)
            for c in combinations(range(n), r)
            if not any(frozenset(c) <= f for f in proper)
        ]
        if not bases:
            raise MatroidError("the family admits no spanning set of its own length")
        m = cls(n, bases)
        if m.lattice.all_flats() != frozenset(fam):
            raise MatroidError(
                "family is not the flat lattice of the matroid it generates"
            )
        return m

    @classmethod
    def from_rank2_flats(cls, n: int, lines: Iterable[Iterable[int]]) -> "Matroid":
        """Rank-3 matroid presented by its lines; uncovered pairs are implicit
        two-point lines and need not be listed."""
        lns = [frozenset(l) for l in lines]
        ground = frozenset(range(n))
        for l in lns:
            if not l <= ground:
                raise MatroidError(f"line {_fmt(l)} leaves the ground set")
            if len(l) < 2:
                raise MatroidError(f"line {_fmt(l)} has fewer than two points")
        for l, m in combinations(lns, 2):
            if len(l & m) > 1:
                raise MatroidError(
                    f"lines {_fmt(l)} and {_fmt(m)} share more than one point"
                )
        big = [l for l in lns if len(l) >= 3]
        bases = [
            frozenset(t)
            for t in combinations(range(n), 3)
            if not any(frozenset(t) <= l for l in big)
        ]
        if not bases:
            raise MatroidError("all triples are collinear, so the rank is below 3")
        result = cls(n, bases)
        listed = {l for l in lns}
        implicit = {
            frozenset(p)
            for p in combinations(range(n), 2)
            if not any(frozenset(p) <= l for l in lns)
        }
        if set(result.flats(2)) != listed | implicit:
            raise MatroidError("listed lines are not the rank-2 flats of the result")
        return result


def uniform_matroid(rank: int, n: int) -> Matroid:
    return Matroid(n, combinations(range(n), rank))


# -- comparisons and derived matroids -------------------------------------------


def is_quotient(quotient: Matroid, matroid: Matroid) -> bool:
    """Every flat of the first matroid is a flat of the second."""
    if quotient.n != matroid.n:
        raise MatroidError("quotient comparison needs a common ground set")
    return quotient.lattice.all_flats() <= matroid.lattice.all_flats()


def submatroid(matroid: Matroid, keep: Iterable[int]) -> Matroid:
    """Restriction to a subset that still spans, relabeled in sorted order."""
    kept = sorted(set(keep))
    kept_set = frozenset(kept)
    if not kept_set <= matroid.ground:
        raise MatroidError("kept elements leave the ground set")
    if matroid.rank(kept_set) < matroid.rank_value:
        raise MatroidError(f"kept set {_fmt(kept_set)} spans no basis")
    relabel = {e: i for i, e in enumerate(kept)}
    bases = [
        frozenset(relabel[e] for e in b) for b in matroid.bases if b <= kept_set
    ]
    return Matroid(len(kept), bases)


def simplify(matroid: Matroid) -> tuple[Matroid, dict[int, int | None]]:
    """Drop loops and merge parallel classes.

    The map sends each original element to its new label, or to None for a
    loop.  Class representatives are the smallest members, in sorted order.
    """
    loops = matroid.loops()
    reps: list[int] = []
    assignment: dict[int, int | None] = {}
    for e in range(matroid.n):
        if e in loops:
            assignment[e] = None
            continue
        for i, r in enumerate(reps):
            if matroid.rank({r, e}) == 1:
                assignment[e] = i
                break
        else:
            assignment[e] = len(reps)
            reps.append(e)
    bases = {
        frozenset(assignment[e] for e in b) for b in matroid.bases
    }
    return Matroid(len(reps), bases), assignment


def matroid_iso(m1: Matroid, m2: Matroid) -> dict[int, int] | None:
    """A rank-preserving bijection of ground sets, or None.

    Backtracking over element images, pruning with per-element profiles and
    the ranks of small mapped subsets; a candidate surviving to a full map is
    accepted once every basis lands on a basis.
    """
    if (m1.n, m1.rank_value, len(m1.bases)) != (m2.n, m2.rank_value, len(m2.bases)):
        return None

    def profile(m: Matroid, e: int) -> tuple:
        through = sum(1 for b in m.bases if e in b)
        flat_sizes = tuple(
            tuple(sorted(len(f) for f in m.flats(k) if e in f))
            for k in range(1, m.rank_value)
        )
        return (through, flat_sizes)

    prof1 = {e: profile(m1, e) for e in range(m1.n)}
    prof2 = {e: profile(m2, e) for e in range(m2.n)}
    if sorted(prof1.values()) != sorted(prof2.values()):
        return None

    # rarest profile first shrinks the branching factor early
    order = sorted(range(m1.n), key=lambda e: (sum(
        1 for p in prof1.values() if p == prof1[e]), e))
    basis_set2 = set(m2.bases)

    def extend(pos: int, image: dict[int, int], used: set[int]) -> dict[int, int] | None:
        if pos == m1.n:
            for b in m1.bases:
                if frozenset(image[e] for e in b) not in basis_set2:
                    return None
            return dict(image)
        x = order[pos]
        mapped = order[:pos]
        for y in range(m2.n):
            if y in used or prof2[y] != prof1[x]:
                continue
            ok = True
            for size in range(1, min(4, len(mapped) + 1)):
                for rest in combinations(mapped, size):
                    s1 = frozenset(rest) | {x}
                    s2 = frozenset(image[e] for e in rest) | {y}
                    if m1.rank(s1) != m2.rank(s2):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            image[x] = y
            used.add(y)
            found = extend(pos + 1, image, used)
            if found is not None:
                return found
            del image[x]
            used.discard(y)
        return None

    return extend(0, {}, set())


# -- adjoints of rank-3 matroids ---------------------------------------------


def _require_simple_rank3(matroid: Matroid) -> tuple[frozenset, ...]:
    if matroid.rank_value != 3 or not matroid.is_simple():
        raise MatroidError("adjoints are defined here for simple rank-3 matroids")
    return matroid.flats(2)


def free_adjoint(matroid: Matroid) -> Matroid:
    """Rank-3 matroid on the lines of the input: its own lines are the pencils
    of lines through a point, together with the pairs of disjoint lines.
    Ground element i stands for matroid.flats(2)[i]."""
    lines = _require_simple_rank3(matroid)
    pencils = [
        frozenset(i for i, l in enumerate(lines) if e in l)
        for e in range(matroid.n)
    ]
    disjoint = [
        frozenset({i, j})
        for i, j in combinations(range(len(lines)), 2)
        if not lines[i] & lines[j]
    ]
    return Matroid.from_rank2_flats(len(lines), pencils + disjoint)


def is_adjoint(candidate: Matroid, matroid: Matroid) -> bool:
    """Whether the candidate, on the lines of the input in canonical order,
    turns every rank-k flat F into a corank-k flat {i : F inside line i}."""
    lines = _require_simple_rank3(matroid)
    if candidate.n != len(lines) or candidate.rank_value != 3:
        return False
    for k in range(4):
        level = set(candidate.flats(3 - k))
        for f in matroid.flats(k):
            incident = frozenset(i for i, l in enumerate(lines) if f <= l)
            if incident not in level:
                return False
    return True


# -- tropical spans ---------------------------------------------------------------


Covector = tuple  # entries are Fraction or INF


def _normalise_covector(n: int, vec: Iterable) -> Covector:
    entries = tuple(x if x is INF else Fraction(x) for x in vec)
    if len(entries) != n:
        raise MatroidError(f"covector has {len(entries)} entries, expected {n}")
    return entries


def _project(
    target: Sequence, generators: Sequence[Covector]
) -> tuple[list, list]:
    """Least element of the span lying above the target, with its coefficients.

    Coefficient i is the largest shift keeping generator i above the target;
    the projection is the pointwise minimum of the shifted generators."""
    n = len(target)
    lambdas = []
    for g in generators:
        gaps = [target[j] - g[j] for j in range(n) if g[j] is not INF]
        lambdas.append(max(gaps) if gaps else INF)
    projected = [
        min((lam + g[j] for lam, g in zip(lambdas, generators)), default=INF)
        for j in range(n)
    ]
    return lambdas, projected


class ValuatedMatroid:
    """Tropical span of finitely many extended-rational covectors.

    The exchange axiom is spot-verified on construction over all generator
    pairs that agree in some coordinate; failure is a construction error.
    """

    def __init__(self, n: int, generators: Iterable[Iterable]):
        if not 1 <= n <= MAX_GROUND:
            raise MatroidError(f"ambient size must be between 1 and {MAX_GROUND}")
        self.n = n
        self.ground = frozenset(range(n))
        seen = []
        for vec in generators:
            cov = _normalise_covector(n, vec)
            if all(x is INF for x in cov):
                continue  # the zero covector is in every span
            if cov not in seen:
                seen.append(cov)
        self.generators: tuple[Covector, ...] = tuple(seen)
        self._underlying: Matroid | None = None
        violation = self._exchange_violation()
        if violation is not None:
            a, b, i = violation
            raise MatroidError(
                "valuated exchange fails for generators "
                f"{a} and {b} at coordinate {i}"
            )

    def _exchange_violation(self) -> tuple[Covector, Covector, int] | None:
        for a, b in combinations(self.generators, 2):
            for i in range(self.n):
                if a[i] != b[i]:
                    continue
                floor = [min(a[j], b[j]) for j in range(self.n)]
                usable = [g for g in self.generators if g[i] is INF]
                _, best = _project(floor, usable)
                for j in range(self.n):
                    if j != i and a[j] != b[j] and best[j] != floor[j]:
                        return (a, b, i)
        return None

    @property
    def underlying_matroid(self) -> Matroid:
        """Matroid whose covectors are the supports of span members; its
        cocircuits are the minimal nonempty generator supports."""
        if self._underlying is None:
            supports = {
                frozenset(j for j in range(self.n) if g[j] is not INF)
                for g in self.generators
            }
            supports.discard(frozenset())
            if not supports:
                self._underlying = Matroid(self.n, [frozenset()])
            else:
                minimal = [
                    s for s in supports if not any(t < s for t in supports)
                ]
                family = intersection_closure(
                    [self.ground - s for s in minimal] + [self.ground]
                )
                self._underlying = Matroid.from_flats(self.n, family)
        return self._underlying

    @property
    def rank_value(self) -> int:
        return self.underlying_matroid.rank_value


def span_membership(w: Iterable, valuated: ValuatedMatroid) -> list | None:
    """Coefficients exhibiting w as a tropical combination of the generators,
    or None.  Membership holds exactly when the least span element above w
    is w itself."""
    target = _normalise_covector(valuated.n, w)
    lambdas, projected = _project(target, valuated.generators)
    if all(p == t for p, t in zip(projected, target)):
        return lambdas
    return None


def initial_matroid(valuated: ValuatedMatroid, w: Iterable) -> Matroid:
    """Matroid of supports of members lying above w, at a finite member w.

    A member above w is a combination with every coefficient at or above its
    projection value; a coordinate stays tight only where a generator held at
    its projection value attains the max that defined it.  Sweeping each
    coefficient through its critical value and beyond therefore yields, per
    generator, one proper flat (the complement of that tight set), and the
    support of any member above w is an intersection of these.
    """
    target = _normalise_covector(valuated.n, w)
    if any(x is INF for x in target):
        raise MatroidError("initial matroids are taken at finite members only")
    lambdas = span_membership(target, valuated)
    if lambdas is None:
        raise MatroidError("the point is not in the span")
    family = {valuated.ground}
    for g, lam in zip(valuated.generators, lambdas):
        if lam is INF:
            continue
        tight = frozenset(
            j
            for j in range(valuated.n)
            if g[j] is not INF and target[j] - g[j] == lam
        )
        family.add(valuated.ground - tight)
    return Matroid.from_flats(valuated.n, intersection_closure(family))


def trop_generators(matroid: Matroid) -> list[Covector]:
    """Indicator covectors of the cocircuits: 0 on the cocircuit, infinity off
    it.  These generate the span whose members' supports are the covectors."""
    zero = Fraction(0)
    return [
        tuple(zero if j in c else INF for j in range(matroid.n))
        for c in matroid.cocircuits()
    ]


@lru_cache(maxsize=None)
def trop_span(matroid: Matroid) -> ValuatedMatroid:
    return ValuatedMatroid(matroid.n, trop_generators(matroid))


def trop_membership(w: Iterable, matroid: Matroid) -> bool:
    return span_membership(w, trop_span(matroid)) is not None
