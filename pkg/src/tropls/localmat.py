"""Minimum-locus combinatorics of a submodule at its base divisor.

Removing the support of the base divisor cuts the graph into finitely many
open components.  Each member selects the components whose closure avoids its
minimum locus; those selection sets, closed under intersection, form the flat
lattice of a matroid whenever the submodule is a genuine linear series with
big minimizers.  This module extracts that matroid, checks the big-minimizer
condition that makes the extraction sound, compares the star of a
nondegenerate divisor with the matroid's covector fan through evaluation at
one sample point per component, and matches the local matroid against an
initial matroid of a parametrizing valuated matroid.

Validation failure of the candidate flat family is a result, not a crash: an
invalid family is how a submodule reveals that it is not a linear series.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .exact import INF
from .graph import Component, Divisor, Point, complement_components
from .matroids import (
    Matroid,
    MatroidError,
    ValuatedMatroid,
    flat_family_problems,
    initial_matroid,
    matroid_iso,
    simplify,
    submatroid,
    trop_membership,
)
from .plfun import (
    PLFunction,
    component_flat,
    difference,
    pointwise_sum,
    sup_difference,
    tropical_combination,
)
from .series import (
    TropSubmodule,
    _incident_types,
    divisor_in_system,
    nondegenerate,
    span_coefficients,
)

_F0 = Fraction(0)


def _flat_key(f: frozenset) -> tuple:
    return (len(f), tuple(sorted(f)))


# -- translation ----------------------------------------------------------------


def translate(sub: TropSubmodule, phi: PLFunction) -> TropSubmodule:
    """The submodule of differences member - phi, based at base + div(phi).

    Every generator stays compatible because the shift cancels: the new base
    plus the divisor of a shifted generator is the old base plus the divisor
    of the old generator.  phi is typically a member, which puts the constants
    in the result, but any function on the graph is accepted.
    """
    if phi.graph != sub.graph:
        raise ValueError("function lives on a different graph")
    gens = [difference(g, phi) for g in sub.generators]
    return TropSubmodule(
        sub.base + phi.divisor(), gens, max_generators=sub.size
    )


# -- big minimizers ---------------------------------------------------------------


@dataclass(frozen=True)
class MinimizerReport:
    """Outcome of the big-minimizer check.

    `criterion_applies` records whether the base divisor is multiplicity free
    with no valence-1 support point; over such a base every submodule has the
    property, so a True here is a proof that needs no generator scan.  When
    the property fails, `witness_generator` indexes a generator whose minimum
    locus contains no component.
    """

    holds: bool
    criterion_applies: bool
    witness_generator: int | None = None

    def __bool__(self) -> bool:
        return self.holds


def has_big_minimizers(sub: TropSubmodule) -> MinimizerReport:
    """Whether every member's minimum locus swallows a whole component.

    Checked on the normalized generators only: the minimum locus of a
    combination is the union of the loci of the generators attaining the
    least coefficient, so a failure always surfaces on a single generator.
    """
    comps = complement_components(sub.graph, sub.base.support())
    criterion = all(m == 1 for _, m in sub.base.items()) and not any(
        p.is_vertex and sub.graph.valence(p.vertex) == 1
        for p in sub.base.support()
    )
    for i, g in enumerate(sub.generators):
        if len(component_flat(g, comps)) == len(comps):
            return MinimizerReport(False, criterion, i)
    return MinimizerReport(True, criterion)


# -- the local matroid --------------------------------------------------------------


@dataclass
class LocalMatroidResult:
    """Component ground set, the matroid when the flat family validates, and
    the provenance of every flat as the generator subset whose selection sets
    intersect to it (empty tuple for the adjoined ground set)."""

    components: tuple[Component, ...]
    matroid: Matroid | None
    provenance: dict[frozenset, tuple[int, ...]]
    problems: list[str]
    loopless: bool | None

    def __bool__(self) -> bool:
        return self.matroid is not None

    def flats(self) -> tuple[frozenset, ...]:
        return tuple(sorted(self.provenance, key=_flat_key))


def local_matroid(sub: TropSubmodule) -> LocalMatroidResult:
    """Matroid whose flats are the component selections of the members.

    Selection sets are computed for the normalized generators and closed
    under intersection; corank-1 flats of a valid result always carry
    single-generator provenance, because the generators generate.  The family
    is then validated as a matroid flat lattice; defects are returned in
    `problems` and leave `matroid` unset.  For a linear series with big
    minimizers the matroid has rank one more than the Baker-Norine rank, and
    it is loopless exactly when the base divisor lies in the system.
    """
    comps = complement_components(sub.graph, sub.base.support())
    n = len(comps)
    prov: dict[frozenset, tuple[int, ...]] = {}
    for i, g in enumerate(sub.generators):
        prov.setdefault(frozenset(component_flat(g, comps)), (i,))
    frontier = sorted(prov, key=_flat_key)
    while frontier:
        s = frontier.pop()
        for t in list(prov):
            u = s & t
            if u not in prov:
                prov[u] = tuple(sorted(set(prov[s] + prov[t])))
                frontier.append(u)
    prov.setdefault(frozenset(range(n)), ())

    problems = flat_family_problems(n, prov.keys())
    if problems:
        return LocalMatroidResult(comps, None, prov, problems, None)
    try:
        matroid = Matroid.from_flats(n, prov.keys())
    except MatroidError as err:  # family already validated; kept honest
        return LocalMatroidResult(comps, None, prov, [str(err)], None)
    return LocalMatroidResult(comps, matroid, prov, [], matroid.is_loopless())


def _flat_witness(
    tsub: TropSubmodule, lm: LocalMatroidResult, flat: frozenset
) -> PLFunction:
    """A member with minimum zero whose selection set is the given flat."""
    gens = [tsub.generators[i] for i in lm.provenance[flat]]
    witness = tropical_combination(gens, [_F0] * len(gens))
    if frozenset(component_flat(witness, lm.components)) != flat:
        raise MatroidError(
            f"no generator witness realizes the flat {sorted(flat)}"
        )
    return witness


# -- star versus covector fan ----------------------------------------------------


def _sample_point(comp: Component) -> Point:
    for eid, lo, hi in comp.intervals:
        if hi > lo:
            return Point.on_edge(comp.graph, eid, (lo + hi) / 2)
    if comp.intervals:
        eid, lo, _ = comp.intervals[0]
        return Point.on_edge(comp.graph, eid, lo)
    return Point.at_vertex(min(comp.vertices))


@dataclass
class StarReport:
    matroid: Matroid
    components: tuple[Component, ...]
    directions_checked: int
    star_in_fan: bool
    rays_checked: int
    rays_realized: bool
    failures: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.star_in_fan and self.rays_realized


def star_matches_bergman(sub: TropSubmodule, d0: Divisor) -> StarReport:
    """Compare the star of a nondegenerate divisor with the covector fan.

    Working in the translate at d0's connecting function, members of every
    incident region are evaluated at one sample point per component and the
    resulting direction vectors must be covectors of the local matroid.
    Conversely, each corank-1 flat's indicator direction must be realized:
    capping the flat witness at half its least sample height gives a member
    whose evaluation vector is exactly the indicator of the flat at that
    height.  Both inclusions are reported separately.
    """
    phi = divisor_in_system(d0, sub)
    if phi is None:
        raise ValueError("divisor is not in the linear system")
    if not nondegenerate(d0, sub):
        raise ValueError("divisor is degenerate")
    tsub = translate(sub, phi)
    lm = local_matroid(tsub)
    if lm.matroid is None:
        raise MatroidError("no local matroid: " + lm.problems[0])
    samples = [_sample_point(c) for c in lm.components]
    direction_failures: list[str] = []
    ray_failures: list[str] = []

    types = _incident_types(tsub, PLFunction.constant(sub.graph, 0))
    for rt in types:
        vec = [tsub.member(rt.witness).value(p) for p in samples]
        if not trop_membership(vec, lm.matroid):
            direction_failures.append(f"incident direction {vec} is not a covector")

    hyperplanes = lm.matroid.hyperplanes()
    for flat in hyperplanes:
        if not flat:
            continue  # empty hyperplane: its indicator is the zero direction
        witness = _flat_witness(tsub, lm, flat)
        heights = [witness.value(samples[i]) for i in sorted(flat)]
        if min(heights) <= 0:
            ray_failures.append(f"witness of {sorted(flat)} vanishes at a sample")
            continue
        cap = min(heights) / 2
        capped = tropical_combination(
            [witness, PLFunction.constant(sub.graph, 0)], [_F0, cap]
        )
        expected = [cap if i in flat else _F0 for i in range(len(samples))]
        if [capped.value(p) for p in samples] != expected:
            ray_failures.append(
                f"capped witness of {sorted(flat)} misses the indicator"
            )
        elif span_coefficients(capped, tsub) is None:
            ray_failures.append(f"capped witness of {sorted(flat)} leaves the span")

    return StarReport(
        matroid=lm.matroid,
        components=lm.components,
        directions_checked=len(types),
        star_in_fan=not direction_failures,
        rays_checked=len(hyperplanes),
        rays_realized=not ray_failures,
        failures=direction_failures + ray_failures,
    )


# -- section of a parametrization and the initial matroid ----------------------------


@dataclass
class SectionReport:
    """Section point of the parametrization, the initial matroid there, and
    where the simplified local matroid embeds as a coordinate submatroid."""

    section_point: tuple
    initial: Matroid
    simplified_local: Matroid
    kept: tuple[int, ...] | None
    embedding: dict[int, int] | None

    def __bool__(self) -> bool:
        return self.embedding is not None


def section_and_submatroid(
    valuated: ValuatedMatroid,
    sub: TropSubmodule,
    assignment,
    phi: PLFunction,
) -> SectionReport:
    """Lift the corank-1 flat witnesses at phi and match matroids there.

    `assignment` maps each covector generator of `valuated` to the index of
    its image among sub's generators, which pins down the parametrization on
    the whole span.  Each corank-1 flat witness of the local matroid at phi
    is lifted by exact projection over the assigned generators; the section
    point is the coordinatewise minimum of the lifts.  The simplified local
    matroid is then searched for among the coordinate submatroids of the
    initial matroid at the section point.
    """
    assignment = tuple(assignment)
    if len(assignment) != len(valuated.generators):
        raise ValueError("need one generator image per covector generator")
    if any(not 0 <= a < sub.size for a in assignment):
        raise ValueError("assignment points outside the generator list")
    if span_coefficients(phi, sub) is None:
        raise ValueError("translate point is not a member")
    if not nondegenerate(sub.base + phi.divisor(), sub):
        raise ValueError("divisor is degenerate")
    tsub = translate(sub, phi)
    lm = local_matroid(tsub)
    if lm.matroid is None:
        raise MatroidError("no local matroid: " + lm.problems[0])
    if lm.matroid.rank_value == 0:
        raise MatroidError("rank-zero local matroid has no corank-1 flats")

    witnesses = [
        _flat_witness(tsub, lm, flat) for flat in lm.matroid.hyperplanes()
    ]
    # loopless, so the corank-1 witnesses meet in the constant
    assert tropical_combination(
        witnesses, [_F0] * len(witnesses)
    ) == PLFunction.constant(sub.graph, 0)

    lifts = []
    images = [sub.generators[a] for a in assignment]
    for witness in witnesses:
        member = pointwise_sum(witness, phi)
        coeffs = [sup_difference(member, g) for g in images]
        if tropical_combination(images, coeffs) != member:
            raise ValueError("lift not found (parametrization inconsistent)")
        lifts.append(
            tuple(
                min(
                    (g[j] + c for g, c in zip(valuated.generators, coeffs)
                     if g[j] is not INF),
                    default=INF,
                )
                for j in range(valuated.n)
            )
        )
    section = tuple(min(col) for col in zip(*lifts))
    if any(x is INF for x in section):
        raise MatroidError("the section point has an infinite coordinate")

    initial = initial_matroid(valuated, section)
    simplified, _ = simplify(lm.matroid)
    kept = embedding = None
    for combo in combinations(range(valuated.n), simplified.n):
        try:
            candidate = submatroid(initial, combo)
        except MatroidError:
            continue
        iso = matroid_iso(simplified, candidate)
        if iso is not None:
            kept = combo
            embedding = {e: combo[i] for e, i in iso.items()}
            break
    return SectionReport(section, initial, simplified, kept, embedding)
