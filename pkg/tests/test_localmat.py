"""Minimum-locus combinatorics at the base divisor: big minimizers, flat
family extraction and validation, the star-versus-covector-fan comparison,
and sections of a parametrizing valuated matroid."""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

import pytest

from helpers import barbell_peaks, interval, theta
from tropls.exact import INF
from tropls.graph import ClosedSubset, Divisor, Point
from tropls.localmat import (
    has_big_minimizers,
    local_matroid,
    section_and_submatroid,
    star_matches_bergman,
    translate,
)
from tropls.matroids import (
    Matroid,
    ValuatedMatroid,
    is_quotient,
    matroid_iso,
    trop_span,
    uniform_matroid,
)
from tropls.plfun import (
    PLFunction,
    difference,
    tropical_combination,
    tropical_min,
)
from tropls.series import (
    TropSubmodule,
    baker_norine_rank,
    complete_system,
    divisor_in_system,
    independence_rank,
    is_tls,
)

F = Fraction


# -- independent oracles ------------------------------------------------------


def locus_union(graph, loci) -> ClosedSubset:
    verts = frozenset().union(*(s.vertices for s in loci))
    ivals = tuple(iv for s in loci for iv in s.intervals)
    return ClosedSubset.normalise(graph, verts, ivals)


def longest_chain(family) -> int:
    """Edge length of the longest strictly increasing chain of sets."""
    order = sorted(family, key=len)
    best = {f: 0 for f in order}
    for i, f in enumerate(order):
        for g in order[:i]:
            if g < f:
                best[f] = max(best[f], best[g] + 1)
    return max(best.values(), default=0)


def member_flats(lm):
    """Flats realized by actual members: those with generator provenance."""
    return [f for f in lm.flats() if lm.provenance[f]]


# -- fixtures -----------------------------------------------------------------


class _Crossing:
    """Three lines on the unit interval crossing at 1/3 and 2/3.

    The constant 1, the slope-1 line with value 1/3 at the left end, and the
    slope-2 line through zero.  Their pairwise minima generate a strict
    subseries; the minimum of all three is the connecting function of the
    two crossing points, a nondegenerate divisor for both spans.
    """

    def __init__(self):
        g = interval()
        self.graph = g
        self.base = Divisor(g, {Point.at_vertex("v"): 2})
        self.lines = [
            PLFunction.constant(g, 1),
            PLFunction(g, {"v": F(1, 3), "w": F(4, 3)}),
            PLFunction(g, {"v": 0, "w": 2}),
        ]
        self.pairs = [
            tropical_min(self.lines[1], self.lines[2]),
            tropical_min(self.lines[0], self.lines[2]),
            tropical_min(self.lines[0], self.lines[1]),
        ]
        self.connecting = tropical_min(self.pairs[0], self.lines[0])
        self.full = TropSubmodule(self.base, self.lines)
        self.dim1 = TropSubmodule(self.base, self.pairs)
        self.d0 = self.base + self.connecting.divisor()


@pytest.fixture(scope="module")
def crossing():
    return _Crossing()


@pytest.fixture(scope="module")
def theta_k():
    g = theta()
    return complete_system(g.canonical_divisor())


@pytest.fixture(scope="module")
def barbell_span():
    phi_x, phi_y = barbell_peaks()
    k = phi_x.graph.canonical_divisor()
    return TropSubmodule(k, [phi_x, phi_y])


@pytest.fixture(scope="module")
def barbell_k():
    g = barbell_peaks()[0].graph
    return complete_system(g.canonical_divisor())


# -- translation --------------------------------------------------------------


def test_translate_moves_base(crossing):
    tsub = translate(crossing.dim1, crossing.connecting)
    assert tsub.base == crossing.d0
    assert tsub.base.degree == 2
    # compatibility: new base + new divisor = old base + old divisor
    for g, old in zip(tsub.generators, crossing.dim1.generators):
        assert tsub.base + g.divisor() == crossing.base + old.divisor()


def test_translate_roundtrip(crossing):
    tsub = translate(crossing.dim1, crossing.connecting)
    neg = difference(PLFunction.constant(crossing.graph, 0), crossing.connecting)
    back = translate(tsub, neg)
    assert back.base == crossing.base
    assert back.generators == crossing.dim1.generators


def test_translate_rejects_other_graph(crossing):
    with pytest.raises(ValueError, match="different graph"):
        translate(crossing.dim1, PLFunction.constant(theta(), 0))


# -- big minimizers -----------------------------------------------------------


def test_big_minimizers_by_criterion(theta_k):
    rep = has_big_minimizers(theta_k)
    assert rep
    assert rep.criterion_applies
    assert rep.witness_generator is None


def test_big_minimizers_witnessed_failure(crossing):
    # the slope-1 line bottoms out exactly at the left vertex, which is the
    # double base point: an isolated minimizer
    rep = has_big_minimizers(crossing.full)
    assert not rep
    assert not rep.criterion_applies
    assert rep.witness_generator == 1

    rep = has_big_minimizers(crossing.dim1)
    assert not rep
    assert rep.witness_generator == 0


def test_big_minimizers_single_component():
    g = theta()
    d = Divisor(g, {Point.at_vertex("u"): 2})
    sub = complete_system(d)
    # this class is rigid: the only member is the constant
    assert sub.size == 1
    rep = has_big_minimizers(sub)
    assert rep.holds
    assert not rep.criterion_applies


# -- local matroid extraction -------------------------------------------------


def test_interval_subseries_local_matroid(crossing):
    tsub = translate(crossing.dim1, crossing.connecting)
    lm = local_matroid(tsub)
    assert lm

    # components left of, between, and right of the two crossing points
    assert [c.vertices for c in lm.components] == [
        frozenset({"v"}), frozenset(), frozenset({"w"})
    ]
    assert [c.intervals for c in lm.components] == [
        (("e", 0, F(1, 3)),), (("e", F(1, 3), F(2, 3)),), (("e", F(2, 3), 1),)
    ]

    # each pairwise minimum hugs the connecting function except beyond one
    # crossing, so the selection sets are the three singletons
    assert lm.provenance[frozenset({2})] == (0,)
    assert lm.provenance[frozenset({1})] == (1,)
    assert lm.provenance[frozenset({0})] == (2,)
    assert lm.flats() == (
        frozenset(),
        frozenset({0}),
        frozenset({1}),
        frozenset({2}),
        frozenset({0, 1, 2}),
    )
    assert lm.matroid.lattice.length == 2
    assert lm.loopless
    assert matroid_iso(lm.matroid, uniform_matroid(2, 3)) is not None


def test_interval_full_local_matroid(crossing):
    tsub = translate(crossing.full, crossing.connecting)
    lm = local_matroid(tsub)
    assert lm
    # each line meets the lower envelope in one closed piece: selection sets
    # are the three coordinate pairs, and their closure is Boolean
    assert lm.provenance[frozenset({0, 1})] == (0,)
    assert lm.provenance[frozenset({0, 2})] == (1,)
    assert lm.provenance[frozenset({1, 2})] == (2,)
    assert len(lm.flats()) == 8
    assert lm.matroid.lattice.length == 3
    assert lm.loopless
    assert matroid_iso(lm.matroid, uniform_matroid(3, 3)) is not None


def test_theta_canonical_local_matroid(theta_k):
    lm = local_matroid(theta_k)
    assert lm
    assert len(lm.components) == 3  # one open edge per bump
    assert lm.flats() == (
        frozenset(),
        frozenset({0}),
        frozenset({1}),
        frozenset({2}),
        frozenset({0, 1, 2}),
    )
    assert matroid_iso(lm.matroid, uniform_matroid(2, 3)) is not None
    assert lm.matroid.lattice.length == baker_norine_rank(theta_k).value + 1
    # corank-1 flats come straight from single generators
    for h in lm.matroid.hyperplanes():
        assert len(lm.provenance[h]) == 1
    assert lm.loopless
    assert divisor_in_system(theta_k.base, theta_k) is not None


def test_barbell_span_has_a_loop(barbell_span):
    lm = local_matroid(barbell_span)
    assert lm
    assert [c.vertices for c in lm.components] == [
        frozenset(), frozenset(), frozenset()
    ]
    # bridge first, then the two loops, by position
    assert [c.intervals[0][0] for c in lm.components] == [
        "bridge", "loop_l", "loop_r"
    ]
    assert lm.flats() == (
        frozenset({0}),
        frozenset({0, 1}),
        frozenset({0, 2}),
        frozenset({0, 1, 2}),
    )
    assert lm.matroid.lattice.length == 2
    assert lm.matroid.loops() == frozenset({0})
    assert lm.loopless is False
    # looplessness tracks membership of the base divisor
    assert divisor_in_system(barbell_span.base, barbell_span) is None


def test_barbell_complete_system_fails_validation(barbell_k):
    """An invalid flat family is a first-class result, not a crash."""
    lm = local_matroid(barbell_k)
    assert not lm
    assert lm.matroid is None
    assert lm.loopless is None
    assert lm.problems == [
        "element 1 lies in 0 covers of {} instead of one",
        "element 2 lies in 0 covers of {} instead of one",
    ]
    # the family itself is still reported for inspection
    assert frozenset() in lm.flats()
    assert frozenset({0, 1, 2}) in lm.flats()

    # the contrapositive: a valid lattice is only guaranteed for a genuine
    # linear series with big minimizers.  Minimizers are big here, so the
    # defect shows the complete system carries too many independent members.
    assert has_big_minimizers(barbell_k)
    report = is_tls(barbell_k)
    assert not report.is_tls
    assert report.independence_rank > report.baker_norine_rank + 1


def test_partial_span_fails_validation(theta_k):
    sub = TropSubmodule(
        theta_k.base,
        [PLFunction.constant(theta_k.graph, 0), theta_k.generators[0]],
    )
    lm = local_matroid(sub)
    assert not lm
    assert "covers" in lm.problems[0]


def test_constant_span_local_matroid(theta_k):
    sub = TropSubmodule(theta_k.base, [PLFunction.constant(theta_k.graph, 0)])
    lm = local_matroid(sub)
    assert lm
    assert lm.flats() == (frozenset(), frozenset({0, 1, 2}))
    assert matroid_iso(lm.matroid, uniform_matroid(1, 3)) is not None
    assert lm.loopless


def test_unreachable_base_gives_rank_zero(crossing):
    # the subseries misses the base divisor itself: every component is a loop
    lm = local_matroid(crossing.dim1)
    assert lm
    assert lm.flats() == (frozenset({0}),)
    assert lm.matroid.lattice.length == 0
    assert lm.loopless is False
    assert divisor_in_system(crossing.base, crossing.dim1) is None


# -- the minimizer-of-combination identity -------------------------------------


@pytest.mark.parametrize("seed", [3, 11, 19])
def test_minimizer_of_combination_is_argmin_union(theta_k, crossing, seed):
    rng = random.Random(seed)
    tsub = translate(crossing.dim1, crossing.connecting)
    for sub in (theta_k, tsub):
        gens = list(sub.generators)
        for _ in range(12):
            # small integer grid so ties between coefficients are common
            a = [F(rng.randrange(0, 3), rng.choice((1, 2))) for _ in gens]
            comb = tropical_combination(gens, a)
            low = min(a)
            assert comb.min_value() == low
            union = locus_union(
                sub.graph,
                [g.minimum_locus() for g, c in zip(gens, a) if c == low],
            )
            assert comb.minimum_locus() == union


# -- rank, chains, covers, quotients -------------------------------------------


def test_rank_matches_independence_rank(crossing, theta_k):
    for sub in (
        translate(crossing.dim1, crossing.connecting),
        translate(crossing.full, crossing.connecting),
        theta_k,
    ):
        lm = local_matroid(sub)
        assert lm.matroid.lattice.length == independence_rank(sub)


def test_chain_length_bound(crossing, theta_k):
    # longest chain of realized selection sets, against the independence rank
    for sub in (
        translate(crossing.dim1, crossing.connecting),
        translate(crossing.full, crossing.connecting),
        theta_k,
    ):
        lm = local_matroid(sub)
        assert longest_chain(member_flats(lm)) == independence_rank(sub) - 1


def test_every_small_subset_is_covered(crossing, theta_k):
    for sub in (
        translate(crossing.dim1, crossing.connecting),
        translate(crossing.full, crossing.connecting),
        theta_k,
    ):
        lm = local_matroid(sub)
        r = independence_rank(sub) - 1
        n = len(lm.components)
        flats = member_flats(lm)
        for subset in combinations(range(n), r):
            assert any(set(subset) <= f for f in flats)


def test_nested_spans_give_matroid_quotients(crossing, theta_k):
    small = local_matroid(
        TropSubmodule(theta_k.base, [PLFunction.constant(theta_k.graph, 0)])
    )
    big = local_matroid(theta_k)
    assert is_quotient(small.matroid, big.matroid)
    assert not is_quotient(big.matroid, small.matroid)

    sub = local_matroid(translate(crossing.dim1, crossing.connecting))
    full = local_matroid(translate(crossing.full, crossing.connecting))
    assert is_quotient(sub.matroid, full.matroid)


# -- star versus covector fan ---------------------------------------------------


def test_star_interval_subseries(crossing):
    rep = star_matches_bergman(crossing.dim1, crossing.d0)
    assert rep
    assert rep.failures == []
    assert rep.star_in_fan and rep.rays_realized
    assert rep.rays_checked == 3
    assert rep.directions_checked > 0
    assert matroid_iso(rep.matroid, uniform_matroid(2, 3)) is not None


def test_star_interval_full(crossing):
    rep = star_matches_bergman(crossing.full, crossing.d0)
    assert rep
    assert rep.failures == []
    assert rep.rays_checked == 3
    assert matroid_iso(rep.matroid, uniform_matroid(3, 3)) is not None


def test_star_theta_canonical(theta_k):
    rep = star_matches_bergman(theta_k, theta_k.base)
    assert rep
    assert rep.failures == []
    assert rep.rays_checked == 3


def test_star_requires_membership_and_nondegeneracy(crossing):
    with pytest.raises(ValueError, match="not in the linear system"):
        star_matches_bergman(crossing.dim1, crossing.base)
    d_mid = crossing.base + crossing.pairs[0].divisor()
    with pytest.raises(ValueError, match="degenerate"):
        star_matches_bergman(crossing.full, d_mid)


# -- sections of a parametrization ----------------------------------------------


def test_section_uniform_parametrization(crossing):
    # covector generators are the indicators of the three 2-subsets, matched
    # to the pairwise minima sharing the crossing structure
    V = trop_span(uniform_matroid(2, 3))
    rep = section_and_submatroid(V, crossing.dim1, (2, 1, 0), crossing.connecting)
    assert rep
    assert rep.section_point == (0, 0, 0)
    assert matroid_iso(rep.initial, uniform_matroid(2, 3)) is not None
    assert rep.kept == (0, 1, 2)
    assert rep.embedding == {0: 0, 1: 1, 2: 2}


def test_section_with_forgotten_coordinate(crossing):
    # four covector generators but only a three-dimensional crossing family:
    # the last one maps to the minimum of all three lines
    V = trop_span(uniform_matroid(2, 4))
    sub = TropSubmodule(crossing.base, crossing.pairs + [crossing.connecting])
    rep = section_and_submatroid(V, sub, (2, 1, 0, 3), crossing.connecting)
    assert rep
    assert rep.section_point == (0, 0, 0, 0)
    assert matroid_iso(rep.initial, uniform_matroid(2, 4)) is not None
    assert rep.simplified_local.n == 3
    assert rep.kept == (0, 1, 2)
    assert rep.embedding == {0: 0, 1: 1, 2: 2}


def test_section_free_module(crossing):
    V = ValuatedMatroid(
        3, [(F(0), INF, INF), (INF, F(0), INF), (INF, INF, F(0))]
    )
    rep = section_and_submatroid(V, crossing.full, (0, 1, 2), crossing.connecting)
    assert rep
    # coordinates are the heights of the stored (normalized) lines over the
    # lower envelope: sup of the constant, the slope-1, and the slope-2 line
    assert rep.section_point == (1, F(1, 3), 0)
    assert matroid_iso(rep.initial, uniform_matroid(3, 3)) is not None
    assert rep.embedding == {0: 0, 1: 1, 2: 2}


def test_section_nonuniform_matroid(crossing):
    # rank two with a parallel pair: covector generators are the indicators
    # of the cocircuits {2} and {0,1}
    M = Matroid(3, [{0, 2}, {1, 2}])
    V = trop_span(M)
    assert V.generators == ((INF, INF, 0), (0, 0, INF))

    sub = TropSubmodule(crossing.base, [crossing.lines[2], crossing.pairs[2]])
    lm = local_matroid(translate(sub, crossing.connecting))
    assert lm.flats() == (
        frozenset(),
        frozenset({0}),
        frozenset({1, 2}),
        frozenset({0, 1, 2}),
    )
    assert matroid_iso(lm.matroid, M) is not None

    rep = section_and_submatroid(V, sub, (0, 1), crossing.connecting)
    assert rep
    assert rep.section_point == (F(1, 3), F(1, 3), 0)
    assert rep.initial == M
    assert rep.simplified_local.n == 2
    assert rep.kept == (0, 2)
    assert rep.embedding == {0: 0, 1: 2}

    star = star_matches_bergman(sub, crossing.d0)
    assert star
    assert star.rays_checked == 2


def test_section_rejects_bad_input(crossing):
    V = trop_span(uniform_matroid(2, 3))
    with pytest.raises(ValueError, match="one generator image"):
        section_and_submatroid(V, crossing.dim1, (2, 1), crossing.connecting)
    with pytest.raises(ValueError, match="outside the generator list"):
        section_and_submatroid(V, crossing.dim1, (2, 1, 7), crossing.connecting)
    not_member = PLFunction(crossing.graph, {"v": 0, "w": 3})
    with pytest.raises(ValueError, match="not a member"):
        section_and_submatroid(V, crossing.dim1, (2, 1, 0), not_member)
    with pytest.raises(ValueError, match="degenerate"):
        section_and_submatroid(V, crossing.dim1, (2, 1, 0), crossing.pairs[0])


def test_section_lift_failure(crossing):
    """Collapsing every covector generator onto one image breaks the lift."""
    V = trop_span(uniform_matroid(2, 3))
    with pytest.raises(ValueError, match="lift not found"):
        section_and_submatroid(V, crossing.dim1, (0, 0, 0), crossing.connecting)
