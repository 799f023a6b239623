from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle_values as ov
from helpers import DPS
from rotdim.cf_engine import ConstantPQ, LOGSPACE, PeriodicPQ, PowerOfQ, RotationSpec, convergents
from rotdim.dim_core import _Block, optimal_split
from rotdim.errors import BlockTooLong, DomainError
from rotdim.orbit_geometry import (
    arc_union_measure, build_cover, build_Ek, equidistribution_check, special_gap_check,
    three_distance_gaps, three_distance_sweep,
)
from rotdim.phi_models import PowerLaw

GOLDEN = convergents(RotationSpec(ConstantPQ(1), 60), 40)
SILVER = convergents(RotationSpec(PeriodicPQ([2]), 60), 30)
ALT = convergents(RotationSpec(PeriodicPQ([1, 2]), 60), 30)


def _mp(x: Fraction):
    return mp.mpf(x.numerator) / x.denominator


# -- three distances ----------------------------------------------------------

def test_single_point_gap():
    for t in (GOLDEN, SILVER):
        g = three_distance_gaps(t, 1)
        assert g.distinct_count == 1 and g.total == (1, 1)


@pytest.mark.parametrize("N", [3, 4])
def test_golden_gap_values(N):
    g = three_distance_gaps(GOLDEN, N)
    assert g.distinct_count == N - 1
    lows = sorted(lo for *_, lo, hi in g.gaps)
    highs = sorted(hi for *_, lo, hi in g.gaps)
    with mp.workdps(DPS):
        for lo, hi, ref in zip(lows, highs, ov.GOLDEN_GAPS[N]):
            assert _mp(lo) <= mp.mpf(ref) <= _mp(hi)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["golden", "silver", "alt"]), st.integers(1, 2000))
def test_three_distance_and_gap_sum(name, N):
    t = {"golden": GOLDEN, "silver": SILVER, "alt": ALT}[name]
    g = three_distance_gaps(t, N)
    assert g.distinct_count <= 3
    assert g.distinct_count == g.exact_distinct
    lo, hi = g.total
    assert lo <= 1 <= hi
    assert sum(c.count for c in g.clusters) == N


def test_sweep_matches_direct():
    counts = three_distance_sweep(GOLDEN, 300)
    for N in (1, 2, 3, 4, 10, 55, 89, 144, 233, 300):
        assert counts[N - 1] == three_distance_gaps(GOLDEN, N).exact_distinct


@pytest.mark.parametrize("t,kmax", [(GOLDEN, 18), (SILVER, 9), (ALT, 12)])
def test_special_gaps(t, kmax):
    for k in range(kmax):
        if t.q(k + 1) > 10**4:
            break
        r = special_gap_check(t, k)
        assert r.ok, (k, r.observed)
        if not r.degenerate:
            assert r.observed["other"] == 0
            assert r.observed["qnorm_k"] + r.observed["qnorm_k_plus_k1"] == r.N


def test_special_gap_examples():
    r = special_gap_check(GOLDEN, 2)
    assert r.ok and r.N == 3
    assert r.observed == {"qnorm_k": 1, "qnorm_k_plus_k1": 2, "other": 0}
    assert special_gap_check(SILVER, 2).N == 12 and special_gap_check(SILVER, 2).ok
    r = special_gap_check(GOLDEN, 0)
    assert r.ok and r.degenerate and r.N == 1


def test_gap_log_mode_rejected():
    t = convergents(RotationSpec(ConstantPQ(1), 30, mode=LOGSPACE), 20)
    with pytest.raises(DomainError):
        three_distance_gaps(t, 10)


# -- E_k ------------------------------------------------------------------------

def test_build_Ek_golden_k4():
    arcs = build_Ek(GOLDEN, PowerLaw(1, 2), 4)
    assert [a.n for a in arcs] == [5, 6, 7]
    for a, r in zip(arcs, (25, 36, 49)):
        lo, hi = a.radius.value_bounds()
        assert lo <= Fraction(1, r) <= hi or abs(float(lo) - 1 / r) < 1e-25
        assert a.center[1] - a.center[0] <= Fraction(1, 8 * 49)


def test_build_Ek_short_block():
    # a_{k+1} = 1 makes the block exactly q_{k-1} long
    for k in range(2, 15):
        assert len(build_Ek(GOLDEN, PowerLaw(1, 2), k)) == GOLDEN.q(k - 1)


def test_build_Ek_example(example_table, example_model):
    arcs = build_Ek(example_table, example_model, 3)
    assert len(arcs) == 722
    # (9, 81] has radius 1/(2*9^3), (81, 731] radius 1/(2*731^3)
    r1 = {a.radius for a in arcs if a.n <= 81}
    r2 = {a.radius for a in arcs if a.n > 81}
    assert len(r1) == 1 and len(r2) == 1


def test_build_Ek_too_long(example_table, example_model):
    with pytest.raises(BlockTooLong):
        build_Ek(example_table, example_model, 4)


@pytest.mark.parametrize("k", [3, 5, 8, 11])
def test_Ek_measure_union_bound(k):
    M = PowerLaw(1, 2)
    arcs = build_Ek(GOLDEN, M, k)
    total = sum(2 * float(a.radius.value_mid()) for a in arcs)
    meas = arc_union_measure(arcs)
    assert meas <= total * (1 + 1e-12)
    # arcs of n^-2 are disjoint on these blocks: equality
    assert abs(meas - total) <= 1e-12 * total


def test_Ek_overlap_strictly_less():
    M = PowerLaw(Fraction(1, 3), Fraction(1, 10))
    arcs = build_Ek(GOLDEN, M, 8)
    assert arc_union_measure(arcs) < sum(2 * float(a.radius.value_mid()) for a in arcs)


# -- cover -----------------------------------------------------------------------

def test_cover_golden_k4():
    p = build_cover(GOLDEN, PowerLaw(1, 2), 4, 0.6, 5)
    assert (p.c, p.r) == (1, 0)
    assert p.groups == 5
    assert [iv is not None for iv in p.long_intervals] == [True, False, False, False, False]
    assert [a.n for a in p.small_balls] == [6, 7]
    assert p.containment and p.cost_ok


def test_cover_full_split():
    p = build_cover(GOLDEN, PowerLaw(1, 2), 6, 0.6, GOLDEN.q(7) - 1)
    assert p.small_balls == [] and p.containment and p.cost_ok


def test_cover_example_small_k(example_table, example_model):
    for k in (1, 2, 3):
        p = build_cover(example_table, example_model, k, 0.5)
        assert p.split == example_table.q(k) ** 2
        assert p.containment and p.cost_ok
        assert p.groups == example_table.q(k)


def test_cover_rejects_bad_split():
    with pytest.raises(DomainError):
        build_cover(GOLDEN, PowerLaw(1, 2), 4, 0.6, 8)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["golden", "silver", "alt"]), st.sampled_from([Fraction(3, 2), 2, 3]),
       st.integers(1, 8), st.sampled_from([0.4, 0.6, 0.9]), st.data())
def test_cover_arbitrary_split(name, gamma, k, s, data):
    """The certificate holds at the optimal split; containment at any split."""
    t = {"golden": GOLDEN, "silver": SILVER, "alt": ALT}[name]
    if t.q(k + 1) == t.q(k):
        return
    M = PowerLaw(1, gamma)
    m = data.draw(st.integers(t.q(k), t.q(k + 1) - 1))
    p = build_cover(t, M, k, s, m)
    assert p.containment
    opt = build_cover(t, M, k, s)
    assert opt.cost_ok
    assert opt.s_cost.certainly_le(_Block(t, M, k, s).cost(opt.split)[2].scale_int(2))


# -- equidistribution ------------------------------------------------------------

def test_equidistribution():
    r = equidistribution_check(GOLDEN, 10**4, 0, Fraction(1, 2))
    assert abs(r.freq - 0.5) <= 0.01
    r = equidistribution_check(GOLDEN, 10**4, Fraction(1, 5), Fraction(3, 10))
    assert abs(r.freq - 0.1) <= 0.01
    assert equidistribution_check(SILVER, 777, 0, 1).freq == 1.0


def test_equidistribution_exact_count():
    N = 3000
    r = equidistribution_check(GOLDEN, N, Fraction(1, 7), Fraction(5, 9))
    with mp.workdps(40):
        th = (mp.sqrt(5) - 1) / 2
        ref = sum(1 for n in range(1, N + 1) if mp.mpf(1) / 7 < mp.frac(n * th) < mp.mpf(5) / 9)
    assert r.count == ref
