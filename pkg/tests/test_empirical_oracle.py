import random
import time
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotdim.cf_engine import ConstantPQ, RotationSpec, convergents
from rotdim.dim_core import DimConfig, hausdorff_dimension
from rotdim.empirical_oracle import (
    UNIT, FiniteApprox, OrbitPoint, auto_window, box_dimension_estimate, finite_limsup_approx,
    hitting_check,
)
from rotdim.errors import DegenerateFit, DomainError, ModelValidationError
from rotdim.orbit_geometry import arc_union_measure, build_Ek
from rotdim.phi_models import LogPower, PowerLaw

GOLDEN = convergents(RotationSpec(ConstantPQ(1), 60), 40)


# -- calibration ----------------------------------------------------------------

def test_interval_calibration():
    a = FiniteApprox.from_intervals([(0.0, 0.5)])
    c = box_dimension_estimate(a, 1, 20)
    assert abs(c.slope - 1) <= 0.02
    a = FiniteApprox.from_intervals([(0.1, 0.2), (0.55, 0.9)])
    assert abs(box_dimension_estimate(a, 4, 24).slope - 1) <= 0.02


def test_point_calibration():
    a = FiniteApprox.from_intervals([(0.3, 0.3 + 2.0 ** -30)])
    c = box_dimension_estimate(a, 1, 20)
    assert abs(c.slope) <= 0.05
    pts = [(x, x + 2.0 ** -30) for x in (0.05, 0.21, 0.33, 0.62, 0.87)]
    c = box_dimension_estimate(FiniteApprox.from_intervals(pts), 4, 20)
    assert abs(c.slope) <= 0.05


def test_window_errors():
    a = FiniteApprox.from_intervals([(0.0, 0.5)])
    with pytest.raises(DegenerateFit):
        box_dimension_estimate(a, 5, 6)
    with pytest.raises(DomainError):
        box_dimension_estimate(a, 5, 31)


# -- finite approximations ------------------------------------------------------

def test_union_bound():
    M = PowerLaw(1, 2)
    a = finite_limsup_approx(GOLDEN, M, 3, 14)
    bound = sum(2.0 / n ** 2 for n in range(GOLDEN.q(3), GOLDEN.q(15)))
    assert a.measure() <= bound + a.count * 2 / UNIT
    assert np.all(a.lo[1:] > a.hi[:-1]) and np.all(a.lo < a.hi)
    assert a.lo[0] >= 0 and a.hi[-1] <= UNIT


def test_fat_arcs_cover_circle():
    M = PowerLaw(Fraction(1, 2), Fraction(1, 100))
    a = finite_limsup_approx(GOLDEN, M, 2, 6, depth=1)
    assert a.measure() >= 0.99


def test_big_phi_rejected():
    with pytest.raises(ModelValidationError):
        finite_limsup_approx(GOLDEN, PowerLaw(1, 1), 0, 5)


def test_single_block_is_Ek():
    M = PowerLaw(1, 2)
    for k in (5, 9):
        a = finite_limsup_approx(GOLDEN, M, k, k)
        ref = arc_union_measure(build_Ek(GOLDEN, M, k))
        # radii carry a 1e-9 relative outward slack plus a few grid units
        assert ref <= a.measure() <= ref * (1 + 2e-9) + a.count * 8 / UNIT


def test_intersection_shrinks_with_depth():
    M = PowerLaw(1, Fraction(3, 2))
    m = [finite_limsup_approx(GOLDEN, M, 3, 16, depth=d).measure() for d in (1, 2, 3)]
    assert m[0] >= m[1] >= m[2]


# -- box dimension --------------------------------------------------------------

def test_golden_gamma2_slope():
    t0 = time.time()
    a = finite_limsup_approx(GOLDEN, PowerLaw(1, 2), 3, 24, depth=3)
    c = box_dimension_estimate(a)
    assert time.time() - t0 < 60
    assert c.auto_window and c.layered
    assert abs(c.slope - 0.5) <= 0.1
    assert c.monotone and all(x <= y for x, y in zip(c.counts, c.counts[1:]))
    assert 0 <= c.slope <= 1.05
    lo, hi = auto_window(a)
    assert lo <= c.window[0] and c.window[1] == hi


@pytest.mark.parametrize("gamma", [Fraction(3, 2), 2])
def test_cross_validation_with_dimension(gamma):
    M = PowerLaw(1, gamma)
    s = hausdorff_dimension(GOLDEN, M, DimConfig(K=40), with_bounds=False).s_star
    slope = box_dimension_estimate(finite_limsup_approx(GOLDEN, M, 3, 24)).slope
    assert abs(slope - s) <= 0.1


def test_unlayered_counts_monotone():
    a = finite_limsup_approx(GOLDEN, PowerLaw(1, 3), 3, 20)
    c = box_dimension_estimate(a, 4, 24, layered=False)
    assert all(x <= y for x, y in zip(c.counts, c.counts[1:]))


def test_deterministic():
    M = PowerLaw(1, 2)
    a1 = finite_limsup_approx(GOLDEN, M, 3, 18)
    a2 = finite_limsup_approx(GOLDEN, M, 3, 18)
    assert np.array_equal(a1.lo, a2.lo) and np.array_equal(a1.hi, a2.hi)
    c1, c2 = box_dimension_estimate(a1), box_dimension_estimate(a2)
    assert c1.rows() == c2.rows() and c1.slope == c2.slope


# -- hitting --------------------------------------------------------------------

def test_orbit_point_is_hit():
    for m in (1, 17, 987, 5000):
        assert m in hitting_check(GOLDEN, PowerLaw(1, 3), OrbitPoint(m), 10**4)


def test_linear_rate_hits():
    rng = random.Random(7)
    M = PowerLaw(Fraction(1, 4), 1)
    for _ in range(5):
        y = Fraction(rng.getrandbits(53), 2**53)
        assert hitting_check(GOLDEN, M, y, 10**4)


def test_sparse_target_may_miss():
    hits = hitting_check(GOLDEN, PowerLaw(1, 3), Fraction(1, 2), 50)
    assert isinstance(hits, list)


def test_hit_domain():
    with pytest.raises(DomainError):
        hitting_check(GOLDEN, PowerLaw(1, 2), Fraction(1, 3), 10**7)


def _phi_mp(model, n):
    v = mp.mpf(model.c.numerator) / model.c.denominator
    v *= mp.mpf(n) ** -(mp.mpf(model.gamma.numerator) / model.gamma.denominator)
    if isinstance(model, LogPower):
        v *= mp.log(n) ** -(mp.mpf(model.delta.numerator) / model.delta.denominator)
    return v


@settings(max_examples=30, deadline=None)
@given(st.fractions(0, 1, max_denominator=10**9),
       st.sampled_from([PowerLaw(Fraction(1, 4), 1), PowerLaw(1, Fraction(3, 2)), LogPower(1, 1, 1)]))
def test_hits_match_direct_evaluation(y, model):
    n_max = 600
    hits = set(hitting_check(GOLDEN, model, y, n_max))
    with mp.workdps(60):
        th = (mp.sqrt(5) - 1) / 2
        yv = mp.mpf(y.numerator) / y.denominator
        for n in range(model.domain_min, n_max + 1):
            d = mp.frac(n * th - yv)
            d = min(d, 1 - d)
            phi = _phi_mp(model, n)
            if abs(d - phi) < mp.mpf(10) ** -40:
                continue
            assert (n in hits) == (d < phi), n
