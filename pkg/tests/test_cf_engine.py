from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle_values as ov
from helpers import DPS, encloses
from rotdim.cf_engine import (
    EXACT, LOGSPACE, ConstantPQ, ExplicitPQ, LogIndex, PeriodicPQ, PowerOfQ, RotationSpec,
    convergents, fractional_orbit, growth_exponent_w, idx_lnf, qnorm,
)
from rotdim.errors import ConfigError, ExactOverflow, IndexOutOfRange, InsufficientQuotients, \
    PrecisionUnreachable


def _qs(table):
    return [table.q(k) for k in range(table.K + 1)]


def test_recurrence_examples():
    assert _qs(convergents(RotationSpec(ConstantPQ(1), 10), 5)) == [1, 1, 2, 3, 5, 8]
    assert _qs(convergents(RotationSpec(PeriodicPQ([2]), 10), 4)) == [1, 2, 5, 12, 29]
    t = convergents(RotationSpec(PowerOfQ(Fraction(2)), 10), 5)
    assert _qs(t) == [1, 1, 2, 9, 731, 390617900]
    assert t.a(1) == 1


def test_explicit_matches_constant():
    a = convergents(RotationSpec(ExplicitPQ([3] * 30), 30), 20)
    b = convergents(RotationSpec(ConstantPQ(3), 30), 20)
    assert _qs(a) == _qs(b)
    assert growth_exponent_w(a).w == growth_exponent_w(b).w


def test_rule_validation():
    with pytest.raises(ConfigError):
        ConstantPQ(0)
    with pytest.raises(ConfigError):
        PeriodicPQ([])
    with pytest.raises(ConfigError):
        PowerOfQ(Fraction(-1))
    with pytest.raises(InsufficientQuotients):
        RotationSpec(ExplicitPQ([1, 2]), 5)
    with pytest.raises(IndexOutOfRange):
        convergents(RotationSpec(ConstantPQ(1), 5), 6)


def test_exact_overflow():
    spec = RotationSpec(PowerOfQ(Fraction(2)), 10, digit_cap=20)
    with pytest.raises(ExactOverflow):
        convergents(spec, 6)


@pytest.mark.parametrize("rule", [ConstantPQ(1), ConstantPQ(2), PeriodicPQ([1, 2, 3]),
                                  PowerOfQ(Fraction(2)), PowerOfQ(Fraction(3, 2))])
def test_recurrence_bit_exact(rule):
    t = convergents(RotationSpec(rule, 14), 8 if isinstance(rule, PowerOfQ) else 14)
    for k in range(1, t.K):
        a = t.a(k + 1)
        assert t.q(k + 1) == a * t.q(k) + t.q(k - 1)
        assert t.p(k + 1) == a * t.p(k) + t.p(k - 1)
        assert t.q(k + 1) >= 2 * t.q(k - 1)
        assert a >= 1


@pytest.mark.parametrize("rule", [ConstantPQ(1), ConstantPQ(2), PeriodicPQ([1, 2, 3]),
                                  PowerOfQ(Fraction(2))])
def test_qnorm_two_sided_bound(rule):
    t = convergents(RotationSpec(rule, 14), 6)
    for k in range(t.K):
        iv = qnorm(t, k, 0)
        q0, q1 = t.q(k), t.q(k + 1)
        lo, hi = iv.value_bounds()
        slack = Fraction(1, 10**25)
        assert lo >= Fraction(1, q1 + q0) * (1 - slack)
        assert hi <= Fraction(1, q1) * (1 + slack)


@pytest.mark.parametrize("name,rule,K", [
    ("GOLDEN_QNORM", ConstantPQ(1), 12),
    ("SQRT2_QNORM", ConstantPQ(2), 12),
    ("PERIODIC_123_QNORM", PeriodicPQ([1, 2, 3]), 12),
    ("EXAMPLE_QNORM", PowerOfQ(Fraction(2)), 6),
])
def test_qnorm_soundness(name, rule, K):
    t = convergents(RotationSpec(rule, 40), K)
    refs = getattr(ov, name)
    for k in range(K if isinstance(rule, PowerOfQ) else K + 1):
        with mp.workdps(DPS):
            value = mp.mpf(refs[k])
        for depth in (0, 1, 3, 8, None):
            assert encloses(qnorm(t, k, depth), value), (k, depth)
        assert encloses(t.qnorm(k), value)


def test_qnorm_examples():
    t = convergents(RotationSpec(ConstantPQ(1), 40), 20)
    iv = qnorm(t, 1, 0)
    lo, hi = iv.value_bounds()
    slack = Fraction(1, 10**25)
    assert Fraction(1, 3) * (1 - slack) <= lo and hi <= Fraction(1, 2) * (1 + slack)
    assert encloses(iv, "0.3819660112501051518")
    iv = qnorm(t, 2, 8)
    lo, hi = iv.value_bounds()
    assert hi - lo < Fraction(1, 1000)
    assert encloses(iv, "0.2360679774997896964")


@pytest.mark.parametrize("rule", [ConstantPQ(1), PeriodicPQ([1, 2, 3]), PowerOfQ(Fraction(2))])
def test_qnorm_nesting(rule):
    t = convergents(RotationSpec(rule, 30), 5)
    for k in range(t.K - 1):
        prev = qnorm(t, k, 0)
        for d in range(1, 6):
            cur = qnorm(t, k, d)
            assert prev.lo <= cur.lo and cur.hi <= prev.hi, (k, d)
            prev = cur


def test_qnorm_missing_row():
    t = convergents(RotationSpec(ConstantPQ(1), 10), 5, lookahead=0)
    with pytest.raises(IndexOutOfRange):
        qnorm(t, 5, 0)
    with pytest.raises(IndexOutOfRange):
        qnorm(t, -1, 0)


def test_qnorm_huge_quotient_upper_end():
    t = convergents(RotationSpec(PowerOfQ(Fraction(2)), 14, mode=LOGSPACE), 12)
    for k in range(t.K):
        iv = t.qnorm(k)
        assert iv.hi + t.row(k + 1).ln_q.lo <= 1e-20


@pytest.mark.parametrize("rule,K", [(ConstantPQ(1), 60), (ConstantPQ(2), 50),
                                    (PeriodicPQ([1, 2, 3]), 50), (PowerOfQ(Fraction(2)), 8),
                                    (PowerOfQ(Fraction(3, 2)), 9)])
def test_logspace_agrees_with_exact(rule, K):
    ex = convergents(RotationSpec(rule, K + 4, mode=EXACT), K)
    lg = convergents(RotationSpec(rule, K + 4, mode=LOGSPACE), K)
    for k in range(1, K + 1):
        a, b = idx_lnf(ex.q(k)), idx_lnf(lg.q(k))
        assert abs(a - b) <= 2 ** -30 * max(a, 1e-300), k


def test_logspace_rows_are_logindex():
    lg = convergents(RotationSpec(PowerOfQ(Fraction(2)), 14, mode=LOGSPACE), 12)
    assert isinstance(lg.q(12), LogIndex)
    assert idx_lnf(lg.q(12)) > 1e4


def test_fractional_orbit_examples():
    t = convergents(RotationSpec(ConstantPQ(1), 80), 60)
    for n, ref in ov.GOLDEN_FRAC.items():
        lo, hi = fractional_orbit(t, n, 30)
        assert hi - lo <= Fraction(1, 2 ** 30)
        with mp.workdps(DPS):
            v = mp.mpf(ref)
            assert mp.mpf(lo.numerator) / lo.denominator <= v <= mp.mpf(hi.numerator) / hi.denominator
    for k in range(2, 12):
        lo, hi = fractional_orbit(t, t.q(k), 40)
        bound = t.qnorm(k).value_bounds()[1]
        assert lo <= bound or hi >= 1 - bound


def test_fractional_orbit_unreachable():
    t = convergents(RotationSpec(ConstantPQ(1), 10), 5)
    with pytest.raises(PrecisionUnreachable):
        fractional_orbit(t, 1000, 60)


def test_growth_examples():
    g = growth_exponent_w(convergents(RotationSpec(ConstantPQ(1), 50), 40))
    assert abs(g.w - 1.0) <= 0.02
    e = growth_exponent_w(convergents(RotationSpec(PowerOfQ(Fraction(2)), 14, mode=LOGSPACE), 12))
    assert abs(e.w - 3.0) <= 0.05
    assert len(e.series) >= 10
    with pytest.raises(ValueError):
        growth_exponent_w(convergents(RotationSpec(ConstantPQ(1), 5), 3), K=1)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 50), min_size=6, max_size=14))
def test_explicit_qnorm_contains_exact(quot):
    t = convergents(RotationSpec(ExplicitPQ(quot), len(quot)), len(quot) - 3)
    qs, ps = [1], [0]
    qm, pm = 0, 1
    for a in quot:
        qs.append(a * qs[-1] + qm)
        ps.append(a * ps[-1] + pm)
        qm, pm = qs[-2], ps[-2]
    theta = Fraction(ps[-1], qs[-1])
    for k in range(t.K):
        exact = abs(qs[k] * theta - ps[k])
        lo, hi = t.row(k).qnorm_exact
        assert lo <= exact <= hi
