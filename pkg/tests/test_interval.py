from fractions import Fraction

import gmpy2
import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import DPS, encloses, to_mp
from rotdim.interval import LogInterval, ln_power_integral, NEG_INF

rationals = st.fractions(min_value=Fraction(1, 10**6), max_value=Fraction(10**9), max_denominator=10**6)
exponents = st.floats(min_value=0.01, max_value=3.0, allow_nan=False)


def test_zero_and_one():
    z = LogInterval.zero()
    assert z.is_zero and z.lo == NEG_INF
    assert LogInterval.one().value_bounds() == (1, 1)
    assert (LogInterval.from_int(7) + z) == LogInterval.from_int(7)
    assert (LogInterval.from_int(7) * z).is_zero


def test_lo_le_hi_enforced():
    with pytest.raises(ValueError):
        LogInterval(gmpy2.mpfr(1), gmpy2.mpfr(0))


def test_immutable():
    x = LogInterval.one()
    with pytest.raises(AttributeError):
        x.lo = 3


@given(rationals)
def test_from_rational_encloses(x):
    with mp.workdps(DPS):
        assert encloses(LogInterval.from_rational(x), to_mp(x))


@given(rationals, rationals)
def test_add_mul_enclose(a, b):
    A, B = LogInterval.from_rational(a), LogInterval.from_rational(b)
    with mp.workdps(DPS):
        assert encloses(A + B, to_mp(a) + to_mp(b))
        assert encloses(A * B, to_mp(a) * to_mp(b))
        assert encloses(A / B, to_mp(a) / to_mp(b))


@given(rationals, exponents)
def test_pow_encloses(a, s):
    A = LogInterval.from_rational(a)
    with mp.workdps(DPS):
        assert encloses(A ** s, to_mp(a) ** mp.mpf(s))
        assert encloses(A ** (-s), to_mp(a) ** -mp.mpf(s))


@given(rationals, rationals)
def test_sub_encloses(a, b):
    if a < b:
        a, b = b, a
    A, B = LogInterval.from_rational(a), LogInterval.from_rational(b)
    with mp.workdps(DPS):
        assert encloses(A.sub(B), to_mp(a) - to_mp(b))


def test_sub_certainly_negative():
    with pytest.raises(ValueError):
        LogInterval.from_int(2).sub(LogInterval.from_int(3))


@given(st.lists(rationals, min_size=1, max_size=30))
def test_sum_encloses(xs):
    with mp.workdps(DPS):
        assert encloses(LogInterval.sum(LogInterval.from_rational(x) for x in xs),
                        mp.fsum(to_mp(x) for x in xs))


@given(rationals, st.integers(min_value=1, max_value=10**30))
def test_scale_int(a, n):
    with mp.workdps(DPS):
        assert encloses(LogInterval.from_rational(a).scale_int(n), to_mp(a) * n)


@given(st.integers(min_value=1, max_value=10**6), st.integers(min_value=1, max_value=10**6),
       st.sampled_from([Fraction(1, 2), Fraction(1), Fraction(6, 5), Fraction(3)]))
def test_power_integral_bounds(a, span, p):
    b = a + span
    with mp.workdps(DPS):
        exact = mp.quad(lambda x: x ** -to_mp(p), [a, b])
        la = LogInterval.from_int(a)
        ell = (LogInterval.from_rational(Fraction(b, a)).lo, LogInterval.from_rational(Fraction(b, a)).hi)
        pm = gmpy2.mpfr(gmpy2.mpq(p.numerator, p.denominator), 200)
        up = ln_power_integral((la.lo, la.hi), ell, pm, True)
        lo = ln_power_integral((la.lo, la.hi), ell, pm, False)
        assert to_mp(lo) <= mp.log(exact) + mp.mpf(10) ** -25
        assert mp.log(exact) <= to_mp(up) + mp.mpf(10) ** -25


def test_monotone_queries():
    a, b = LogInterval.from_rational(Fraction(1, 3)), LogInterval.from_rational(Fraction(1, 2))
    assert a.certainly_lt(b) and a.certainly_le(b) and not b.certainly_lt(a)
    assert a.hull(b).contains(a) and a.hull(b).contains(b)
    assert not a.overlaps(b)
    assert a.contains_value(Fraction(1, 3)) and not a.contains_value(Fraction(1, 2))


def test_json_strings():
    j = LogInterval.from_rational(Fraction(1, 4)).to_json()
    assert set(j) == {"mid", "lo", "hi", "ln_lo", "ln_hi"}
    assert float(j["lo"]) <= 0.25 <= float(j["hi"])
    assert all(isinstance(v, str) for v in j.values())
