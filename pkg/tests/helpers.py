"""mpmath-side helpers shared by the numeric tests."""

from fractions import Fraction

import mpmath as mp

DPS = 80
_EPS = mp.mpf(10) ** -70


def to_mp(x):
    """Exact-enough mpmath copy of an mpfr / Fraction / int."""
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return mp.mpf(x.numerator) / x.denominator
    if x == float("-inf") or str(x) == "-inf":
        return mp.ninf
    if str(x) == "inf":
        return mp.inf
    n, d = x.as_integer_ratio()
    return mp.mpf(int(n)) / int(d)


def encloses(iv, value) -> bool:
    """True if the positive ``value`` lies in the LogInterval ``iv``.

    ``value`` may be an mpmath number, a Fraction/int, or a decimal string;
    the latter two are converted at full working precision.
    """
    with mp.workdps(DPS):
        if isinstance(value, (int, Fraction)):
            value = to_mp(value)
        elif isinstance(value, str):
            value = mp.mpf(value)
        lo, hi = to_mp(iv.lo), to_mp(iv.hi)
        if value == 0:
            return lo == mp.ninf
        lv = mp.log(value)
        return lo <= lv + _EPS * (1 + abs(lv)) and lv - _EPS * (1 + abs(lv)) <= hi
