"""Outward-rounded enclosures of positive reals stored by log magnitude.

A :class:`LogInterval` ``[lo, hi]`` stands for the real interval
``[exp(lo), exp(hi)]``.  Endpoints are MPFR numbers; every operation rounds
its lower endpoint toward -inf and its upper endpoint toward +inf using
correctly rounded MPFR arithmetic, so composed expressions stay sound.
Zero is ``lo = hi = -inf``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable

import gmpy2
from gmpy2 import mpfr, mpq, mpz

PRECISION_BITS = 96

_D = gmpy2.context(precision=PRECISION_BITS, round=gmpy2.RoundDown)
_U = gmpy2.context(precision=PRECISION_BITS, round=gmpy2.RoundUp)
_N = gmpy2.context(precision=PRECISION_BITS)

NEG_INF = gmpy2.inf(-1)
POS_INF = gmpy2.inf(1)
_ZERO = mpfr(0)
_ONE = mpfr(1)


def neg(x) -> mpfr:
    """Exact negation.  Plain ``-x`` would round in the default 53-bit context."""
    p = x.precision
    return (_N if p <= PRECISION_BITS else gmpy2.context(precision=p)).minus(x)


def exact_mpfr(x) -> mpfr:
    """Exact MPFR copy of a float/int (floats are binary, so this is lossless)."""
    if isinstance(x, mpfr):
        return x
    if isinstance(x, float):
        return mpfr(x, 64)
    if isinstance(x, int):
        return mpfr(mpz(x), max(64, x.bit_length() + 1))
    raise TypeError(f"cannot convert {type(x).__name__} exactly")


# ---------------------------------------------------------------------------
# scalar helpers on log magnitudes (one rounding direction each)
# ---------------------------------------------------------------------------

def _lae(ctx, a, b):
    """log(exp(a) + exp(b)) rounded in the direction of ``ctx``."""
    if a < b:
        a, b = b, a
    if b == NEG_INF:
        return a
    return ctx.add(a, ctx.log1p(ctx.exp(ctx.sub(b, a))))


def ln_expm1_over(ctx, u):
    """log(expm1(u)/u), rounded per ``ctx``.  Increasing in u; 0 at u = 0."""
    if u == 0:
        return _ZERO
    other = _U if ctx is _D else _D
    if u > 0:
        return ctx.sub(ctx.log(ctx.expm1(u)), other.log(u))
    # u < 0: expm1(u)/u = (1 - e^u)/(-u); round expm1 the *other* way so that
    # -expm1(u) moves in ctx's direction
    return ctx.sub(ctx.log(neg(other.expm1(u))), other.log(neg(u)))


def imul(alo, ahi, blo, bhi):
    """Outward-rounded product of two real intervals."""
    if alo == 0 and ahi == 0 or blo == 0 and bhi == 0:
        return _ZERO, _ZERO
    los = [_D.mul(x, y) for x in (alo, ahi) for y in (blo, bhi)]
    his = [_U.mul(x, y) for x in (alo, ahi) for y in (blo, bhi)]
    return min(los), max(his)


class LogInterval:
    """Enclosure ``[e^lo, e^hi]`` of a non-negative real."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        if not lo <= hi:
            raise ValueError(f"LogInterval needs lo <= hi, got {lo} > {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("LogInterval is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "LogInterval":
        return cls(NEG_INF, NEG_INF)

    @classmethod
    def one(cls) -> "LogInterval":
        return cls(_ZERO, _ZERO)

    @classmethod
    def from_int(cls, n: int) -> "LogInterval":
        if n < 0:
            raise ValueError("negative value")
        if n == 0:
            return cls.zero()
        if n == 1:
            return cls.one()
        z = mpz(n)
        return cls(_D.log(z), _U.log(z))

    @classmethod
    def from_rational(cls, x) -> "LogInterval":
        """Enclosure of an exact positive rational (int, Fraction or mpq)."""
        if isinstance(x, int):
            return cls.from_int(x)
        if isinstance(x, Fraction):
            x = mpq(x.numerator, x.denominator)
        if x < 0:
            raise ValueError("negative value")
        if x == 0:
            return cls.zero()
        return cls(_D.log(x), _U.log(x))

    @classmethod
    def from_rational_bounds(cls, lo, hi) -> "LogInterval":
        a = cls.from_rational(lo)
        b = cls.from_rational(hi)
        return cls(a.lo, b.hi)

    @classmethod
    def from_float(cls, x: float) -> "LogInterval":
        if x < 0:
            raise ValueError("negative value")
        if x == 0:
            return cls.zero()
        m = exact_mpfr(x)
        return cls(_D.log(m), _U.log(m))

    @classmethod
    def from_value_bounds(cls, vlo, vhi) -> "LogInterval":
        """Enclosure from MPFR bounds on the value itself."""
        lo = NEG_INF if vlo <= 0 else _D.log(vlo)
        return cls(lo, _U.log(vhi))

    @classmethod
    def point(cls, ln_value) -> "LogInterval":
        """Degenerate interval at an exactly given log magnitude."""
        v = exact_mpfr(ln_value) if not isinstance(ln_value, mpfr) else ln_value
        return cls(v, v)

    @classmethod
    def exp_of(cls, lo, hi) -> "LogInterval":
        """The quantity exp(x) for real x in [lo, hi] -- i.e. logs given directly."""
        return cls(lo, hi)

    @classmethod
    def expm1_of(cls, lo, hi) -> "LogInterval":
        """Enclosure of expm1(x) for x in [lo, hi], lo >= 0."""
        if lo < 0:
            raise ValueError("expm1 enclosure needs a non-negative argument")
        vlo = _D.expm1(lo)
        return cls(NEG_INF if vlo <= 0 else _D.log(vlo), _U.log(_U.expm1(hi)) if hi > 0 else NEG_INF)

    # -- queries --------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.hi == NEG_INF

    def mid(self) -> float:
        """Float midpoint of the log magnitude (for diagnostics and search)."""
        if self.lo == NEG_INF:
            return float("-inf") if self.hi == NEG_INF else float(self.hi)
        return float(_N.div(_N.add(self.lo, self.hi), 2))

    def width(self) -> float:
        if self.lo == NEG_INF:
            return float("inf") if self.hi != NEG_INF else 0.0
        return float(_U.sub(self.hi, self.lo))

    def value_bounds(self):
        """MPFR bounds on the represented value."""
        return _D.exp(self.lo), _U.exp(self.hi)

    def value_mid(self) -> float:
        return float(_N.exp(mpfr(self.mid())))

    def log_value(self):
        """The log magnitude itself as a real interval (lo, hi)."""
        return self.lo, self.hi

    def contains_value(self, v) -> bool:
        """True if the positive real ``v`` can lie in the enclosure.

        ``v`` may be int, Fraction, mpq or mpfr.  The log of ``v`` is itself
        enclosed, so the test is conservative in favour of containment only by
        one MPFR rounding of ln v.
        """
        if isinstance(v, Fraction):
            v = mpq(v.numerator, v.denominator)
        if v == 0:
            return self.lo == NEG_INF
        if v < 0:
            return False
        return _U.log(v) >= self.lo and _D.log(v) <= self.hi

    def contains(self, other: "LogInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def overlaps(self, other: "LogInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def certainly_lt(self, other: "LogInterval") -> bool:
        return self.hi < other.lo

    def certainly_le(self, other: "LogInterval") -> bool:
        return self.hi <= other.lo

    def hull(self, other: "LogInterval") -> "LogInterval":
        return LogInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    # -- arithmetic on the represented values --------------------------------

    def __mul__(self, other: "LogInterval") -> "LogInterval":
        if self.is_zero or other.is_zero:
            return LogInterval.zero()
        return LogInterval(_D.add(self.lo, other.lo), _U.add(self.hi, other.hi))

    def __truediv__(self, other: "LogInterval") -> "LogInterval":
        return self * other.inv()

    def inv(self) -> "LogInterval":
        if self.lo == NEG_INF:
            raise ZeroDivisionError("enclosure contains zero")
        return LogInterval(neg(self.hi), neg(self.lo))

    def __add__(self, other: "LogInterval") -> "LogInterval":
        return LogInterval(_lae(_D, self.lo, other.lo), _lae(_U, self.hi, other.hi))

    def sub(self, other: "LogInterval") -> "LogInterval":
        """Enclosure of self - other, assuming the true difference is >= 0.

        If positivity cannot be certified the lower end is -inf (value 0).
        Raises ValueError when the difference is certainly negative.
        """
        if other.is_zero:
            return self
        if other.lo > self.hi:
            raise ValueError("difference is certainly negative")
        # lower end: smallest self, largest other
        t = _U.sub(other.hi, self.lo)
        if t >= 0:
            lo = NEG_INF
        else:
            lo = _D.add(self.lo, _D.log1p(neg(_U.exp(t))))
        if other.lo == NEG_INF:
            hi = self.hi
        else:
            t = _D.sub(other.lo, self.hi)
            hi = NEG_INF if t >= 0 else _U.add(self.hi, _U.log1p(neg(_D.exp(t))))
            if hi < lo:
                hi = lo
        return LogInterval(lo, hi)

    def __pow__(self, s) -> "LogInterval":
        """Power by a real exponent (float or MPFR, taken as exact)."""
        s = exact_mpfr(s) if not isinstance(s, mpfr) else s
        if s == 0:
            return LogInterval.one()
        if self.is_zero:
            if s < 0:
                raise ZeroDivisionError("zero to a negative power")
            return self
        if s > 0:
            if self.lo == NEG_INF:
                return LogInterval(NEG_INF, _U.mul(self.hi, s))
            return LogInterval(_D.mul(self.lo, s), _U.mul(self.hi, s))
        return (self ** neg(s)).inv()

    def pow_interval(self, slo, shi) -> "LogInterval":
        """Power by an exponent known only within [slo, shi] (both >= 0)."""
        lo, _ = imul(self.lo, self.lo, slo, shi) if self.lo != NEG_INF else (NEG_INF, None)
        _, hi = imul(self.hi, self.hi, slo, shi)
        return LogInterval(lo, hi)

    def scale_int(self, n: int) -> "LogInterval":
        return self * LogInterval.from_int(n)

    def __eq__(self, other) -> bool:
        return isinstance(other, LogInterval) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        return f"LogInterval({float(self.lo):.12g}, {float(self.hi):.12g})"

    def to_json(self) -> dict:
        """Midpoint and endpoints of the *value*, as strings (lossless enough)."""
        vlo, vhi = self.value_bounds()
        return {
            "mid": repr(self.value_mid()),
            "lo": str(vlo),
            "hi": str(vhi),
            "ln_lo": str(self.lo),
            "ln_hi": str(self.hi),
        }

    # -- aggregates -------------------------------------------------------------

    @staticmethod
    def sum(items: Iterable["LogInterval"]) -> "LogInterval":
        """Outward-rounded sum of many enclosures (rescaled by the largest term)."""
        items = [x for x in items if not x.is_zero]
        if not items:
            return LogInterval.zero()
        if len(items) == 1:
            return items[0]
        m_lo = max(x.lo for x in items)
        m_hi = max(x.hi for x in items)
        s_lo = _ZERO
        s_hi = _ZERO
        for x in items:
            if x.lo != NEG_INF:
                s_lo = _D.add(s_lo, _D.exp(_D.sub(x.lo, m_lo)))
            s_hi = _U.add(s_hi, _U.exp(_U.sub(x.hi, m_hi)))
        return LogInterval(_D.add(m_lo, _D.log(s_lo)), _U.add(m_hi, _U.log(s_hi)))


def ln_power_integral(a_ln, ell, p, upper: bool):
    """One-sided bound on ln of the integral of x^(-p) over [a, a e^ell].

    ``a_ln`` and ``ell`` are real intervals (lo, hi) for ln a and ln(b/a);
    ``p`` is an exact exponent.  Uses
    I = a^(1-p) * ell * expm1((1-p) ell) / ((1-p) ell), stable at p = 1.
    Returns the upper bound if ``upper`` else the lower bound.
    """
    ell_v = ell[1] if upper else ell[0]
    if ell_v <= 0:
        return NEG_INF
    q_lo, q_hi = _D.sub(_ONE, p), _U.sub(_ONE, p)
    t_lo, t_hi = imul(q_lo, q_hi, a_ln[0], a_ln[1])
    u_lo, u_hi = imul(q_lo, q_hi, ell_v, ell_v)
    if upper:
        return _U.add(_U.add(t_hi, _U.log(ell_v)), ln_expm1_over(_U, u_hi))
    return _D.add(_D.add(t_lo, _D.log(ell_v)), ln_expm1_over(_D, u_lo))
