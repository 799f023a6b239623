"""Partial quotients, convergents and certified distances for a rotation number.

The rotation number theta in (0, 1) is only ever known through a rule that
produces its partial quotients a_1, a_2, ...  Denominators follow
q_{-1} = 0, q_0 = 1, q_{k+1} = a_{k+1} q_k + q_{k-1}, numerators
p_{-1} = 1, p_0 = 0 with the same recurrence.

Two storage modes exist.  ``Exact`` keeps every q_k, p_k as a Python int.
``LogSpace`` keeps exact integers while they are small (``exact_seed_bits``)
and afterwards only an outward-rounded enclosure of ln q_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import gmpy2
from gmpy2 import mpz

from .errors import (
    AmbiguousOrder,
    ExactOverflow,
    IndexOutOfRange,
    InsufficientQuotients,
    PrecisionUnreachable,
    ConfigError,
)
from .interval import LogInterval, _D, _U, NEG_INF, neg

EXACT = "exact"
LOGSPACE = "log"

_LOG10_2 = math.log10(2.0)


# ---------------------------------------------------------------------------
# quotient rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantPQ:
    a: int

    def __post_init__(self):
        if int(self.a) != self.a or self.a < 1:
            raise ConfigError(f"ConstantPQ needs a positive integer, got {self.a!r}")

    finite = False

    def quotient(self, j: int, q_prev=None) -> int:
        return self.a

    def describe(self) -> dict:
        return {"kind": "ConstantPQ", "a": self.a}


@dataclass(frozen=True)
class PeriodicPQ:
    period: tuple

    def __post_init__(self):
        object.__setattr__(self, "period", tuple(self.period))
        if not self.period or any(int(a) != a or a < 1 for a in self.period):
            raise ConfigError("PeriodicPQ needs a non-empty list of positive integers")

    finite = False

    def quotient(self, j: int, q_prev=None) -> int:
        return self.period[(j - 1) % len(self.period)]

    def describe(self) -> dict:
        return {"kind": "PeriodicPQ", "period": list(self.period)}


@dataclass(frozen=True)
class ExplicitPQ:
    quotients: tuple

    def __post_init__(self):
        object.__setattr__(self, "quotients", tuple(self.quotients))
        if any(int(a) != a or a < 1 for a in self.quotients):
            raise ConfigError("ExplicitPQ quotients must be positive integers")

    finite = True

    def available(self, j: int) -> bool:
        return 1 <= j <= len(self.quotients)

    def quotient(self, j: int, q_prev=None) -> int:
        if not self.available(j):
            raise InsufficientQuotients(f"ExplicitPQ has no quotient a_{j}")
        return self.quotients[j - 1]

    def describe(self) -> dict:
        return {"kind": "ExplicitPQ", "quotients": list(self.quotients)}


@dataclass(frozen=True)
class PowerOfQ:
    """a_{k+1} = floor(q_k ** c) for a positive rational c."""

    c: Fraction

    def __post_init__(self):
        c = Fraction(self.c)
        if c <= 0:
            raise ConfigError("PowerOfQ exponent must be positive")
        object.__setattr__(self, "c", c)

    finite = False

    def quotient(self, j: int, q_prev: int) -> int:
        c = self.c
        v = mpz(q_prev) ** c.numerator
        root, _ = gmpy2.iroot(v, c.denominator)
        return max(1, int(root))

    def log_quotient(self, ln_q: LogInterval) -> LogInterval:
        """Enclosure of ln floor(q^c) from an enclosure of ln q (q >= 2)."""
        cn = gmpy2.mpq(self.c.numerator, self.c.denominator)
        hi = _U.mul(ln_q.hi, cn)
        x_lo = _D.mul(ln_q.lo, cn)
        # floor(x) >= x - 1 = x (1 - 1/x); clamp at a >= 1
        lo = _D.add(x_lo, _D.log1p(neg(_U.exp(neg(x_lo)))))
        if not lo > 0:
            lo = gmpy2.mpfr(0)
        return LogInterval(lo, hi)

    def describe(self) -> dict:
        return {"kind": "PowerOfQ", "c": str(self.c)}


Rule = Union[ConstantPQ, PeriodicPQ, ExplicitPQ, PowerOfQ]


@dataclass(frozen=True)
class RotationSpec:
    rule: Rule
    k_max: int
    mode: str = EXACT
    digit_cap: int = 10**6
    exact_seed_bits: int = 256

    def __post_init__(self):
        if self.k_max < 1:
            raise ConfigError("k_max must be positive")
        if self.mode not in (EXACT, LOGSPACE):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if isinstance(self.rule, ExplicitPQ) and len(self.rule.quotients) < self.k_max:
            raise InsufficientQuotients(
                f"ExplicitPQ supplies {len(self.rule.quotients)} quotients, k_max={self.k_max}")

    def quotient_available(self, j: int) -> bool:
        return not isinstance(self.rule, ExplicitPQ) or self.rule.available(j)

    def describe(self) -> dict:
        return {
            "rule": self.rule.describe(),
            "k_max": self.k_max,
            "mode": self.mode,
            "digit_cap": self.digit_cap,
            "exact_seed_bits": self.exact_seed_bits,
        }


# ---------------------------------------------------------------------------
# indices that may be astronomically large
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogIndex:
    """The integer exp(base) + off, with ``base`` an enclosure of a log.

    Offsets stay exact so that neighbours like q_k - 1 and q_k + 1 remain
    distinguishable and comparable with each other.
    """

    base: LogInterval
    off: int = 0

    def __add__(self, d: int) -> "LogIndex":
        return LogIndex(self.base, self.off + d)

    def __sub__(self, d: int) -> "LogIndex":
        return LogIndex(self.base, self.off - d)

    def value(self) -> LogInterval:
        return as_value(self)

    def lnf(self) -> float:
        return self.base.mid()

    def __repr__(self):
        return f"LogIndex(e^{self.base.mid():.10g}{self.off:+d})"


Index = Union[int, LogIndex]


def as_value(n: Index) -> LogInterval:
    """Enclosure of the index as a positive real."""
    if isinstance(n, LogIndex):
        if n.off == 0:
            return n.base
        d = LogInterval.from_int(abs(n.off))
        return n.base + d if n.off > 0 else n.base.sub(d)
    return LogInterval.from_int(n)


def idx_lnf(n: Index) -> float:
    if isinstance(n, LogIndex):
        if n.off == 0:
            return n.base.mid()
        return as_value(n).mid()
    return math.log(n) if n > 0 else float("-inf")


def idx_cmp(a: Index, b: Index) -> int:
    """Certified three-way comparison; raises AmbiguousOrder if undecidable."""
    if isinstance(a, int) and isinstance(b, int):
        return (a > b) - (a < b)
    if isinstance(a, LogIndex) and isinstance(b, LogIndex) and a.base == b.base:
        return (a.off > b.off) - (a.off < b.off)
    va, vb = as_value(a), as_value(b)
    if va.hi < vb.lo:
        return -1
    if vb.hi < va.lo:
        return 1
    raise AmbiguousOrder(f"cannot order {a!r} and {b!r}")


def idx_le(a: Index, b: Index) -> bool:
    return idx_cmp(a, b) <= 0


def idx_count(a: Index, b: Index) -> Union[int, LogInterval]:
    """Number of integers in [a, b]: exact int when possible, else an enclosure."""
    if isinstance(a, int) and isinstance(b, int):
        return max(0, b - a + 1)
    if isinstance(a, LogIndex) and isinstance(b, LogIndex) and a.base == b.base:
        return max(0, b.off - a.off + 1)
    if idx_cmp(a, b) > 0:
        return 0
    return (as_value(b) + LogInterval.one()).sub(as_value(a))


def count_interval(c: Union[int, LogInterval]) -> LogInterval:
    return c if isinstance(c, LogInterval) else LogInterval.from_int(c)


def is_exact(n) -> bool:
    return isinstance(n, int)


# ---------------------------------------------------------------------------
# convergent table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergentRow:
    k: int
    a: Union[int, LogInterval, None]      # a_k (None for k = 0)
    q: Index
    p: Optional[int]
    qnorm: Optional[LogInterval]
    qnorm_exact: Optional[tuple] = None   # (lo, hi) Fractions in exact rows
    exact: bool = True

    @property
    def ln_q(self) -> LogInterval:
        return as_value(self.q)


@dataclass(frozen=True)
class ConvergentTable:
    spec: RotationSpec
    K: int
    rows: tuple
    extra: tuple = field(default=(), repr=False)   # look-ahead rows beyond K

    def row(self, k: int) -> ConvergentRow:
        if 0 <= k <= self.K:
            return self.rows[k]
        if self.K < k <= self.K + len(self.extra):
            return self.extra[k - self.K - 1]
        raise IndexOutOfRange(f"row {k} not available (K={self.K})")

    def has_row(self, k: int) -> bool:
        return 0 <= k <= self.K + len(self.extra)

    def q(self, k: int) -> Index:
        if k == -1:
            return 0
        return self.row(k).q

    def p(self, k: int) -> Optional[int]:
        if k == -1:
            return 1
        return self.row(k).p

    def a(self, k: int):
        return self.row(k).a

    def qnorm(self, k: int) -> LogInterval:
        r = self.row(k)
        if r.qnorm is None:
            raise IndexOutOfRange(f"qnorm for k={k} needs q_{k + 1}")
        return r.qnorm

    @property
    def exact(self) -> bool:
        return all(r.exact for r in self.rows)

    def all_rows(self):
        return self.rows + self.extra

    def ln_q_float(self, k: int) -> float:
        return idx_lnf(self.q(k))


def _digits(n: int) -> float:
    return n.bit_length() * _LOG10_2


def _tail_bounds(quotients: Sequence[int]):
    """Exact bounds for t = [0; a_1, ..., a_d + x], x in [0, 1]."""
    if not quotients:
        return Fraction(0), Fraction(1)
    p_prev, p, q_prev, q = 1, 0, 0, 1
    for a in quotients:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    t0 = Fraction(p, q)
    t1 = Fraction(p + p_prev, q + q_prev)
    return min(t0, t1), max(t0, t1)


def _exact_qnorm(qk: int, qk1: int, tail: Sequence[int]):
    """Exact rational bounds on ||q_k theta|| = 1/(q_{k+1} + q_k t)."""
    t_lo, t_hi = _tail_bounds(tail)
    return Fraction(1) / (qk1 + qk * t_hi), Fraction(1) / (qk1 + qk * t_lo)


def _generate(spec: RotationSpec, n_rows: int, strict_rows: int):
    """Raw (a, q, p) rows.  Overflow before ``strict_rows`` raises."""
    rule = spec.rule
    out = []
    q_prev, q = 0, 1
    p_prev, p = 1, 0
    out.append((None, 1, 0, True))
    log_mode = spec.mode == LOGSPACE
    for k in range(1, n_rows):
        if not spec.quotient_available(k):
            if k < strict_rows:
                raise InsufficientQuotients(f"ExplicitPQ has no quotient a_{k}")
            break
        exact_prev = out[-1][3]
        if exact_prev and not (log_mode and isinstance(q, int) and q.bit_length() > spec.exact_seed_bits):
            a = rule.quotient(k, q)
            q_new = a * q + q_prev
            p_new = a * p + p_prev
            if not log_mode and _digits(q_new) > spec.digit_cap:
                if k < strict_rows:
                    raise ExactOverflow(
                        f"q_{k} exceeds the {spec.digit_cap}-digit cap; use LogSpace mode")
                break
            out.append((a, q_new, p_new, True))
            q_prev, q, p_prev, p = q, q_new, p, p_new
        else:
            lq = as_value(q) if isinstance(q, int) else q
            lqp = as_value(q_prev) if isinstance(q_prev, int) else q_prev
            if isinstance(rule, PowerOfQ):
                la = rule.log_quotient(lq)
            else:
                la = LogInterval.from_int(rule.quotient(k))
            q_new = la * lq + lqp
            out.append((la, q_new, None, False))
            q_prev, q = q, q_new
    return out


def convergents(spec: RotationSpec, K: int, lookahead: int = 2,
                tail_depth: Optional[int] = None) -> ConvergentTable:
    """Rows k = 0..K of a_k, q_k, p_k and an enclosure of ||q_k theta||.

    ``tail_depth=None`` refines each qnorm adaptively (relative width below
    2^-60 or the available quotients run out).
    """
    if K < 0 or K > spec.k_max:
        raise IndexOutOfRange(f"K={K} outside 0..k_max={spec.k_max}")
    raw = _generate(spec, K + 1 + lookahead, K + 1)
    rows = []
    for k, (a, q, p, ex) in enumerate(raw):
        if ex:
            q_idx = q
        else:
            q_idx = LogIndex(q)
        rows.append([k, a, q_idx, p, ex])
    built = []
    for k, (kk, a, q, p, ex) in enumerate(rows):
        qn, qn_exact = None, None
        if k + 1 < len(rows):
            qn, qn_exact = _row_qnorm(spec, rows, raw, k, tail_depth)
        built.append(ConvergentRow(kk, a, q, p, qn, qn_exact, ex))
    return ConvergentTable(spec, K, tuple(built[:K + 1]), tuple(built[K + 1:]))


def _tail_quotients(spec: RotationSpec, raw, k: int, depth: int):
    """a_{k+2}, ..., a_{k+1+depth} as exact ints when obtainable."""
    out = []
    for j in range(k + 2, k + 2 + depth):
        if not spec.quotient_available(j):
            break
        if isinstance(spec.rule, PowerOfQ):
            if j - 1 >= len(raw) or not raw[j - 1][3]:
                break
            out.append(spec.rule.quotient(j, raw[j - 1][1]))
        else:
            out.append(spec.rule.quotient(j))
    return out


_REL_TARGET = Fraction(1, 2**60)
_MAX_DEPTH = 80


def _row_qnorm(spec, rows, raw, k, tail_depth):
    qk, qk1 = rows[k][2], rows[k + 1][2]
    if isinstance(qk, int) and isinstance(qk1, int):
        if tail_depth is not None:
            lo, hi = _exact_qnorm(qk, qk1, _tail_quotients(spec, raw, k, tail_depth))
        else:
            depth, lo, hi = 0, *_exact_qnorm(qk, qk1, [])
            while (hi - lo) > _REL_TARGET * lo and depth < _MAX_DEPTH:
                depth = 2 * depth + 1 if depth else 1
                tail = _tail_quotients(spec, raw, k, depth)
                lo, hi = _exact_qnorm(qk, qk1, tail)
                if len(tail) < depth:
                    break
        return LogInterval.from_rational_bounds(lo, hi), (lo, hi)
    return _log_qnorm(spec, raw, k, tail_depth), None


def _log_qnorm(spec, raw, k, tail_depth):
    lqk = as_value(raw[k][1]) if raw[k][3] else raw[k][1]
    lqk1 = as_value(raw[k + 1][1]) if raw[k + 1][3] else raw[k + 1][1]
    t_lo, t_hi = LogInterval.zero(), LogInterval.one()
    if not isinstance(spec.rule, PowerOfQ):
        # quotients are exact even when q_k is not: use an exact tail
        depth = 40 if tail_depth is None else tail_depth
        tail = [spec.rule.quotient(j) for j in range(k + 2, k + 2 + depth)
                if spec.quotient_available(j)]
        lo, hi = _tail_bounds(tail)
        t_lo, t_hi = LogInterval.from_rational(lo), LogInterval.from_rational(hi)
    elif (tail_depth is None or tail_depth > 0) and k + 2 < len(raw):
        a2 = raw[k + 2][0]
        la2 = a2 if isinstance(a2, LogInterval) else LogInterval.from_int(a2)
        t_hi = la2.inv()
        t_lo = (la2 + LogInterval.one()).inv()
    den_small = lqk1 + lqk * t_lo
    den_big = lqk1 + lqk * t_hi
    return LogInterval(neg(den_big.hi), neg(den_small.lo))


def qnorm(table: ConvergentTable, k: int, tail_depth: Optional[int] = 0) -> LogInterval:
    """Enclosure of ||q_k theta|| using ``tail_depth`` further quotients."""
    return qnorm_bounds(table, k, tail_depth)[0]


def qnorm_bounds(table: ConvergentTable, k: int, tail_depth: Optional[int] = 0):
    """(LogInterval, exact Fraction bounds or None) for ||q_k theta||."""
    spec = table.spec
    if k < 0 or not table.has_row(k + 1):
        raise IndexOutOfRange(f"qnorm(k={k}) needs q_{k + 1}")
    qk, qk1 = table.q(k), table.q(k + 1)
    if isinstance(qk, int) and isinstance(qk1, int):
        if tail_depth is None:
            r = table.row(k)
            return r.qnorm, r.qnorm_exact
        tail = []
        for j in range(k + 2, k + 2 + tail_depth):
            if not spec.quotient_available(j):
                break
            if isinstance(spec.rule, PowerOfQ):
                if not table.has_row(j - 1) or not isinstance(table.q(j - 1), int):
                    break
                tail.append(spec.rule.quotient(j, table.q(j - 1)))
            else:
                tail.append(spec.rule.quotient(j))
        lo, hi = _exact_qnorm(qk, qk1, tail)
        return LogInterval.from_rational_bounds(lo, hi), (lo, hi)
    raw = [(r.a, r.q.base if isinstance(r.q, LogIndex) else r.q, r.p, r.exact)
           for r in table.all_rows()]
    return _log_qnorm(spec, raw, k, tail_depth), None


# ---------------------------------------------------------------------------
# orbit points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitApprox:
    """theta ~ p_m/q_m with a certified one-sided error.

    For every n: <n theta> = r_n / q_m + sign * n * delta with
    r_n = n p_m mod q_m and 0 < delta <= delta_hi.  ``sign`` is +1 for even m
    (p_m/q_m below theta) and -1 for odd m.
    """

    m: int
    p_m: int
    q_m: int
    sign: int
    delta_hi: Fraction
    n_max: int

    def residue(self, n: int) -> int:
        return (n * self.p_m) % self.q_m

    def point(self, n: int):
        """Certified Fraction interval (lo, hi) containing <n theta>."""
        x = Fraction(self.residue(n), self.q_m)
        e = n * self.delta_hi
        return (x, x + e) if self.sign > 0 else (x - e, x)

    def error_bound(self, n: int) -> Fraction:
        return n * self.delta_hi


def orbit_approx(table: ConvergentTable, n_max: int, precision_bits: int) -> OrbitApprox:
    """Smallest convergent p_m/q_m with q_m > n_max and
    n_max * |theta - p_m/q_m| < 2^-(precision_bits+1)."""
    target = Fraction(1, 2 ** (precision_bits + 1))
    m = 0
    while True:
        if not table.has_row(m + 1):
            raise PrecisionUnreachable(
                f"need more convergents for n={n_max} at {precision_bits} bits")
        qm = table.q(m)
        row = table.row(m)
        if not isinstance(qm, int) or row.qnorm_exact is None:
            raise PrecisionUnreachable("orbit points need exact-mode convergents")
        delta_hi = row.qnorm_exact[1] / qm
        if qm > n_max and n_max * delta_hi < target:
            sign = 1 if m % 2 == 0 else -1
            return OrbitApprox(m, table.p(m), qm, sign, delta_hi, n_max)
        m += 1


def fractional_orbit(table: ConvergentTable, n: int, precision_bits: int):
    """Certified interval (lo, hi) of Fractions containing <n theta>, width
    below 2^-precision_bits."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return Fraction(0), Fraction(0)
    return orbit_approx(table, n, precision_bits).point(n)


# ---------------------------------------------------------------------------
# growth exponent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthEstimate:
    w: float
    window: tuple
    series: list          # (k, ln q_{k+1}/ln q_k, (ln a_{k+1} + ln q_k)/ln q_k)


def _ln_a(table, k):
    a = table.a(k)
    if isinstance(a, LogInterval):
        return a.mid()
    return math.log(a)


def growth_exponent_w(table: ConvergentTable, K: Optional[int] = None,
                      window: Optional[int] = None) -> GrowthEstimate:
    """Trailing-window estimate of w = limsup ln q_{k+1} / ln q_k.

    The estimate uses (ln a_{k+1} + ln q_k)/ln q_k, which differs from the raw
    ratio by at most ln 2 / ln q_k and so has the same limsup, but is far less
    biased at moderate k.  Raw ratios are reported in the series.
    """
    K = table.K if K is None else K
    if K < 2:
        raise ValueError("growth exponent needs K >= 2")
    series = []
    for k in range(1, K):
        lq = idx_lnf(table.q(k))
        if lq <= 0:
            continue
        raw = idx_lnf(table.q(k + 1)) / lq
        est = (_ln_a(table, k + 1) + lq) / lq
        series.append((k, raw, est))
    if not series:
        raise ValueError("no rows with q_k > 1")
    w_len = window if window else max(1, len(series) // 2)
    tail = series[-w_len:]
    return GrowthEstimate(max(e for _, _, e in tail), (tail[0][0], tail[-1][0]), series)
