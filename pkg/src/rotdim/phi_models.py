"""Monotone error functions phi with certified evaluation and block sums.

Every model answers three questions with enclosures: the value phi(n), the
power sum of phi(n)^s over an index range, and the first index where
phi(n)^s drops below a given level.  Indices are Python ints or
:class:`~rotdim.cf_engine.LogIndex` values, so the same code serves exact and
log-space tables.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq, mpz

from .cf_engine import (
    ConvergentTable,
    Index,
    LogIndex,
    as_value,
    idx_cmp,
    idx_count,
    idx_lnf,
    count_interval,
)
from .errors import ConfigError, DomainError, ModelValidationError
from .interval import LogInterval, PRECISION_BITS, _D, _N, _U, NEG_INF, exact_mpfr, imul, ln_power_integral, neg

DIRECT_CAP = 10**4
_HEAD = 128
_LOG_PIECE_RATIO = mpfr(1) + mpfr(2) ** -7   # ln-coordinate piece ratio for LogPower


def _mpq(x) -> mpq:
    x = Fraction(x)
    return mpq(x.numerator, x.denominator)


class PhiModel:
    """Common interface.  Subclasses implement ``log_phi`` and friends."""

    domain_min = 1
    kind = "abstract"

    def check_domain(self, n: Index):
        if isinstance(n, int) and n < self.domain_min:
            raise DomainError(f"{self.kind}: n={n} below domain start {self.domain_min}")

    def log_phi(self, n: Index) -> LogInterval:
        raise NotImplementedError

    def log_phi_pow(self, n: Index, s) -> LogInterval:
        return self.log_phi(n) ** s

    def log_block_sum(self, a: Index, b: Index, s) -> LogInterval:
        raise NotImplementedError

    def pieces(self, a: Index, b: Index):
        """Maximal sub-ranges of [a, b] on which phi is constant, as
        (lo, hi, value) with value a LogInterval; continuous models yield a
        single (a, b, None)."""
        yield (a, b, None)

    def breakpoints_in(self, a: Index, b: Index):
        return []

    def crossing_index(self, c: LogInterval, s, lo: Index, hi: Index):
        return crossing_index(self, c, s, lo, hi)

    def describe(self) -> dict:
        raise NotImplementedError

    def validate(self, table: Optional[ConvergentTable] = None):
        pass


# ---------------------------------------------------------------------------
# continuous models
# ---------------------------------------------------------------------------

def _lae_up(x, y):
    """Upper bound on ln(e^x + e^y)."""
    return (LogInterval(NEG_INF, x) + LogInterval(NEG_INF, y)).hi


def _lae_down(x, y):
    return (LogInterval(x, x if x != NEG_INF else NEG_INF) + LogInterval(y, y)).lo


def _ln_ratio(a: Index, b: Index):
    """Real interval for ln(b/a) with b >= a (either may be a Fraction)."""
    if not isinstance(a, LogIndex) and not isinstance(b, LogIndex):
        r = _mpq(Fraction(b) / Fraction(a))
        return _D.log(r), _U.log(r)
    if isinstance(a, LogIndex) and isinstance(b, LogIndex) and a.base == b.base:
        # (X + ob)/(X + oa) = 1 + (ob - oa)/(X + oa)
        d = b.off - a.off
        if d == 0:
            return mpfr(0), mpfr(0)
        frac = LogInterval.from_int(abs(d)) / as_value(a)
        lo_v, hi_v = frac.value_bounds()
        if d > 0:
            return _D.log1p(lo_v), _U.log1p(hi_v)
        return _D.log1p(neg(hi_v)), _U.log1p(neg(lo_v))
    va, vb = as_value(a), as_value(b)
    lo = _D.sub(vb.lo, va.hi)
    return max(lo, mpfr(0)), _U.sub(vb.hi, va.lo)


def _nearest_slack(acc, x_max, n_terms):
    """Bounds for a sum of n_terms values exp(-x_i), 0 <= x_i <= x_max, each
    computed as nearest(exp(-nearest(p * nearest(ln n)))) and accumulated in
    round-to-nearest.

    Per term: ln n has relative error u = 2^-PRECISION; the two roundings in
    x = p ln n (p itself rounded) give |dx| <= 3u x; exp adds u relative.  So
    each term has relative error <= (3 x_max + 2) u (plus O(u^2)), and n_terms
    nearest additions of positive terms add at most n_terms * u relative.
    Twice the first-order bound is used.
    """
    u = mpfr(2) ** -(PRECISION_BITS - 1)
    rel = _U.mul(_U.add(_U.add(_U.mul(3, x_max), 2), n_terms), u)
    rel = _U.mul(rel, 2)
    return _D.mul(acc, _D.sub(1, rel)), _U.mul(acc, _U.add(1, rel))


def _ln_of(x) -> LogInterval:
    if isinstance(x, Fraction):
        return LogInterval.from_rational(x)
    return as_value(x)


class _ContinuousModel(PhiModel):
    """phi(n) = c g(n) with g smooth, positive and decreasing.

    Block sums: direct correctly rounded summation for short integer ranges,
    otherwise integral comparison.  Two integral enclosures are intersected:
    the monotone one, int_a^{b+1} g <= sum <= g(a) + int_a^b g, and, when g
    is convex, the trapezoid / midpoint one,
    int_a^b g + (g(a) + g(b))/2 <= sum <= int_{a-1/2}^{b+1/2} g.
    """

    convex = True

    def _ln_integral(self, ln_x0: LogInterval, ell, s, upper: bool):
        raise NotImplementedError

    def _direct(self, a: int, b: int, s) -> LogInterval:
        raise NotImplementedError

    def log_block_sum(self, a: Index, b: Index, s) -> LogInterval:
        self.check_domain(a)
        s = exact_mpfr(s)
        c = idx_cmp(a, b)
        if c > 0:
            return LogInterval.zero()
        if c == 0:
            return self.log_phi(a) ** s
        if isinstance(a, int) and isinstance(b, int):
            if b - a <= DIRECT_CAP:
                return self._direct(a, b, s)
            if a < _HEAD:
                # short head summed directly: the integral bounds are loose near small n
                return self._direct(a, _HEAD - 1, s) + self.log_block_sum(_HEAD, b, s)
        c_s = self._ln_c ** s
        g_a = self.log_phi(a) ** s
        ln_a = as_value(a)
        lo = self._ln_integral(ln_a, _ln_ratio(a, b + 1), s, upper=False)
        lo = _D.add(lo, c_s.lo) if lo != NEG_INF else NEG_INF
        up = self._ln_integral(ln_a, _ln_ratio(a, b), s, upper=True)
        hi = _lae_up(g_a.hi, _U.add(up, c_s.hi) if up != NEG_INF else NEG_INF)
        if self.convex and isinstance(a, int) and isinstance(b, int) and a - Fraction(1, 2) >= self.domain_min:
            a_h = Fraction(2 * a - 1, 2)
            up2 = self._ln_integral(LogInterval.from_rational(a_h), _ln_ratio(a_h, Fraction(2 * b + 1, 2)),
                                    s, upper=True)
            hi = min(hi, _U.add(up2, c_s.hi))
            lo2 = self._ln_integral(ln_a, _ln_ratio(a, b), s, upper=False)
            if lo2 != NEG_INF:
                g_b = self.log_phi(b) ** s
                half = LogInterval.sum([g_a, g_b]) * LogInterval.from_rational(Fraction(1, 2))
                lo = max(lo, _lae_down(_D.add(lo2, c_s.lo), half.lo))
        return LogInterval(lo, max(lo, hi))


class PowerLaw(_ContinuousModel):
    """phi(n) = c n^(-gamma)."""

    kind = "PowerLaw"

    def __init__(self, c=1, gamma=1):
        self.c = Fraction(c)
        self.gamma = Fraction(gamma)
        if self.c <= 0 or self.gamma <= 0:
            raise ModelValidationError("PowerLaw needs c > 0 and gamma > 0 (phi must tend to 0)")
        self._ln_c = LogInterval.from_rational(self.c)
        self._g = _mpq(self.gamma)
        self._lnc_f = math.log(self.c)
        self._g_f = float(self.gamma)

    def log_phi(self, n: Index) -> LogInterval:
        self.check_domain(n)
        ln_n = as_value(n)
        lo = _D.sub(self._ln_c.lo, _U.mul(ln_n.hi, self._g))
        hi = _U.sub(self._ln_c.hi, _D.mul(ln_n.lo, self._g))
        return LogInterval(lo, hi)

    def ln_phi_float(self, ln_n):
        return self._lnc_f - self._g_f * ln_n

    def _ln_integral(self, ln_x0, ell, s, upper):
        p = _D.mul(self._g, s) if upper else _U.mul(self._g, s)
        return ln_power_integral((ln_x0.lo, ln_x0.hi), ell, p, upper)

    def _direct(self, a, b, s):
        # Each term exp(-p ln n) is formed with round-to-nearest MPFR steps and
        # the whole sum is widened by a relative bound on their error (see
        # _nearest_slack); that is three primitive operations per term.
        p = _N.mul(self._g, s)
        acc = mpfr(0)
        for n in range(max(a, 2), b + 1):
            x = _N.mul(p, _N.log(n))
            acc = _N.add(acc, _N.exp(neg(x)))
        x_max = _N.mul(p, _N.log(max(b, 2)))
        if a == 1:
            acc = _N.add(acc, 1)
        lo, hi = _nearest_slack(acc, x_max, b - a + 1)
        return LogInterval.from_value_bounds(lo, hi) * (self._ln_c ** s)

    def describe(self) -> dict:
        return {"kind": "PowerLaw", "c": str(self.c), "gamma": str(self.gamma)}


class LogPower(_ContinuousModel):
    """phi(n) = c n^(-gamma) (ln n)^(-delta), defined for n >= 2."""

    kind = "LogPower"
    domain_min = 2

    def __init__(self, c=1, gamma=1, delta=0):
        self.c = Fraction(c)
        self.gamma = Fraction(gamma)
        self.delta = Fraction(delta)
        if self.c <= 0 or self.gamma <= 0:
            raise ModelValidationError("LogPower needs c > 0 and gamma > 0")
        # d/dx ln phi < 0 on x >= 2 iff gamma ln 2 + delta > 0
        if not float(self.gamma) * math.log(2) + float(self.delta) > 0:
            raise ModelValidationError("LogPower is not decreasing on n >= 2")
        self.convex = self.delta >= 0
        self._ln_c = LogInterval.from_rational(self.c)
        self._g = _mpq(self.gamma)
        self._d = _mpq(self.delta)

    def log_phi(self, n: Index) -> LogInterval:
        self.check_domain(n)
        ln_n = as_value(n)
        ll = (_D.log(ln_n.lo), _U.log(ln_n.hi))
        dl_lo, dl_hi = imul(self._d, self._d, ll[0], ll[1])
        lo = _D.sub(_D.sub(self._ln_c.lo, _U.mul(ln_n.hi, self._g)), dl_hi)
        hi = _U.sub(_U.sub(self._ln_c.hi, _D.mul(ln_n.lo, self._g)), dl_lo)
        return LogInterval(lo, hi)

    def ln_phi_float(self, ln_n: float) -> float:
        return math.log(self.c) - float(self.gamma) * ln_n - float(self.delta) * np.log(ln_n)

    def _direct(self, a, b, s):
        p_lo, p_hi = _D.mul(self._g, s), _U.mul(self._g, s)
        e_lo, e_hi = _D.mul(self._d, s), _U.mul(self._d, s)
        lo = mpfr(0)
        hi = mpfr(0)
        for n in range(a, b + 1):
            z = mpz(n)
            ln_lo, ln_hi = _D.log(z), _U.log(z)
            ll_lo, ll_hi = _D.log(ln_lo), _U.log(ln_hi)
            t_lo, t_hi = imul(e_lo, e_hi, ll_lo, ll_hi)
            lo = _D.add(lo, _D.exp(_D.sub(_D.mul(neg(p_hi), ln_hi), t_hi)))
            hi = _U.add(hi, _U.exp(_U.sub(_U.mul(neg(p_lo), ln_lo), t_lo)))
        return LogInterval.from_value_bounds(lo, hi) * (self._ln_c ** s)

    def _ln_integral(self, ln_x0, ell, s, upper):
        """Bound on ln of the integral of x^(-s gamma) (ln x)^(-s delta) over
        [x0, x0 e^ell], by pieces geometric in ln x."""
        p = _D.mul(self._g, s) if upper else _U.mul(self._g, s)
        e_lo, e_hi = _D.mul(self._d, s), _U.mul(self._d, s)
        if upper:
            u0, u_end = ln_x0.lo, _U.add(ln_x0.hi, ell[1])
        else:
            u0, u_end = ln_x0.hi, _D.add(ln_x0.lo, ell[0])
        if not u_end > u0:
            return NEG_INF
        parts = []
        u = u0
        while u < u_end:
            u1 = min(_N_mul(u, _LOG_PIECE_RATIO), u_end)
            if not u1 > u:
                u1 = u_end
            base = ln_power_integral((u, u), (_D.sub(u1, u), _U.sub(u1, u)), p, upper)
            # (ln x)^(-e) on [u, u1] is extremal at the endpoints
            h0 = imul(neg(e_hi), neg(e_lo), _D.log(u), _U.log(u))
            h1 = imul(neg(e_hi), neg(e_lo), _D.log(u1), _U.log(u1))
            if base != NEG_INF:
                if upper:
                    v = _U.add(base, max(h0[1], h1[1]))
                else:
                    v = _D.add(base, min(h0[0], h1[0]))
                parts.append(LogInterval(v, v))
            u = u1
        if not parts:
            return NEG_INF
        tot = LogInterval.sum(parts)
        return tot.hi if upper else tot.lo

    def describe(self) -> dict:
        return {"kind": "LogPower", "c": str(self.c), "gamma": str(self.gamma),
                "delta": str(self.delta)}


def _N_mul(a, b):
    return gmpy2.mul(a, b)


# ---------------------------------------------------------------------------
# monomial expressions in q-data
# ---------------------------------------------------------------------------

class Monomial:
    """const * prod_d q[k + d]^e_d, parsed from a restricted expression."""

    def __init__(self, const: Fraction, exps: dict, source: str = ""):
        self.const = Fraction(const)
        self.exps = {d: Fraction(e) for d, e in exps.items() if e != 0}
        self.source = source

    @classmethod
    def parse(cls, text: str) -> "Monomial":
        src = text.replace("^", "**")
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse expression {text!r}: {exc.msg}") from None
        m = cls._walk(tree.body, text)
        m.source = text
        return m

    @classmethod
    def _walk(cls, node, text):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return cls(Fraction(str(node.value)), {})
        if isinstance(node, ast.Subscript):
            if not (isinstance(node.value, ast.Name) and node.value.id == "q"):
                raise ConfigError(f"only q[...] may be indexed in {text!r}")
            d = cls._offset(node.slice, text)
            return cls(Fraction(1), {d: 1})
        if isinstance(node, ast.BinOp):
            left = cls._walk(node.left, text)
            if isinstance(node.op, ast.Pow):
                e = cls._constant(node.right, text)
                if e.denominator != 1 and left.const != 1 and left.const < 0:
                    raise ConfigError(f"fractional power of a negative constant in {text!r}")
                return left.power(e)
            right = cls._walk(node.right, text)
            if isinstance(node.op, ast.Mult):
                return left.mul(right)
            if isinstance(node.op, ast.Div):
                return left.mul(right.power(Fraction(-1)))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            raise ConfigError(f"negative values are not allowed in {text!r}")
        raise ConfigError(f"unsupported construct in expression {text!r}")

    @staticmethod
    def _offset(node, text) -> int:
        if isinstance(node, ast.Name) and node.id == "k":
            return 0
        if isinstance(node, ast.BinOp) and isinstance(node.left, ast.Name) and node.left.id == "k" \
                and isinstance(node.right, ast.Constant) and isinstance(node.right.value, int):
            if isinstance(node.op, ast.Add):
                return node.right.value
            if isinstance(node.op, ast.Sub):
                return -node.right.value
        raise ConfigError(f"q index must be k, k+d or k-d in {text!r}")

    @classmethod
    def _constant(cls, node, text) -> Fraction:
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return Fraction(str(node.value))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -cls._constant(node.operand, text)
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Div):
            return cls._constant(node.left, text) / cls._constant(node.right, text)
        raise ConfigError(f"exponents must be numeric constants in {text!r}")

    def mul(self, other: "Monomial") -> "Monomial":
        exps = dict(self.exps)
        for d, e in other.exps.items():
            exps[d] = exps.get(d, 0) + e
        return Monomial(self.const * other.const, exps)

    def power(self, e: Fraction) -> "Monomial":
        if e.denominator != 1 and self.const != 1:
            raise ConfigError("fractional powers of constants are not supported")
        const = self.const ** int(e) if e.denominator == 1 else self.const
        return Monomial(const, {d: x * e for d, x in self.exps.items()})

    @property
    def q_degree(self) -> Fraction:
        return sum(self.exps.values(), Fraction(0))

    @property
    def integral_exponents(self) -> bool:
        return all(e.denominator == 1 for e in self.exps.values())

    def exact_value(self, table: ConvergentTable, j: int) -> Optional[Fraction]:
        """Exact rational value when all q's are exact ints and exponents integral."""
        if not self.integral_exponents:
            return None
        v = self.const
        for d, e in self.exps.items():
            q = table.q(j + d)
            if not isinstance(q, int):
                return None
            if q == 0 and e < 0:
                raise DomainError(f"{self.source}: division by q[{j + d}] = 0")
            v *= Fraction(q) ** int(e)
        return v

    def log_value(self, table: ConvergentTable, j: int) -> LogInterval:
        v = self.exact_value(table, j)
        if v is not None:
            return LogInterval.from_rational(v)
        lo = _D.log(_mpq(self.const))
        hi = _U.log(_mpq(self.const))
        for d, e in self.exps.items():
            lq = as_value(table.q(j + d))
            t_lo, t_hi = imul(_mpq(e), _mpq(e), lq.lo, lq.hi)
            lo, hi = _D.add(lo, t_lo), _U.add(hi, t_hi)
        return LogInterval(lo, hi)

    def max_offset(self) -> int:
        return max(self.exps, default=0)

    def __repr__(self):
        return f"Monomial({self.source!r})"


# ---------------------------------------------------------------------------
# step models
# ---------------------------------------------------------------------------

class _StepModel(PhiModel):
    """phi(n) = V(j) for B(j-1) < n <= B(j), B(-1) = 0."""

    def n_pieces(self) -> int:
        raise NotImplementedError

    def breakpoint(self, j: int) -> Index:
        raise NotImplementedError

    def value(self, j: int) -> LogInterval:
        raise NotImplementedError

    def piece_of(self, n: Index) -> int:
        """Piece index j with B(j-1) < n <= B(j) (binary search)."""
        if isinstance(n, int) and n < 1:
            raise DomainError(f"{self.kind}: n={n} below 1")
        lo, hi = 0, self.n_pieces() - 1
        if idx_cmp(n, self.breakpoint(hi)) > 0:
            raise DomainError(f"{self.kind}: n beyond the last available breakpoint")
        while lo < hi:
            mid = (lo + hi) // 2
            if idx_cmp(n, self.breakpoint(mid)) <= 0:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def log_phi(self, n: Index) -> LogInterval:
        return self.value(self.piece_of(n))

    def pieces(self, a: Index, b: Index):
        if idx_cmp(a, b) > 0:
            return
        j = self.piece_of(a)
        start = a
        while True:
            bj = self.breakpoint(j)
            if idx_cmp(bj, b) >= 0:
                yield (start, b, self.value(j))
                return
            if idx_cmp(bj, start) >= 0:
                yield (start, bj, self.value(j))
            start = bj + 1
            j += 1

    def breakpoints_in(self, a: Index, b: Index):
        """Breakpoints B(j) with a <= B(j) <= b."""
        out = []
        if idx_cmp(a, b) > 0:
            return out
        j = self.piece_of(a)
        while j < self.n_pieces():
            bj = self.breakpoint(j)
            if idx_cmp(bj, b) > 0:
                break
            if idx_cmp(bj, a) >= 0:
                out.append(bj)
            j += 1
        return out

    def log_block_sum(self, a: Index, b: Index, s) -> LogInterval:
        s = exact_mpfr(s)
        parts = []
        for lo, hi, v in self.pieces(a, b):
            cnt = idx_count(lo, hi)
            if cnt == 0:
                continue
            parts.append(count_interval(cnt) * (v ** s))
        return LogInterval.sum(parts)

    def validate(self, table=None):
        n = self.n_pieces()
        prev_b, prev_v = 0, None
        for j in range(n):
            bj = self.breakpoint(j)
            if idx_cmp(bj, prev_b) < 0:
                raise ModelValidationError(f"{self.kind}: breakpoints decrease at piece {j}")
            if idx_cmp(bj, prev_b) > 0:
                v = self.value(j)
                if prev_v is not None and v.lo > prev_v.hi:
                    raise ModelValidationError(f"{self.kind}: phi increases at piece {j}")
                prev_v = v
            prev_b = bj


class BlockConstant(_StepModel):
    """Breakpoints and values given by monomials in the convergent data."""

    kind = "BlockConstant"

    def __init__(self, breakpoint: str, value: str, table: ConvergentTable):
        self.break_expr = Monomial.parse(breakpoint)
        self.value_expr = Monomial.parse(value)
        self.table = table
        if not self.break_expr.integral_exponents:
            raise ConfigError("breakpoint exponents must be integers")
        if self.break_expr.q_degree <= 0:
            raise ModelValidationError("breakpoints must grow with q")
        if self.value_expr.q_degree >= 0:
            raise ModelValidationError("phi must tend to zero: value needs a negative q-degree")
        # pieces whose expressions only use available rows
        last = table.K + len(table.extra)
        need = max(self.break_expr.max_offset(), self.value_expr.max_offset())
        self._n = max(0, last - need + 1)
        if self._n == 0:
            raise ConfigError("convergent table too short for the breakpoint rule")
        self._b = {}
        self._v = {}

    def n_pieces(self) -> int:
        return self._n

    def breakpoint(self, j: int) -> Index:
        if j < 0:
            return 0
        b = self._b.get(j)
        if b is None:
            v = self.break_expr.exact_value(self.table, j)
            if v is not None:
                b = math.floor(v)
            else:
                b = LogIndex(self.break_expr.log_value(self.table, j))
            self._b[j] = b
        return b

    def value(self, j: int) -> LogInterval:
        v = self._v.get(j)
        if v is None:
            v = self.value_expr.log_value(self.table, j)
            self._v[j] = v
        return v

    def describe(self) -> dict:
        return {"kind": "BlockConstant", "breakpoint": self.break_expr.source,
                "value": self.value_expr.source}


class TableStep(_StepModel):
    """Finite explicit step function: phi = values[i] on (breaks[i-1], breaks[i]]."""

    kind = "TableStep"

    def __init__(self, breakpoints: Sequence[int], values: Sequence):
        if len(breakpoints) != len(values) or not breakpoints:
            raise ConfigError("TableStep needs equally many breakpoints and values")
        self.breaks = [int(b) for b in breakpoints]
        self.values = [Fraction(str(v)) if isinstance(v, float) else Fraction(v) for v in values]
        if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])) or self.breaks[0] < 1:
            raise ModelValidationError("TableStep breakpoints must be positive and increasing")
        if any(v <= 0 for v in self.values):
            raise ModelValidationError("TableStep values must be positive")
        if any(v2 > v1 for v1, v2 in zip(self.values, self.values[1:])):
            raise ModelValidationError("TableStep values must be non-increasing")
        if self.values[-1] == self.values[0]:
            raise ModelValidationError("TableStep is constant: phi must tend to zero")
        self._v = [LogInterval.from_rational(v) for v in self.values]

    def n_pieces(self) -> int:
        return len(self.breaks)

    def breakpoint(self, j: int) -> Index:
        return 0 if j < 0 else self.breaks[j]

    def value(self, j: int) -> LogInterval:
        return self._v[j]

    def describe(self) -> dict:
        return {"kind": "TableStep", "breakpoints": self.breaks,
                "values": [str(v) for v in self.values]}


# ---------------------------------------------------------------------------
# crossing search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Crossing:
    index: Index
    certain: bool
    possible: Index    # smallest n where phi(n)^s < c cannot be excluded


def _below(model, n, s, c: LogInterval, certified: bool) -> bool:
    v = model.log_phi(n) ** s
    return v.hi < c.lo if certified else v.lo < c.hi


def _first_true(pred, lo: Index, hi: Index):
    """Smallest n in [lo, hi] with pred(n), assuming pred monotone; hi+1 if none."""
    if not pred(hi):
        return hi + 1
    if pred(lo):
        return lo
    if isinstance(lo, int) and isinstance(hi, int):
        a, b = lo, hi        # pred(a) false, pred(b) true
        while b - a > 1:
            m = (a + b) // 2
            if pred(m):
                b = m
            else:
                a = m
        return b
    if isinstance(lo, LogIndex) and isinstance(hi, LogIndex) and lo.base == hi.base:
        a, b = lo.off, hi.off
        while b - a > 1:
            m = (a + b) // 2
            if pred(LogIndex(lo.base, m)):
                b = m
            else:
                a = m
        return LogIndex(lo.base, b)
    # bisection in log coordinates; resolution limited by working precision
    ua, ub = idx_lnf(lo), idx_lnf(hi)
    best = hi
    for _ in range(200):
        um = 0.5 * (ua + ub)
        if not ua < um < ub:
            break
        cand = LogIndex(LogInterval.point(um))
        try:
            ok = pred(cand)
        except Exception:
            break
        if ok:
            ub, best = um, cand
        else:
            ua = um
    return best


def crossing_index(model: PhiModel, c: LogInterval, s, lo: Index, hi: Index) -> Crossing:
    """Smallest n in [lo, hi] with phi(n)^s certainly below c (hi+1 if none).

    ``possible`` is the smallest n where the strict inequality might hold; the
    two agree exactly when the boundary is certified.
    """
    s = exact_mpfr(s)
    if isinstance(model, _StepModel):
        cert = poss = None
        for a, b, v in model.pieces(lo, hi):
            vs = v ** s
            if poss is None and vs.lo < c.hi:
                poss = a
            if cert is None and vs.hi < c.lo:
                cert = a
                break
        cert = hi + 1 if cert is None else cert
        poss = cert if poss is None else poss
        return Crossing(cert, idx_cmp(cert, poss) == 0, poss)
    cert = _first_true(lambda n: _below(model, n, s, c, True), lo, hi)
    poss = _first_true(lambda n: _below(model, n, s, c, False), lo, hi)
    try:
        same = idx_cmp(cert, poss) == 0
    except Exception:
        same = False
    exact_idx = isinstance(cert, int) or (isinstance(cert, LogIndex) and isinstance(lo, LogIndex)
                                          and cert.base == lo.base)
    return Crossing(cert, same and exact_idx, poss)


# ---------------------------------------------------------------------------
# orders u, l
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderEstimate:
    u: float
    l: float
    window: tuple        # (first, last) sample position of the trailing window
    samples: list        # (ln n, r(n), block k)
    flagged: bool = False


def _grid(a: Index, b: Index):
    """Points a * 2^i strictly inside (a, b)."""
    out = []
    if isinstance(a, int) and isinstance(b, int):
        x = 2 * a
        while x < b:
            out.append(x)
            x *= 2
        return out
    ua, ub = idx_lnf(a), idx_lnf(b)
    step = math.log(2.0)
    u = ua + step
    while u < ub - step * 0.5:
        out.append(LogIndex(LogInterval.point(u)))
        u += step
    return out


def u_l_exponents(model: PhiModel, table: ConvergentTable, K: Optional[int] = None,
                  window: Optional[float] = 0.5) -> OrderEstimate:
    """Trailing-window max/min of r(n) = ln n / (-ln phi(n)) over a
    deterministic sample set: breakpoints B and B + 1 of the model, q_k and
    q_{k+1} - 1, and a ratio-2 grid inside every block."""
    K = table.K if K is None else K
    if K < 2:
        raise ValueError("u/l estimation needs K >= 2")
    samples = []
    for k in range(K):
        qk, qk1 = table.q(k), table.q(k + 1)
        if idx_cmp(qk1, qk) <= 0:
            continue
        end = qk1 - 1
        pts = [qk, end] + _grid(qk, end)
        for bp in model.breakpoints_in(qk, end):
            pts.append(bp)
            if idx_cmp(bp + 1, end) <= 0:
                pts.append(bp + 1)
        for n in pts:
            if isinstance(n, int) and n < max(2, model.domain_min):
                continue
            lp = model.log_phi(n).mid()
            if not lp < 0:
                continue
            ln_n = idx_lnf(n) if not isinstance(n, LogIndex) or n.off == 0 else as_value(n).mid()
            samples.append((ln_n, ln_n / -lp, k))
    if not samples:
        raise ValueError("no usable samples (phi >= 1 everywhere sampled)")
    samples.sort(key=lambda t: (t[0], t[1]))
    frac = window if window else 0.5
    start = int(len(samples) * (1 - frac))
    tail = samples[start:]
    rs = [r for _, r, _ in tail]
    return OrderEstimate(max(rs), min(rs), (start, len(samples) - 1), samples,
                         flagged=len(tail) < 3)
