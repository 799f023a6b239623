"""Orbit geometry on the circle: gaps of {<n theta>}, the arcs of one
convergent block and the long-interval cover of that block.

Every orbit point is handled as an exact linear form

    <n theta> = A / q_m + b * e,        e = theta - p_m / q_m,

with integers A, b and a convergent p_m/q_m chosen so that the rational part
alone already orders the points (|n e| < 1 / (2 q_m) for the n in play).  The
unknown e lies in a certified rational interval built from the enclosure of
||q_m theta||.  Equality of two gaps is then an exact integer comparison;
enclosures are only needed to report lengths.
"""

from __future__ import annotations

import bisect
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import gmpy2
import numpy as np

from .cf_engine import (
    EXACT,
    ConvergentTable,
    ExplicitPQ,
    RotationSpec,
    convergents,
)
from .errors import (
    BlockTooLong,
    CertificateFailure,
    ContainmentFailure,
    DomainError,
    EmptyBlock,
    PrecisionUnreachable,
)
from .interval import LogInterval

MAX_BITS = 4096
DEFAULT_BITS = 64
GAP_N_CAP = 10**5
BLOCK_CAP = 10**5
EQUI_N_CAP = 10**6


# ---------------------------------------------------------------------------
# exact frame
# ---------------------------------------------------------------------------

_TABLES: Dict[tuple, ConvergentTable] = {}


def _spec_key(spec: RotationSpec):
    return repr(spec.describe())


def _table_with(table: ConvergentTable, rows: int) -> ConvergentTable:
    """A table of the same rotation with rows 0..rows and qnorm for each."""
    if table.has_row(rows + 1) and table.row(rows).qnorm_exact is not None:
        return table
    spec = table.spec
    key = _spec_key(spec)
    have = _TABLES.get(key)
    if have is not None and have.K >= rows:
        return have
    K = max(rows, 2 * (have.K if have is not None else table.K), 16)
    if isinstance(spec.rule, ExplicitPQ):
        K = min(K, spec.k_max)
        if K < rows:
            raise PrecisionUnreachable(
                f"explicit quotients end at k={spec.k_max}; geometry needs row {rows}")
        ext = convergents(spec, K)
    else:
        ext = convergents(replace(spec, k_max=max(spec.k_max, K)), K)
    _TABLES[key] = ext
    return ext


@dataclass(frozen=True)
class Frame:
    """theta = p_m/q_m + e with e in sign * [d_lo, d_hi]."""

    m: int
    q_m: int
    p_m: int
    sign: int
    d_lo: Fraction
    d_hi: Fraction
    n_max: int
    bits: int

    def point(self, n: int) -> Tuple[int, int]:
        """(A, b) with <n theta> = A/q_m + b e, valid for 1 <= n <= n_max."""
        return (n * self.p_m) % self.q_m, n

    def enclose(self, A: int, b: int) -> Tuple[Fraction, Fraction]:
        x = Fraction(A, self.q_m)
        if b == 0:
            return x, x
        lo, hi = sorted((b * self.sign * self.d_lo, b * self.sign * self.d_hi))
        return x + lo, x + hi

    def qnorm_form(self, table: ConvergentTable, k: int) -> Tuple[int, int]:
        """Exact (A, b) for ||q_k theta|| = (-1)^k (q_k theta - p_k)."""
        sg = 1 if k % 2 == 0 else -1
        qk, pk = int(table.q(k)), int(table.p(k))
        return sg * (qk * self.p_m - pk * self.q_m), sg * qk


def frame_for(table: ConvergentTable, n_max: int, bits: int = DEFAULT_BITS):
    """Smallest m with q_m > n_max whose error keeps residue order
    (n_max |e| < 1/(2 q_m)) and n_max |e| < 2^-bits.  Returns (frame, table)
    where the table may have been extended."""
    if table.spec.mode != EXACT:
        raise DomainError("orbit geometry needs an exact-mode rotation spec")
    if bits > MAX_BITS:
        raise PrecisionUnreachable(f"precision above {MAX_BITS} bits requested")
    eps = Fraction(1, 2 ** bits)
    m = 0
    while True:
        table = _table_with(table, m + 1)
        qm = int(table.q(m))
        lo, hi = _qnorm_exact(table, m)
        d_lo, d_hi = lo / qm, hi / qm
        if qm > n_max and 2 * n_max * hi < 1 and n_max * d_hi < eps:
            sign = 1 if m % 2 == 0 else -1
            return Frame(m, qm, int(table.p(m)), sign, d_lo, d_hi, n_max, bits), table
        m += 1


def _F(x) -> Fraction:
    """Fraction from an int, Fraction or gmpy2 rational."""
    if isinstance(x, Fraction):
        return x
    return Fraction(int(x.numerator), int(x.denominator))


def _qnorm_exact(table: ConvergentTable, k: int) -> Tuple[Fraction, Fraction]:
    lo, hi = table.row(k).qnorm_exact
    return _F(lo), _F(hi)


def _wrap_lo(lo: Fraction, hi: Fraction):
    """Shift an interval by an integer so that lo lies in [0, 1)."""
    f = math.floor(lo)
    return lo - f, hi - f


# ---------------------------------------------------------------------------
# three-distance gaps
# ---------------------------------------------------------------------------

@dataclass
class GapCluster:
    lo: Fraction
    hi: Fraction
    count: int
    forms: List[Tuple[int, int]]

    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)


@dataclass
class GapResult:
    N: int
    gaps: List[tuple]          # circle order: (n_left, n_right, A, b, lo, hi)
    clusters: List[GapCluster]
    distinct_count: int
    exact_distinct: int
    total: Tuple[Fraction, Fraction]
    bits: int
    frame_m: int

    def lengths(self) -> List[float]:
        return sorted(c.mid() for c in self.clusters)


def _gaps_in_frame(fr: Frame, N: int):
    pts = sorted((fr.point(n)[0], n) for n in range(1, N + 1))
    out = []
    for j in range(N):
        A0, n0 = pts[j]
        if j + 1 < N:
            A1, n1 = pts[j + 1]
            dA = A1 - A0
        else:
            A1, n1 = pts[0]
            dA = A1 + fr.q_m - A0
        out.append((n0, n1, dA, n1 - n0))
    return out


def _cluster(items):
    """Merge (lo, hi, form) whose intervals overlap into chains."""
    items = sorted(items, key=lambda t: (t[0], t[1]))
    clusters: List[GapCluster] = []
    for lo, hi, form in items:
        if clusters and lo <= clusters[-1].hi:
            c = clusters[-1]
            c.hi = max(c.hi, hi)
            c.count += 1
            if form not in c.forms:
                c.forms.append(form)
        else:
            clusters.append(GapCluster(lo, hi, 1, [form]))
    return clusters


def three_distance_gaps(table: ConvergentTable, N: int, precision_bits: int = DEFAULT_BITS,
                        n_cap: int = GAP_N_CAP, check: bool = True) -> GapResult:
    """Circular gaps between <theta>, ..., <N theta>.

    The distinct count clusters gaps with overlapping enclosures; precision
    doubles until that count agrees with the exact count of distinct forms.
    With ``check`` a count above three raises CertificateFailure.
    """
    if N < 1:
        raise DomainError("N must be at least 1")
    if N > n_cap:
        raise DomainError(f"N={N} above the cap {n_cap}")
    bits = precision_bits
    while True:
        fr, table = frame_for(table, N, bits)
        raw = _gaps_in_frame(fr, N)
        gaps = []
        for n0, n1, dA, db in raw:
            lo, hi = fr.enclose(dA, db)
            gaps.append((n0, n1, dA, db, lo, hi))
        exact = len({(g[2], g[3]) for g in gaps})
        uniq = {}
        for g in gaps:
            uniq.setdefault((g[2], g[3]), (g[4], g[5]))
        clusters = _cluster([(lo, hi, f) for f, (lo, hi) in uniq.items()])
        # restore multiplicities
        mult = Counter((g[2], g[3]) for g in gaps)
        for c in clusters:
            c.count = sum(mult[f] for f in c.forms)
        if len(clusters) == exact:
            break
        bits *= 2
        if bits > MAX_BITS:
            raise PrecisionUnreachable(
                f"gap lengths for N={N} not separable at {MAX_BITS} bits")
    tot_lo = sum(g[4] for g in gaps)
    tot_hi = sum(g[5] for g in gaps)
    res = GapResult(N, gaps, clusters, len(clusters), exact, (tot_lo, tot_hi), bits, fr.m)
    if check and res.distinct_count > 3:
        raise CertificateFailure(f"N={N}: {res.distinct_count} distinct gap lengths")
    return res


def three_distance_sweep(table: ConvergentTable, N_max: int) -> List[int]:
    """Exact number of distinct gap lengths for every N = 1..N_max.

    Points are inserted one at a time; each insertion splits one gap, so the
    multiset of gap forms is updated in O(log N) plus the list insertion.
    """
    fr, table = frame_for(table, N_max, DEFAULT_BITS)
    qm = fr.q_m
    res = []
    order: List[int] = []
    owner: Dict[int, int] = {}
    forms: Counter = Counter()

    def form(A0, A1):
        dA = (A1 - A0) % qm
        if dA == 0:
            dA = qm
        return dA, owner[A1] - owner[A0]

    for n in range(1, N_max + 1):
        A = fr.point(n)[0]
        owner[A] = n
        if not order:
            order.append(A)
            forms[(qm, 0)] += 1
        else:
            j = bisect.bisect_left(order, A)
            left = order[j - 1] if j > 0 else order[-1]
            right = order[j] if j < len(order) else order[0]
            old = form(left, right) if left != right else (qm, 0)
            forms[old] -= 1
            if forms[old] == 0:
                del forms[old]
            forms[form(left, A)] += 1
            forms[form(A, right)] += 1
            order.insert(j, A)
        res.append(len(forms))
    return res


@dataclass
class SpecialGapResult:
    k: int
    N: int
    ok: bool
    degenerate: bool
    expected: Dict[str, Tuple[Fraction, Fraction]]
    observed: Dict[str, int]
    gaps: Optional[GapResult] = None


def special_gap_check(table: ConvergentTable, k: int, n_cap: int = GAP_N_CAP) -> SpecialGapResult:
    """Every gap of <theta>, ..., <q_{k+1} theta> equals ||q_k theta|| or
    ||q_k theta|| + ||q_{k+1} theta||, checked on exact forms and enclosures."""
    table = _table_with(table, k + 2)
    N = table.q(k + 1)
    if not table.row(k + 1).exact or N > n_cap:
        raise DomainError(f"q_(k+1) = {N} above the gap cap {n_cap}")
    N = int(N)
    e1 = _qnorm_exact(table, k)
    e2 = _qnorm_exact(table, k + 1)
    small = e1
    big = (e1[0] + e2[0], e1[1] + e2[1])
    expected = {"qnorm_k": small, "qnorm_k_plus_k1": big}
    g = three_distance_gaps(table, N, check=False)
    if N == 1:
        return SpecialGapResult(k, N, True, True, expected, {"full_circle": 1}, g)
    fr, _ = frame_for(table, N, g.bits)
    f1 = fr.qnorm_form(table, k)
    f2 = fr.qnorm_form(table, k + 1)
    f12 = (f1[0] + f2[0], f1[1] + f2[1])
    obs = {"qnorm_k": 0, "qnorm_k_plus_k1": 0, "other": 0}
    for n0, n1, dA, db, lo, hi in g.gaps:
        # the gap frame may differ from fr; recompute the form in fr
        form = _form_diff(fr, n0, n1)
        if form == f1 and lo <= small[1] and small[0] <= hi:
            obs["qnorm_k"] += 1
        elif form == f12 and lo <= big[1] and big[0] <= hi:
            obs["qnorm_k_plus_k1"] += 1
        else:
            obs["other"] += 1
    return SpecialGapResult(k, N, obs["other"] == 0, False, expected, obs, g)


def _form_diff(fr: Frame, n0: int, n1: int) -> Tuple[int, int]:
    """Form of the counter-clockwise distance from <n0 theta> to <n1 theta>."""
    A0, A1 = fr.point(n0)[0], fr.point(n1)[0]
    dA = (A1 - A0) % fr.q_m
    if dA == 0:
        dA = fr.q_m
    return dA, n1 - n0


# ---------------------------------------------------------------------------
# arcs of one block
# ---------------------------------------------------------------------------

def _frac_bounds(x: LogInterval) -> Tuple[Fraction, Fraction]:
    lo, hi = x.value_bounds()
    (a, b), (c, d) = lo.as_integer_ratio(), hi.as_integer_ratio()
    return Fraction(int(a), int(b)), Fraction(int(c), int(d))


@dataclass
class Arc:
    n: int
    center: Tuple[Fraction, Fraction]
    radius: LogInterval

    def __post_init__(self):
        if self.radius.is_zero or self.radius.hi == -math.inf:
            raise DomainError(f"arc at n={self.n} has non-positive radius")


def _block_bounds(table: ConvergentTable, k: int, cap: int):
    table = _table_with(table, k + 1)
    qk, qk1 = table.q(k), table.q(k + 1)
    if not table.row(k + 1).exact:
        raise DomainError("block endpoints are not exact integers")
    qk, qk1 = int(qk), int(qk1)
    if qk1 <= qk:
        raise EmptyBlock(f"block {k} is empty (q_k = q_(k+1))")
    if qk1 - qk > cap:
        raise BlockTooLong(f"block {k} has {qk1 - qk} indices, cap {cap}")
    return table, qk, qk1


def _bits_for(radius_lo: Fraction) -> int:
    """Bits so that the one-sided point error stays below radius / 8."""
    if radius_lo <= 0:
        raise PrecisionUnreachable("radius enclosure touches zero")
    need = math.ceil(-math.log2(float(radius_lo))) + 4 if radius_lo < 1 else 4
    return max(DEFAULT_BITS, need)


def build_Ek(table: ConvergentTable, model, k: int, cap: int = BLOCK_CAP) -> List[Arc]:
    """Arcs B(n theta, phi(n)) for q_k <= n < q_{k+1}."""
    table, qk, qk1 = _block_bounds(table, k, cap)
    radii = [model.log_phi(n) for n in range(qk, qk1)]
    r_min = min(_frac_bounds(r)[0] for r in radii)
    fr, table = frame_for(table, qk1, _bits_for(r_min))
    arcs = []
    for n, r in zip(range(qk, qk1), radii):
        A, b = fr.point(n)
        c = fr.enclose(A, b)
        if c[1] - c[0] > r_min / 8:
            raise PrecisionUnreachable(f"center of n={n} too wide")
        arcs.append(Arc(n, c, r))
    return arcs


def arc_union_measure(arcs: List[Arc]) -> float:
    """Lebesgue measure of the union of arcs, from midpoints (diagnostic)."""
    segs = []
    for a in arcs:
        c = float((a.center[0] + a.center[1]) / 2)
        r = float(a.radius.value_mid())
        if 2 * r >= 1:
            return 1.0
        lo, hi = c - r, c + r
        if lo < 0:
            segs += [(lo + 1, 1.0), (0.0, hi)]
        elif hi > 1:
            segs += [(lo, 1.0), (0.0, hi - 1)]
        else:
            segs.append((lo, hi))
    segs.sort()
    tot = 0.0
    cur_lo, cur_hi = None, None
    for lo, hi in segs:
        if cur_hi is None or lo > cur_hi:
            if cur_hi is not None:
                tot += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    if cur_hi is not None:
        tot += cur_hi - cur_lo
    return min(tot, 1.0)


# ---------------------------------------------------------------------------
# long-interval cover
# ---------------------------------------------------------------------------

@dataclass
class LongInterval:
    i: int
    members: int               # c' : balls n = t q_k + i with 1 <= t <= c'
    left: Tuple[Fraction, Fraction]
    right: Tuple[Fraction, Fraction]
    length: LogInterval


@dataclass
class CoverPlan:
    k: int
    s: float
    split: int
    c: int
    r: int
    q_k: int
    long_intervals: List[Optional[LongInterval]]      # one slot per residue i
    small_balls: List[Arc]
    s_cost: LogInterval
    bound: LogInterval                                # 2 * T_k(s) at this split
    containment: bool
    cost_ok: bool
    notes: List[str] = field(default_factory=list)

    @property
    def groups(self) -> int:
        return len(self.long_intervals)


def _phi_le(model, n: int, m: int, cache) -> bool:
    """Certified phi(n) <= phi(m) for n >= m."""
    if n == m:
        return True
    a = cache.setdefault(n, model.log_phi(n))
    b = cache.setdefault(m, model.log_phi(m))
    return a == b or a.certainly_le(b)


def build_cover(table: ConvergentTable, model, k: int, s: float, split: Optional[int] = None,
                cap: int = BLOCK_CAP) -> CoverPlan:
    """Long intervals C_{k,i} for the balls up to ``split`` and single balls
    beyond it, with containment and the s-cost certificate verified.

    Writing split = c q_k + r, the group i (n = t q_k + i) is covered by one
    interval running over its c' members, c' = c for i <= r and c - 1
    otherwise (an empty interval when c' = 0).  Consecutive members are
    ||q_k theta|| apart and move right for even k, left for odd k.
    """
    from .dim_core import _Block, optimal_split

    table, qk, qk1 = _block_bounds(table, k, cap)
    if split is None:
        split, _ = optimal_split(table, model, k, s)
    if not isinstance(split, int) or not (qk <= split <= qk1 - 1):
        raise DomainError(f"split {split} outside block [{qk}, {qk1 - 1}]")
    c, r = divmod(split, qk)
    phi_k = model.log_phi(qk)
    qn = table.qnorm(k)
    radii = {n: model.log_phi(n) for n in range(qk, qk1)}
    r_min = min(_frac_bounds(v)[0] for v in radii.values())
    fr, table = frame_for(table, qk1, _bits_for(r_min))
    phk_lo, phk_hi = _frac_bounds(phi_k)
    qn_form = fr.qnorm_form(table, k)
    orient = 1 if k % 2 == 0 else -1
    smp = gmpy2.mpfr(float(s), 64)
    notes = []

    longs: List[Optional[LongInterval]] = []
    covered = 0
    for i in range(qk):
        cp = c if i <= r else c - 1
        if cp <= 0:
            longs.append(None)
            continue
        n_first, n_last = qk + i, cp * qk + i
        left_n, right_n = (n_first, n_last) if orient > 0 else (n_last, n_first)
        lA, lb = fr.point(left_n)
        rA, rb = fr.point(right_n)
        l_lo, l_hi = fr.enclose(lA, lb)
        r_lo, r_hi = fr.enclose(rA, rb)
        left = _wrap_lo(l_lo - phk_hi, l_hi - phk_lo)
        right = _wrap_lo(r_lo + phk_lo, r_hi + phk_hi)
        length = phi_k.scale_int(2) if cp == 1 else qn.scale_int(cp - 1) + phi_k.scale_int(2)
        for t in range(1, cp + 1):
            n = t * qk + i
            if n > split:
                raise ContainmentFailure(f"k={k} i={i}: member n={n} beyond split {split}")
            # position of n relative to the left anchor, exactly
            steps = (t - 1) if orient > 0 else (cp - t)
            A, b = fr.point(n)
            dA = A - lA - steps * qn_form[0]
            db = b - lb - steps * qn_form[1]
            if db != 0 or dA % fr.q_m != 0:
                raise ContainmentFailure(
                    f"k={k} i={i} n={n}: orbit point is not {steps} steps of ||q_k theta|| "
                    "from the anchor")
            if not (0 <= steps <= cp - 1):
                raise ContainmentFailure(f"k={k} i={i} n={n}: member outside its interval")
            if not _phi_le(model, n, qk, radii):
                raise ContainmentFailure(f"k={k} n={n}: phi(n) > phi(q_k) not excluded")
            covered += 1
        longs.append(LongInterval(i, cp, left, right, length))

    if covered != split - qk + 1:
        raise ContainmentFailure(
            f"k={k}: long intervals hold {covered} balls, expected {split - qk + 1}")
    small = []
    for n in range(split + 1, qk1):
        A, b = fr.point(n)
        small.append(Arc(n, fr.enclose(A, b), radii[n]))

    # s-cost: (r+1) intervals with c - 1 steps, (q_k - r - 1) with c - 2 steps
    L1 = phi_k.scale_int(2) if c == 1 else qn.scale_int(c - 1) + phi_k.scale_int(2)
    long_cost = LogInterval.from_int(r + 1) * (L1 ** smp)
    if c >= 2 and qk - r - 1 > 0:
        L2 = phi_k.scale_int(2) if c == 2 else qn.scale_int(c - 2) + phi_k.scale_int(2)
        long_cost = long_cost + LogInterval.from_int(qk - r - 1) * (L2 ** smp)
    enumerated = LogInterval.sum([iv.length ** smp for iv in longs if iv is not None])
    if not enumerated.overlaps(long_cost):
        raise ContainmentFailure(f"k={k}: long-interval cost disagrees with its grouping")
    cost = long_cost
    if split + 1 <= qk1 - 1:
        tail = model.log_block_sum(split + 1, qk1 - 1, smp)
        cost = cost + LogInterval.from_int(2) ** smp * tail
    lc, tc, _ = _Block(table, model, k, float(s)).cost(split)
    bound = (lc + tc).scale_int(2)
    cost_ok = cost.certainly_le(bound)
    if not cost_ok:
        notes.append("s-cost not certified below 2 T_k(s)")
    return CoverPlan(k, float(s), split, c, r, qk, longs, small, cost, bound, True, cost_ok, notes)


def cover_rows(plan: CoverPlan) -> List[dict]:
    """CSV rows for the long intervals of a cover plan."""
    rows = []
    for i, iv in enumerate(plan.long_intervals):
        if iv is None:
            rows.append({"k": plan.k, "i": i, "members": 0, "left_lo": "", "left_hi": "",
                         "right_lo": "", "right_hi": "", "length": "0"})
            continue
        rows.append({
            "k": plan.k, "i": i, "members": iv.members,
            "left_lo": _fmt_down(iv.left[0]), "left_hi": _fmt_up(iv.left[1]),
            "right_lo": _fmt_down(iv.right[0]), "right_hi": _fmt_up(iv.right[1]),
            "length": repr(float(iv.length.value_mid())),
        })
    return rows


def gap_rows(res: GapResult) -> List[dict]:
    rows = []
    for n0, n1, dA, db, lo, hi in res.gaps:
        rows.append({"N": res.N, "n_left": n0, "n_right": n1,
                     "length_lo": _fmt_down(lo), "length_hi": _fmt_up(hi)})
    return rows


def _fmt_down(x: Fraction) -> str:
    f = float(x)
    if Fraction(f) > x:
        f = math.nextafter(f, -math.inf)
    return repr(f)


def _fmt_up(x: Fraction) -> str:
    f = float(x)
    if Fraction(f) < x:
        f = math.nextafter(f, math.inf)
    return repr(f)


# ---------------------------------------------------------------------------
# equidistribution
# ---------------------------------------------------------------------------

@dataclass
class EquidistResult:
    N: int
    a: Fraction
    b: Fraction
    count: int
    freq: float
    discrepancy: float
    C: float               # discrepancy * N / ln N


def equidistribution_check(table: ConvergentTable, N: int, a=0, b=Fraction(1, 2),
                           n_cap: int = EQUI_N_CAP) -> EquidistResult:
    """(1/N) #{1 <= n <= N : <n theta> in (a, b)} with exact membership."""
    a, b = Fraction(a), Fraction(b)
    if not (0 <= a < b <= 1):
        raise DomainError("subinterval must satisfy 0 <= a < b <= 1")
    if N < 1 or N > n_cap:
        raise DomainError(f"N={N} outside 1..{n_cap}")
    fr, table = frame_for(table, N, DEFAULT_BITS)
    qm = fr.q_m
    # |n e| < 1/(2 q_m): the rational part decides unless A is within 1/2
    # of a q_m or b q_m; those few indices are settled on enclosures.
    n = np.arange(1, N + 1, dtype=object if qm * N > 2**62 else np.int64)
    A = (n * fr.p_m) % qm
    aq, bq = a * qm, b * qm
    inside = (A > aq + Fraction(1, 2)) & (A < bq - Fraction(1, 2)) if qm * N > 2**62 else \
        (A > float(aq) + 0.5) & (A < float(bq) - 0.5)
    near = np.nonzero((np.abs(A - float(aq)) <= 1) | (np.abs(A - float(bq)) <= 1))[0] \
        if A.dtype != object else [j for j in range(N) if abs(A[j] - aq) <= 1 or abs(A[j] - bq) <= 1]
    count = int(np.count_nonzero(inside))
    for j in near:
        if inside[j]:
            count -= 1
        lo, hi = fr.enclose(int(A[j]), int(n[j]))
        if a < lo and hi < b:
            count += 1
        elif hi <= a or lo >= b:
            pass
        else:
            raise PrecisionUnreachable(f"membership of n={int(n[j])} undecided")
    freq = count / N
    disc = abs(freq - float(b - a))
    C = disc * N / math.log(N) if N > 1 else 0.0
    return EquidistResult(N, a, b, count, freq, disc, C)
