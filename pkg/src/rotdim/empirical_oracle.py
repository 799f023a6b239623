"""Box-counting cross-check on finite truncations of the limsup set.

Nothing here calls the block-term formula: the truncation is built from the
arcs B(n theta, phi(n)) themselves, stored as integer intervals on a fixed
grid of 2^-FRAC_BITS with outward rounding, and then box-counted.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .cf_engine import ConvergentTable
from .errors import (
    BlockTooLong,
    DegenerateFit,
    DomainError,
    EmptyBlock,
    ModelValidationError,
    PrecisionUnreachable,
)
from .orbit_geometry import MAX_BITS, _F, frame_for, _table_with
from .phi_models import PowerLaw, LogPower, _StepModel

log = logging.getLogger(__name__)

FRAC_BITS = 40
UNIT = 1 << FRAC_BITS
MAX_J = 30
APPROX_CAP = 2 * 10**6          # total arcs over all blocks
HIT_N_CAP = 10**6
_REL_SLACK = 1e-9               # relative widening of float radii


# ---------------------------------------------------------------------------
# interval unions on the 2^-40 grid
# ---------------------------------------------------------------------------

def _merge(lo: np.ndarray, hi: np.ndarray):
    """Canonical union of half-open integer intervals [lo, hi) (sorted, disjoint)."""
    if len(lo) == 0:
        return lo.astype(np.int64), hi.astype(np.int64)
    order = np.lexsort((hi, lo))
    lo, hi = lo[order], hi[order]
    run = np.maximum.accumulate(hi)
    start = np.ones(len(lo), dtype=bool)
    start[1:] = lo[1:] > run[:-1]  # touching intervals merge
    idx = np.nonzero(start)[0]
    ends = np.append(idx[1:] - 1, len(lo) - 1)
    return lo[idx].copy(), run[ends].copy()


def _intersect(a, b):
    """Intersection of two canonical unions."""
    alo, ahi = a
    blo, bhi = b
    out_lo, out_hi = [], []
    i = j = 0
    while i < len(alo) and j < len(blo):
        lo = max(alo[i], blo[j])
        hi = min(ahi[i], bhi[j])
        if lo < hi:
            out_lo.append(lo)
            out_hi.append(hi)
        if ahi[i] < bhi[j]:
            i += 1
        else:
            j += 1
    return np.array(out_lo, dtype=np.int64), np.array(out_hi, dtype=np.int64)


def _radii_units(model, n0: int, n1: int) -> np.ndarray:
    """Upper bounds on phi(n) * UNIT for n0 <= n < n1, rounded up."""
    n = np.arange(n0, n1, dtype=np.float64)
    if isinstance(model, (PowerLaw, LogPower)):
        r = np.exp(model.ln_phi_float(np.log(n)))
    elif isinstance(model, _StepModel):
        r = np.empty(n1 - n0)
        for lo, hi, v in model.pieces(n0, n1 - 1):
            r[int(lo) - n0:int(hi) - n0 + 1] = float(v.value_bounds()[1])
    else:
        r = np.array([float(model.log_phi(int(m)).value_bounds()[1]) for m in range(n0, n1)])
    return np.ceil(r * (1 + _REL_SLACK) * UNIT).astype(np.int64) + 1


def _block_arcs(table, model, k: int, bits: int):
    """Integer intervals covering the arcs of E_k and their diameters in grid
    units.  Arcs crossing 0 are split in two (both halves keep the diameter)."""
    table = _table_with(table, k + 1)
    qk, qk1 = int(table.q(k)), int(table.q(k + 1))
    if qk1 <= qk:
        raise EmptyBlock(f"block {k} is empty")
    qk = max(qk, model.domain_min)
    fr, table = frame_for(table, qk1, bits)
    A = [(n * fr.p_m) % fr.q_m for n in range(qk, qk1)]
    # floor(A * UNIT / q_m); the orbit error n|e| < 2^-bits is below one unit
    c = np.array([(a << FRAC_BITS) // fr.q_m for a in A], dtype=np.int64)
    rad = _radii_units(model, qk, qk1)
    if (rad * 2 >= UNIT).any():
        return (np.array([0], dtype=np.int64), np.array([UNIT], dtype=np.int64),
                np.array([UNIT], dtype=np.int64))
    lo = c - rad - 1
    hi = c + rad + 2
    diam = hi - lo
    inner = (lo >= 0) & (hi <= UNIT)
    left = lo < 0
    right = hi > UNIT
    los = [lo[inner], lo[left] + UNIT, np.zeros(left.sum(), dtype=np.int64),
           lo[right], np.zeros(right.sum(), dtype=np.int64)]
    his = [hi[inner], np.full(left.sum(), UNIT, dtype=np.int64), hi[left],
           np.full(right.sum(), UNIT, dtype=np.int64), hi[right] - UNIT]
    ds = [diam[inner], diam[left], diam[left], diam[right], diam[right]]
    return np.concatenate(los), np.concatenate(his), np.concatenate(ds)


def _layer_of(diam_units: np.ndarray) -> np.ndarray:
    """Dyadic layer j with 2^-(j+1) < diameter <= 2^-j."""
    return FRAC_BITS - np.ceil(np.log2(diam_units.astype(np.float64))).astype(np.int64)


@dataclass
class FiniteApprox:
    K0: int
    K1: int
    starts: List[int]
    lo: np.ndarray
    hi: np.ndarray
    r_max: float
    r_min: float
    layers: Dict[int, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    log: List[str] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.lo)

    def measure(self) -> float:
        return float(np.sum(self.hi - self.lo)) / UNIT

    @classmethod
    def from_intervals(cls, intervals: Sequence[Tuple[float, float]]):
        """Union of explicit [a, b] intervals inside [0, 1) (for calibration)."""
        lo = np.array([math.floor(a * UNIT) for a, _ in intervals], dtype=np.int64)
        hi = np.array([min(UNIT, math.ceil(b * UNIT)) for _, b in intervals], dtype=np.int64)
        lo, hi = _merge(lo, hi)
        w = [b - a for a, b in intervals]
        return cls(0, 0, [], lo, hi, max(w) / 2, min(w) / 2, {}, ["explicit intervals"])


def finite_limsup_approx(table: ConvergentTable, model, K0: int, K1: int, depth: int = 3,
                         cap: int = APPROX_CAP) -> FiniteApprox:
    """Intersection over the starts K = K0, ..., K0 + depth - 1 of the tail
    unions E_K u ... u E_K1, merged canonically.

    The arcs that survive are also filed by dyadic diameter layer; box
    counting at scale 2^-j uses layer j (see box_counts).
    """
    if K1 < K0:
        raise DomainError("K1 must be at least K0")
    starts = list(range(K0, min(K0 + max(depth, 1), K1 + 1)))
    table = _table_with(table, K1 + 1)
    q0 = int(table.q(K0))
    total = int(table.q(K1 + 1)) - q0
    if total > cap:
        raise BlockTooLong(f"blocks {K0}..{K1} hold {total} arcs, cap {cap}")
    if float(model.log_phi(max(q0, model.domain_min)).value_bounds()[0]) >= 0.5:
        raise ModelValidationError("phi(q_K0) >= 1/2: every arc covers the circle")
    msgs = []
    per_block = {}
    r_max, r_min = 0.0, math.inf
    for k in range(K0, K1 + 1):
        qk, qk1 = int(table.q(k)), int(table.q(k + 1))
        if qk1 <= qk:
            msgs.append(f"block {k}: empty")
            continue
        per_block[k] = _block_arcs(table, model, k, FRAC_BITS + 8)
    if not per_block:
        raise EmptyBlock(f"blocks {K0}..{K1} are all empty")
    result = None
    for K in starts:
        parts = [per_block[k] for k in per_block if k >= K]
        if not parts:
            continue
        u = _merge(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))
        msgs.append(f"tail from {K}: {len(u[0])} intervals, measure {np.sum(u[1] - u[0]) / UNIT:.6g}")
        result = u if result is None else _intersect(result, u)
    # arcs of the last tail lie inside every earlier tail, so they all survive
    kept = [per_block[k] for k in per_block if k >= starts[-1]]
    for k in per_block:
        if k >= starts[-1]:
            qk = max(int(table.q(k)), model.domain_min)
            r_max = max(r_max, float(model.log_phi(qk).value_mid()))
            r_min = min(r_min, float(model.log_phi(int(table.q(k + 1)) - 1).value_mid()))
    lo = np.concatenate([p[0] for p in kept])
    hi = np.concatenate([p[1] for p in kept])
    lay = _layer_of(np.concatenate([p[2] for p in kept]))
    layers = {}
    for j in np.unique(lay):
        sel = lay == j
        layers[int(j)] = _merge(lo[sel], hi[sel])
    msgs.append(f"intersection: {len(result[0])} intervals; layers {min(layers)}..{max(layers)}")
    return FiniteApprox(K0, K1, starts, result[0], result[1], r_max, r_min, layers, msgs)


# ---------------------------------------------------------------------------
# box counting
# ---------------------------------------------------------------------------

@dataclass
class BoxCountCurve:
    scales: List[float]
    js: List[int]
    counts: List[int]
    slope: float
    window: Tuple[int, int]
    auto_window: bool
    measure: float
    layered: bool
    monotone: bool = True

    def rows(self) -> List[dict]:
        return [{"j": j, "scale": repr(s), "count": c} for j, s, c in zip(self.js, self.scales, self.counts)]


def _count_boxes(lo: np.ndarray, hi: np.ndarray, j: int) -> int:
    if len(lo) == 0:
        return 0
    sh = FRAC_BITS - j
    first = lo >> sh
    last = (hi - 1) >> sh
    n = int(np.sum(last - first + 1))
    if len(first) > 1:
        n -= int(np.count_nonzero(first[1:] == last[:-1]))
    return n


def box_counts(approx: FiniteApprox, js: Sequence[int], layered: Optional[bool] = None) -> List[int]:
    """Dyadic boxes of side 2^-j met by the approximation.

    With layers (the default when present) scale 2^-j counts the boxes met by
    the arcs of diameter in (2^-(j+1), 2^-j]: the part of the truncation that
    is resolved at that scale.  Without layers the whole union is counted.
    """
    if layered is None:
        layered = bool(approx.layers)
    out = []
    for j in js:
        if not (0 <= j <= MAX_J):
            raise DomainError(f"scale index j={j} outside 0..{MAX_J}")
        if layered:
            lo, hi = approx.layers.get(j, (np.zeros(0, np.int64), np.zeros(0, np.int64)))
        else:
            lo, hi = approx.lo, approx.hi
        out.append(_count_boxes(lo, hi, j))
    return out


def auto_window(approx: FiniteApprox, layered: Optional[bool] = None) -> Tuple[int, int]:
    """Scales strictly between the largest and the smallest arc diameter
    (the two end layers are only partly filled and are dropped)."""
    if layered is None:
        layered = bool(approx.layers)
    if layered and approx.layers:
        full = sorted(approx.layers)
        return max(1, full[0] + 1), min(MAX_J, full[-1] - 1)
    j_min = max(1, math.ceil(-math.log2(2 * approx.r_max)))
    j_max = min(MAX_J, math.floor(-math.log2(2 * approx.r_min)))
    return j_min, j_max


def _ls_slope(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm = x.mean()
    return float(np.sum((x - xm) * (y - y.mean())) / np.sum((x - xm) ** 2))


def box_dimension_estimate(approx: FiniteApprox, j_min: Optional[int] = None,
                           j_max: Optional[int] = None, layered: Optional[bool] = None) -> BoxCountCurve:
    """Least-squares slope of ln N(2^-j) against j ln 2.

    ``layered=False`` counts the whole union at every scale; that is the only
    option when the radii jump over many dyadic layers at once.
    """
    if layered is None:
        layered = bool(approx.layers)
    auto = j_min is None or j_max is None
    if auto:
        a, b = auto_window(approx, layered)
        j_min = a if j_min is None else j_min
        j_max = b if j_max is None else j_max
    if j_max > MAX_J:
        raise DomainError(f"j_max={j_max} above {MAX_J}")
    js = list(range(j_min, j_max + 1))
    if len(js) < 3:
        raise DegenerateFit(f"window [{j_min}, {j_max}] has fewer than 3 scales")
    counts = box_counts(approx, js, layered)
    if auto and layered:
        # the coarsest layers of a truncation hold few arcs; start the fit
        # where the counts have become non-decreasing
        start = len(counts) - 1
        while start > 0 and counts[start - 1] <= counts[start]:
            start -= 1
        if len(js) - start >= 3:
            js, counts = js[start:], counts[start:]
            j_min = js[0]
    if min(counts) == 0:
        raise DegenerateFit(f"empty scale in window [{j_min}, {j_max}]")
    monotone = all(a <= b for a, b in zip(counts, counts[1:]))
    slope = _ls_slope([j * math.log(2) for j in js], [math.log(c) for c in counts])
    return BoxCountCurve([2.0 ** -j for j in js], js, counts, slope, (j_min, j_max), auto,
                         approx.measure(), layered, monotone)


# ---------------------------------------------------------------------------
# hitting spot-check
# ---------------------------------------------------------------------------

_RESIDUES: Dict[tuple, tuple] = {}


def _residues(fr, n0: int, n1: int):
    """n p_m mod q_m for n0 <= n <= n1, exact and scaled to 53 bits."""
    key = (fr.q_m, fr.p_m, n0, n1)
    if key not in _RESIDUES:
        if len(_RESIDUES) > 8:
            _RESIDUES.clear()
        A = [(n * fr.p_m) % fr.q_m for n in range(n0, n1 + 1)]
        A53 = np.array([(a << 53) // fr.q_m for a in A], dtype=np.int64)
        _RESIDUES[key] = (A, A53)
    return _RESIDUES[key]


@dataclass(frozen=True)
class OrbitPoint:
    """The target y = <m theta>, kept symbolic so its distance to itself is 0."""
    m: int


def hitting_check(table: ConvergentTable, model, y: Union[Fraction, float, OrbitPoint],
                  n_max: int, bits: int = 64) -> List[int]:
    """All n <= n_max with certified ||n theta - y|| < phi(n)."""
    if n_max < 1 or n_max > HIT_N_CAP:
        raise DomainError(f"n_max={n_max} outside 1..{HIT_N_CAP}")
    while True:
        n_top = max(n_max, y.m) if isinstance(y, OrbitPoint) else n_max
        fr, table = frame_for(table, n_top, bits)
        qm = fr.q_m
        n0 = max(1, model.domain_min)
        ns = np.arange(n0, n_max + 1)
        A, A53 = _residues(fr, n0, n_max)
        if isinstance(y, OrbitPoint):
            yA, yb = (y.m * fr.p_m) % qm, y.m
        else:
            yA, yb = _F(Fraction(y)) * qm, 0
        # coarse float filter with generous slack, exact decision afterwards
        y53 = int(Fraction(yA) * 2**53 / qm) % 2**53
        d = ((A53 - y53) % 2**53).astype(np.float64) / 2.0**53
        d = np.minimum(d, 1 - d)
        rad = _radii_units(model, int(ns[0]), n_max + 1).astype(np.float64) / UNIT
        cand = np.nonzero(d <= rad + 2.0**-50)[0]
        hits = []
        undecided = False
        for j in cand:
            n = int(ns[j])
            dA = (Fraction(A[j]) - yA) % qm
            lo, hi = fr.enclose(0, n - yb)
            lo, hi = lo + dA / qm, hi + dA / qm
            # distance to the nearest integer, as an interval
            f = math.floor(lo)
            lo, hi = lo - f, hi - f
            if hi <= Fraction(1, 2):
                dlo, dhi = lo, hi
            elif lo >= Fraction(1, 2):
                dlo, dhi = 1 - hi, 1 - lo
            else:
                dlo, dhi = min(lo, 1 - hi), Fraction(1, 2)
            if hi > 1:
                dlo = Fraction(0)
            plo, phi_hi = model.log_phi(n).value_bounds()
            plo = _F(Fraction(*[int(v) for v in plo.as_integer_ratio()]))
            if dhi < plo:
                hits.append(n)
            elif dlo < Fraction(*[int(v) for v in phi_hi.as_integer_ratio()]):
                undecided = True
        if not undecided:
            return hits
        bits *= 2
        if bits > MAX_BITS:
            raise PrecisionUnreachable("hit membership undecided at maximum precision")
