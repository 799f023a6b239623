"""Acceptance criteria 1-10; each test records one PASS/FAIL line that is
printed in the terminal summary."""

import random
import time
from fractions import Fraction

import gmpy2
import mpmath as mp
import pytest

import oracle_values as ov
import rotdim.cli as cli
from conftest import record
from helpers import DPS, encloses
from rotdim.cf_engine import ConstantPQ, PeriodicPQ, PowerOfQ, RotationSpec, convergents, qnorm
from rotdim.config import load_config, shipped_configs
from rotdim.dim_core import (
    BRUTE_FORCE, FULL, NOT_FULL, SECTION_SEARCH, DimConfig, bounds_consistency,
    fuchs_kim_full_measure, hausdorff_dimension, optimal_split,
)
from rotdim.empirical_oracle import FiniteApprox, box_dimension_estimate, finite_limsup_approx
from rotdim.errors import BlockTooLong
from rotdim.interval import LogInterval
from rotdim.orbit_geometry import build_cover, special_gap_check, three_distance_gaps, three_distance_sweep
from rotdim.phi_models import BlockConstant, PowerLaw

GAMMAS = [Fraction(3, 2), Fraction(2), Fraction(3)]


def _tables():
    return {
        "golden": convergents(RotationSpec(ConstantPQ(1), 60), 40),
        "silver": convergents(RotationSpec(PeriodicPQ([2]), 60), 30),
        "alt12": convergents(RotationSpec(PeriodicPQ([1, 2]), 60), 30),
    }


def _check(n, ok, detail):
    record(n, ok, detail)
    assert ok, detail


# -- 1 ----------------------------------------------------------------------------

def test_criterion_1_power_law():
    worst_err, worst_t = 0.0, 0.0
    for g in GAMMAS:
        t0 = time.perf_counter()
        table = convergents(RotationSpec(ConstantPQ(1), 60), 40)
        r = hausdorff_dimension(table, PowerLaw(1, g), DimConfig(K=40), with_bounds=False)
        dt = time.perf_counter() - t0
        worst_err = max(worst_err, abs(r.s_star - 1 / float(g)))
        worst_t = max(worst_t, dt)
    _check(1, worst_err <= 0.01 and worst_t < 10,
           f"golden n^-gamma, K=40: max |s* - 1/gamma| = {worst_err:.4f}, max time {worst_t:.2f} s")


# -- 2, 3 -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def example():
    table = convergents(RotationSpec(PowerOfQ(Fraction(2)), 14), 12)
    model = BlockConstant("q[k]^2", "1/(2*q[k]^3)", table)
    rep = hausdorff_dimension(table, model, DimConfig(K=12, mt_K=12))
    return table, model, rep


def test_criterion_2_example(example):
    table, model, rep = example
    mt = rep.bounds["mass_transference"]
    splits = [optimal_split(table, model, k, 0.5)[0] for k in (1, 2, 3)]
    ok_split = splits == [table.q(k) ** 2 for k in (1, 2, 3)] and table.row(3).exact
    ok = abs(rep.s_star - 0.5) <= 0.01 and abs(mt - 1 / 3) <= 0.01 and ok_split
    _check(2, ok, f"s* = {rep.s_star:.5f}, MT = {mt:.5f}, splits k=1..3 = {splits} (q_k^2)")


def test_criterion_3_example_bounds(example):
    table, model, rep = example
    b = rep.bounds
    targets = {"u_phi": (2 / 3, 0.02), "l_phi": (2 / 9, 0.02), "w": (3.0, 0.05),
               "liao_rams": (5 / 12, 0.02), "xu": (1 / 3, 0.02)}
    errs = {k: abs(float(b[k]) - v) for k, (v, _) in targets.items()}
    ok_vals = all(errs[k] <= tol for k, (_, tol) in targets.items())
    viol = bounds_consistency(rep)
    chain = [b["mass_transference"], b["xu"], b["liao_rams"], rep.s_star, b["u_phi"]]
    _check(3, ok_vals and not viol,
           "u, l, w, LR, Xu = " + ", ".join(f"{float(b[k]):.4f}" for k in targets)
           + f"; chain MT..u = {[round(float(x), 4) for x in chain]}, ordering violations: {len(viol)}")


# -- 4 ----------------------------------------------------------------------------

def test_criterion_4_three_distance():
    tabs = _tables()
    rng = random.Random(4)
    notes = []
    ok = True
    for name in ("golden", "silver"):
        t = tabs[name]
        counts = three_distance_sweep(t, 10**4)
        ok &= max(counts) <= 3
        # certified enclosures and gap sums on sampled N, plus every q_k
        qs = [int(t.q(k)) for k in range(1, 30) if t.q(k) <= 10**4]
        sample = sorted(set(rng.sample(range(1, 10**4 + 1), 60) + qs + [10**4]))
        for N in sample:
            g = three_distance_gaps(t, N)
            lo, hi = g.total
            ok &= g.distinct_count <= 3 and g.distinct_count == counts[N - 1] and lo <= 1 <= hi
        nk = 0
        for k in range(30):
            if t.q(k + 1) > 10**4:
                break
            r = special_gap_check(t, k)
            ok &= r.ok
            nk += 1
        notes.append(f"{name}: max {max(counts)} gaps for N <= 10^4, {len(sample)} certified sums, "
                     f"{nk} special N = q_(k+1)")
    _check(4, bool(ok), "; ".join(notes))


# -- 5 ----------------------------------------------------------------------------

def test_criterion_5_cover(example):
    tabs = _tables()
    runs, skipped, bad = 0, 0, []
    cases = [(n, t, PowerLaw(1, g)) for n, t in tabs.items() for g in GAMMAS]
    cases.append(("example", example[0], example[1]))
    for name, t, M in cases:
        for k in range(9):
            if t.q(k + 1) <= t.q(k):
                continue
            for s in (0.4, 0.6, 0.9):
                try:
                    p = build_cover(t, M, k, s)
                except BlockTooLong:
                    skipped += 1
                    continue
                runs += 1
                if not (p.containment and p.cost_ok):
                    bad.append((name, k, s))
    _check(5, not bad and runs > 0,
           f"{runs} covers certified, {skipped} skipped as non-enumerable, failures {bad}")


# -- 6 ----------------------------------------------------------------------------

def test_criterion_6_split_oracle():
    tabs = _tables()
    blocks, bad = 0, []
    for name, t in tabs.items():
        for g in GAMMAS:
            M = PowerLaw(1, g)
            for s in (0.3, 0.5, 0.8):
                for k in range(60):
                    if not t.has_row(k + 1):
                        break
                    L = t.q(k + 1) - t.q(k)
                    if L > 10**5:
                        break
                    if L <= 0:
                        continue
                    a = optimal_split(t, M, k, s, BRUTE_FORCE)[0]
                    b = optimal_split(t, M, k, s, SECTION_SEARCH)[0]
                    blocks += 1
                    if a != b:
                        bad.append((name, g, s, k, a, b))
    _check(6, not bad, f"{blocks} blocks of length <= 10^5, mismatches {bad[:3]}")


# -- 7 ----------------------------------------------------------------------------

def test_criterion_7_boxdim():
    cfg = load_config("golden-gamma2")
    b = cfg.raw["boxdim"]
    t0 = time.perf_counter()
    table = cfg.table(max(cfg.raw["cf"]["K"], 2))
    approx = finite_limsup_approx(table, cfg.model(table), b["K0"], b["K1"], b["depth"])
    curve = box_dimension_estimate(approx)
    dt = time.perf_counter() - t0
    iv = box_dimension_estimate(FiniteApprox.from_intervals([(0.0, 0.5)]), 1, 20).slope
    pt = box_dimension_estimate(FiniteApprox.from_intervals([(0.3, 0.3 + 2.0 ** -30)]), 1, 20).slope
    ok = curve.auto_window and abs(curve.slope - 0.5) <= 0.1 and dt < 60
    ok &= abs(iv - 1) <= 0.02 and abs(pt) <= 0.05
    _check(7, ok, f"golden gamma=2 slope {curve.slope:.4f} on j in {list(curve.window)} in {dt:.1f} s; "
                  f"calibration interval {iv:.4f}, point {pt:.4f}")


# -- 8 ----------------------------------------------------------------------------

def test_criterion_8_full_measure():
    t = _tables()["golden"]
    a = fuchs_kim_full_measure(t, PowerLaw(Fraction(1, 4), 1), 40)[0]
    b = fuchs_kim_full_measure(t, PowerLaw(1, 2), 40)[0]
    _check(8, a == FULL and b == NOT_FULL, f"1/(4n) -> {a}, n^-2 -> {b}")


# -- 9 ----------------------------------------------------------------------------

def _rat(rng):
    return Fraction(rng.randint(1, 10**6), rng.randint(1, 10**6))


def _mpq(x: Fraction):
    return mp.mpf(x.numerator) / x.denominator


def _composite_case(rng, i):
    """One randomized expression: (LogInterval result, mpmath reference)."""
    x, y, z, w = (_rat(rng) for _ in range(4))
    s = rng.randint(1, 3000) / 1024
    L = LogInterval.from_rational
    kind = i % 6
    if kind == 0:
        return (L(x) * L(y)) ** s + L(z), (_mpq(x) * _mpq(y)) ** s + _mpq(z)
    if kind == 1:
        return (L(x) + L(y)).sub(L(x)), _mpq(y)
    if kind == 2:
        return LogInterval.sum([L(x) ** s, L(y) ** s, L(z) ** s]) / L(w), \
            (_mpq(x) ** s + _mpq(y) ** s + _mpq(z) ** s) / _mpq(w)
    if kind == 3:
        n = rng.randint(1, 10**9)
        return L(x).scale_int(n).inv() ** s, (n * _mpq(x)) ** -s
    if kind == 4:
        u = Fraction(rng.randint(1, 10**4), rng.randint(1, 10**3))
        lo, hi = L(u).value_bounds()
        return LogInterval.expm1_of(lo, hi) * L(w), mp.expm1(_mpq(u)) * _mpq(w)
    s2 = s + rng.randint(0, 512) / 1024
    pick = s if rng.random() < 0.5 else s2
    return L(x).pow_interval(gmpy2.mpfr(s), gmpy2.mpfr(s2)) * L(y), _mpq(x) ** pick * _mpq(y)


def test_criterion_9_numeric_soundness():
    rng = random.Random(9)
    bad = []
    with mp.workdps(DPS):
        for i in range(1000):
            iv, ref = _composite_case(rng, i)
            if not encloses(iv, ref):
                bad.append(i)
    qbad = []
    rules = {"golden": (ConstantPQ(1), ov.GOLDEN_QNORM), "sqrt2": (ConstantPQ(2), ov.SQRT2_QNORM),
             "[1,2,3]": (PeriodicPQ([1, 2, 3]), ov.PERIODIC_123_QNORM)}
    for name, (rule, ref) in rules.items():
        t = convergents(RotationSpec(rule, 60), 14)
        for k in range(13):
            if not (encloses(qnorm(t, k, 0), ref[k]) and encloses(t.qnorm(k), ref[k])):
                qbad.append((name, k))
    _check(9, not bad and not qbad,
           f"1000 composite cases, {len(bad)} misses; qnorm k <= 12 on 3 rotations, misses {qbad}")


# -- 10 ---------------------------------------------------------------------------

def test_criterion_10_determinism(tmp_path):
    diffs, files = [], 0
    for name in shipped_configs():
        for cmd in cli.COMMANDS:
            outs = []
            for rep in ("a", "b"):
                d = tmp_path / rep / name / cmd
                code = cli.main([cmd, "--config", name, "--out", str(d), "--quiet"])
                outs.append((code, d))
            (c1, d1), (c2, d2) = outs
            names = sorted(p.name for p in d1.iterdir() if p.name != "manifest.json")
            if c1 != c2 or names != sorted(p.name for p in d2.iterdir() if p.name != "manifest.json"):
                diffs.append((name, cmd, "layout"))
                continue
            for n in names:
                files += 1
                if (d1 / n).read_bytes() != (d2 / n).read_bytes():
                    diffs.append((name, cmd, n))
    _check(10, not diffs and files > 0,
           f"{len(shipped_configs())} configs x {len(cli.COMMANDS)} commands, {files} data files, "
           f"differences {diffs}")
