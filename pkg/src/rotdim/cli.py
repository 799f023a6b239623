"""Command line entry point: ``rotdim <command> --config CFG [--out DIR] ...``.

Exit codes: 0 ok, 2 configuration/domain error, 3 undecided, 4 precision or
overflow, 5 certificate failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .cf_engine import convergents, idx_lnf
from .config import RunConfig, load_config, parse_config
from .dim_core import _index_json, bounds_consistency, hausdorff_dimension, series_classifier
from .empirical_oracle import UNIT, box_dimension_estimate, finite_limsup_approx, hitting_check
from .errors import CertificateFailure, ConfigError, NoBracket, RotdimError
from .orbit_geometry import (
    build_cover,
    cover_rows,
    gap_rows,
    special_gap_check,
    three_distance_gaps,
)
from .reports import RunManifest

log = logging.getLogger("rotdim")

COMMANDS = ("cf", "dim", "bounds", "gaps", "cover", "boxdim", "hit")


def _s(x) -> str:
    return repr(float(x))


def _frac(x: Fraction) -> str:
    return str(x)


# ---------------------------------------------------------------------------
# overrides
# ---------------------------------------------------------------------------

def apply_overrides(cfg: RunConfig, command: str, mode=None, k=None, s=None) -> RunConfig:
    raw = cfg.echo()
    if mode is not None:
        raw["theta"]["mode"] = mode
    if k is not None:
        if command == "cf":
            raw["cf"]["K"] = k
        elif command in ("dim", "bounds"):
            raw["dim"]["K"] = k
            if raw["dim"]["mt_K"] is not None and raw["dim"]["mt_K"] < k:
                raw["dim"]["mt_K"] = k
        elif command == "gaps":
            raw["gaps"]["k"] = k
        elif command == "cover":
            raw["cover"]["k"] = k
            raw["cover"]["split"] = None
        elif command == "boxdim":
            raw["boxdim"]["K1"] = k
    if s is not None and command == "cover":
        raw["cover"]["s"] = s
    if mode is None and k is None and (s is None or command != "cover"):
        return cfg
    return parse_config(json.dumps(raw, indent=2), cfg.source + " (with overrides)")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _index_str(n) -> str:
    j = _index_json(n)
    if isinstance(j, str):
        return j
    return f"exp({j['ln_mid']})" + (f"+{j['offset']}" if j.get("offset") else "")


def cmd_cf(cfg: RunConfig, man: RunManifest, say, s=None) -> int:
    K = cfg.raw["cf"]["K"]
    table = cfg.table(K)
    rows = []
    for k in range(K + 1):
        r = table.row(k)
        qn = r.qnorm.to_json() if r.qnorm is not None else None
        q = r.q
        rows.append({
            "k": k,
            "a": "" if k == 0 else (str(r.a) if isinstance(r.a, int) else f"exp({r.a.mid()!r})"),
            "q": _index_str(q),
            "ln_q": repr(idx_lnf(q)) if q != 0 else "-inf",
            "exact": r.exact,
            "qnorm_lo": qn["lo"] if qn else "",
            "qnorm_hi": qn["hi"] if qn else "",
            "ln_qnorm_lo": qn["ln_lo"] if qn else "",
            "ln_qnorm_hi": qn["ln_hi"] if qn else "",
        })
    man.write_csv("cf.csv", rows)
    man.write_json("cf.json", {"config": cfg.echo(), "rows": rows})
    say(f"cf: {K + 1} rows, last ln q_K = {rows[-1]['ln_q']}")
    return 0


def _dim_outputs(report, man: RunManifest, table, model, cfg: RunConfig, s_extra=None):
    man.write_json("dim.json", report.to_json())
    man.write_csv("verdict_curve.csv", [
        {"s": _s(s), "verdict": v, "chi": _s(c)} for s, v, c in report.verdict_curve])
    dc = cfg.dim_config()
    pts = [report.s_star] + ([s_extra] if s_extra is not None else [])
    for i, s in enumerate(pts):
        v = series_classifier(table, model, s, report.K_used, dc)
        rows = []
        for bt in v.block_terms:
            j = bt.to_json()
            rows.append({"k": bt.k, "s": j["s"], "split": _index_str(bt.split),
                         "ln_total_lo": j["total"]["ln_lo"], "ln_total_hi": j["total"]["ln_hi"],
                         "ln_long_mid": repr(float(bt.long_cost.mid())) if not bt.long_cost.is_zero else "-inf",
                         "ln_tail_mid": repr(float(bt.tail_cost.mid())) if not bt.tail_cost.is_zero else "-inf",
                         "split_certified": bt.split_certified, "strategy": bt.strategy})
        man.write_csv("block_terms.csv" if i == 0 else "block_terms_at_s.csv", rows)


def cmd_dim(cfg: RunConfig, man: RunManifest, say, s=None, with_bounds=False) -> int:
    table = cfg.table()
    model = cfg.model(table)
    try:
        rep = hausdorff_dimension(table, model, cfg.dim_config(), config_echo=cfg.echo(),
                                  with_bounds=with_bounds)
    except NoBracket as exc:
        if exc.report is not None:
            body = exc.report.to_json()
            body["error"] = {"type": "NoBracket", "message": str(exc)}
            man.write_json("dim.json", body)
        raise
    _dim_outputs(rep, man, table, model, cfg, s)
    lo, hi = rep.s_enclosure
    say(f"dim: s* = {rep.s_star:.6f}  enclosure [{lo:.6f}, {hi:.6f}]  K = {rep.K_used}")
    return rep


def cmd_dim_entry(cfg, man, say, s=None) -> int:
    cmd_dim(cfg, man, say, s, with_bounds=False)
    return 0


def cmd_bounds(cfg: RunConfig, man: RunManifest, say, s=None) -> int:
    table = cfg.table()
    model = cfg.model(table)
    try:
        rep = hausdorff_dimension(table, model, cfg.dim_config(), config_echo=cfg.echo(),
                                  with_bounds=True)
    except NoBracket as exc:
        if exc.report is not None:
            body = exc.report.to_json()
            body["error"] = {"type": "NoBracket", "message": str(exc)}
            man.write_json("dim.json", body)
        raise
    b = rep.bounds
    ordering = bounds_consistency(rep)
    body = {
        "config": cfg.echo(),
        "s_star": {"mid": _s(rep.s_star), "lo": _s(rep.s_enclosure[0]), "hi": _s(rep.s_enclosure[1])},
        "u_phi": _s(b["u_phi"]),
        "l_phi": _s(b["l_phi"]),
        "w": _s(b["w"]),
        "xu": _s(b["xu"]),
        "liao_rams": _s(b["liao_rams"]),
        "mass_transference": {"mid": _s(b["mass_transference"]),
                              "lo": _s(rep.mt_enclosure[0]), "hi": _s(rep.mt_enclosure[1])},
        "fk_full_measure": rep.fk_full_measure,
        "ordering_ok": not ordering,
        "ordering_warnings": ordering,
        "warnings": ordering + [w for w in rep.warnings if w not in ordering],
    }
    man.write_json("bounds.json", body)
    _dim_outputs(rep, man, table, model, cfg)
    say("bounds: " + "  ".join(f"{k}={float(b[k]):.4f}" for k in
                               ("u_phi", "l_phi", "w", "xu", "liao_rams", "mass_transference"))
        + f"  fk={rep.fk_full_measure}  s*={rep.s_star:.4f}")
    if ordering:
        say("bounds: ordering warnings: " + "; ".join(ordering))
    return 0


def cmd_gaps(cfg: RunConfig, man: RunManifest, say, s=None) -> int:
    g = cfg.raw["gaps"]
    table = cfg.table(min(cfg.raw["theta"]["k_max"], max(cfg.raw["cf"]["K"], 2)))
    body = {"config": cfg.echo()}
    if g["k"] is not None:
        res = special_gap_check(table, g["k"], g["n_cap"])
        gr = res.gaps
        body["special"] = {
            "k": res.k, "N": res.N, "ok": res.ok, "degenerate": res.degenerate,
            "expected": {k: {"lo": _frac(v[0]), "hi": _frac(v[1]), "mid": _s((v[0] + v[1]) / 2)}
                         for k, v in res.expected.items()},
            "observed": res.observed,
        }
        ok = res.ok
    else:
        gr = three_distance_gaps(table, g["N"], g["precision_bits"], g["n_cap"], check=False)
        ok = gr.distinct_count <= 3
    body["N"] = gr.N
    body["distinct_count"] = gr.distinct_count
    body["exact_distinct"] = gr.exact_distinct
    body["precision_bits"] = gr.bits
    body["lengths"] = [{"mid": _s(c.mid()), "lo": _frac(c.lo), "hi": _frac(c.hi), "count": c.count}
                       for c in gr.clusters]
    body["total"] = {"lo": _frac(gr.total[0]), "hi": _frac(gr.total[1])}
    body["three_distance_ok"] = gr.distinct_count <= 3
    body["ok"] = ok
    man.write_csv("gaps.csv", gap_rows(gr))
    man.write_json("gaps.json", body)
    say(f"gaps: N = {gr.N}, {gr.distinct_count} distinct lengths "
        + ", ".join(f"{c.mid():.6g}" for c in gr.clusters) + ("" if ok else "  FAILED"))
    if not ok:
        raise CertificateFailure(f"gap check failed for N={gr.N}")
    return 0


def cmd_cover(cfg: RunConfig, man: RunManifest, say, s=None) -> int:
    c = cfg.raw["cover"]
    table = cfg.table(min(cfg.raw["theta"]["k_max"], max(cfg.raw["cf"]["K"], c["k"] + 2)))
    model = cfg.model(table)
    plan = build_cover(table, model, c["k"], c["s"], c["split"])
    man.write_csv("cover.csv", cover_rows(plan), ["k", "i", "members", "left_lo", "left_hi",
                                                   "right_lo", "right_hi", "length"])
    body = {
        "config": cfg.echo(),
        "k": plan.k, "s": _s(plan.s), "split": plan.split, "c": plan.c, "r": plan.r,
        "groups": plan.groups,
        "nonempty_groups": sum(1 for iv in plan.long_intervals if iv is not None),
        "small_balls": [a.n for a in plan.small_balls],
        "s_cost": plan.s_cost.to_json(),
        "bound_2Tk": plan.bound.to_json(),
        "containment": plan.containment,
        "certificate": plan.containment and plan.cost_ok,
        "notes": plan.notes,
    }
    man.write_json("cover.json", body)
    say(f"cover: k = {plan.k}, s = {plan.s}, split = {plan.split} (c = {plan.c}, r = {plan.r}), "
        f"s-cost {float(plan.s_cost.value_mid()):.6g} <= 2 T_k {float(plan.bound.value_mid()):.6g}: "
        f"{plan.cost_ok}")
    if not plan.cost_ok:
        raise CertificateFailure("cover s-cost not certified below 2 T_k(s)")
    return 0


def cmd_boxdim(cfg: RunConfig, man: RunManifest, say, s=None) -> int:
    b = cfg.raw["boxdim"]
    table = cfg.table(min(cfg.raw["theta"]["k_max"], max(cfg.raw["cf"]["K"], 2)))
    model = cfg.model(table)
    approx = finite_limsup_approx(table, model, b["K0"], b["K1"], b["depth"])
    curve = box_dimension_estimate(approx, b["j_min"], b["j_max"], b["layered"])
    man.write_csv("boxdim.csv", curve.rows())
    man.write_json("boxdim.json", {
        "config": cfg.echo(),
        "slope": _s(curve.slope),
        "window": list(curve.window),
        "auto_window": curve.auto_window,
        "scale_matched_layers": curve.layered,
        "counts_monotone": curve.monotone,
        "measure": _s(curve.measure),
        "intervals": approx.count,
        "starts": approx.starts,
        "construction": approx.log,
    })
    say(f"boxdim: slope = {curve.slope:.4f} over j in [{curve.window[0]}, {curve.window[1]}]")
    return 0


# intervals narrower than this many grid units are mostly outward padding
_MIN_TARGET_UNITS = 64


def _approx_targets(cfg: RunConfig, table, model, rng, count):
    """Midpoints of randomly chosen intervals of the boxdim truncation."""
    b = cfg.raw["boxdim"]
    approx = finite_limsup_approx(table, model, b["K0"], b["K1"], b["depth"])
    wide = [i for i in range(approx.count) if approx.hi[i] - approx.lo[i] >= _MIN_TARGET_UNITS]
    if not wide:
        return []
    picks = sorted(rng.choice(wide) for _ in range(count))
    return [Fraction(int(approx.lo[i]) + int(approx.hi[i]), 2 * UNIT) for i in picks]


def cmd_hit(cfg: RunConfig, man: RunManifest, say, s=None) -> int:
    h = cfg.raw["hit"]
    table = cfg.table(min(cfg.raw["theta"]["k_max"], max(cfg.raw["cf"]["K"], 2)))
    model = cfg.model(table)
    rng = random.Random(cfg.raw["seed"])
    if h["y"] is not None:
        ys = [Fraction(h["y"])]
    elif h["source"] == "approx":
        ys = _approx_targets(cfg, table, model, rng, h["samples"])
    else:
        ys = [Fraction(rng.getrandbits(53), 2**53) for _ in range(h["samples"])]
    # a point of the truncation lies in an arc with n >= q_(K0 + depth - 1)
    b = cfg.raw["boxdim"]
    t2 = convergents(cfg.rotation_spec(), min(cfg.raw["theta"]["k_max"], b["K0"] + b["depth"] + 1))
    n_tail = t2.q(b["K0"] + b["depth"] - 1)
    out = []
    for y in ys:
        hits = hitting_check(table, model, y, h["n_max"])
        out.append({"y": str(y), "y_float": _s(y), "hits": hits, "count": len(hits),
                    "tail_hit": any(n >= n_tail for n in hits)})
    man.write_json("hit.json", {"config": cfg.echo(), "n_max": h["n_max"], "source": h["source"],
                                "tail_index": n_tail, "samples": out})
    say(f"hit: {sum(1 for o in out if o['count'])}/{len(out)} targets hit within n <= {h['n_max']}, "
        f"{sum(1 for o in out if o['tail_hit'])} by some n >= {n_tail}")
    return 0


_DISPATCH = {
    "cf": cmd_cf,
    "dim": cmd_dim_entry,
    "bounds": cmd_bounds,
    "gaps": cmd_gaps,
    "cover": cmd_cover,
    "boxdim": cmd_boxdim,
    "hit": cmd_hit,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, suppress: bool) -> None:
    # on subcommands the defaults are suppressed so that flags given before
    # the command name are not reset
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p.add_argument("--config", help="config file, or the name of a shipped config", **kw)
    p.add_argument("--out", help="output directory (default: config 'output' or out/<name>)", **kw)
    p.add_argument("--mode", choices=("exact", "log"), help="override theta.mode", **kw)
    p.add_argument("--k", type=int, help="block index / row count override for the command", **kw)
    p.add_argument("--s", type=float, help="exponent for cover, or an extra evaluation point for dim", **kw)
    p.add_argument("--quiet", action="store_true", help="no summary on stdout", **kw)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rotdim",
                                description="Dimension of shrinking-target sets of rotations")
    _add_common(p, False)
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "cf": "partial quotients, convergents and ||q_k theta||",
        "dim": "critical exponent s* of the block-term series",
        "bounds": "comparison bounds (u, l, w, xu, lr, mass transference, full measure)",
        "gaps": "three-distance gaps for N points or N = q_(k+1)",
        "cover": "long-interval cover of one block with its s-cost certificate",
        "boxdim": "box-counting slope of a finite truncation",
        "hit": "shrinking-target hits for sampled targets",
    }
    for name in COMMANDS:
        _add_common(sub.add_parser(name, help=helps[name]), True)
    return p


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    def say(msg):
        if not args.quiet:
            print(msg)

    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return 2
    man = None
    code = 0
    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, args.command, args.mode, args.k, args.s)
        out = Path(args.out or cfg.raw["output"] or Path("out") / cfg.name)
        man = RunManifest(args.command, cfg.sha256(), out)
        _DISPATCH[args.command](cfg, man, say, args.s)
    except RotdimError as exc:
        code = exc.exit_code
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
    finally:
        if man is not None:
            man.close(code)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
