"""Command-line front end.

Subcommands: oracle, wavefunction, onepoint, freefermion, series,
conjecture, verify, plot.  Configuration comes from a flat key=value file
plus command-line overrides; results are written as JSON (with per-entry
error estimates), CSV, and an SVG chart, keyed by a content-hash run id and
cached for byte-identical replay.

Exit codes: 0 success, 2 verification failure, 3 convergence failure,
4 invalid configuration.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, InvalidConfigError, VerificationError, XXZDWError
from .model import ModelParams
from .oracle import domain_wall_state, marginal_mth_particle
from .quadrature import WorkerPool
from . import asymptotics, bethe, freefermion, identities, onepoint, runio
from .summation import csum

DEFAULTS = {
    "delta": 0.5,
    "t": 0.5,
    "n_particles": 1,
    "y": "step",
    "x_min": -6,
    "x_max": 4,
    "method": "contour-cdf",
    "grid_m": 0,          # 0 = automatic
    "rtol": 1e-9,
    "workers": 1,
    "cache_dir": "",
    "seed": 20240,
    "m_index": 1,
    "s_values": "0.0",
    "deep": 0,
}

_INT_KEYS = {"n_particles", "x_min", "x_max", "grid_m", "workers", "seed", "m_index", "deep"}
_FLOAT_KEYS = {"delta", "t", "rtol"}


def load_config(path: str | None) -> dict:
    cfg = dict(DEFAULTS)
    if path:
        for raw in Path(path).read_text().splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfigError(f"malformed config line: {raw!r}")
            k, v = (s.strip() for s in line.split("=", 1))
            if k not in cfg:
                raise InvalidConfigError(f"unknown config key: {k}")
            cfg[k] = v
    return cfg


def resolve_config(cfg: dict) -> dict:
    out = dict(cfg)
    for k in _INT_KEYS:
        out[k] = int(out[k])
    for k in _FLOAT_KEYS:
        out[k] = float(out[k])
    return out


def params_from_config(cfg: dict) -> ModelParams:
    if str(cfg["y"]).strip() == "step":
        return ModelParams.step(cfg["delta"], cfg["t"], cfg["n_particles"])
    y = tuple(int(s) for s in str(cfg["y"]).split(",") if s.strip())
    return ModelParams(cfg["delta"], cfg["t"], y)


def _pyfloat(v):
    return float(np.real(v)) if np.iscomplexobj(v) else float(v)


# ---------------------------------------------------------------------------
# subcommand implementations: each returns (method, entries, extra)
# ---------------------------------------------------------------------------

def run_oracle(cfg, pool):
    p = params_from_config(cfg)
    psi, basis = domain_wall_state(p)
    xs, probs = marginal_mth_particle(psi, basis, cfg["m_index"])
    sel = (xs >= cfg["x_min"]) & (xs <= cfg["x_max"])
    entries = [(int(x), float(v), 1e-10) for x, v in zip(xs[sel], probs[sel])]
    return "ed", entries, {"norm": float(np.linalg.norm(psi)), "m_index": cfg["m_index"]}


def run_wavefunction(cfg, pool):
    p = params_from_config(cfg)
    from .model import window_padding
    pad = window_padding(p.t)
    sites = np.arange(p.y[0] - pad, p.y[-1] + pad + 1)
    table = bethe.amplitude_table_split(p, sites, cfg["grid_m"] or None)
    n = p.n
    idx = np.indices(table.shape)
    mask = np.ones(table.shape, dtype=bool)
    for a in range(n - 1):
        mask &= idx[a] < idx[a + 1]
    prob = np.where(mask, np.abs(table) ** 2, 0.0)
    entries = []
    extra = {}
    for x in range(cfg["x_min"], cfg["x_max"] + 1):
        here = prob[(sites[idx[0]] == x) & mask]
        entries.append((x, float(here.sum()), 1e-10))
    if n == 1:
        sel = (sites >= cfg["x_min"]) & (sites <= cfg["x_max"])
        extra["amplitude_re"] = [float(v.real) for v in table[sel]]
        extra["amplitude_im"] = [float(v.imag) for v in table[sel]]
    extra["unitarity"] = float(prob.sum())
    return "bethe-sum", entries, extra


def run_onepoint(cfg, pool):
    p = params_from_config(cfg)
    table = onepoint.distribution_table(p, cfg["x_min"], cfg["x_max"], cfg["method"], pool)
    entries = [(int(x), float(v), float(e)) for x, v, e in table.entries]
    return table.method, entries, {}


def run_freefermion(cfg, pool):
    p = params_from_config(cfg)
    mode = cfg["method"] if cfg["method"] in ("boiden", "kdet", "f2edge") else "boiden"
    entries = []
    extra = {"mode": mode}
    if mode == "boiden":
        rows = []
        for x in range(cfg["x_min"], min(cfg["x_max"], 1) + 1):
            lhs = freefermion.edge_cdf(x, p.t)
            rhs = freefermion.toeplitz_rhs(x, p.t)
            entries.append((x, lhs, abs(lhs - rhs)))
            rows.append({"x": x, "fredholm": lhs, "toeplitz": rhs, "diff": abs(lhs - rhs)})
        extra["table"] = rows
    elif mode == "kdet":
        n = max(cfg["n_particles"], 1)
        for x in range(cfg["x_min"], cfg["x_max"] + 1):
            v, e = freefermion.kdet(p.t, x, n)
            entries.append((x, v, e))
        extra["n"] = n
    else:
        rows = freefermion.edge_scaling_comparison(p.t, (-1.0, 0.0, 1.0, 2.0))
        for r in rows:
            entries.append((r["x"], r["probability"], r["diff_matched"]))
        extra["table"] = rows
    return f"ff-{mode}", entries, extra


def run_series(cfg, pool):
    p = params_from_config(cfg)
    entries = []
    for x in range(cfg["x_min"], cfg["x_max"] + 1):
        v, e = asymptotics.series_prob_geq(p, x, pool)
        entries.append((x, v, e))
    return "series", entries, {}


def run_conjecture(cfg, pool):
    p = params_from_config(cfg)
    svals = [float(s) for s in str(cfg["s_values"]).split(",") if s.strip()]
    entries = []
    extra = {"scaling": "x = -2t - s t^(1/3), v_k = (y_k+1)/t^(1/3)"}
    for s in svals:
        v = asymptotics.conjecture_partial_sum(p, s, pool=pool)
        entries.append((s, v, 1e-9))
    if p.delta != 0.0:
        extra["delta0_reference"] = [
            asymptotics.delta0_partial_sum_det(p, s) for s in svals]
    return "conjecture-partial-sum", entries, extra


def run_verify(cfg, pool):
    """Identity suite; raises VerificationError if any check fails."""
    rng = np.random.default_rng(cfg["seed"])
    deep = bool(cfg["deep"])
    report = {}

    def fail(name, value, bound):
        raise VerificationError(f"{name}: {value:.3e} exceeds {bound:.0e}")

    # double-sum identity and its U-factor form
    worst_ccp = worst_u = 0.0
    deltas = (-1.0, -0.3, 0.5, 2.0)
    ns = (1, 2, 3, 4) if deep else (1, 2, 3)
    npoints = 20 if deep else 6
    for n in ns:
        for d in deltas:
            for _ in range(npoints):
                xi = 0.3 * np.exp(2j * np.pi * rng.random(n))
                ze = 0.4 * np.exp(2j * np.pi * rng.random(n))
                worst_ccp = max(worst_ccp, identities.ccp_check(n, d, xi, ze).rel_error)
                worst_u = max(worst_u, identities.u_form_check(n, d, xi, ze).rel_error)
    report["double_sum_identity"] = worst_ccp
    report["u_form_identity"] = worst_u
    if worst_ccp > 1e-9:
        fail("double-sum identity", worst_ccp, 1e-9)
    if worst_u > 1e-9:
        fail("U-form identity", worst_u, 1e-9)

    # explicit Q_2
    worst = 0.0
    for _ in range(10):
        xi = 0.5 * (rng.random(2) + 0.2)
        ze = 0.5 * (rng.random(2) + 0.2)
        d = float(rng.uniform(-1.5, 1.5))
        worst = max(worst, abs(identities.q_poly_value(xi, ze, d)
                               - identities.q2_explicit(xi, ze, d)))
    report["q2_explicit"] = worst
    if worst > 1e-12:
        fail("Q2 explicit form", worst, 1e-12)

    # Fredholm vs Toeplitz at delta = 0
    worst = 0.0
    tgrid = (0.5, 1.0, 2.0, 3.0) if deep else (0.5, 1.0)
    for t in tgrid:
        for x in range(-6, 2):
            worst = max(worst, abs(freefermion.edge_cdf(x, t) - freefermion.toeplitz_rhs(x, t)))
    report["fredholm_toeplitz"] = worst
    if worst > 1e-10:
        fail("Fredholm/Toeplitz identity", worst, 1e-10)

    # signed empty-set sum of the edge-series coefficients
    worst = 0.0
    for n in ((1, 2, 3) if deep else (1, 2)):
        p = ModelParams(0.5, 0.2, tuple(range(1, n + 1)))
        worst = max(worst, abs(asymptotics.signed_empty_sum(p, m=40, pool=pool) - 1.0))
    report["signed_empty_sum"] = worst
    if worst > 1e-8:
        fail("signed empty-set sum", worst, 1e-8)

    # steep-descent bound sampling
    rep = asymptotics.descent_bound_check(100.0, 0.3)
    report["descent_max_re"] = rep["max_re"]
    report["descent_empirical_c"] = rep["empirical_c"]
    if rep["max_re"] > 1e-12 or rep["empirical_c"] <= 0:
        fail("descent bound", rep["max_re"], 1e-12)

    # scaling rate of the residue-factor approximation
    rep = asymptotics.scaling_rate_check(0.8)
    report["scaling_rate_ok"] = rep["within_factor_2"]
    if not rep["within_factor_2"]:
        raise VerificationError("scaling rate outside factor-2 window")

    entries = [(i, v, 0.0) for i, v in enumerate(
        v for v in report.values() if isinstance(v, float))]
    return "verify", entries, {"report": report, "seed": cfg["seed"], "deep": deep}


def run_plot(cfg, pool, input_path=None):
    if not input_path:
        raise InvalidConfigError("plot needs --input pointing at a result JSON")
    rec = json.loads(Path(input_path).read_text())
    entries = [(e["x"], e["value"], e["abs_error"]) for e in rec["entries"]]
    return rec.get("method", "plot"), entries, {"source": str(input_path)}


_SUBCOMMANDS = {
    "oracle": run_oracle,
    "wavefunction": run_wavefunction,
    "onepoint": run_onepoint,
    "freefermion": run_freefermion,
    "series": run_series,
    "conjecture": run_conjecture,
    "verify": run_verify,
    "plot": run_plot,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="xxzdw",
                                 description="Domain-wall dynamics of the XXZ spin-1/2 chain")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="key=value config file")
        sp.add_argument("--out", default="runs", help="output directory")
        sp.add_argument("--input", default=None, help="input JSON (plot)")
        for key in DEFAULTS:
            flag = "--" + key.replace("_", "-")
            sp.add_argument(flag, dest=key, default=None)
        sp.add_argument("--boiden", action="store_const", const="boiden", dest="method")
        sp.add_argument("--kdet", action="store_const", const="kdet", dest="method")
        sp.add_argument("--f2edge", action="store_const", const="f2edge", dest="method")
        sp.add_argument("--x", dest="x_single", default=None,
                        help="shorthand for --x-min X --x-max X")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        for key in DEFAULTS:
            v = getattr(args, key, None)
            if v is not None:
                cfg[key] = v
        if args.x_single is not None:
            cfg["x_min"] = cfg["x_max"] = int(args.x_single)
        cfg = resolve_config(cfg)
        cache_dir = os.environ.get("XXZDW_CACHE_DIR") or cfg["cache_dir"]
        pool = WorkerPool(cfg["workers"])

        rid = runio.run_id(args.subcommand, {k: str(v) for k, v in sorted(cfg.items())})
        manifest = runio.RunManifest(rid, args.subcommand, {k: str(v) for k, v in cfg.items()})

        cache = runio.ResultCache(cache_dir) if cache_dir else None
        artifacts = cache.get(rid) if cache else None
        if artifacts is None:
            if args.subcommand == "plot":
                method, entries, extra = run_plot(cfg, pool, args.input)
            else:
                method, entries, extra = _SUBCOMMANDS[args.subcommand](cfg, pool)
            artifacts = {
                "json": runio.record_json(manifest, method, entries, extra),
                "csv": runio.entries_csv(entries),
                "svg": runio.entries_svg(entries, title=f"{args.subcommand} ({method})"),
            }
            if cache:
                cache.put(rid, artifacts)
        paths = runio.write_artifacts(args.out, manifest, artifacts)
        print(f"[{rid}] wrote: " + " ".join(paths))
        return 0
    except VerificationError as exc:
        _emit_error(args, "verification-failure", exc)
        return 2
    except ConvergenceError as exc:
        _emit_error(args, "convergence-failure", exc)
        return 3
    except (InvalidConfigError, OSError, ValueError) as exc:
        _emit_error(args, "invalid-config", exc)
        return 4


def _emit_error(args, kind, exc):
    record = {"error": kind, "subcommand": getattr(args, "subcommand", None),
              "message": str(exc)}
    print(json.dumps(record), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
