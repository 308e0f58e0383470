"""Batch experiment front-end.

    lab curvature|bounds|simulate|elo|verify --config <file> --out <dir>
        [--seed <u64>] [--threads <k>]

Every run drops its CSV/JSON outputs plus a manifest with the config
hash, seed, library versions, wall time, output hashes, and the
pass/fail state of any checks the command performs.  Exit codes:
0 success, 2 config error, 3 verification failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bounds import (
    BoundParams,
    bound_curv,
    bound_curv_diam,
    bound_ollivier_avg,
    bound_ollivier_point,
    bound_spec,
)
from .config import (
    check_seed,
    elo_from_config,
    load_document,
    model_from_config,
    obs_from_config,
)
from .elo import run_tracking
from .errors import ConfigError, NumericalError, VerificationError
from .report import (
    RunManifest,
    fig_bounds,
    fig_curvature,
    fig_tail,
    fig_tracking,
    write_csv,
    write_json,
)
from .tails import default_eps_grid, dominance_table, summarize_chain
from .verify import run_full_verification

TAIL_COLUMNS = [
    "eps", "count", "N", "p_hat", "ci_lo", "ci_hi",
    "bound_curv", "bound_spec", "bound_olv_pt", "bound_olv_avg",
    "count_pt", "p_hat_pt", "ci_lo_pt", "ci_hi_pt", "event_empty",
]


def _effective_seed(args_seed, doc, required=True):
    seed = args_seed if args_seed is not None else doc.get("seed")
    if seed is None and not required:
        return 0
    return check_seed(seed)


def _rate_json(rate):
    return {"value": rate.value, "weak": rate.weak}


def cmd_curvature(doc, out_dir, seed, threads, manifest, cfg_dir):
    model = model_from_config(doc.get("model", doc), base_dir=cfg_dir)
    horizon = doc.get("horizon")
    if horizon is None:
        raise ConfigError("horizon: missing required field")
    horizon = int(horizon)
    obs = obs_from_config(doc["obs"], model.size) if "obs" in doc else None
    profile = summarize_chain(model, obs, horizon)
    header = ["t", "kappa_t", "sigma_t", "sigma_inf_t"]
    rows = [
        [t + 1, profile.kappa_t[t], profile.sigma_t[t], profile.sigma_inf_t[t]]
        for t in range(horizon)
    ]
    if obs is not None:
        header += ["lipschitz_t", "delta_op_t", "delta_f_t"]
        for t in range(horizon):
            rows[t] += [profile.lipschitz_t[t], profile.delta_op_t[t], profile.delta_f_t[t]]
    # aggregates repeated as constant columns so the table is self-contained
    header += ["kappa_eff", "kappa_tilde_eff", "lambda_eff", "sigma_inf", "diameter"]
    aggregates = [
        profile.kappa.value,
        profile.kappa_tilde.value,
        profile.lam.value,
        profile.sigma_inf,
        profile.diameter,
    ]
    for row in rows:
        row += aggregates
    manifest.add_output(write_csv(out_dir / "steps.csv", header, rows))
    summary = {
        "horizon": horizon,
        "diameter": profile.diameter,
        "sigma_inf": profile.sigma_inf,
        "effective_kappa": _rate_json(profile.kappa),
        "effective_kappa_tilde": _rate_json(profile.kappa_tilde),
        "effective_lambda": _rate_json(profile.lam),
    }
    if obs is not None:
        summary.update(
            lipschitz=profile.lipschitz, delta_op=profile.delta_op, delta_f=profile.delta_f
        )
    manifest.add_output(write_json(out_dir / "summary.json", summary))
    if doc.get("figures", True):
        manifest.add_output(fig_curvature(profile, out_dir / "curvature.png"))
    return 0


_BOUND_FNS = {
    "bound_curv": bound_curv,
    "bound_curv_diam": bound_curv_diam,
    "bound_spec": bound_spec,
    "bound_olv_pt": bound_ollivier_point,
    "bound_olv_avg": bound_ollivier_avg,
}


def cmd_bounds(doc, out_dir, seed, threads, manifest, cfg_dir):
    raw = doc.get("params")
    if not isinstance(raw, dict):
        raise ConfigError("params: missing required object")
    try:
        base = BoundParams(
            m=raw.get("m"),
            n=raw.get("n"),
            L=raw.get("L"),
            D=raw.get("D"),
            delta_op=raw.get("delta_op"),
            delta_f=raw.get("delta_f"),
            kappa=raw.get("kappa"),
            lam=raw.get("lambda"),
            sigma_inf=raw.get("sigma_inf"),
            kappa_tilde=raw.get("kappa_tilde"),
        )
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from exc
    eps_grid = doc.get("eps_grid")
    if not isinstance(eps_grid, list) or not eps_grid:
        raise ConfigError("eps_grid: expected a nonempty list of deviation levels")
    header = ["eps"]
    for name in _BOUND_FNS:
        header += [name, f"{name}_event_empty"]
    rows = []
    curves = {name: [] for name in _BOUND_FNS}
    for eps in eps_grid:
        p = replace(base, eps=float(eps))
        row = [float(eps)]
        for name, fn in _BOUND_FNS.items():
            try:
                res = fn(p)
                row += [res.value, res.event_empty]
                curves[name].append(res.value)
            except ValueError:
                row += [math.nan, False]
                curves[name].append(math.nan)
        rows.append(row)
    manifest.add_output(write_csv(out_dir / "bounds.csv", header, rows))
    if doc.get("figures", True):
        manifest.add_output(fig_bounds([r[0] for r in rows], curves, out_dir / "bounds.png"))
    return 0


def cmd_simulate(doc, out_dir, seed, threads, manifest, cfg_dir):
    model = model_from_config(doc.get("model"), base_dir=cfg_dir)
    if "obs" not in doc:
        raise ConfigError("obs: missing required field")
    obs = obs_from_config(doc["obs"], model.size)
    horizon = doc.get("horizon")
    reps = doc.get("reps")
    if horizon is None or reps is None:
        raise ConfigError("horizon and reps are required")
    horizon, reps = int(horizon), int(reps)
    profile = summarize_chain(model, obs, horizon)
    eps_cfg = doc.get("eps_grid")
    if isinstance(eps_cfg, list):
        eps_grid = np.asarray(eps_cfg, dtype=float)
    else:
        points = int(eps_cfg.get("points", 20)) if isinstance(eps_cfg, dict) else 20
        eps_grid = default_eps_grid(profile, obs.dim, horizon, points=points)
    table = dominance_table(
        model, obs, horizon, eps_grid, reps, seed, workers=threads, profile=profile
    )
    rows = [
        [
            r.eps, r.count, r.reps, r.p_hat, r.ci_lo, r.ci_hi,
            r.bound_curv, r.bound_spec, r.bound_olv_pt, r.bound_olv_avg,
            r.count_pt, r.p_hat_pt, r.ci_lo_pt, r.ci_hi_pt, r.event_empty,
        ]
        for r in table.rows
    ]
    manifest.add_output(write_csv(out_dir / "tail.csv", TAIL_COLUMNS, rows))
    summary = {
        "horizon": horizon,
        "reps": reps,
        "diameter": profile.diameter,
        "lipschitz": profile.lipschitz,
        "delta_op": profile.delta_op,
        "delta_f": profile.delta_f,
        "sigma_inf": profile.sigma_inf,
        "effective_kappa": _rate_json(profile.kappa),
        "effective_kappa_tilde": _rate_json(profile.kappa_tilde),
        "effective_lambda": _rate_json(profile.lam),
        "dominance": table.dominance_ok(),
    }
    manifest.add_output(write_json(out_dir / "profile.json", summary))
    if doc.get("figures", True):
        manifest.add_output(fig_tail(table.rows, out_dir / "tail.png"))
    for name, ok in table.dominance_ok().items():
        manifest.checks[f"dominance_{name}"] = bool(ok)
    return 0


def cmd_elo(doc, out_dir, seed, threads, manifest, cfg_dir):
    config = elo_from_config(doc, seed=seed)
    report = run_tracking(config)
    total = len(report.mean_err2)
    rows = [
        [t + 1, report.mean_err2[t], report.lemma_rhs[t], report.ci_lo[t], report.ci_hi[t]]
        for t in range(total)
    ]
    manifest.add_output(
        write_csv(out_dir / "tracking.csv", ["t", "mean_err2", "lemma_rhs", "min_ci", "max_ci"], rows)
    )
    manifest.add_output(
        write_csv(
            out_dir / "window.csv",
            ["rep", "window_err"],
            [[r, report.window_err[r]] for r in range(config.reps)],
        )
    )
    summary = {
        "kappa": report.kappa,
        "lambda_min": report.lambda_min,
        "drift_bound": report.drift_bound,
        "initial_err2": report.initial_err2,
        "radius": report.radius,
        "violations": report.violations,
        "violation_freq": report.violation_freq,
        "C_sweep": report.c_rows,
        "declared": {
            "nu": config.env.nu,
            "h_rho": config.env.h_rho,
            "h_q": config.env.h_q,
        },
    }
    manifest.add_output(write_json(out_dir / "summary.json", summary))
    if report.matches is not None:
        manifest.add_output(
            write_csv(
                out_dir / "matches.csv",
                ["t", "rep", "i", "j", "winner"],
                report.matches.tolist(),
            )
        )
    if doc.get("figures", True):
        manifest.add_output(fig_tracking(report, out_dir / "tracking.png"))
    finite = np.all(np.isfinite(report.lemma_rhs))
    manifest.checks["lemma_envelope_dominates"] = bool(
        finite and np.all(report.mean_err2 <= report.lemma_rhs)
    )
    manifest.checks["window_radius_ok"] = all(row["ok"] for row in report.c_rows)
    return 0


def cmd_verify(doc, out_dir, seed, threads, manifest, cfg_dir):
    report = run_full_verification(
        seed,
        lemma_instances=int(doc.get("lemma_instances", 120)),
        renewal_instances=int(doc.get("renewal_instances", 100)),
        w1_instances=int(doc.get("w1_instances", 200)),
        projection_instances=int(doc.get("projection_instances", 1000)),
    )
    payload = {
        "seed": seed,
        "passed": report.passed,
        "checks": [
            {
                "name": r.name,
                "instances": r.instances,
                "max_violation": r.max_violation,
                "tolerance": r.tolerance,
                "passed": r.passed,
            }
            for r in report.results
        ],
    }
    manifest.add_output(write_json(out_dir / "report.json", payload))
    for r in report.results:
        manifest.checks[r.name] = r.passed
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: worst {r.max_violation:.3e} (tol {r.tolerance:.1e}, "
              f"{r.instances} instances)")
    return 0 if report.passed else 3


_COMMANDS = {
    "curvature": cmd_curvature,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "elo": cmd_elo,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment document")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        p.add_argument("--threads", type=int, default=1, help="worker thread count")
    args = parser.parse_args(argv)
    try:
        doc = load_document(args.config)
        # the one honored environment variable: output directory override
        out_dir = Path(os.environ.get("LAB_OUT", args.out))
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        seed = _effective_seed(args.seed, doc, required=args.command != "bounds")
        manifest = RunManifest(args.command, args.config, seed, args.threads)
        cfg_dir = Path(args.config).resolve().parent
        code = _COMMANDS[args.command](doc, out_dir, seed, args.threads, manifest, cfg_dir)
        manifest.write(out_dir)
        return code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
