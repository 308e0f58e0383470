"""Deterministic CSV/JSON emission, run manifests, and report figures.

Real numbers are written with 17 significant digits so CSV round-trips
are exact; rows and keys are emitted in fixed order so outputs are
byte-identical for identical (config, seed) regardless of thread count.
The manifest additionally records wall time, which is the one
intentionally non-reproducible field.
"""

from __future__ import annotations

import hashlib
import json
import platform
import time
from pathlib import Path

import matplotlib
import numpy as np
import scipy

matplotlib.use("Agg")

from . import __version__  # noqa: E402  (needs the backend pinned first)

PNG_META = {"Software": None}  # strip the version text chunk for reproducible bytes


def fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines.extend(",".join(fmt_value(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


class RunManifest:
    """Provenance record emitted next to every command's outputs."""

    def __init__(self, command: str, config_path, seed: int, threads: int):
        self.command = command
        self.config_sha256 = sha256_file(config_path)
        self.seed = seed
        self.threads = threads
        self.started = time.perf_counter()
        self.outputs: dict[str, str] = {}
        self.checks: dict[str, bool] = {}

    def add_output(self, path) -> None:
        path = Path(path)
        self.outputs[path.name] = sha256_file(path)

    def write(self, out_dir) -> Path:
        doc = {
            "command": self.command,
            "config_sha256": self.config_sha256,
            "seed": self.seed,
            "threads": self.threads,
            "wall_time_s": time.perf_counter() - self.started,
            "versions": {
                "chainlab": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "matplotlib": matplotlib.__version__,
                "python": platform.python_version(),
            },
            "outputs": self.outputs,
            "checks": self.checks,
        }
        return write_json(Path(out_dir) / "manifest.json", doc)


def fig_tail(rows, path) -> Path:
    """Empirical tail with CI band against every bound curve, log scale."""
    import matplotlib.pyplot as plt

    eps = [r.eps for r in rows]
    floor = 1e-12
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.fill_between(
        eps,
        [max(r.ci_lo, floor) for r in rows],
        [max(r.ci_hi, floor) for r in rows],
        alpha=0.3,
        label="empirical tail (0.999 CI)",
    )
    ax.plot(eps, [max(r.p_hat, floor) for r in rows], marker=".", lw=1)
    for name in ("bound_curv", "bound_spec", "bound_olv_pt", "bound_olv_avg"):
        ax.plot(eps, [max(getattr(r, name), floor) for r in rows], label=name)
    ax.set_yscale("log")
    ax.set_xlabel("eps")
    ax.set_ylabel("probability")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=PNG_META)
    plt.close(fig)
    return Path(path)


def fig_bounds(eps_grid, curves: dict, path) -> Path:
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, values in curves.items():
        vals = [max(v, 1e-300) if np.isfinite(v) else np.nan for v in values]
        ax.plot(eps_grid, vals, label=name)
    ax.set_yscale("log")
    ax.set_xlabel("eps")
    ax.set_ylabel("bound")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=PNG_META)
    plt.close(fig)
    return Path(path)


def fig_curvature(profile, path) -> Path:
    import matplotlib.pyplot as plt

    t = np.arange(1, profile.n + 1)
    fig, axes = plt.subplots(2, 1, figsize=(6.4, 5.2), sharex=True)
    axes[0].plot(t, profile.kappa_t, lw=1)
    axes[0].axhline(profile.kappa.value, color="C1", ls="--", label="effective")
    axes[0].set_ylabel("per-step curvature")
    axes[0].legend(fontsize=8)
    axes[1].plot(t, profile.sigma_t, lw=1, color="C2")
    axes[1].axhline(1 - profile.lam.value, color="C3", ls="--", label="1 - effective gap")
    axes[1].set_ylabel("second singular value")
    axes[1].set_xlabel("t")
    axes[1].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=PNG_META)
    plt.close(fig)
    return Path(path)


def fig_tracking(report, path) -> Path:
    import matplotlib.pyplot as plt

    t = np.arange(1, len(report.mean_err2) + 1)
    fig, axes = plt.subplots(1, 2, figsize=(9.6, 4.0))
    axes[0].fill_between(t, np.maximum(report.ci_lo, 1e-12), np.maximum(report.ci_hi, 1e-12), alpha=0.3)
    axes[0].plot(t, np.maximum(report.mean_err2, 1e-12), lw=1, label="mean squared error")
    if np.all(np.isfinite(report.lemma_rhs)):
        axes[0].plot(t, report.lemma_rhs, ls="--", label="contraction envelope")
    axes[0].set_yscale("log")
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("tracking error")
    axes[0].legend(fontsize=8)
    axes[1].hist(report.window_err, bins=30)
    if np.isfinite(report.radius):
        axes[1].axvline(report.radius, color="C3", ls="--", label="radius")
        axes[1].legend(fontsize=8)
    axes[1].set_xlabel("window-averaged error")
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=PNG_META)
    plt.close(fig)
    return Path(path)
