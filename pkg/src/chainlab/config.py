"""JSON configuration documents for models, observables, and experiments.

One structured format everywhere: nested key-value documents with decimal
numbers and row-major matrices.  Loaders raise ``ConfigError`` carrying
the offending field path.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .chain import FiniteMarkovModel, FiniteMetricSpace, ObservableSequence
from .dyadic import halving_grid_model
from .elo import EloConfig, EnvDynamics
from .errors import ConfigError

MAX_SEED = 2**64


def load_document(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top-level document must be an object")
    return doc


def _get(doc: dict, key: str, path: str):
    if key not in doc:
        raise ConfigError(f"{path}.{key}: missing required field")
    return doc[key]


def _number(doc: dict, key: str, path: str, default=None) -> float:
    if key not in doc:
        if default is not None:
            return default
        raise ConfigError(f"{path}.{key}: missing required field")
    v = doc[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"{path}.{key}: expected a number, got {type(v).__name__}")
    return float(v)


def _integer(doc: dict, key: str, path: str, default=None) -> int:
    if key not in doc and default is not None:
        return default
    v = _number(doc, key, path)
    if v != int(v):
        raise ConfigError(f"{path}.{key}: expected an integer, got {v}")
    return int(v)


def _matrix(values, rows: int, cols: int, path: str) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: expected a numeric array") from exc
    if arr.size != rows * cols:
        raise ConfigError(f"{path}: expected {rows * cols} entries (row-major), got {arr.size}")
    return arr.reshape(rows, cols)


def check_seed(seed, path: str = "seed") -> int:
    if seed is None:
        raise ConfigError(f"{path}: a seed is required (config field or --seed)")
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ConfigError(f"{path}: seed must be an integer")
    if not 0 <= seed < MAX_SEED:
        raise ConfigError(f"{path}: seed must fit in 64 bits")
    return int(seed)


def model_from_config(doc, base_dir: Optional[Path] = None, path: str = "model") -> FiniteMarkovModel:
    """Build a finite model from an inline document or a referenced file.

    Kernels are either an explicit list of row-major matrices or a named
    rule: ``cycle`` repeats a kernel list forever, ``halving-grid`` builds
    the dyadic halving chain on a grid.
    """
    if isinstance(doc, str):
        file_path = (Path(base_dir) if base_dir else Path.cwd()) / doc
        doc = load_document(file_path)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected an object or file path")
    rule = doc.get("rule")
    if isinstance(rule, dict) and rule.get("name") == "halving-grid":
        return halving_grid_model(
            _number(rule, "diameter", f"{path}.rule"), _integer(rule, "levels", f"{path}.rule")
        )
    size = _integer(doc, "size", path)
    if size < 1:
        raise ConfigError(f"{path}.size: must be positive")
    dist = _matrix(_get(doc, "dist", path), size, size, f"{path}.dist")
    mu0 = np.asarray(_get(doc, "mu0", path), dtype=float)
    if mu0.size != size:
        raise ConfigError(f"{path}.mu0: expected {size} entries, got {mu0.size}")
    try:
        space = FiniteMetricSpace(dist, validate_triangle=bool(doc.get("validate", True)))
        if "kernels" in doc:
            kernels = [
                _matrix(k, size, size, f"{path}.kernels[{i}]")
                for i, k in enumerate(doc["kernels"])
            ]
            return FiniteMarkovModel(space, mu0, kernels)
        if isinstance(rule, dict) and rule.get("name") == "cycle":
            kernels = [
                _matrix(k, size, size, f"{path}.rule.kernels[{i}]")
                for i, k in enumerate(_get(rule, "kernels", f"{path}.rule"))
            ]
            if not kernels:
                raise ConfigError(f"{path}.rule.kernels: must be nonempty")
            period = len(kernels)
            return FiniteMarkovModel(space, mu0, lambda t: kernels[(t - 1) % period])
        raise ConfigError(f"{path}: provide 'kernels' or a supported 'rule'")
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def obs_from_config(doc, n_states: int, path: str = "obs") -> ObservableSequence:
    """Observable sequence from {dim, matrices[t][state], imag?, periodic?}."""
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected an object")
    dim = _integer(doc, "dim", path)
    mats = _get(doc, "matrices", path)
    if not isinstance(mats, list) or not mats:
        raise ConfigError(f"{path}.matrices: expected a nonempty list of per-step entries")
    steps = len(mats)
    arrays = np.empty((steps, n_states, dim, dim))
    for t, per_state in enumerate(mats):
        if not isinstance(per_state, list) or len(per_state) != n_states:
            raise ConfigError(f"{path}.matrices[{t}]: expected {n_states} state matrices")
        for x, flat in enumerate(per_state):
            arrays[t, x] = _matrix(flat, dim, dim, f"{path}.matrices[{t}][{x}]")
    if "imag" in doc:
        imag = np.empty_like(arrays)
        for t, per_state in enumerate(doc["imag"]):
            for x, flat in enumerate(per_state):
                imag[t, x] = _matrix(flat, dim, dim, f"{path}.imag[{t}][{x}]")
        arrays = arrays + 1j * imag
    try:
        return ObservableSequence.from_arrays(arrays, periodic=bool(doc.get("periodic", True)))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def env_from_config(doc, n: int, M: float, path: str = "env") -> EnvDynamics:
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected an object")
    kind = _get(doc, "kind", path)
    n_pairs = n * (n - 1) // 2

    def pair_vector(key):
        if key not in doc:
            return None
        v = np.asarray(doc[key], dtype=float)
        if v.size != n_pairs:
            raise ConfigError(f"{path}.{key}: expected {n_pairs} pair weights, got {v.size}")
        return v

    if kind == "static":
        return EnvDynamics("static", n, M, q0=pair_vector("q0"))
    if kind == "ar-contract":
        return EnvDynamics(
            "ar-contract",
            n,
            M,
            nu=_number(doc, "nu", path),
            noise_radius=_number(doc, "noise_radius", path, default=0.0),
            q_base=pair_vector("q_base"),
            q0=pair_vector("q0"),
        )
    raise ConfigError(f"{path}.kind: unknown environment kind {kind!r}")


def elo_from_config(doc: dict, seed: Optional[int] = None, path: str = "elo") -> EloConfig:
    n = _integer(doc, "n", path)
    M = _number(doc, "M", path)
    env = env_from_config(_get(doc, "env", path), n, M, f"{path}.env")
    rho0 = doc.get("rho0")
    if rho0 is not None:
        rho0 = np.asarray(rho0, dtype=float)
    c_sweep = doc.get("C_sweep", [0.01, 0.1, 1.0])
    if not isinstance(c_sweep, list) or not all(
        isinstance(c, (int, float)) and c > 0 for c in c_sweep
    ):
        raise ConfigError(f"{path}.C_sweep: expected a list of positive numbers")
    return EloConfig(
        n_players=n,
        M=M,
        eta=_number(doc, "eta", path),
        env=env,
        T=_integer(doc, "T", path),
        T0=_integer(doc, "T0", path, default=0),
        reps=_integer(doc, "reps", path),
        seed=check_seed(seed if seed is not None else doc.get("seed"), f"{path}.seed"),
        eps=_number(doc, "eps", path, default=1.0),
        delta=_number(doc, "delta", path, default=0.05),
        C_sweep=tuple(float(c) for c in c_sweep),
        rho0=rho0,
        keep_match_log=bool(doc.get("match_log", False)),
    )
