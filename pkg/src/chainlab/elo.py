"""Online rating dynamics under a drifting pairwise-comparison model.

A match at step t selects an unordered pair from the matchup distribution
q^t, resolves it with logistic win probability in the true rating gap,
moves the winner's and loser's ratings by plus/minus eta times the
logistic of their current rating gap, and projects back onto the zero-sum
box.  The true ratings and matchup distribution form an exogenous
contracting environment.  This module provides the update itself, the
environment processes, the contraction/Laplacian quantities, drift
estimation, exact coupling expectations for the contraction checks, and
the replicated tracking experiment.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .errors import ConfigError
from .rng import stream

REP_BLOCK = 128  # replica blocks own streams keyed by index; fixed, not tunable


def pair_indices(n: int) -> np.ndarray:
    """Unordered player pairs (i, j), i < j, in lexicographic order."""
    return np.array(list(itertools.combinations(range(n), 2)), dtype=np.int64)


def tv_distance(q: np.ndarray, q2: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(q) - np.asarray(q2)).sum())


def env_distance(rho: np.ndarray, q: np.ndarray, rho2: np.ndarray, q2: np.ndarray) -> float:
    """Environment metric: rating distance plus 2*sqrt(2) times matchup TV."""
    return float(np.linalg.norm(rho - rho2)) + 2 * math.sqrt(2) * tv_distance(q, q2)


def project_zero_sum_box(y: np.ndarray, M: float) -> np.ndarray:
    """Euclidean projection onto {sum x = 0} intersected with [-M, M]^n.

    The projection has the one-multiplier form x = clip(y - theta, -M, M);
    theta is found exactly by scanning the sorted clip breakpoints, with a
    bisection fallback if accumulation spoils the linear solve.
    """
    y = np.asarray(y, dtype=float)
    if M <= 0:
        raise ValueError(f"M must be positive, got {M}")
    bps = np.sort(np.concatenate([y - M, y + M]))
    vals = np.clip(y[None, :] - bps[:, None], -M, M).sum(axis=1)
    idx = int(np.searchsorted(-vals, 0.0, side="left"))
    idx = min(idx, len(bps) - 1)
    if vals[idx] == 0.0:
        theta = bps[idx]
    else:
        left, right = bps[idx - 1], bps[idx]
        mid = 0.5 * (left + right)
        free = int(((y - mid > -M) & (y - mid < M)).sum())
        theta = left + vals[idx - 1] / free if free > 0 else mid
    x = np.clip(y - theta, -M, M)
    if abs(x.sum()) > 1e-10:
        g = lambda th: np.clip(y - th, -M, M).sum()
        theta = brentq(g, bps[0] - 1.0, bps[-1] + 1.0, xtol=1e-12)
        x = np.clip(y - theta, -M, M)
    return x


@dataclass
class EnvironmentState:
    """True ratings plus the matchup distribution over unordered pairs."""

    rho: np.ndarray
    q: np.ndarray

    def validate(self, n: int, M: float) -> None:
        rho, q = np.asarray(self.rho), np.asarray(self.q)
        if rho.shape != (n,):
            raise ConfigError(f"rho must have length {n}, got {rho.shape}")
        if abs(rho.sum()) > 1e-9:
            raise ConfigError(f"true ratings must be zero-sum (sum {rho.sum():.3e})")
        if np.abs(rho).max(initial=0.0) > M:
            raise ConfigError(f"true ratings must lie in [-{M}, {M}]")
        if q.shape != (n * (n - 1) // 2,):
            raise ConfigError(f"q must have length {n * (n - 1) // 2}, got {q.shape}")
        if q.min(initial=0.0) < 0 or abs(q.sum() - 1.0) > 1e-12:
            raise ConfigError("q must be a probability vector over pairs")


def sample_zero_sum_ball(rng: np.random.Generator, count: int, n: int, radius: float) -> np.ndarray:
    """Uniform draws from the radius-``radius`` ball of the zero-sum subspace."""
    g = rng.standard_normal((count, n))
    g -= g.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    u = rng.random(count) ** (1.0 / max(n - 1, 1))
    return g / norms * (radius * u)[:, None]


class EnvDynamics:
    """Environment transition law with self-declared contraction data.

    ``static`` freezes the environment: the reachable environment set is a
    single point, so any contraction constant holds vacuously (declared
    nu = 1) and the drift and one-step support radii are zero.

    ``ar-contract`` pulls the ratings toward zero at rate nu with bounded
    zero-sum noise (then projects to the box) and pulls the matchup
    distribution deterministically toward a base distribution at the same
    rate.  Both maps contract the environment metric by (1 - nu) under the
    shared-noise coupling because the projection is non-expansive, and the
    support radii and drift envelope are exact consequences of the noise
    radius and the box.

    ``custom`` wraps a user callback that must declare (nu, h_rho, h_q,
    drift); declarations are verified empirically, never trusted.
    """

    def __init__(
        self,
        kind: str,
        n: int,
        M: float,
        nu: float = 1.0,
        noise_radius: float = 0.0,
        q_base: Optional[np.ndarray] = None,
        q0: Optional[np.ndarray] = None,
        custom_step: Optional[Callable] = None,
        declared: Optional[dict] = None,
    ):
        n_pairs = n * (n - 1) // 2
        self.kind = kind
        self.n = n
        self.M = M
        self.q_base = np.full(n_pairs, 1.0 / n_pairs) if q_base is None else np.asarray(q_base, float)
        self.q0 = self.q_base.copy() if q0 is None else np.asarray(q0, float)
        if kind == "static":
            self.nu = 1.0
            self.noise_radius = 0.0
            self.h_rho = 0.0
            self.h_q = 0.0
            self.drift_bound = 0.0
        elif kind == "ar-contract":
            if not 0 < nu <= 1:
                raise ConfigError(f"nu must lie in (0, 1], got {nu}")
            if noise_radius < 0:
                raise ConfigError(f"noise radius must be nonnegative, got {noise_radius}")
            self.nu = nu
            self.noise_radius = noise_radius
            reach = nu * M * math.sqrt(n) + noise_radius
            self.h_rho = reach
            self.h_q = nu * tv_distance(self.q0, self.q_base)
            self.drift_bound = reach**2 + 4 * M * math.sqrt(n) * reach
        elif kind == "custom":
            if custom_step is None or declared is None:
                raise ConfigError("custom dynamics need a step callback and declared constants")
            self.custom_step = custom_step
            self.nu = declared["nu"]
            self.noise_radius = 0.0
            self.h_rho = declared["h_rho"]
            self.h_q = declared["h_q"]
            self.drift_bound = declared["drift"]
        else:
            raise ConfigError(f"unknown environment kind {kind!r}")

    def q_next(self, q: np.ndarray) -> np.ndarray:
        if self.kind == "ar-contract":
            return (1 - self.nu) * q + self.nu * self.q_base
        return q

    def step_rho_many(self, rhos: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One rating transition for a batch of replicas.

        Vectorised for the built-in dynamics; custom callbacks are stepped
        one replica at a time (their q output is ignored here, ratings only).
        """
        if self.kind == "static":
            return rhos
        if self.kind == "custom":
            out = np.empty_like(rhos)
            for r in range(rhos.shape[0]):
                out[r] = np.asarray(self.custom_step(rhos[r], self.q0, rng)[0], dtype=float)
            return out
        out = (1 - self.nu) * rhos
        if self.noise_radius > 0:
            out = out + sample_zero_sum_ball(rng, rhos.shape[0], self.n, self.noise_radius)
        bad = np.flatnonzero(np.abs(out).max(axis=1) > self.M)
        for r in bad:
            out[r] = project_zero_sum_box(out[r], self.M)
        return out

    def step(self, state: EnvironmentState, rng: np.random.Generator) -> EnvironmentState:
        if self.kind == "custom":
            rho, q = self.custom_step(state.rho, state.q, rng)
            return EnvironmentState(np.asarray(rho, float), np.asarray(q, float))
        rho = self.step_rho_many(state.rho[None, :], rng)[0]
        return EnvironmentState(rho, self.q_next(state.q))


def btl_outcome(rho: np.ndarray, i: int, j: int, rng: np.random.Generator) -> int:
    """Winner of a match between i and j under the logistic outcome model."""
    if i == j:
        raise ValueError("a match needs two distinct players")
    p_i = expit(rho[i] - rho[j])
    return i if rng.random() < p_i else j


def elo_match_update(x: np.ndarray, winner: int, loser: int, eta: float) -> np.ndarray:
    """Pre-projection rating move: winner and loser change by the same amount."""
    amount = eta * expit(x[loser] - x[winner])
    out = np.array(x, dtype=float)
    out[winner] += amount
    out[loser] -= amount
    return out


def elo_step(
    x: np.ndarray,
    env: EnvironmentState,
    eta: float,
    M: float,
    rng: np.random.Generator,
    pairs: Optional[np.ndarray] = None,
) -> np.ndarray:
    """One full rating update: pair draw, outcome, move, projection."""
    if pairs is None:
        pairs = pair_indices(len(x))
    cum = np.cumsum(env.q)
    k = min(int(np.searchsorted(cum, rng.random(), side="right")), len(pairs) - 1)
    i, j = int(pairs[k, 0]), int(pairs[k, 1])
    winner = btl_outcome(env.rho, i, j, rng)
    loser = j if winner == i else i
    out = elo_match_update(x, winner, loser, eta)
    if np.abs(out).max() > M:
        out = project_zero_sum_box(out, M)
    return out


def laplacian_lambda(q: np.ndarray, n: int) -> float:
    """Algebraic connectivity of the matchup-weighted graph.

    Second-smallest eigenvalue of sum_{i<j} q_ij (e_i - e_j)(e_i - e_j)^T,
    i.e. the minimum of the pair quadratic form over zero-sum directions.
    """
    q = np.asarray(q, dtype=float)
    pairs = pair_indices(n)
    lap = np.zeros((n, n))
    w = np.zeros((n, n))
    w[pairs[:, 0], pairs[:, 1]] = q
    w = w + w.T
    lap = np.diag(w.sum(axis=1)) - w
    eigs = np.linalg.eigvalsh(lap)
    return max(float(eigs[1]), 0.0)


def elo_curvature(eta: float, M: float, lam: float) -> float:
    """Contraction rate of one rating update at a fixed environment."""
    return eta * math.exp(-4 * M) * lam / 8.0


@dataclass
class EloConfig:
    """Replicated tracking experiment configuration."""

    n_players: int
    M: float
    eta: float
    env: EnvDynamics
    T: int
    T0: int
    reps: int
    seed: int
    eps: float = 1.0
    delta: float = 0.05
    C_sweep: tuple = (0.01, 0.1, 1.0)
    rho0: Optional[np.ndarray] = None
    keep_match_log: bool = False

    def __post_init__(self):
        if self.n_players < 2:
            raise ConfigError(f"need at least 2 players, got {self.n_players}")
        if self.M <= 1:
            raise ConfigError(f"M must exceed 1, got {self.M}")
        if not 0 < self.eta < 0.5:
            raise ConfigError(f"eta must lie in (0, 1/2), got {self.eta}")
        if self.eta > self.env.nu / 2:
            raise ConfigError(
                f"step size eta={self.eta} must not exceed nu/2={self.env.nu / 2}"
            )
        if self.T < 1 or self.T0 < 0:
            raise ConfigError("need T >= 1 and T0 >= 0")
        if self.reps < 1:
            raise ConfigError("need at least one replica")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if self.rho0 is None:
            rng = stream(self.seed, "rho0")
            raw = rng.uniform(-self.M / 2, self.M / 2, size=self.n_players)
            self.rho0 = project_zero_sum_box(raw, self.M)
        else:
            self.rho0 = np.asarray(self.rho0, dtype=float)
            EnvironmentState(self.rho0, self.env.q0).validate(self.n_players, self.M)


@dataclass
class TrackingReport:
    config: EloConfig
    kappa: float
    lambda_min: float
    drift_bound: float
    initial_err2: float
    mean_err2: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    lemma_rhs: np.ndarray
    window_err: np.ndarray
    radius: float
    violations: int
    c_rows: list = field(default_factory=list)
    matches: Optional[np.ndarray] = None

    @property
    def violation_freq(self) -> float:
        return self.violations / self.config.reps


def _q_path(env: EnvDynamics, total: int) -> np.ndarray:
    qs = np.empty((total + 1, env.q0.shape[0]))
    qs[1] = env.q0
    for t in range(2, total + 1):
        qs[t] = env.q_next(qs[t - 1])
    qs[0] = env.q0
    return qs


def run_tracking(config: EloConfig) -> TrackingReport:
    """Replicated joint simulation of ratings against the drifting truth.

    Emits the replica-mean squared tracking error per step with its 99%
    normal CI, the one-step-contraction envelope computed from the
    measured connectivity floor, the window-averaged errors per replica,
    and the constant-sweep table for the averaged guarantee.
    """
    n, eta, M = config.n_players, config.eta, config.M
    env = config.env
    if env.kind == "custom":
        raise ConfigError(
            "tracking experiments run on built-in environments; custom dynamics "
            "are verified with drift_estimate and the coupling checks"
        )
    total = config.T0 + config.T
    pairs = pair_indices(n)
    qs = _q_path(env, total)
    cums = np.cumsum(qs, axis=1)
    lambda_min = min(laplacian_lambda(qs[t], n) for t in range(1, total + 1))
    kappa = elo_curvature(eta, M, lambda_min)
    drift = env.drift_bound

    err_sum = np.zeros(total + 1)
    err_sq_sum = np.zeros(total + 1)
    window_err = np.empty(config.reps)
    match_rows = [] if config.keep_match_log else None
    if config.keep_match_log and config.reps * total > 2_000_000:
        raise ConfigError("match log limited to 2e6 rows; shrink reps*T")

    n_blocks = (config.reps + REP_BLOCK - 1) // REP_BLOCK
    for b in range(n_blocks):
        rb = min(REP_BLOCK, config.reps - b * REP_BLOCK)
        rng = stream(config.seed, "elo", b)
        ar = np.arange(rb)
        x = np.zeros((rb, n))
        rho = np.tile(config.rho0, (rb, 1))
        wx = np.zeros((rb, n))
        wr = np.zeros((rb, n))
        for t in range(1, total + 1):
            u_pair = rng.random(rb)
            k = np.minimum(np.searchsorted(cums[t], u_pair, side="right"), len(pairs) - 1)
            i, j = pairs[k, 0], pairs[k, 1]
            i_wins = rng.random(rb) < expit(rho[ar, i] - rho[ar, j])
            win = np.where(i_wins, i, j)
            lose = np.where(i_wins, j, i)
            amount = eta * expit(x[ar, lose] - x[ar, win])
            x[ar, win] += amount
            x[ar, lose] -= amount
            for r in np.flatnonzero(np.abs(x).max(axis=1) > M):
                x[r] = project_zero_sum_box(x[r], M)
            if match_rows is not None:
                match_rows.append(
                    np.column_stack([np.full(rb, t), b * REP_BLOCK + ar, i, j, win])
                )
            err2 = ((x - rho) ** 2).sum(axis=1)
            err_sum[t] += err2.sum()
            err_sq_sum[t] += (err2**2).sum()
            if t > config.T0:
                wx += x
                wr += rho
            if t < total:
                rho = env.step_rho_many(rho, rng)
        window_err[b * REP_BLOCK : b * REP_BLOCK + rb] = np.linalg.norm(
            (wx - wr) / config.T, axis=1
        )

    reps = config.reps
    mean = err_sum[1:] / reps
    var = np.maximum(err_sq_sum[1:] / reps - mean**2, 0.0)
    if reps > 1:
        var = var * reps / (reps - 1)
    half = 2.576 * np.sqrt(var / reps)
    init_err2 = float((config.rho0**2).sum())  # x starts at zero
    steps = np.arange(1, total + 1)
    if kappa > 0:
        rhs = (1 - kappa) ** (steps - 1) * init_err2 + drift / kappa + 2 * eta**2 / kappa
        radius = math.sqrt(drift / kappa) + (1 + config.eps) * math.sqrt(2 * eta**2 / kappa)
    else:
        rhs = np.full(total, np.inf)
        radius = math.inf
    violations = int((window_err > radius).sum())

    c_rows = []
    for c in config.C_sweep:
        min_t = math.ceil(
            c * config.eps**-2 * eta**-2 * M**2 * n * math.log(n / config.delta)
        )
        c_rows.append(
            {
                "C": float(c),
                "min_T": int(min_t),
                "qualifies": bool(config.T >= min_t),
                "violation_freq": violations / reps,
                "ok": bool(config.T < min_t or violations / reps <= config.delta),
            }
        )

    return TrackingReport(
        config=config,
        kappa=kappa,
        lambda_min=lambda_min,
        drift_bound=drift,
        initial_err2=init_err2,
        mean_err2=mean,
        ci_lo=mean - half,
        ci_hi=mean + half,
        lemma_rhs=rhs,
        window_err=window_err,
        radius=radius,
        violations=violations,
        c_rows=c_rows,
        matches=np.concatenate(match_rows) if match_rows else None,
    )


def simulate_environment(env: EnvDynamics, rho0: np.ndarray, T: int, seed: int) -> np.ndarray:
    """One environment rating path rho^1..rho^{T+1}, shape (T+1, n)."""
    rng = stream(seed, "env")
    out = np.empty((T + 1, len(rho0)))
    out[0] = rho0
    for t in range(1, T + 1):
        out[t] = env.step_rho_many(out[t - 1][None, :], rng)[0]
    return out


@dataclass
class DriftEstimate:
    max_mean: float
    se_at_max: float
    argmax_t: int
    means: np.ndarray
    ses: np.ndarray


def drift_estimate(
    env: EnvDynamics, rho_path: np.ndarray, resamples: int, seed: int, max_states: int = 200
) -> DriftEstimate:
    """Monte Carlo estimate of the worst conditional one-step drift.

    For a subsample of visited rating states, the one-step transition is
    re-drawn ``resamples`` times and the functional
    |rho' - rho|_2^2 + 4 M |rho' - rho|_1 is averaged; the max over states
    is reported with its standard error.
    """
    rho_path = np.atleast_2d(np.asarray(rho_path, dtype=float))
    if rho_path.shape[0] < 2:
        raise ValueError("need a trajectory of at least 2 states")
    idx = np.linspace(0, rho_path.shape[0] - 1, min(max_states, rho_path.shape[0])).astype(int)
    means = np.empty(len(idx))
    ses = np.empty(len(idx))
    for pos, t in enumerate(idx):
        rng = stream(seed, "drift", int(t))
        base = np.tile(rho_path[t], (resamples, 1))
        nxt = env.step_rho_many(base, rng)
        move = nxt - base
        psi = (move**2).sum(axis=1) + 4 * env.M * np.abs(move).sum(axis=1)
        means[pos] = psi.mean()
        ses[pos] = psi.std(ddof=1) / math.sqrt(resamples) if resamples > 1 else 0.0
    k = int(np.argmax(means))
    return DriftEstimate(
        max_mean=float(means[k]),
        se_at_max=float(ses[k]),
        argmax_t=int(idx[k]),
        means=means,
        ses=ses,
    )


def _update_and_project(x, winner, loser, eta, M):
    out = elo_match_update(x, winner, loser, eta)
    if np.abs(out).max() > M:
        out = project_zero_sum_box(out, M)
    return out


def coupled_elo_expected_distance(
    x1: np.ndarray,
    e1: EnvironmentState,
    x2: np.ndarray,
    e2: EnvironmentState,
    eta: float,
    M: float,
) -> float:
    """Exact expected rating distance after one coupled update of two copies.

    The coupling selects the same pair on the overlap of the two matchup
    distributions (maximal coupling), resolves shared-pair matches with a
    shared uniform so outcomes disagree exactly with probability
    |sigma1 - sigma2|, and lets mismatched pairs resolve independently.
    The expectation is enumerated exactly over pairs and outcomes, so the
    contraction checks need no sampling noise on this layer.
    """
    n = len(x1)
    pairs = pair_indices(n)
    q1 = np.asarray(e1.q, float)
    q2 = np.asarray(e2.q, float)
    overlap = np.minimum(q1, q2)
    res1 = q1 - overlap
    res2 = q2 - overlap
    tv = res1.sum()
    cost = 0.0
    for k, (i, j) in enumerate(pairs):
        w = overlap[k]
        if w <= 0:
            continue
        s1 = float(expit(e1.rho[i] - e1.rho[j]))
        s2 = float(expit(e2.rho[i] - e2.rho[j]))
        lo, hi = min(s1, s2), max(s1, s2)
        u1_i = _update_and_project(x1, i, j, eta, M)
        u1_j = _update_and_project(x1, j, i, eta, M)
        u2_i = _update_and_project(x2, i, j, eta, M)
        u2_j = _update_and_project(x2, j, i, eta, M)
        cost += w * lo * float(np.linalg.norm(u1_i - u2_i))
        cost += w * (1 - hi) * float(np.linalg.norm(u1_j - u2_j))
        if hi > lo:
            first_wins_i = s1 > s2
            mixed = (
                float(np.linalg.norm(u1_i - u2_j))
                if first_wins_i
                else float(np.linalg.norm(u1_j - u2_i))
            )
            cost += w * (hi - lo) * mixed
    if tv > 0:
        for k1 in np.flatnonzero(res1 > 0):
            i1, j1 = pairs[k1]
            s1 = float(expit(e1.rho[i1] - e1.rho[j1]))
            opts1 = (
                (_update_and_project(x1, i1, j1, eta, M), s1),
                (_update_and_project(x1, j1, i1, eta, M), 1 - s1),
            )
            for k2 in np.flatnonzero(res2 > 0):
                i2, j2 = pairs[k2]
                s2 = float(expit(e2.rho[i2] - e2.rho[j2]))
                opts2 = (
                    (_update_and_project(x2, i2, j2, eta, M), s2),
                    (_update_and_project(x2, j2, i2, eta, M), 1 - s2),
                )
                w = res1[k1] * res2[k2] / tv
                for v1, p1 in opts1:
                    for v2, p2 in opts2:
                        cost += w * p1 * p2 * float(np.linalg.norm(v1 - v2))
    return cost


def _coupled_env_step(env, e1, e2, rng, seed, k):
    """One synchronously coupled environment transition of two copies.

    Built-in dynamics share the drawn noise directly; custom callbacks are
    driven by two generators in identical states, which is the same
    coupling whenever the callback consumes its stream deterministically.
    """
    if env.kind == "custom":
        r1, q1 = env.custom_step(e1.rho, e1.q, stream(seed, "envcouple", k))
        r2, q2 = env.custom_step(e2.rho, e2.q, stream(seed, "envcouple", k))
        return np.asarray(r1, float), np.asarray(q1, float), np.asarray(r2, float), np.asarray(q2, float)
    q1n, q2n = env.q_next(e1.q), env.q_next(e2.q)
    if env.kind == "ar-contract":
        zeta = (
            sample_zero_sum_ball(rng, 1, env.n, env.noise_radius)[0]
            if env.noise_radius > 0
            else 0.0
        )
        r1 = (1 - env.nu) * e1.rho + zeta
        r2 = (1 - env.nu) * e2.rho + zeta
    else:
        r1, r2 = e1.rho, e2.rho
    if np.abs(r1).max() > env.M:
        r1 = project_zero_sum_box(r1, env.M)
    if np.abs(r2).max() > env.M:
        r2 = project_zero_sum_box(r2, env.M)
    return r1, q1n, r2, q2n


def env_coupling_costs(
    env: EnvDynamics,
    e1: EnvironmentState,
    e2: EnvironmentState,
    samples: int,
    seed: int,
) -> np.ndarray:
    """Per-sample environment distances after one coupled step."""
    rng = stream(seed, "envcouple")
    out = np.empty(samples)
    for k in range(samples):
        r1, q1n, r2, q2n = _coupled_env_step(env, e1, e2, rng, seed, k)
        out[k] = env_distance(r1, q1n, r2, q2n)
    return out


def joint_coupling_cost(
    x1: np.ndarray,
    e1: EnvironmentState,
    x2: np.ndarray,
    e2: EnvironmentState,
    env: EnvDynamics,
    eta: float,
    M: float,
    samples: int,
    seed: int,
) -> tuple[float, float]:
    """Mean and s.e. of the joint-state distance after one coupled step.

    Environment noise is shared across the copies; given the landed
    environments the rating update is coupled as in
    ``coupled_elo_expected_distance`` and enumerated exactly, so only the
    environment noise contributes sampling error.
    """
    rng = stream(seed, "jointcouple")
    vals = np.empty(samples)
    for k in range(samples):
        r1, q1n, r2, q2n = _coupled_env_step(env, e1, e2, rng, seed, k)
        f1 = EnvironmentState(r1, q1n)
        f2 = EnvironmentState(r2, q2n)
        vals[k] = coupled_elo_expected_distance(x1, f1, x2, f2, eta, M) + env_distance(
            r1, q1n, r2, q2n
        )
    se = vals.std(ddof=1) / math.sqrt(samples) if samples > 1 else 0.0
    return float(vals.mean()), float(se)
