"""Exact discrete Wasserstein-1 transport and one-step contraction rates.

The transport LP is solved exactly (to solver tolerance ~1e-9) with HiGHS
on the positive-mass supports of the two marginals, which keeps every
instance tiny even when the ambient space is large.  Closed forms for
measures on the real line and for two-point spaces serve as independent
oracles in the test suite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .chain import FiniteMarkovModel
from .errors import NumericalError

MASS_TOL = 1e-8
KAPPA_REJECT = -1e-6
WEAK_RATE = 1e-6


@dataclass
class TransportPlan:
    """An optimal coupling and its transport cost."""

    coupling: np.ndarray
    cost: float


class EffectiveRate(NamedTuple):
    """An aggregate contraction rate plus a flag for near-degenerate values."""

    value: float
    weak: bool


def wasserstein1(mu: np.ndarray, nu: np.ndarray, dist: np.ndarray) -> TransportPlan:
    """Exact W1 between two distributions on a common finite metric.

    Solves the transportation LP restricted to the supports of ``mu`` and
    ``nu``; returns the optimal coupling embedded back on the full index
    set.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    dist = np.asarray(dist, dtype=float)
    n = dist.shape[0]
    if dist.shape != (n, n) or mu.shape != (n,) or nu.shape != (n,):
        raise ValueError(
            f"dimension mismatch: dist {dist.shape}, mu {mu.shape}, nu {nu.shape}"
        )
    if mu.min(initial=0.0) < -1e-12 or nu.min(initial=0.0) < -1e-12:
        raise ValueError("marginals must be nonnegative")
    if abs(mu.sum() - nu.sum()) > MASS_TOL:
        raise ValueError(
            f"infeasible marginals: masses {mu.sum():.12f} and {nu.sum():.12f} differ"
        )
    src = np.flatnonzero(mu > 0)
    dst = np.flatnonzero(nu > 0)
    plan = np.zeros((n, n))
    if src.size == 0 or dst.size == 0:
        return TransportPlan(plan, 0.0)
    if src.size == 1:
        plan[src[0], dst] = nu[dst]
        return TransportPlan(plan, float(nu[dst] @ dist[src[0], dst]))
    if dst.size == 1:
        plan[src, dst[0]] = mu[src]
        return TransportPlan(plan, float(mu[src] @ dist[src, dst[0]]))

    k, l = src.size, dst.size
    cost = dist[np.ix_(src, dst)].ravel()
    row_marg = sparse.kron(sparse.eye(k, format="csr"), np.ones((1, l)), format="csr")
    col_marg = sparse.kron(np.ones((1, k)), sparse.eye(l, format="csr"), format="csr")
    a_eq = sparse.vstack([row_marg, col_marg], format="csr")
    b_eq = np.concatenate([mu[src], nu[dst]])
    res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if not res.success:
        raise NumericalError(f"transport LP failed: {res.message}")
    plan[np.ix_(src, dst)] = np.clip(res.x.reshape(k, l), 0.0, None)
    return TransportPlan(plan, float(res.fun))


def wasserstein1_line(points: np.ndarray, mu: np.ndarray, nu: np.ndarray) -> float:
    """Closed-form W1 on the real line: integral of |F_mu - F_nu|."""
    points = np.asarray(points, dtype=float)
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if points.shape != mu.shape or points.shape != nu.shape:
        raise ValueError("points and marginals must share a shape")
    order = np.argsort(points, kind="stable")
    x = points[order]
    cdf_gap = np.cumsum(mu[order] - nu[order])
    return float(np.abs(cdf_gap[:-1]) @ np.diff(x))


def ollivier_kappa(model: FiniteMarkovModel, t: int) -> float:
    """One-step coarse curvature: 1 minus the worst W1 contraction ratio.

    Exact minimum over all unordered state pairs; pairs at zero distance
    are skipped.
    """
    p = model.kernel_at(t)
    return kappa_of_kernel(p, model.space.dist)


def kappa_of_kernel(p: np.ndarray, dist: np.ndarray) -> float:
    n = dist.shape[0]
    worst = 0.0
    seen_pair = False
    for i in range(n):
        for j in range(i + 1, n):
            d = dist[i, j]
            if d <= 0:
                continue
            seen_pair = True
            worst = max(worst, wasserstein1(p[i], p[j], dist).cost / d)
    if not seen_pair:
        return 1.0
    return 1.0 - worst


def kappa_profile(model: FiniteMarkovModel, n: int) -> "CurvatureProfile":
    """Per-step curvatures kappa_1..kappa_n, deduplicating repeated kernels."""
    cache: dict[bytes, float] = {}
    kappas = np.empty(n)
    for t in range(1, n + 1):
        p = model.kernel_at(t)
        key = p.tobytes()
        if key not in cache:
            cache[key] = kappa_of_kernel(p, model.space.dist)
        kappas[t - 1] = cache[key]
    return CurvatureProfile(kappas)


class CurvatureProfile:
    """A sequence of per-step curvatures, clamped into [0, 1].

    Tiny negative values (floating error from the LP) are clamped to zero
    with a warning; anything below -1e-6 is rejected as a modeling error.
    """

    def __init__(self, kappas: np.ndarray):
        kappas = np.asarray(kappas, dtype=float)
        if kappas.ndim != 1:
            raise ValueError("curvature profile must be one-dimensional")
        low = kappas.min(initial=0.0)
        if low < KAPPA_REJECT:
            raise ValueError(f"curvature {low:.3e} is too negative to be floating error")
        if low < 0:
            warnings.warn(f"clamping curvature {low:.3e} to 0", stacklevel=2)
        if kappas.max(initial=0.0) > 1 + 1e-12:
            raise ValueError(f"curvature exceeds 1: {kappas.max():.3e}")
        self.kappas = np.clip(kappas, 0.0, 1.0)

    def __len__(self) -> int:
        return len(self.kappas)


def effective_kappa(profile: CurvatureProfile) -> EffectiveRate:
    """Largest kappa with 1 + sum_k prod_{l=k..t}(1-kappa_l) <= 1/kappa for all t.

    Computed by the recursion s_t = (1-kappa_t)(1 + s_{t-1}); the value is
    the reciprocal of the worst partial sum.  Flagged weak below 1e-6 (e.g.
    a long run of zero-curvature steps).
    """
    u = 1.0 - profile.kappas
    worst = 1.0
    s = 0.0
    for ut in u:
        s = ut * (1.0 + s)
        worst = max(worst, 1.0 + s)
    value = 1.0 / worst
    weak = value < WEAK_RATE
    if weak:
        warnings.warn(f"effective curvature {value:.3e} is degenerate", stacklevel=2)
    return EffectiveRate(value, weak)


def effective_kappa_tilde(profile: CurvatureProfile) -> EffectiveRate:
    """Windowed variant: the sums run over every window s..t, products anchored at s."""
    u = 1.0 - profile.kappas
    n = len(u)
    worst = 1.0
    for s in range(n):
        partial = 1.0 + np.cumsum(np.cumprod(u[s:]))
        worst = max(worst, float(partial.max()))
    value = 1.0 / worst
    weak = value < WEAK_RATE
    if weak:
        warnings.warn(f"windowed effective curvature {value:.3e} is degenerate", stacklevel=2)
    return EffectiveRate(value, weak)


def tilted_sum(profile: CurvatureProfile, kappa: float, n: int) -> float:
    """sum_i exp(pi*kappa/24)^(i-1) * prod_{l=n-i+2..n}(1-kappa_l).

    With kappa the effective curvature of the profile this stays below
    3/kappa; the geometric tilt never outruns the contraction.
    """
    if n < 1 or n > len(profile.kappas):
        raise ValueError(f"n must be in [1, {len(profile.kappas)}], got {n}")
    u = 1.0 - profile.kappas[:n]
    # products with i-1 factors, taken backwards from step n
    prods = np.concatenate([[1.0], np.cumprod(u[::-1])[: n - 1]])
    tilt = np.exp(np.pi * kappa / 24.0) ** np.arange(n)
    return float(tilt @ prods)
