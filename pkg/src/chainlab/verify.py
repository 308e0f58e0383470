"""Randomized oracle suites beyond the single-lemma checks.

These drive the cross-implementation comparisons: the transport LP against
the line closed form and metric axioms, the renewal recursion against the
path-enumeration oracle, the halving-chain constants, and the box-simplex
projection against an exhaustive active-set oracle.  Every suite returns a
``CheckResult`` so the command-line verifier can aggregate them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dyadic import halving_grid_model, halving_pair_kappa, tightness_experiment
from .elo import project_zero_sum_box
from .errors import VerificationError
from .instances import random_metric_space, random_model, random_obs, random_simplex
from .lemmas import CheckResult, verify_lemma_suite
from .renewal import PHI_GRID, verify_renewal
from .rng import stream
from .transport import kappa_of_kernel, wasserstein1, wasserstein1_line


def verify_w1_line(seed: int, instances: int = 200, max_atoms: int = 64, tol: float = 1e-8) -> CheckResult:
    """Discrete LP against the CDF-difference closed form on the line."""
    rng = stream(seed, "w1line")
    worst = 0.0
    for _ in range(instances):
        size = int(rng.integers(2, max_atoms + 1))
        points = np.sort(rng.random(size) * 10)
        dist = np.abs(points[:, None] - points[None, :])
        mu = random_simplex(rng, size)
        nu = random_simplex(rng, size)
        lp = wasserstein1(mu, nu, dist).cost
        closed = wasserstein1_line(points, mu, nu)
        worst = max(worst, abs(lp - closed))
    return CheckResult("w1_line_oracle", instances, worst, tol)


def verify_w1_metric(seed: int, instances: int = 100, tol: float = 1e-8) -> CheckResult:
    """Symmetry and triangle inequality of the computed transport cost."""
    rng = stream(seed, "w1metric")
    worst = 0.0
    for _ in range(instances):
        size = int(rng.integers(3, 8))
        space = random_metric_space(rng, size)
        mu, nu, rho = (random_simplex(rng, size) for _ in range(3))
        d_mn = wasserstein1(mu, nu, space.dist).cost
        d_nm = wasserstein1(nu, mu, space.dist).cost
        worst = max(worst, abs(d_mn - d_nm))
        d_mr = wasserstein1(mu, rho, space.dist).cost
        d_rn = wasserstein1(rho, nu, space.dist).cost
        worst = max(worst, d_mn - (d_mr + d_rn))
    return CheckResult("w1_metric_axioms", instances, worst, tol)


def verify_w1_duality(seed: int, instances: int = 100, tol: float = 1e-9) -> CheckResult:
    """cost >= mu(f) - nu(f) for random 1-Lipschitz test functions."""
    rng = stream(seed, "w1dual")
    worst = 0.0
    for _ in range(instances):
        size = int(rng.integers(3, 10))
        space = random_metric_space(rng, size)
        mu = random_simplex(rng, size)
        nu = random_simplex(rng, size)
        cost = wasserstein1(mu, nu, space.dist).cost
        g = rng.standard_normal(size) * 2
        f = (g[None, :] + space.dist).min(axis=1)  # McShane envelope: 1-Lipschitz
        worst = max(worst, float(f @ mu - f @ nu) - cost)
    return CheckResult("w1_duality_lower_bounds", instances, worst, tol)


def verify_renewal_random(seed: int, instances: int = 100, tol: float = 1e-9) -> CheckResult:
    """Renewal inequality and geometric envelope on enumerable instances."""
    rng = stream(seed, "renewal")
    worst = 0.0
    for _ in range(instances):
        size = int(rng.integers(2, 5))
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 3))
        model = random_model(rng, size, n_kernels=min(n, 2), mixing=float(rng.uniform(0, 0.7)))
        obs = random_obs(rng, size, m, max(1, n), complex_entries=bool(rng.integers(0, 2)))
        s = float(rng.uniform(0, 0.1))
        phi = float(PHI_GRID[int(rng.integers(0, len(PHI_GRID)))])
        report = verify_renewal(model, obs, s, phi, n, tol=tol)
        worst = max(worst, report.lhs - report.rhs)
        if not report.close_holds:
            envelope_gap = float(np.max(report.ledger.a - report.close_envelope))
            worst = max(worst, envelope_gap)
    return CheckResult("renewal_inequality", instances, worst, tol)


def verify_halving_curvature(seed: int, instances: int = 100, diameter: float = 1024.0,
                             tol: float = 1e-12) -> CheckResult:
    """The two-atom closed form gives curvature exactly one half on every pair."""
    rng = stream(seed, "halvpairs")
    worst = 0.0
    for _ in range(instances):
        x, y = rng.random(2) * diameter
        while x == y:
            x, y = rng.random(2) * diameter
        worst = max(worst, abs(halving_pair_kappa(float(x), float(y), diameter) - 0.5))
    return CheckResult("halving_pair_curvature", instances, worst, tol)


def verify_halving_grid(levels: int = 4, diameter: float = 1.0, tol: float = 1e-9) -> CheckResult:
    """The exact LP recovers curvature one half on the discretised chain."""
    model = halving_grid_model(diameter, levels)
    kappa = kappa_of_kernel(model.kernel_at(1), model.space.dist)
    return CheckResult("halving_grid_curvature", 1, abs(kappa - 0.5), tol)


def verify_halving_tightness(seed: int, reps: int = 4000) -> CheckResult:
    """Small tightness run: per-path identity plus the 1/3 law within its CI."""
    try:
        report = tightness_experiment(D=1024.0, delta=1.0, L=np.pi, reps=reps, seed=seed)
    except VerificationError:
        return CheckResult("halving_tightness", reps, np.inf, 0.0)
    inside = report.ci_lo <= 1.0 / 3.0 <= report.ci_hi
    violation = 0.0 if inside else abs(report.p_hat - 1.0 / 3.0)
    return CheckResult("halving_tightness", reps, violation, 0.0)


_PATTERN_CACHE: dict[int, np.ndarray] = {}


def _clip_patterns(n: int) -> np.ndarray:
    """All sign patterns in {-1, 0, +1}^n (lower clip / free / upper clip)."""
    if n not in _PATTERN_CACHE:
        grids = np.meshgrid(*([np.array([-1, 0, 1])] * n), indexing="ij")
        _PATTERN_CACHE[n] = np.stack([g.ravel() for g in grids], axis=1)
    return _PATTERN_CACHE[n]


def projection_oracle(y: np.ndarray, M: float) -> np.ndarray:
    """Exhaustive active-set solve of the zero-sum box projection.

    Solves the equality-constrained subproblem for every clip pattern in
    {-M, free, +M}^n at once, keeps KKT-consistent candidates, and returns
    the closest feasible one.  Exponential in n; a test oracle only.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    pats = _clip_patterns(n)
    free = pats == 0
    n_free = free.sum(axis=1)
    offset = M * pats.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = (np.where(free, y[None, :], 0.0).sum(axis=1) + offset) / n_free
    x = np.where(pats == 1, M, np.where(pats == -1, -M, y[None, :] - theta[:, None]))
    slack = y[None, :] - theta[:, None]
    valid = np.where(free, np.abs(slack) <= M + 1e-12, True).all(axis=1)
    valid &= np.where(pats == 1, slack >= M - 1e-12, True).all(axis=1)
    valid &= np.where(pats == -1, slack <= -M + 1e-12, True).all(axis=1)
    # all-clipped patterns: the multiplier disappears; check sum and KKT ranges
    no_free = n_free == 0
    if no_free.any():
        x = np.where(no_free[:, None], M * pats.astype(float), x)
        lo = np.where(pats == -1, y[None, :] + M, -np.inf).max(axis=1)
        hi = np.where(pats == 1, y[None, :] - M, np.inf).min(axis=1)
        ok0 = (np.abs(offset) <= 1e-12) & (lo <= hi + 1e-12)
        valid = np.where(no_free, ok0, valid)
    dists = ((x - y[None, :]) ** 2).sum(axis=1)
    dists[~valid] = np.inf
    return x[int(np.argmin(dists))]


def verify_projection(seed: int, instances: int = 1000, tol: float = 1e-6) -> CheckResult:
    """Breakpoint projection against the active-set oracle, plus feasibility."""
    rng = stream(seed, "proj")
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(1, 7))
        M = float(rng.uniform(0.5, 2.0))
        y = rng.standard_normal(n) * float(rng.uniform(0.5, 3.0))
        x = project_zero_sum_box(y, M)
        if abs(x.sum()) > 1e-10 or np.abs(x).max(initial=0.0) > M + 1e-10:
            worst = max(worst, 1.0)
        again = project_zero_sum_box(x, M)
        worst = max(worst, float(np.abs(again - x).max(initial=0.0)))
        oracle = projection_oracle(y, M)
        worst = max(worst, float(np.abs(x - oracle).max()))
    return CheckResult("zero_sum_box_projection", instances, worst, tol)


@dataclass
class VerificationReport:
    seed: int
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


def run_full_verification(
    seed: int,
    lemma_instances: int = 120,
    renewal_instances: int = 100,
    w1_instances: int = 200,
    projection_instances: int = 1000,
) -> VerificationReport:
    """Every randomized suite in one report (the `lab verify` payload)."""
    results = list(verify_lemma_suite(seed, lemma_instances).results)
    results.append(verify_renewal_random(seed, renewal_instances))
    results.append(verify_w1_line(seed, w1_instances))
    results.append(verify_w1_metric(seed, max(50, w1_instances // 2)))
    results.append(verify_w1_duality(seed, max(50, w1_instances // 2)))
    results.append(verify_halving_curvature(seed))
    results.append(verify_halving_grid())
    results.append(verify_halving_tightness(seed))
    results.append(verify_projection(seed, projection_instances))
    return VerificationReport(seed=seed, results=results)
