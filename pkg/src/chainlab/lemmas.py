"""Randomized property suite for the inequality layer.

Each check evaluates one inequality on at least a hundred random
instances at its stated tolerance and reports the worst violation.  The
suite is the machine-checkable core of the derivation: matrix Hoeffding
in the Loewner order, exponential perturbation bounds, the Lipschitz
product rule, the centered-function diameter bound, the scalar-to-matrix
Lipschitz and L2 lifts, contraction of the weighted kernel, the tilted
geometric sum, and the coefficient envelopes of the renewal recursion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm as dense_expm

from .chain import distributions, lipschitz_op
from .hermitian import expm_scaled, lambda_max, op_norm
from .instances import random_hermitian, random_metric_space, random_model, random_obs, random_simplex
from .renewal import renewal_coefficients
from .rng import stream
from .spectral import sigma_t
from .transport import CurvatureProfile, effective_kappa, ollivier_kappa, tilted_sum


@dataclass
class CheckResult:
    name: str
    instances: int
    max_violation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance


@dataclass
class SuiteReport:
    seed: int
    results: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


def check_matrix_hoeffding(rng, instances, tol=1e-10) -> CheckResult:
    """E exp(sY) <= cosh(s R) I in the Loewner order for bounded centered Y."""
    worst = 0.0
    for _ in range(instances):
        m = int(rng.integers(1, 4))
        atoms = int(rng.integers(2, 6))
        ys = [random_hermitian(rng, m) for _ in range(atoms)]
        w = random_simplex(rng, atoms)
        mean = sum(wi * yi for wi, yi in zip(w, ys))
        ys = [y - mean for y in ys]
        r = max(op_norm(y) for y in ys)
        s = float(rng.uniform(-2, 2))
        mgf = sum(wi * expm_scaled(yi, s) for wi, yi in zip(w, ys))
        worst = max(worst, lambda_max(mgf - np.cosh(s * r) * np.eye(m), tol=1e-8))
    return CheckResult("matrix_hoeffding_loewner", instances, worst, tol)


def check_exp_bounds(rng, instances, tol=1e-9) -> CheckResult:
    """Norm and perturbation bounds for matrix exponentials (relative slack)."""
    worst = 0.0
    for _ in range(instances):
        m = int(rng.integers(1, 5))
        a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        b = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        ea, eb = dense_expm(a), dense_expm(b)
        grow = np.exp(max(op_norm(a), op_norm(b)))
        worst = max(worst, (op_norm(ea) - np.exp(op_norm(a))) / np.exp(op_norm(a)))
        rhs_op = grow * op_norm(a - b)
        worst = max(worst, (op_norm(ea - eb) - rhs_op) / (1 + rhs_op))
        rhs_f = grow * np.sqrt((np.abs(a - b) ** 2).sum())
        lhs_f = np.sqrt((np.abs(ea - eb) ** 2).sum())
        worst = max(worst, (lhs_f - rhs_f) / (1 + rhs_f))
    return CheckResult("exp_perturbation_bounds", instances, worst, tol)


def check_lip_product(rng, instances, tol=1e-9) -> CheckResult:
    """Lip(GH) <= |G|_inf Lip(H) + Lip(G) |H|_inf on random finite metrics."""
    worst = 0.0
    for _ in range(instances):
        size = int(rng.integers(2, 6))
        m = int(rng.integers(1, 4))
        space = random_metric_space(rng, size)
        g = rng.standard_normal((size, m, m)) + 1j * rng.standard_normal((size, m, m))
        h = rng.standard_normal((size, m, m)) + 1j * rng.standard_normal((size, m, m))
        gh = np.einsum("sij,sjk->sik", g, h)

        def lip(vals):
            best = 0.0
            for i in range(size):
                for j in range(i + 1, size):
                    d = space.dist[i, j]
                    if d > 0:
                        best = max(best, op_norm(vals[i] - vals[j]) / d)
            return best

        sup_g = max(op_norm(x) for x in g)
        sup_h = max(op_norm(x) for x in h)
        rhs = sup_g * lip(h) + lip(g) * sup_h
        worst = max(worst, (lip(gh) - rhs) / (1 + rhs))
    return CheckResult("lipschitz_product_rule", instances, worst, tol)


def check_diam_center(rng, instances, tol=1e-9) -> CheckResult:
    """Centering kills no Lipschitz constant and bounds the sup norm by D*Lip."""
    worst = 0.0
    for _ in range(instances):
        size = int(rng.integers(2, 7))
        space = random_metric_space(rng, size)
        obs = random_obs(rng, size, int(rng.integers(1, 4)), 1, complex_entries=True)
        mu = random_simplex(rng, size)
        vals = obs.at(1)
        mean = np.einsum("s,sij->ij", mu, vals)
        centered = vals - mean
        lip = lipschitz_op(obs, space, 1)
        sup_centered = max(op_norm(x) for x in centered)
        worst = max(worst, (sup_centered - space.diameter * lip) / (1 + space.diameter * lip))
        cobs = type(obs).from_arrays(centered[None, ...], periodic=True)
        lip_centered = lipschitz_op(cobs, space, 1)
        worst = max(worst, abs(lip_centered - lip) / (1 + lip))
    return CheckResult("centered_diameter_bound", instances, worst, tol)


def check_lip_lift(rng, instances, tol=1e-9) -> CheckResult:
    """Matrix functions contract under the kernel at the measured curvature rate."""
    worst = 0.0
    for _ in range(instances):
        size = int(rng.integers(2, 5))
        model = random_model(rng, size, mixing=float(rng.uniform(0.2, 0.8)))
        kappa = ollivier_kappa(model, 1)
        obs = random_obs(rng, size, int(rng.integers(1, 4)), 1, complex_entries=True)
        vals = obs.at(1)
        smoothed = np.einsum("xy,yij->xij", model.kernel_at(1), vals)
        sobs = type(obs).from_arrays(smoothed[None, ...], periodic=True)
        lhs = lipschitz_op(sobs, model.space, 1)
        rhs = (1 - kappa) * lipschitz_op(obs, model.space, 1)
        worst = max(worst, (lhs - rhs) / (1 + rhs))
    return CheckResult("lipschitz_lift", instances, worst, tol)


def check_l2_lift(rng, instances, tol=1e-9) -> CheckResult:
    """|P_t F|_{2,mu_{t-1}} <= sigma_t |F|_{2,mu_t} for centered matrix F."""
    worst = 0.0
    for _ in range(instances):
        size = int(rng.integers(2, 6))
        t = int(rng.integers(1, 4))
        model = random_model(rng, size, n_kernels=t)
        mus = distributions(model, t)
        sig = sigma_t(model, t, mus=mus)
        m = int(rng.integers(1, 4))
        vals = np.stack([random_hermitian(rng, m) for _ in range(size)])
        vals = vals - np.einsum("s,sij->ij", mus[t], vals)
        smoothed = np.einsum("xy,yij->xij", model.kernel_at(t), vals)
        lhs = np.sqrt(mus[t - 1] @ (np.abs(smoothed) ** 2).sum(axis=(1, 2)))
        rhs = sig * np.sqrt(mus[t] @ (np.abs(vals) ** 2).sum(axis=(1, 2)))
        worst = max(worst, (lhs - rhs) / (1 + rhs))
    return CheckResult("l2_lift", instances, worst, tol)


def check_sigma_bounded(rng, instances, tol=1e-12) -> CheckResult:
    """One-step second singular values never exceed 1."""
    worst = -np.inf
    for _ in range(instances):
        size = int(rng.integers(2, 6))
        t = int(rng.integers(1, 4))
        model = random_model(rng, size, n_kernels=min(t, 2))
        worst = max(worst, sigma_t(model, t) - 1.0)
    return CheckResult("sigma_bounded_by_one", instances, max(worst, 0.0), tol)


def check_tilted_sum(rng, instances, tol=1e-9) -> CheckResult:
    """The tilted geometric sum stays below 3/kappa at the effective rate."""
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(1, 51))
        profile = CurvatureProfile(rng.random(n))
        kappa = effective_kappa(profile).value
        worst = max(worst, tilted_sum(profile, kappa, n) - 3.0 / kappa)
    return CheckResult("tilted_sum_bound", instances, worst, tol)


def check_coefficient_bounds(rng, instances, tol=1e-9) -> CheckResult:
    """Measured renewal coefficients against their closed-form envelopes.

    Valid inside the window s <= 1/(L D): the head coefficient obeys
    exp(s^2 L^2 D^2 / 2) and the tail ones the tilted product envelope
    driven by the per-step curvatures.
    """
    worst = 0.0
    for _ in range(instances):
        size = int(rng.integers(2, 5))
        n = int(rng.integers(2, 5))
        model = random_model(rng, size, n_kernels=min(n, 2), mixing=float(rng.uniform(0.4, 0.9)), min_kappa=0.0)
        m = int(rng.integers(1, 3))
        obs = random_obs(rng, size, m, n, complex_entries=False)
        space = model.space
        big_l = max(lipschitz_op(obs, space, t) for t in range(1, n + 1))
        ld = big_l * space.diameter
        if ld <= 0:
            continue
        s = float(rng.uniform(0.05, 1.0)) / ld
        phi = float(rng.uniform(-np.pi / 2, np.pi / 2))
        kappas = np.array([ollivier_kappa(model, t) for t in range(1, n + 1)])
        led = renewal_coefficients(model, obs, s, phi, n)
        head_env = np.exp(s**2 * ld**2 / 2)
        worst = max(worst, (led.b[0] - head_env) / (1 + head_env))
        for i in range(2, n + 1):
            env = 2 * s**2 * ld**2
            for ell in range(n - i + 2, n + 1):
                env *= np.exp(2 * s * ld) * (1 - kappas[ell - 1])
            worst = max(worst, (led.b[i - 1] - env) / (1 + env))
    return CheckResult("renewal_coefficient_envelopes", instances, worst, tol)


_CHECKS = (
    check_matrix_hoeffding,
    check_exp_bounds,
    check_lip_product,
    check_diam_center,
    check_lip_lift,
    check_l2_lift,
    check_sigma_bounded,
    check_tilted_sum,
    check_coefficient_bounds,
)


def verify_lemma_suite(seed: int, instances: int = 120) -> SuiteReport:
    """Run every randomized inequality check; failures carry the seed."""
    results = []
    for check in _CHECKS:
        rng = stream(seed, "lemmas", check.__name__)
        results.append(check(rng, instances))
    return SuiteReport(seed=seed, results=results)
