"""Exact small-instance oracle for the trace-product recursion.

The quantity a_j = E tr(M_j M_j*) — with M_j a product of one-parameter
matrix exponentials of the centered observables along the path — is
computed by literal enumeration of all length-j paths, guarded by a path
budget.  The coefficient sequence b_{n,i} comes from the backward
recursion that repeatedly centers the innermost factor; together they are
checked against the renewal inequality a_n <= sum_i b_{n,i} a_{n-i} and
the induced geometric envelope a_n <= m (1 + C s^2)^n.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .chain import FiniteMarkovModel, ObservableSequence, distributions, exact_means
from .errors import EnumerationError
from .hermitian import as_hermitian, expm_scaled, op_norm

PATH_BUDGET = 10**6

# fixed grid of dual phases used by randomized verification runs
PHI_GRID = tuple(np.pi * np.array([0, 1, -1, 2, -2, 3, -3, 4, -4]) / 8.0)


@dataclass
class RenewalLedger:
    """Everything the renewal checks need for one (model, obs, s, phi, n)."""

    n: int
    s: float
    phi: float
    a: np.ndarray                      # a_0..a_n
    b: np.ndarray                      # b_{n,1}..b_{n,n}
    B: list = field(default_factory=list)  # the centered coefficient matrices

    @property
    def gamma(self) -> float:
        return math.cos(self.phi)


def _centered_obs(model, obs, n):
    means = exact_means(model, obs, n)
    return [
        np.asarray([as_hermitian(obs.eval(t, x) - means[t - 1]) for x in range(model.size)])
        for t in range(1, n + 1)
    ]


def _w_matrices(centered, s, phi):
    z = 0.5 * s * cmath.exp(1j * phi)
    return [
        np.asarray([expm_scaled(f, z) for f in per_state])
        for per_state in centered
    ]


def exact_an(
    model: FiniteMarkovModel,
    obs: ObservableSequence,
    s: float,
    phi: float,
    n: int,
    budget: int = PATH_BUDGET,
) -> np.ndarray:
    """a_0..a_n by full path enumeration (observables centered internally).

    a_j sums tr(M_j M_j*) times the path probability over all length-j
    paths; the enumeration refuses instances with more than ``budget``
    paths.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    m = obs.dim
    a = np.zeros(n + 1)
    a[0] = m
    if n == 0:
        return a
    if model.size**n > budget:
        raise EnumerationError(f"{model.size}^{n} paths exceed the budget of {budget}")
    centered = _centered_obs(model, obs, n)
    w = _w_matrices(centered, s, phi)
    mus = distributions(model, n)
    kernels = [model.kernel_at(t) for t in range(1, n + 1)]

    def rec(t: int, x: int, mat: np.ndarray, prob: float) -> None:
        a[t] += prob * float((np.abs(mat) ** 2).sum())
        if t == n:
            return
        row = kernels[t]  # kernel for step t -> t+1
        for y in range(model.size):
            p = row[x, y]
            if p > 0:
                rec(t + 1, y, mat @ w[t][y], prob * p)

    for x1 in range(model.size):
        p1 = mus[1][x1]
        if p1 > 0:
            rec(1, x1, w[0][x1], p1)
    return a


def renewal_coefficients(
    model: FiniteMarkovModel,
    obs: ObservableSequence,
    s: float,
    phi: float,
    n: int,
) -> RenewalLedger:
    """Backward-centered coefficient recursion for horizon n.

    The innermost factor exp(s cos(phi) F~_n) is centered under mu_n; each
    earlier step conjugates the kernel-smoothed remainder by its own
    exponential factor and centers again.  The coefficient matrices come
    out Hermitian up to accumulation (symmetrised at 1e-10), and their
    operator norms are the b_{n,i}.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    centered = _centered_obs(model, obs, n)
    w = _w_matrices(centered, s, phi)
    mus = distributions(model, n)
    gamma = math.cos(phi)

    theta = np.asarray([expm_scaled(f, s * gamma) for f in centered[n - 1]])
    b_mats = []
    b_norms = np.zeros(n)
    big_b = np.einsum("s,sij->ij", mus[n], theta)
    big_b = as_hermitian(big_b, tol=1e-10)
    b_mats.append(big_b)
    b_norms[0] = op_norm(big_b)
    h = theta - big_b
    for i in range(2, n + 1):
        tau = n - i + 1
        kernel = model.kernel_at(tau + 1)
        smoothed = np.einsum("xy,yij->xij", kernel, h)
        w_tau = w[tau - 1]
        theta = np.einsum("xij,xjk,xlk->xil", w_tau, smoothed, w_tau.conj())
        big_b = np.einsum("s,sij->ij", mus[tau], theta)
        big_b = as_hermitian(big_b, tol=1e-10)
        b_mats.append(big_b)
        b_norms[i - 1] = op_norm(big_b)
        h = theta - big_b
    a = np.full(n + 1, np.nan)
    return RenewalLedger(n=n, s=s, phi=phi, a=a, b=b_norms, B=b_mats)


@dataclass
class RenewalReport:
    ledger: RenewalLedger
    lhs: float
    rhs: float
    slack: float
    holds: bool
    close_constant: Optional[float] = None
    close_envelope: Optional[np.ndarray] = None
    close_holds: Optional[bool] = None


def verify_renewal(
    model: FiniteMarkovModel,
    obs: ObservableSequence,
    s: float,
    phi: float,
    n: int,
    tol: float = 1e-9,
    check_close: bool = True,
) -> RenewalReport:
    """Check a_n <= sum_i b_{n,i} a_{n-i} on an exactly enumerable instance.

    With ``check_close`` the per-phase constant C is measured from the
    coefficient sums over all horizons k <= n and the geometric envelope
    a_k <= m (1 + C s^2)^k is verified as well.
    """
    a = exact_an(model, obs, s, phi, n)
    ledger = renewal_coefficients(model, obs, s, phi, n)
    ledger.a = a
    # b_{n,i} pairs with a_{n-i}
    rhs = float(sum(ledger.b[i - 1] * a[n - i] for i in range(1, n + 1)))
    lhs = float(a[n])
    holds = lhs <= rhs + tol
    report = RenewalReport(ledger=ledger, lhs=lhs, rhs=rhs, slack=rhs - lhs, holds=holds)
    if check_close:
        m = obs.dim
        if s > 0:
            worst = 0.0
            for k in range(1, n + 1):
                led_k = renewal_coefficients(model, obs, s, phi, k)
                worst = max(worst, (float(led_k.b.sum()) - 1.0) / s**2)
            c_meas = max(worst, 0.0)
        else:
            c_meas = 0.0
        envelope = m * (1.0 + c_meas * s**2) ** np.arange(n + 1)
        report.close_constant = c_meas
        report.close_envelope = envelope
        report.close_holds = bool(np.all(a <= envelope * (1 + 1e-9) + 1e-9))
    return report
