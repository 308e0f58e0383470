"""The halving chain on an interval and its worst-case tail experiment.

The chain X' = X/2 + (D/2)*B with a fair coin B keeps the uniform law on
[0, D] invariant and contracts distances by exactly one half under the
shared-coin coupling.  Cosine observables at doubling frequencies make
every summand along a path equal to the same function of the starting
point, so the partial sum concentrates like a single bounded variable: the
empirical tail at a quarter of its ceiling sits at 1/3, pinning the
logarithmic diameter factor in the oscillation-refined variance proxy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import FiniteMarkovModel, FiniteMetricSpace
from .errors import VerificationError
from .rng import stream
from .tails import clopper_pearson
from .transport import wasserstein1_line


def frequency_levels(D: float, delta: float, L: float) -> int:
    """Largest level count ell >= 1 with pi * delta * 2^ell <= L * D."""
    if min(D, delta, L) <= 0:
        raise ValueError("D, delta, L must be positive")
    ratio = L * D / (math.pi * delta)
    ell = int(math.floor(math.log2(ratio) + 1e-12))
    if ell < 1:
        raise ValueError(
            f"no admissible level: need pi*delta*2 <= L*D, got L*D/(pi*delta) = {ratio:.4f}"
        )
    return ell


@dataclass
class TightnessReport:
    levels: int
    reps: int
    max_identity_error: float
    identity_tol: float
    p_hat: float
    ci_lo: float
    ci_hi: float
    sum_mean: float
    sum_se: float


def tightness_experiment(D: float, delta: float, L: float, reps: int, seed: int) -> TightnessReport:
    """Simulate the halving chain and check its closed-form tail.

    Each trajectory's partial sum of the cosine observables collapses to
    (delta/2) * ell * cos(2 pi X_0 / D); the identity is enforced to
    1e-6 * ell * delta (each halving costs about one bit), and the
    empirical exceedance of delta*ell/4 is returned with its exact CI.
    """
    ell = frequency_levels(D, delta, L)
    rng = stream(seed, "dyadic")
    x0 = rng.random(reps) * D
    x = x0.copy()
    total = np.zeros(reps)
    for t in range(1, ell + 1):
        coin = rng.random(reps) < 0.5
        x = x / 2 + (D / 2) * coin
        total += (delta / 2) * np.cos(2 * np.pi * (2.0**t) * x / D)
    predicted = (delta / 2) * ell * np.cos(2 * np.pi * x0 / D)
    max_err = float(np.abs(total - predicted).max())
    tol = 1e-6 * ell * delta
    if max_err > tol:
        raise VerificationError(
            f"per-trajectory sum identity violated: {max_err:.3e} > {tol:.3e}"
        )
    hits = int((total > delta * ell / 4).sum())
    lo, hi = clopper_pearson(hits, reps)
    return TightnessReport(
        levels=ell,
        reps=reps,
        max_identity_error=max_err,
        identity_tol=tol,
        p_hat=hits / reps,
        ci_lo=lo,
        ci_hi=hi,
        sum_mean=float(total.mean()),
        sum_se=float(total.std(ddof=1) / np.sqrt(reps)),
    )


def halving_pair_w1(x: float, y: float, D: float) -> float:
    """W1 between the two-atom step laws from x and y, by the line closed form."""
    points = np.array([x / 2, x / 2 + D / 2, y / 2, y / 2 + D / 2])
    mu = np.array([0.5, 0.5, 0.0, 0.0])
    nu = np.array([0.0, 0.0, 0.5, 0.5])
    return wasserstein1_line(points, mu, nu)


def halving_pair_kappa(x: float, y: float, D: float) -> float:
    """Curvature of the halving chain across one pair: exactly one half."""
    if x == y:
        raise ValueError("two distinct points are required")
    return 1.0 - halving_pair_w1(x, y, D) / abs(x - y)


def halving_grid_model(D: float, levels: int, validate: bool = True) -> FiniteMarkovModel:
    """Finite halving chain on the dyadic grid {j D / 2^levels}.

    Since halving a grid point lands midway between grid points for odd
    indices, the image mass is split linearly between the two neighbours;
    the split preserves one-step means exactly, so the shared-coin
    contraction by one half survives discretisation and the exact solver
    recovers curvature 1/2 on every pair.
    """
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    n = 2**levels + 1
    points = np.arange(n) * (D / 2**levels)
    dist = np.abs(points[:, None] - points[None, :])
    half = 2 ** (levels - 1)
    kernel = np.zeros((n, n))
    for j in range(n):
        base, odd = divmod(j, 2)
        frac = 0.5 * odd
        for shift in (0, half):
            kernel[j, base + shift] += 0.5 * (1 - frac)
            if frac:
                kernel[j, base + shift + 1] += 0.5 * frac
    mu0 = np.full(n, 1.0 / n)
    space = FiniteMetricSpace(dist, validate_triangle=validate)
    return FiniteMarkovModel(space, mu0, lambda t: kernel, validate=validate)
