"""Inhomogeneous spectral quantities: one-step second singular values.

sigma_t is the norm of the kernel P_t as an operator from mean-zero
L2(mu_t) to mean-zero L2(mu_{t-1}).  On a finite space this is the largest
singular value of the mass-weighted kernel with the constant direction
projected out.  The reciprocal of the worst partial sum of sigma products
is the effective gap used by the spectral tail bound.
"""

from __future__ import annotations

import warnings
from typing import Optional

import numpy as np

from .chain import FiniteMarkovModel, distributions
from .errors import NumericalError
from .transport import WEAK_RATE, EffectiveRate


def sigma_t(model: FiniteMarkovModel, t: int, mus: Optional[np.ndarray] = None) -> float:
    """Largest singular value of P_t on mean-zero functions.

    Marginals are taken from exact propagation.  Zero-mass states at either
    time are dropped before the weighted SVD: they carry no L2 mass and
    would make the weighting singular.
    """
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if mus is None:
        mus = distributions(model, t)
    mu_prev = mus[t - 1]
    mu_cur = mus[t]
    p = model.kernel_at(t)
    rows = np.flatnonzero(mu_prev > 0)
    cols = np.flatnonzero(mu_cur > 0)
    if cols.size == 0 or rows.size == 0:
        raise NumericalError(f"empty support at step {t}")
    # mass reaching a dropped column from a kept row would contradict propagation
    leaked = p[np.ix_(rows, np.flatnonzero(mu_cur == 0))]
    if leaked.size and (mu_prev[rows] @ leaked).max(initial=0.0) > 1e-15:
        raise NumericalError(f"state outside supp(mu_{t}) is reachable at step {t}")
    b = np.sqrt(mu_prev[rows])[:, None] * p[np.ix_(rows, cols)] / np.sqrt(mu_cur[cols])[None, :]
    u = np.sqrt(mu_cur[cols])
    b_centered = b - np.outer(b @ u, u)
    try:
        s = np.linalg.svd(b_centered, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed for sigma at step {t}") from exc
    return float(s[0]) if s.size else 0.0


def sigma_profile(model: FiniteMarkovModel, n: int) -> np.ndarray:
    """sigma_1..sigma_n from a single propagation pass."""
    mus = distributions(model, n)
    return np.array([sigma_t(model, t, mus=mus) for t in range(1, n + 1)])


def effective_lambda(sigmas: np.ndarray) -> EffectiveRate:
    """Largest lambda with sum_{k=1..t+1} prod_{l=k..t} sigma_l <= 1/lambda.

    Computed via a_t = sigma_t * a_{t-1} + 1 with a_0 = 1; the value is the
    reciprocal of the worst partial sum and lies in (0, 1].
    """
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.min(initial=0.0) < -1e-12 or sigmas.max(initial=0.0) > 1 + 1e-9:
        raise ValueError("sigma values must lie in [0, 1]")
    worst = 1.0
    a = 1.0
    for s in np.clip(sigmas, 0.0, None):
        a = s * a + 1.0
        worst = max(worst, a)
    value = 1.0 / worst
    weak = value < WEAK_RATE
    if weak:
        warnings.warn(f"effective spectral gap {value:.3e} is degenerate", stacklevel=2)
    return EffectiveRate(value, weak)
