"""Closed-form tail bound evaluators and sample-size inversion.

Each evaluator returns the probability bound clamped to [0, 1].  When the
deviation level exceeds the almost-sure ceiling of the centered sum (L*D
for the Lipschitz bound, the operator oscillation for the others), the
event is empty and the evaluator returns 0 with a flag, mirroring the
region split used in the derivations.  Constants are kept in exact closed
form (192/pi^2, 3200/pi^2, 768/pi^2) and evaluated in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

PI = math.pi


class BoundResult(NamedTuple):
    value: float
    event_empty: bool = False


@dataclass
class BoundParams:
    """Scalar inputs consumed by the bound evaluators.

    Unused fields may be left as None; each evaluator names any missing
    parameter it needs.  ``kappa`` is the effective curvature for the
    Lipschitz and granularity bounds but must be the uniform per-step lower
    bound when feeding the oscillation bound.
    """

    m: Optional[int] = None
    n: Optional[int] = None
    eps: Optional[float] = None
    L: Optional[float] = None
    D: Optional[float] = None
    delta_op: Optional[float] = None
    delta_f: Optional[float] = None
    kappa: Optional[float] = None
    lam: Optional[float] = None
    sigma_inf: Optional[float] = None
    kappa_tilde: Optional[float] = None

    def __post_init__(self):
        for name in ("m", "n", "L", "D", "delta_op", "delta_f", "kappa", "lam",
                     "sigma_inf", "kappa_tilde"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"parameter {name} must be positive, got {v}")
        if self.eps is not None and self.eps < 0:
            raise ValueError(f"eps must be nonnegative, got {self.eps}")
        if self.delta_op is not None and self.L is not None and self.D is not None:
            if self.delta_op > self.L * self.D * (1 + 1e-12) + 1e-12:
                raise ValueError(
                    f"delta_op={self.delta_op} exceeds L*D={self.L * self.D}"
                )
        if self.delta_op is not None and self.delta_f is not None:
            if self.delta_f < self.delta_op * (1 - 1e-12) - 1e-12:
                raise ValueError(
                    f"delta_f={self.delta_f} is below delta_op={self.delta_op}"
                )


def _require(p: BoundParams, *names: str) -> None:
    missing = [name for name in names if getattr(p, name) is None]
    if missing:
        raise ValueError(f"missing parameter(s): {', '.join(missing)}")


def _prefactor(m: int) -> float:
    return float(m) ** (2 - PI / 4)


def bound_curv(p: BoundParams) -> BoundResult:
    """Tail bound under positive effective curvature and Lipschitz observables.

    Variance proxy (192/pi^2) L^2 D^2 / kappa; the centered sum is bounded
    by n*L*D almost surely, so the event is empty beyond eps = L*D.
    """
    _require(p, "m", "n", "eps", "L", "D", "kappa")
    ld = p.L * p.D
    if p.eps > ld:
        return BoundResult(0.0, True)
    v2 = (192.0 / PI**2) * ld**2 / p.kappa
    return BoundResult(min(1.0, _prefactor(p.m) * math.exp(-p.n * p.eps**2 / (2 * v2))))


def bound_curv_diam(p: BoundParams) -> BoundResult:
    """Oscillation-refined curvature bound with logarithmic diameter dependence.

    Requires a uniform per-step curvature lower bound in ``kappa``; the
    variance proxy is (3200/pi^2) delta_op^2 (1 + log(L*D/delta_op)) / kappa.
    """
    _require(p, "m", "n", "eps", "L", "D", "delta_op", "kappa")
    ld = p.L * p.D
    if p.delta_op > ld * (1 + 1e-12):
        raise ValueError(f"delta_op={p.delta_op} exceeds L*D={ld}")
    if p.eps > p.delta_op:
        return BoundResult(0.0, True)
    vbar2 = (3200.0 / PI**2) * p.delta_op**2 / p.kappa * (1 + math.log(ld / p.delta_op))
    return BoundResult(min(1.0, _prefactor(p.m) * math.exp(-p.n * p.eps**2 / (2 * vbar2))))


def bound_spec(p: BoundParams) -> BoundResult:
    """Tail bound under the inhomogeneous spectral gap and bounded oscillation.

    Variance proxy (768/pi^2) delta_op delta_f / lambda.
    """
    _require(p, "m", "n", "eps", "delta_op", "delta_f", "lam")
    if p.delta_f < p.delta_op * (1 - 1e-12):
        raise ValueError(f"delta_f={p.delta_f} is below delta_op={p.delta_op}")
    if p.eps > p.delta_op:
        return BoundResult(0.0, True)
    vb2 = (768.0 / PI**2) * p.delta_op * p.delta_f / p.lam
    return BoundResult(min(1.0, _prefactor(p.m) * math.exp(-p.n * p.eps**2 / (2 * vb2))))


def bound_ollivier_point(p: BoundParams) -> BoundResult:
    """Single-time bound: deviation of F_T(X_T) from its mean in operator norm.

    2m exp(-eps^2 kappa / (8 L^2 sigma_inf^2)), with sigma_inf the largest
    one-step support diameter and kappa the effective curvature.
    """
    _require(p, "m", "eps", "L", "sigma_inf", "kappa")
    denom = 8 * p.L**2 * p.sigma_inf**2
    if denom == 0:
        return BoundResult(1.0 if p.eps == 0 else 0.0)
    return BoundResult(min(1.0, 2 * p.m * math.exp(-p.eps**2 * p.kappa / denom)))


def bound_ollivier_avg(p: BoundParams) -> BoundResult:
    """Running-average bound from the windowed effective curvature.

    2m exp(-kappa_tilde^2 T eps^2 / (8 L^2 sigma_inf^2)) with T = n.
    """
    _require(p, "m", "n", "eps", "L", "sigma_inf", "kappa_tilde")
    denom = 8 * p.L**2 * p.sigma_inf**2
    if denom == 0:
        return BoundResult(1.0 if p.eps == 0 else 0.0)
    return BoundResult(min(1.0, 2 * p.m * math.exp(-p.kappa_tilde**2 * p.n * p.eps**2 / denom)))


_EVALUATORS = {
    "curv": bound_curv,
    "curv_diam": bound_curv_diam,
    "spec": bound_spec,
    "ollivier_avg": bound_ollivier_avg,
}


def invert_for_n(kind: str, p: BoundParams, delta: float) -> int:
    """Smallest horizon n with bound(n) <= delta, by closed-form solve + ceil.

    ``eps`` must lie inside the sub-Gaussian window of the chosen bound
    (eps <= L*D for 'curv', eps <= delta_op for 'curv_diam' and 'spec');
    outside it the inversion is meaningless and an error names the window.
    """
    if kind not in _EVALUATORS:
        raise ValueError(f"unknown bound kind {kind!r}; choose from {sorted(_EVALUATORS)}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    evaluator = _EVALUATORS[kind]
    _require(p, "eps")
    if p.eps <= 0:
        raise ValueError("eps must be positive to invert for n")
    if kind == "curv":
        _require(p, "L", "D")
        if p.eps > p.L * p.D:
            raise ValueError(
                f"eps={p.eps} outside sub-Gaussian window (eps <= L*D = {p.L * p.D})"
            )
    elif kind in ("curv_diam", "spec"):
        _require(p, "delta_op")
        if p.eps > p.delta_op:
            raise ValueError(
                f"eps={p.eps} outside sub-Gaussian window (eps <= delta_op = {p.delta_op})"
            )

    def value_at(n: int) -> float:
        return evaluator(replace(p, n=n)).value

    if kind == "curv":
        rate = p.eps**2 / (2 * (192.0 / PI**2) * (p.L * p.D) ** 2 / p.kappa)
        log_pre = (2 - PI / 4) * math.log(p.m)
    elif kind == "curv_diam":
        vbar2 = (3200.0 / PI**2) * p.delta_op**2 / p.kappa * (1 + math.log(p.L * p.D / p.delta_op))
        rate = p.eps**2 / (2 * vbar2)
        log_pre = (2 - PI / 4) * math.log(p.m)
    elif kind == "spec":
        vb2 = (768.0 / PI**2) * p.delta_op * p.delta_f / p.lam
        rate = p.eps**2 / (2 * vb2)
        log_pre = (2 - PI / 4) * math.log(p.m)
    else:
        rate = p.kappa_tilde**2 * p.eps**2 / (8 * p.L**2 * p.sigma_inf**2)
        log_pre = math.log(2 * p.m)

    n = max(1, math.ceil((log_pre - math.log(delta)) / rate))
    while n > 1 and value_at(n - 1) <= delta:
        n -= 1
    while value_at(n) > delta:
        n += 1
    return n


class PointTrackingBound(NamedTuple):
    burn_in: int
    radius: float
    prob: float


class AverageTrackingBound(NamedTuple):
    min_horizon: int
    radius: float


def elo_point_bound(
    eps: float,
    support_diam: float,
    kappa: float,
    eta: float,
    drift: float,
    n_players: int,
    skill_cap: float,
    C: Optional[float] = None,
) -> PointTrackingBound:
    """Single-time tracking guarantee for projected online ratings.

    ``C`` is the unpinned universal constant of the statement and must be
    supplied by the caller (experiments sweep it; no default is invented).
    Returns the burn-in horizon, the deviation radius
    sqrt(drift/kappa) + (1+eps) sqrt(2 eta^2/kappa) + C eps B / sqrt(kappa)
    with B the one-step support diameter of the joint chain, and the tail
    probability 2 exp(-eps^2).
    """
    if C is None:
        raise ValueError("universal constant C is required (swept by experiments)")
    if min(eps, kappa, eta) <= 0 or C <= 0:
        raise ValueError("eps, kappa, eta, C must be positive")
    burn_in = math.ceil(C / kappa * math.log(n_players * skill_cap / (eps * eta)))
    radius = (
        math.sqrt(drift / kappa)
        + (1 + eps) * math.sqrt(2 * eta**2 / kappa)
        + C * eps * support_diam / math.sqrt(kappa)
    )
    return PointTrackingBound(burn_in, radius, 2 * math.exp(-(eps**2)))


def elo_avg_bound(
    eps: float,
    delta: float,
    eta: float,
    kappa: float,
    drift: float,
    n_players: int,
    skill_cap: float,
    C: Optional[float] = None,
) -> AverageTrackingBound:
    """Window-averaged tracking guarantee for projected online ratings.

    With probability at least 1 - delta the window-averaged rating error
    stays within sqrt(drift/kappa) + (1+eps) sqrt(2 eta^2/kappa), provided
    the window length is at least C eps^-2 eta^-2 M^2 n log(n/delta).
    """
    if C is None:
        raise ValueError("universal constant C is required (swept by experiments)")
    if min(eps, kappa, eta) <= 0 or C <= 0:
        raise ValueError("eps, kappa, eta, C must be positive")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    min_horizon = math.ceil(
        C * eps**-2 * eta**-2 * skill_cap**2 * n_players * math.log(n_players / delta)
    )
    radius = math.sqrt(drift / kappa) + (1 + eps) * math.sqrt(2 * eta**2 / kappa)
    return AverageTrackingBound(min_horizon, radius)
