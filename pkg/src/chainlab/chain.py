"""Finite-state time-inhomogeneous Markov models and their exact statistics.

States are integer indices into an explicit distance matrix; kernels may be
an explicit list (bounded horizon) or a rule ``t -> kernel`` (unbounded).
All distribution-level quantities (marginals, observable means, Lipschitz
constants, oscillations, support granularity) are computed exactly by pair
or support enumeration, which is what makes this layer usable as an oracle
for the Monte Carlo code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import HorizonError
from .hermitian import as_hermitian, op_norm
from .rng import stream

KERNEL_ROW_TOL = 1e-12
TRIANGLE_TOL = 1e-9


class FiniteMetricSpace:
    """A finite point set carrying an explicit metric matrix."""

    def __init__(self, dist: np.ndarray, validate_triangle: bool = True):
        dist = np.array(dist, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {dist.shape}")
        if np.abs(dist - dist.T).max(initial=0.0) > TRIANGLE_TOL:
            raise ValueError("distance matrix is not symmetric")
        dist = (dist + dist.T) / 2
        if np.abs(np.diag(dist)).max(initial=0.0) > 1e-12:
            raise ValueError("distance matrix has a nonzero diagonal")
        np.fill_diagonal(dist, 0.0)
        if dist.min(initial=0.0) < 0:
            raise ValueError("distances must be nonnegative")
        if validate_triangle:
            for k in range(dist.shape[0]):
                slack = dist - (dist[:, k, None] + dist[None, k, :])
                if slack.max(initial=0.0) > TRIANGLE_TOL:
                    i, j = np.unravel_index(np.argmax(slack), slack.shape)
                    raise ValueError(
                        f"triangle inequality violated at ({i},{k},{j}) by {slack[i, j]:.3e}"
                    )
        self.dist = dist

    @property
    def size(self) -> int:
        return self.dist.shape[0]

    @property
    def diameter(self) -> float:
        return float(self.dist.max(initial=0.0))


def check_kernel(p: np.ndarray, size: int) -> np.ndarray:
    """Validate a row-stochastic kernel and return it as float array."""
    p = np.asarray(p, dtype=float)
    if p.shape != (size, size):
        raise ValueError(f"kernel must be {size}x{size}, got {p.shape}")
    if p.min(initial=0.0) < -1e-14:
        raise ValueError(f"kernel has a negative entry: {p.min():.3e}")
    row_err = np.abs(p.sum(axis=1) - 1.0).max(initial=0.0)
    if row_err > KERNEL_ROW_TOL:
        raise ValueError(f"kernel rows must sum to 1 (max deviation {row_err:.3e})")
    return np.clip(p, 0.0, None)


KernelSpec = Union[Sequence[np.ndarray], Callable[[int], np.ndarray]]


class FiniteMarkovModel:
    """Initial distribution plus a (possibly time-varying) kernel sequence."""

    def __init__(
        self,
        space: FiniteMetricSpace,
        mu0: np.ndarray,
        kernels: KernelSpec,
        horizon: Optional[int] = None,
        validate: bool = True,
    ):
        self.space = space
        mu0 = np.asarray(mu0, dtype=float)
        if mu0.shape != (space.size,):
            raise ValueError(f"mu0 must have length {space.size}, got {mu0.shape}")
        if mu0.min(initial=0.0) < -1e-14 or abs(mu0.sum() - 1.0) > 1e-12:
            raise ValueError("mu0 must be a probability vector")
        self.mu0 = np.clip(mu0, 0.0, None)
        self.validate = validate
        self._validated_ids: set[int] = set()
        if callable(kernels):
            self._rule = kernels
            self._kernels = None
            self.horizon = horizon
        else:
            self._rule = None
            self._kernels = [np.asarray(k, dtype=float) for k in kernels]
            self.horizon = len(self._kernels) if horizon is None else horizon
            if validate:
                self._kernels = [check_kernel(k, space.size) for k in self._kernels]

    @property
    def size(self) -> int:
        return self.space.size

    def kernel_at(self, t: int) -> np.ndarray:
        """Kernel driving the step from time t-1 to t (t >= 1)."""
        if t < 1:
            raise ValueError(f"time index must be >= 1, got {t}")
        if self._kernels is not None:
            if t > len(self._kernels):
                raise HorizonError(
                    f"kernel sequence has length {len(self._kernels)}, requested t={t}"
                )
            return self._kernels[t - 1]
        if self.horizon is not None and t > self.horizon:
            raise HorizonError(f"model horizon is {self.horizon}, requested t={t}")
        k = np.asarray(self._rule(t), dtype=float)
        if self.validate and id(k) not in self._validated_ids:
            k = check_kernel(k, self.space.size)
            self._validated_ids.add(id(k))
        return k


@dataclass
class Trajectory:
    """A sampled path X_1..X_n plus the stream key that produced it."""

    states: np.ndarray
    key: Optional[tuple] = None


class ObservableSequence:
    """Time-indexed map from states to Hermitian matrices of fixed dimension."""

    def __init__(
        self,
        n_states: int,
        dim: int,
        fn: Callable[[int, int], np.ndarray],
        horizon: Optional[int] = None,
    ):
        self.n_states = n_states
        self.dim = dim
        self._fn = fn
        self.horizon = horizon
        self._cache: dict[int, np.ndarray] = {}

    @classmethod
    def from_arrays(cls, arrays: np.ndarray, n_states: Optional[int] = None, periodic: bool = True):
        """Build from an array of shape (T, n_states, m, m).

        With ``periodic`` the sequence repeats with period T; otherwise
        access past T raises a horizon error.  Matrices are symmetrised on
        construction.
        """
        arrays = np.asarray(arrays)
        if arrays.ndim != 4 or arrays.shape[2] != arrays.shape[3]:
            raise ValueError(f"expected shape (T, n_states, m, m), got {arrays.shape}")
        arrays = np.stack(
            [[as_hermitian(a) for a in per_state] for per_state in arrays]
        )
        obj = cls.__new__(cls)
        obj.n_states = arrays.shape[1] if n_states is None else n_states
        obj.dim = arrays.shape[2]
        obj._fn = None
        obj.horizon = None if periodic else arrays.shape[0]
        obj._cache = {}
        obj._arrays = arrays
        obj._periodic = periodic
        return obj

    def at(self, t: int) -> np.ndarray:
        """All observable values at time t as an array of shape (n_states, m, m)."""
        if t < 1:
            raise ValueError(f"time index must be >= 1, got {t}")
        arrays = getattr(self, "_arrays", None)
        if arrays is not None:
            if self._periodic:
                return arrays[(t - 1) % arrays.shape[0]]
            if t > arrays.shape[0]:
                raise HorizonError(f"observable horizon is {arrays.shape[0]}, requested t={t}")
            return arrays[t - 1]
        if self.horizon is not None and t > self.horizon:
            raise HorizonError(f"observable horizon is {self.horizon}, requested t={t}")
        if t not in self._cache:
            vals = np.stack([as_hermitian(self._fn(t, x)) for x in range(self.n_states)])
            if vals.shape[1] != self.dim:
                raise ValueError(f"observable dimension changed at t={t}")
            if len(self._cache) < 64:
                self._cache[t] = vals
            else:
                return vals
        return self._cache[t]

    def eval(self, t: int, x: int) -> np.ndarray:
        return self.at(t)[x]


def distributions(model: FiniteMarkovModel, t: int) -> np.ndarray:
    """Marginals mu_0..mu_t as rows of a (t+1, size) array."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    out = np.empty((t + 1, model.size))
    out[0] = model.mu0
    for k in range(1, t + 1):
        out[k] = out[k - 1] @ model.kernel_at(k)
    return out


def propagate(model: FiniteMarkovModel, t: int) -> np.ndarray:
    """Exact marginals mu_1..mu_t of the chain."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    return distributions(model, t)[1:]


def sample_trajectory(model: FiniteMarkovModel, n: int, rng: np.random.Generator) -> Trajectory:
    """Draw one path X_1..X_n (X_0 from mu0 is consumed internally)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    cum0 = np.cumsum(model.mu0)
    x = int(np.searchsorted(cum0, rng.random(), side="right"))
    states = np.empty(n, dtype=np.int64)
    for t in range(1, n + 1):
        row = model.kernel_at(t)[x]
        x = int(np.searchsorted(np.cumsum(row), rng.random(), side="right"))
        x = min(x, model.size - 1)
        states[t - 1] = x
    return Trajectory(states=states)


def trajectory_stream(seed: int, index: int) -> np.random.Generator:
    """Per-trajectory stream: key (seed, 'traj', index)."""
    return stream(seed, "traj", index)


def exact_means(model: FiniteMarkovModel, obs: ObservableSequence, n: int) -> np.ndarray:
    """E F_t(X_t) for t = 1..n, shape (n, m, m)."""
    mus = propagate(model, n)
    out = np.empty((n, obs.dim, obs.dim), dtype=obs.at(1).dtype)
    for t in range(1, n + 1):
        out[t - 1] = np.einsum("s,sij->ij", mus[t - 1], obs.at(t))
    return out


def exact_mean(model: FiniteMarkovModel, obs: ObservableSequence, t: int) -> np.ndarray:
    """E F_t(X_t) under the exact marginal at time t."""
    return exact_means(model, obs, t)[t - 1]


def centered_sum(traj: Trajectory, obs: ObservableSequence, means: np.ndarray) -> np.ndarray:
    """sum_t (F_t(X_t) - E F_t(X_t)) along one trajectory."""
    n = len(traj.states)
    if len(means) != n:
        raise ValueError(f"means cover {len(means)} steps but trajectory has {n}")
    s = np.zeros((obs.dim, obs.dim), dtype=np.result_type(means.dtype, obs.at(1).dtype))
    for t, x in enumerate(traj.states, start=1):
        s = s + (obs.eval(t, int(x)) - means[t - 1])
    return s


def _pair_op_norms(values: np.ndarray) -> np.ndarray:
    """Operator norms of all pairwise differences, shape (n, n)."""
    n = values.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = op_norm(values[i] - values[j])
    return out


def lipschitz_op(obs: ObservableSequence, space: FiniteMetricSpace, t: int) -> float:
    """Exact operator-norm Lipschitz constant of F_t over all state pairs."""
    diffs = _pair_op_norms(obs.at(t))
    d = space.dist
    mask = d > 0
    if not mask.any():
        return 0.0
    return float((diffs[mask] / d[mask]).max())


def oscillation_op(obs: ObservableSequence, t: int) -> float:
    """Largest operator-norm difference of F_t over state pairs."""
    return float(_pair_op_norms(obs.at(t)).max(initial=0.0))


def oscillation_frob(obs: ObservableSequence, t: int) -> float:
    """Largest Frobenius-norm difference of F_t over state pairs."""
    values = obs.at(t)
    diff = values[:, None] - values[None, :]
    return float(np.sqrt((np.abs(diff) ** 2).sum(axis=(2, 3))).max(initial=0.0))


def granularity(model: FiniteMarkovModel, t: int) -> float:
    """Largest support diameter of any one-step transition at time t."""
    p = model.kernel_at(t)
    d = model.space.dist
    worst = 0.0
    for x in range(model.size):
        idx = np.flatnonzero(p[x] > 0)
        if idx.size > 1:
            worst = max(worst, float(d[np.ix_(idx, idx)].max()))
    return worst
