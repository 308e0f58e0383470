"""Randomized instance generators shared by the verification suites and tests."""

from __future__ import annotations

import numpy as np

from .chain import FiniteMarkovModel, FiniteMetricSpace, ObservableSequence
from .hermitian import hermitian_part
from .transport import kappa_of_kernel


def random_metric_points(rng: np.random.Generator, size: int, box: float = 1.0) -> np.ndarray:
    """Random planar points kept pairwise separated (no degenerate distances)."""
    floor = 0.25 * box / size
    while True:
        points = rng.random((size, 2)) * box
        diff = points[:, None, :] - points[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        if size == 1 or dist[np.triu_indices(size, 1)].min() >= floor:
            return points


def random_metric_space(rng: np.random.Generator, size: int, box: float = 1.0) -> FiniteMetricSpace:
    """Euclidean distances of separated random planar points (a valid metric).

    The generating coordinates are kept on the space as ``points`` for
    observable constructions that want geometry-aware values.
    """
    points = random_metric_points(rng, size, box)
    diff = points[:, None, :] - points[None, :, :]
    space = FiniteMetricSpace(np.sqrt((diff**2).sum(axis=2)))
    space.points = points
    return space


def random_simplex(rng: np.random.Generator, size: int) -> np.ndarray:
    w = rng.exponential(size=size)
    return w / w.sum()


def random_kernel(rng: np.random.Generator, size: int, mixing: float = 0.0) -> np.ndarray:
    """Random row-stochastic kernel, optionally blended toward a shared row.

    ``mixing`` is the weight on a common random target row; larger values
    give more positively curved kernels.
    """
    q = np.stack([random_simplex(rng, size) for _ in range(size)])
    if mixing > 0:
        pi = random_simplex(rng, size)
        q = mixing * pi[None, :] + (1 - mixing) * q
    return q


def random_model(
    rng: np.random.Generator,
    size: int,
    n_kernels: int = 1,
    mixing: float = 0.0,
    min_kappa: float | None = None,
) -> FiniteMarkovModel:
    """Random chain on a random planar metric; kernels cycle with period n_kernels.

    With ``min_kappa`` set, each kernel is blended toward a shared random
    row just enough to clear the curvature floor: W1 depends only on the
    difference of the two rows, so blending weight alpha rescales
    1 - kappa by exactly (1 - alpha).
    """
    space = random_metric_space(rng, size)
    mu0 = random_simplex(rng, size)
    kernels = []
    for _ in range(n_kernels):
        q = random_kernel(rng, size, mixing)
        if min_kappa is not None:
            kq = kappa_of_kernel(q, space.dist)
            if kq < min_kappa:
                alpha = 1 - (1 - min_kappa) / (1 - kq)
                alpha = min(0.999, alpha + 0.05 * float(rng.random()) * (1 - alpha))
                pi = random_simplex(rng, size)
                q = alpha * pi[None, :] + (1 - alpha) * q
        kernels.append(q)
    return FiniteMarkovModel(space, mu0, lambda t: kernels[(t - 1) % n_kernels])


def random_hermitian(rng: np.random.Generator, m: int, scale: float = 1.0, complex_entries: bool = True) -> np.ndarray:
    a = rng.standard_normal((m, m))
    if complex_entries:
        a = a + 1j * rng.standard_normal((m, m))
    return hermitian_part(a * scale)


def random_obs(
    rng: np.random.Generator,
    n_states: int,
    dim: int,
    steps: int,
    scale: float = 1.0,
    complex_entries: bool = False,
) -> ObservableSequence:
    """Random Hermitian-valued periodic observables."""
    arrays = np.stack(
        [
            np.stack([random_hermitian(rng, dim, scale, complex_entries) for _ in range(n_states)])
            for _ in range(steps)
        ]
    )
    return ObservableSequence.from_arrays(arrays, periodic=True)


def random_matrix_fn(values: np.ndarray, space_size: int) -> ObservableSequence:
    """Constant-in-time observable from a (n_states, m, m) array."""
    values = np.asarray(values)
    return ObservableSequence.from_arrays(values[None, ...], periodic=True)


def coordinate_obs(
    rng: np.random.Generator, points: np.ndarray, dim: int, steps: int, scale: float = 1.0
) -> ObservableSequence:
    """Observables affine in the state coordinates.

    F_t(x) = A_t px + B_t py + C_t with Hermitian coefficients, so the
    Lipschitz constant and the oscillation live on the same scale as the
    metric instead of being dominated by the closest state pair.
    """
    points = np.asarray(points, dtype=float)
    arrays = np.empty((steps, points.shape[0], dim, dim), dtype=float)
    for t in range(steps):
        a = random_hermitian(rng, dim, scale, complex_entries=False)
        b = random_hermitian(rng, dim, scale, complex_entries=False)
        c = random_hermitian(rng, dim, scale, complex_entries=False)
        for x, (px, py) in enumerate(points):
            arrays[t, x] = a * px + b * py + c
    return ObservableSequence.from_arrays(arrays, periodic=True)
