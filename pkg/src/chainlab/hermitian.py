"""Dense Hermitian linear algebra primitives.

Everything downstream (chain statistics, transport quantities, tail
estimates) is built on these: eigendecompositions, matrix exponentials,
norms, and vector dilations.  All functions are pure and operate on plain
numpy arrays; matrices are kept at desk scale (a few hundred dimensions),
so eigendecomposition is the workhorse throughout.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError

HERMITIAN_TOL = 1e-12


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Return (A + A*)/2, preserving real dtype for real input."""
    a = np.asarray(a)
    return (a + a.conj().swapaxes(-1, -2)) / 2


def as_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a square near-Hermitian matrix and return its symmetrised form.

    Round-off asymmetry up to ``tol`` relative to the matrix scale is
    repaired silently; anything larger is treated as a caller error.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = 1.0 + float(np.abs(a).max(initial=0.0))
    dev = float(np.abs(a - a.conj().T).max(initial=0.0))
    if dev > 2 * tol * scale:
        raise ValueError(f"matrix is not Hermitian within tolerance: asymmetry {dev:.3e}")
    return hermitian_part(a)


def _eigh(a: np.ndarray):
    try:
        return np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition failed for {a.shape[-2]}x{a.shape[-1]} Hermitian matrix"
        ) from exc


def lambda_max(a: np.ndarray, tol: float = HERMITIAN_TOL) -> float:
    """Largest eigenvalue of a Hermitian matrix."""
    h = as_hermitian(a, tol)
    try:
        w = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition failed for {h.shape[0]}x{h.shape[0]} Hermitian matrix"
        ) from exc
    return float(w[-1])


def expm_scaled(a: np.ndarray, z: complex, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """exp(z*A) for Hermitian A via eigendecomposition A = U diag(w) U*.

    Returns a real array when both A and z are real.
    """
    h = as_hermitian(a, tol)
    w, u = _eigh(h)
    ew = np.exp(np.asarray(z) * w)
    return (u * ew) @ u.conj().T


def op_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    a = np.asarray(a)
    try:
        return float(np.linalg.norm(a, 2))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular value computation failed for shape {a.shape}") from exc


def frobenius_norm(a: np.ndarray) -> float:
    a = np.asarray(a)
    return float(np.sqrt((np.abs(a) ** 2).sum()))


def trace_exp(a: np.ndarray, tol: float = HERMITIAN_TOL) -> float:
    """tr exp(A) = sum of exp(eigenvalues) for Hermitian A."""
    h = as_hermitian(a, tol)
    try:
        w = np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition failed for {h.shape[0]}x{h.shape[0]} Hermitian matrix"
        ) from exc
    return float(np.exp(w).sum())


def dilation(v: np.ndarray) -> np.ndarray:
    """Embed a real vector in an (n+1)x(n+1) symmetric matrix.

    The result has zero diagonal blocks and v in the off-diagonal blocks, so
    its spectrum is {+|v|, 0, ..., 0, -|v|} and its operator norm equals the
    Euclidean norm of v.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    n = v.shape[0]
    out = np.zeros((n + 1, n + 1))
    out[0, 1:] = v
    out[1:, 0] = v
    return out
