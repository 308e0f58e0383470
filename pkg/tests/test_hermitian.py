import numpy as np
import pytest
from scipy.linalg import expm as dense_expm

from chainlab import (
    dilation,
    expm_scaled,
    frobenius_norm,
    lambda_max,
    op_norm,
    trace_exp,
)
from chainlab.hermitian import as_hermitian
from chainlab.rng import stream


def test_lambda_max_diagonal_and_zero():
    assert lambda_max(np.diag([1.0, 2.0])) == pytest.approx(2.0, abs=1e-12)
    assert lambda_max(np.zeros((3, 3))) == pytest.approx(0.0, abs=1e-12)


def test_lambda_max_dilation_cross_checked_by_eigensolver():
    d = dilation(np.array([3.0, 4.0]))
    # dilation spectrum is {+|v|, 0, -|v|}; brute-force eigenvalues agree
    brute = np.linalg.eigvalsh(d)
    assert lambda_max(d) == pytest.approx(5.0, abs=1e-10)
    assert brute[-1] == pytest.approx(5.0, abs=1e-10)
    assert brute[0] == pytest.approx(-5.0, abs=1e-10)


def test_lambda_max_accuracy_on_random_matrices():
    rng = stream(1, "lmax")
    for _ in range(50):
        m = int(rng.integers(1, 8))
        a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        h = (a + a.conj().T) / 2
        w = np.linalg.eigvalsh(h)
        assert abs(lambda_max(h) - w[-1]) <= 1e-10 * (1 + op_norm(h))


def test_as_hermitian_rejects_garbage():
    with pytest.raises(ValueError):
        as_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        as_hermitian(np.zeros((2, 3)))


def test_expm_scaled_trivial_cases():
    a = np.diag([1.0, -1.0])
    assert np.allclose(expm_scaled(a, 0.0), np.eye(2), atol=1e-14)
    out = expm_scaled(a, 1.0)
    assert np.allclose(np.diag(out), [np.e, 1 / np.e], rtol=1e-12)


def test_expm_scaled_matches_scaling_and_squaring():
    rng = stream(2, "expm")
    for _ in range(100):
        m = int(rng.integers(1, 6))
        a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        h = (a + a.conj().T) / 2
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        ours = expm_scaled(h, z)
        ref = dense_expm(z * h)
        rel = frobenius_norm(ours - ref) / max(frobenius_norm(ref), 1e-300)
        assert rel <= 1e-9


def test_expm_norm_growth_bound():
    rng = stream(3, "expnorm")
    for _ in range(100):
        m = int(rng.integers(1, 5))
        a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        h = (a + a.conj().T) / 2
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        assert op_norm(expm_scaled(h, z)) <= np.exp(abs(z) * op_norm(h)) * (1 + 1e-12)


def test_expm_difference_bounds_op_and_frobenius():
    rng = stream(4, "expdiff")
    for _ in range(100):
        m = int(rng.integers(1, 5))
        h1 = (lambda x: (x + x.conj().T) / 2)(
            rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        )
        h2 = (lambda x: (x + x.conj().T) / 2)(
            rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        )
        z = complex(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8))
        lhs_op = op_norm(expm_scaled(h1, z) - expm_scaled(h2, z))
        grow = np.exp(max(op_norm(z * h1), op_norm(z * h2)))
        assert lhs_op <= grow * op_norm(z * (h1 - h2)) + 1e-10
        lhs_f = frobenius_norm(expm_scaled(h1, z) - expm_scaled(h2, z))
        assert lhs_f <= grow * frobenius_norm(z * (h1 - h2)) + 1e-10


def test_norms_and_trace_exp():
    assert op_norm(np.diag([1.0, -3.0])) == pytest.approx(3.0, abs=1e-12)
    assert frobenius_norm(np.eye(4)) == pytest.approx(2.0, abs=1e-12)
    assert trace_exp(np.zeros((3, 3))) == pytest.approx(3.0, abs=1e-12)


def test_trace_exp_dominates_top_eigenvalue_exponential():
    rng = stream(5, "trexp")
    for _ in range(100):
        m = int(rng.integers(1, 5))
        a = rng.standard_normal((m, m))
        h = (a + a.T) / 2
        s = float(rng.uniform(-2, 2))
        assert trace_exp(s * h) >= np.exp(s * lambda_max(h)) * (1 - 1e-12)


def test_dilation_shapes_and_norms():
    assert np.array_equal(dilation(np.zeros(3)), np.zeros((4, 4)))
    assert np.array_equal(dilation(np.array([1.0])), np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert lambda_max(dilation(np.array([1.0]))) == pytest.approx(1.0, abs=1e-12)
    rng = stream(6, "dil")
    for _ in range(50):
        v = rng.standard_normal(int(rng.integers(1, 7)))
        assert abs(op_norm(dilation(v)) - np.linalg.norm(v)) <= 1e-12 * (1 + np.linalg.norm(v))
