import cmath
import math

import numpy as np
import pytest

from chainlab import FiniteMarkovModel, FiniteMetricSpace, exact_an, renewal_coefficients, verify_renewal
from chainlab.chain import ObservableSequence, distributions, exact_means, lipschitz_op
from chainlab.errors import EnumerationError
from chainlab.instances import random_model, random_obs
from chainlab.renewal import PHI_GRID
from chainlab.rng import stream


def small_instance(seed, size=3, n=3, m=2, complex_entries=True):
    rng = stream(seed, "inst")
    model = random_model(rng, size, n_kernels=2)
    obs = random_obs(rng, size, m, n, complex_entries=complex_entries)
    return model, obs


def test_a0_is_dimension_and_s_zero_flatline():
    model, obs = small_instance(1)
    a = exact_an(model, obs, s=0.0, phi=0.3, n=3)
    assert np.allclose(a, 2.0, atol=1e-12)
    assert exact_an(model, obs, s=0.1, phi=0.0, n=0)[0] == pytest.approx(2.0)


def test_scalar_reduction_matches_direct_mgf():
    # m = 1, phi = 0: the trace product collapses to exp(s * sum of summands)
    model, obs = small_instance(2, m=1, complex_entries=False)
    s, n = 0.3, 4
    a = exact_an(model, obs, s=s, phi=0.0, n=n)
    means = exact_means(model, obs, n)
    mus = distributions(model, n)
    expect = np.zeros(n + 1)
    expect[0] = 1.0

    def rec(t, x, acc, prob):
        expect[t] += prob * math.exp(s * acc)
        if t == n:
            return
        row = model.kernel_at(t + 1)
        for y in range(model.size):
            if row[x, y] > 0:
                rec(t + 1, y, acc + float(obs.eval(t + 1, y)[0, 0] - means[t][0, 0]), prob * row[x, y])

    for x1 in range(model.size):
        if mus[1][x1] > 0:
            rec(1, x1, float(obs.eval(1, x1)[0, 0] - means[0][0, 0]), mus[1][x1])
    assert np.allclose(a, expect, rtol=1e-10)


def test_coefficients_at_s_zero():
    model, obs = small_instance(3)
    led = renewal_coefficients(model, obs, s=0.0, phi=0.5, n=4)
    assert led.b[0] == pytest.approx(1.0, abs=1e-12)
    assert np.abs(led.b[1:]).max() <= 1e-12
    assert np.allclose(led.B[0], np.eye(2), atol=1e-12)


def test_two_step_scalar_recursion_hand_computed():
    # m = 1 on a 2-state chain: spell out the backward recursion by hand
    space = FiniteMetricSpace([[0.0, 1.0], [1.0, 0.0]])
    k1 = np.array([[0.7, 0.3], [0.4, 0.6]])
    k2 = np.array([[0.5, 0.5], [0.1, 0.9]])
    mu0 = np.array([0.6, 0.4])
    model = FiniteMarkovModel(space, mu0, [k1, k2])
    f1 = np.array([0.3, -0.2])
    f2 = np.array([-0.5, 0.1])
    obs = ObservableSequence.from_arrays(
        np.array([[[[f1[0]]], [[f1[1]]]], [[[f2[0]]], [[f2[1]]]]]), periodic=False
    )
    s, phi = 0.23, 0.4
    gamma = math.cos(phi)
    mu1 = mu0 @ k1
    mu2 = mu1 @ k2
    f1c = f1 - mu1 @ f1
    f2c = f2 - mu2 @ f2
    theta1 = np.exp(s * gamma * f2c)
    b1 = float(mu2 @ theta1)
    h1 = theta1 - b1
    w1 = np.exp(0.5 * s * cmath.exp(1j * phi) * f1c)
    theta2 = np.abs(w1) ** 2 * (k2 @ h1)
    b2 = float(mu1 @ theta2)
    led = renewal_coefficients(model, obs, s, phi, 2)
    assert led.b[0] == pytest.approx(abs(b1), rel=1e-12)
    assert led.b[1] == pytest.approx(abs(b2), rel=1e-10)


def test_head_coefficient_hoeffding_ceiling():
    rng = stream(4, "head")
    for _ in range(30):
        model = random_model(rng, 3)
        obs = random_obs(rng, 3, 2, 2)
        big_l = max(lipschitz_op(obs, model.space, t) for t in (1, 2))
        ld = big_l * model.space.diameter
        s = float(rng.uniform(0, 1.0 / ld))
        led = renewal_coefficients(model, obs, s, float(rng.uniform(-np.pi / 2, np.pi / 2)), 2)
        assert led.b[0] <= math.exp(s**2 * ld**2 / 2) + 1e-9


def test_verify_renewal_random_instances():
    rng = stream(5, "ver")
    for k in range(20):
        size = int(rng.integers(2, 5))
        n = int(rng.integers(1, 6))
        model = random_model(rng, size, n_kernels=min(n, 2))
        obs = random_obs(rng, size, int(rng.integers(1, 3)), max(n, 1), complex_entries=True)
        s = float(rng.uniform(0, 0.1))
        phi = float(PHI_GRID[int(rng.integers(0, 9))])
        report = verify_renewal(model, obs, s, phi, n)
        assert report.holds, f"instance {k}: {report.lhs} > {report.rhs}"
        assert report.close_holds
        assert report.slack >= -1e-9


def test_verify_renewal_s_zero_equality():
    model, obs = small_instance(6)
    report = verify_renewal(model, obs, 0.0, 0.0, 3)
    assert report.lhs == pytest.approx(2.0, abs=1e-12)
    assert report.rhs == pytest.approx(2.0, abs=1e-12)


def test_enumeration_guard():
    model, obs = small_instance(7, size=4)
    with pytest.raises(EnumerationError):
        exact_an(model, obs, 0.1, 0.0, 12, budget=10**6)


def test_exact_an_matches_sampled_trace_products():
    model, obs = small_instance(8, size=3, n=3)
    s, phi, n = 0.09, float(PHI_GRID[3]), 3
    a = exact_an(model, obs, s, phi, n)

    from chainlab.chain import sample_trajectory, trajectory_stream
    from chainlab.hermitian import expm_scaled
    from chainlab.chain import exact_means

    means = exact_means(model, obs, n)
    z = 0.5 * s * cmath.exp(1j * phi)
    w = [
        np.stack([expm_scaled(obs.eval(t, x) - means[t - 1], z) for x in range(model.size)])
        for t in range(1, n + 1)
    ]
    reps = 20_000
    vals = np.empty(reps)
    for r in range(reps):
        traj = sample_trajectory(model, n, trajectory_stream(202, r))
        mat = np.eye(obs.dim, dtype=complex)
        for t, x in enumerate(traj.states, start=1):
            mat = mat @ w[t - 1][int(x)]
        vals[r] = (np.abs(mat) ** 2).sum()
    se = vals.std(ddof=1) / math.sqrt(reps)
    assert abs(vals.mean() - a[n]) <= 4 * se + 1e-12
