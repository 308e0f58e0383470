import warnings

import numpy as np
import pytest

from chainlab import (
    CurvatureProfile,
    FiniteMarkovModel,
    FiniteMetricSpace,
    effective_kappa,
    effective_kappa_tilde,
    kappa_profile,
    ollivier_kappa,
    tilted_sum,
    wasserstein1,
    wasserstein1_line,
)
from chainlab.instances import random_metric_space, random_model, random_simplex
from chainlab.rng import stream

TWO_POINT = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_w1_trivial_and_two_point():
    assert wasserstein1([0.4, 0.6], [0.4, 0.6], TWO_POINT).cost == pytest.approx(0.0, abs=1e-12)
    assert wasserstein1([1.0, 0.0], [0.0, 1.0], TWO_POINT).cost == pytest.approx(1.0, abs=1e-9)
    plan = wasserstein1([0.7, 0.3], [0.2, 0.8], TWO_POINT)
    assert plan.cost == pytest.approx(0.5, abs=1e-9)
    # two-point closed form: |mu_0 - nu_0| * d
    assert plan.cost == pytest.approx(abs(0.7 - 0.2) * 1.0, abs=1e-9)


def test_w1_plan_feasibility_and_cost_consistency():
    rng = stream(21, "plan")
    for _ in range(20):
        size = int(rng.integers(2, 9))
        space = random_metric_space(rng, size)
        mu = random_simplex(rng, size)
        nu = random_simplex(rng, size)
        plan = wasserstein1(mu, nu, space.dist)
        assert plan.coupling.min() >= 0
        assert np.abs(plan.coupling.sum(axis=1) - mu).max() <= 1e-9
        assert np.abs(plan.coupling.sum(axis=0) - nu).max() <= 1e-9
        assert plan.cost == pytest.approx(float((plan.coupling * space.dist).sum()), abs=1e-9)


def test_w1_errors():
    with pytest.raises(ValueError):
        wasserstein1([1.0, 0.0], [0.5, 0.5, 0.0], TWO_POINT)
    with pytest.raises(ValueError):
        wasserstein1([1.0, 0.0], [0.3, 0.3], TWO_POINT)


def test_w1_line_oracle_agreement():
    rng = stream(22, "line")
    for _ in range(40):
        size = int(rng.integers(2, 30))
        points = np.sort(rng.random(size) * 5)
        dist = np.abs(points[:, None] - points[None, :])
        mu = random_simplex(rng, size)
        nu = random_simplex(rng, size)
        lp = wasserstein1(mu, nu, dist).cost
        assert lp == pytest.approx(wasserstein1_line(points, mu, nu), abs=1e-8)


def test_w1_metric_axioms_and_duality():
    rng = stream(23, "axioms")
    for _ in range(25):
        size = int(rng.integers(3, 7))
        space = random_metric_space(rng, size)
        mu, nu, rho = (random_simplex(rng, size) for _ in range(3))
        d_mn = wasserstein1(mu, nu, space.dist).cost
        assert d_mn == pytest.approx(wasserstein1(nu, mu, space.dist).cost, abs=1e-8)
        assert d_mn <= (
            wasserstein1(mu, rho, space.dist).cost + wasserstein1(rho, nu, space.dist).cost + 1e-8
        )
        for _ in range(4):
            g = rng.standard_normal(size)
            f = (g[None, :] + space.dist).min(axis=1)
            assert d_mn >= float(f @ mu - f @ nu) - 1e-9


def test_ollivier_kappa_trivial_kernels():
    space = FiniteMetricSpace(TWO_POINT)
    pi = np.array([0.3, 0.7])
    mixing = FiniteMarkovModel(space, pi, [np.tile(pi, (2, 1))])
    assert ollivier_kappa(mixing, 1) == pytest.approx(1.0, abs=1e-9)
    identity = FiniteMarkovModel(space, pi, [np.eye(2)])
    assert ollivier_kappa(identity, 1) == pytest.approx(0.0, abs=1e-9)


def test_ollivier_lipschitz_contraction_consequence():
    rng = stream(24, "contr")
    for _ in range(25):
        model = random_model(rng, int(rng.integers(2, 5)))
        kappa = ollivier_kappa(model, 1)
        p = model.kernel_at(1)
        d = model.space.dist
        f = rng.standard_normal(model.size)
        pairs = [(i, j) for i in range(model.size) for j in range(i + 1, model.size) if d[i, j] > 0]
        lip = max(abs(f[i] - f[j]) / d[i, j] for i, j in pairs)
        pf = p @ f
        lip_pf = max(abs(pf[i] - pf[j]) / d[i, j] for i, j in pairs)
        assert lip_pf <= (1 - kappa) * lip + 1e-9


def test_curvature_profile_clamping():
    with pytest.warns(UserWarning):
        prof = CurvatureProfile(np.array([0.5, -1e-8]))
    assert prof.kappas.min() == 0.0
    with pytest.raises(ValueError):
        CurvatureProfile(np.array([-1e-3]))
    with pytest.raises(ValueError):
        CurvatureProfile(np.array([1.5]))


def test_effective_kappa_examples():
    assert effective_kappa(CurvatureProfile(np.ones(10))).value == pytest.approx(1.0)
    val = effective_kappa(CurvatureProfile(np.full(3, 0.5))).value
    assert val == pytest.approx(1 / (1 + 0.5 + 0.25 + 0.125), abs=1e-14)
    # geometric limit: long constant profile approaches the per-step value
    c = 0.37
    val = effective_kappa(CurvatureProfile(np.full(4000, c))).value
    assert val == pytest.approx(c, abs=1e-12)


def test_effective_kappa_weak_flag_for_flat_profile():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rate = effective_kappa(CurvatureProfile(np.zeros(3_000_000)))
    assert rate.weak
    assert rate.value == pytest.approx(1 / 3_000_001)


def test_effective_kappa_monotone():
    rng = stream(25, "mono")
    for _ in range(30):
        base = rng.random(12)
        k = int(rng.integers(0, 12))
        bumped = base.copy()
        bumped[k] = min(1.0, bumped[k] + float(rng.random()) * (1 - bumped[k]))
        low = effective_kappa(CurvatureProfile(base)).value
        high = effective_kappa(CurvatureProfile(bumped)).value
        assert high >= low - 1e-12


def test_effective_kappa_tilde_examples():
    assert effective_kappa_tilde(CurvatureProfile(np.ones(5))).value == pytest.approx(1.0)
    c = 0.4
    val = effective_kappa_tilde(CurvatureProfile(np.full(3000, c))).value
    assert val == pytest.approx(c, abs=1e-10)
    alt = effective_kappa_tilde(CurvatureProfile(np.array([0.0, 1.0, 0.0, 1.0]))).value
    assert alt == pytest.approx(0.5, abs=1e-14)


def test_tilted_sum_values():
    assert tilted_sum(CurvatureProfile(np.array([0.3])), 0.3, 1) == pytest.approx(1.0)
    ones = CurvatureProfile(np.ones(8))
    assert tilted_sum(ones, 1.0, 8) == pytest.approx(1.0)
    rng = stream(26, "tilt")
    for _ in range(200):
        n = int(rng.integers(1, 51))
        prof = CurvatureProfile(rng.random(n))
        kappa = effective_kappa(prof).value
        assert tilted_sum(prof, kappa, n) <= 3.0 / kappa + 1e-9


def test_kappa_profile_dedupes_cycled_kernels():
    rng = stream(27, "prof")
    model = random_model(rng, 3, n_kernels=2)
    prof = kappa_profile(model, 10)
    assert len(prof) == 10
    assert np.allclose(prof.kappas[0::2], prof.kappas[0])
    assert np.allclose(prof.kappas[1::2], prof.kappas[1])
    assert prof.kappas[0] == pytest.approx(ollivier_kappa(model, 1), abs=1e-12)
