import math

import numpy as np
import pytest

from chainlab import granularity, halving_grid_model, halving_pair_kappa, tightness_experiment
from chainlab.dyadic import frequency_levels, halving_pair_w1
from chainlab.rng import stream
from chainlab.transport import kappa_of_kernel, ollivier_kappa, wasserstein1


def test_frequency_levels_exact_and_errors():
    assert frequency_levels(2.0**10, 1.0, math.pi) == 10
    assert frequency_levels(2.0, 1.0, math.pi) == 1
    with pytest.raises(ValueError):
        frequency_levels(1.5, 1.0, math.pi)  # ratio < 2
    with pytest.raises(ValueError):
        frequency_levels(-1.0, 1.0, 1.0)


def test_pair_w1_closed_form_and_curvature():
    rng = stream(61, "pairs")
    d = 512.0
    for _ in range(100):
        x, y = rng.random(2) * d
        if x == y:
            continue
        assert halving_pair_w1(float(x), float(y), d) == pytest.approx(abs(x - y) / 2, rel=1e-12)
        assert halving_pair_kappa(float(x), float(y), d) == pytest.approx(0.5, abs=1e-12)


def test_tightness_small_run():
    report = tightness_experiment(D=2.0**8, delta=0.5, L=math.pi * 0.5, reps=4000, seed=3)
    assert report.levels == 8
    assert report.max_identity_error <= report.identity_tol
    assert report.ci_lo <= 1 / 3 <= report.ci_hi
    # centered sum: mean consistent with zero at three standard errors
    assert abs(report.sum_mean) <= 3 * report.sum_se


def test_grid_model_rows_and_curvature():
    model = halving_grid_model(1.0, 3)
    kernel = model.kernel_at(1)
    assert kernel.shape == (9, 9)
    assert np.abs(kernel.sum(axis=1) - 1.0).max() <= 1e-12
    assert kappa_of_kernel(kernel, model.space.dist) == pytest.approx(0.5, abs=1e-9)
    assert ollivier_kappa(model, 5) == pytest.approx(0.5, abs=1e-9)


def test_grid_model_pairwise_w1_matches_half_distance():
    model = halving_grid_model(1.0, 3)
    kernel = model.kernel_at(1)
    d = model.space.dist
    for i in range(0, 9, 2):
        for j in range(1, 9, 3):
            if i == j:
                continue
            w = wasserstein1(kernel[i], kernel[j], d).cost
            assert w == pytest.approx(d[i, j] / 2, abs=1e-9)


def test_grid_model_granularity_support_enumeration():
    levels, d = 4, 1.0
    model = halving_grid_model(d, levels)
    sigma_inf = granularity(model, 1)
    # even states reach exactly {x/2, x/2 + D/2}; odd states add one grid step
    assert sigma_inf == pytest.approx(d / 2 + d / 2**levels, abs=1e-12)
    assert abs(sigma_inf - d / 2) <= d / 2**levels


def test_grid_model_preserves_uniform_law():
    model = halving_grid_model(1.0, 3)
    # uniform on interior cells in the continuous chain; on the closed grid the
    # kernel must at least preserve total mass and keep the state set invariant
    from chainlab.chain import propagate

    mus = propagate(model, 50)
    assert np.abs(mus.sum(axis=1) - 1.0).max() <= 1e-10
