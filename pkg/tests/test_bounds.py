import math

import numpy as np
import pytest

from chainlab import (
    BoundParams,
    bound_curv,
    bound_curv_diam,
    bound_ollivier_avg,
    bound_ollivier_point,
    bound_spec,
    elo_avg_bound,
    elo_point_bound,
    invert_for_n,
)

PI = math.pi


def base_params(**kw):
    defaults = dict(m=3, n=1000, eps=0.2, L=1.0, D=1.0, delta_op=0.8, delta_f=1.1,
                    kappa=0.2, lam=0.3, sigma_inf=0.5, kappa_tilde=0.15)
    defaults.update(kw)
    return BoundParams(**defaults)


def test_bound_curv_frozen_example():
    p = BoundParams(m=3, n=10_000, eps=0.5, L=1.0, D=1.0, kappa=0.2)
    # independent recomputation of the closed form
    v2 = (192 / PI**2) * 1.0 / 0.2
    expect = 3 ** (2 - PI / 4) * math.exp(-10_000 * 0.25 / (2 * v2))
    got = bound_curv(p).value
    assert got == pytest.approx(expect, rel=1e-12)
    assert got == pytest.approx(1.0e-5, rel=0.01)


def test_bound_curv_eps_zero_and_doubling():
    assert bound_curv(base_params(eps=0.0)).value == 1.0
    pre = 3 ** (2 - PI / 4)
    p1 = base_params(n=4000, eps=0.5)
    p2 = base_params(n=8000, eps=0.5)
    r1 = bound_curv(p1).value / pre
    r2 = bound_curv(p2).value / pre
    assert r2 == pytest.approx(r1**2, rel=1e-9)


def test_bound_curv_event_empty_beyond_lipschitz_ceiling():
    res = bound_curv(base_params(eps=1.2))
    assert res.value == 0.0 and res.event_empty


def test_bound_curv_diam_log_term_and_window():
    p = base_params(delta_op=1.0, delta_f=1.4, eps=0.3)  # delta_op = L*D
    v2 = (3200 / PI**2) * 1.0 / 0.2  # log term collapses to 1
    expect = min(1.0, 3 ** (2 - PI / 4) * math.exp(-1000 * 0.09 / (2 * v2)))
    assert bound_curv_diam(p).value == pytest.approx(expect, rel=1e-12)
    res = bound_curv_diam(base_params(eps=0.9))  # above delta_op = 0.8
    assert res.value == 0.0 and res.event_empty
    with pytest.raises(ValueError):
        BoundParams(m=2, n=10, eps=0.1, L=1.0, D=1.0, delta_op=1.5, kappa=0.2)


def test_bound_curv_diam_variance_monotonicity_grid():
    def vbar2(delta):
        return delta**2 * (1 + math.log(1.0 / delta))

    grid = np.linspace(0.05, 1.0, 40)
    for a, b in zip(grid[:-1], grid[1:]):
        pa = base_params(delta_op=a, delta_f=2.0, eps=0.01, n=10_000)
        pb = base_params(delta_op=b, delta_f=2.0, eps=0.01, n=10_000)
        # bound ordering follows the variance proxy ordering exactly
        if vbar2(a) <= vbar2(b):
            assert bound_curv_diam(pa).value <= bound_curv_diam(pb).value + 1e-15


def test_bound_spec_examples():
    res = bound_spec(base_params(eps=0.9))
    assert res.value == 0.0 and res.event_empty
    # exponent exactly -1 (m = 1 so the prefactor does not clamp)
    vB2 = 768 / PI**2  # delta_op = delta_f = lam = 1
    eps = math.sqrt(2 * vB2 / 1000)
    p = base_params(m=1, delta_op=1.0, delta_f=1.0, lam=1.0, eps=eps, L=2.0, D=2.0)
    assert bound_spec(p).value == pytest.approx(1 / math.e, rel=1e-9)
    with pytest.raises(ValueError):
        bound_spec(base_params(delta_f=None))


def test_bound_spec_dilation_oscillation_tightening():
    # rank-2 dilation observables: delta_f <= 2 delta_op beats the generic
    # sqrt(2m) delta_op plug-in for m > 2
    m, delta_op = 6, 0.7
    tight = base_params(m=m, delta_op=delta_op, delta_f=2 * delta_op)
    generic = base_params(m=m, delta_op=delta_op, delta_f=math.sqrt(2 * m) * delta_op)
    assert bound_spec(tight).value <= bound_spec(generic).value


def test_bound_ollivier_point_examples():
    p = BoundParams(m=1, eps=math.sqrt(8.0), L=1.0, sigma_inf=1.0, kappa=1.0)
    assert bound_ollivier_point(p).value == pytest.approx(2 / math.e, rel=1e-12)
    assert bound_ollivier_point(base_params(eps=0.0)).value == 1.0
    # halving-chain plug-in: sigma_inf = D/2, kappa = 1/2
    d = 8.0
    p2 = BoundParams(m=2, eps=1.0, L=1.0, sigma_inf=d / 2, kappa=0.5)
    expect = min(1.0, 4 * math.exp(-1.0 * 0.5 / (8 * (d / 2) ** 2)))
    assert bound_ollivier_point(p2).value == pytest.approx(expect, rel=1e-12)


def test_bound_ollivier_avg_examples():
    p = BoundParams(m=1, n=8, eps=1.0, L=1.0, sigma_inf=1.0, kappa_tilde=1.0)
    assert bound_ollivier_avg(p).value == pytest.approx(2 / math.e, rel=1e-12)
    # halving kappa_tilde quarters the exponent magnitude
    full = BoundParams(m=1, n=256, eps=1.0, L=1.0, sigma_inf=1.0, kappa_tilde=0.8)
    half = BoundParams(m=1, n=256, eps=1.0, L=1.0, sigma_inf=1.0, kappa_tilde=0.4)
    log_full = math.log(bound_ollivier_avg(full).value / 2)
    log_half = math.log(bound_ollivier_avg(half).value / 2)
    assert log_half == pytest.approx(log_full / 4, rel=1e-9)


def test_monotonicity_grids():
    for n in (100, 200, 400, 800):
        a = bound_curv(base_params(n=n, eps=0.3)).value
        b = bound_curv(base_params(n=2 * n, eps=0.3)).value
        assert b <= a + 1e-15
    eps_grid = np.linspace(0.0, 0.8, 9)
    vals = [bound_spec(base_params(eps=float(e), n=5000)).value for e in eps_grid]
    assert all(b <= a + 1e-15 for a, b in zip(vals[:-1], vals[1:]))
    for m in (1, 2, 4, 8):
        assert (
            bound_curv(base_params(m=m, eps=0.4, n=5000)).value
            <= bound_curv(base_params(m=2 * m, eps=0.4, n=5000)).value + 1e-15
        )
    # clamped to [0, 1]
    assert 0.0 <= bound_curv(base_params(n=1, eps=0.01)).value <= 1.0


def test_missing_parameter_errors_name_the_parameter():
    with pytest.raises(ValueError, match="kappa"):
        bound_curv(BoundParams(m=2, n=10, eps=0.1, L=1.0, D=1.0))
    with pytest.raises(ValueError, match="sigma_inf"):
        bound_ollivier_point(BoundParams(m=2, eps=0.1, L=1.0, kappa=0.5))


def test_invert_for_n_trivial_and_algebra():
    # with a unit prefactor the bound is already under 0.999 at n = 1
    p = base_params(m=1, eps=0.5, n=None)
    assert invert_for_n("curv", p, 0.999) == 1
    # exponent -1 algebra: delta = pre/e at n*eps^2 = 2 v^2 (m = 2 keeps pre/e < 1)
    v2 = (192 / PI**2) * (1.0 * 1.0) ** 2 / 0.2
    eps = 0.5
    delta = 2 ** (2 - PI / 4) / math.e
    n = invert_for_n("curv", base_params(m=2, eps=eps, n=None), delta)
    assert n == math.ceil(2 * v2 / eps**2)


def test_invert_for_n_cross_check_and_window():
    rng = np.random.default_rng(5)
    for kind in ("curv", "curv_diam", "spec", "ollivier_avg"):
        for _ in range(20):
            eps = float(rng.uniform(0.05, 0.7))
            delta = float(rng.uniform(1e-8, 0.5))
            p = base_params(eps=eps, n=None)
            n = invert_for_n(kind, p, delta)
            fn = {
                "curv": bound_curv,
                "curv_diam": bound_curv_diam,
                "spec": bound_spec,
                "ollivier_avg": bound_ollivier_avg,
            }[kind]
            from dataclasses import replace

            assert fn(replace(p, n=n)).value <= delta
            if n > 1:
                assert fn(replace(p, n=n - 1)).value > delta
    with pytest.raises(ValueError, match="window"):
        invert_for_n("spec", base_params(eps=0.9, n=None), 0.1)
    with pytest.raises(ValueError, match="window"):
        invert_for_n("curv", base_params(eps=1.5, n=None), 0.1)


def test_elo_point_bound():
    with pytest.raises(ValueError, match="C"):
        elo_point_bound(1.0, 0.5, 1e-4, 0.1, 0.0, 10, 2.0, C=None)
    eta, h_rho, h_q = 0.1, 0.3, 0.05
    b = 2 * math.sqrt(2) * eta + 2 * h_rho + 4 * math.sqrt(2) * h_q
    res = elo_point_bound(1.0, b, 1e-4, eta, 0.0, 10, 2.0, C=2.0)
    assert res.prob == pytest.approx(2 / math.e, rel=1e-12)
    expect_radius = (1 + 1.0) * math.sqrt(2 * eta**2 / 1e-4) + 2.0 * 1.0 * b / math.sqrt(1e-4)
    assert res.radius == pytest.approx(expect_radius, rel=1e-12)
    assert res.burn_in == math.ceil(2.0 / 1e-4 * math.log(10 * 2.0 / (1.0 * eta)))
    # static environment: support diameter reduces to the match move alone
    assert 2 * math.sqrt(2) * eta + 0.0 + 0.0 == pytest.approx(2 * math.sqrt(2) * eta)


def test_elo_avg_bound():
    with pytest.raises(ValueError, match="C"):
        elo_avg_bound(1.0, 0.05, 0.1, 1e-4, 0.0, 10, 2.0, C=None)
    res = elo_avg_bound(1.0, 0.05, 0.1, 1e-4, 0.0, 10, 2.0, C=1.0)
    assert res.radius == pytest.approx(2 * math.sqrt(2 * 0.01 / 1e-4), rel=1e-12)
    assert res.min_horizon == math.ceil(100 * 4 * 10 * math.log(10 / 0.05))
    # player count roughly doubles the horizon (up to the log factor)
    res2 = elo_avg_bound(1.0, 0.05, 0.1, 1e-4, 0.0, 20, 2.0, C=1.0)
    ratio = res2.min_horizon / res.min_horizon
    assert 2.0 <= ratio <= 2 * math.log(20 / 0.05) / math.log(10 / 0.05) + 1e-9
    # curvature substitution: kappa = eta exp(-4M) lambda / 8 makes the radius
    # sqrt(drift * 8 e^{4M} / (eta lam)) + (1+eps) sqrt(16 eta e^{4M} / lam)
    eta, m_cap, lam, drift, eps = 0.1, 2.0, 0.25, 0.3, 0.7
    kappa = eta * math.exp(-4 * m_cap) * lam / 8
    res3 = elo_avg_bound(eps, 0.05, eta, kappa, drift, 10, m_cap, C=1.0)
    expect = math.sqrt(drift * 8 * math.exp(4 * m_cap) / (eta * lam)) + (1 + eps) * math.sqrt(
        16 * eta * math.exp(4 * m_cap) / lam
    )
    assert res3.radius == pytest.approx(expect, rel=1e-12)
