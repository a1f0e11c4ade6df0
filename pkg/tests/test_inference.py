import math

import numpy as np
import pytest

from cmaqf.inference import AutocovExperiment, autocov_clt_check, ls_clt_check, ls_kernel_pair, poly_map, yule_walker
from cmaqf.errors import ParameterError
from cmaqf.kernels import ExponentialOU
from cmaqf.levy import BrownianMotion, CompoundPoissonNormal
from cmaqf.variance import autocov_clt_sigma, eta2_sn


def test_yule_walker_order_one_is_lag_one_autocorrelation():
    theta = yule_walker(ExponentialOU(1.0), BrownianMotion(2.0), 1.0, 1)
    assert theta.shape == (1,)
    assert theta[0] == pytest.approx(math.exp(-1.0), rel=1e-8)


def test_yule_walker_matches_dense_solve():
    kernel, model = ExponentialOU(1.3), CompoundPoissonNormal(1.0, 1.0)
    k = 3
    coef = yule_walker(kernel, model, 1.0, k)
    from cmaqf.covariance import covariance_lags

    gam = covariance_lags(kernel, kernel, 1.0, 1.0, 0, k, base_step=1 / 256)
    G = np.array([[gam[abs(i - j)] for j in range(k)] for i in range(k)])
    rhs = gam[1 : k + 1]
    assert np.allclose(coef, np.linalg.solve(G, rhs), rtol=1e-10)


def test_poly_map_values_and_derivatives():
    v, vp = poly_map([[0.0, 1.0], [1.0, 0.0, 2.0]])  # (theta, 1 + 2 theta^2)
    assert np.allclose(v(0.5), [0.5, 1.5])
    assert np.allclose(vp(0.5), [1.0, 2.0])


def test_ls_kernel_pair_shapes():
    v, vp = poly_map([[0.0, 1.0]])
    k1, k2 = ls_kernel_pair(ExponentialOU(1.0), v, vp, 0.3, 1, 1.0)
    # first factor: -phi(t) + theta0 phi(t - Delta); second: 2 phi(t - Delta)
    t = np.array([0.5, 1.5, 3.0])
    ou = ExponentialOU(1.0)
    assert np.allclose(k1.eval(t), -ou.eval(t) + 0.3 * ou.eval(t - 1.0))
    assert np.allclose(k2.eval(t), 2.0 * ou.eval(t - 1.0))


def test_autocov_contrast_calibrates_and_reports_centering():
    exp = AutocovExperiment(
        kernel=ExponentialOU(1.0), model=BrownianMotion(2.0), delta=1.0,
        lags=1, contrast=(1.0,), n=1000, replicates=300, seed=6,
    )
    rep = autocov_clt_check(exp, threads=4)
    assert 0.75 < rep.variance_ratio < 1.25
    assert abs(rep.extra["centering_shift"]) <= rep.extra["centering_shift_bound"]
    sig = autocov_clt_sigma(ExponentialOU(1.0), BrownianMotion(2.0), 1.0, 1)
    assert rep.eta2 == pytest.approx(float(sig[0, 0]), rel=1e-12)


def test_contrast_scaling_bilinearity():
    common = dict(kernel=ExponentialOU(1.0), model=BrownianMotion(2.0), delta=1.0, lags=1, n=400, replicates=80, seed=3)
    r1 = autocov_clt_check(AutocovExperiment(contrast=(1.0,), **common))
    r2 = autocov_clt_check(AutocovExperiment(contrast=(2.0,), **common))
    assert r2.eta2 == pytest.approx(4.0 * r1.eta2, rel=1e-12)
    assert np.allclose(r2.statistics, 2.0 * r1.statistics, rtol=1e-12)
    assert r2.ks == pytest.approx(r1.ks, abs=1e-12)


def test_cramer_wold_parallelogram_on_sigma():
    sig = autocov_clt_sigma(ExponentialOU(1.0), CompoundPoissonNormal(1.0, 1.0), 1.0, 3)
    rng = np.random.default_rng(0)
    a = rng.standard_normal(3)
    b = rng.standard_normal(3)
    v = lambda x: float(x @ sig @ x)
    assert v(a + b) + v(a - b) == pytest.approx(2 * v(a) + 2 * v(b), rel=1e-12)


def test_ls_clt_mean_zero_at_projection_point():
    rep = ls_clt_check(
        ExponentialOU(1.0), BrownianMotion(2.0), 1.0, n=1000, replicates=300, seed=14, threads=4,
    )
    se = math.sqrt(rep.eta2 / rep.replicates)
    assert abs(rep.mean) < 4 * se
    assert 0.75 < rep.variance_ratio < 1.25
    assert rep.extra["theta0"] == pytest.approx(math.exp(-1.0), rel=1e-8)


def test_ls_clt_brownian_eta2_has_no_kappa4_term():
    v, vp = poly_map([[0.0, 1.0]])
    theta0 = math.exp(-1.0)
    k1, k2 = ls_kernel_pair(ExponentialOU(1.0), v, vp, theta0, 1, 1.0)
    rep = eta2_sn(k1, k2, BrownianMotion(2.0), 1.0, check="skip")
    assert rep.kappa4_term == 0.0
    repc = eta2_sn(k1, k2, CompoundPoissonNormal(1.0, 1.0), 1.0, check="skip")
    assert repc.kappa4_term > 0.0


def test_ls_clt_degenerate_derivative_map():
    v, vp = poly_map([[0.0, 1.0]])
    vp0 = lambda th: np.array([0.0])
    rep = ls_clt_check(
        ExponentialOU(1.0), BrownianMotion(1.0), 1.0, n=50, replicates=10, seed=0,
        v=v, vp=vp0, theta0=0.5,
    )
    assert rep.degenerate
    assert np.all(rep.statistics == 0.0)


def test_experiment_validation():
    with pytest.raises(ParameterError):
        AutocovExperiment(
            kernel=ExponentialOU(1.0), model=BrownianMotion(1.0), delta=1.0,
            lags=9, contrast=(1.0,) * 9, n=10, replicates=5,
        )
    with pytest.raises(ParameterError):
        ls_clt_check(ExponentialOU(1.0), BrownianMotion(1.0), 1.0, n=100, replicates=10, k=2)
