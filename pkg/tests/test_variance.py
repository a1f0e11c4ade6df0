import itertools
import math

import numpy as np
import pytest

from cmaqf.conditions import AssumptionCheck, ConditionReport
from cmaqf.covariance import FiniteSupport
from cmaqf.errors import ConditionsRefutedError, GridError
from cmaqf.kernels import ExponentialOU, LinComboKernel, TabulatedKernel, grid_sample
from cmaqf.levy import BilateralGamma, BrownianMotion, CompoundPoissonNormal, stream
from cmaqf.simulate import stochastic_integrals_joint
from cmaqf.variance import autocov_clt_sigma, eta2_qn, eta2_sn, expected_qn, expected_sn, fourth_moment


def box_grid(a, b, step=0.125, horizon=4.0):
    """Grid of the indicator of [a, b) on cell edges (node at b is 0)."""
    ts = np.arange(-int(horizon / step), int(horizon / step) + 1) * step
    vals = ((ts >= a) & (ts < b)).astype(float)
    kernel = TabulatedKernel(t0=float(ts[0]), step=step, values=vals)
    return grid_sample(kernel, 1.0, int(round(1.0 / step)), horizon)


def geometric_eta2(sigma2, lam, Delta):
    """sum_s gamma(s Delta)^2 doubled, gamma(h) = sigma2 e^{-lam h} / (2 lam)."""
    g0 = sigma2 / (2 * lam)
    q = math.exp(-2 * lam * Delta)
    return 2.0 * g0**2 * (1 + q) / (1 - q)


def kappa4_phase_ou(lam, Delta):
    """int_0^Delta (sum_{s>=0} e^{-2 lam (t + s Delta)})^2 dt in closed form."""
    return (1 - math.exp(-4 * lam * Delta)) / (4 * lam * (1 - math.exp(-2 * lam * Delta)) ** 2)


# ---------------------------------------------------------------------------
# fourth_moment
# ---------------------------------------------------------------------------


def test_fourth_moment_indicator_brownian_isserlis():
    g = box_grid(0.0, 1.0)
    assert fourth_moment(g, g, g, g, BrownianMotion(1.0)) == pytest.approx(3.0, abs=1e-12)


def test_fourth_moment_indicator_compound_poisson():
    g = box_grid(0.0, 1.0)
    # kappa4 * 1 + 3 sigma4 = 3 + 3
    assert fourth_moment(g, g, g, g, CompoundPoissonNormal(1.0, 1.0)) == pytest.approx(6.0, abs=1e-12)


def test_fourth_moment_disjoint_supports():
    g01 = box_grid(0.0, 1.0)
    g23 = box_grid(2.0, 3.0)
    # only the (1,3)x(2,4) pairing survives
    assert fourth_moment(g01, g23, g01, g23, BrownianMotion(1.0)) == pytest.approx(1.0, abs=1e-12)
    assert fourth_moment(g01, g23, g23, g01, BrownianMotion(1.0)) == pytest.approx(1.0, abs=1e-12)
    assert fourth_moment(g01, g01, g23, g23, BrownianMotion(1.0)) == pytest.approx(1.0, abs=1e-12)


def test_fourth_moment_collapse_identity():
    g = grid_sample(ExponentialOU(1.0), 1.0, 16, 16.0)
    model = CompoundPoissonNormal(2.0, 0.5)
    sigma2, kappa4 = model.cumulants()
    cells = g.values[:-1]
    l2 = g.step * float(np.sum(cells**2))
    l4 = g.step * float(np.sum(cells**4))
    expect = kappa4 * l4 + 3 * sigma2**2 * l2**2
    assert fourth_moment(g, g, g, g, model) == pytest.approx(expect, rel=1e-14)


def test_fourth_moment_permutation_invariant():
    g1 = box_grid(0.0, 1.0)
    g2 = box_grid(0.5, 1.5)
    g3 = grid_sample(ExponentialOU(1.0), 1.0, 8, 4.0)
    g4 = box_grid(1.0, 2.5)
    model = BilateralGamma(2.0, 1.0)
    base = fourth_moment(g1, g2, g3, g4, model)
    for perm in itertools.permutations((g1, g2, g3, g4)):
        assert fourth_moment(*perm, model) == pytest.approx(base, rel=1e-12)


def test_fourth_moment_grid_mismatch():
    g1 = box_grid(0.0, 1.0, horizon=4.0)
    g2 = box_grid(0.0, 1.0, horizon=8.0)
    with pytest.raises(GridError):
        fourth_moment(g1, g1, g1, g2, BrownianMotion(1.0))


def test_fourth_moment_monte_carlo_consistency():
    # empirical mean of the product of four joint stochastic integrals
    g1 = box_grid(0.0, 1.0)
    g2 = box_grid(1.0, 2.0)
    model = CompoundPoissonNormal(1.0, 1.0)
    target = fourth_moment(g1, g2, g1, g2, model)
    n = 200_000
    i1, i2, i3, i4 = stochastic_integrals_joint((g1, g2, g1, g2), model, n, stream(17, 0))
    prods = i1 * i2 * i3 * i4
    se = float(np.std(prods, ddof=1)) / math.sqrt(n)
    assert abs(float(np.mean(prods)) - target) < 4 * se


# ---------------------------------------------------------------------------
# eta2 for the bilinear statistic
# ---------------------------------------------------------------------------


def test_eta2_sn_ou_brownian_geometric_series():
    rep = eta2_sn(ExponentialOU(1.0), ExponentialOU(1.0), BrownianMotion(2.0), 1.0)
    assert rep.eta2 == pytest.approx(geometric_eta2(2.0, 1.0, 1.0), rel=1e-8)
    assert rep.kappa4_term == 0.0
    assert rep.conditions_note == "supported"


def test_eta2_sn_compound_poisson_adds_kappa4_term():
    lam, Delta = 1.0, 1.0
    rep = eta2_sn(ExponentialOU(lam), ExponentialOU(lam), CompoundPoissonNormal(1.0, 1.0), Delta)
    assert rep.kappa4_term == pytest.approx(3.0 * kappa4_phase_ou(lam, Delta), rel=1e-8)
    cov = sum(rep.covariance_terms.values())
    assert cov == pytest.approx(geometric_eta2(1.0, lam, Delta), rel=1e-8)
    assert rep.eta2 == rep.kappa4_term + cov


def test_eta2_sn_symmetric_in_kernels():
    k1, k2 = ExponentialOU(1.0), ExponentialOU(2.0)
    model = CompoundPoissonNormal(1.0, 1.0)
    a = eta2_sn(k1, k2, model, 1.0)
    b = eta2_sn(k2, k1, model, 1.0)
    assert a.eta2 == pytest.approx(b.eta2, rel=1e-10)


def test_eta2_sn_shift_invariant():
    k = ExponentialOU(1.0)
    shifted = LinComboKernel(base=k, shifts=(3.0,), coeffs=(1.0,))
    model = CompoundPoissonNormal(1.0, 1.0)
    a = eta2_sn(k, k, model, 1.0)
    b = eta2_sn(shifted, shifted, model, 1.0, check="skip")
    assert b.eta2 == pytest.approx(a.eta2, rel=1e-9)


def test_eta2_nonnegative_and_sum_of_terms():
    for model in (BrownianMotion(2.0), CompoundPoissonNormal(1.0, 1.0), BilateralGamma(2.0, 1.0)):
        rep = eta2_sn(ExponentialOU(1.0), ExponentialOU(2.0), model, 1.0)
        assert rep.eta2 >= 0.0
        assert rep.eta2 == rep.kappa4_term + sum(rep.covariance_terms.values())
        if isinstance(model, BrownianMotion):
            assert rep.kappa4_term == 0.0
        else:
            assert rep.kappa4_term > 0.0


# ---------------------------------------------------------------------------
# eta2 for the quadratic form
# ---------------------------------------------------------------------------


def test_eta2_qn_delta0_reduces_to_sn():
    sn = eta2_sn(ExponentialOU(1.0), ExponentialOU(1.0), BrownianMotion(2.0), 1.0)
    qn = eta2_qn(ExponentialOU(1.0), FiniteSupport.delta0(), BrownianMotion(2.0), 1.0)
    assert qn.eta2 == pytest.approx(sn.eta2, rel=1e-10)
    assert qn.eta2 == pytest.approx(geometric_eta2(2.0, 1.0, 1.0), rel=1e-8)


@pytest.mark.parametrize("model", [BrownianMotion(2.0), CompoundPoissonNormal(1.0, 1.0)])
def test_eta2_qn_two_routes_agree(model):
    b = FiniteSupport(values=(0.0, 1.0))
    rep = eta2_qn(ExponentialOU(1.0), b, model, 1.0)
    assert rep.eta2_alt is not None
    assert abs(rep.eta2 - rep.eta2_alt) <= 1e-8 * abs(rep.eta2)


def test_eta2_qn_refuted_conditions_gate():
    refuted = ConditionReport(
        condition_set="qn_general",
        exponents={},
        assumptions=(AssumptionCheck(name="stub", verdict="refuted"),),
    )
    with pytest.raises(ConditionsRefutedError):
        eta2_qn(ExponentialOU(1.0), FiniteSupport.delta0(), BrownianMotion(1.0), 1.0, check=refuted)
    rep = eta2_qn(ExponentialOU(1.0), FiniteSupport.delta0(), BrownianMotion(1.0), 1.0, check=refuted, force=True)
    assert rep.conditions_note == "overridden (refuted)"
    clean = eta2_qn(ExponentialOU(1.0), FiniteSupport.delta0(), BrownianMotion(1.0), 1.0)
    assert rep.eta2 == clean.eta2  # force never changes numbers


# ---------------------------------------------------------------------------
# autocovariance limit matrix
# ---------------------------------------------------------------------------


def sigma11_oracle(lam, sigma2, Delta):
    """m = 1 entry for a Brownian driver, by geometric series."""
    g = lambda u: sigma2 / (2 * lam) * math.exp(-lam * abs(u) * Delta)
    first = sum(g(u) ** 2 for u in range(-200, 201))
    second = sum(g(2 - u) * g(u) for u in range(-200, 201))
    return first + second


def test_autocov_sigma_m1_brownian():
    sig = autocov_clt_sigma(ExponentialOU(1.0), BrownianMotion(2.0), 1.0, 1)
    assert sig.shape == (1, 1)
    assert sig[0, 0] == pytest.approx(sigma11_oracle(1.0, 2.0, 1.0), rel=1e-8)


def test_autocov_sigma_symmetric_psd_and_embedding():
    for model in (BrownianMotion(2.0), CompoundPoissonNormal(1.0, 1.0)):
        sig3 = autocov_clt_sigma(ExponentialOU(1.0), model, 1.0, 3)
        assert np.array_equal(sig3, sig3.T)
        assert np.min(np.linalg.eigvalsh(sig3)) > -1e-10
    # lag-wise diagonal consistency: entry (j, j) only involves gamma at lags around j
    sig1 = autocov_clt_sigma(ExponentialOU(1.0), BrownianMotion(2.0), 1.0, 1)
    sig2 = autocov_clt_sigma(ExponentialOU(1.0), BrownianMotion(2.0), 1.0, 2)
    assert sig2[0, 0] == pytest.approx(sig1[0, 0], rel=1e-10)
    g = lambda u: math.exp(-abs(u))
    d22 = sum(g(u) ** 2 for u in range(-300, 301)) + sum(g(4 - u) * g(u) for u in range(-300, 301))
    assert sig2[1, 1] == pytest.approx(d22, rel=1e-8)


# ---------------------------------------------------------------------------
# expected values
# ---------------------------------------------------------------------------


def test_expected_qn_delta0():
    # E Q_n = n gamma(0)
    val = expected_qn(FiniteSupport.delta0(), ExponentialOU(1.0), BrownianMotion(2.0), 1.0, 50)
    assert val == pytest.approx(50 * 1.0, rel=1e-8)


def test_expected_qn_n2_hand_expansion():
    c = 0.3
    b = FiniteSupport(values=(1.0, c))
    val = expected_qn(b, ExponentialOU(1.0), BrownianMotion(2.0), 1.0, 2)
    # 2 gamma(0) + 2 c gamma(Delta)
    assert val == pytest.approx(2 * 1.0 + 2 * c * math.exp(-1.0), rel=1e-8)


def test_expected_qn_cesaro_limit():
    b = FiniteSupport(values=(1.0, 0.5, 0.25))
    kernel = ExponentialOU(1.0)
    model = BrownianMotion(2.0)
    limit = sum(
        b.weight(u) * math.exp(-abs(u)) for u in range(-2, 3)
    )
    n = 4000
    val = expected_qn(b, kernel, model, 1.0, n)
    slack = sum(abs(u * b.weight(u)) * math.exp(-abs(u)) for u in range(-2, 3))
    assert abs(val / n - limit) <= slack / n + 1e-10


def test_expected_sn_lag0():
    val = expected_sn(ExponentialOU(1.0), ExponentialOU(2.0), BrownianMotion(1.0), 1.0, 100)
    assert val == pytest.approx(100.0 / 3.0, rel=1e-8)


def test_expected_qn_power_decay_against_double_sum():
    from cmaqf.covariance import PowerDecay

    b = PowerDecay(c=0.5, rho=1.2, b0=1.0)
    n = 50
    val = expected_qn(b, ExponentialOU(1.0), BrownianMotion(2.0), 1.0, n)
    # direct double sum over the sampled indices with the closed-form covariance
    oracle = sum(b.weight(t - s) * math.exp(-abs(t - s)) for t in range(n) for s in range(n))
    assert val == pytest.approx(oracle, rel=1e-7)
