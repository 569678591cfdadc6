import math

import pytest

from airythin.ckdv import (
    AsymptoteParams,
    Regime,
    asymptote,
    bilinear_residual,
    ckdv_residual,
    default_asymptotes,
    evaluate,
    soliton_tau,
    tracy_widom,
)
from airythin.darboux import janossy, modified_potential
from airythin.errors import ConfigurationError, RegimeViolation
from airythin.fredholm import build_resolvent
from airythin.kernels import KernelSurface, kernel_eval
from airythin.thinning import fermi, indicator, rescale, zero


def test_trivial_zero_sigma():
    p = evaluate(zero(), 0.7, 2.0)
    assert p.J == 1.0 and p.V == 0.0 and p.log_J == 0.0


def test_T_one_matches_darboux():
    sigma, nu = fermi(), (0.2,)
    p = evaluate(sigma, -0.4, 1.0, nu)
    state = build_resolvent(-0.4, sigma)
    assert p.log_J == janossy(state, nu).log_value
    assert p.V == modified_potential(state, nu)


@pytest.mark.parametrize("T", [0.5, 8.0, 27.0])
def test_scaling_reduction(T):
    sigma, X, nu = fermi(0.3, 1.2), 1.1, (-0.5, 0.4)
    c = T ** (-1.0 / 3.0)
    p = evaluate(sigma, X, T, nu)
    state = build_resolvent(X * c, rescale(sigma, T))
    nut = tuple(c * v for v in nu)
    assert p.log_J == pytest.approx(janossy(state, nut).log_value - 2.0 / 3.0 * math.log(T), abs=1e-10)
    assert p.V == pytest.approx(c * c * modified_potential(state, nut), abs=1e-10)


@pytest.mark.parametrize("T", [0.0, -1.0])
def test_rejects_bad_T(T):
    with pytest.raises(ConfigurationError):
        evaluate(fermi(), 0.0, T)


def test_soliton_tau_single_point():
    assert soliton_tau(0.5, 2.0, (0.3,)) == pytest.approx(kernel_eval(KernelSurface(0.5, 2.0), 0.3, 0.3), rel=1e-14)


def test_soliton_tau_matches_evaluate():
    assert soliton_tau(1.0, 2.0, (0.0, 1.0)) == pytest.approx(evaluate(zero(), 1.0, 2.0, (0.0, 1.0)).J, rel=1e-9)


def test_soliton_right_tail():
    X = 60.0
    ref = -(4.0 / 3.0) * X**1.5 - math.log(8 * math.pi * X)
    assert abs(soliton_tau(X, 1.0, (0.0,), log=True) / ref - 1.0) < 0.03


def test_soliton_tau_needs_points():
    with pytest.raises(ConfigurationError):
        soliton_tau(0.0, 1.0, ())


def test_tracy_widom_self_consistency():
    for u in (-1.0, 0.5, 2.0):
        _, y2 = tracy_widom(u)
        for T in (1.0, 8.0):
            X = u * T ** (1.0 / 3.0)
            assert evaluate(indicator(0.0), X, T).V == pytest.approx(-(T ** (-2.0 / 3.0)) * y2, abs=1e-6)


def test_ckdv_residual_examples():
    assert ckdv_residual(zero(), (), 1.0, 1.0) == 0.0
    assert ckdv_residual(zero(), (0.0,), 1.0, 1.0, hX=0.05, hT=0.02) < 1e-3
    assert ckdv_residual(fermi(), (0.0,), 0.0, 2.0) < 5e-3


def test_bilinear_residual_examples():
    assert bilinear_residual(zero(), (), 0.0, 1.0) == 0.0
    assert bilinear_residual(indicator(0.0), (), 0.0, 1.0) < 1e-3
    assert bilinear_residual(zero(), (0.0,), 2.0, 1.0) < 1e-3


def test_stencil_must_stay_in_half_plane():
    with pytest.raises(ConfigurationError):
        ckdv_residual(fermi(), (), 0.0, 0.1, hX=0.05, hT=0.1)


def test_asymptote_arithmetic():
    assert asymptote(Regime.RIGHT_TAIL_V, None, 1, 100.0, 1.0) == pytest.approx(-0.1)
    xi = -20.0 / (2.0 / math.pi**2)
    assert asymptote(Regime.LEFT_TAIL_V, fermi(), 0, -20.0, 2.0) == pytest.approx((1 - math.sqrt(1 - xi)) / math.pi**2)
    assert asymptote("left_tail_soliton_v", None, 1, -50.0, 1.0, (0.0,)) == pytest.approx(
        math.cos(4.0 / 3.0 * 50**1.5) / math.sqrt(50)
    )
    X = 10.0
    assert asymptote(Regime.RIGHT_TAIL_LOG_J, None, 2, X, 1.0) == pytest.approx(
        -2 * math.log(8 * math.pi * X) - 8.0 / 3.0 * X**1.5
    )


def test_asymptote_params():
    p = AsymptoteParams.from_sigma(fermi(), -20.0, 2.0)
    assert p.rho == pytest.approx(1 / math.pi**2)
    assert p.xi == pytest.approx(-10 * math.pi**2)
    with pytest.raises(RegimeViolation):
        AsymptoteParams.from_sigma(indicator(0.0), -1.0, 1.0)


@pytest.mark.parametrize(
    "regime,sigma,m,X,nu",
    [
        (Regime.RIGHT_TAIL_V, None, 1, -1.0, ()),
        (Regime.LEFT_TAIL_V, fermi(), 0, 1.0, ()),
        (Regime.LEFT_TAIL_LOG_J, zero(), 0, -5.0, ()),
        (Regime.LEFT_TAIL_SOLITON_V, None, 1, -1.0, (2.0,)),
        (Regime.LEFT_TAIL_SOLITON_V, None, 0, -10.0, ()),
        (Regime.RIGHT_TAIL_V, None, 2, 5.0, (0.0,)),
    ],
)
def test_regime_violation(regime, sigma, m, X, nu):
    with pytest.raises(RegimeViolation):
        asymptote(regime, sigma, m, X, 1.0, nu)


def test_intermediate_regime_large_T():
    T = 1000.0
    ys = {u: tracy_widom(u)[1] for u in (-1.0, 0.0, 1.0)}
    scale = T ** (-2.0 / 3.0) * max(ys.values())
    for u, y2 in ys.items():
        X = u * T ** (1.0 / 3.0)
        V = evaluate(fermi(), X, T).V
        assert abs(V - asymptote(Regime.INTERMEDIATE_TW_V, None, 0, X, T)) <= 0.1 * scale
        assert asymptote(Regime.INTERMEDIATE_TW_V, None, 0, X, T) == pytest.approx(-(T ** (-2.0 / 3.0)) * y2)


def test_default_asymptotes():
    assert default_asymptotes(indicator(0.0), -2.0, 1.0) == (None, -1.0)
    r, l = default_asymptotes(indicator(0.0), 3.0, 1.0)
    assert l is None and r < 0
    assert default_asymptotes(zero(), -2.0, 1.0) == (None, 0.0)
    assert default_asymptotes(fermi(), 4.0, 1.0, (0.0,))[0] == pytest.approx(-0.5)
    assert default_asymptotes(zero(), -1.0, 1.0, (2.0,)) == (None, None)
