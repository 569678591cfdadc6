
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airythin import _fd
from airythin.darboux import (
    janossy,
    janossy_via_palm,
    modified_potential,
    modified_stark_residual,
    modified_wavefunction,
)
from airythin.fredholm import build_resolvent, build_scheme
from airythin.kernels import KernelSurface, PointConfig, log_det_kernel
from airythin.stark import potential, wavefunction_values
from airythin.thinning import fermi, indicator, zero
from oracles import fermi as fermi_fn
from oracles import gl_rule, series_janossy


@pytest.mark.parametrize("nu", [(0.0,), (-1.0, 0.5), (-2.0, 0.0, 1.3)])
def test_zero_sigma_is_kernel_determinant(nu):
    res = janossy(build_resolvent(0.4, zero()), nu)
    sign, ld = log_det_kernel(KernelSurface.shifted(0.4), nu)
    assert res.gap == 1.0
    assert res.log_value == pytest.approx(ld, abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(
    st.floats(-3.0, 3.0),
    st.lists(st.floats(-3.0, 3.0), min_size=1, max_size=3, unique=True).filter(
        lambda v: len(v) < 2 or np.min(np.diff(np.sort(v))) > 0.2
    ),
)
def test_factorizations_agree(s, nu):
    sigma = fermi()
    sch = build_scheme(s, sigma)
    a = janossy(build_resolvent(s, sigma, sch), nu)
    b = janossy_via_palm(s, sigma, sch, nu)
    assert a.log_value == pytest.approx(b.log_value, abs=1e-7)


def test_series_oracle_one_point():
    amp = 0.01
    rules = {1: gl_rule(-40.0, 16.0, 28, 16), 2: gl_rule(-40.0, 16.0, 14, 10), 3: gl_rule(-40.0, 16.0, 8, 6)}
    ref = series_janossy(0.0, lambda x: fermi_fn(x, amplitude=amp), (0.0,), 3, rules)
    got = janossy(build_resolvent(0.0, fermi(0.0, 1.0, amp)), (0.0,)).value
    assert got == pytest.approx(ref, rel=1e-7)


def test_janossy_fields_consistent():
    r = janossy(build_resolvent(0.0, fermi()), (0.0, 1.0))
    assert r.value == pytest.approx(r.gap * r.corr_det, rel=1e-14)
    assert r.log_value == pytest.approx(r.log_gap + r.log_corr_det, rel=1e-14)
    assert 0.0 < r.value


@pytest.mark.parametrize("sigma", [fermi(), indicator(0.0), zero()], ids=["fermi", "indicator", "zero"])
def test_modified_wavefunction_vanishes_at_nu(sigma):
    nu = PointConfig((-1.2, 0.3, 1.1))
    state = build_resolvent(0.1, sigma)
    phi = modified_wavefunction(state, nu, nu.array)
    free = np.abs(wavefunction_values(state, nu.array)[0]).max()
    assert np.max(np.abs(phi)) < 1e-9 * free


def test_modified_wavefunction_without_points():
    state = build_resolvent(0.0, fermi())
    lam = np.array([-1.0, 0.0, 2.0])
    np.testing.assert_allclose(modified_wavefunction(state, (), lam), wavefunction_values(state, lam)[0])
    assert isinstance(modified_wavefunction(state, (0.5,), 0.0), float)


@pytest.mark.parametrize("nu", [(0.0,), (-0.7, 0.9)])
def test_modified_potential_is_second_log_derivative(nu):
    sigma, s, h = fermi(), 0.3, 1e-2
    state = build_resolvent(s, sigma)
    logs = np.array([janossy(state.rebuild(s + k * h), nu).log_value for k in (-2, -1, 0, 1, 2)])
    assert modified_potential(state, nu) == pytest.approx(_fd.derivative(logs, h, 2), abs=1e-6)


def test_modified_potential_without_points_is_potential():
    state = build_resolvent(0.0, fermi())
    assert modified_potential(state, ()) == potential(state).v


@pytest.mark.parametrize("sigma,nu", [(fermi(), (0.0,)), (fermi(), (-1.0, 0.5)), (zero(), (0.0,)), (indicator(0.0), (0.5,))])
def test_trace_route_agrees(sigma, nu):
    state = build_resolvent(-0.5, sigma)
    a = modified_potential(state, nu)
    b = modified_potential(state, nu, method="trace")
    assert isinstance(b, float)
    assert b == pytest.approx(a, abs=1e-6)


def test_unknown_potential_method():
    with pytest.raises(ValueError):
        modified_potential(build_resolvent(0.0, fermi()), (0.0,), method="guess")


@pytest.mark.parametrize("lam", [-2.0, 0.4, 1.5])
def test_modified_stark_equation(lam):
    state = build_resolvent(0.2, fermi())
    assert modified_stark_residual(state, (-0.5, 0.8), lam) < 1e-6


def test_soliton_potential_matches_log_kernel():
    # sigma = 0, one point: v = d^2/ds^2 log K_s(nu, nu)
    s, h, nu = 1.0, 1e-2, (0.0,)
    logs = np.array([log_det_kernel(KernelSurface.shifted(s + k * h), nu)[1] for k in (-2, -1, 0, 1, 2)])
    assert modified_potential(build_resolvent(s, zero()), nu) == pytest.approx(_fd.derivative(logs, h, 2), abs=1e-7)
