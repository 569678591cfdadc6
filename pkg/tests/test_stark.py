import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airythin import _fd
from airythin.fredholm import build_resolvent, resolvent_kernel_matrix
from airythin.specfun import airy, airy_arrays
from airythin.stark import dlog_gap, idpii_residual, potential, wavefunction, wavefunction_values
from airythin.thinning import fermi, indicator, zero
from oracles import gl_rule


def test_zero_sigma_is_airy():
    state = build_resolvent(0.7, zero())
    lam = np.linspace(-5, 5, 11)
    phi, dphi = wavefunction_values(state, lam)
    ai, aip = airy_arrays(lam + 0.7)
    np.testing.assert_allclose(phi, ai, atol=1e-14)
    np.testing.assert_allclose(dphi, aip, atol=1e-14)
    assert potential(state).v == 0.0


def test_wavefunction_sample():
    state = build_resolvent(0.0, fermi())
    w = wavefunction(state, 0.5)
    assert w.lam == 0.5 and w.s == 0.0
    phi, dphi = wavefunction_values(state, [0.5])
    assert w.phi == phi[0] and w.phi_ds == dphi[0]


def test_boundary_asymptotics_large_s():
    state = build_resolvent(6.0, fermi())
    assert abs(wavefunction(state, 0.0).phi / airy(6.0).ai - 1.0) < 0.02


def test_analytic_and_stencil_shift_derivative_agree():
    state = build_resolvent(-0.5, fermi())
    lam = np.array([-3.0, 0.0, 2.0])
    _, a = wavefunction_values(state, lam)
    _, b = wavefunction_values(state, lam, method="stencil")
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_unknown_method():
    with pytest.raises(ValueError):
        wavefunction_values(build_resolvent(0.0, fermi()), [0.0], method="magic")


@pytest.mark.parametrize("sigma", [fermi(), indicator(0.0), fermi(0.0, 1.0, 0.5, [(0.5, 0.5)])], ids=["fermi", "indicator", "mixed"])
def test_potential_is_second_log_derivative(sigma):
    s, h = 0.2, 1e-2
    state = build_resolvent(s, sigma)
    logs = np.array([state.rebuild(s + k * h).log_det for k in (-2, -1, 0, 1, 2)])
    assert potential(state).v == pytest.approx(_fd.derivative(logs, h, 2), abs=1e-6)
    assert dlog_gap(state) == pytest.approx(_fd.derivative(logs, h, 1), abs=1e-8)


def test_hastings_mcleod_matches_airy_at_right():
    s = 4.0
    y2 = -potential(build_resolvent(s, indicator(0.0))).v
    assert np.sqrt(y2) == pytest.approx(airy(s).ai, rel=1e-5)


def test_shift_derivative_of_resolvent_kernel():
    sigma, s, h = fermi(), 0.0, 1e-2
    lam = np.array([0.0, 1.0, -1.5])
    mats = [resolvent_kernel_matrix(build_resolvent(s + k * h, sigma), lam) for k in (-2, -1, 0, 1, 2)]
    dL = _fd.derivative(np.stack(mats), h, 1)
    phi, _ = wavefunction_values(build_resolvent(s, sigma), lam)
    np.testing.assert_allclose(dL, -np.outer(phi, phi), atol=1e-6)


def test_resolvent_kernel_as_integral_of_wavefunctions():
    sigma, s = fermi(), -0.5
    lam = np.array([0.0, 1.0])
    r, w = gl_rule(s, s + 24.0, 12, 12)
    acc = np.zeros((2, 2))
    for ri, wi in zip(r, w):
        phi, _ = wavefunction_values(build_resolvent(ri, sigma), lam)
        acc += wi * np.outer(phi, phi)
    L = resolvent_kernel_matrix(build_resolvent(s, sigma), lam)
    np.testing.assert_allclose(acc, L, atol=1e-6)


@settings(max_examples=10, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_idpii_random(lam, s):
    assert idpii_residual(build_resolvent(s, fermi()), lam) < 1e-4
