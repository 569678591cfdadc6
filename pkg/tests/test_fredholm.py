import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airythin.errors import ConfigurationError
from airythin.fredholm import (
    build_resolvent,
    build_scheme,
    gap_probability,
    log_gap_probability,
    resolvent_apply,
    resolvent_kernel,
    resolvent_kernel_matrix,
)
from airythin.thinning import fermi, indicator, zero
from oracles import fermi as fermi_fn
from oracles import gap_oracle, gl_rule, sp_kernel

# frozen from gap_oracle (plain Gauss-Legendre Nystrom on scipy Airy values)
F_TW_0 = 0.9693728283552631
F_TW_M2 = 0.4132241425051228
FERMI_GAP_0 = 0.7906900995195267


def test_tracy_widom_values():
    assert gap_probability(build_resolvent(0.0, indicator(0.0))) == pytest.approx(F_TW_0, rel=1e-12)
    assert gap_probability(build_resolvent(-2.0, indicator(0.0))) == pytest.approx(F_TW_M2, rel=1e-12)


def test_fermi_gap_value():
    assert gap_probability(build_resolvent(0.0, fermi())) == pytest.approx(FERMI_GAP_0, rel=1e-12)


def test_oracle_agrees_for_shifted_fermi():
    sig = fermi(0.5, 0.7)
    ref = gap_oracle(-1.0, lambda x: fermi_fn(x, 0.5, 0.7), -30.0, 17.0, 30, 20)
    assert gap_probability(build_resolvent(-1.0, sig)) == pytest.approx(ref, rel=1e-11)


def test_zero_sigma_trivial():
    st_ = build_resolvent(1.0, zero())
    assert st_.gap == 1.0 and st_.n == 0 and st_.dlog_gap == 0.0


def test_grid_doubling_convergence():
    sig = fermi()
    vals = [build_resolvent(0.0, sig, n=n).log_det for n in (50, 100, 200, 400)]
    diffs = [abs(a - vals[-1]) for a in vals[:-1]]
    assert diffs[0] < 1e-2 and diffs[1] < 1e-7 and diffs[2] < 1e-13
    assert diffs[1] < 1e-4 * diffs[0]


@settings(max_examples=20, deadline=None)
@given(st.floats(-4.0, 6.0))
def test_gap_in_unit_interval(s):
    g = build_resolvent(s, fermi()).gap
    assert 0.0 < g <= 1.0


def test_gap_monotone_in_s():
    gaps = [build_resolvent(s, indicator(0.0)).gap for s in np.linspace(-4, 6, 21)]
    assert np.all(np.diff(gaps) > 0)


def test_scheme_layout():
    sch = build_scheme(-3.0, fermi(0.0, 1.0, 0.5, [(1.0, 0.5)]), 120, extra_splits=[-10.0])
    assert sch.truncation[1] == pytest.approx(19.0)
    edges = [p[0] for p in sch.panels] + [sch.panels[-1][1]]
    assert -10.0 in edges and 1.0 in edges
    assert sch.n == 120
    assert build_scheme(10.0, indicator(0.0)).truncation[1] == 12.0


def test_scheme_mismatch_rejected():
    sch = build_scheme(0.0, fermi())
    with pytest.raises(ConfigurationError):
        build_resolvent(1.0, fermi(), sch)


@pytest.mark.parametrize("n", [8, 16.5])
def test_bad_node_count(n):
    with pytest.raises(ConfigurationError):
        build_scheme(0.0, fermi(), n)


def test_resolvent_kernel_symmetric():
    state = build_resolvent(0.3, fermi())
    lam = np.array([-2.0, 0.0, 1.5])
    L = resolvent_kernel_matrix(state, lam)
    np.testing.assert_allclose(L, L.T, rtol=1e-12)
    assert resolvent_kernel(state, -2.0, 1.5) == pytest.approx(L[0, 2], rel=1e-12)


def test_neumann_series_small_coupling():
    s, amp = 0.0, 0.01
    rhs = lambda x: np.exp(-0.5 * np.asarray(x) ** 2)
    lam = [-1.0, 0.5, 2.0]
    state = build_resolvent(s, fermi(0.0, 1.0, amp))
    got = resolvent_apply(state, rhs, lam)
    x, w = gl_rule(-40.0, 16.0, 28, 20)
    mw = w * fermi_fn(x, amplitude=amp)
    kn = sp_kernel(x + s, x + s)
    ko = sp_kernel(np.array(lam) + s, x + s)
    # rhs + K M rhs + (K M)^2 rhs
    ref = rhs(np.array(lam)) + ko @ (mw * rhs(x)) + ko @ (mw * (kn @ (mw * rhs(x))))
    np.testing.assert_allclose(got, ref, atol=1e-8)


def test_resolvent_apply_scalar():
    state = build_resolvent(0.0, fermi())
    v = resolvent_apply(state, lambda x: np.ones_like(x), 0.5)
    assert isinstance(v, float)


def test_high_precision_backend_agrees():
    sig = fermi()
    lo = build_resolvent(-1.0, sig, n=120)
    hi = build_resolvent(-1.0, sig, n=120, precision="high", prec=128)
    assert hi.log_det == pytest.approx(lo.log_det, rel=1e-12)
    assert hi.dlog_gap == pytest.approx(lo.dlog_gap, rel=1e-11)
    np.testing.assert_allclose(hi.point_data([0.3])["phi"], lo.point_data([0.3])["phi"], rtol=1e-11)


def test_log_gap_far_right():
    st_ = build_resolvent(12.0, fermi())
    ref = math.log(gap_oracle(12.0, fermi_fn, -40.0, 16.0, 28, 20))
    assert log_gap_probability(st_) == pytest.approx(ref, rel=1e-7)
