import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airythin.errors import ConfigurationError, DecayTooSlow, DomainError
from airythin.thinning import (
    SigmaKind,
    check_decay,
    custom,
    fermi,
    from_dict,
    indicator,
    lower_cutoff,
    parse_sigma,
    rescale,
    sigma_eval,
    sigma_prime_measure,
    tabulated,
    to_dict,
    zero,
)


def test_fermi_values():
    f = fermi(0.0, 1.0)
    assert sigma_eval(f, 0.0) == 0.5
    assert sigma_eval(f, 2.0) == pytest.approx(1 / (1 + math.exp(-2.0)), rel=1e-15)
    assert float(f.one_minus(40.0)) == pytest.approx(math.exp(-40.0) / (1 + math.exp(-40.0)), rel=1e-14)


def test_fermi_derivative_matches_difference():
    f = fermi(0.3, 0.7)
    x = np.linspace(-5, 5, 11)
    h = 1e-5
    fd = (f.smooth(x + h) - f.smooth(x - h)) / (2 * h)
    np.testing.assert_allclose(f.smooth_prime(x), fd, rtol=1e-8, atol=1e-12)


def test_indicator_right_limit():
    m = indicator(0.5)
    assert sigma_eval(m, 0.5) == 1.0
    assert sigma_eval(m, 0.5 - 1e-12) == 0.0
    dens, atoms = sigma_prime_measure(m)
    assert atoms == ((0.5, 1.0),)
    assert m.threshold == 0.5


def test_zero_model():
    z = zero()
    assert z.is_zero
    assert sigma_eval(z, 3.0) == 0.0
    assert lower_cutoff(z) is None


def test_fermi_with_atom():
    m = fermi(0.0, 1.0, amplitude=0.5, jumps=[(1.0, 0.5)])
    assert sigma_eval(m, 1.0) == pytest.approx(0.5 / (1 + math.exp(-1.0)) + 0.5)
    assert m.strong_params is None


def test_strong_params_fermi():
    sp = fermi(0.0, 2.0).strong_params
    assert sp.c_plus == 0.5 and sp.c_minus == 0.5


def test_rescale_identity_and_composition():
    f = fermi(1.0, 2.0)
    assert rescale(f, 1.0) is f
    r = rescale(f, 8.0)
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(r(x), f(2.0 * x), rtol=1e-15)
    np.testing.assert_allclose(r.smooth_prime(x), 2.0 * f.smooth_prime(2.0 * x), rtol=1e-14)
    i = rescale(indicator(1.0), 8.0)
    assert i.threshold == 0.5
    assert r.strong_params.c_plus == pytest.approx(2.0 * f.strong_params.c_plus)


@pytest.mark.parametrize("T", [0.0, -1.0, math.nan])
def test_rescale_rejects_bad_T(T):
    with pytest.raises(DomainError):
        rescale(fermi(), T)


def test_lower_cutoff_rules():
    assert lower_cutoff(fermi(0.0, 1.0)) == pytest.approx(-math.log(1e14) - 5.0)
    assert lower_cutoff(indicator(-1.5)) == -1.5


def test_decay_too_slow():
    f = custom(lambda x: np.exp(np.minimum(x, 0) * 1e-6), lambda x: 1e-6 * np.exp(np.minimum(x, 0) * 1e-6), kappa=0.1, cutoff=-2e4)
    with pytest.raises(DecayTooSlow):
        lower_cutoff(f)


def test_check_decay():
    assert check_decay(fermi())
    # decays like |x|^{-1/2} while claiming kappa = 1
    with pytest.raises(ConfigurationError, match="decay"):
        custom(lambda x: (1.0 + np.abs(x)) ** -0.5, lambda x: 0.5 * np.sign(-x) * (1.0 + np.abs(x)) ** -1.5, kappa=1.0)


def test_custom_requires_derivative():
    with pytest.raises(ConfigurationError):
        custom(lambda x: x, None, kappa=1.0)


def test_tabulated_reproduces_fermi():
    f = fermi()
    x = np.linspace(-40, 20, 601)
    t = tabulated(x, f(x), f.smooth_prime(x), kappa=1.0)
    y = np.linspace(-30, 15, 37)
    np.testing.assert_allclose(t(y), f(y), atol=1e-7)
    assert t.kind is SigmaKind.CUSTOM


@pytest.mark.parametrize(
    "text,kind",
    [("zero", SigmaKind.ZERO), ("fermi", SigmaKind.FERMI), ("fermi:1,2", SigmaKind.FERMI), ("indicator:0", SigmaKind.INDICATOR)],
)
def test_parse_sigma(text, kind):
    assert parse_sigma(text).kind is kind


@pytest.mark.parametrize("text", ["nope", "fermi:1", "fermi:0,-1", "indicator:x", "custom:/does/not/exist.json"])
def test_parse_sigma_errors(text):
    with pytest.raises(ConfigurationError):
        parse_sigma(text)


def test_parse_custom_file(tmp_path):
    f = fermi()
    x = np.linspace(-40, 20, 301)
    path = tmp_path / "s.json"
    path.write_text(json.dumps({"x": list(x), "sigma": list(f(x)), "sigma_prime": list(f.smooth_prime(x)), "kappa": 1.0}))
    m = parse_sigma(f"custom:{path}")
    assert m(0.0) == pytest.approx(0.5, abs=1e-6)


def test_dict_round_trip():
    for m in (zero(), fermi(0.5, 2.0), indicator(1.0), fermi(0.0, 1.0, 0.3, [(0.0, 0.2)])):
        assert from_dict(to_dict(m)) == m


@settings(max_examples=50, deadline=None)
@given(st.floats(-10, 10), st.floats(0.1, 5.0), st.floats(-50, 50))
def test_fermi_in_unit_interval(c, theta, x):
    v = sigma_eval(fermi(c, theta), x)
    assert 0.0 <= v <= 1.0
