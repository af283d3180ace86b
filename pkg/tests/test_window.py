import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from fdsse.window import (
    bessel_i0,
    deformed_hann,
    flat,
    hann_beta_to_tap,
    hann_from_ripple,
    kaiser,
    kaiser_from_ripple,
    ripple_db,
    three_tap_equivalent,
    window_from_config,
)


def test_hann_beta_one_is_flat():
    w = deformed_hann(96, 1.0)
    assert np.allclose(w.coeffs, 1.0, atol=1e-14)


def test_hann_ripple_minus_11():
    w = deformed_hann(96, 10 ** (-11 / 20))
    assert ripple_db(w) == pytest.approx(-11.0, abs=0.1)


def test_hann_normalization_96():
    w = deformed_hann(96, 0.5)
    assert np.sum(w.coeffs**2) == pytest.approx(96.0, abs=1e-9)


@given(
    st.integers(min_value=2, max_value=700),
    st.floats(min_value=1e-3, max_value=1.0),
)
@settings(max_examples=60, deadline=None)
def test_hann_invariants(nsc, beta):
    w = deformed_hann(nsc, beta)
    assert abs(np.sum(w.coeffs**2) - nsc) < 1e-9
    assert np.max(np.abs(w.coeffs - w.coeffs[::-1])) < 1e-12
    assert np.all(w.coeffs > 0)


@given(
    st.integers(min_value=2, max_value=700),
    st.floats(min_value=0.0, max_value=6.0),
)
@settings(max_examples=60, deadline=None)
def test_kaiser_invariants(nsc, kappa):
    w = kaiser(nsc, kappa)
    assert abs(np.sum(w.coeffs**2) - nsc) < 1e-9
    assert np.max(np.abs(w.coeffs - w.coeffs[::-1])) < 1e-12
    assert np.all(w.coeffs > 0)


def test_kaiser_zero_is_flat():
    assert np.allclose(kaiser(64, 0.0).coeffs, 1.0, atol=1e-14)


def test_kaiser_2_ripple():
    assert ripple_db(kaiser(96, 2.0)) == pytest.approx(-7.15, abs=0.05)


def test_kaiser_min_at_edges():
    w = kaiser(96, 2.0).coeffs
    assert w.argmin() in (0, 95)
    assert w[0] == pytest.approx(w[95], abs=1e-12)


def test_i0_series_vs_scipy():
    x = np.linspace(0.0, 20.0, 257)
    mine = bessel_i0(x)
    ref = scipy.special.i0(x)
    assert np.max(np.abs(mine - ref) / ref) < 1e-12


@pytest.mark.parametrize("nsc", [48, 96, 600])
@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0, 3.0, 4.0])
def test_kaiser_ripple_formula(nsc, kappa):
    # ripple ~ -20 log10(I0(kappa))
    w = kaiser(nsc, kappa)
    assert abs(ripple_db(w) + 20 * np.log10(scipy.special.i0(kappa))) < 0.1


def test_hann_ripple_converges_to_beta():
    beta = 10 ** (-11 / 20)
    target = 20 * np.log10(beta)
    errs = [abs(ripple_db(deformed_hann(n, beta)) - target) for n in (96, 600, 4800)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


def test_three_tap_zero_is_flat():
    w = three_tap_equivalent(96, 0.0)
    assert np.allclose(w.coeffs, 1.0, atol=1e-14)


def test_three_tap_round_trip():
    for b in np.linspace(0.0, 0.499, 23):
        beta = (1 - 2 * b) / (1 + 2 * b)
        assert hann_beta_to_tap(beta) == pytest.approx(b, abs=1e-12)
        w = three_tap_equivalent(96, b)
        assert w.shape == pytest.approx(beta, abs=1e-12)


def test_three_tap_11db_mapping():
    beta = 10 ** (-11 / 20)
    b = hann_beta_to_tap(beta)
    w = three_tap_equivalent(96, b)
    assert ripple_db(w) == pytest.approx(-11.0, abs=0.1)


def test_ripple_flat_zero():
    assert ripple_db(flat(96)) == 0.0


def test_ripple_rejects_nonpositive():
    w = flat(8)
    bad = w.coeffs.copy()
    bad[3] = 0.0
    from fdsse.window import FdssWindow

    with pytest.raises(ValueError):
        ripple_db(FdssWindow(bad, "flat", None, 8))


def test_families_differ_pointwise_at_matched_ripple():
    wk = kaiser(96, 2.0)
    wh = hann_from_ripple(96, ripple_db(wk))
    assert ripple_db(wh) == pytest.approx(ripple_db(wk), abs=0.02)
    assert np.max(np.abs(wh.coeffs - wk.coeffs)) > 1e-3


def test_kaiser_from_ripple():
    w = kaiser_from_ripple(96, -14.0)
    assert ripple_db(w) == pytest.approx(-14.0, abs=1e-6)


@pytest.mark.parametrize(
    "bad,err",
    [
        (dict(nsc=96, beta=0.0), ValueError),
        (dict(nsc=96, beta=1.5), ValueError),
        (dict(nsc=1, beta=0.5), ValueError),
    ],
)
def test_hann_rejects(bad, err):
    with pytest.raises(err):
        deformed_hann(bad["nsc"], bad["beta"])


def test_kaiser_rejects_negative():
    with pytest.raises(ValueError):
        kaiser(96, -0.1)


def test_three_tap_rejects_range():
    for b in (-0.01, 0.5, 0.7):
        with pytest.raises(ValueError):
            three_tap_equivalent(96, b)


def test_window_from_config():
    w = window_from_config({"family": "hann", "ripple_db": -11}, 96)
    assert w.family == "hann"
    assert ripple_db(w) == pytest.approx(-11.0, abs=0.1)
    w = window_from_config({"family": "kaiser", "kappa": 2}, 96)
    assert w.family == "kaiser"
    w = window_from_config({"family": "flat"}, 96)
    assert np.allclose(w.coeffs, 1.0)
    with pytest.raises(ValueError):
        window_from_config({"family": "rrc"}, 96)
    with pytest.raises(ValueError):
        window_from_config({"family": "hann"}, 96)
