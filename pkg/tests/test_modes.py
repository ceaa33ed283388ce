import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgdesitter import modes, propagators
from sgdesitter.modes import Mode, Regulator, StateAlpha


def test_mode_values():
    s = StateAlpha(1.0)
    assert modes.mode_fn(1, s, 0.0, 0.0) == pytest.approx(1 / np.sqrt(4 * np.pi), abs=1e-15)
    assert modes.mode_fn(1, s, 0.0, 0.0) == pytest.approx(0.2820948, abs=1e-7)
    assert modes.mode_fn(-1, s, 0.0, 0.0) == pytest.approx(1 / np.sqrt(4 * np.pi), abs=1e-15)
    assert modes.mode_fn(0, s, 0.0, 1.234) == pytest.approx(0.5 + 0.25j, abs=1e-15)


def test_state_validation():
    with pytest.raises(ValueError):
        StateAlpha(0.0)
    with pytest.raises(ValueError):
        Regulator(-1.0)


@given(st.floats(min_value=0.01, max_value=100.0))
def test_zero_mode_norm_closed_form(alpha):
    assert StateAlpha(alpha).zero_mode_norm() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n,m,expected", [(1, 1, 1.0), (0, 3, 0.0), (0, 0, 1.0), (-2, -2, 1.0), (2, -2, 0.0)])
def test_inner_products(n, m, expected):
    s = StateAlpha(1.3)
    val, res = modes.inner_product(Mode(n, s), Mode(m, s), np.pi / 2)
    assert abs(val - expected) < 1e-10
    assert res < 1e-10


def test_inner_product_tau_independent():
    s = StateAlpha(0.7)
    f = lambda t, h: Mode(0, s)(t, h) + 0.3 * Mode(2, s)(t, h)  # noqa: E731
    g = lambda t, h: Mode(0, s)(t, h) - 0.2j * Mode(2, s)(t, h)  # noqa: E731
    vals = [modes.inner_product(f, g, t0)[0] for t0 in (0.3, np.pi / 2, 2.5)]
    assert max(abs(v - vals[0]) for v in vals) < 1e-9


def test_mode_sum_matches_epsilon_closed_form():
    s = StateAlpha(1.0)
    p = q = (np.pi / 2, 0.0)
    reg = Regulator(0.1)
    val = modes.mode_sum_kernel(2000, reg, p, q, s)
    assert abs(val - propagators.wightman(p, q, s, epsilon=0.1)) < 1e-8


def test_mode_sum_antipodal_value():
    s = StateAlpha(1.0)
    p, q = (np.pi / 2, 0.0), (np.pi / 2, np.pi)
    val = modes.mode_sum_kernel(100_000, Regulator(1e-3), p, q, s)
    expected = 0.25 - np.log(2) / (2 * np.pi)
    assert abs(val - expected) < 1e-4
    assert expected == pytest.approx(0.139682, abs=1e-6)


def test_antisymmetric_part_alpha_independent():
    p, q = (1.0, 0.3), (1.6, 0.5)
    reg = Regulator(0.05)
    parts = []
    for a in (0.5, 1.0, 2.0):
        s = StateAlpha(a)
        g1, g2 = modes.mode_sum_kernel(800, reg, p, q, s), modes.mode_sum_kernel(800, reg, q, p, s)
        parts.append((g1 - g2).imag)
    assert max(abs(v - parts[0]) for v in parts) < 1e-10


def test_mode_sum_deterministic():
    s = StateAlpha(1.0)
    a = modes.mode_sum_kernel(12345, Regulator(0.01), (1.0, 0.1), (2.0, 0.4), s)
    b = modes.mode_sum_kernel(12345, Regulator(0.01), (1.0, 0.1), (2.0, 0.4), s)
    assert a == b


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.9, max_value=2.2), st.floats(min_value=0.2, max_value=0.6),
       st.lists(st.floats(min_value=-2, max_value=2), min_size=3, max_size=3),
       st.lists(st.floats(min_value=0, max_value=2 * np.pi), min_size=3, max_size=3))
def test_smeared_two_point_nonnegative(c, w, coeffs, phases):
    from sgdesitter.testfunctions import Bump, TestFunction, Trig
    f = TestFunction([(1.0, Bump(c, w), Trig(coeffs, phases))])
    phis = modes.smeared_modes(f, StateAlpha(1.0), 4, n_tau=64, n_theta=32)
    assert np.sum(np.abs(phis) ** 2) >= -1e-10
    # only the harmonics present in the angular profile survive
    assert np.max(np.abs(phis[[0, 1, 7, 8]])) < 1e-12
