import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgdesitter import geometry
from sgdesitter.geometry import CausalClass, GroupParams, Point

taus = st.floats(min_value=0.05, max_value=np.pi - 0.05)
thetas = st.floats(min_value=0.0, max_value=2 * np.pi, exclude_max=True)
params = st.floats(min_value=-1.0, max_value=1.0)


def test_embed_examples():
    np.testing.assert_allclose(geometry.embed(np.pi / 2, 0.0, 1.0), [0.0, 1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(geometry.embed(np.pi / 2, np.pi / 2, 2.0), [0.0, 0.0, 0.5], atol=1e-15)


@given(taus, thetas, st.floats(min_value=0.1, max_value=10.0))
def test_embed_on_hyperboloid_and_inverse(t, h, H):
    X = geometry.embed(t, h, H)
    assert geometry.hyperboloid_residual(X, H) < 1e-12
    t2, h2 = geometry.intrinsic(X, H)
    assert abs(t2 - t) < 1e-12
    assert abs(geometry.wrap_difference(h2 - h)) < 1e-12


def test_point_validation():
    with pytest.raises(ValueError):
        Point(0.0, 1.0)
    with pytest.raises(ValueError):
        Point(np.pi, 1.0)
    assert Point(1.0, -0.5).theta == pytest.approx(2 * np.pi - 0.5)


def test_transform_identity_and_rotation():
    p = (1.1, 0.3)
    t, h = geometry.transform(GroupParams(), *p)
    assert (float(t), float(h)) == pytest.approx(p, abs=1e-15)
    t, h = geometry.transform(GroupParams(a=np.pi / 2), np.pi / 2, 0.0)
    assert float(t) == pytest.approx(np.pi / 2, abs=1e-15)
    assert float(h) == pytest.approx(np.pi / 2, abs=1e-15)


def test_small_boost_leading_order():
    b = 0.01
    t, _ = geometry.transform(GroupParams(b=b), np.pi / 2, 0.0)
    assert abs(float(t) - (np.pi / 2 + b)) < 2 * b * b


@settings(max_examples=200, deadline=None)
@given(params, params, params, taus, thetas)
def test_transform_roundtrip(a, b, c, t, h):
    g = GroupParams(a, b, c)
    t2, h2 = geometry.transform(g, t, h)
    t3, h3 = geometry.transform(g, t2, h2, inverse=True)
    assert abs(t3 - t) < 1e-9
    assert abs(geometry.wrap_difference(h3 - h)) < 1e-9


@settings(max_examples=100, deadline=None)
@given(params, params, params, st.floats(min_value=0.4, max_value=np.pi - 0.4), thetas)
def test_measure_invariance(a, b, c, t, h):
    g = GroupParams(0.5 * a, 0.5 * b, 0.5 * c)
    ratio = geometry.measure_ratio(g, t, h)
    assert abs(geometry.flow_jacobian_fd(g, t, h) - ratio) <= 1e-8 * ratio


def test_flow_coefficients_continuous_across_s2_zero():
    vals = [geometry.flow_matrix(GroupParams(a, 0.5, 0.0)) for a in (0.5 - 1e-9, 0.5, 0.5 + 1e-9)]
    assert np.max(np.abs(vals[0] - vals[2])) < 1e-8
    assert np.max(np.abs(vals[1] - vals[0])) < 1e-8


@given(taus, thetas)
def test_flow_matrix_preserves_minkowski_form(t, h):
    eta = np.diag([-1.0, 1.0, 1.0])
    L = geometry.flow_matrix(GroupParams(0.3, -0.7, 0.4))
    np.testing.assert_allclose(L.T @ eta @ L, eta, atol=1e-12)


def test_geodesic_z_examples():
    assert geometry.geodesic_z(1.0, 2.0, 1.0, 2.0) == pytest.approx(1.0, abs=1e-15)
    assert geometry.geodesic_z(np.pi / 2, 0.0, np.pi / 2, np.pi) == pytest.approx(-1.0, abs=1e-15)
    # 1 + (1 - cos 0.5) / cos 0.5
    assert geometry.geodesic_z(np.pi / 2, 0.0, np.pi / 2 + 0.5, 0.0) == pytest.approx(1.13949, abs=1e-5)


@settings(max_examples=50, deadline=None)
@given(taus, thetas, taus, thetas)
def test_z_gradient_identity(t1, h1, t2, h2):
    d = 1e-5
    z = geometry.geodesic_z(t1, h1, t2, h2)
    zt = (geometry.geodesic_z(t1 + d, h1, t2, h2) - geometry.geodesic_z(t1 - d, h1, t2, h2)) / (2 * d)
    zh = (geometry.geodesic_z(t1, h1 + d, t2, h2) - geometry.geodesic_z(t1, h1 - d, t2, h2)) / (2 * d)
    H = 1.7
    lhs = geometry.inverse_metric_norm(zt, zh, t1, H)
    assert abs(lhs - H * H * (1 - z * z)) <= 1e-6 * max(1.0, abs(z * z))


def test_causal_class_examples():
    p = Point(np.pi / 2, 0.0)
    assert geometry.causal_class(p, Point(np.pi / 2 + 0.3, 0.0)) is CausalClass.TIMELIKE_FUTURE
    assert geometry.causal_class(Point(np.pi / 2 + 0.3, 0.0), p) is CausalClass.TIMELIKE_PAST
    assert geometry.causal_class(p, Point(np.pi / 2, 1.0)) is CausalClass.SPACELIKE
    assert geometry.causal_class(p, Point(np.pi / 2 + 0.5, 0.5)) is CausalClass.LIGHTLIKE


def test_killing_brackets():
    rng = np.random.default_rng(0)
    t, h = rng.uniform(0.1, 3.0, 100), rng.uniform(0, 2 * np.pi, 100)
    b = lambda x, y: geometry.lie_bracket(x, y, t, h)  # noqa: E731
    kf = lambda k: np.array(geometry.killing_field(k, t, h))  # noqa: E731
    assert np.max(np.abs(b("rot", "boost1") + kf("boost2"))) < 1e-10
    assert np.max(np.abs(b("rot", "boost2") - kf("boost1"))) < 1e-10
    assert np.max(np.abs(b("boost1", "boost2") - kf("rot"))) < 1e-10
    flow = geometry.lie_bracket_from_flows("boost1", "boost2", t, h)
    assert np.max(np.abs(flow - kf("rot"))) < 1e-6


@given(taus, thetas)
def test_killing_fields_are_conformal_killing_of_flat_metric(t, h):
    # for the conformally flat metric the field must satisfy the Killing equation
    # of (-dtau^2 + dtheta^2)/sin^2 tau: d_tau xi^tau = d_theta xi^theta = cot(tau) xi^tau
    for kind in ("rot", "boost1", "boost2"):
        J = geometry.killing_jacobian(kind, t, h)
        xt, _ = geometry.killing_field(kind, t, h)
        assert abs(J[0, 0] - J[1, 1]) < 1e-12
        assert abs(J[0, 1] - J[1, 0]) < 1e-12
        assert abs(J[0, 0] - np.cos(t) / np.sin(t) * xt) < 1e-12
