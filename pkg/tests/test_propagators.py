import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgdesitter import propagators as P
from sgdesitter.modes import StateAlpha
from sgdesitter.propagators import Ordering

taus = st.floats(min_value=0.1, max_value=np.pi - 0.1)
thetas = st.floats(min_value=0.0, max_value=2 * np.pi)
S1 = StateAlpha(1.0)


def _off_cone(p, q, gap=1e-3):
    return abs(P.cosine_difference(p[0] - q[0], p[1] - q[1])) > gap


def test_antipodal_value():
    val = P.wightman((np.pi / 2, 0.0), (np.pi / 2, np.pi), S1)
    assert val == pytest.approx(0.25 - np.log(2) / (2 * np.pi), abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(taus, thetas, taus, thetas)
def test_hermiticity_and_time_reversal(t1, h1, t2, h2):
    p, q = (t1, h1), (t2, h2)
    if not _off_cone(p, q):
        return
    g = P.wightman(p, q, S1)
    assert abs(g - np.conj(P.wightman(q, p, S1))) < 1e-12
    g_rev = P.wightman((np.pi - t1, h1), (np.pi - t2, h2), S1)
    assert abs(g_rev - np.conj(g)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(taus, thetas, taus, thetas, st.floats(min_value=-5, max_value=5))
def test_rotation_invariance(t1, h1, t2, h2, shift):
    p, q = (t1, h1), (t2, h2)
    if not _off_cone(p, q):
        return
    a = P.wightman(p, q, S1)
    b = P.wightman((t1, h1 + shift), (t2, h2 + shift), S1)
    assert abs(a - b) < 1e-12


@settings(max_examples=100, deadline=None)
@given(taus, thetas, taus, thetas)
def test_orderings(t1, h1, t2, h2):
    p, q = (t1, h1), (t2, h2)
    if not _off_cone(p, q):
        return
    F = P.ordered_kernel(p, q, S1, Ordering.TIME_ORDERED)
    assert abs(F - P.ordered_kernel(q, p, S1, Ordering.TIME_ORDERED)) < 1e-12
    later, earlier = (p, q) if t1 >= t2 else (q, p)
    assert abs(F - P.wightman(later, earlier, S1)) < 1e-12
    D = P.ordered_kernel(p, q, S1, Ordering.ANTI_TIME_ORDERED)
    assert abs(D - P.wightman(earlier, later, S1)) < 1e-12
    if P.cosine_difference(t1 - t2, h1 - h2) > 0:  # spacelike
        assert abs(F - P.wightman(p, q, S1)) < 1e-12
        assert abs(D - P.wightman(p, q, S1)) < 1e-12


def test_timelike_feynman_example():
    p, q = (np.pi / 2 + 0.5, 0.0), (np.pi / 2, 0.0)
    F = P.ordered_kernel(p, q, S1, Ordering.TIME_ORDERED)
    assert abs(F - P.wightman(p, q, S1)) < 1e-12


def test_commutator_kernel():
    assert P.commutator_kernel((1.0, 0.0), (1.0, 1.0)) == 0.0
    later, earlier = (np.pi / 2 + 0.5, 0.0), (np.pi / 2, 0.0)
    assert abs(P.commutator_kernel(later, earlier)) == 0.5
    assert P.commutator_kernel(later, earlier) == -P.commutator_kernel(earlier, later)
    # G+(p, q) - G+(q, p) with G+ = -i iG+, independent of alpha
    for a in (0.5, 1.0, 2.0):
        s = StateAlpha(a)
        diff = -1j * (P.wightman(later, earlier, s) - P.wightman(earlier, later, s))
        assert abs(diff - P.commutator_kernel(later, earlier)) < 1e-12


def test_retarded_support():
    p = (1.5, 0.0)
    assert P.retarded(p, (2.0, 0.1)) == 0.0  # q in the future of p
    assert P.retarded(p, (1.5, 1.0)) == 0.0  # spacelike
    assert P.retarded(p, (1.0, 0.1)) == -0.5  # past cone


def test_lightcone_raises():
    with pytest.raises(P.LightConeSingularity):
        P.wightman((1.0, 0.0), (1.5, 0.5), S1)


def test_hadamard_coincidence_example():
    W = P.hadamard_w((np.pi / 2, 0.7), (np.pi / 2, 0.7), S1, M=0.5, H=1.0)
    assert float(W) == pytest.approx(np.pi - np.log(4), abs=1e-12)


def test_hadamard_continuous_across_z_one():
    # timelike (z > 1) and spacelike (z < 1) approaches to coincidence; the
    # symmetric averages cancel the linear term, leaving O(s^2)
    p = (1.2, 0.4)
    s = 1e-5
    W = lambda q: float(P.hadamard_w(p, q, S1))  # noqa: E731
    timelike = 0.5 * (W((1.2 + s, 0.4)) + W((1.2 - s, 0.4)))
    spacelike = 0.5 * (W((1.2, 0.4 + s)) + W((1.2, 0.4 - s)))
    assert abs(timelike - spacelike) < 1e-8
    assert abs(timelike - W(p)) < 1e-8


@settings(max_examples=50, deadline=None)
@given(taus, thetas, taus, thetas)
def test_hadamard_feynman_reconstruction(t1, h1, t2, h2):
    from sgdesitter.geometry import geodesic_z
    p, q = (t1, h1), (t2, h2)
    if not _off_cone(p, q, 1e-2) or geodesic_z(t1, h1, t2, h2) <= -0.99:
        return
    ref = P.ordered_kernel(p, q, S1, Ordering.TIME_ORDERED)
    assert abs(complex(P.hadamard_feynman(p, q, S1)) - ref) < 1e-10


def test_boost_variation_example():
    p = (np.pi / 3, 0.0)
    val = P.boost_variation(p, p, S1, "boost1")
    # boost of ln(sin tau sin tau') plus the zero-mode term
    expected = 1j * (1 / (4 * np.pi) + 2 * np.sin(np.pi / 3) * (np.pi / 6) / (4 * np.pi ** 2))
    assert abs(val - expected) < 1e-12
    assert abs(val - 0.102557j) < 1e-5


@settings(max_examples=50, deadline=None)
@given(taus, thetas, taus, thetas, st.sampled_from(["boost1", "boost2"]))
def test_boost_variation_vs_finite_difference(t1, h1, t2, h2, kind):
    p, q = (t1, h1), (t2, h2)
    if not _off_cone(p, q, 0.2):
        return
    fd = P.killing_action_fd(lambda a, b: -1j * P.wightman(a, b, S1), kind, p, q)
    assert abs(fd - P.boost_variation(p, q, S1, kind)) < 1e-5


def test_boost_derivative_form():
    p, q = (1.1, 0.3), (1.7, 2.0)
    for kind in ("boost1", "boost2"):
        M = P.boost_variation(p, q, S1, kind, derivative_form=True)
        assert M[1, 1] == 0
    alphas = np.geomspace(1, 100, 9)
    sizes = [abs(P.boost_variation(p, q, StateAlpha(a), "boost1", True)[0, 0]) for a in alphas]
    slope = np.polyfit(np.log(alphas), np.log(sizes), 1)[0]
    assert abs(slope + 2) < 0.01


def test_minkowski_limit():
    pairs = [(0.0, 0.0, 0.0, 1.0)]
    assert P.minkowski_compare(0.01, 1.0, pairs) < 0.05
    Hs = np.array([1e-2, 1e-3, 1e-4])
    devs = [P.minkowski_compare(H, 1.0, pairs + [(0.3, 0.1, -0.2, 0.5)]) for H in Hs]
    assert np.polyfit(np.log(Hs), np.log(devs), 1)[0] >= 1.0 - 1e-9


def test_alpha_for_mass_domain():
    with pytest.raises(ValueError):
        P.alpha_for_mass(1.0, 0.1)
    assert P.alpha_for_mass(1e-3, 1.0) > 0


def test_green_identity_single():
    from sgdesitter.testfunctions import TestFunction
    h = TestFunction.tau_theta_bump(1.5, 0.5, 3.0, 1.0)
    x = (1.6, 3.2)
    assert abs(P.green_identity_lhs(h, x) - float(h(*x))) < 1e-3
