import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgdesitter import fock, geometry, propagators, vertex
from sgdesitter.modes import StateAlpha
from sgdesitter.propagators import Ordering
from sgdesitter.testfunctions import TestFunction
from sgdesitter.vertex import VertexConfiguration as VC

B = np.sqrt(2 * np.pi)


def test_empty_configuration():
    assert vertex.vertex_correlator(VC.build([], [])) == 1.0


def test_neutral_pair_limit_example():
    cfg = VC.build([B, -B], [(np.pi / 2, 0.0), (np.pi / 2, np.pi)], alpha=None)
    assert vertex.vertex_correlator(cfg) == pytest.approx(0.5, abs=1e-14)


def test_one_point_example():
    cfg = VC.build([1.0], [(np.pi / 2, 0.3)], alpha=1.0)
    assert vertex.vertex_correlator(cfg) == pytest.approx(np.exp(-1 / 8), abs=1e-14)
    assert abs(vertex.vertex_correlator(cfg) - 0.88250) < 1e-5


def test_non_neutral_limit_vanishes():
    cfg = VC.build([B, B], [(1.0, 0.0), (1.0, 2.0)], alpha=None)
    assert vertex.vertex_correlator(cfg) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.3, max_value=2.8), st.floats(min_value=0.3, max_value=2.8),
       st.floats(min_value=0.5, max_value=5.0), st.floats(min_value=0.5, max_value=5.0))
def test_neutral_alpha_dependence_isolated(t1, t2, a1, a2):
    pts = [(t1, 0.0), (t2, np.pi)]
    if abs(propagators.cosine_difference(t1 - t2, np.pi)) < 1e-3:
        return
    g = [1.3, -1.3]
    weighted = sum(gj * p[0] for gj, p in zip(g, pts))
    vals = []
    for a in (a1, a2):
        v = vertex.vertex_correlator(VC.build(g, pts, alpha=a))
        vals.append(v * np.exp(weighted ** 2 / (8 * np.pi ** 2 * a * a)))
    assert abs(vals[0] - vals[1]) < 1e-12 * max(1.0, abs(vals[0]))
    limit = vertex.vertex_correlator(VC.build(g, pts, alpha=None))
    assert abs(vals[0] - limit) < 1e-12 * max(1.0, abs(limit))


def test_non_neutral_suppression_slope():
    g = [B, B, -B]
    pts = [(1.2, 0.4), (1.25, 1.6), (1.3, 3.5)]
    a2 = np.linspace(25, 100, 8)
    logs = [np.log(abs(vertex.vertex_correlator(VC.build(g, pts, alpha=np.sqrt(x))))) for x in a2]
    slope = np.polyfit(a2, logs, 1)[0]
    assert abs(slope / (-sum(g) ** 2 / 8) - 1) < 0.01


def test_orderings_agree_when_spacelike():
    g = [B, -B, 0.5]
    pts = [(1.2, 0.4), (1.25, 1.6), (1.3, 3.5)]
    vals = [vertex.vertex_correlator(VC.build(g, pts, o)) for o in Ordering]
    assert max(abs(v - vals[0]) for v in vals) < 1e-12


def test_time_ordered_permutation_symmetry():
    g = [B, -B, 0.5 * B, -0.5 * B]
    pts = [(1.0, 0.2), (1.4, 1.1), (1.8, 2.9), (1.1, 4.0)]
    base = vertex.vertex_correlator(VC.build(g, pts, Ordering.TIME_ORDERED))
    for perm in itertools.permutations(range(4)):
        cfg = VC.build([g[i] for i in perm], [pts[i] for i in perm], Ordering.TIME_ORDERED)
        assert abs(vertex.vertex_correlator(cfg) - base) < 1e-12


def test_rotation_covariance_and_boost_breaking():
    g = [B, -B]
    pts = [(1.2, 0.4), (1.5, 2.0)]
    base = vertex.vertex_correlator(VC.build(g, pts))
    rot = geometry.GroupParams(a=0.7)
    moved = [tuple(float(v) for v in geometry.transform(rot, *p)) for p in pts]
    assert abs(vertex.vertex_correlator(VC.build(g, moved)) - base) < 1e-12
    boost = geometry.GroupParams(b=0.3)
    moved = [tuple(float(v) for v in geometry.transform(boost, *p)) for p in pts]
    assert abs(vertex.vertex_correlator(VC.build(g, moved)) - base) > 1e-6


@pytest.mark.parametrize("gammas", [[1.0], [B, -B], [B, B, -B]])
def test_fock_oracle(gammas):
    pts = [(1.2, 0.4), (1.25, 1.6), (1.3, 3.5)][:len(gammas)]
    cfg = VC.build(gammas, pts, alpha=1.0)
    eps = 0.05
    tr = fock.Truncation(n_max=640, occ_max=12, total_max=None, zero_occ_max=60)
    val, tail = fock.truncated_vertex_expectation(cfg, tr, epsilon=eps)
    assert abs(val - vertex.vertex_correlator(cfg, epsilon=eps)) < 1e-4
    assert tail < 1e-1


def test_fields_reduce_to_two_point_function():
    p, q = (1.0, 0.3), (1.4, 2.0)
    val = vertex.vertex_with_fields(VC.build([], [], alpha=1.0), [p, q])
    assert abs(val - propagators.wightman(p, q, StateAlpha(1.0))) < 1e-14


def test_field_with_non_neutral_limit_vanishes():
    cfg = VC.build([B], [(1.0, 0.3)], alpha=None)
    assert vertex.vertex_with_fields(cfg, [(1.5, 2.0)]) == 0.0


def test_dressing_is_a_phase():
    cfg = VC.build([B, -B], [(1.2, 0.4), (1.5, 2.0)], alpha=1.0)
    f = TestFunction.tau_theta_bump(1.0, 0.3, 1.0, 0.8)
    assert abs(abs(vertex.vertex_with_fields(cfg, dressing=f)) - abs(vertex.vertex_correlator(cfg))) < 1e-12


@pytest.mark.parametrize("gj,gk,target,tol", [(B, -B, 1.0, 0.05), (1.0, -1.0, 1 / (2 * np.pi), 0.01)])
def test_scaling_degree(gj, gk, target, tol):
    est, resid, flagged = vertex.scaling_degree_estimate(gj, gk, (1.3, 0.5), (1.0, 0.3), np.geomspace(1e-6, 1e-2, 12))
    assert abs(est - target) < tol
    assert not flagged


def test_scaling_degree_negative_for_like_charges():
    est, _, _ = vertex.scaling_degree_estimate(B, B, (1.3, 0.5), (0.0, 1.0), np.geomspace(1e-6, 1e-2, 12))
    assert est < 0


def test_scaling_degree_needs_scales():
    with pytest.raises(ValueError):
        vertex.scaling_degree_estimate(1.0, -1.0, (1.3, 0.5), (0.0, 1.0), [1e-3, 1e-2])
