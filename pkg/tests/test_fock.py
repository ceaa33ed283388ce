import numpy as np
import pytest
import scipy.sparse as sp

from sgdesitter import fock, vertex
from sgdesitter.modes import StateAlpha
from sgdesitter.vertex import VertexConfiguration as VC

S1 = StateAlpha(1.0)
SMALL = fock.Truncation(n_max=4, occ_max=3, total_max=4)


@pytest.fixture(scope="module")
def small():
    return fock.FockSpace(SMALL)


def _occ(tr, **occupied):
    occ = np.zeros(2 * tr.n_max + 1, dtype=int)
    for key, k in occupied.items():
        occ[int(key[1:]) * (-1 if key[0] == "m" else 1) + tr.n_max] = k
    return occ


def test_vacuum_matrix_element(small):
    a1 = fock.ladder_matrix(1, False, SMALL, small)
    a1d = fock.ladder_matrix(1, True, SMALL, small)
    vac = small.vacuum()
    assert np.vdot(vac, a1 @ (a1d @ vac)) == pytest.approx(1.0, abs=1e-15)


def test_commutators_and_cutoff_boundary(small):
    # per-mode caps alone keep distinct modes exactly commuting
    prod = fock.FockSpace(fock.Truncation(3, 2, None))
    a1, a2d = prod.ladder(1), prod.ladder(2, True)
    c12 = (a1 @ a2d - a2d @ a1).tocsr()
    assert c12.nnz == 0 or abs(c12).max() == 0
    a1, a2d = small.ladder(1), small.ladder(2, True)
    low = small.low_sector(1)
    assert abs((a1 @ a2d - a2d @ a1).tocsr()[low][:, low]).max() == 0
    c11 = (a1 @ a1.T - a1.T @ a1 - sp.identity(small.dim)).tocsr()
    assert abs(c11[low][:, low]).max() < 1e-14  # sqrt(n)^2 rounding
    # the deviation sits on states at the caps
    rows = np.unique((abs(c11) > 1e-14).nonzero()[0])
    at_cap = (small.states[rows, 1 + SMALL.n_max] == SMALL.occ_max) | (small.totals[rows] == SMALL.total_max)
    assert rows.size > 0 and np.all(at_cap)


def test_mode_out_of_range(small):
    with pytest.raises(IndexError):
        fock.ladder_matrix(SMALL.n_max + 1, False, SMALL, small)


def test_basis_order_deterministic():
    a, b = fock.FockSpace(SMALL), fock.FockSpace(SMALL)
    assert np.array_equal(a.states, b.states)
    # lexicographic in the occupation tuples
    keys = [tuple(s) for s in a.states]
    assert keys == sorted(keys)


def test_rotation_charge_annihilates_vacuum_and_is_hermitian(small):
    Q = fock.noether_charge("rot", S1, SMALL, small)
    assert np.linalg.norm(Q @ small.vacuum()) == 0.0
    assert (Q - Q.conj().T).nnz == 0 or abs(Q - Q.conj().T).max() == 0


@pytest.mark.parametrize("alpha", [0.5, 1.0, 3.0])
def test_boost_charge_on_vacuum(alpha, small):
    st = StateAlpha(alpha)
    v = fock.noether_charge("boost1", st, SMALL, small) @ small.vacuum()
    c = 1j / (2 * alpha * np.sqrt(4 * np.pi))
    expected = c * (small.basis_vector(_occ(SMALL, p0=1, p1=1)) + small.basis_vector(_occ(SMALL, p0=1, m1=1)))
    assert np.max(np.abs(v - expected)) < 1e-15
    assert abs(np.linalg.norm(v) - 1 / (alpha * np.sqrt(8 * np.pi))) < 1e-12
    if alpha == 1.0:
        assert np.linalg.norm(v) == pytest.approx(0.199471, abs=1e-6)


def test_boost_charges_need_two_modes():
    tr = fock.Truncation(1, 2, 2)
    with pytest.raises(ValueError):
        fock.noether_charge("boost1", S1, tr)


@pytest.mark.parametrize("n_max", [4, 8, 12])
def test_rotation_commutator_exact(n_max):
    tr = fock.Truncation(n_max, 2, 3)
    assert fock.charge_field_commutator_check("rot", S1, tr, (1.1, 0.7), width=0.0) <= 1e-10


def test_boost_commutator_decreases_with_cutoff():
    p = (1.1, 0.7)
    res = [fock.charge_field_commutator_check("boost1", S1, fock.Truncation(m, 3, 3), p) for m in (10, 20, 40)]
    assert all(b < a for a, b in zip(res[:-1], res[1:]))
    assert res[-1] <= 1e-3


def test_boost2_mirrors_boost1():
    tr = fock.Truncation(10, 3, 3)
    space = fock.FockSpace(tr)
    r2 = fock.charge_field_commutator_check("boost2", S1, tr, (1.1, 0.7), space=space)
    r1 = fock.charge_field_commutator_check("boost1", S1, tr, (1.1, 0.7 - np.pi / 2), space=space)
    assert abs(r1 - r2) <= 1e-10


def test_charge_algebra():
    for n_max in (4, 8):
        assert fock.algebra_residual(S1, fock.Truncation(n_max, 3, 4)) <= 1e-10


def test_canonical_commutator():
    tr = fock.Truncation(4, 2, 3)
    f_hat = {1: 0.5, -1: 0.5}  # cos
    g_hat = {1: 0.5, -1: 0.5, 2: -0.5j, -2: 0.5j}  # cos + sin 2
    for tau in (0.7, np.pi / 2, 2.3):
        assert fock.canonical_commutator_residual(S1, tr, tau, f_hat, g_hat) <= 1e-8


@pytest.mark.parametrize("kind", ["rot", "boost1"])
def test_generator_first_order(kind):
    tr = fock.Truncation(10, 5, 5)
    space = fock.FockSpace(tr)
    eps = np.geomspace(1e-3, 1e-1, 5)
    r = [fock.generator_residual(kind, e, S1, tr, (1.1, 0.7), 0.5, space) for e in eps]
    assert min(r) > 0
    assert abs(np.polyfit(np.log(eps), np.log(r), 1)[0] - 2) < 0.05


def test_vertex_expectation_empty():
    val, tail = fock.truncated_vertex_expectation(VC.build([], [], alpha=1.0), SMALL)
    assert val == 1.0 and tail == 0.0


def test_vertex_expectation_one_point():
    cfg = VC.build([1.0], [(np.pi / 2, 0.0)], alpha=1.0)
    tr = fock.Truncation(n_max=640, occ_max=12, total_max=None, zero_occ_max=60)
    val, tail = fock.truncated_vertex_expectation(cfg, tr, epsilon=0.05)
    assert abs(val - np.exp(-1 / 8)) < 1e-4
    assert abs(val - vertex.vertex_correlator(cfg, epsilon=0.05)) < 1e-10
    assert tail < 0.1


def test_vertex_expectation_large_alpha_neutral_pair():
    b = np.sqrt(2 * np.pi)
    pts = [(np.pi / 2, 0.0), (np.pi / 2, np.pi)]
    cfg = VC.build([b, -b], pts, alpha=10.0)
    tr = fock.Truncation(n_max=2000, occ_max=8, total_max=None, zero_occ_max=200)
    val, _ = fock.truncated_vertex_expectation(cfg, tr)
    assert abs(val - vertex.vertex_correlator(cfg)) < 1e-3
    assert abs(val - 0.5) < 1e-3


def test_vertex_expectation_full_space_matches_factorized():
    cfg = VC.build([0.5, -0.5], [(1.2, 0.4), (1.3, 2.5)], alpha=1.0)
    full, _ = fock.truncated_vertex_expectation(cfg, fock.Truncation(3, 4, 8), epsilon=0.5)
    fact, _ = fock.truncated_vertex_expectation(cfg, fock.Truncation(3, 4, None), epsilon=0.5)
    assert abs(full - fact) < 1e-6


def test_vertex_expectation_rejects_limit_state():
    with pytest.raises(ValueError):
        fock.truncated_vertex_expectation(VC.build([1.0], [(1.0, 0.0)], alpha=None), SMALL)
