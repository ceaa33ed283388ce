"""Truncated bosonic Fock space for the modes |n| <= n_max.

Basis states are occupation tuples ordered lexicographically, with mode
index running from -n_max to n_max.  Ladder operators are sparse CSR
matrices; a_n^dagger is the transpose of a_n, so the canonical commutator
is exact except on states touching the occupation caps.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import killing_field, wrap_difference
from .modes import mode_dtau, mode_fn
from .propagators import Ordering


@dataclass(frozen=True)
class Truncation:
    """Mode window, per-mode occupation cap and optional total cap.

    ``zero_occ_max`` overrides the cap of the zero mode, whose coherent
    amplitudes grow with alpha.
    """

    n_max: int = 12
    occ_max: int = 4
    total_max: int | None = 6
    zero_occ_max: int | None = None

    @property
    def modes(self):
        return list(range(-self.n_max, self.n_max + 1))

    def cap(self, n):
        if n == 0 and self.zero_occ_max is not None:
            return self.zero_occ_max
        return self.occ_max


def _enumerate(caps, total_max):
    """All occupation vectors with entry i <= caps[i] and sum <= total_max."""
    states = np.zeros((1, 0), dtype=np.int16)
    totals = np.zeros(1, dtype=np.int64)
    for c in caps:
        blocks, tblocks = [], []
        for k in range(c + 1):
            keep = totals + k <= (total_max if total_max is not None else np.iinfo(np.int64).max)
            if not np.any(keep):
                continue
            s = states[keep]
            blocks.append(np.hstack([s, np.full((s.shape[0], 1), k, dtype=np.int16)]))
            tblocks.append(totals[keep] + k)
        states = np.vstack(blocks)
        totals = np.concatenate(tblocks)
    order = np.lexsort(states.T[::-1])
    return states[order]


class FockSpace:
    """Truncated Fock space with deterministic basis order."""

    def __init__(self, tr):
        self.tr = tr
        self.modes = tr.modes
        caps = [tr.cap(n) for n in self.modes]
        self.states = _enumerate(caps, tr.total_max)
        self.dim = self.states.shape[0]
        self.totals = self.states.sum(axis=1)
        radix = np.array(caps, dtype=object) + 1
        # mixed-radix codes, most significant digit first, match lexicographic order
        weights = [1]
        for r in radix[::-1][:-1]:
            weights.append(weights[-1] * int(r))
        weights = weights[::-1]
        if weights[0] * int(radix[0]) < 2 ** 62:
            self._weights = np.array(weights, dtype=np.int64)
            self._codes = self.states.astype(np.int64) @ self._weights
            self._lookup = None
        else:
            self._weights = None
            self._lookup = {s.tobytes(): i for i, s in enumerate(self.states)}
        self._ladders = {}

    def index(self, occupation):
        occ = np.asarray(occupation, dtype=np.int16)
        if self._lookup is not None:
            return self._lookup[occ.tobytes()]
        code = int(occ.astype(np.int64) @ self._weights)
        i = int(np.searchsorted(self._codes, code))
        if i >= self.dim or self._codes[i] != code:
            raise KeyError("occupation not in the truncated basis")
        return i

    def vacuum(self):
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(np.zeros(len(self.modes)))] = 1.0
        return v

    def basis_vector(self, occupation):
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(occupation)] = 1.0
        return v

    def mode_position(self, n):
        if abs(n) > self.tr.n_max:
            raise IndexError(f"mode {n} outside the window |n| <= {self.tr.n_max}")
        return n + self.tr.n_max

    def annihilator(self, n):
        if n in self._ladders:
            return self._ladders[n]
        i = self.mode_position(n)
        src = np.nonzero(self.states[:, i] > 0)[0]
        if self._lookup is None:
            tgt = np.searchsorted(self._codes, self._codes[src] - self._weights[i])
        else:
            lowered = self.states[src].copy()
            lowered[:, i] -= 1
            tgt = np.array([self._lookup[s.tobytes()] for s in lowered], dtype=np.int64)
        vals = np.sqrt(self.states[src, i].astype(float))
        op = sp.csr_matrix((vals, (tgt, src)), shape=(self.dim, self.dim))
        self._ladders[n] = op
        return op

    def ladder(self, n, dagger=False):
        a = self.annihilator(n)
        return a.T.tocsr() if dagger else a

    def low_sector(self, depth):
        """Indices of states at least ``depth`` quanta away from every cap."""
        caps = np.array([self.tr.cap(n) for n in self.modes])
        ok = np.all(self.states <= caps - depth, axis=1)
        if self.tr.total_max is not None:
            ok &= self.totals <= self.tr.total_max - depth
        return np.nonzero(ok)[0]

    def linear_operator(self, coeff_a, coeff_adag):
        """sum_n (coeff_a[n] a_n + coeff_adag[n] a_n^dagger), arrays over modes."""
        op = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for n, ca, cd in zip(self.modes, coeff_a, coeff_adag):
            a = self.annihilator(n)
            if ca != 0:
                op = op + ca * a
            if cd != 0:
                op = op + cd * a.T
        return op.tocsr()


def ladder_matrix(n, dagger, tr, space=None):
    """Sparse a_n or a_n^dagger on the truncated space."""
    space = space or FockSpace(tr)
    return space.ladder(n, dagger)


def noether_charge(kind, st, tr, space=None):
    """Rotation or boost charge as a sparse operator.

    The boost charges couple n to n +- 1 with weight sqrt(n (n+1))/2 and the
    modes +-1 to the zero mode with weight 1/(2 alpha sqrt(4 pi)).
    """
    space = space or FockSpace(tr)
    a = space.annihilator

    def ad(n):
        return space.annihilator(n).T

    N = tr.n_max
    dim = space.dim
    Q = sp.csr_matrix((dim, dim), dtype=complex)
    if kind == "rot":
        for n in range(1, N + 1):
            Q = Q + n * (ad(n) @ a(n) - ad(-n) @ a(-n))
        return Q.tocsr()
    if N < 2:
        raise ValueError("boost charges need n_max >= 2")
    kz = 1.0 / (2.0 * st.alpha * np.sqrt(4.0 * np.pi))
    if kind == "boost1":
        X = a(1) + ad(1) + a(-1) + ad(-1)
        Q = Q + (-1j * kz) * (X @ a(0)) + (1j * kz) * (ad(0) @ X)
        for n in range(1, N):
            w = 0.5j * np.sqrt(n * (n + 1.0))
            Q = Q + w * (ad(n) @ a(n + 1) - ad(n + 1) @ a(n)
                         - ad(-n - 1) @ a(-n) + ad(-n) @ a(-n - 1))
        return Q.tocsr()
    if kind == "boost2":
        Y = a(1) - ad(1) - a(-1) + ad(-1)
        Q = Q + kz * (Y @ a(0)) - kz * (ad(0) @ Y)
        for n in range(1, N):
            w = -0.5 * np.sqrt(n * (n + 1.0))
            Q = Q + w * (ad(n) @ a(n + 1) + ad(n + 1) @ a(n)
                         - ad(-n) @ a(-n - 1) - ad(-n - 1) @ a(-n))
        return Q.tocsr()
    raise ValueError(f"unknown charge {kind!r}")


# --- fields on the truncated space -----------------------------------------

def _smoothing(n, width):
    return np.exp(-0.5 * (n * width) ** 2)


def field_coefficients(st, tr, p, width=0.0):
    """Coefficients of a_n in phi smeared over theta at fixed tau.

    The smearing kernel is the periodic Gaussian with Fourier weights
    exp(-n^2 w^2 / 2); ``width = 0`` gives the pointwise field.
    """
    tau, theta = p
    return np.array([mode_fn(n, st, tau, theta) * _smoothing(n, width) for n in tr.modes])


def killing_field_coefficients(kind, st, tr, p, width=0.0, n_theta=2048):
    """Coefficients of a_n in xi phi, smeared like :func:`field_coefficients`.

    The vector field has theta-dependent components, so the smearing
    integral is done with the trapezoid rule on the circle.
    """
    tau, theta0 = p
    th = np.arange(n_theta) * (2.0 * np.pi / n_theta)
    if width > 0:
        m = np.arange(-n_theta // 2, n_theta // 2)
        kern = np.real(np.exp(1j * np.outer(wrap_difference(th - theta0), m)) @ _smoothing(m, width)) / (2 * np.pi)
        weights = kern * (2.0 * np.pi / n_theta)
    else:
        th = np.array([theta0])
        weights = np.array([1.0])
    xt, xh = killing_field(kind, np.full_like(th, tau), th)
    out = []
    for n in tr.modes:
        d = xt * mode_dtau(n, st, tau, th) + xh * 1j * n * mode_fn(n, st, tau, th)
        out.append(np.sum(weights * d))
    return np.array(out)


def field_operator(st, tr, p, width=0.0, space=None):
    space = space or FockSpace(tr)
    c = field_coefficients(st, tr, p, width)
    return space.linear_operator(c, np.conj(c))


def charge_field_commutator_check(kind, st, tr, p, width=0.15, space=None, depth=2):
    """Largest matrix element of [Q, phi] - i xi phi on the low sector.

    The field is smeared in theta with a Gaussian of the given width so
    that the modes at the window edge, which couple outward under boosts,
    carry exponentially small weight.  ``width = 0`` checks the pointwise
    field, for which only the rotation identity is cutoff independent.
    """
    space = space or FockSpace(tr)
    Q = noether_charge(kind, st, tr, space)
    phi = field_operator(st, tr, p, width, space)
    c = killing_field_coefficients(kind, st, tr, p, width)
    xi_phi = space.linear_operator(c, np.conj(c))
    R = (Q @ phi - phi @ Q) - 1j * xi_phi
    low = space.low_sector(depth)
    if low.size == 0:
        raise ValueError("truncation too small for a low-occupation sector")
    block = R[low][:, low]
    return float(abs(block).max()) if block.nnz else 0.0


def algebra_residual(st, tr, space=None, depth=2):
    """Largest entry of [Q_rot, Q_boost1] - i Q_boost2 on the low sector."""
    space = space or FockSpace(tr)
    Qr = noether_charge("rot", st, tr, space)
    Q1 = noether_charge("boost1", st, tr, space)
    Q2 = noether_charge("boost2", st, tr, space)
    R = Qr @ Q1 - Q1 @ Qr - 1j * Q2
    low = space.low_sector(depth)
    block = R[low][:, low]
    return float(abs(block).max()) if block.nnz else 0.0


def canonical_commutator_residual(st, tr, tau, f_hat, g_hat, space=None):
    """[phi(f), pi(g)] - i int f g dtheta at fixed tau on the low sector.

    ``f_hat`` and ``g_hat`` map a mode index to the Fourier coefficient of a
    real band-limited function, f(theta) = sum_n f_hat[n] e^{i n theta}.
    """
    space = space or FockSpace(tr)
    cf, cg = [], []
    for n in tr.modes:
        # int f(theta) phi_n(tau, theta) dtheta = 2 pi f_hat[-n] phi_n(tau, 0)
        cf.append(2 * np.pi * f_hat.get(-n, 0.0) * mode_fn(n, st, tau, 0.0))
        cg.append(2 * np.pi * g_hat.get(-n, 0.0) * mode_dtau(n, st, tau, 0.0))
    cf, cg = np.array(cf), np.array(cg)
    # smeared fields are hermitian: the a^dagger coefficient of phi(f) is
    # the conjugate of its a coefficient because f is real
    phi_f = space.linear_operator(cf, np.conj(cf))
    pi_g = space.linear_operator(cg, np.conj(cg))
    expected = 1j * 2 * np.pi * sum(f_hat.get(n, 0.0) * g_hat.get(-n, 0.0) for n in tr.modes)
    R = (phi_f @ pi_g - pi_g @ phi_f) - expected * sp.identity(space.dim, format="csr")
    low = space.low_sector(1)
    blk = R[low][:, low]
    return float(abs(blk).max()) if blk.nnz else 0.0


def generator_residual(kind, eps, st, tr, p, width=0.5, space=None):
    """|| (1 + i eps Q) phi (1 - i eps Q) - phi(x_{-eps}) || on the low sector.

    ``phi(x_{-eps})`` is the field smeared around the transformed points of
    the circle tau = tau_p, computed from the finite flow with parameters
    -eps along ``kind``.
    """
    from .geometry import GroupParams, transform

    space = space or FockSpace(tr)
    Q = noether_charge(kind, st, tr, space)
    phi = field_operator(st, tr, p, width, space)
    I = sp.identity(space.dim, format="csr")
    lhs = (I + 1j * eps * Q) @ phi @ (I - 1j * eps * Q)
    # smeared field at the moved points
    n_theta = 2048
    th = np.arange(n_theta) * (2.0 * np.pi / n_theta)
    m = np.arange(-n_theta // 2, n_theta // 2)
    kern = np.real(np.exp(1j * np.outer(wrap_difference(th - p[1]), m)) @ _smoothing(m, width)) / (2 * np.pi)
    wts = kern * (2.0 * np.pi / n_theta)
    params = {"rot": (-eps, 0, 0), "boost1": (0, -eps, 0), "boost2": (0, 0, -eps)}[kind]
    t2, h2 = transform(GroupParams(*params), np.full_like(th, p[0]), th)
    c = np.array([np.sum(wts * mode_fn(n, st, t2, h2)) for n in tr.modes])
    rhs = space.linear_operator(c, np.conj(c))
    # columns far enough from the caps that Q phi Q never leaves the space
    low = space.low_sector(5)
    R = (lhs - rhs)[:, low]
    return float(abs(R).max()) if R.nnz else 0.0


# --- vertex operators --------------------------------------------------------

def _apply_exp(apply_op, v, order):
    """exp(A) v by its Taylor series; returns the vector and the last term norm."""
    acc = v.copy()
    term = v
    for k in range(1, order + 1):
        term = apply_op(term) / k
        acc = acc + term
    return acc, float(np.linalg.norm(term))


def truncated_vertex_expectation(cfg, tr, series_order=None, epsilon=None):
    """Vacuum expectation of a product of truncated vertex operators.

    Each vertex operator is exp(i gamma sum_n phi_n^* a_n^dagger)
    exp(i gamma sum_n phi_n a_n) times its c-number self factor, built
    from the modes |n| <= n_max with optional weights exp(-|n| epsilon / 2)
    so that contractions carry exp(-|n| epsilon).

    Without a total-quanta cap the space is a tensor product and the
    expectation factorizes over modes; otherwise the full truncated space
    is used.

    Returns
    -------
    value : complex
    tail : float
        Largest relative weight reaching an occupation cap, or the last
        series term, whichever is larger.  Small values certify the
        truncation.
    """
    if Ordering(cfg.ordering) is not Ordering.WIGHTMAN:
        raise ValueError("the Fock oracle evaluates Wightman products only")
    if cfg.alpha is None:
        raise ValueError("the Fock oracle needs a finite alpha")
    from .modes import StateAlpha

    st = StateAlpha(cfg.alpha)
    ins = cfg.insertions
    if not ins:
        return 1.0 + 0.0j, 0.0
    reg = (lambda n: 1.0) if epsilon is None else (lambda n: np.exp(-0.5 * abs(n) * epsilon))
    self_factor = 1.0
    for v in ins:
        t = v.point[0]
        s = st.alpha ** 2 / 4.0 + (t - np.pi / 2) ** 2 / (4.0 * np.pi ** 2 * st.alpha ** 2)
        self_factor *= np.exp(-0.5 * v.gamma ** 2 * s)

    if tr.total_max is None:
        value, tail = 1.0 + 0.0j, 0.0
        for n in tr.modes:
            cap = tr.cap(n)
            order = series_order or cap
            diag = np.sqrt(np.arange(1, cap + 1, dtype=float))
            w = [reg(n) * mode_fn(n, st, *v.point) for v in ins]

            def lower(x):
                out = np.zeros_like(x)
                out[:-1] = diag * x[1:]
                return out

            def raise_(x):
                out = np.zeros_like(x)
                out[1:] = diag * x[:-1]
                return out

            vec = np.zeros(cap + 1, dtype=complex)
            vec[0] = 1.0
            for v, wj in zip(ins[::-1], w[::-1]):
                vec, t1 = _apply_exp(lambda x: 1j * v.gamma * wj * lower(x), vec, order)
                vec, t2 = _apply_exp(lambda x: 1j * v.gamma * np.conj(wj) * raise_(x), vec, order)
                nv = np.linalg.norm(vec)
                tail = max(tail, abs(vec[-1]) / nv if nv > 0 else 0.0)
                if order < cap:
                    tail = max(tail, t1 / max(nv, 1e-300), t2 / max(nv, 1e-300))
            value *= vec[0]
        return complex(value * self_factor), tail

    space = FockSpace(tr)
    order = series_order or (tr.total_max + 2)
    vec = space.vacuum()
    tail = 0.0
    top = space.totals == tr.total_max
    for v in ins[::-1]:
        w = np.array([reg(n) * mode_fn(n, st, *v.point) for n in tr.modes])
        lower = space.linear_operator(1j * v.gamma * w, np.zeros_like(w))
        raise_ = space.linear_operator(np.zeros_like(w), 1j * v.gamma * np.conj(w))
        vec, t1 = _apply_exp(lambda x: lower @ x, vec, order)
        vec, t2 = _apply_exp(lambda x: raise_ @ x, vec, order)
        nv = np.linalg.norm(vec)
        tail = max(tail, np.linalg.norm(vec[top]) / nv, t1 / nv, t2 / nv)
    return complex(vec[space.index(np.zeros(len(tr.modes)))] * self_factor), tail
