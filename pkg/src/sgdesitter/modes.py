"""Mode functions of the massless field on the de Sitter cylinder.

For n != 0 the positive-frequency modes are
``phi_n = (c1 e^{i n tau} + c2 e^{-i n tau}) e^{i n theta}`` with
``c1 = Theta(-n) / sqrt(4 pi |n|)`` and ``c2 = Theta(n) / sqrt(4 pi |n|)``,
so every mode is ``e^{-i |n| tau + i n theta} / sqrt(4 pi |n|)``.  The zero
mode ``c3 + c4 tau`` carries the state parameter alpha.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StateAlpha:
    """The vacuum-like state selected by ``alpha > 0``."""

    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def c3(self):
        return self.alpha / 2.0 + 0.25j / self.alpha

    @property
    def c4(self):
        return -0.5j / (np.pi * self.alpha)

    def zero_mode_norm(self):
        """Closed form 2 pi i (c3* c4 - c3 c4*), equal to one."""
        c3, c4 = self.c3, self.c4
        return 2j * np.pi * (np.conj(c3) * c4 - c3 * np.conj(c4))


@dataclass(frozen=True)
class Regulator:
    """Convergence factor exp(-|n| epsilon) for mode sums."""

    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


def mode_coefficients(n):
    """(c1, c2) for a nonzero mode index."""
    if n == 0:
        raise ValueError("the zero mode has coefficients (c3, c4)")
    norm = 1.0 / np.sqrt(4.0 * np.pi * abs(n))
    return (norm if n < 0 else 0.0), (norm if n > 0 else 0.0)


def mode_fn(n, st, tau, theta):
    """Evaluate phi_n(tau, theta)."""
    tau = np.asarray(tau, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if n == 0:
        return st.c3 + st.c4 * tau + 0.0 * theta
    c1, c2 = mode_coefficients(n)
    return (c1 * np.exp(1j * n * tau) + c2 * np.exp(-1j * n * tau)) * np.exp(1j * n * theta)


def mode_dtau(n, st, tau, theta):
    """Analytic tau-derivative of phi_n."""
    tau = np.asarray(tau, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if n == 0:
        return st.c4 + 0.0 * (tau + theta)
    c1, c2 = mode_coefficients(n)
    return 1j * n * (c1 * np.exp(1j * n * tau) - c2 * np.exp(-1j * n * tau)) * np.exp(1j * n * theta)


def mode_dtheta(n, st, tau, theta):
    """Analytic theta-derivative of phi_n."""
    return 1j * n * mode_fn(n, st, tau, theta)


class Mode:
    """Callable wrapper around a single mode with its tau-derivative."""

    def __init__(self, n, st):
        self.n = n
        self.st = st

    def __call__(self, tau, theta):
        return mode_fn(self.n, self.st, tau, theta)

    def dtau(self, tau, theta):
        return mode_dtau(self.n, self.st, tau, theta)


def _dtau_of(f, tau, theta, h=1e-3):
    if hasattr(f, "dtau"):
        return f.dtau(tau, theta)
    # fourth-order central difference
    return (-f(tau + 2 * h, theta) + 8 * f(tau + h, theta)
            - 8 * f(tau - h, theta) + f(tau - 2 * h, theta)) / (12 * h)


def inner_product(f, g, tau0, panels=256):
    """Conserved product i * integral of (f* d_tau g - d_tau f* g) dtheta.

    ``f`` and ``g`` are callables ``(tau, theta) -> complex``; an attribute
    ``dtau`` is used for the time derivative when present.  The periodic
    integrand is integrated with the trapezoid rule on ``panels`` nodes,
    which is spectrally accurate.

    Returns
    -------
    value : complex
    residual : float
        Difference against the same rule on half the nodes.
    """
    def rule(m):
        theta = np.arange(m) * (2.0 * np.pi / m)
        fv = np.conj(f(tau0, theta))
        dfv = np.conj(_dtau_of(f, tau0, theta))
        integrand = fv * _dtau_of(g, tau0, theta) - dfv * g(tau0, theta)
        return 1j * integrand.sum() * (2.0 * np.pi / m)

    value = rule(panels)
    return value, abs(value - rule(max(panels // 2, 4)))


def smeared_modes(f, st, nmax, H=1.0, n_tau=256, n_theta=None):
    """Smeared modes phi_n(f) = int phi_n f / (H^2 sin^2 tau) dtau dtheta.

    Parameters
    ----------
    f : TestFunction
        Real test function supported in tau inside (0, pi).
    nmax : int
        Modes with |n| <= nmax are returned in the order -nmax..nmax.

    Notes
    -----
    Gauss-Legendre in tau on each smooth piece of the support and the
    trapezoid rule in theta.
    """
    if n_theta is None:
        n_theta = max(512, 8 * nmax)
    tau, wt = f.tau_nodes(n_tau)
    theta = np.arange(n_theta) * (2.0 * np.pi / n_theta)
    wth = 2.0 * np.pi / n_theta
    T, TH = np.meshgrid(tau, theta, indexing="ij")
    dens = f(T, TH) / (H * H * np.sin(T) ** 2) * wt[:, None] * wth
    out = np.empty(2 * nmax + 1, dtype=complex)
    for i, n in enumerate(range(-nmax, nmax + 1)):
        out[i] = np.sum(mode_fn(n, st, T, TH) * dens)
    return out


def mode_sum_kernel(N, reg, p, q, st):
    """Partial sum over |n| <= N of phi_n(p) phi_n(q)* exp(-|n| epsilon).

    ``p`` and ``q`` are (tau, theta) pairs.  Terms are accumulated in a
    fixed order so the result is reproducible bit for bit.
    """
    tp, hp = p
    tq, hq = q
    total = mode_fn(0, st, tp, hp) * np.conj(mode_fn(0, st, tq, hq))
    m = np.arange(1, N + 1, dtype=float)
    # n = +m and n = -m combine into cos(m dtheta)
    terms = np.exp(-1j * m * (tp - tq) - m * reg.epsilon) * np.cos(m * (hp - hq)) / (2.0 * np.pi * m)
    # fixed-size blocks summed in order
    block = 4096
    for start in range(0, N, block):
        total = total + terms[start:start + block].sum()
    return complex(total)
