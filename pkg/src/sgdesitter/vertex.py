"""Correlation functions of normal-ordered vertex operators.

A vertex operator V_gamma(x) is the normal-ordered exponential of
i gamma phi(x) times exp[-gamma^2/2 (alpha^2/4 + (tau - pi/2)^2/(4 pi^2 alpha^2))].
Products of them have the closed form

    <V_1 ... V_n> = exp[- sum_{j<k} gamma_j gamma_k iG+(x_j, x_k)
                        - sum_j gamma_j^2/2 (alpha^2/4 + (tau_j - pi/2)^2/(4 pi^2 alpha^2))]

which rearranges into an alpha^2 (sum gamma)^2 suppression, a zero-mode
Gaussian and a product of powers of 2 cos dtau - 2 cos dtheta.
Field insertions are obtained as derivatives with respect to an extra
charge at gamma = 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .propagators import Ordering, _zero_mode_part, ordered_kernel, smeared_commutator
from .modes import StateAlpha


@dataclass(frozen=True)
class VertexInsertion:
    gamma: float
    point: tuple


@dataclass
class VertexConfiguration:
    """Ordered vertex insertions.

    ``alpha=None`` selects the alpha -> infinity limit, in which only
    neutral configurations survive.
    """

    insertions: list = field(default_factory=list)
    ordering: Ordering = Ordering.WIGHTMAN
    alpha: float | None = 1.0

    @property
    def gammas(self):
        return np.array([v.gamma for v in self.insertions], dtype=float)

    @property
    def taus(self):
        return np.array([v.point[0] for v in self.insertions], dtype=float)

    @property
    def total_charge(self):
        return float(self.gammas.sum()) if self.insertions else 0.0

    @property
    def neutral(self):
        return abs(self.total_charge) < 1e-12

    @classmethod
    def build(cls, gammas, points, ordering=Ordering.WIGHTMAN, alpha=1.0):
        ins = [VertexInsertion(float(g), (float(p[0]), float(p[1]))) for g, p in zip(gammas, points)]
        return cls(ins, Ordering(ordering), alpha)


class NonIntegrablePair(ValueError):
    """A time-ordered pair with -gamma_j gamma_k >= 4 pi."""


def _bracket(p, q, ordering, epsilon):
    """The logarithmic bracket ln|D| + i pi Theta sgn sin dtau of a pair.

    Defined as -4 pi times the kernel minus its zero-mode part, so it is
    alpha-independent; with a regulator it keeps epsilon explicit.
    """
    st = StateAlpha(1.0)
    return -4.0 * np.pi * (ordered_kernel(p, q, st, ordering, epsilon) - _zero_mode_part(p[0], q[0], 1.0))


def _check_pairs(cfg):
    if Ordering(cfg.ordering) is not Ordering.TIME_ORDERED:
        return
    g = cfg.gammas
    for j in range(len(g)):
        for k in range(j + 1, len(g)):
            if -g[j] * g[k] >= 4.0 * np.pi:
                raise NonIntegrablePair(f"pair ({j}, {k}) has -gamma_j gamma_k >= 4 pi")


def _pair_sum(cfg, epsilon):
    """sum_{j<k} gamma_j gamma_k bracket_jk / (4 pi); None if a factor vanishes."""
    ins = cfg.insertions
    total = 0.0 + 0.0j
    for j in range(len(ins)):
        for k in range(j + 1, len(ins)):
            gg = ins[j].gamma * ins[k].gamma
            if gg == 0.0:
                continue
            p, q = ins[j].point, ins[k].point
            same = abs(p[0] - q[0]) < 1e-15 and abs(np.cos(p[1] - q[1]) - 1.0) < 1e-15
            if same and epsilon is None:
                if gg > 0 and Ordering(cfg.ordering) is Ordering.WIGHTMAN:
                    return None
                raise ValueError(f"coincident insertions {j}, {k} give a divergent factor")
            total += gg * _bracket(p, q, cfg.ordering, epsilon) / (4.0 * np.pi)
    return total


def log_vertex_correlator(cfg, epsilon=None):
    """Logarithm of the correlator; -inf real part when it vanishes."""
    _check_pairs(cfg)
    if not cfg.insertions:
        return 0.0 + 0.0j
    if cfg.alpha is None and not cfg.neutral:
        return complex(-np.inf, 0.0)
    pairs = _pair_sum(cfg, epsilon)
    if pairs is None:
        return complex(-np.inf, 0.0)
    g = cfg.gammas
    if cfg.alpha is None:
        return pairs
    a2 = cfg.alpha ** 2
    weighted = float(np.sum(g * (cfg.taus - np.pi / 2)))
    return (-a2 * g.sum() ** 2 / 8.0 - weighted ** 2 / (8.0 * np.pi ** 2 * a2) + pairs)


def vertex_correlator(cfg, epsilon=None):
    """Closed-form correlator of the configuration.

    Parameters
    ----------
    cfg : VertexConfiguration
    epsilon : float, optional
        Keep the mode-sum regulator explicit in every pair kernel.

    Notes
    -----
    Time ordering replaces every pair kernel by the Feynman kernel.  The
    zero-mode Gaussian only involves the individual times; for neutral
    configurations it equals exp[-(sum gamma_j tau_j)^2/(8 pi^2 alpha^2)],
    which depends on the times only through their differences.
    """
    lg = log_vertex_correlator(cfg, epsilon)
    if np.isneginf(lg.real):
        return 0.0 + 0.0j
    return complex(np.exp(lg))


def _kernel_ordered(a, b, pa, pb, cfg, st, epsilon):
    """Kernel between the a-th and b-th factor of the ordered product."""
    if a < b:
        return ordered_kernel(pa, pb, st, cfg.ordering, epsilon)
    return ordered_kernel(pb, pa, st, cfg.ordering, epsilon)


def vertex_with_fields(cfg, field_points=(), positions=None, dressing=None, H=1.0,
                       epsilon=None, return_divergent=False):
    """Correlator with up to two field insertions and an optional Weyl dressing.

    Parameters
    ----------
    cfg : VertexConfiguration
    field_points : sequence of (tau, theta)
        At most two field insertions.
    positions : sequence of int, optional
        Slot of each field in the ordered product, counted among all
        factors.  By default the fields follow the vertex operators.
    dressing : TestFunction, optional
        Conjugate the whole product with the Weyl operator exp(i phi(f)),
        which shifts every field by G+(f, x) - G+(x, f) and multiplies the
        product by exp(i sum_j gamma_j [G+(f, x_j) - G+(x_j, f)]).
    return_divergent : bool
        In the alpha -> infinity limit with two fields the result contains
        the divergent term alpha^2/4 <V...V>.  It is dropped from the value
        and, when this flag is set, its coefficient is returned as well.
    """
    fields = [tuple(map(float, f)) for f in field_points]
    if len(fields) > 2:
        raise ValueError("at most two field insertions are supported")
    n = len(cfg.insertions)
    if positions is None:
        positions = [n + i for i in range(len(fields))]
    positions = list(positions)
    slots = list(range(n + len(fields)))
    field_slots = set(positions)
    vertex_slots = [s for s in slots if s not in field_slots]

    limit = cfg.alpha is None
    st = StateAlpha(1.0 if limit else cfg.alpha)
    base = vertex_correlator(cfg, epsilon)

    def kern(sa, pa, sb, pb):
        k = _kernel_ordered(sa, sb, pa, pb, cfg, st, epsilon)
        if limit:
            # drop the alpha-dependent zero-mode part
            k = k - _zero_mode_part(pa[0], pb[0], st.alpha)
        return k

    def A(fi):
        s_f, p_f = positions[fi], fields[fi]
        out = 0.0 + 0.0j
        for ins, s_v in zip(cfg.insertions, vertex_slots):
            out -= ins.gamma * kern(s_f, p_f, s_v, ins.point)
        return out

    if limit and not cfg.neutral and n > 0:
        return (0.0 + 0.0j, 0.0 + 0.0j) if return_divergent else 0.0 + 0.0j

    shifts = [0.0] * len(fields)
    phase = 1.0
    if dressing is not None and not dressing.is_zero:
        shifts = [smeared_commutator(dressing, f, H) for f in fields]
        c = [smeared_commutator(dressing, ins.point, H) for ins in cfg.insertions]
        phase = np.exp(1j * sum(ins.gamma * ci for ins, ci in zip(cfg.insertions, c)))

    divergent = 0.0 + 0.0j
    if not fields:
        value = base
    elif len(fields) == 1:
        value = base * (-1j * A(0) + shifts[0])
    else:
        k12 = kern(positions[0], fields[0], positions[1], fields[1])
        one, two = -1j * A(0), -1j * A(1)
        value = base * (k12 + (one + shifts[0]) * (two + shifts[1]))
        if limit:
            divergent = base
    value = complex(phase * value)
    if return_divergent:
        return value, complex(phase * divergent)
    return value


def pair_factor(gj, gk, p, q):
    """|2 cos dtau - 2 cos dtheta|^{gamma_j gamma_k / (4 pi)}."""
    st = StateAlpha(1.0)
    br = _bracket(p, q, Ordering.WIGHTMAN, None)
    return np.exp(gj * gk * br.real / (4.0 * np.pi))


def scaling_degree_estimate(gj, gk, base, direction, lambdas, threshold=1e-3):
    """Scaling degree of the pair factor towards the diagonal.

    Fits log|factor(base, base + lambda d)| against log(lambda) and returns
    minus the slope.  The expected value is -gamma_j gamma_k / (2 pi).

    Returns
    -------
    estimate : float
    residual : float
        Root-mean-square residual of the linear fit.
    flagged : bool
        True when the residual exceeds ``threshold``.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size < 8:
        raise ValueError("need at least eight scales")
    d = np.asarray(direction, dtype=float)
    d = d / np.hypot(*d)
    vals = np.array([pair_factor(gj, gk, base, (base[0] + lam * d[0], base[1] + lam * d[1]))
                     for lam in lambdas])
    x, y = np.log(lambdas), np.log(vals)
    coef = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((np.polyval(coef, x) - y) ** 2)))
    return -float(coef[0]), resid, resid > threshold
