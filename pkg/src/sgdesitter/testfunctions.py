"""Test functions on the cylinder used for smearing and as coupling cutoffs.

A :class:`TestFunction` is either a sum of separable terms
``amp * T(tau) * S(theta)`` built from the profiles below, or a grid of
samples with bilinear interpolation.  Every function knows its tau-support
and the breakpoints where it fails to be smooth, so quadratures can split
there.
"""
from __future__ import annotations

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .geometry import wrap_difference


def bump(x):
    """Smooth bump exp(1 - 1/(1 - x^2)) on |x| < 1 with peak value one."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x) < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - x[m] ** 2))
    return out


def bump_d1(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x) < 1.0
    xm = x[m]
    out[m] = bump(xm) * (-2.0 * xm / (1.0 - xm ** 2) ** 2)
    return out


def bump_d2(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x) < 1.0
    xm = x[m]
    out[m] = bump(xm) * (6.0 * xm ** 4 - 2.0) / (1.0 - xm ** 2) ** 4
    return out


class Box:
    """Indicator of [lo, hi] in tau."""

    def __init__(self, lo, hi):
        self.lo, self.hi = float(lo), float(hi)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return ((x >= self.lo) & (x <= self.hi)).astype(float)

    def d1(self, x):
        raise ValueError("a box profile has no classical derivative")

    d2 = d1

    @property
    def support(self):
        return self.lo, self.hi

    def breaks(self):
        return [self.lo, self.hi]

    def describe(self):
        return {"kind": "box", "lo": self.lo, "hi": self.hi}


class Bump:
    """Smooth bump centred at ``center`` with half-width ``width``."""

    def __init__(self, center, width, periodic=False):
        self.center, self.width, self.periodic = float(center), float(width), periodic
        if periodic and width >= np.pi:
            raise ValueError("periodic bump must have half-width below pi")

    def _arg(self, x):
        d = np.asarray(x, dtype=float) - self.center
        if self.periodic:
            d = wrap_difference(d)
        return d / self.width

    def __call__(self, x):
        return bump(self._arg(x))

    def d1(self, x):
        return bump_d1(self._arg(x)) / self.width

    def d2(self, x):
        return bump_d2(self._arg(x)) / self.width ** 2

    @property
    def support(self):
        return self.center - self.width, self.center + self.width

    def breaks(self):
        return [self.center - self.width, self.center, self.center + self.width]

    def describe(self):
        return {"kind": "bump", "center": self.center, "width": self.width}


class Const:
    """Constant profile in theta."""

    def __call__(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def d1(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    d2 = d1

    @property
    def support(self):
        return 0.0, 2.0 * np.pi

    def breaks(self):
        return []

    def describe(self):
        return {"kind": "const"}


class Trig:
    """Real trigonometric polynomial sum_m c_m cos(m theta - phase_m) in theta."""

    def __init__(self, coeffs, phases=None):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.phases = np.zeros_like(self.coeffs) if phases is None else np.asarray(phases, dtype=float)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        m = np.arange(len(self.coeffs))
        return np.tensordot(np.cos(np.multiply.outer(x, m) - self.phases), self.coeffs, axes=([-1], [0]))

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        m = np.arange(len(self.coeffs))
        return np.tensordot(-m * np.sin(np.multiply.outer(x, m) - self.phases), self.coeffs, axes=([-1], [0]))

    def d2(self, x):
        x = np.asarray(x, dtype=float)
        m = np.arange(len(self.coeffs))
        return np.tensordot(-m * m * np.cos(np.multiply.outer(x, m) - self.phases), self.coeffs, axes=([-1], [0]))

    def fourier(self):
        """Complex coefficients s_m with S(theta) = sum_m s_m e^{i m theta}."""
        out = {0: complex(self.coeffs[0] * np.cos(self.phases[0]))}
        for m in range(1, len(self.coeffs)):
            half = 0.5 * self.coeffs[m] * np.exp(-1j * self.phases[m])
            out[m] = half
            out[-m] = np.conj(half)
        return out

    @property
    def support(self):
        return 0.0, 2.0 * np.pi

    def breaks(self):
        return []

    def describe(self):
        return {"kind": "trig", "coeffs": self.coeffs.tolist(), "phases": self.phases.tolist()}


class TestFunction:
    """Real test function on the cylinder.

    Parameters
    ----------
    terms : list of (amp, tau_profile, theta_profile)
        Separable pieces; the function is their sum.
    grid : tuple (tau_grid, theta_grid, values), optional
        Sampled function with bilinear interpolation, zero outside the
        tau range and periodic in theta.
    """

    __test__ = False  # not a pytest class

    def __init__(self, terms=(), grid=None):
        self.terms = tuple(terms)
        self.grid = None
        if grid is not None:
            tg, hg, vals = (np.asarray(v, dtype=float) for v in grid)
            # append the periodic image of theta = 0
            if hg[-1] < 2.0 * np.pi:
                hg = np.append(hg, 2.0 * np.pi)
                vals = np.concatenate([vals, vals[:, :1]], axis=1)
            self.grid = (tg, hg, vals)
            self._interp = RegularGridInterpolator((tg, hg), vals, bounds_error=False, fill_value=0.0)
        lo, hi = self.support
        if self.terms or self.grid is not None:
            if not (0.0 <= lo <= hi <= np.pi):
                raise ValueError("test function support must lie in [0, pi]")

    # -- constructors --------------------------------------------------------
    @classmethod
    def zero(cls):
        return cls(())

    @classmethod
    def tau_indicator(cls, lo, hi, amp=1.0):
        return cls([(amp, Box(lo, hi), Const())])

    @classmethod
    def tau_bump(cls, center, width, amp=1.0):
        return cls([(amp, Bump(center, width), Const())])

    @classmethod
    def tau_theta_bump(cls, tc, tw, hc, hw, amp=1.0):
        return cls([(amp, Bump(tc, tw), Bump(hc, hw, periodic=True))])

    @classmethod
    def from_grid(cls, tau_grid, theta_grid, values):
        return cls(grid=(tau_grid, theta_grid, values))

    @classmethod
    def from_spec(cls, spec):
        """Build from a plain dict, as used in configuration files."""
        kind = spec.get("kind", "indicator")
        amp = float(spec.get("amp", 1.0))
        if kind == "zero":
            return cls.zero()
        if kind == "indicator":
            return cls.tau_indicator(spec.get("lo", np.pi / 4), spec.get("hi", 3 * np.pi / 4), amp)
        if kind == "tau_bump":
            return cls.tau_bump(spec.get("center", np.pi / 2), spec.get("width", 0.5), amp)
        if kind == "tau_theta_bump":
            return cls.tau_theta_bump(spec.get("center", np.pi / 2), spec.get("width", 0.5),
                                      spec.get("theta_center", np.pi), spec.get("theta_width", 1.0), amp)
        if kind == "trig_bump":
            coeffs = [float(v) for v in str(spec.get("coeffs", "1.0")).split(",")]
            return cls([(amp, Bump(spec.get("center", np.pi / 2), spec.get("width", 0.5)), Trig(coeffs))])
        raise ValueError(f"unknown test function kind {kind!r}")

    # -- algebra -------------------------------------------------------------
    def scaled(self, c):
        if self.grid is not None:
            tg, hg, v = self.grid
            return TestFunction(grid=(tg, hg[:-1], c * v[:, :-1]))
        return TestFunction([(c * a, T, S) for a, T, S in self.terms])

    def __add__(self, other):
        if self.grid is not None or other.grid is not None:
            raise ValueError("grid functions cannot be added")
        return TestFunction(self.terms + other.terms)

    @property
    def is_zero(self):
        return not self.terms and self.grid is None

    @property
    def touches_boundary(self):
        lo, hi = self.support
        return not self.is_zero and (lo <= 0.0 or hi >= np.pi)

    @property
    def separable(self):
        return len(self.terms) == 1

    @property
    def theta_independent(self):
        return self.grid is None and all(isinstance(S, Const) for _, _, S in self.terms)

    # -- evaluation ----------------------------------------------------------
    def __call__(self, tau, theta):
        tau = np.asarray(tau, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if self.grid is not None:
            pts = np.stack(np.broadcast_arrays(tau, np.mod(theta, 2.0 * np.pi)), axis=-1)
            return self._interp(pts)
        out = np.zeros(np.broadcast(tau, theta).shape)
        for a, T, S in self.terms:
            out = out + a * T(tau) * S(theta)
        return out

    def wave_operator(self, tau, theta):
        """Flat wave operator (-d_tau^2 + d_theta^2) applied analytically."""
        out = 0.0
        for a, T, S in self.terms:
            out = out + a * (-T.d2(tau) * S(theta) + T(tau) * S.d2(theta))
        return out

    # -- quadrature support --------------------------------------------------
    @property
    def support(self):
        if self.grid is not None:
            tg = self.grid[0]
            return float(tg[0]), float(tg[-1])
        if not self.terms:
            return np.pi / 2, np.pi / 2
        los = [T.support[0] for _, T, _ in self.terms]
        his = [T.support[1] for _, T, _ in self.terms]
        return min(los), max(his)

    def tau_breaks(self):
        lo, hi = self.support
        if self.grid is not None:
            b = list(self.grid[0])
        else:
            b = [x for _, T, _ in self.terms for x in T.breaks()]
        return np.unique(np.clip([lo, hi] + b, lo, hi))

    def theta_breaks(self):
        if self.grid is not None:
            b = list(self.grid[1])
        else:
            b = [x for _, _, S in self.terms for x in S.breaks()]
        b = np.mod(np.asarray(b, dtype=float), 2.0 * np.pi)
        return np.unique(np.concatenate([[0.0, 2.0 * np.pi], b]))

    def tau_nodes(self, n=64):
        """Composite Gauss-Legendre nodes and weights over the tau-support."""
        return _panel_nodes(self.tau_breaks(), n)

    def theta_nodes(self, n=64):
        return _panel_nodes(self.theta_breaks(), n)

    def describe(self):
        if self.grid is not None:
            return {"kind": "grid", "shape": list(self.grid[2].shape)}
        return {"terms": [{"amp": a, "tau": T.describe(), "theta": S.describe()} for a, T, S in self.terms]}


def _panel_nodes(breaks, n):
    x, w = np.polynomial.legendre.leggauss(n)
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 0:
            continue
        nodes.append(0.5 * (b - a) * x + 0.5 * (b + a))
        weights.append(0.5 * (b - a) * w)
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)
