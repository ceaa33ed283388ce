"""Norm bounds for the perturbative S matrix and the interacting field.

Everything here is an explicit inequality or constant: weighted L^p norms
of the cutoff function, the constant C(g), per-order and tail bounds of
the S-matrix series, the Cauchy determinant identity with its
permutation-sum majorant, the cosine bound, the light-cone integral
majorant, the functions K_+- and the constants of the interacting-field
bound.

Weighted norms follow the convention

    ||f / (s H^2 sin^2 tau)||_p = [2 int |f / (s H^2 sin^2 tau)|^p dtau dtheta]^(1/p)

where the factor 2 is the Jacobian of light-cone coordinates.  The S-matrix
constant uses s = 2 and the interacting-field constants use s = 1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate, optimize

from .propagators import smeared_commutator
from .testfunctions import Const, TestFunction

__all__ = [
    "Coupling", "BoundReport", "TestFunction",
    "weighted_lp_norm", "smatrix_constant_C", "smatrix_order_bound", "term_ratio",
    "tail_bound", "cauchy_det_check", "cauchy_permutation_majorant", "cosine_bound_margin",
    "u_integral_bound", "u_integral_quadrature", "holder_check", "subadditivity_check",
    "k_pm", "ctilde_constants", "field_order_bound", "field_tail_bound",
]


@dataclass(frozen=True)
class Coupling:
    """Sine-Gordon coupling through beta^2 in (0, 4 pi)."""

    beta2: float

    def __post_init__(self):
        if not 0.0 < self.beta2 < 4.0 * np.pi:
            raise ValueError("beta^2 must lie in (0, 4 pi)")

    @property
    def beta(self):
        return math.sqrt(self.beta2)

    @property
    def p_holder(self):
        """(4 pi + beta^2) / (8 pi), below one."""
        return (4.0 * np.pi + self.beta2) / (8.0 * np.pi)

    @property
    def p_norm(self):
        """8 pi / (4 pi - beta^2), the exponent of the cutoff norm."""
        return 8.0 * np.pi / (4.0 * np.pi - self.beta2)

    @property
    def p_pair(self):
        """2 beta^2 / (4 pi + beta^2), the light-cone exponent after Hoelder."""
        return 2.0 * self.beta2 / (4.0 * np.pi + self.beta2)

    @property
    def decay(self):
        """(4 pi - beta^2) / (8 pi), the factorial decay exponent."""
        return (4.0 * np.pi - self.beta2) / (8.0 * np.pi)


@dataclass
class BoundReport:
    quantity: str
    inputs: dict = field(default_factory=dict)
    value: float = 0.0
    finite: bool = True

    def as_record(self):
        return {"quantity": self.quantity, "params": dict(self.inputs),
                "value_re": float(self.value), "value_im": None, "error_est": None,
                "pass": bool(self.finite), "paper_ref": "norm bounds"}


# --- weighted norms ---------------------------------------------------------

def _density_1d(T, p, H, scale):
    def fn(t):
        return np.abs(T(t) / (scale * H * H * np.sin(t) ** 2)) ** p
    return fn


def _quad_1d(fn, breaks):
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b > a:
            total += integrate.quad(lambda t: float(fn(np.array(t))), a, b,
                                    epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return total


def _theta_profile_integral(S, p):
    if isinstance(S, Const):
        return 2.0 * np.pi
    br = np.unique(np.clip(np.concatenate([[0.0, 2.0 * np.pi],
                                           np.mod(S.breaks(), 2.0 * np.pi)]), 0.0, 2.0 * np.pi))
    return _quad_1d(lambda h: np.abs(S(h)) ** p, br)


def _sup_1d(fn, breaks, n=2049):
    """Maximum of a piecewise smooth function: dense grid per panel, then polish."""
    best, arg = 0.0, None
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b <= a:
            continue
        x = np.linspace(a, b, n)
        y = fn(x)
        i = int(np.argmax(y))
        if y[i] > best:
            best, arg = float(y[i]), (x[max(i - 1, 0)], x[min(i + 1, n - 1)])
    if arg is not None and arg[1] > arg[0]:
        res = optimize.minimize_scalar(lambda t: -float(fn(np.array(t))), bounds=arg,
                                       method="bounded", options={"xatol": 1e-13})
        best = max(best, -float(res.fun))
    return best


def _grid_sup_2d(f, H, scale, lo, hi, tb, hb):
    """Essential sup on a refinement ladder, stopped at relative change 1e-6."""
    prev = None
    for n in (128, 256, 512, 1024):
        t = np.unique(np.concatenate([np.linspace(lo, hi, n), tb]))
        h = np.unique(np.concatenate([np.linspace(0.0, 2.0 * np.pi, 2 * n, endpoint=False), hb]))
        T, Hh = np.meshgrid(t, h, indexing="ij")
        vals = np.abs(f(T, Hh)) / (scale * H * H * np.sin(T) ** 2)
        cur = float(vals.max())
        if prev is not None and abs(cur - prev) <= 1e-6 * max(cur, 1e-300):
            return cur
        prev = cur
    return prev


def _disjoint_tau_supports(terms):
    spans = sorted(T.support for _, T, _ in terms)
    return all(a[1] <= b[0] for a, b in zip(spans[:-1], spans[1:]))


def weighted_lp_norm(f, p, H=1.0, scale=2.0, n_panel=48):
    """Weighted L^p norm of f / (scale H^2 sin^2 tau) on the cylinder.

    Parameters
    ----------
    f : TestFunction
    p : float
        Exponent, at least one, or ``np.inf`` for the essential supremum.
    scale : float
        Two for the S-matrix norm, one for the interacting-field norms.

    Returns
    -------
    float
        ``np.inf`` when the support touches tau = 0 or tau = pi.

    Notes
    -----
    Separable functions, and sums of separable terms with disjoint
    tau-supports, are integrated one dimension at a time with adaptive
    quadrature split at the profile breakpoints.  Other sums and grids
    use composite Gauss-Legendre panels in both directions.  For grid
    families the sup is the maximum over the samples.
    """
    if not (p >= 1.0):
        raise ValueError("p must be at least one")
    if f.is_zero:
        return 0.0
    if f.touches_boundary:
        return np.inf
    lo, hi = f.support
    if np.isinf(p):
        if f.grid is not None:
            tg, hg, v = f.grid
            return float(np.max(np.abs(v) / (scale * H * H * np.sin(tg)[:, None] ** 2)))
        if _disjoint_tau_supports(f.terms):
            best = 0.0
            for a, T, S in f.terms:
                piece = TestFunction([(a, T, S)])
                st = _sup_1d(lambda t: np.abs(T(t)) / (scale * H * H * np.sin(t) ** 2), piece.tau_breaks())
                sh = _sup_1d(lambda h: np.abs(S(h)), piece.theta_breaks())
                best = max(best, abs(a) * st * sh)
            return best
        return _grid_sup_2d(f, H, scale, lo, hi, f.tau_breaks(), f.theta_breaks())
    if f.grid is None and _disjoint_tau_supports(f.terms):
        # |f|^p is the sum of the separable pieces
        total = 0.0
        for a, T, S in f.terms:
            piece = TestFunction([(a, T, S)])
            tau_part = _quad_1d(_density_1d(T, p, H, scale), piece.tau_breaks())
            total += abs(a) ** p * 2.0 * tau_part * _theta_profile_integral(S, p)
        return total ** (1.0 / p)
    t, wt = f.tau_nodes(n_panel)
    h, wh = f.theta_nodes(n_panel)
    T, Hh = np.meshgrid(t, h, indexing="ij")
    dens = np.abs(f(T, Hh) / (scale * H * H * np.sin(T) ** 2)) ** p
    return float((2.0 * wt @ dens @ wh) ** (1.0 / p))


def smatrix_constant_C(g, c, H=1.0):
    """C(g) = 36 sqrt(2) pi^3 (4 pi - beta^2)^(-(4 pi + beta^2)/(8 pi)) ||g / (2 H^2 sin^2)||_q.

    The norm exponent is q = 8 pi / (4 pi - beta^2).
    """
    norm = weighted_lp_norm(g, c.p_norm, H, scale=2.0)
    pref = 36.0 * math.sqrt(2.0) * np.pi ** 3 * (4.0 * np.pi - c.beta2) ** (-c.p_holder)
    return pref * norm


# --- series bounds ------------------------------------------------------------

def _log_order_bound(k, c, Cg):
    if Cg == 0.0:
        return 0.0 if k == 0 else -np.inf
    return -c.decay * math.lgamma(k + 1) + k * math.log(2.0 * Cg)


def smatrix_order_bound(k, c, Cg):
    """(k!)^(-(4 pi - beta^2)/(8 pi)) (2 C)^k, evaluated through logarithms.

    Saturates to ``inf`` when the value overflows a double.
    """
    if k < 0 or Cg < 0:
        raise ValueError("need k >= 0 and Cg >= 0")
    return _safe_exp(_log_order_bound(k, c, Cg))


def term_ratio(k, c, Cg):
    """Ratio of consecutive S-matrix order bounds, 2 C (k+1)^(-(4 pi - beta^2)/(8 pi))."""
    return 2.0 * Cg * (k + 1) ** (-c.decay)


def _first_ratio_below_one(ratio, k0):
    """First k >= k0 with ratio(k) < 1; the ratio is decreasing in k."""
    if ratio(k0) < 1.0:
        return k0
    hi = max(2 * k0, k0 + 1)
    while ratio(hi) >= 1.0:
        hi *= 2
    lo = k0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ratio(mid) < 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def _log_tail_from(k0, log_term, ratio, max_terms=20_000):
    """Logarithm of a rigorous majorant of sum_{k >= k0} term(k).

    The ratio term(k+1)/term(k) decreases in k.  From the first index k1
    with ratio < 1 on, term(k1 + j) <= term(k1) ratio(k1)^j, so the rest is
    at most term(k1) / (1 - ratio(k1)).  Before k1 the terms increase; the
    finite stretch is summed exactly when short and otherwise bounded by
    blocks of equal length, each majorized by its last term.
    """
    k1 = _first_ratio_below_one(ratio, k0)
    logs = [log_term(k1) - math.log1p(-ratio(k1))]
    gap = k1 - k0
    if gap <= max_terms:
        logs.extend(log_term(k) for k in range(k0, k1))
    else:
        m = -(-gap // max_terms)
        for a in range(k0, k1, m):
            b = min(a + m, k1)
            logs.append(math.log(b - a) + log_term(b - 1))
    logs = np.asarray(logs)
    logs = logs[np.isfinite(logs)]
    if logs.size == 0:
        return -np.inf
    top = logs.max()
    return float(top + math.log(np.sum(np.exp(logs - top))))


def _first_below(log_tail, log_target):
    # the tail is decreasing in k: exponential search then bisection
    if log_tail(0) < log_target:
        return 0
    hi = 1
    while log_tail(hi) >= log_target:
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_tail(mid) < log_target:
            hi = mid
        else:
            lo = mid
    return hi


def _safe_exp(x):
    return math.exp(x) if x < 709.0 else np.inf


def tail_bound(k0, c, Cg, target=1e-6, return_log=False):
    """Upper bound on sum_{k >= k0} of the S-matrix order bounds.

    Returns
    -------
    tail : float
        Rigorous majorant of the tail starting at ``k0`` (``inf`` on overflow).
    k_star : int
        Smallest k with tail(k) < target.
    log_tail : float, only with ``return_log``
        Natural logarithm of the majorant, finite even when ``tail`` overflows.
    """
    if Cg == 0.0:
        lt0 = 0.0 if k0 == 0 else -np.inf
        out = (_safe_exp(lt0), 0 if target > 1.0 else 1)
        return out + (lt0,) if return_log else out

    def lt(k):
        return _log_order_bound(k, c, Cg)

    def ratio(k):
        return term_ratio(k, c, Cg)

    log_tail = _log_tail_from(k0, lt, ratio)
    k_star = _first_below(lambda k: _log_tail_from(k, lt, ratio), math.log(target))
    out = (_safe_exp(log_tail), k_star)
    return out + (log_tail,) if return_log else out


def _log_field_bound(k, c, Cg, Cmax, vertex=False, Ch=None):
    if vertex:
        if Ch is None:
            raise ValueError("the vertex variant needs C(h)")
        if Ch == 0.0:
            return -np.inf
        base = math.log(k + 1) - c.decay * math.lgamma(k + 2) + math.log(Ch)
    else:
        if Cmax == 0.0:
            return -np.inf
        base = math.log(k + 1) - c.decay * math.lgamma(k + 1) + 0.5 * math.log(Cmax)
    if Cg == 0.0:
        return base if k == 0 else -np.inf
    return base + k * math.log(4.0 * Cg)


def field_order_bound(k, c, Cg, Cmax=0.0, vertex=False, Ch=None):
    """Per-order bound of the interacting field or vertex operator.

    Field: (k+1) (k!)^(-(4 pi - beta^2)/(8 pi)) (4 C(g))^k sqrt(Cmax).
    Vertex (``vertex=True``): (k+1) ((k+1)!)^(-(4 pi - beta^2)/(8 pi)) C(h) (4 C(g))^k.
    """
    if k < 0 or Cg < 0 or Cmax < 0:
        raise ValueError("inputs must be nonnegative")
    return _safe_exp(_log_field_bound(k, c, Cg, Cmax, vertex, Ch))


def field_tail_bound(k0, c, Cg, Cmax=0.0, target=1e-6, vertex=False, Ch=None, return_log=False):
    """Tail majorant and k_star for the interacting-field series.

    The consecutive ratio is (k+2)/(k+1) 4 C (k+1)^(-decay) for the field
    and (k+2)/(k+1) 4 C (k+2)^(-decay) for the vertex variant; both
    decrease in k, which is all the majorant needs.
    """
    def lt(k):
        return _log_field_bound(k, c, Cg, Cmax, vertex, Ch)

    def ratio(k):
        m = k + 2 if vertex else k + 1
        return (k + 2) / (k + 1) * 4.0 * Cg * m ** (-c.decay)

    if np.isneginf(lt(0)) or Cg == 0.0:
        lt0 = lt(0) if k0 == 0 else -np.inf
        out = (_safe_exp(lt0), 0 if lt(0) < math.log(target) else 1)
        return out + (lt0,) if return_log else out
    log_tail = _log_tail_from(k0, lt, ratio)
    k_star = _first_below(lambda k: _log_tail_from(k, lt, ratio), math.log(target))
    out = (_safe_exp(log_tail), k_star)
    return out + (log_tail,) if return_log else out


# --- Cauchy determinant and elementary inequalities ---------------------------

def _fraction_det(rows):
    """Determinant of a small matrix of Fractions by exact elimination."""
    m = [list(r) for r in rows]
    n = len(m)
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if m[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            m[i], m[piv] = m[piv], m[i]
            det = -det
        det *= m[i][i]
        for r in range(i + 1, n):
            fac = m[r][i] / m[i][i]
            m[r] = [a - fac * b for a, b in zip(m[r], m[i])]
    return det


def cauchy_det_check(x, y):
    """Determinant of 1/(x_i - y_j) and the product formula.

    Returns
    -------
    det_value, product_value
        ``product_value`` is prod_{i<j}(x_i - x_j)(y_i - y_j) / prod_{i,j}(x_i - y_j).
        The two agree up to the sign (-1)^(k(k-1)/2) of reversing the rows.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d of equal length")
    diff = x[:, None] - y[None, :]
    if np.any(np.abs(diff) == 0):
        raise ValueError("x_i = y_j makes the matrix singular")
    k = len(x)
    if k <= 8 and np.isrealobj(x) and np.isrealobj(y):
        # float inputs are exact rationals, so elimination in fractions is exact
        det = float(_fraction_det([[1 / (Fraction(float(a)) - Fraction(float(b))) for b in y] for a in x]))
    else:
        det = np.linalg.det(1.0 / diff)  # LU with partial pivoting
    num = 1.0
    for i in range(k):
        for j in range(i + 1, k):
            num = num * (x[i] - x[j]) * (y[i] - y[j])
    return det, num / np.prod(diff)


def cauchy_permutation_majorant(v, vt, p):
    """(|det(1/(e^{iv_i} - e^{i vt_j}))|^p, sum over permutations of prod |.|^(-p))."""
    a = np.exp(1j * np.asarray(v, dtype=float))
    b = np.exp(1j * np.asarray(vt, dtype=float))
    m = np.abs(a[:, None] - b[None, :])
    lhs = abs(np.linalg.det(1.0 / (a[:, None] - b[None, :]))) ** p
    k = len(a)
    rhs = sum(np.prod([m[i, s[i]] ** (-p) for i in range(k)]) for s in itertools.permutations(range(k)))
    return lhs, rhs


def subadditivity_check(a, p):
    """((sum |a|)^p, sum |a|^p) for 0 < p < 1."""
    a = np.abs(np.asarray(a, dtype=float))
    return a.sum() ** p, np.sum(a ** p)


def cosine_bound_margin(x):
    """Margin of 1/(2 - 2 cos x) <= pi^2/(8 x^2) on |x| <= pi/2 and <= 1/2 on [pi/2, 3 pi/2].

    The margin is evaluated as bound - 1/(4 sin^2(x/2)) to avoid
    cancellation for small x.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x == 0.0):
        raise ValueError("x = 0 is excluded")
    inner = np.abs(x) <= np.pi / 2
    outer = (x >= np.pi / 2) & (x <= 1.5 * np.pi)
    if not np.all(inner | outer):
        raise ValueError("x must lie in [-pi/2, pi/2] or [pi/2, 3 pi/2]")
    bound = np.where(inner, np.pi ** 2 / (8.0 * np.where(inner, x, 1.0) ** 2), 0.5)
    out = bound - 1.0 / (4.0 * np.sin(x / 2.0) ** 2)
    return out if out.ndim else float(out)


def u_integral_bound(c):
    """72 pi^3 / (4 pi - beta^2)."""
    return 72.0 * np.pi ** 3 / (4.0 * np.pi - c.beta2)


def u_integral_quadrature(c=None, p=None):
    """The light-cone integral of |e^{iu} - e^{iu'}|^(-p) over u, u' in (-2 pi, pi).

    Depends only on w = u - u', giving 2 int_0^{3 pi} (3 pi - w) |2 sin(w/2)|^(-p) dw.
    The singular endpoints w = 0 and w = 2 pi are handled with algebraic
    weights.  ``p`` defaults to 2 beta^2 / (4 pi + beta^2).

    Returns
    -------
    value, abserr
    """
    if p is None:
        p = c.p_pair

    # near w = 0: |2 sin(w/2)|^(-p) = w^(-p) * (w / (2 sin(w/2)))^p
    def smooth0(w):
        return (3 * np.pi - w) * (w / (2.0 * np.sin(w / 2.0)) if w > 0 else 1.0) ** p

    # near w = 2 pi with d = |w - 2 pi|
    def smooth2(w):
        d = abs(w - 2.0 * np.pi)
        r = d / (2.0 * abs(np.sin(w / 2.0))) if d > 0 else 1.0
        return (3 * np.pi - w) * r ** p

    v1, e1 = integrate.quad(smooth0, 0.0, np.pi, weight="alg", wvar=(-p, 0.0), epsabs=0, epsrel=1e-12, limit=200)
    v2, e2 = integrate.quad(smooth2, np.pi, 2 * np.pi, weight="alg", wvar=(0.0, -p), epsabs=0, epsrel=1e-12, limit=200)
    v3, e3 = integrate.quad(smooth2, 2 * np.pi, 3 * np.pi, weight="alg", wvar=(-p, 0.0), epsabs=0, epsrel=1e-12, limit=200)
    return 2.0 * (v1 + v2 + v3), 2.0 * (e1 + e2 + e3)


def holder_check(F, G, areas, p):
    """Both sides of int F G <= ||F||_{1/p} ||G||_{1/(1-p)} for step functions.

    ``F``, ``G`` are nonnegative cell values and ``areas`` the cell measures.
    """
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    areas = np.asarray(areas, dtype=float)
    lhs = np.sum(F * G * areas)
    rhs = np.sum(F ** (1.0 / p) * areas) ** p * np.sum(G ** (1.0 / (1.0 - p)) * areas) ** (1.0 - p)
    return lhs, rhs


# --- interacting field --------------------------------------------------------

def _theta_sgn(p, q):
    """Theta[cos(dtheta) - cos(dtau)] sgn sin(dtau) with d = p - q."""
    dt = p[0] - q[0]
    dh = p[1] - q[1]
    return float(np.cos(dh) > np.cos(dt)) * float(np.sign(np.sin(dt)))


def _log_abs_d(p, q):
    d = 2.0 * np.cos(p[0] - q[0]) - 2.0 * np.cos(p[1] - q[1])
    if d == 0.0:
        raise ValueError("point lies on the light cone of an insertion")
    return math.log(abs(d))


def k_pm(f, p, sign, sigmas, points, c, H=1.0):
    """The function K_+ or K_- at the point p.

    Parameters
    ----------
    f : TestFunction
        Weyl-vector test function; it enters through its smeared commutator
        -1/2 int Theta sgn f / (H^2 sin^2), which equals G+(f, p) - G+(p, f).
    sign : +1 or -1
    sigmas : sequence of +-1, length k
    points : sequence of 2k (tau, theta) pairs
    """
    k = len(sigmas)
    if len(points) != 2 * k:
        raise ValueError("need 2k insertion points")
    sign = 1 if sign > 0 else -1
    out = 0.0 + 0.0j
    if f is not None and not f.is_zero:
        out += smeared_commutator(f, p, H)
    for j in range(k):
        a, b = points[j], points[k + j]
        term = _log_abs_d(p, a) - _log_abs_d(p, b)
        term += sign * 1j * np.pi * (_theta_sgn(p, a) - _theta_sgn(p, b))
        out += 1j * c.beta / (4.0 * np.pi) * sigmas[j] * term
    return complex(out)


def ctilde_constants(f, h, c, H=1.0, zero_mean_tol=1e-8):
    """(C0, C1, C2) of the interacting-field bound.

    Built from N1(f), N1(h), Ninf(h), the scale-one weighted norms.  The
    smeared h must integrate to zero against the volume form; this is
    checked to ``zero_mean_tol`` relative to N1(h).
    """
    nf = weighted_lp_norm(f, 1.0, H, scale=1.0) if f is not None else 0.0
    n1 = weighted_lp_norm(h, 1.0, H, scale=1.0)
    ninf = weighted_lp_norm(h, np.inf, H, scale=1.0)
    if not h.is_zero and np.isfinite(n1):
        mean = volume_integral(h, H)
        if abs(mean) > zero_mean_tol * max(n1, 1e-300):
            raise ValueError(f"h must integrate to zero, got {mean:.3e}")
    return ctilde_from_norms(nf, n1, ninf, c.beta)


def ctilde_from_norms(nf, n1, ninf, beta):
    """The three constants from precomputed norms."""
    bracket = n1 + 15.0 * np.pi * ninf
    c0 = 0.25 * (1.0 + nf ** 2) * n1 ** 2 + 67.5 * np.pi ** 3 * ninf ** 2
    c1 = beta * nf * n1 * bracket
    c2 = beta ** 2 * bracket ** 2
    return c0, c1, c2


def volume_integral(h, H=1.0, n_panel=48):
    """int h / (H^2 sin^2 tau) dtau dtheta."""
    if h.is_zero:
        return 0.0
    t, wt = h.tau_nodes(n_panel)
    s, ws = h.theta_nodes(n_panel)
    T, S = np.meshgrid(t, s, indexing="ij")
    return float(wt @ (h(T, S) / (H * H * np.sin(T) ** 2)) @ ws)
