"""Two-point functions of the alpha-family of states.

Conventions
-----------
``wightman(p, q)`` returns iG+(p, q), the vacuum expectation value
<phi(p) phi(q)>.  With dtau = tau_p - tau_q and dtheta wrapped into
(-pi, pi], the exact (epsilon -> 0) closed form is

    iG+ = alpha^2/4 + (tau_p - pi/2)(tau_q - pi/2) / (4 pi^2 alpha^2)
          - ln|2 cos dtau - 2 cos dtheta| / (4 pi)
          - (i/4) Theta[cos dtheta - cos dtau] sgn sin dtau.

The linear term -i dtau/(4 pi) coming from the zero mode cancels against
the one produced by the logarithm identity.  The imaginary part was checked
against the mode sum: for a future-directed timelike q relative to p
(dtau < 0) it equals +1/4.

Points are passed as ``(tau, theta)`` pairs of scalars or arrays.
"""
from __future__ import annotations

import enum

import numpy as np

from .geometry import geodesic_z, killing_field, wrap_difference
from .modes import StateAlpha

EULER_GAMMA = np.euler_gamma
_LIGHTCONE_GUARD = 1e-300


class LightConeSingularity(ValueError):
    """Raised when a kernel is requested on its singular support."""


class Ordering(enum.Enum):
    WIGHTMAN = "Wightman"
    TIME_ORDERED = "TimeOrdered"
    ANTI_TIME_ORDERED = "AntiTimeOrdered"


def _as_pair(p):
    tau, theta = p
    return np.asarray(tau, dtype=float), np.asarray(theta, dtype=float)


def cosine_difference(dtau, dtheta):
    """2 cos dtau - 2 cos dtheta, evaluated in product form to avoid cancellation."""
    return -4.0 * np.sin(0.5 * (dtau + dtheta)) * np.sin(0.5 * (dtau - dtheta))


def _zero_mode_part(tp, tq, alpha):
    return alpha * alpha / 4.0 + (tp - np.pi / 2) * (tq - np.pi / 2) / (4.0 * np.pi ** 2 * alpha * alpha)


def _exact_log_part(dtau, dtheta):
    """ln|D| and the phase pi Theta sgn sin(dtau) of the logarithm identity."""
    D = cosine_difference(dtau, dtheta)
    if np.any(np.abs(D) < _LIGHTCONE_GUARD):
        raise LightConeSingularity("points are coincident or lightlike separated")
    phase = np.pi * (D < 0) * np.sign(np.sin(dtau))
    return np.log(np.abs(D)), phase


def wightman(p, q, st, epsilon=None):
    """iG+_alpha(p, q).

    Parameters
    ----------
    p, q : (tau, theta)
    st : StateAlpha
    epsilon : float, optional
        Keep the mode-sum regulator exp(-|n| epsilon) explicit.  When
        omitted the exact limit is evaluated through the logarithm identity.
    """
    tp, hp = _as_pair(p)
    tq, hq = _as_pair(q)
    dtau = tp - tq
    dth = wrap_difference(hp - hq)
    zero = _zero_mode_part(tp, tq, st.alpha)
    if epsilon is None:
        logabs, phase = _exact_log_part(dtau, dth)
        return zero - (logabs + 1j * phase) / (4.0 * np.pi)
    s = (np.log1p(-np.exp(-1j * (dtau + dth) - epsilon))
         + np.log1p(-np.exp(-1j * (dtau - dth) - epsilon)))
    return zero - 1j * dtau / (4.0 * np.pi) - s / (4.0 * np.pi)


def ordered_kernel(p, q, st, ordering=Ordering.TIME_ORDERED, epsilon=None):
    """Wightman, Feynman or Dyson kernel.

    Time ordering replaces dtau by |dtau| and anti-time ordering by -|dtau|
    in every time difference; individual times in the zero-mode term are
    unaffected.
    """
    ordering = Ordering(ordering)
    if ordering is Ordering.WIGHTMAN:
        return wightman(p, q, st, epsilon)
    tp, hp = _as_pair(p)
    tq, hq = _as_pair(q)
    dtau = np.abs(tp - tq)
    if ordering is Ordering.ANTI_TIME_ORDERED:
        dtau = -dtau
    dth = wrap_difference(hp - hq)
    zero = _zero_mode_part(tp, tq, st.alpha)
    if epsilon is None:
        logabs, phase = _exact_log_part(dtau, dth)
        return zero - (logabs + 1j * phase) / (4.0 * np.pi)
    s = (np.log1p(-np.exp(-1j * (dtau + dth) - epsilon))
         + np.log1p(-np.exp(-1j * (dtau - dth) - epsilon)))
    return zero - 1j * dtau / (4.0 * np.pi) - s / (4.0 * np.pi)


def _check_separation(dtau):
    if np.any(np.abs(dtau) >= np.pi):
        raise ValueError("time separation |dtau| >= pi is not supported")


def commutator_kernel(p, q):
    """G+(p, q) - G+(q, p), a real alpha-independent kernel.

    Equals -(1/2) Theta[cos dtheta - cos dtau] sgn sin(tau_p - tau_q), so that
    <[phi(p), phi(q)]> = i * commutator_kernel(p, q).  The sign is the one
    produced by the mode sum.
    """
    tp, hp = _as_pair(p)
    tq, hq = _as_pair(q)
    dtau = tp - tq
    _check_separation(dtau)
    dth = wrap_difference(hp - hq)
    timelike = (np.cos(dth) - np.cos(dtau)) > 0
    return -0.5 * timelike * np.sign(np.sin(dtau))


def retarded(p, q, st=None):
    """Retarded propagator Theta(tau_p - tau_q) [G+(p, q) - G+(q, p)].

    It is -1/2 inside the past light cone of ``p`` and zero elsewhere.
    The state argument is accepted for symmetry with the other kernels; the
    result does not depend on alpha.
    """
    tp, _ = _as_pair(p)
    tq, _ = _as_pair(q)
    return (tp > tq) * commutator_kernel(p, q)


# --- smeared light-cone integrals -----------------------------------------

def _cone_integral(func, x, tau_breaks, past=True, n_tau=48, n_theta=48, theta_breaks=()):
    """Integrate ``func(tau, theta)`` over the past or future cone of x.

    The cone is {|dtheta| < |tau - tau_x|}; integration runs over tau
    between the given breakpoints and, at each tau, over the exact
    theta-interval of the cone, split at ``theta_breaks``.
    """
    tx, hx = x
    gx, gw = np.polynomial.legendre.leggauss(n_tau)
    hxn, hwn = np.polynomial.legendre.leggauss(n_theta)
    b = np.asarray(tau_breaks, dtype=float)
    if past:
        b = np.unique(np.concatenate([b[b < tx], [tx]])) if np.any(b < tx) else np.array([])
    else:
        b = np.unique(np.concatenate([[tx], b[b > tx]])) if np.any(b > tx) else np.array([])
    total = 0.0
    tb = np.asarray(theta_breaks, dtype=float)
    for a, c in zip(b[:-1], b[1:]):
        taus = 0.5 * (c - a) * gx + 0.5 * (c + a)
        wts = 0.5 * (c - a) * gw
        for t, w in zip(taus, wts):
            half = min(abs(tx - t), np.pi)
            lo, hi = hx - half, hx + half
            # theta breakpoints (periodic images) falling inside the interval
            cuts = [lo, hi]
            for k in (-1, 0, 1):
                inside = tb + 2 * np.pi * k
                cuts.extend(inside[(inside > lo) & (inside < hi)])
            cuts = np.unique(cuts)
            s = 0.0
            for u, v in zip(cuts[:-1], cuts[1:]):
                th = 0.5 * (v - u) * hxn + 0.5 * (v + u)
                s += np.sum(0.5 * (v - u) * hwn * func(t, th))
            total += w * s
    return total


def smeared_commutator(f, x, H=1.0, n_tau=48, n_theta=48):
    """G+(f, x) - G+(x, f) for a real test function ``f``.

    Equals the integral of commutator_kernel(y, x) f(y) / (H^2 sin^2 tau_y)
    over y, that is one half of the smeared f over the past cone of x minus
    one half over the future cone.
    """
    if f.is_zero:
        return 0.0

    def dens(t, th):
        return f(t, th) / (H * H * np.sin(t) ** 2)

    breaks = f.tau_breaks()
    tb = f.theta_breaks()
    past = _cone_integral(dens, x, breaks, True, n_tau, n_theta, tb)
    future = _cone_integral(dens, x, breaks, False, n_tau, n_theta, tb)
    return 0.5 * (past - future)


def green_identity_lhs(h, x, n_tau=64, n_theta=64):
    """Integral of G_ret(x, y) (d^2 h)(y) dtau dtheta for smooth compact h.

    With the flat wave operator d^2 = -d_tau^2 + d_theta^2 this should
    reproduce h(x).
    """
    val = _cone_integral(h.wave_operator, x, h.tau_breaks(), True, n_tau, n_theta, h.theta_breaks())
    return -0.5 * val


# --- Hadamard form ---------------------------------------------------------

def _mu2_scaled(z):
    """(H mu)^2 as an analytic function of z: arccos(z)^2, continued to z > 1."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    le = z <= 1.0
    out[le] = np.arccos(np.clip(z[le], -1.0, 1.0)) ** 2
    out[~le] = -np.arccosh(z[~le]) ** 2
    return out


def _one_minus_cos_over_sq(x2):
    """(1 - cos x)/x^2 as a function of x^2 (series near zero)."""
    x2 = np.asarray(x2, dtype=float)
    out = np.empty_like(x2)
    small = np.abs(x2) < 1e-8
    out[small] = 0.5 - x2[small] / 24.0 + x2[small] ** 2 / 720.0
    pos = (x2 > 0) & ~small
    neg = (x2 < 0) & ~small
    out[pos] = 2.0 * np.sin(0.5 * np.sqrt(x2[pos])) ** 2 / x2[pos]
    t = np.sqrt(-x2[neg])
    out[neg] = 2.0 * np.sinh(0.5 * t) ** 2 / (t * t)
    return out


def hadamard_w(p, q, st, M=1.0, H=1.0):
    """Smooth part W of the Feynman kernel in Hadamard form.

    W = pi alpha^2 + (tau - pi/2)(tau' - pi/2)/(pi alpha^2)
        - ln[4 sin tau sin tau'] - ln[(1 - cos H mu)/(M mu^2)]

    with z = cos(H mu).  Timelike pairs (z > 1) use the analytic
    continuation mu^2 < 0; the last logarithm is analytic in mu^2 and
    tends to ln(H^2/(2M)) at coincidence.
    """
    tp, hp = _as_pair(p)
    tq, hq = _as_pair(q)
    z = geodesic_z(tp, hp, tq, hq)
    if np.any(z <= -1.0):
        raise ValueError("points are not geodesically connected (z <= -1)")
    x2 = _mu2_scaled(z)
    ratio = H * H * _one_minus_cos_over_sq(x2) / M
    a2 = st.alpha ** 2
    return (np.pi * a2 + (tp - np.pi / 2) * (tq - np.pi / 2) / (np.pi * a2)
            - np.log(4.0 * np.sin(tp) * np.sin(tq)) - np.log(ratio))


def synge_sigma(p, q, H=1.0):
    """Half the squared geodesic distance; negative for timelike pairs."""
    tp, hp = _as_pair(p)
    tq, hq = _as_pair(q)
    return 0.5 * _mu2_scaled(geodesic_z(tp, hp, tq, hq)) / (H * H)


def hadamard_feynman(p, q, st, M=1.0, H=1.0):
    """(1/4 pi)[V ln(M sigma + i0) + W] with V = -1."""
    sigma = synge_sigma(p, q, H)
    log = np.log(np.abs(M * sigma)) + 1j * np.pi * (sigma < 0)
    return (-log + hadamard_w(p, q, st, M, H)) / (4.0 * np.pi)


# --- boost variation -------------------------------------------------------

def boost_variation(p, q, st, which="boost1", derivative_form=False):
    """Action of a boost on both arguments of G+ = -i iG+.

    Without ``derivative_form`` returns [xi(p) + xi(q)] G+(p, q).  With it,
    returns the 2x2 matrix of Lie derivatives of d_mu d'_nu G+ (rows mu =
    tau, theta at p; columns nu at q).

    Notes
    -----
    The (tau, tau) entry is -(cos tau cos theta + cos tau' cos theta') for
    boost1, which reduces to -2 cos tau cos theta only at coincidence; the
    finite-difference Lie derivative confirms the symmetric form.
    """
    tp, hp = _as_pair(p)
    tq, hq = _as_pair(q)
    a2 = st.alpha ** 2
    if which == "boost1":
        ang_p, ang_q = np.cos(hp), np.cos(hq)
        sp, sq = np.sin(hp), np.sin(hq)
    elif which == "boost2":
        ang_p, ang_q = np.sin(hp), np.sin(hq)
        sp, sq = -np.cos(hp), -np.cos(hq)
    else:
        raise ValueError(f"unknown boost {which!r}")
    pref = 1j / (4.0 * np.pi ** 2 * a2)
    if derivative_form:
        return pref * np.array([
            [-(np.cos(tp) * ang_p + np.cos(tq) * ang_q), np.sin(tq) * sq],
            [np.sin(tp) * sp, 0.0 * tp],
        ])
    term_p = (2 * np.pi * a2 * np.cos(tp) + (np.pi - 2 * tq) * np.sin(tp)) * ang_p
    term_q = (2 * np.pi * a2 * np.cos(tq) + (np.pi - 2 * tp) * np.sin(tq)) * ang_q
    return 1j * (term_p + term_q) / (8.0 * np.pi ** 2 * a2)


def killing_action_fd(func, kind, p, q, h=1e-5):
    """[xi(p) + xi(q)] applied to func(p, q) by central differences."""
    tp, hp = p
    tq, hq = q
    xp = killing_field(kind, tp, hp)
    xq = killing_field(kind, tq, hq)

    def shifted(t):
        return func((tp + t * xp[0], hp + t * xp[1]), (tq + t * xq[0], hq + t * xq[1]))

    return (8 * (shifted(h) - shifted(-h)) - (shifted(2 * h) - shifted(-2 * h))) / (12 * h)


# --- Minkowski limit -------------------------------------------------------

def alpha_for_mass(H, m):
    """alpha(H, m) = sqrt((2/pi) ln(m e^gamma / (2 H)))."""
    arg = m * np.exp(EULER_GAMMA) / (2.0 * H)
    if arg <= 1.0:
        raise ValueError("need m e^gamma > 2 H for a real alpha")
    return np.sqrt(2.0 / np.pi * np.log(arg))


def _atan_diff(a, b, diff):
    """arctan(a) - arctan(b) given an accurate value of a - b (a b > -1)."""
    return np.arctan(diff / (1.0 + a * b))


def _chart_lightcone(H, t, x, t2, x2, chart):
    """tau of both points plus accurate light-cone differences du, dv."""
    if chart == "poincare":
        A, A2 = H * x - np.exp(-H * t), H * x2 - np.exp(-H * t2)
        B, B2 = H * x + np.exp(-H * t), H * x2 + np.exp(-H * t2)
        dexp = np.exp(-H * t2) * np.expm1(-H * (t - t2))
        du = 2.0 * _atan_diff(A, A2, H * (x - x2) - dexp)
        dv = -2.0 * _atan_diff(B, B2, H * (x - x2) + dexp)
        tau1 = np.pi + np.arctan(A) - np.arctan(B)
        tau2 = np.pi + np.arctan(A2) - np.arctan(B2)
    elif chart == "global":
        E, E2 = np.exp(H * t), np.exp(H * t2)
        dE = 2.0 * _atan_diff(E, E2, E2 * np.expm1(H * (t - t2)))
        dX = _atan_diff(H * x, H * x2, H * (x - x2))
        du, dv = dE - dX, dE + dX
        tau1, tau2 = 2.0 * np.arctan(E), 2.0 * np.arctan(E2)
    else:
        raise ValueError(f"unknown chart {chart!r}")
    return tau1, tau2, du, dv


def flat_chart_point(H, t, x, chart="poincare"):
    """(tau, theta) of the flat coordinates (t, x) in the given chart."""
    if chart == "poincare":
        A, B = H * x - np.exp(-H * t), H * x + np.exp(-H * t)
        return np.pi + np.arctan(A) - np.arctan(B), np.pi - np.arctan(A) - np.arctan(B)
    return 2.0 * np.arctan(np.exp(H * t)), np.pi / 2 + np.arctan(H * x)


def wightman_lightcone(tau1, tau2, du, dv, alpha):
    """Exact iG+ from the times and the light-cone differences du, dv."""
    su, sv = np.sin(0.5 * du), np.sin(0.5 * dv)
    D = 4.0 * np.abs(su * sv)
    timelike = su * sv > 0
    phase = np.pi * timelike * np.sign(np.sin(0.5 * (du + dv)))
    return _zero_mode_part(tau1, tau2, alpha) - (np.log(D) + 1j * phase) / (4.0 * np.pi)


def flat_wightman(H, alpha, dt, dx):
    """alpha^2/4 - (1/4 pi) ln[iH(dt + dx - i0)] - (1/4 pi) ln[iH(dt - dx - i0)]."""
    def log_term(y):
        return np.log(H * np.abs(y)) + 0.5j * np.pi * np.sign(y)
    return alpha * alpha / 4.0 - (log_term(dt + dx) + log_term(dt - dx)) / (4.0 * np.pi)


def minkowski_compare(H, m, flat_pairs, chart="poincare"):
    """Maximum deviation of iG+ in a flat chart from its flat-space limit."""
    alpha = alpha_for_mass(H, m)
    dev = 0.0
    for t, x, t2, x2 in flat_pairs:
        tau1, tau2, du, dv = _chart_lightcone(H, t, x, t2, x2, chart)
        ds = wightman_lightcone(tau1, tau2, du, dv, alpha)
        flat = flat_wightman(H, alpha, t - t2, x - x2)
        dev = max(dev, abs(ds - flat))
    return dev
