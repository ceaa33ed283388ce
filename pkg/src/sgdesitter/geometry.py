"""Two-dimensional de Sitter space in global conformal coordinates.

The cylinder chart uses ``tau`` in the open interval (0, pi) and a periodic
angle ``theta``.  The metric is conformally flat,

    ds^2 = (-dtau^2 + dtheta^2) / (H^2 sin^2 tau),

and the spacetime is the hyperboloid -X0^2 + X1^2 + X2^2 = H^-2 in
three-dimensional Minkowski space.  All functions accept scalars or numpy
arrays and broadcast.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

# below this |s^2| the flow coefficients use their Taylor series
_SERIES_S2 = 1e-8


def wrap_angle(theta):
    """Map an angle into [0, 2 pi)."""
    out = np.mod(theta, TWO_PI)
    # np.mod can return 2 pi itself for tiny negative input
    return np.where(out >= TWO_PI, 0.0, out)


def wrap_difference(dtheta):
    """Map an angle difference into (-pi, pi]."""
    out = -np.mod(-np.asarray(dtheta, dtype=float) + np.pi, TWO_PI) + np.pi
    return out


@dataclass(frozen=True)
class Point:
    """A point (tau, theta) of the de Sitter cylinder."""

    tau: float
    theta: float

    def __post_init__(self):
        if not (0.0 < self.tau < np.pi):
            raise ValueError(f"tau={self.tau!r} outside (0, pi)")
        object.__setattr__(self, "theta", float(wrap_angle(float(self.theta))))

    def as_tuple(self):
        return (self.tau, self.theta)


@dataclass(frozen=True)
class GroupParams:
    """Rotation angle ``a`` and boost rapidities ``b``, ``c``."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0

    @property
    def s2(self):
        return self.a * self.a - self.b * self.b - self.c * self.c

    def inverse(self):
        return GroupParams(-self.a, -self.b, -self.c)


class CausalClass(enum.Enum):
    TIMELIKE_FUTURE = "TimelikeFuture"
    TIMELIKE_PAST = "TimelikePast"
    LIGHTLIKE = "Lightlike"
    SPACELIKE = "Spacelike"


def _check_tau(tau):
    tau = np.asarray(tau, dtype=float)
    if np.any((tau <= 0.0) | (tau >= np.pi)):
        raise ValueError("tau must lie strictly inside (0, pi)")
    return tau


def embed(tau, theta, H=1.0):
    """Embedding coordinates (X0, X1, X2) of the point (tau, theta).

    Returns
    -------
    ndarray
        Array with a leading axis of length 3.
    """
    tau = _check_tau(tau)
    s = np.sin(tau)
    return np.stack(np.broadcast_arrays(-np.cos(tau) / (H * s),
                                        np.cos(theta) / (H * s),
                                        np.sin(theta) / (H * s)))


def hyperboloid_residual(X, H=1.0):
    """Relative violation of -X0^2 + X1^2 + X2^2 = 1/H^2."""
    X = np.asarray(X, dtype=float)
    q = -X[0] ** 2 + X[1] ** 2 + X[2] ** 2
    return np.abs(q * H * H - 1.0)


def intrinsic(X, H=1.0):
    """Inverse of :func:`embed`.  ``tau = arccot(-H X0)`` in (0, pi)."""
    X = np.asarray(X, dtype=float)
    tau = np.arctan2(1.0, -H * X[0])
    theta = wrap_angle(np.arctan2(X[2], X[1]))
    return tau, theta


# --- Killing vector fields -------------------------------------------------

def killing_field(kind, tau, theta):
    """Components (xi^tau, xi^theta) of a Killing vector field.

    ``kind`` is one of ``"rot"``, ``"boost1"``, ``"boost2"``.
    """
    tau = np.asarray(tau, dtype=float)
    theta = np.asarray(theta, dtype=float)
    st, ct = np.sin(tau), np.cos(tau)
    sh, ch = np.sin(theta), np.cos(theta)
    if kind == "rot":
        return np.zeros_like(tau + theta), np.ones_like(tau + theta)
    if kind == "boost1":
        return st * ch, ct * sh
    if kind == "boost2":
        return st * sh, -ct * ch
    raise ValueError(f"unknown Killing field {kind!r}")


def killing_jacobian(kind, tau, theta):
    """Analytic matrix d xi^mu / d x^nu, shape (2, 2, ...)."""
    tau = np.asarray(tau, dtype=float)
    theta = np.asarray(theta, dtype=float)
    st, ct = np.sin(tau), np.cos(tau)
    sh, ch = np.sin(theta), np.cos(theta)
    z = np.zeros_like(tau + theta)
    if kind == "rot":
        return np.array([[z, z], [z, z]])
    if kind == "boost1":
        return np.array([[ct * ch, -st * sh], [-st * sh, ct * ch]])
    if kind == "boost2":
        return np.array([[ct * sh, st * ch], [st * ch, ct * sh]])
    raise ValueError(f"unknown Killing field {kind!r}")


def lie_bracket(kind_x, kind_y, tau, theta):
    """Analytic commutator [X, Y]^mu = X^nu d_nu Y^mu - Y^nu d_nu X^mu."""
    X = np.array(killing_field(kind_x, tau, theta))
    Y = np.array(killing_field(kind_y, tau, theta))
    JX = killing_jacobian(kind_x, tau, theta)
    JY = killing_jacobian(kind_y, tau, theta)
    return np.einsum("mn...,n...->m...", JY, X) - np.einsum("mn...,n...->m...", JX, Y)


def _params_for(kind, t):
    return {"rot": (t, 0.0, 0.0), "boost1": (0.0, t, 0.0), "boost2": (0.0, 0.0, t)}[kind]


def lie_bracket_from_flows(kind_x, kind_y, tau, theta, h=2e-3):
    """Commutator of two Killing fields from their finite flows.

    Uses the group commutator Phi^Y_{-t} Phi^X_{-t} Phi^Y_t Phi^X_t (p),
    whose displacement is t^2 [X, Y] + O(t^3), with two Richardson
    extrapolation steps in t.
    """
    def displacement(t):
        ax = GroupParams(*_params_for(kind_x, t))
        ay = GroupParams(*_params_for(kind_y, t))
        q = transform(ax, tau, theta)
        q = transform(ay, *q)
        q = transform(ax.inverse(), *q)
        q = transform(ay.inverse(), *q)
        return np.array([q[0] - tau, wrap_difference(q[1] - theta)]) / (t * t)

    d1, d2, d4 = displacement(h), displacement(h / 2), displacement(h / 4)
    r1 = 2.0 * d2 - d1
    r2 = 2.0 * d4 - d2
    return (4.0 * r2 - r1) / 3.0


# --- finite flows ----------------------------------------------------------

def _flow_coefficients(s2):
    """Return cos s, (1 - cos s)/s^2 and sin s / s for either sign of s^2."""
    s2 = np.asarray(s2, dtype=float)
    small = np.abs(s2) < _SERIES_S2
    pos = (s2 > 0) & ~small
    neg = (s2 < 0) & ~small
    C = np.empty_like(s2)
    P = np.empty_like(s2)
    Q = np.empty_like(s2)
    # series: analytic in s^2
    C[small] = 1.0 - s2[small] / 2.0 + s2[small] ** 2 / 24.0
    P[small] = 0.5 - s2[small] / 24.0 + s2[small] ** 2 / 720.0
    Q[small] = 1.0 - s2[small] / 6.0 + s2[small] ** 2 / 120.0
    s = np.sqrt(s2[pos])
    C[pos] = np.cos(s)
    P[pos] = 2.0 * np.sin(s / 2.0) ** 2 / s2[pos]
    Q[pos] = np.sin(s) / s
    t = np.sqrt(-s2[neg])
    C[neg] = np.cosh(t)
    P[neg] = 2.0 * np.sinh(t / 2.0) ** 2 / (t * t)
    Q[neg] = np.sinh(t) / t
    return C, P, Q


def flow_matrix(g):
    """Linear map on embedding coordinates (X0, X1, X2) for parameters g."""
    a, b, c = float(g.a), float(g.b), float(g.c)
    _, P, Q = (float(v[0]) for v in _flow_coefficients(np.array([g.s2])))
    return np.array([
        [1.0 + (b * b + c * c) * P, a * c * P + b * Q, -a * b * P + c * Q],
        [-a * c * P + b * Q, 1.0 - (a * a - b * b) * P, b * c * P - a * Q],
        [a * b * P + c * Q, b * c * P + a * Q, 1.0 - (a * a - c * c) * P],
    ])


def transform(g, tau, theta, inverse=False):
    """Apply the finite rotation/boost with parameters ``g`` to (tau, theta).

    The result is continuous in (a, b, c) and equals the identity for
    a = b = c = 0.  The inverse map negates all parameters.
    """
    if inverse:
        g = g.inverse()
    tau = _check_tau(tau)
    theta = np.asarray(theta, dtype=float)
    L = flow_matrix(g)
    # embedding vector scaled by H sin tau, which leaves both angles unchanged
    v = np.stack(np.broadcast_arrays(-np.cos(tau), np.cos(theta), np.sin(theta)))
    w = np.einsum("ij,j...->i...", L, v)
    # cot tau' = -H X0' = -w0 / sin tau
    new_tau = np.arctan2(np.broadcast_to(np.sin(tau), w[0].shape), -w[0])
    new_theta = wrap_angle(np.arctan2(w[2], w[1]))
    return new_tau, new_theta


def transform_point(g, p, inverse=False):
    t, th = transform(g, p.tau, p.theta, inverse=inverse)
    return Point(float(t), float(th))


def first_order_flow(g, tau, theta):
    """Leading-order displacement of (tau, theta) under small parameters."""
    st, ct = np.sin(tau), np.cos(tau)
    sh, ch = np.sin(theta), np.cos(theta)
    return (tau + g.b * ch * st + g.c * sh * st,
            theta + g.a + g.b * sh * ct - g.c * ch * ct)


def flow_jacobian_fd(g, tau, theta, h=1e-6):
    """Determinant of d(tau', theta')/d(tau, theta) by central differences."""
    tp = transform(g, tau + h, theta)
    tm = transform(g, tau - h, theta)
    hp = transform(g, tau, theta + h)
    hm = transform(g, tau, theta - h)
    dtt = (tp[0] - tm[0]) / (2 * h)
    dht = wrap_difference(tp[1] - tm[1]) / (2 * h)
    dth = (hp[0] - hm[0]) / (2 * h)
    dhh = wrap_difference(hp[1] - hm[1]) / (2 * h)
    return dtt * dhh - dth * dht


def measure_ratio(g, tau, theta):
    """The ratio sin^2(tau') / sin^2(tau) expected for the Jacobian."""
    t2, _ = transform(g, tau, theta)
    return np.sin(t2) ** 2 / np.sin(tau) ** 2


# --- invariants and causal structure ---------------------------------------

def geodesic_z(tau1, theta1, tau2, theta2):
    """Invariant z = 1 + (cos dtheta - cos dtau) / (sin tau sin tau')."""
    return 1.0 + (np.cos(theta1 - theta2) - np.cos(tau1 - tau2)) / (np.sin(tau1) * np.sin(tau2))


def inverse_metric_norm(dz_dtau, dz_dtheta, tau, H=1.0):
    """g^{mu nu} d_mu z d_nu z for the conformal metric."""
    return H * H * np.sin(tau) ** 2 * (-dz_dtau ** 2 + dz_dtheta ** 2)


def causal_class(p, q, tol=1e-12):
    """Causal relation of ``q`` relative to ``p``.

    Timelike iff cos(dtheta) > cos(dtau); future or past by the sign of
    sin(dtau) with dtau = tau_q - tau_p.
    """
    dtau = q.tau - p.tau
    if abs(dtau) >= np.pi:
        raise ValueError("time separation |dtau| >= pi is not classified")
    dth = float(wrap_difference(q.theta - p.theta))
    gap = np.cos(dth) - np.cos(dtau)
    if abs(gap) <= tol:
        return CausalClass.LIGHTLIKE
    if gap < 0:
        return CausalClass.SPACELIKE
    return CausalClass.TIMELIKE_FUTURE if np.sin(dtau) > 0 else CausalClass.TIMELIKE_PAST
