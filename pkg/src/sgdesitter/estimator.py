"""Estimation of singular multi-dimensional integrals.

Two uses: the generic :func:`integrate` for box integrals with known
singular manifolds, and :func:`smatrix_norm2_estimate`, which estimates the
integral of

    prod_{i<j} |D(x_i, x_j) D(xt_i, xt_j)|^p / prod_{i,j} |D(x_i, xt_j)|^p
    * prod_i |g(x_i) g(xt_i)| / (H^4 sin^2 tau_i sin^2 taut_i),

with D = 2 cos dtau - 2 cos dtheta and p = beta^2 / (4 pi).  This is the
alpha-independent majorant of the squared norm of the k-th S-matrix term
applied to a Weyl vector.

Random numbers come from counter-based Philox streams keyed by
(seed, batch index), and batch means are reduced in a fixed order, so
results are bit-identical across reruns.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as sint
from scipy import stats

from .bounds import Coupling

SCHEMES = ("tensor_adaptive", "mc_plain", "mc_substituted")


@dataclass(frozen=True)
class SingularManifold:
    """Integrable singularity |x_index - x_anchor - offset|^(-exponent).

    ``anchor=None`` places the singularity at the fixed coordinate
    ``offset`` instead of on a pairwise diagonal.
    """

    index: int
    anchor: int | None = None
    exponent: float = 0.5
    offsets: tuple = (0.0,)


@dataclass
class IntegralSpec:
    dimension: int
    integrand: object  # vectorized: (n, dimension) array -> (n,) array
    domain: list
    singular: list = field(default_factory=list)
    scheme: str = "tensor_adaptive"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if len(self.domain) != self.dimension:
            raise ValueError("domain must give one interval per dimension")
        seen = set()
        for s in self.singular:
            if not s.exponent < 1.0:
                raise ValueError("singular exponents must be below one")
            if s.anchor is not None and s.anchor == s.index:
                raise ValueError("a manifold cannot anchor on its own coordinate")
            if s.index in seen:
                raise ValueError("at most one substituted manifold per coordinate")
            seen.add(s.index)


@dataclass
class Estimate:
    value: float
    std_error: float
    n_samples: int
    seed: int | None
    scheme: str
    ci99: tuple = (np.nan, np.nan)
    flagged: bool = False
    note: str = ""

    @property
    def upper99(self):
        return self.ci99[1]

    def as_record(self, quantity="estimate", params=None):
        return {"quantity": quantity,
                "params": dict(params or {}, seed=self.seed, scheme=self.scheme, n_samples=self.n_samples),
                "value_re": float(self.value), "value_im": None, "error_est": float(self.std_error),
                "pass": None if not self.flagged else False, "paper_ref": "S-matrix norm estimate"}


# --- batch machinery ------------------------------------------------------------

def _rng(seed, batch):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(batch)])))


def _batches(budget, batch_size, min_batches=32):
    """Equal batches, at least ``min_batches`` of them, never exceeding the budget."""
    budget = int(budget)
    nb = max(-(-budget // int(batch_size)), min(min_batches, budget))
    return nb, budget // nb


def _summarize(means, size, seed, scheme, note="", flagged=False, pooled_std=None):
    means = np.asarray(means, dtype=float)
    nb = len(means)
    value = float(np.mean(means))
    if nb > 1:
        se = float(np.std(means, ddof=1) / math.sqrt(nb))
        tq = float(stats.t.ppf(0.995, nb - 1))
    else:
        se = float(pooled_std / math.sqrt(size)) if pooled_std is not None else np.inf
        tq = float(stats.norm.ppf(0.995))
    return Estimate(value, se, nb * size, seed, scheme, (value - tq * se, value + tq * se), flagged, note)


def _run_batches(sampler, budget, seed, batch_size, scheme, note=""):
    nb, size = _batches(budget, batch_size)
    means = np.empty(nb)
    last_std = None
    for b in range(nb):
        w = sampler(_rng(seed, b), size)
        means[b] = w.mean()
        last_std = w.std()
    return _summarize(means, size, seed, scheme, note, pooled_std=last_std)


def excess_kurtosis(w):
    """Sample excess kurtosis; large values signal a heavy-tailed weight."""
    w = np.asarray(w, dtype=float)
    d = w - w.mean()
    m2 = np.mean(d * d)
    if m2 == 0.0:
        return 0.0
    return float(np.mean(d ** 4) / m2 ** 2 - 3.0)


# --- substitution ---------------------------------------------------------------

def _substitute(u, p, R):
    """Map uniform u in (0,1) to Delta in (-R, R) with density 1/(2 W |Delta|^p).

    This is the substitution w = sign(Delta) |Delta|^(1-p) / (1-p), with w
    uniform on (-W, W) and W = R^(1-p) / (1-p).
    """
    W = R ** (1.0 - p) / (1.0 - p)
    w = (2.0 * u - 1.0) * W
    return np.sign(w) * ((1.0 - p) * np.abs(w)) ** (1.0 / (1.0 - p)), W


def _subst_density(delta, p, R):
    W = R ** (1.0 - p) / (1.0 - p)
    with np.errstate(divide="ignore"):
        out = 1.0 / (2.0 * W * np.abs(delta) ** p)
    return np.where(np.abs(delta) < R, out, 0.0)


# --- generic integration --------------------------------------------------------

def _nquad(spec, budget, tol):
    d = spec.dimension
    by_index = {s.index: s for s in spec.singular}

    def func(*args):
        x = np.array(args[::-1], dtype=float)[None, :]
        return float(spec.integrand(x)[0])

    def make_opts(level):
        j = d - 1 - level  # nquad level 0 is the innermost coordinate

        def opts(*outer):
            pts = []
            s = by_index.get(j)
            if s is not None:
                # outer holds x_{j-1}, ..., x_0 from inner to outer level
                base = 0.0 if s.anchor is None else outer[j - 1 - s.anchor]
                pts = [base + o for o in s.offsets]
            lo, hi = spec.domain[j]
            pts = [q for q in pts if lo < q < hi]
            out = {"limit": max(50, int(budget)), "epsabs": 0.0, "epsrel": tol}
            if pts:
                out["points"] = pts
            return out
        return opts

    ranges = [spec.domain[d - 1 - lv] for lv in range(d)]
    opts = [make_opts(lv) for lv in range(d)]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        val, err = sint.nquad(func, ranges, opts=opts)
    flagged = any(issubclass(w.category, sint.IntegrationWarning) for w in caught)
    return Estimate(float(val), float(err), 0, None, "tensor_adaptive", (val - err, val + err), flagged,
                    "budget exhausted before tolerance" if flagged else "")


def integrate(spec, budget=200, seed=0, batch_size=1 << 16, tol=1e-8):
    """Integrate ``spec.integrand`` over the box ``spec.domain``.

    Parameters
    ----------
    spec : IntegralSpec
    budget : int
        Subinterval limit per level for ``tensor_adaptive``; sample count
        for the Monte Carlo schemes.
    seed : int
        Stream key for the Monte Carlo schemes.
    tol : float
        Relative tolerance per level of the adaptive scheme.

    Notes
    -----
    ``tensor_adaptive`` nests adaptive Gauss-Kronrod quadrature and passes
    every singular location as a breakpoint; its error is the reported
    absolute error and a quadrature warning flags the result.  The level
    for coordinate j sees x_0..x_{j-1} as fixed, so anchors must precede
    the coordinate they anchor.  ``mc_substituted`` samples each listed
    coordinate from a mixture over the offsets of the density
    proportional to |x_index - x_anchor - offset|^(-exponent), which
    removes the singularity from the weight.
    """
    if spec.scheme == "tensor_adaptive":
        for s in spec.singular:
            if s.anchor is not None and s.anchor > s.index:
                raise ValueError("anchors must precede the coordinate for tensor quadrature")
        return _nquad(spec, budget, tol)
    lo = np.array([a for a, _ in spec.domain], dtype=float)
    hi = np.array([b for _, b in spec.domain], dtype=float)
    width = hi - lo
    subst = {s.index: s for s in spec.singular} if spec.scheme == "mc_substituted" else {}
    order = [j for j in range(spec.dimension) if j not in subst]
    pending = [subst[j] for j in sorted(subst)]
    while pending:  # anchors first
        progressed = False
        for s in list(pending):
            if s.anchor is None or s.anchor in order:
                order.append(s.index)
                pending.remove(s)
                progressed = True
        if not progressed:
            raise ValueError("cyclic anchors among singular manifolds")

    def sampler(rng, n):
        x = np.empty((n, spec.dimension))
        logq = np.zeros(n)
        u = rng.random((n, spec.dimension))
        comp = rng.random((n, spec.dimension))
        for j in order:
            s = subst.get(j)
            if s is None:
                x[:, j] = lo[j] + width[j] * u[:, j]
                logq -= math.log(width[j])
                continue
            base = 0.0 if s.anchor is None else x[:, s.anchor]
            offs = np.asarray(s.offsets, dtype=float)
            pick = np.minimum((comp[:, j] * len(offs)).astype(int), len(offs) - 1)
            delta, _ = _substitute(u[:, j], s.exponent, width[j])
            x[:, j] = base + offs[pick] + delta
            dens = np.zeros(n)
            for o in offs:
                dens += _subst_density(x[:, j] - base - o, s.exponent, width[j])
            with np.errstate(divide="ignore"):
                logq += np.log(dens / len(offs))
        inside = np.all((x >= lo) & (x <= hi), axis=1)
        w = np.zeros(n)
        if np.any(inside):
            w[inside] = spec.integrand(x[inside]) * np.exp(-logq[inside])
        return w

    return _run_batches(sampler, budget, seed, batch_size, spec.scheme)


# --- S-matrix norm estimate -----------------------------------------------------

def _cos_diff(t1, h1, t2, h2):
    """|2 cos dtau - 2 cos dtheta| in the product form 4 |sin(a/2) sin(b/2)|."""
    a = (t1 - t2) + (h1 - h2)
    b = (t1 - t2) - (h1 - h2)
    return 4.0 * np.abs(np.sin(0.5 * a) * np.sin(0.5 * b))


def smatrix_integrand(k, c, g, H=1.0):
    """Vectorized integrand on columns (tau_1, theta_1, ..., tau_k, theta_k, taut_1, thetat_1, ...)."""
    p = c.beta2 / (4.0 * np.pi)

    def f(X):
        t = X[:, 0:2 * k:2]
        h = X[:, 1:2 * k:2]
        tt = X[:, 2 * k::2]
        ht = X[:, 2 * k + 1::2]
        dens = np.ones(len(X))
        for i in range(k):
            dens *= np.abs(g(t[:, i], h[:, i])) / (H * H * np.sin(t[:, i]) ** 2)
            dens *= np.abs(g(tt[:, i], ht[:, i])) / (H * H * np.sin(tt[:, i]) ** 2)
        logd = np.zeros(len(X))
        with np.errstate(divide="ignore"):
            for i in range(k):
                for j in range(i + 1, k):
                    logd += np.log(_cos_diff(t[:, i], h[:, i], t[:, j], h[:, j]))
                    logd += np.log(_cos_diff(tt[:, i], ht[:, i], tt[:, j], ht[:, j]))
                for j in range(k):
                    logd -= np.log(_cos_diff(t[:, i], h[:, i], tt[:, j], ht[:, j]))
        out = np.zeros(len(X))
        m = dens > 0
        out[m] = dens[m] * np.exp(p * logd[m])
        return out
    return f


def _support_box(g):
    lo, hi = g.support
    return lo, hi


def _pair_sample(rng_u, rng_v, p):
    """Light-cone offsets (a, b) with density 1/((2W)^2 |a|^p |b|^p) on (-2 pi, 2 pi)^2."""
    a, _ = _substitute(rng_u, p, 2.0 * np.pi)
    b, _ = _substitute(rng_v, p, 2.0 * np.pi)
    return a, b


def _pair_density(t, h, tt, ht, p):
    """Density of xt given x under the pair proposal, in (tau, theta) measure."""
    dt = tt - t
    dh = np.mod(ht - h + np.pi, 2.0 * np.pi) - np.pi
    a = dt + dh
    b = dt - dh
    return 2.0 * _subst_density(a, p, 2.0 * np.pi) * _subst_density(b, p, 2.0 * np.pi)


def _tensor_k1(c, g, H):
    """k = 1 for theta-independent g by nested adaptive quadrature.

    The integrand depends on the angles only through dtheta, so
    I = 2 int_0^L K(d) J(d) dd, with K the overlap of the tau-densities at
    separation d and J(d) = 4 pi int_0^pi |2 cos d - 2 cos phi|^(-p) dphi.
    """
    p = c.beta2 / (4.0 * np.pi)
    lo, hi = g.support
    L = hi - lo
    breaks = g.tau_breaks()

    def w(t):
        return float(np.abs(g(np.array(t), np.array(0.0)))) / (H * H * math.sin(t) ** 2)

    def K(d):
        pts = np.unique(np.clip(np.concatenate([breaks, breaks - d]), lo, hi - d))
        s = 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            if b > a:
                s += sint.quad(lambda t: w(t) * w(t + d), a, b, epsabs=0, epsrel=1e-12, limit=200)[0]
        return s

    def J(d):
        def left(phi):  # on [0, d], singular at phi = d
            return (4.0 * abs(math.sin(0.5 * (phi + d))) * (
                abs(math.sin(0.5 * (d - phi))) / (d - phi) if phi < d else 0.5)) ** (-p)

        def right(phi):  # on [d, pi], singular at phi = d
            return (4.0 * abs(math.sin(0.5 * (phi + d))) * (
                abs(math.sin(0.5 * (phi - d))) / (phi - d) if phi > d else 0.5)) ** (-p)

        v1 = sint.quad(left, 0.0, d, weight="alg", wvar=(0.0, -p), epsabs=0, epsrel=1e-12, limit=200)[0]
        v2 = sint.quad(right, d, np.pi, weight="alg", wvar=(-p, 0.0), epsabs=0, epsrel=1e-12, limit=200)[0]
        return 4.0 * np.pi * (v1 + v2)

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        val, err = sint.quad(lambda d: K(d) * J(d), 0.0, L, epsabs=0, epsrel=1e-9, limit=400)
    flagged = any(issubclass(x.category, sint.IntegrationWarning) for x in caught)
    return Estimate(2.0 * val, 2.0 * err, 0, None, "tensor_adaptive",
                    (2.0 * (val - err), 2.0 * (val + err)), flagged)


def smatrix_norm2_estimate(k, c, g, st=None, budget=1_000_000, seed=0, scheme=None, H=1.0,
                           batch_size=1 << 16, kurtosis_limit=1e3):
    """Estimate the 4k-dimensional majorant of the squared S-matrix term.

    Parameters
    ----------
    k : 1 or 2
    c : Coupling
    g : TestFunction
        Adiabatic cutoff.
    st : StateAlpha, optional
        Accepted for completeness; the integrand is the alpha-independent
        majorant, so the state does not enter.
    scheme : str, optional
        ``mc_substituted`` by default.  ``mc_plain`` is only honoured for
        beta^2 < 2 pi and when a pilot batch shows moderate kurtosis;
        otherwise the substituted scheme is used and noted.
        ``tensor_adaptive`` is available for k = 1 and theta-independent g.

    Returns
    -------
    Estimate
        Compare its 99% upper limit with (k!)^(1 + beta^2/(4 pi)) C(g)^(2k).
    """
    if k not in (1, 2):
        raise ValueError("only k = 1 and k = 2 are supported")
    if not isinstance(c, Coupling):
        c = Coupling(float(c))
    scheme = scheme or "mc_substituted"
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if g.is_zero:
        return Estimate(0.0, 0.0, 0, seed, scheme, (0.0, 0.0))
    p = c.beta2 / (4.0 * np.pi)
    if scheme == "tensor_adaptive":
        if k != 1 or not g.theta_independent:
            raise ValueError("tensor_adaptive needs k = 1 and a theta-independent g")
        return _tensor_k1(c, g, H)
    lo, hi = _support_box(g)
    vol = (hi - lo) * 2.0 * np.pi
    f = smatrix_integrand(k, c, g, H)
    note = ""

    def plain(rng, n):
        X = np.empty((n, 4 * k))
        X[:, 0::2] = rng.uniform(lo, hi, size=(n, 2 * k))
        X[:, 1::2] = rng.uniform(0.0, 2.0 * np.pi, size=(n, 2 * k))
        return f(X) * vol ** (2 * k)

    if scheme == "mc_plain":
        if c.beta2 >= 2.0 * np.pi:
            scheme, note = "mc_substituted", "mc_plain has infinite variance for beta^2 >= 2 pi"
        else:
            kurt = excess_kurtosis(plain(_rng(seed, 1 << 30), min(int(budget), batch_size)))
            if kurt > kurtosis_limit:
                scheme, note = "mc_substituted", f"pilot kurtosis {kurt:.3g} above limit"
    if scheme == "mc_plain":
        return _run_batches(plain, budget, seed, batch_size, scheme, note)

    perms = [(0,)] if k == 1 else [(0, 1), (1, 0)]

    def substituted(rng, n):
        t = rng.uniform(lo, hi, size=(n, k))
        h = rng.uniform(0.0, 2.0 * np.pi, size=(n, k))
        comp = rng.integers(len(perms), size=n)
        ua = rng.random((n, k))
        ub = rng.random((n, k))
        tt = np.empty((n, k))
        ht = np.empty((n, k))
        valid = np.ones(n, dtype=bool)
        for i in range(k):
            a, b = _pair_sample(ua[:, i], ub[:, i], p)
            dt, dh = 0.5 * (a + b), 0.5 * (a - b)
            valid &= np.abs(dh) < np.pi
            for ci, perm in enumerate(perms):
                m = comp == ci
                tt[m, perm[i]] = t[m, i] + dt[m]
                ht[m, perm[i]] = np.mod(h[m, i] + dh[m], 2.0 * np.pi)
        valid &= np.all((tt > lo) & (tt < hi), axis=1)
        q = np.zeros(n)
        for perm in perms:
            prod = np.ones(n)
            for i in range(k):
                prod *= _pair_density(t[:, i], h[:, i], tt[:, perm[i]], ht[:, perm[i]], p)
            q += prod / len(perms)
        w = np.zeros(n)
        if np.any(valid):
            X = np.empty((int(valid.sum()), 4 * k))
            X[:, 0:2 * k:2] = t[valid]
            X[:, 1:2 * k:2] = h[valid]
            X[:, 2 * k::2] = tt[valid]
            X[:, 2 * k + 1::2] = ht[valid]
            w[valid] = f(X) * vol ** k / q[valid]
        return w

    return _run_batches(substituted, budget, seed, batch_size, "mc_substituted", note)
