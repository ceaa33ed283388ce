import math

import numpy as np
import pytest

from sgdesitter import bounds
from sgdesitter import estimator as E
from sgdesitter.bounds import Coupling
from sgdesitter.estimator import IntegralSpec, SingularManifold
from sgdesitter.testfunctions import TestFunction

IND = TestFunction.tau_indicator(np.pi / 4, 3 * np.pi / 4)


def _inv_sqrt_spec(scheme):
    return IntegralSpec(1, lambda X: X[:, 0] ** -0.5, [(0.0, 1.0)], [SingularManifold(0, None, 0.5)], scheme)


def _u_spec(scheme):
    f = lambda X: np.abs(np.exp(1j * X[:, 0]) - np.exp(1j * X[:, 1])) ** -0.5  # noqa: E731
    sing = [SingularManifold(1, 0, 0.5, (-2 * np.pi, 0.0, 2 * np.pi))]
    return IntegralSpec(2, f, [(-2 * np.pi, np.pi)] * 2, sing, scheme)


def test_spec_validation():
    with pytest.raises(ValueError):
        IntegralSpec(1, None, [(0, 1)], scheme="simpson")
    with pytest.raises(ValueError):
        IntegralSpec(2, None, [(0, 1)])
    with pytest.raises(ValueError):
        IntegralSpec(1, None, [(0, 1)], [SingularManifold(0, None, 1.0)])


def test_constant():
    r = E.integrate(IntegralSpec(2, lambda X: np.ones(len(X)), [(0, 1), (0, 1)]))
    assert r.value == pytest.approx(1.0, abs=1e-12)
    assert r.std_error < 1e-10


@pytest.mark.parametrize("scheme", ["tensor_adaptive", "mc_substituted"])
def test_inverse_sqrt(scheme):
    r = E.integrate(_inv_sqrt_spec(scheme), budget=200 if scheme == "tensor_adaptive" else 200_000, seed=5)
    assert abs(r.value - 2.0) <= max(4 * r.std_error, 1e-10)
    assert r.ci99[0] <= 2.0 <= r.ci99[1] or r.std_error < 1e-10


def test_light_cone_integral_below_majorant():
    # exponent 1/2 corresponds to 2 beta^2 / (4 pi + beta^2) = 1/2, beta^2 = 4 pi / 3
    c = Coupling(4 * np.pi / 3)
    assert c.p_pair == pytest.approx(0.5, abs=1e-15)
    mc = E.integrate(_u_spec("mc_substituted"), budget=200_000, seed=2)
    ref, _ = bounds.u_integral_quadrature(p=0.5)
    assert abs(mc.value - ref) < 4 * mc.std_error
    assert mc.upper99 <= bounds.u_integral_bound(c)
    assert bounds.u_integral_bound(c) == pytest.approx(27 * np.pi ** 2, rel=1e-14)


def test_budget_respected_and_equal_batches():
    r = E.integrate(_inv_sqrt_spec("mc_plain"), budget=1_000_003, seed=0)
    assert r.n_samples <= 1_000_003
    nb, size = E._batches(1_000_003, 1 << 16)
    assert nb * size == r.n_samples and nb >= 16


def test_zero_cutoff():
    r = E.smatrix_norm2_estimate(1, Coupling(2 * np.pi), TestFunction.zero())
    assert r.value == 0.0 and r.upper99 == 0.0


def test_order_restricted():
    with pytest.raises(ValueError):
        E.smatrix_norm2_estimate(3, Coupling(np.pi), IND)


def test_k1_below_bound():
    c = Coupling(2 * np.pi)
    r = E.smatrix_norm2_estimate(1, c, IND, budget=1_000_000, seed=1)
    assert r.upper99 <= bounds.smatrix_constant_C(IND, c) ** 2


@pytest.mark.parametrize("k", [1, 2])
def test_amplitude_exponent(k):
    # g enters the integrand once per insertion on each side: amplitude^(2k)
    c = Coupling(np.pi)
    amps = np.array([0.5, 1.0, 2.0, 4.0])
    if k == 1:
        vals = [E.smatrix_norm2_estimate(1, c, IND.scaled(a), scheme="tensor_adaptive").value for a in amps]
    else:
        vals = [E.smatrix_norm2_estimate(2, c, IND.scaled(a), budget=100_000, seed=9).value for a in amps]
    slope = np.polyfit(np.log(amps), np.log(vals), 1)[0]
    assert abs(slope - 2 * k) < 0.05


def test_determinism():
    c = Coupling(2 * np.pi)
    a = E.smatrix_norm2_estimate(2, c, IND, budget=200_000, seed=7)
    b = E.smatrix_norm2_estimate(2, c, IND, budget=200_000, seed=7)
    assert a == b
    assert E.smatrix_norm2_estimate(2, c, IND, budget=200_000, seed=8).value != a.value


def test_plain_scheme_rerun_identical():
    spec = _inv_sqrt_spec("mc_plain")
    a = E.integrate(spec, budget=300_000, seed=3)
    b = E.integrate(spec, budget=300_000, seed=3)
    assert a.value == b.value and a.ci99 == b.ci99


@pytest.mark.parametrize("b2", [np.pi, 2 * np.pi])
def test_schemes_agree(b2):
    c = Coupling(b2)
    t = E.smatrix_norm2_estimate(1, c, IND, scheme="tensor_adaptive")
    m = E.smatrix_norm2_estimate(1, c, IND, budget=2_000_000, seed=3)
    assert abs(t.value - m.value) <= 3 * math.hypot(t.std_error, m.std_error)


def test_plain_scheme_forced_to_substituted():
    r = E.smatrix_norm2_estimate(1, Coupling(2.5 * np.pi), IND, budget=100_000, seed=0, scheme="mc_plain")
    assert r.scheme == "mc_substituted" and "infinite variance" in r.note
    r = E.smatrix_norm2_estimate(1, Coupling(0.5 * np.pi), IND, budget=100_000, seed=0, scheme="mc_plain")
    assert r.scheme == "mc_plain"


def test_monotone_in_amplitude():
    c = Coupling(np.pi)
    vals = [E.smatrix_norm2_estimate(1, c, IND.scaled(a), budget=200_000, seed=4).value for a in (0.5, 1.0, 1.5, 2.0)]
    assert all(b >= a for a, b in zip(vals[:-1], vals[1:]))


def test_estimate_record_schema():
    rec = E.smatrix_norm2_estimate(1, Coupling(np.pi), IND, budget=100_000, seed=4).as_record("norm2", {"k": 1})
    assert set(rec) == {"quantity", "params", "value_re", "value_im", "error_est", "pass", "paper_ref"}
    assert rec["params"]["seed"] == 4 and rec["params"]["k"] == 1
