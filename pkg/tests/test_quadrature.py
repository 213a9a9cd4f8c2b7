import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import roots_jacobi, roots_laguerre, roots_legendre

from diffrep import transforms as tr
from diffrep.errors import RangeError, UnsupportedTransform
from diffrep.fractional import make_order, rl_power_closed_form
from diffrep.oracle import builtin_source, phi_direct, rl_direct
from diffrep.quadrature import (
    QuadratureRule,
    build_diffusive_rule,
    gauss_jacobi01,
    gauss_laguerre,
    gauss_legendre,
    kernel_envelope,
)


def phi_const(order, spec, omega, t=1.0):
    """Kernel for f = 1 in closed form: the inner integral is elementary."""
    lam = tr.psi(spec, omega)
    return (
        order.c_alpha
        * tr.weight_profile(spec, omega, -order.alpha - 1.0)
        * -np.expm1(-t * lam)
    )


# {{{ Gauss-Laguerre


def test_laguerre_one_node():
    x, w = gauss_laguerre(1)
    assert x.tolist() == [1.0]
    assert w.tolist() == [1.0]


def test_laguerre_two_nodes():
    x, w = gauss_laguerre(2)
    r2 = math.sqrt(2.0)
    assert x == pytest.approx([2 - r2, 2 + r2], rel=1e-15)
    assert w == pytest.approx([(2 + r2) / 4, (2 - r2) / 4], rel=1e-14)
    assert x == pytest.approx([0.5857864, 3.4142136], abs=1e-7)
    # exact on x^2 and x^3
    assert np.dot(w, x**2) == pytest.approx(2.0, rel=1e-15)
    assert np.dot(w, x**3) == pytest.approx(6.0, rel=1e-15)


@pytest.mark.parametrize("m", [1, 2, 3, 7, 20, 40, 64, 100, 128])
def test_laguerre_weights_sum_to_one(m):
    x, w = gauss_laguerre(m)
    assert np.all(w > 0)
    assert np.all(np.diff(x) > 0)
    assert abs(math.fsum(w) - 1.0) < 1e-13


@pytest.mark.parametrize("m", range(1, 21))
def test_laguerre_exactness(m):
    x, w = gauss_laguerre(m)
    for k in range(2 * m):
        assert math.fsum(w * x**k) == pytest.approx(math.factorial(k), rel=1e-10)


@pytest.mark.parametrize("m", [5, 30, 64, 128])
def test_laguerre_against_scipy(m):
    x, w = gauss_laguerre(m)
    xs, ws = roots_laguerre(m)
    assert np.allclose(x, xs, rtol=1e-12, atol=0)
    big = ws > 1e-250
    assert np.allclose(w[big], ws[big], rtol=1e-9, atol=0)


@pytest.mark.parametrize("m", [0, -1, 129])
def test_laguerre_range(m):
    with pytest.raises(RangeError):
        gauss_laguerre(m)


# }}}


# {{{ Gauss-Legendre and Gauss-Jacobi


def test_legendre_small():
    x, w = gauss_legendre(1)
    assert x.tolist() == [0.0] and w.tolist() == [2.0]
    x, w = gauss_legendre(2)
    assert x == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)], rel=1e-15)
    assert w == pytest.approx([1.0, 1.0], rel=1e-15)
    assert np.dot(w, x**2) == pytest.approx(2 / 3, rel=1e-15)


@pytest.mark.parametrize("m", [1, 2, 5, 16, 33, 64])
def test_legendre_sum_and_scipy(m):
    x, w = gauss_legendre(m)
    assert abs(math.fsum(w) - 2.0) < 1e-13
    xs, ws = roots_legendre(m)
    assert np.allclose(x, xs, rtol=0, atol=1e-15)
    assert np.allclose(w, ws, rtol=1e-11, atol=0)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=1, max_value=40), st.data())
def test_legendre_exactness(m, data):
    k = data.draw(st.integers(min_value=0, max_value=2 * m - 1))
    x, w = gauss_legendre(m)
    exact = 0.0 if k % 2 else 2.0 / (k + 1)
    assert math.fsum(w * x**k) == pytest.approx(exact, abs=1e-13)


@pytest.mark.parametrize("m", [0, 65])
def test_legendre_range(m):
    with pytest.raises(RangeError):
        gauss_legendre(m)


@pytest.mark.parametrize("p", [-0.75, -0.5, -0.25, 0.5])
@pytest.mark.parametrize("m", [1, 3, 40, 128])
def test_jacobi_against_scipy(p, m):
    u, w = gauss_jacobi01(m, p)
    xs, ws = roots_jacobi(m, 0.0, p)
    assert np.allclose(u, 0.5 * (1 + xs), rtol=0, atol=1e-15)
    assert np.allclose(w, ws / 2 ** (p + 1), rtol=1e-9, atol=0)
    assert math.fsum(w) == pytest.approx(1 / (p + 1), rel=1e-14)


def test_jacobi_validates():
    with pytest.raises(RangeError):
        gauss_jacobi01(3, -1.0)
    with pytest.raises(RangeError):
        gauss_jacobi01(0, 0.5)


# }}}


# {{{ QuadratureRule


def test_rule_is_read_only():
    rule = QuadratureRule([0.0, 1.0], [0.5, 0.5])
    with pytest.raises(ValueError):
        rule.nodes[0] = 3.0
    with pytest.raises(AttributeError):
        rule.nodes = np.zeros(2)


@pytest.mark.parametrize(
    "nodes, weights", [([1.0, 0.0], [1.0, 1.0]), ([0.0, 0.0], [1.0, 1.0]), ([0.0], [1.0, 2.0])]
)
def test_rule_validation(nodes, weights):
    with pytest.raises(ValueError):
        QuadratureRule(nodes, weights)


def test_rule_apply():
    rule = QuadratureRule([3.0], [2.0])
    assert rule.apply([0.25]) == 0.5


# }}}


# {{{ diffusive rules

ALL_SPECS = {
    "exp": lambda a: tr.exp(),
    "square": lambda a: tr.square(),
    "power": lambda a: tr.power(a),
    "tan": lambda a: tr.tan(),
    "rational": lambda a: tr.rational(2.0, 3.0),
}


@pytest.mark.parametrize("name", list(ALL_SPECS))
@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("m_half", [1, 5, 40])
def test_rule_invariants(name, alpha, m_half):
    order = make_order(alpha)
    spec = ALL_SPECS[name](alpha)
    rule = build_diffusive_rule(order, spec, m_half)
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.all(rule.weights > 0)
    assert np.all(spec.contains(rule.nodes))
    expected = 2 * m_half if name == "exp" else 8 * m_half
    assert rule.size == expected - rule.meta.get("dropped_nodes", 0)
    assert rule.apply(np.zeros(rule.size)) == 0.0


def test_exp_rule_general_order():
    rule = build_diffusive_rule(make_order(1.5), tr.exp(), 10)
    assert rule.size == 20 and np.all(rule.weights > 0)


def test_exp_rule_forty_nodes_per_side():
    order = make_order(0.5)
    rule = build_diffusive_rule(order, tr.exp(), 40, 1.0)
    exact = rl_direct(order, builtin_source("const"), 0.0, 1.0)
    approx = rule.apply(phi_const(order, tr.exp(), rule.nodes))
    assert abs(approx / exact - 1) < 1e-8


def test_exp_rule_five_nodes_per_side():
    order = make_order(0.5)
    exact = 2 / math.sqrt(math.pi)
    err = {}
    for m in (5, 40):
        rule = build_diffusive_rule(order, tr.exp(), m, 1.0)
        err[m] = abs(rule.apply(phi_const(order, tr.exp(), rule.nodes)) / exact - 1)
    assert err[5] > err[40]
    assert err[5] < 1e-2


def test_rule_against_phi_direct():
    # dual route: the rule applied to kernel values from the adaptive oracle
    order = make_order(0.5)
    spec = tr.exp()
    f = builtin_source("sin")
    rule = build_diffusive_rule(order, spec, 30, 1.0)
    phi = [phi_direct(order, spec, f, 0.0, 1.0, w, 1e-12) for w in rule.nodes]
    assert rule.apply(phi) == pytest.approx(rl_direct(order, f, 0.0, 1.0), rel=1e-8)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_exp_rule_convergence_in_m(alpha):
    order = make_order(alpha)
    exact = rl_power_closed_form(order, 0.0, 0.0, 1.0)
    errs = []
    for m in (5, 10, 20, 40):
        rule = build_diffusive_rule(order, tr.exp(), m)
        errs.append(abs(rule.apply(phi_const(order, tr.exp(), rule.nodes)) / exact - 1))
    for coarse, fine in zip(errs, errs[1:]):
        assert fine < coarse / 10


@pytest.mark.parametrize("horizon", [0.01, 1.0, 50.0])
def test_exp_rule_follows_horizon(horizon):
    order = make_order(0.5)
    rule = build_diffusive_rule(order, tr.exp(), 40, horizon)
    exact = rl_power_closed_form(order, 0.0, 0.0, horizon)
    approx = rule.apply(phi_const(order, tr.exp(), rule.nodes, horizon))
    assert abs(approx / exact - 1) < 1e-10


def test_laguerre_variant_converges():
    order = make_order(0.5)
    exact = 2 / math.sqrt(math.pi)
    errs = []
    for m in (5, 40):
        rule = build_diffusive_rule(order, tr.exp(), m, method="laguerre")
        assert rule.meta["method"] == "laguerre"
        errs.append(abs(rule.apply(phi_const(order, tr.exp(), rule.nodes)) / exact - 1))
    assert errs[1] < errs[0] and errs[1] < 1e-4


@pytest.mark.parametrize("name", ["square", "power", "rational", "tan"])
def test_other_rules_converge(name):
    order = make_order(0.5)
    spec = ALL_SPECS[name](0.5)
    exact = 2 / math.sqrt(math.pi)
    rule = build_diffusive_rule(order, spec, 40)
    approx = rule.apply(phi_const(order, spec, rule.nodes))
    tolerance = 1e-3 if name == "tan" else 1e-8
    assert abs(approx / exact - 1) < tolerance


@pytest.mark.parametrize("name", ["square", "power"])
def test_truncation_bound_recorded(name):
    rule = build_diffusive_rule(make_order(0.5), ALL_SPECS[name](0.5), 20)
    assert 0 < rule.meta["relative_tail_bound"] < 1e-15
    assert rule.meta["omega_max"] > rule.meta["omega_min"] > 0


def test_unsupported_domain():
    spec = tr.custom(np.exp, np.exp, tr.NEG_INF, tr.POS_INF)
    with pytest.raises(UnsupportedTransform):
        build_diffusive_rule(make_order(0.5), spec, 10)


def test_bad_arguments():
    order = make_order(0.5)
    with pytest.raises(RangeError):
        build_diffusive_rule(order, tr.exp(), 0)
    with pytest.raises(ValueError):
        build_diffusive_rule(order, tr.exp(), 4, horizon=0.0)
    with pytest.raises(ValueError):
        build_diffusive_rule(order, tr.exp(), 4, method="simpson")
    with pytest.raises(ValueError):
        build_diffusive_rule(order, tr.tan(), 4, method="jacobi")


@pytest.mark.parametrize("name", list(ALL_SPECS))
@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("m_half", [5, 10, 20, 40])
def test_gap_placement(name, alpha, m_half):
    """Relative psi gaps are smaller where the kernel carries mass."""
    order = make_order(alpha)
    spec = ALL_SPECS[name](alpha)
    rule = build_diffusive_rule(order, spec, m_half)
    lp = tr.log_psi(spec, rule.nodes)
    gaps = np.diff(lp)
    # envelope mass per unit log(psi), the scale on which gaps are measured
    dens = kernel_envelope(order, spec, rule.nodes, 1.0) + lp - tr.log_psi_prime(spec, rule.nodes)
    dens = np.maximum(dens[1:], dens[:-1])
    top = dens.max()
    large = gaps[dens >= top + math.log(1e-2)]
    negligible = gaps[dens < top + math.log(1e-12)]
    assert large.size > 0
    if negligible.size:
        assert np.median(large) < np.median(negligible)


# }}}
