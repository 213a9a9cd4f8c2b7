import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diffrep import transforms as tr
from diffrep.errors import DomainError, OrderOutOfRange
from diffrep.transforms import (
    NEG_INF,
    POS_INF,
    Endpoint,
    Variant,
    check_admissible,
    graded_probes,
    log_psi,
    log_psi_prime,
    psi,
    psi_prime,
    weight_profile,
)

BUILTINS = {
    "exp": tr.exp(),
    "square": tr.square(),
    "power(0.3)": tr.power(0.3),
    "power(0.5)": tr.power(0.5),
    "tan": tr.tan(),
    "rational(1,1)": tr.rational(1.0, 1.0),
    "rational(2,3)": tr.rational(2.0, 3.0),
    "rational(0.5,2)": tr.rational(0.5, 2.0),
}


def central_difference(spec, omega, h):
    return (psi(spec, omega + h) - psi(spec, omega - h)) / (2 * h)


# {{{ closed forms


def test_psi_examples():
    assert psi(tr.exp(), 0.0) == 1.0
    assert psi(tr.square(), 2.0) == 4.0
    assert psi(tr.tan(), 0.5) == pytest.approx(1.0, rel=1e-15)
    assert psi(tr.rational(1, 1), 0.5) == 1.0


def test_psi_prime_examples():
    assert psi_prime(tr.exp(), 0.0) == 1.0
    assert psi_prime(tr.square(), 2.0) == 4.0
    rat = tr.rational(1, 1)
    assert psi_prime(rat, 0.5) == pytest.approx(4.0, rel=1e-15)
    assert central_difference(rat, 0.5, 1e-6) == pytest.approx(4.0, rel=1e-8)


def test_power_and_tan_closed_forms():
    spec = tr.power(0.25)
    assert psi(spec, 16.0) == pytest.approx(16.0**0.75)
    assert psi_prime(spec, 16.0) == pytest.approx(0.75 * 16.0**-0.25)
    assert psi_prime(tr.tan(), 0.5) == pytest.approx(math.pi, rel=1e-14)


def test_array_evaluation_returns_arrays():
    w = np.array([-1.0, 0.0, 2.0])
    assert np.allclose(psi(tr.exp(), w), np.exp(w))
    assert isinstance(psi(tr.exp(), 0.5), float)


@pytest.mark.parametrize(
    "spec, omega",
    [
        (tr.square(), 0.0),
        (tr.square(), -1.0),
        (tr.tan(), 1.0),
        (tr.tan(), 0.0),
        (tr.rational(2, 3), 1.5),
        (tr.exp(), math.inf),
        (tr.exp(), math.nan),
    ],
)
def test_domain_errors(spec, omega):
    with pytest.raises(DomainError):
        psi(spec, omega)
    with pytest.raises(DomainError):
        psi_prime(spec, omega)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5, -0.2])
def test_power_requires_fractional_alpha(alpha):
    with pytest.raises(OrderOutOfRange):
        tr.power(alpha)


def test_rational_parameters_positive():
    with pytest.raises(ValueError):
        tr.rational(0.0, 1.0)
    with pytest.raises(ValueError):
        tr.rational(1.0, -1.0)


def test_from_name():
    assert tr.from_name("exp").variant is Variant.EXP
    assert tr.from_name("rational", sigma=2, rho=3).rho == 3.0
    assert tr.from_name("power", alpha=0.4).alpha_link == 0.4
    with pytest.raises(ValueError):
        tr.from_name("power")
    with pytest.raises(ValueError):
        tr.from_name("cosh")


@pytest.mark.parametrize("name", list(BUILTINS))
def test_logs_match_direct_evaluation(name):
    spec = BUILTINS[name]
    omega = graded_probes(spec, 200)
    omega = omega[spec.contains(omega)]
    p, dp = psi(spec, omega), psi_prime(spec, omega)
    ok = (p > 1e-300) & (p < 1e300) & (dp > 1e-300) & (dp < 1e300)
    assert np.allclose(log_psi(spec, omega)[ok], np.log(p[ok]), rtol=0, atol=1e-12 * 700)
    assert np.allclose(log_psi_prime(spec, omega)[ok], np.log(dp[ok]), rtol=0, atol=1e-12 * 700)


def test_weight_profile_exp():
    omega = np.array([-30.0, 0.0, 30.0])
    assert np.allclose(weight_profile(tr.exp(), omega, -1.5), np.exp(-0.5 * omega))


def test_log_psi_survives_overflow():
    # psi overflows, its logarithm does not
    assert log_psi(tr.exp(), 800.0) == 800.0
    w = 1 - 1e-6
    assert log_psi(tr.rational(1, 300), w) == pytest.approx(
        math.log(w) - 300 * math.log(1 - w), rel=1e-12
    )


# }}}


# {{{ admissibility


@pytest.mark.parametrize("name", list(BUILTINS))
def test_builtins_admissible(name):
    report = check_admissible(BUILTINS[name], 1000)
    assert report.probe_count == 1000
    assert report.invalid_values == 0
    assert report.monotonicity_violations == 0
    assert report.min_psi_prime > 0
    assert report.max_derivative_deviation < 1e-6
    assert report.lower_limit_ok and report.upper_limit_ok
    assert report.ok


def test_three_probes():
    report = check_admissible(tr.tan(), 3)
    assert report.probe_count == 3
    assert report.monotonicity_violations == 0


def test_probe_count_validated():
    with pytest.raises(ValueError):
        check_admissible(tr.exp(), 2)


def test_endpoint_limits_unreachable_in_double_precision():
    # with small exponents psi approaches its limits too slowly for the
    # graded probes to certify them; the report says so instead of raising
    report = check_admissible(tr.rational(0.3, 0.2), 1000)
    assert report.monotonicity_violations == 0
    assert not report.ok


def test_non_monotone_custom_detected():
    spec = tr.custom(
        lambda w: np.exp(w) * (1.2 + np.sin(w)),
        lambda w: np.exp(w) * (1.2 + np.sin(w) + np.cos(w)),
        NEG_INF,
        POS_INF,
    )
    report = check_admissible(spec, 1000)
    assert report.monotonicity_violations > 0
    assert not report.ok


def test_wrong_derivative_detected():
    spec = tr.custom(lambda w: w**3, lambda w: 2.0 * w**2, Endpoint.finite(0.0), POS_INF)
    report = check_admissible(spec, 500)
    assert report.max_derivative_deviation > 0.1
    assert not report.ok


def test_custom_matches_builtin():
    spec = tr.custom(
        lambda w: w / (1.0 - w),
        lambda w: 1.0 / (1.0 - w) ** 2,
        Endpoint.finite(0.0),
        Endpoint.finite(1.0),
    )
    omega = np.linspace(0.01, 0.99, 50)
    builtin = tr.rational(1.0, 1.0)
    assert np.allclose(psi(spec, omega), psi(builtin, omega), rtol=1e-14)
    assert np.allclose(psi_prime(spec, omega), psi_prime(builtin, omega), rtol=1e-14)
    assert check_admissible(spec).ok


@pytest.mark.parametrize("name", ["exp", "square", "power(0.5)"])
def test_probes_reach_far(name):
    spec = BUILTINS[name]
    probes = graded_probes(spec, 1000)
    p = np.exp(log_psi(spec, probes[[0, -1]]))
    assert p[0] < 1e-6 and p[1] > 1e6


@settings(max_examples=300)
@given(
    st.sampled_from(list(BUILTINS)),
    st.floats(min_value=1e-6, max_value=1 - 1e-6),
    st.floats(min_value=1e-6, max_value=1 - 1e-6),
)
def test_strictly_increasing(name, s1, s2):
    spec = BUILTINS[name]
    lo, hi = sorted((s1, s2))
    if lo == hi:
        return
    # map [0, 1] onto the domain through the graded probe spread
    w1, w2 = tr._probe_spread(spec, np.array([2 * lo - 1, 2 * hi - 1]), 10.0)
    if w1 == w2:
        return
    assert psi(spec, w2) > psi(spec, w1)
    assert psi_prime(spec, w1) > 0


@settings(max_examples=200)
@given(
    st.sampled_from(["exp", "square", "tan", "rational(2,3)", "power(0.3)"]),
    st.floats(min_value=0.05, max_value=0.95),
)
def test_derivative_matches_difference_quotient(name, s):
    spec = BUILTINS[name]
    (w,) = tr._probe_spread(spec, np.array([2 * s - 1]), 3.0)
    h = 1e-5 * max(abs(w), 1.0)
    if spec.domain_lo.is_finite:
        h = min(h, 1e-5 * (w - spec.domain_lo.value))
    if spec.domain_hi.is_finite:
        h = min(h, 1e-5 * (spec.domain_hi.value - w))
    fd = central_difference(spec, w, h)
    assert fd == pytest.approx(psi_prime(spec, w), rel=1e-6)


# }}}
