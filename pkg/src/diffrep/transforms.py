r"""Admissible transformations :math:`\psi: \Omega \to (0, \infty)`.

A transformation is admissible if :math:`\Omega` is an open interval,
:math:`\psi \in C^1(\Omega)` is strictly increasing, and :math:`\psi` tends to
:math:`0` at the lower end of :math:`\Omega` and to :math:`+\infty` at the upper
end. The built-in variants are

===================== ================= ===========================================
variant               :math:`\Omega`    :math:`\psi(\omega)`
===================== ================= ===========================================
``EXP``               :math:`\mathbb R` :math:`e^\omega`
``SQUARE``            :math:`(0,\infty)` :math:`\omega^2`
``POWER``             :math:`(0,\infty)` :math:`\omega^{1-\alpha}`, :math:`0<\alpha<1`
``TAN``               :math:`(0,1)`     :math:`\tan(\omega\pi/2)`
``RATIONAL``          :math:`(0,1)`     :math:`\omega^\sigma / (1-\omega)^\rho`
===================== ================= ===========================================

User-defined transformations go through :func:`custom`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from diffrep.errors import DomainError, OrderOutOfRange


class Variant(enum.Enum):
    EXP = "exp"
    SQUARE = "square"
    POWER = "power"
    TAN = "tan"
    RATIONAL = "rational"
    CUSTOM = "custom"


class EndpointKind(enum.Enum):
    FINITE = enum.auto()
    NEG_INF = enum.auto()
    POS_INF = enum.auto()


@dataclass(frozen=True)
class Endpoint:
    """An extended-real interval endpoint.

    Infinite endpoints carry no value, so they never enter arithmetic.
    """

    kind: EndpointKind
    value: float = 0.0

    @classmethod
    def finite(cls, x: float) -> Endpoint:
        return cls(EndpointKind.FINITE, float(x))

    @property
    def is_finite(self) -> bool:
        return self.kind is EndpointKind.FINITE

    def __str__(self) -> str:
        if self.kind is EndpointKind.NEG_INF:
            return "-inf"
        if self.kind is EndpointKind.POS_INF:
            return "+inf"
        return repr(self.value)


NEG_INF = Endpoint(EndpointKind.NEG_INF)
POS_INF = Endpoint(EndpointKind.POS_INF)


@dataclass(frozen=True)
class TransformSpec:
    """An admissible transformation together with its domain.

    Construct instances through :func:`exp`, :func:`square`, :func:`power`,
    :func:`tan`, :func:`rational` or :func:`custom`.
    """

    variant: Variant
    domain_lo: Endpoint
    domain_hi: Endpoint
    sigma: float | None = None
    rho: float | None = None
    alpha_link: float | None = None
    psi_fn: Callable | None = field(default=None, compare=False, repr=False)
    psi_prime_fn: Callable | None = field(default=None, compare=False, repr=False)

    @property
    def name(self) -> str:
        return self.variant.value

    def contains(self, omega) -> np.ndarray:
        """Elementwise test for membership in the open domain."""
        omega = np.asarray(omega, dtype=float)
        inside = np.isfinite(omega)
        if self.domain_lo.is_finite:
            inside &= omega > self.domain_lo.value
        if self.domain_hi.is_finite:
            inside &= omega < self.domain_hi.value
        return inside


def exp() -> TransformSpec:
    return TransformSpec(Variant.EXP, NEG_INF, POS_INF)


def square() -> TransformSpec:
    return TransformSpec(Variant.SQUARE, Endpoint.finite(0.0), POS_INF)


def power(alpha: float) -> TransformSpec:
    """:math:`\\psi(\\omega) = \\omega^{1-\\alpha}`; only defined for ``0 < alpha < 1``."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise OrderOutOfRange(f"power transform requires 0 < alpha < 1, got {alpha!r}")
    return TransformSpec(
        Variant.POWER, Endpoint.finite(0.0), POS_INF, alpha_link=alpha
    )


def tan() -> TransformSpec:
    return TransformSpec(Variant.TAN, Endpoint.finite(0.0), Endpoint.finite(1.0))


def rational(sigma: float = 1.0, rho: float = 1.0) -> TransformSpec:
    if not (sigma > 0 and rho > 0):
        raise ValueError(f"sigma and rho must be positive: {sigma!r}, {rho!r}")
    return TransformSpec(
        Variant.RATIONAL,
        Endpoint.finite(0.0),
        Endpoint.finite(1.0),
        sigma=float(sigma),
        rho=float(rho),
    )


def custom(
    psi_fn: Callable,
    psi_prime_fn: Callable,
    domain_lo: Endpoint,
    domain_hi: Endpoint,
) -> TransformSpec:
    """Wrap a user-supplied transformation.

    Both callables must accept and return numpy arrays. Admissibility is
    not verified here; use :func:`check_admissible`.
    """
    return TransformSpec(
        Variant.CUSTOM,
        domain_lo,
        domain_hi,
        psi_fn=psi_fn,
        psi_prime_fn=psi_prime_fn,
    )


def from_name(
    name: str, *, sigma: float = 1.0, rho: float = 1.0, alpha: float | None = None
) -> TransformSpec:
    """Look up a built-in transformation by its command-line name."""
    name = name.lower()
    if name == "exp":
        return exp()
    if name == "square":
        return square()
    if name == "power":
        if alpha is None:
            raise ValueError("the power transform needs the order alpha")
        return power(alpha)
    if name == "tan":
        return tan()
    if name == "rational":
        return rational(sigma, rho)
    raise ValueError(f"unknown transform {name!r}")


# {{{ evaluation


def _check_domain(spec: TransformSpec, omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    if not np.all(spec.contains(omega)):
        bad = omega[~spec.contains(omega)].ravel()[0]
        raise DomainError(
            f"omega={bad!r} outside ({spec.domain_lo}, {spec.domain_hi}) "
            f"for the {spec.name} transform"
        )
    return omega


def _cospi_half(omega):
    # cos(pi w / 2) evaluated as sin(pi (1 - w) / 2), accurate as w -> 1
    return np.sin(0.5 * np.pi * (1.0 - omega))


def _unwrap(value, omega_in):
    return float(value) if np.ndim(omega_in) == 0 else value


def psi(spec: TransformSpec, omega):
    """Evaluate :math:`\\psi(\\omega)`; accepts scalars or arrays."""
    w = _check_domain(spec, omega)
    v = spec.variant
    with np.errstate(over="ignore"):
        if v is Variant.EXP:
            r = np.exp(w)
        elif v is Variant.SQUARE:
            r = w * w
        elif v is Variant.POWER:
            r = w ** (1.0 - spec.alpha_link)
        elif v is Variant.TAN:
            r = np.sin(0.5 * np.pi * w) / _cospi_half(w)
        elif v is Variant.RATIONAL:
            r = w**spec.sigma / (1.0 - w) ** spec.rho
        else:
            r = np.asarray(spec.psi_fn(w), dtype=float)
    return _unwrap(r, omega)


def psi_prime(spec: TransformSpec, omega):
    """Evaluate the analytic derivative :math:`\\psi'(\\omega)`."""
    w = _check_domain(spec, omega)
    v = spec.variant
    with np.errstate(over="ignore"):
        if v is Variant.EXP:
            r = np.exp(w)
        elif v is Variant.SQUARE:
            r = 2.0 * w
        elif v is Variant.POWER:
            a = spec.alpha_link
            r = (1.0 - a) * w ** (-a)
        elif v is Variant.TAN:
            r = 0.5 * np.pi / _cospi_half(w) ** 2
        elif v is Variant.RATIONAL:
            s, p = spec.sigma, spec.rho
            r = w ** (s - 1.0) * (1.0 - w) ** (-p - 1.0) * (s * (1.0 - w) + p * w)
        else:
            r = np.asarray(spec.psi_prime_fn(w), dtype=float)
    return _unwrap(r, omega)


def log_psi(spec: TransformSpec, omega):
    """:math:`\\log\\psi(\\omega)`, without overflow for the built-in variants."""
    w = _check_domain(spec, omega)
    v = spec.variant
    if v is Variant.EXP:
        r = np.array(w, copy=True)
    elif v is Variant.SQUARE:
        r = 2.0 * np.log(w)
    elif v is Variant.POWER:
        r = (1.0 - spec.alpha_link) * np.log(w)
    elif v is Variant.TAN:
        r = np.log(np.sin(0.5 * np.pi * w)) - np.log(_cospi_half(w))
    elif v is Variant.RATIONAL:
        r = spec.sigma * np.log(w) - spec.rho * np.log1p(-w)
    else:
        r = np.log(np.asarray(spec.psi_fn(w), dtype=float))
    return _unwrap(r, omega)


def log_psi_prime(spec: TransformSpec, omega):
    """:math:`\\log\\psi'(\\omega)`, without overflow for the built-in variants."""
    w = _check_domain(spec, omega)
    v = spec.variant
    if v is Variant.EXP:
        r = np.array(w, copy=True)
    elif v is Variant.SQUARE:
        r = np.log(2.0 * w)
    elif v is Variant.POWER:
        a = spec.alpha_link
        r = math.log(1.0 - a) - a * np.log(w)
    elif v is Variant.TAN:
        r = math.log(0.5 * np.pi) - 2.0 * np.log(_cospi_half(w))
    elif v is Variant.RATIONAL:
        s, p = spec.sigma, spec.rho
        r = (
            (s - 1.0) * np.log(w)
            - (p + 1.0) * np.log1p(-w)
            + np.log(s * (1.0 - w) + p * w)
        )
    else:
        r = np.log(np.asarray(spec.psi_prime_fn(w), dtype=float))
    return _unwrap(r, omega)


def weight_profile(spec: TransformSpec, omega, exponent: float):
    """:math:`\\psi'(\\omega)\\,\\psi(\\omega)^{p}`, evaluated in log space.

    With ``exponent = -alpha - 1`` this is the upper-tail decay envelope of
    the diffusive kernel, with ``exponent = n - alpha - 1`` the lower one.
    """
    with np.errstate(over="ignore", under="ignore"):
        r = np.exp(log_psi_prime(spec, omega) + exponent * log_psi(spec, omega))
    return _unwrap(r, omega)


# }}}


# {{{ admissibility


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of :func:`check_admissible`. Failures are reported, never raised."""

    probe_count: int
    #: Smallest sampled value of :math:`\psi'`.
    min_psi_prime: float
    #: Number of adjacent probe pairs with :math:`\psi(\omega_{i+1}) \le \psi(\omega_i)`.
    monotonicity_violations: int
    #: Largest relative deviation between :math:`\psi'` and a central difference.
    max_derivative_deviation: float
    #: :math:`\psi` at the lowest and highest probe.
    psi_lo: float
    psi_hi: float
    #: Number of probes that were outside the domain or produced non-finite values.
    invalid_values: int

    @property
    def lower_limit_ok(self) -> bool:
        return self.psi_lo < 1.0e-6

    @property
    def upper_limit_ok(self) -> bool:
        return self.psi_hi > 1.0e6

    @property
    def ok(self) -> bool:
        return (
            self.invalid_values == 0
            and self.min_psi_prime > 0.0
            and self.monotonicity_violations == 0
            and self.max_derivative_deviation < 1.0e-6
            and self.lower_limit_ok
            and self.upper_limit_ok
        )


def _probe_spread(spec: TransformSpec, s: np.ndarray, reach: float) -> np.ndarray:
    """Map reference points ``s`` in ``[-1, 1]`` onto the domain."""
    lo, hi = spec.domain_lo, spec.domain_hi
    if lo.is_finite and hi.is_finite:
        # tanh clustering toward both ends; reach=14 gets within ~1e-12
        x = 0.5 * (1.0 + np.tanh(reach * s))
        return lo.value + (hi.value - lo.value) * x
    if lo.is_finite:
        return lo.value + np.exp(reach * s)
    if hi.is_finite:
        return hi.value - np.exp(-reach * s)
    return reach * np.tanh(2.0 * s) / np.tanh(2.0)


def graded_probes(spec: TransformSpec, count: int) -> np.ndarray:
    """Probe points that approach both ends of the domain.

    Finite endpoints are approached to a distance of about ``1e-12``; for
    infinite ones the reach is widened until :math:`\\psi` leaves
    ``[1e-7, 1e7]`` (starting from ``|omega| = 40`` on the real line).
    """
    s = np.linspace(-1.0, 1.0, count)
    both_finite = spec.domain_lo.is_finite and spec.domain_hi.is_finite
    reach = 14.0 if both_finite else 40.0
    if both_finite:
        return _probe_spread(spec, s, reach)

    for _ in range(12):
        omega = _probe_spread(spec, s, reach)
        with np.errstate(all="ignore"):
            ends = np.exp(log_psi(spec, omega[[0, -1]]))
        if ends[0] < 1.0e-7 and ends[-1] > 1.0e7:
            break
        reach *= 2.0
    return omega


def check_admissible(spec: TransformSpec, probe_count: int = 1000) -> AdmissibilityReport:
    """Probe a transformation for the admissibility properties.

    Samples *probe_count* graded points, checks positivity and strict
    monotonicity, compares :func:`psi_prime` against central differences
    and records :math:`\\psi` at the outermost probes as evidence for the
    endpoint limits.
    """
    if probe_count < 3:
        raise ValueError(f"need at least 3 probes: {probe_count}")

    omega = graded_probes(spec, probe_count)
    omega = omega[spec.contains(omega)]
    invalid = probe_count - omega.size

    with np.errstate(all="ignore"):
        p = np.asarray(psi(spec, omega), dtype=float)
        dp = np.asarray(psi_prime(spec, omega), dtype=float)

    finite = np.isfinite(p) & np.isfinite(dp)
    invalid += int(np.count_nonzero(~finite))
    violations = int(np.count_nonzero(np.diff(p) <= 0.0))

    # central differences, away from finite endpoints where omega itself
    # carries too few significant digits
    dist = np.full_like(omega, np.inf)
    if spec.domain_lo.is_finite:
        dist = np.minimum(dist, omega - spec.domain_lo.value)
    if spec.domain_hi.is_finite:
        dist = np.minimum(dist, spec.domain_hi.value - omega)

    scale = np.minimum(np.maximum(np.abs(omega), 1.0), dist)
    mask = finite & (dist > 1.0e-6) & (dp > 0)
    delta = 1.0e-5 * scale[mask]
    wp = omega[mask] + delta
    wm = omega[mask] - delta

    with np.errstate(all="ignore"):
        fd = (np.asarray(psi(spec, wp)) - np.asarray(psi(spec, wm))) / (wp - wm)
        dev = np.abs(fd - dp[mask]) / np.abs(dp[mask])

    return AdmissibilityReport(
        probe_count=probe_count,
        min_psi_prime=float(np.min(dp[finite])) if np.any(finite) else math.nan,
        monotonicity_violations=violations,
        max_derivative_deviation=float(np.max(dev)) if dev.size else 0.0,
        psi_lo=float(p[0]),
        psi_hi=float(p[-1]),
        invalid_values=invalid,
    )


# }}}
