r"""Slow reference computations used to check the fast path.

Everything here integrates in :math:`\tau` directly, so the cost per value is
at least linear in the number of quadrature panels. The three entry points
are

* :func:`rl_direct`, the Riemann-Liouville integral itself,
* :func:`phi_direct`, the diffusive kernel

  .. math::

      \phi(t, \omega) = c_\alpha\, \psi'(\omega)\, \psi(\omega)^{n-\alpha-1}
          \int_a^t (t-\tau)^{n-1} e^{-(t-\tau)\psi(\omega)} f(\tau)\,\mathrm{d}\tau,

* :func:`phi_decay_probe`, which samples :math:`|\phi(t, \cdot)|` for slope fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from diffrep.errors import ToleranceNotMet
from diffrep.fractional import FractionalOrder, gamma
from diffrep.quadrature import gauss_legendre
from diffrep.transforms import TransformSpec, log_psi, log_psi_prime, psi, psi_prime

#: Panel budget of the adaptive quadrature.
MAX_PANELS = 2**14

#: Number of geometric grading levels toward an endpoint.
GRADING_LEVELS = 40

_GL_ORDER = 15


# {{{ source functions


@dataclass(frozen=True)
class SourceFunction:
    """A right-hand side :math:`f` together with what is known about it.

    *fn* must be reentrant. It is called with numpy arrays when possible and
    falls back to elementwise calls if it does not broadcast.
    """

    fn: Callable
    tag: str = "custom"
    #: Known smoothness :math:`\ell` (:math:`f \in C^\ell`), if any.
    smoothness: int | None = None
    #: If set, :math:`f(t) = (t - a)^\beta` with this :math:`\beta`.
    power: float | None = None
    a: float = 0.0

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        try:
            r = np.asarray(self.fn(t_arr), dtype=float)
            if r.shape == t_arr.shape:
                return float(r) if r.ndim == 0 else r
        except (TypeError, ValueError):
            pass
        r = np.array([float(self.fn(float(x))) for x in t_arr.ravel()]).reshape(t_arr.shape)
        return float(r) if r.ndim == 0 else r

    @property
    def is_zero(self) -> bool:
        return self.tag == "zero"


BUILTIN_SOURCES = ("const", "poly:<beta>", "sin", "cos", "exp", "zero")


def _power_source(beta: float, a: float) -> Callable:
    if beta == 0:
        return lambda t: np.ones_like(np.asarray(t, dtype=float))

    def fn(t):
        return np.maximum(np.asarray(t, dtype=float) - a, 0.0) ** beta

    return fn


def builtin_source(tag: str, a: float = 0.0) -> SourceFunction:
    """Resolve a built-in source by name.

    ``poly:<beta>`` is :math:`(t-a)^\\beta` with :math:`\\beta \\ge 0`; ``const``
    is ``poly:0``.

    :raises ValueError: for unknown names or a negative exponent.
    """
    tag = tag.strip().lower()
    if tag == "const":
        return SourceFunction(_power_source(0.0, a), "const", None, 0.0, a)
    if tag.startswith("poly:"):
        try:
            beta = float(tag[5:])
        except ValueError:
            raise ValueError(f"malformed exponent in {tag!r}") from None
        if not (beta >= 0 and math.isfinite(beta)):
            raise ValueError(f"poly exponent must be finite and >= 0: {beta!r}")
        return SourceFunction(_power_source(beta, a), tag, None, beta, a)
    if tag == "sin":
        return SourceFunction(np.sin, "sin", None, None, a)
    if tag == "cos":
        return SourceFunction(np.cos, "cos", None, None, a)
    if tag == "exp":
        return SourceFunction(np.exp, "exp", None, None, a)
    if tag == "zero":
        return SourceFunction(np.zeros_like, "zero", None, None, a)
    raise ValueError(
        f"unknown source {tag!r}; expected one of {', '.join(BUILTIN_SOURCES)}"
    )


# }}}


# {{{ adaptive panel quadrature


def _panel_sums(g: Callable, breaks: np.ndarray):
    x, w = gauss_legendre(_GL_ORDER)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    pts = (lo + hi) * 0.5 + half * x
    vals = np.asarray(g(pts.ravel()), dtype=float).reshape(pts.shape)
    if not np.all(np.isfinite(vals)):
        raise ToleranceNotMet("integrand returned non-finite values")
    contrib = half * w * vals
    return math.fsum(contrib.ravel()), math.fsum(np.abs(contrib).ravel())


def adaptive_gauss(
    g: Callable, breaks, tol: float, max_panels: int = MAX_PANELS
) -> float:
    """Integrate *g* over ``[breaks[0], breaks[-1]]`` with composite 15-point Gauss.

    All panels are halved together until two successive levels agree to
    ``tol`` times the integral of :math:`|g|`.

    :raises ToleranceNotMet: if that needs more than *max_panels* panels.
    """
    breaks = np.unique(np.asarray(breaks, dtype=float))
    if breaks.size < 2:
        return 0.0
    coarse, _ = _panel_sums(g, breaks)
    while 2 * (breaks.size - 1) <= max_panels:
        mid = 0.5 * (breaks[:-1] + breaks[1:])
        breaks = np.sort(np.concatenate([breaks, mid]))
        fine, scale = _panel_sums(g, breaks)
        if abs(fine - coarse) <= tol * scale:
            return fine
        coarse = fine
    raise ToleranceNotMet(
        f"adaptive quadrature did not reach tol={tol:g} within {max_panels} panels"
    )


def _graded(lo: float, hi: float, at_lo: bool, at_hi: bool, levels: int = GRADING_LEVELS):
    length = hi - lo
    steps = 2.0 ** -np.arange(1, levels + 1, dtype=float)
    parts = [np.array([lo, hi]), lo + length * np.array([0.25, 0.5, 0.75])]
    if at_lo:
        parts.append(lo + length * 0.5 * steps)
    if at_hi:
        parts.append(hi - length * 0.5 * steps)
    b = np.unique(np.concatenate(parts))
    # grading can collapse onto the endpoint in floating point
    return b[(b >= lo) & (b <= hi)]


# }}}


# {{{ oracles


def _check_tol(tol: float, upper: float = 1.0e-3) -> None:
    if not 0 < tol <= upper:
        raise ValueError(f"tol must lie in (0, {upper:g}]: {tol!r}")


def rl_direct(
    order: FractionalOrder, f: SourceFunction, a: float, t: float, tol: float = 1.0e-12
) -> float:
    r"""Riemann-Liouville integral :math:`J_a^\alpha f(t)` by direct quadrature.

    With :math:`s = t - \tau` and :math:`u = s^\alpha`,

    .. math::

        J_a^\alpha f(t) = \frac{1}{\Gamma(\alpha + 1)}
            \int_0^{(t-a)^\alpha} f(t - u^{1/\alpha})\,\mathrm{d}u,

    whose integrand is bounded for every :math:`\alpha > 0`. Panels are graded
    toward both ends to absorb the remaining loss of smoothness.
    """
    _check_tol(tol)
    if t < a:
        raise ValueError(f"t={t!r} lies before a={a!r}")
    if t == a:
        return 0.0
    alpha = order.alpha
    length = t - a
    u_max = length**alpha

    def g(u):
        s = np.minimum(u ** (1.0 / alpha), length)
        return f(t - s)

    val = adaptive_gauss(g, _graded(0.0, u_max, True, True), tol)
    return val / gamma(alpha + 1.0)


#: Above this value of :math:`\psi(\omega)(t - a)` the kernel integral is
#: computed in the stretched variable :math:`\sigma = \psi(\omega)(t-\tau)`.
BOUNDARY_LAYER_THRESHOLD = 50.0
_SIGMA_SPLIT = 30.0
_SIGMA_MAX = 800.0


def phi_direct(
    order: FractionalOrder,
    spec: TransformSpec,
    f: SourceFunction,
    a: float,
    t: float,
    omega: float,
    tol: float = 1.0e-10,
) -> float:
    """The diffusive kernel :math:`\\phi(t, \\omega)` by adaptive quadrature.

    When :math:`\\lambda = \\psi(\\omega)` makes :math:`\\lambda (t-a)` large the
    integrand is a boundary layer of width :math:`1/\\lambda` at :math:`\\tau = t`.
    The integral is then taken over :math:`\\sigma = \\lambda (t - \\tau)` with
    a break at :math:`\\sigma = 30`, and the prefactor becomes
    :math:`c_\\alpha \\psi' \\psi^{-\\alpha-1}`. All prefactors are formed in
    log space, so extreme :math:`\\omega` neither overflow nor underflow early.

    :raises DomainError: if *omega* is outside the transform domain.
    :raises ToleranceNotMet: if the panel budget is exhausted.
    """
    _check_tol(tol)
    lam = psi(spec, omega)
    if t < a:
        raise ValueError(f"t={t!r} lies before a={a!r}")
    if t == a or getattr(f, "is_zero", False):
        return 0.0

    alpha, n, c = order.alpha, order.n, order.c_alpha
    length = t - a
    lp = float(log_psi(spec, omega))
    lpp = float(log_psi_prime(spec, omega))
    sign = math.copysign(1.0, c)
    log_c = math.log(abs(c))

    if lam * length > BOUNDARY_LAYER_THRESHOLD:
        sigma_end = min(lam * length, _SIGMA_MAX)
        breaks = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, _SIGMA_SPLIT]
        b = 2 * _SIGMA_SPLIT
        while b < sigma_end:
            breaks.append(b)
            b *= 2
        breaks = np.array([x for x in breaks if x < sigma_end] + [sigma_end])

        def g(sig):
            s = np.minimum(sig / lam, length)
            return sig ** (n - 1) * np.exp(-sig) * f(t - s)

        integral = adaptive_gauss(g, breaks, tol)
        log_pref = log_c + lpp - (alpha + 1.0) * lp
    else:
        def g(s):
            return s ** (n - 1) * np.exp(-lam * s) * f(t - s)

        integral = adaptive_gauss(g, _graded(0.0, length, False, True), tol)
        log_pref = log_c + lpp + (n - alpha - 1.0) * lp

    if integral == 0.0:
        return 0.0
    return sign * math.copysign(math.exp(log_pref + math.log(abs(integral))), integral)


def phi_decay_probe(
    order: FractionalOrder,
    spec: TransformSpec,
    f: SourceFunction,
    a: float,
    t: float,
    omegas,
    tol: float = 1.0e-10,
) -> list[tuple[float, float]]:
    """Pairs :math:`(\\psi(\\omega), |\\phi(t, \\omega)|)` for each probe point."""
    omegas = [float(w) for w in omegas]
    if any(w2 <= w1 for w1, w2 in zip(omegas, omegas[1:])):
        raise ValueError("probe points must be strictly increasing")
    if omegas and not t > a:
        raise ValueError("decay probes need t > a")
    return [
        (psi(spec, w), abs(phi_direct(order, spec, f, a, t, w, tol))) for w in omegas
    ]


def fit_log_slope(x, y) -> float:
    """Least-squares slope of ``log(y)`` against ``x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two points for a slope")
    slope, _ = np.polyfit(x, np.log(y), 1)
    return float(slope)


def decay_slope(spec: TransformSpec, omegas, pairs) -> float:
    r"""Slope of :math:`\log(|\phi| / \psi')` against :math:`\log \psi`.

    Near the upper end of the domain this tends to :math:`-\alpha - 1`, near
    the lower end to :math:`n - \alpha - 1`.
    """
    lam = np.array([p for p, _ in pairs])
    mag = np.array([m for _, m in pairs])
    return fit_log_slope(np.log(lam), mag / psi_prime(spec, np.asarray(omegas, dtype=float)))


# }}}
