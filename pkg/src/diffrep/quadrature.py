r"""Quadrature rules in :math:`\omega`-space for the diffusive representation

.. math::

    J_a^\alpha f(t) = \int_\Omega \phi(t, \omega)\,\mathrm{d}\omega
        \approx \sum_{m=1}^{M} w_m\, \phi(t, \omega_m).

The kernel decays like :math:`\psi'\psi^{-\alpha-1}` at the upper end of
:math:`\Omega` and like :math:`\psi'\psi^{n-\alpha-1}` at the lower end, and it is
as smooth in :math:`\omega` as :math:`\psi` itself. The rules built here use
those two facts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from diffrep.errors import ConvergenceError, RangeError, UnsupportedTransform
from diffrep.fractional import FractionalOrder
from diffrep.transforms import TransformSpec, Variant, log_psi, log_psi_prime

MAX_LAGUERRE = 128
MAX_LEGENDRE = 64
MAX_JACOBI = 128

#: Gauss-Legendre order of the composite panels used for bounded domains.
PANEL_ORDER = 8

# {{{ Gaussian rules


def _golub_welsch(diag: np.ndarray, offdiag: np.ndarray) -> np.ndarray:
    n = diag.size
    jac = np.diag(diag)
    if n > 1:
        jac += np.diag(offdiag, 1) + np.diag(offdiag, -1)
    try:
        return np.linalg.eigvalsh(jac)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue solve failed for n={n}") from exc


def _newton_polish(
    x: np.ndarray, evaluate, maxiter: int = 10, relative: bool = False
) -> np.ndarray:
    # the eigenvalues are already close; stop once steps reach round-off
    for _ in range(maxiter):
        p, dp = evaluate(x)
        dx = p / dp
        x = x - dx
        scale = np.abs(x) if relative else np.maximum(np.abs(x), 1.0)
        step = np.max(np.abs(dx) / scale)
        if step < 1.0e-15:
            break
    if not step < 1.0e-11:
        raise ConvergenceError("Newton refinement of Gauss nodes did not converge")
    return x


def _jacobi_recurrence(n: int, a: float, b: float):
    """Monic three-term recurrence of the Jacobi polynomials :math:`P^{(a,b)}_k`."""
    k = np.arange(n, dtype=float)
    ab = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / ((2 * k + ab) * (2 * k + ab + 2))
    diag[0] = (b - a) / (ab + 2)

    k = np.arange(1, n, dtype=float)
    off2 = (
        4 * k * (k + a) * (k + b) * (k + ab)
        / ((2 * k + ab) ** 2 * (2 * k + ab + 1) * (2 * k + ab - 1))
    )
    if n > 1:
        off2[0] = 4 * (a + 1) * (b + 1) / ((ab + 2) ** 2 * (ab + 3))
    return diag, np.sqrt(off2)


def _jacobi_eval(n: int, a: float, b: float, x: np.ndarray):
    """Return :math:`P_n^{(a,b)}(x)` and :math:`P_{n-1}^{(a,b)}(x)`."""
    ab = a + b
    p_prev = np.ones_like(x)
    p = 0.5 * ((ab + 2) * x + (a - b))
    for k in range(2, n + 1):
        c0 = 2 * k * (k + ab) * (2 * k + ab - 2)
        c1 = (2 * k + ab - 1) * ((2 * k + ab) * (2 * k + ab - 2) * x + a * a - b * b)
        c2 = 2 * (k + a - 1) * (k + b - 1) * (2 * k + ab)
        p_prev, p = p, (c1 * p - c2 * p_prev) / c0
    return p, p_prev


def _gauss_jacobi(n: int, a: float, b: float):
    """Gauss rule for the weight :math:`(1-x)^a (1+x)^b` on :math:`[-1, 1]`."""
    diag, off = _jacobi_recurrence(n, a, b)
    x = _golub_welsch(diag, off)

    if n == 1:
        mu0 = 2.0 ** (a + b + 1) * math.exp(
            math.lgamma(a + 1) + math.lgamma(b + 1) - math.lgamma(a + b + 2)
        )
        return x, np.array([mu0])

    ab = a + b

    def evaluate(x):
        p, p_prev = _jacobi_eval(n, a, b, x)
        dp = (n * (a - b - (2 * n + ab) * x) * p + 2 * (n + a) * (n + b) * p_prev) / (
            (2 * n + ab) * (1 - x * x)
        )
        return p, dp

    x = _newton_polish(x, evaluate)
    _, p_prev = _jacobi_eval(n, a, b, x)

    # w_i = C / ((1 - x_i^2) P_n'(x_i)^2), with P_n' from the value of P_{n-1}
    dp = 2 * (n + a) * (n + b) * p_prev / ((2 * n + ab) * (1 - x * x))
    log_c = (
        (ab + 1) * math.log(2.0)
        + math.lgamma(n + a + 1)
        + math.lgamma(n + b + 1)
        - math.lgamma(n + ab + 1)
        - math.lgamma(n + 1)
    )
    w = np.exp(log_c) / ((1 - x * x) * dp * dp)
    # normalize to the exact zeroth moment, which removes the common error
    mu0 = math.exp((ab + 1) * math.log(2.0) + math.lgamma(a + 1) + math.lgamma(b + 1)
                   - math.lgamma(ab + 2))
    return x, w * (mu0 / math.fsum(w))


def gauss_legendre(m: int):
    """Gauss-Legendre nodes and weights on :math:`[-1, 1]`, exact to degree :math:`2m-1`.

    :raises RangeError: unless ``1 <= m <= 64``.
    """
    if not 1 <= m <= MAX_LEGENDRE:
        raise RangeError(f"Gauss-Legendre order must lie in [1, {MAX_LEGENDRE}]: {m}")
    x, w = _gauss_jacobi(m, 0.0, 0.0)
    # symmetrize against round-off
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


def gauss_jacobi01(m: int, p: float):
    r"""Gauss rule for :math:`\int_0^1 u^p g(u)\,\mathrm{d}u`, :math:`p > -1`."""
    if not 1 <= m <= MAX_JACOBI:
        raise RangeError(f"Gauss-Jacobi order must lie in [1, {MAX_JACOBI}]: {m}")
    if not p > -1.0:
        raise RangeError(f"Jacobi exponent must exceed -1: {p!r}")
    x, w = _gauss_jacobi(m, 0.0, p)
    return 0.5 * (1.0 + x), w / 2.0 ** (p + 1.0)


def _laguerre_eval(n: int, x: np.ndarray):
    p_prev = np.ones_like(x)
    p = 1.0 - x
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1 - x) * p - k * p_prev) / (k + 1)
    return p, p_prev


def _gauss_laguerre_log(m: int):
    """Gauss-Laguerre nodes and the logarithms of the weights."""
    if not 1 <= m <= MAX_LAGUERRE:
        raise RangeError(f"Gauss-Laguerre order must lie in [1, {MAX_LAGUERRE}]: {m}")
    k = np.arange(m, dtype=float)
    x = _golub_welsch(2 * k + 1, k[1:])
    if m == 1:
        return x, np.zeros(1)

    def evaluate(x):
        p, p_prev = _laguerre_eval(m, x)
        return p, m * (p - p_prev) / x

    x = _newton_polish(x, evaluate, relative=True)
    _, p_prev = _laguerre_eval(m, x)
    # w_i = x_i / (m L_{m-1}(x_i))^2, then normalized to the zeroth moment 1
    logw = np.log(x) - 2.0 * np.log(m * np.abs(p_prev))
    top = logw.max()
    logw -= top + math.log(math.fsum(np.exp(logw - top)))
    return x, logw


def gauss_laguerre(m: int):
    r"""Gauss-Laguerre rule for :math:`\int_0^\infty g(x) e^{-x}\,\mathrm{d}x`.

    Nodes come from the symmetric tridiagonal Jacobi matrix (diagonal
    :math:`2k+1`, off-diagonal :math:`k`) and are then polished by Newton
    steps on :math:`L_m`; weights follow from :math:`L_{m-1}` at the nodes.

    :raises RangeError: unless ``1 <= m <= 128``.
    """
    x, logw = _gauss_laguerre_log(m)
    return x, np.exp(logw)


# }}}


# {{{ diffusive rules


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights in :math:`\\omega`-space, nodes strictly increasing."""

    nodes: np.ndarray
    weights: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1d arrays of equal length")
        if nodes.size and not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")

        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.nodes.size

    def apply(self, values) -> float:
        """Weighted sum in ascending node order, correctly rounded."""
        return math.fsum(self.weights * np.asarray(values, dtype=float))


def _exp_rule_jacobi(order: FractionalOrder, m_half: int, split: float):
    alpha, n = order.alpha, order.n
    # lower half: u = exp(omega - split), envelope u^(n - alpha - 1)
    u, wu = gauss_jacobi01(m_half, n - alpha - 1.0)
    # upper half: v = exp(split - omega), envelope v^(alpha - 1)
    v, wv = gauss_jacobi01(m_half, alpha - 1.0)

    nodes = np.concatenate([split + np.log(u), (split - np.log(v))[::-1]])
    weights = np.concatenate([wu * u ** (alpha - n), (wv * v ** (-alpha))[::-1]])
    return nodes, weights


def _exp_rule_laguerre(order: FractionalOrder, m_half: int, split: float):
    alpha, n = order.alpha, order.n
    x, logw = _gauss_laguerre_log(m_half)
    rate_hi, rate_lo = alpha, n - alpha
    w = np.exp(logw + x)

    nodes = np.concatenate([(split - x / rate_lo)[::-1], split + x / rate_hi])
    weights = np.concatenate([(w / rate_lo)[::-1], w / rate_hi])
    return nodes, weights


def _composite(breaks: np.ndarray, order: int = PANEL_ORDER):
    x, w = gauss_legendre(order)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    nodes = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
    weights = 0.5 * (hi - lo) * w * np.ones_like(nodes)
    return nodes.ravel(), weights.ravel()


def _graded_finite_breaks(lo: float, hi: float, panels: int) -> np.ndarray:
    if panels == 1:
        return np.array([lo, hi])
    n_lo = (panels + 1) // 2
    n_hi = panels - n_lo
    mid = 0.5 * (lo + hi)
    left = lo + (mid - lo) * 2.0 ** -np.arange(n_lo - 1, -1, -1, dtype=float)
    right = hi - (hi - mid) * 2.0 ** -np.arange(1, n_hi, dtype=float)
    return np.concatenate([[lo], left, right, [hi]])


def kernel_envelope(
    order: FractionalOrder, spec: TransformSpec, omega, horizon: float
) -> np.ndarray:
    r"""Log of the bound :math:`|\phi(t,\omega)| / \sup|f|` for :math:`t - a \le` *horizon*.

    .. math::

        |c_\alpha|\, \psi'(\omega)\, \psi(\omega)^{-\alpha-1}
            \min\left((n-1)!,\ \frac{(\text{horizon}\cdot\psi(\omega))^n}{n}\right)
    """
    alpha, n = order.alpha, order.n
    lp = np.asarray(log_psi(spec, omega))
    lpp = np.asarray(log_psi_prime(spec, omega))
    inner = np.minimum(
        math.lgamma(n), n * (math.log(horizon) + lp) - math.log(n)
    )
    return math.log(abs(order.c_alpha)) + lpp - (alpha + 1.0) * lp + inner


def _truncated_rule(
    order: FractionalOrder, spec: TransformSpec, panels: int, horizon: float
):
    lo = spec.domain_lo.value
    # work in x = log(omega - lo), where power-law tails become exponential
    x = np.arange(-690.0, 690.0, 0.25)
    omega = lo + np.exp(x)
    ok = spec.contains(omega) & (omega > lo)
    x, omega = x[ok], omega[ok]

    with np.errstate(all="ignore"):
        # log of the envelope density per unit x
        dens = kernel_envelope(order, spec, omega, horizon) + x
    finite = np.isfinite(dens)
    x, dens = x[finite], dens[finite]
    peak = dens.max()
    idx = np.flatnonzero(dens >= peak + math.log(1.0e-16))
    i0, i1 = idx[0], idx[-1]

    # mass of the envelope outside [x[i0], x[i1]] relative to the mass inside
    dx = x[1] - x[0]
    inside = math.fsum(np.exp(dens[i0:i1 + 1] - peak)) * dx
    outside = math.fsum(np.exp(dens[:i0] - peak)) + math.fsum(np.exp(dens[i1 + 1:] - peak))
    tail = outside * dx / inside
    # the scan itself ends somewhere; whatever lies past it is not covered
    if i0 == 0 or i1 == x.size - 1:
        tail = math.inf

    # Equidistribute dens^(1/(2q+1)), q the panel order: the width law that
    # balances Gauss panel errors on exponentially decaying integrands.
    # Panels stay narrow where the envelope is large and widen toward the cuts.
    xs = x[i0:i1 + 1]
    density = np.exp((dens[i0:i1 + 1] - peak) / (2 * PANEL_ORDER + 1))
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * dx)])
    breaks = np.interp(np.linspace(0.0, cum[-1], panels + 1), cum, xs)
    breaks[0], breaks[-1] = xs[0], xs[-1]
    s_nodes, s_weights = _composite(breaks)
    d = np.exp(s_nodes)
    meta = {"omega_min": lo + d[0], "omega_max": lo + d[-1],
            "relative_tail_bound": tail}
    return lo + d, s_weights * d, meta


def build_diffusive_rule(
    order: FractionalOrder,
    spec: TransformSpec,
    m_half: int,
    horizon: float = 1.0,
    *,
    method: str | None = None,
    split_shift: float = 0.0,
) -> QuadratureRule:
    r"""Construct a quadrature rule for :math:`\int_\Omega \phi(t,\omega)\,\mathrm{d}\omega`.

    :arg m_half: for the exponential transform the number of nodes on each
        side of the split point; otherwise the number of composite panels.
    :arg horizon: the largest :math:`t - a` the rule has to serve.
    :arg method: exponential transform only. ``"jacobi"`` (default) maps
        :math:`u = e^{\omega - s}` and uses Gauss-Jacobi rules whose weights are
        the two tail envelopes :math:`u^{n-\alpha-1}` and
        :math:`u^{-\alpha-1} \sim v^{\alpha - 1}`. ``"laguerre"`` rescales each
        half-line linearly, :math:`\omega = s + x/\alpha` and
        :math:`\omega = s - x/(n-\alpha)`, and applies Gauss-Laguerre.
    :arg split_shift: the split point is :math:`s = -\log(\text{horizon}) + \text{split\_shift}`.

    Bounded domains get composite Gauss-Legendre panels of order 8,
    geometrically graded (ratio 2) toward both endpoints. Domains of the
    form :math:`(\omega_0, \infty)` are truncated where the kernel envelope
    drops below ``1e-16`` of its peak, and the relative size of the
    discarded envelope tail is stored as ``meta["relative_tail_bound"]``.
    """
    if m_half < 1:
        raise RangeError(f"m_half must be positive: {m_half}")
    if not horizon > 0:
        raise ValueError(f"horizon must be positive: {horizon!r}")

    meta: dict[str, Any] = {
        "transform": spec.name,
        "alpha": order.alpha,
        "m_half": m_half,
        "horizon": horizon,
    }

    lo, hi = spec.domain_lo, spec.domain_hi
    if spec.variant is Variant.EXP:
        method = method or "jacobi"
        split = -math.log(horizon) + split_shift
        if method == "jacobi":
            nodes, weights = _exp_rule_jacobi(order, m_half, split)
        elif method == "laguerre":
            nodes, weights = _exp_rule_laguerre(order, m_half, split)
        else:
            raise ValueError(f"unknown method {method!r}")
        meta.update(method=method, split=split)
    elif method is not None:
        raise ValueError(f"method {method!r} only applies to the exp transform")
    elif lo.is_finite and hi.is_finite:
        breaks = _graded_finite_breaks(lo.value, hi.value, m_half)
        nodes, weights = _composite(breaks)
        meta.update(method="graded-panels", panels=m_half, panel_order=PANEL_ORDER)
    elif lo.is_finite:
        nodes, weights, extra = _truncated_rule(order, spec, m_half, horizon)
        meta.update(method="truncated-panels", panels=m_half,
                    panel_order=PANEL_ORDER, **extra)
    else:
        raise UnsupportedTransform(
            f"no quadrature construction for a {spec.name} transform on "
            f"({lo}, {hi})"
        )

    inside = spec.contains(nodes)
    if not np.all(inside):
        # geometric grading can push outer nodes onto the endpoint in floating point
        nodes, weights = nodes[inside], weights[inside]
        meta["dropped_nodes"] = int(np.count_nonzero(~inside))

    return QuadratureRule(nodes=nodes, weights=weights, meta=meta)


# }}}
