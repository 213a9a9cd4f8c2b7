r"""History-free evaluation of :math:`J_a^\alpha f` on a time grid, :math:`0 < \alpha < 1`.

Each quadrature node :math:`\omega_m` carries one scalar
:math:`\phi_m(t) \approx \phi(t, \omega_m)` that obeys the linear ODE

.. math::

    \phi_m'(t) = -\lambda_m \phi_m(t) + \kappa_m f(t), \qquad \phi_m(a) = 0,

with :math:`\lambda_m = \psi(\omega_m)` and
:math:`\kappa_m = c_\alpha \psi'(\omega_m) \psi(\omega_m)^{-\alpha}`. The value
of the integral is read out as :math:`\sum_m w_m \phi_m`. Since
:math:`\lambda_m` spans many orders of magnitude, only implicit steps are
offered. They are solved in closed form.

Large :math:`\lambda_m` combined with the formula
:math:`\kappa_m = \lambda_m q_m`, :math:`q_m = c_\alpha \psi' \psi^{-\alpha-1}`,
would overflow. The update coefficients are therefore computed from
:math:`z_m = h\lambda_m` and :math:`q_m` in a form that stays finite for
:math:`z_m = \infty`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from diffrep.errors import OrderOutOfRange
from diffrep.fractional import FractionalOrder
from diffrep.oracle import SourceFunction, phi_direct
from diffrep.quadrature import QuadratureRule, build_diffusive_rule
from diffrep.transforms import TransformSpec, Variant, log_psi, log_psi_prime, psi

#: Relative spread of the steps below which a grid counts as uniform.
UNIFORM_TOLERANCE = 1.0e-12

#: Backward Euler substeps replacing the first trapezoidal step.
DEFAULT_DAMPED_START = 8


class Stepper(enum.Enum):
    BACKWARD_EULER = "be"
    TRAPEZOIDAL = "trap"

    @classmethod
    def parse(cls, value: Stepper | str) -> Stepper:
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {
            "be": cls.BACKWARD_EULER,
            "backward_euler": cls.BACKWARD_EULER,
            "backwardeuler": cls.BACKWARD_EULER,
            "trap": cls.TRAPEZOIDAL,
            "trapezoidal": cls.TRAPEZOIDAL,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown stepper {value!r}; use 'be' or 'trap'") from None


# {{{ time grid


@dataclass(frozen=True)
class TimeGrid:
    """Evaluation points :math:`a \\le t_1 < \\dots < t_N`."""

    a: float
    points: np.ndarray
    uniform: bool = field(init=False)

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float).ravel()
        if pts.size == 0:
            raise ValueError("a time grid needs at least one point")
        if not np.all(np.isfinite(pts)) or not math.isfinite(self.a):
            raise ValueError("time grid points must be finite")
        if pts[0] < self.a:
            raise ValueError(f"first point {pts[0]!r} lies before a={self.a!r}")
        steps = np.diff(np.concatenate([[self.a], pts]))
        if np.any(steps[1:] <= 0):
            raise ValueError("time grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

        positive = steps[steps > 0]
        uniform = bool(
            positive.size == 0
            or (positive.max() - positive.min()) <= UNIFORM_TOLERANCE * positive.max()
        )
        object.__setattr__(self, "uniform", uniform)

    @classmethod
    def uniform_grid(cls, a: float, b: float, n: int) -> TimeGrid:
        """The points :math:`t_k = a + k (b - a) / n`, :math:`k = 1, \\dots, n`."""
        if n < 1:
            raise ValueError(f"need at least one interval: n={n}")
        if not b > a:
            raise ValueError(f"need b > a: a={a!r}, b={b!r}")
        k = np.arange(1, n + 1, dtype=float)
        pts = a + (b - a) * k / n
        pts[-1] = b
        return cls(a, pts)

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def horizon(self) -> float:
        return float(self.points[-1] - self.a)


# }}}


# {{{ state and steppers


@dataclass
class DiffusiveState:
    """Per-node values :math:`\\phi_m` plus the constant node data.

    All arrays have the length of the rule and never change size.
    """

    t_current: float
    phi: np.ndarray
    lam: np.ndarray
    kappa: np.ndarray
    #: :math:`\kappa_m / \lambda_m`, formed without overflow.
    q: np.ndarray
    rule: QuadratureRule
    _coeff_key: tuple | None = field(default=None, repr=False)
    _coeffs: tuple | None = field(default=None, repr=False)

    @classmethod
    def from_arrays(
        cls, lam, kappa, weights, phi=None, t: float = 0.0
    ) -> DiffusiveState:
        """Build a state from raw node data, mainly for experiments and tests.

        The rule gets nodes ``0, 1, 2, ...`` since only its weights are used.
        """
        lam = np.array(lam, dtype=float)
        kappa = np.array(kappa, dtype=float)
        weights = np.array(weights, dtype=float)
        if not (lam.shape == kappa.shape == weights.shape) or lam.ndim != 1:
            raise ValueError("lam, kappa and weights must be 1d arrays of equal length")
        if not np.all(lam > 0):
            raise ValueError("all lambda values must be positive")
        phi = np.zeros_like(lam) if phi is None else np.array(phi, dtype=float)
        if phi.shape != lam.shape:
            raise ValueError("phi must match lam in shape")
        rule = QuadratureRule(np.arange(lam.size, dtype=float), weights)
        return cls(float(t), phi, lam, kappa, kappa / lam, rule)

    @property
    def size(self) -> int:
        return self.phi.size

    @property
    def nbytes(self) -> int:
        """Bytes held in per-node arrays, a function of the rule size only."""
        return sum(
            a.nbytes
            for a in (self.phi, self.lam, self.kappa, self.q,
                      self.rule.nodes, self.rule.weights)
        )


def init_state(
    order: FractionalOrder, rule: QuadratureRule, spec: TransformSpec, a: float
) -> DiffusiveState:
    """Zero state at :math:`t = a` with :math:`\\lambda_m` and :math:`\\kappa_m` precomputed.

    :raises OrderOutOfRange: unless :math:`0 < \\alpha < 1`.
    """
    alpha = order.alpha
    if not 0 < alpha < 1:
        raise OrderOutOfRange(
            f"the time-stepping path needs 0 < alpha < 1, got alpha={alpha!r}"
        )
    if rule.size == 0:
        raise ValueError("the quadrature rule has no nodes")
    if spec.variant is Variant.POWER and spec.alpha_link != alpha:
        raise ValueError(
            f"power transform built for alpha={spec.alpha_link!r}, order has {alpha!r}"
        )

    lp = np.asarray(log_psi(spec, rule.nodes))
    lpp = np.asarray(log_psi_prime(spec, rule.nodes))
    with np.errstate(over="ignore"):
        lam = np.asarray(psi(spec, rule.nodes), dtype=float)
        kappa = order.c_alpha * np.exp(lpp - alpha * lp)
        q = order.c_alpha * np.exp(lpp - (alpha + 1.0) * lp)
    return DiffusiveState(float(a), np.zeros(rule.size), lam, kappa, q, rule)


def _coefficients(state: DiffusiveState, kind: str, h: float) -> tuple:
    key = (kind, h)
    if state._coeff_key == key:
        return state._coeffs

    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        z = h * state.lam
        if kind == "be":
            damp = 1.0 / (1.0 + z)
            force = np.where(z <= 1.0, state.q * z / (1.0 + z), state.q / (1.0 + 1.0 / z))
        else:
            half = 0.5 * z
            damp = np.where(
                half <= 1.0, (1.0 - half) / (1.0 + half), (1.0 / half - 1.0) / (1.0 / half + 1.0)
            )
            force = np.where(
                half <= 1.0, state.q * half / (1.0 + half), state.q / (1.0 + 1.0 / half)
            )
    state._coeff_key = key
    state._coeffs = (damp, force)
    return state._coeffs


def _check_step(h: float) -> None:
    if not h > 0:
        raise ValueError(f"step size must be positive: h={h!r}")


def step_backward_euler(state: DiffusiveState, h: float, f_next: float) -> None:
    """Advance by *h* with one implicit Euler step, in place.

    Per node :math:`\\phi \\leftarrow (\\phi + h\\kappa f_{k+1}) / (1 + h\\lambda)`.
    The damping factor lies in :math:`(0, 1]` for every :math:`h\\lambda \\ge 0`.
    """
    _check_step(h)
    damp, force = _coefficients(state, "be", h)
    phi = state.phi
    np.multiply(phi, damp, out=phi)
    if f_next != 0:
        phi += force * f_next
    state.t_current += h


def step_trapezoidal(state: DiffusiveState, h: float, f_cur: float, f_next: float) -> None:
    """Advance by *h* with one trapezoidal (Crank-Nicolson) step, in place.

    Per node :math:`\\phi \\leftarrow ((1 - h\\lambda/2)\\phi + (h/2)\\kappa(f_k +
    f_{k+1})) / (1 + h\\lambda/2)`. The damping factor tends to :math:`-1` for
    stiff nodes; it stays bounded by one in modulus but does not decay.
    """
    _check_step(h)
    damp, force = _coefficients(state, "trap", h)
    phi = state.phi
    np.multiply(phi, damp, out=phi)
    fsum = f_cur + f_next
    if fsum != 0:
        phi += force * fsum
    state.t_current += h


def read_value(state: DiffusiveState) -> float:
    """:math:`\\sum_m w_m \\phi_m` in ascending node order, correctly rounded."""
    return state.rule.apply(state.phi)


# }}}


# {{{ grid driver


def iter_values(
    state: DiffusiveState,
    f: SourceFunction,
    points: Iterable[float],
    stepper: Stepper | str = Stepper.TRAPEZOIDAL,
    damped_start: int = DEFAULT_DAMPED_START,
) -> Iterator[float]:
    """March *state* through *points*, yielding the read-out at each.

    Only :math:`f` at the current and next point is held. A point equal to
    the current time yields the current value without stepping.

    With the trapezoidal rule and ``damped_start > 0``, the first interval
    leaving a zero state is covered by that many backward Euler substeps.
    Stiff nodes are then already damped when the trapezoidal steps begin;
    otherwise their start-up error would oscillate undamped and cap the
    accuracy at :math:`O(h^{2\\alpha})`.
    """
    stepper = Stepper.parse(stepper)
    if damped_start < 0:
        raise ValueError("damped_start must be >= 0")
    t = state.t_current
    f_cur = float(f(t))
    started = bool(np.any(state.phi))

    for t_next in points:
        t_next = float(t_next)
        h = t_next - t
        if h < 0:
            raise ValueError(f"points must not go backwards: {t_next!r} < {t!r}")
        if h == 0:
            yield read_value(state)
            continue
        f_next = float(f(t_next))

        if stepper is Stepper.BACKWARD_EULER:
            step_backward_euler(state, h, f_next)
        elif not started and damped_start:
            sub = h / damped_start
            for j in range(1, damped_start + 1):
                tj = t_next if j == damped_start else t + j * sub
                step_backward_euler(state, sub, f_next if j == damped_start else float(f(tj)))
        else:
            step_trapezoidal(state, h, f_cur, f_next)

        started = True
        state.t_current = t_next
        t, f_cur = t_next, f_next
        yield read_value(state)


def evaluate_on_grid(
    order: FractionalOrder,
    spec: TransformSpec,
    f: SourceFunction,
    grid: TimeGrid,
    M_half: int = 40,
    stepper: Stepper | str = Stepper.TRAPEZOIDAL,
    *,
    damped_start: int = DEFAULT_DAMPED_START,
    method: str | None = None,
) -> np.ndarray:
    """Approximate :math:`J_a^\\alpha f(t_k)` at every grid point.

    One rule sized for the horizon :math:`t_N - a`, one zero state, then a
    single pass over the grid. Cost is :math:`O(NM)` and the working state is
    :math:`O(M)`; only the returned values grow with :math:`N`.
    """
    rule = build_diffusive_rule(order, spec, M_half, max(grid.horizon, 1e-300), method=method)
    state = init_state(order, rule, spec, grid.a)
    out = np.empty(grid.size)
    for k, v in enumerate(iter_values(state, f, grid.points, stepper, damped_start)):
        out[k] = v
    return out


# }}}


# {{{ residual check


def _central_weights(deriv: int, half_width: int) -> np.ndarray:
    offsets = np.arange(-half_width, half_width + 1, dtype=float)
    vander = np.vander(offsets, increasing=True).T
    rhs = np.zeros(offsets.size)
    rhs[deriv] = math.factorial(deriv)
    return np.linalg.solve(vander, rhs)


def fd_weights(deriv: int) -> tuple[np.ndarray, int]:
    """Fourth-order central finite difference weights for a unit step."""
    half_width = (deriv + 1) // 2 + 1
    return _central_weights(deriv, half_width), half_width


def residual_check_ode(
    order: FractionalOrder,
    spec: TransformSpec,
    f: SourceFunction,
    a: float,
    t: float,
    omega: float,
    h_fd: float = 1.0e-3,
    tol: float = 1.0e-12,
) -> float:
    r"""Residual of the order-:math:`n` ODE satisfied by :math:`\phi(\cdot, \omega)`.

    .. math::

        \Bigl|\sum_{k=0}^{n} \binom{n}{k} \psi^{n-k} \partial_t^k \phi
            - c_\alpha \psi' \psi^{n-1-\alpha} (n-1)!\, f(t)\Bigr|

    with the derivatives taken by fourth-order central differences of
    :func:`~diffrep.oracle.phi_direct`, divided by the size of the forcing
    term (absolute when the forcing vanishes). Works for any non-integer
    :math:`\alpha`.
    """
    n = order.n
    lam = psi(spec, omega)
    _, reach = fd_weights(n)
    if not t - reach * h_fd > a:
        raise ValueError(f"t={t!r} is too close to a={a!r} for the stencil")

    offsets = np.arange(-reach, reach + 1)
    values = np.array(
        [phi_direct(order, spec, f, a, t + j * h_fd, omega, tol) for j in offsets]
    )

    lhs = []
    for k in range(n + 1):
        if k == 0:
            deriv = values[reach]
        else:
            w, hw = fd_weights(k)
            deriv = math.fsum(w * values[reach - hw: reach + hw + 1]) / h_fd**k
        lhs.append(math.comb(n, k) * lam ** (n - k) * deriv)

    log_force = (
        math.log(abs(order.c_alpha))
        + float(log_psi_prime(spec, omega))
        + (n - 1 - order.alpha) * float(log_psi(spec, omega))
        + math.lgamma(n)
    )
    force = math.copysign(math.exp(log_force), order.c_alpha) * float(f(t))
    residual = abs(math.fsum(lhs) - force)
    return residual / abs(force) if force != 0 else residual


# }}}
