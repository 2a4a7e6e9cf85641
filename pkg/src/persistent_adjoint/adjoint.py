"""Adjoint auxiliary system, gradient read-out, and certified step constants.

For a contraction ``x -> f(x, w)`` and a loss ``e(x)`` the auxiliary map

    T((x, y), w) = (f(x, w), (df/dx)^T y + de/dx(x))

is itself a contraction in a weighted product norm, and at its fixed point
``(x*, y*)`` the read-out ``g((x, y), w) = (df/dw)^T y`` equals the gradient
of ``w -> e(x*(w))``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .contraction import DEFAULT_MAX_STEPS, StepMap, deep_solve
from .norms import EUCLIDEAN, NormSpec, dual, weighted_pair

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LipschitzBundle:
    """Derivative bounds for a system ``f`` and loss ``e``.

    Attributes
    ----------
    beta_x : contraction coefficient of ``f`` in the state norm, ``< 1``.
    L_x2_f : Lipschitz constant of ``df/dx`` in ``x`` (induced state norm).
    L_w_f : bound on ``df/dw`` as an operator from the parameter norm to the state norm.
    L_w2_f : Lipschitz constant of ``df/dw`` in ``w``.
    L_xw_f : Lipschitz constant of ``df/dw`` in ``x``.
    L_x_e : bound on ``de/dx`` in the dual state norm.
    L_x2_e : Lipschitz constant of ``de/dx`` (state norm to dual norm).
    """

    beta_x: float
    L_x2_f: float
    L_w_f: float
    L_w2_f: float
    L_xw_f: float
    L_x_e: float
    L_x2_e: float

    def __post_init__(self):
        for name, val in self.__dict__.items():
            if not (math.isfinite(val) and val >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {val}")
        if self.beta_x >= 1:
            raise ValueError(f"beta_x must be < 1, got {self.beta_x}")

    @property
    def y_radius(self) -> float:
        """Radius of the dual-norm ball the adjoint variable never leaves."""
        return self.L_x_e / (1.0 - self.beta_x)


class DifferentiableSystem:
    """A parameterised step map exposing vector-Jacobian products.

    Subclasses implement :meth:`step`, :meth:`vjp_x` and :meth:`vjp_w` on flat
    state vectors of length ``state_dim`` and parameter vectors of length
    ``param_dim``.
    """

    state_dim: int
    param_dim: int
    state_norm: NormSpec
    param_norm: NormSpec = EUCLIDEAN
    lipschitz: Optional[LipschitzBundle] = None

    def step(self, x, w):
        raise NotImplementedError

    def vjp_x(self, x, w, y):
        """``(df/dx)^T y``."""
        raise NotImplementedError

    def vjp_w(self, x, w, y):
        """``(df/dw)^T y`` as a parameter-space vector."""
        raise NotImplementedError

    def step_and_vjp_x(self, x, w, y):
        """``(f(x, w), (df/dx)^T y)``; override when the two share work."""
        return self.step(x, w), self.vjp_x(x, w, y)

    def step_map(self) -> StepMap:
        beta = self.lipschitz.beta_x if self.lipschitz is not None else None
        return StepMap(self.step, self.state_norm, beta)


class FunctionalSystem(DifferentiableSystem):
    """A :class:`DifferentiableSystem` assembled from plain callables."""

    def __init__(self, step, vjp_x, vjp_w, state_dim, param_dim, state_norm, param_norm=EUCLIDEAN, lipschitz=None):
        self._step, self._vjp_x, self._vjp_w = step, vjp_x, vjp_w
        self.state_dim = int(state_dim)
        self.param_dim = int(param_dim)
        self.state_norm = state_norm
        self.param_norm = param_norm
        self.lipschitz = lipschitz

    def step(self, x, w):
        return np.asarray(self._step(x, w), dtype=float)

    def vjp_x(self, x, w, y):
        return np.asarray(self._vjp_x(x, w, y), dtype=float)

    def vjp_w(self, x, w, y):
        return np.asarray(self._vjp_w(x, w, y), dtype=float)


@dataclass(frozen=True)
class LossFunction:
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    # (L_x e, L_{x^2} e) when known
    lipschitz: Optional[Tuple[float, float]] = None


@dataclass(frozen=True)
class AdjointState:
    """Primal state ``x`` and adjoint covector ``y`` of equal length."""

    x: np.ndarray
    y: np.ndarray

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n))

    @classmethod
    def from_vector(cls, v, n):
        v = np.asarray(v, dtype=float)
        return cls(v[:n], v[n:])

    @property
    def vector(self):
        return np.concatenate([self.x, self.y])


def adjoint_norm(sys: DifferentiableSystem, p1: float = 1.0, p2: float = 1.0) -> NormSpec:
    """``p1 * ||x||_X + p2 * ||y||_{X*}`` on concatenated ``(x, y)`` vectors."""
    n = sys.state_dim
    return weighted_pair(p1, sys.state_norm, dual(sys.state_norm), (n, n), p2=p2)


def adjoint_step(sys: DifferentiableSystem, loss: LossFunction, z: AdjointState, w) -> AdjointState:
    # both components read the incoming (x, y)
    x, y = z.x, z.y
    fx, jy = sys.step_and_vjp_x(x, w, y)
    return AdjointState(fx, jy + loss.gradient(x))


def adjoint_gradient(sys: DifferentiableSystem, z: AdjointState, w):
    return sys.vjp_w(z.x, w, z.y)


def adjoint_map(sys: DifferentiableSystem, loss: LossFunction, p1: float = 1.0) -> StepMap:
    """The adjoint system as a :class:`StepMap` on concatenated ``(x, y)`` vectors."""
    n = sys.state_dim

    def step(v, w):
        x, y = v[:n], v[n:]
        fx, jy = sys.step_and_vjp_x(x, w, y)
        return np.concatenate([fx, jy + loss.gradient(x)])

    beta = None
    if sys.lipschitz is not None:
        beta = (sys.lipschitz.beta_x + 1.0) / 2.0
    return StepMap(step, adjoint_norm(sys, p1), beta)


def weight_p1(bundle: LipschitzBundle) -> float:
    """Weight on the primal block that makes the adjoint system a ``(beta_x + 1)/2`` contraction.

    May return 0 for affine ``f`` with a loss of zero curvature; callers
    substitute 1 in that case (see :func:`z_weight`).
    """
    if bundle.beta_x >= 1:
        raise ValueError("beta_x must be < 1")
    gap = 1.0 - bundle.beta_x
    return 2.0 * (bundle.L_x2_f * bundle.L_x_e / gap**2 + bundle.L_x2_e / gap)


def z_weight(bundle: LipschitzBundle) -> float:
    p1 = weight_p1(bundle)
    return p1 if p1 > 0 else 1.0


@dataclass(frozen=True)
class ScheduleConstants:
    alpha_c: float
    alpha_eps: float
    alpha_delta: float
    beta: float
    L_wT: float
    L_zg: float
    L_wg: float
    c: float
    epsilon: float
    delta: float
    p1: float = 1.0

    @property
    def A(self) -> float:
        r = self.beta / (1.0 - self.beta)
        return (
            (self.L_wg + self.L_zg * self.L_wT / (1.0 - self.beta)) * self.epsilon
            + self.L_zg * self.c
            + self.L_zg * r * self.delta
        )

    @property
    def B(self) -> float:
        return self.L_zg * (self.c + self.beta / (1.0 - self.beta) * self.delta)

    @property
    def one_minus_A(self) -> float:
        """Closed form of ``1 - A`` in terms of the three alphas.

        Equals ``(1 - a_c)(1 - a_eps)(1 - a_delta a_c / (1 + a_c))``, which is
        never below the ``a_delta``-free product ``(1 - a_c)(1 - a_eps)(1 - a_c / (1 + a_c))``.
        """
        ac = self.alpha_c
        return (1.0 - ac) * (1.0 - self.alpha_eps) * (1.0 - self.alpha_delta * ac / (1.0 + ac))

    @property
    def gradient_lipschitz(self) -> float:
        """A Lipschitz constant of ``w -> g(z*(w), w)``; the step size never exceeds its inverse."""
        return self.L_zg * self.L_wT / (1.0 - self.beta) + self.L_wg


def schedule_constants(beta, L_wT, L_zg, L_wg, alpha_c, alpha_eps, alpha_delta, p1=1.0) -> ScheduleConstants:
    """Threshold ``c``, step size ``epsilon`` and time-scale ``delta`` from contraction data."""
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    for name, a in (("alpha_c", alpha_c), ("alpha_eps", alpha_eps), ("alpha_delta", alpha_delta)):
        if not 0 < a < 1:
            raise ValueError(f"{name} must lie in (0, 1), got {a}")
    if L_zg <= 0:
        raise ValueError("L_zg must be positive")
    L = L_wg + L_zg * L_wT / (1.0 - beta)
    if not L > 0:
        raise ValueError("the gradient read-out has Lipschitz constant 0; no step size bound exists")
    c = alpha_c / L_zg
    epsilon = alpha_eps * (1.0 - alpha_c) / L
    delta = alpha_delta * alpha_c * (1.0 - alpha_c) * (1.0 - alpha_eps) * (1.0 - beta) / (
        (1.0 + alpha_c) * L_zg * beta
    )
    return ScheduleConstants(
        alpha_c=alpha_c, alpha_eps=alpha_eps, alpha_delta=alpha_delta,
        beta=beta, L_wT=L_wT, L_zg=L_zg, L_wg=L_wg,
        c=c, epsilon=epsilon, delta=delta, p1=p1,
    )


def certified_constants(bundle: LipschitzBundle, alpha_c: float, alpha_eps: float, alpha_delta: float) -> ScheduleConstants:
    """Schedule constants with provable tracking and descent for the adjoint system.

    ``alpha_c`` must be below 1/2 so that the gradient estimates are
    admissible descent directions.  The boundary value 1/2 is accepted with a
    warning: tracking still holds but the guaranteed decrease per step is zero.
    """
    if not 0 < alpha_c <= 0.5:
        raise ValueError(f"alpha_c must lie in (0, 1/2), got {alpha_c}")
    if alpha_c == 0.5:
        log.warning("alpha_c = 1/2 gives no guaranteed descent")
    b = bundle
    gap = 1.0 - b.beta_x
    p = z_weight(b)
    beta = (b.beta_x + 1.0) / 2.0
    L_wT = p * b.L_w_f + b.L_xw_f * b.L_x_e / gap
    if b.L_x2_f > 0:
        L_zg = max(b.L_w_f, gap * b.L_xw_f / (2.0 * b.L_x2_f))
    else:
        L_zg = b.L_w_f
    L_wg = b.L_w2_f * b.L_x_e / gap
    sc = schedule_constants(beta, L_wT, L_zg, L_wg, alpha_c, alpha_eps, alpha_delta, p1=p)
    if not sc.A < 1:
        raise ArithmeticError(f"composite constant A = {sc.A} is not below 1")
    return sc


def solve_primal(sys: DifferentiableSystem, w, tol: float, x0=None, max_steps=DEFAULT_MAX_STEPS, relative=False):
    x0 = np.zeros(sys.state_dim) if x0 is None else x0
    return deep_solve(sys.step_map(), x0, w, tol, max_steps, relative=relative)


def solve_adjoint(sys: DifferentiableSystem, loss: LossFunction, x_star, w, tol: float, y0=None,
                  max_steps=DEFAULT_MAX_STEPS, relative=False):
    """Fixed point of ``y -> (df/dx)^T y + de/dx`` with ``x`` frozen at ``x_star``."""
    rhs = loss.gradient(x_star)
    ymap = StepMap(lambda y, w_: sys.vjp_x(x_star, w_, y) + rhs, dual(sys.state_norm))
    y0 = np.zeros(sys.state_dim) if y0 is None else y0
    return deep_solve(ymap, y0, w, tol, max_steps, relative=relative)


def objective(sys: DifferentiableSystem, loss: LossFunction, w, tol: float = 1e-10, x0=None, relative=False,
              max_steps=DEFAULT_MAX_STEPS):
    """``e(x*(w))`` with ``x*`` from a deep solve; returns ``(value, x_star)``."""
    x_star = solve_primal(sys, w, tol, x0, max_steps, relative=relative)
    return float(loss.value(x_star)), x_star


def implicit_gradient(sys: DifferentiableSystem, loss: LossFunction, w, tol: float = 1e-13, x0=None, relative=False):
    """Exact-equilibrium adjoint gradient of ``w -> e(x*(w))``."""
    x_star = solve_primal(sys, w, tol, x0, relative=relative)
    y_star = solve_adjoint(sys, loss, x_star, w, tol, relative=relative)
    return adjoint_gradient(sys, AdjointState(x_star, y_star), w)


def fd_gradient(sys: DifferentiableSystem, loss: LossFunction, w, h: float = 1e-5, tol: float = 1e-13, x0=None):
    """Central differences of ``w -> e(x*(w))``; coordinate ``k`` uses step ``h * max(1, |w_k|)``."""
    w = np.asarray(w, dtype=float)
    x_ref = solve_primal(sys, w, tol, x0)
    grad = np.zeros_like(w)
    for k in range(w.size):
        hk = h * max(1.0, abs(w[k]))
        wp, wm = w.copy(), w.copy()
        wp[k] += hk
        wm[k] -= hk
        ep = loss.value(solve_primal(sys, wp, tol, x_ref))
        em = loss.value(solve_primal(sys, wm, tol, x_ref))
        grad[k] = (ep - em) / (wp[k] - wm[k])
    return grad
