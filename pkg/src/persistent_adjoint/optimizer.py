"""Persistent adjoint method with dynamic time-scaling.

Each outer iteration relaxes the adjoint system ``T`` from the previous
auxiliary state until one step moves it by at most ``c_n``, takes a gradient
step with the read-out ``g``, and sets the next threshold to ``delta`` times
the size of that step's gradient estimate::

    c_1 = delta * ||g(z_0, w_0)||
    repeat T(., w_{n-1}) from z_{n-1} until ||z^i - z^{i-1}|| <= c_n  ->  z_n
    w_n = w_{n-1} - epsilon * g(z_n, w_{n-1})
    c_{n+1} = delta * ||g(z_n, w_{n-1})||
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .adjoint import (
    AdjointState,
    DifferentiableSystem,
    LossFunction,
    ScheduleConstants,
    adjoint_map,
    objective,
)
from .contraction import DEFAULT_MAX_STEPS, NonConvergenceError, iterate_to_tolerance
from .norms import norm

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("iter", "c_n", "inner_steps", "grad_norm", "param_norm", "objective", "contraction_bound")


class DivergenceError(RuntimeError):
    """Non-finite values appeared during a run; ``trace`` holds the iterations completed."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


@dataclass
class RunConfig:
    """Inputs of one optimisation run.

    Build with :meth:`empirical` (hand-picked ``epsilon``/``delta``, unit
    weight on the primal block of the auxiliary norm) or :meth:`certified`
    (all three taken from :class:`ScheduleConstants`).
    """

    epsilon: float
    delta: float
    w0: np.ndarray
    max_iterations: int
    z0: Optional[np.ndarray] = None
    p1: float = 1.0
    inner_max_steps: int = DEFAULT_MAX_STEPS
    g_tol: Optional[float] = None
    objective_stride: int = 0
    objective_tol: float = 1e-10
    objective_max_steps: int = 100_000
    keep_history: bool = False
    # relative round-off floor for the inner-loop test
    resolution: float = 64 * np.finfo(float).eps
    constants: Optional[ScheduleConstants] = None

    def __post_init__(self):
        if not (self.epsilon > 0 and self.delta > 0):
            raise ValueError("epsilon and delta must be positive")
        if self.max_iterations < 1 or self.inner_max_steps < 1:
            raise ValueError("iteration budgets must be at least 1")
        if self.p1 <= 0:
            raise ValueError("p1 must be positive")
        self.w0 = np.array(self.w0, dtype=float).ravel()

    @property
    def mode(self):
        return "certified" if self.constants is not None else "empirical"

    @classmethod
    def empirical(cls, epsilon, delta, w0, max_iterations, **kwargs):
        return cls(epsilon=epsilon, delta=delta, w0=w0, max_iterations=max_iterations, **kwargs)

    @classmethod
    def certified(cls, constants: ScheduleConstants, w0, max_iterations, **kwargs):
        return cls(
            epsilon=constants.epsilon, delta=constants.delta, w0=w0, max_iterations=max_iterations,
            p1=constants.p1, constants=constants, **kwargs,
        )


@dataclass
class OptimizationTrace:
    """Per-iteration record; list index ``k`` holds outer iteration ``n = k + 1``.

    ``params``/``grads``/``states`` are filled only with ``keep_history``:
    ``params[0]`` is ``w_0`` and ``params[n]`` is ``w_n``, ``grads[n-1]`` is
    ``g(z_n, w_{n-1})`` and ``states[n]`` is ``z_n`` (``states[0] = z_0``).
    """

    epsilon: float
    delta: float
    initial_grad_norm: float = float("nan")
    c: List[float] = field(default_factory=list)
    inner_steps: List[int] = field(default_factory=list)
    grad_norm: List[float] = field(default_factory=list)
    param_norm: List[float] = field(default_factory=list)
    objective: List[Optional[float]] = field(default_factory=list)
    contraction_bound: List[Optional[float]] = field(default_factory=list)
    params: List[np.ndarray] = field(default_factory=list)
    grads: List[np.ndarray] = field(default_factory=list)
    states: List[np.ndarray] = field(default_factory=list)

    def __len__(self):
        return len(self.c)

    @property
    def total_inner_steps(self):
        return int(sum(self.inner_steps))

    def rows(self):
        for k in range(len(self)):
            yield (k + 1, self.c[k], self.inner_steps[k], self.grad_norm[k], self.param_norm[k],
                   self.objective[k], self.contraction_bound[k])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(TRACE_COLUMNS)
            for row in self.rows():
                out.writerow([_fmt(v) for v in row])


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


class TraceFormatError(ValueError):
    pass


def read_trace_csv(path) -> OptimizationTrace:
    """Load the columns of a trace CSV; ``epsilon``/``delta`` are not stored and come back as NaN."""
    trace = OptimizationTrace(epsilon=float("nan"), delta=float("nan"))
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise TraceFormatError(f"{path}: line 1: empty trace file")
        if tuple(header) != TRACE_COLUMNS:
            raise TraceFormatError(f"{path}: line 1: unexpected header {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(TRACE_COLUMNS):
                raise TraceFormatError(f"{path}: line {lineno}: expected {len(TRACE_COLUMNS)} fields, got {len(row)}")
            try:
                it = int(row[0])
                if it != len(trace) + 1:
                    raise ValueError(f"iteration {it} out of sequence")
                trace.c.append(float(row[1]))
                trace.inner_steps.append(int(row[2]))
                trace.grad_norm.append(float(row[3]))
                trace.param_norm.append(float(row[4]))
                trace.objective.append(float(row[5]) if row[5] else None)
                trace.contraction_bound.append(float(row[6]) if row[6] else None)
            except ValueError as exc:
                raise TraceFormatError(f"{path}: line {lineno}: {exc}") from None
    if not len(trace):
        raise TraceFormatError(f"{path}: trace has no iterations")
    return trace


@dataclass
class RunResult:
    trace: OptimizationTrace
    w: np.ndarray
    z: AdjointState


def run(
    sys: DifferentiableSystem,
    loss: LossFunction,
    config: RunConfig,
    contraction_bound: Optional[Callable[[np.ndarray], float]] = None,
) -> RunResult:
    """Run the persistent adjoint method.

    ``contraction_bound``, when given, maps the current parameters to a
    contraction-coefficient bound recorded in the trace.  Inner-loop failure
    re-raises :class:`NonConvergenceError` and non-finite values raise
    :class:`DivergenceError`; both carry the partial trace as ``.trace``.
    """
    n_x = sys.state_dim
    T = adjoint_map(sys, loss, config.p1)
    w = config.w0.copy()
    if w.size != sys.param_dim:
        raise ValueError(f"w0 has length {w.size}, system expects {sys.param_dim}")
    z = np.zeros(2 * n_x) if config.z0 is None else np.array(config.z0, dtype=float).ravel()
    if z.size != 2 * n_x:
        raise ValueError(f"z0 has length {z.size}, expected {2 * n_x}")

    trace = OptimizationTrace(config.epsilon, config.delta)
    g = sys.vjp_w(z[:n_x], w, z[n_x:])
    trace.initial_grad_norm = norm(sys.param_norm, g)
    c = config.delta * trace.initial_grad_norm
    if config.keep_history:
        trace.params.append(w.copy())
        trace.states.append(z.copy())

    for n in range(1, config.max_iterations + 1):
        try:
            inner = iterate_to_tolerance(T, z, w, c, config.inner_max_steps, config.resolution)
        except NonConvergenceError as exc:
            if not math.isfinite(exc.last_increment_norm):
                raise DivergenceError(f"iteration {n}: auxiliary state became non-finite", trace) from exc
            exc.trace = trace
            raise
        z = inner.final_state
        g = sys.vjp_w(z[:n_x], w, z[n_x:])
        g_norm = norm(sys.param_norm, g)
        if not (math.isfinite(g_norm) and np.all(np.isfinite(z))):
            raise DivergenceError(f"iteration {n}: gradient estimate became non-finite", trace)
        w = w - config.epsilon * g

        E = None
        if config.objective_stride and (n % config.objective_stride == 0 or n == config.max_iterations):
            try:
                E, _ = objective(sys, loss, w, config.objective_tol, z[:n_x], relative=True,
                                 max_steps=config.objective_max_steps)
            except NonConvergenceError:
                E = float("nan")
        trace.c.append(c)
        trace.inner_steps.append(inner.steps_taken)
        trace.grad_norm.append(g_norm)
        trace.param_norm.append(norm(sys.param_norm, w))
        trace.objective.append(E)
        trace.contraction_bound.append(None if contraction_bound is None else float(contraction_bound(w)))
        if config.keep_history:
            trace.params.append(w.copy())
            trace.grads.append(g.copy())
            trace.states.append(z.copy())

        c = config.delta * g_norm
        if config.g_tol is not None and g_norm <= config.g_tol:
            log.info("gradient estimate %.3g below g_tol after %d iterations", g_norm, n)
            break

    return RunResult(trace, w, AdjointState.from_vector(z, n_x))


@dataclass
class DescentReport:
    k: float
    violations: List[tuple]

    @property
    def ok(self):
        return not self.violations


def descent_constant(epsilon, L, alpha):
    """Guaranteed decrease factor ``k`` per squared gradient norm."""
    r = epsilon * (1.0 - alpha)
    return r * (1.0 - 0.5 * L * r)


def check_descent(trace: OptimizationTrace, objective_values, grad_norms, L, alpha, slack=1e-12) -> DescentReport:
    """Check ``E(w_n) <= E(w_{n-1}) - k ||grad E(w_{n-1})||^2`` along a run.

    ``objective_values[n]`` and ``grad_norms[n]`` are the exact objective and
    gradient norm at ``w_n`` for ``n = 0..N``.  Violations are reported as
    ``(n, E(w_n), bound)`` tuples.
    """
    E = np.asarray(objective_values, dtype=float)
    G = np.asarray(grad_norms, dtype=float)
    k = descent_constant(trace.epsilon, L, alpha)
    violations = []
    for n in range(1, len(E)):
        bound = E[n - 1] - k * G[n - 1] ** 2
        if E[n] > bound + slack:
            violations.append((n, float(E[n]), float(bound)))
    return DescentReport(k, violations)


def check_direction_quality(g_est, g_true, alpha, rtol=1e-12) -> bool:
    """Whether ``||g_est - g_true||_2 <= alpha ||g_est||_2``."""
    g_est = np.asarray(g_est, dtype=float)
    err = np.linalg.norm(g_est - np.asarray(g_true, dtype=float))
    bound = alpha * np.linalg.norm(g_est)
    return bool(err <= bound * (1.0 + rtol))
