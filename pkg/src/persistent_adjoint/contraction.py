"""Fixed-point iteration for contraction mappings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .norms import NormSpec, norm

DEFAULT_MAX_STEPS = 1_000_000


class NonConvergenceError(RuntimeError):
    """Raised when an iteration exhausts its step budget."""

    def __init__(self, message, last_increment_norm=float("nan"), steps=0):
        super().__init__(message)
        self.last_increment_norm = last_increment_norm
        self.steps = steps


@dataclass(frozen=True)
class StepMap:
    """A parameterised map ``z -> step(z, w)`` together with the norm it contracts in.

    ``declared_beta`` is a claimed contraction coefficient.  It is never
    trusted by the solvers; see :func:`measure_contraction_ratio`.
    """

    step: Callable[[np.ndarray, np.ndarray], np.ndarray]
    state_norm: NormSpec
    declared_beta: Optional[float] = None


@dataclass(frozen=True)
class InnerLoopResult:
    final_state: np.ndarray
    steps_taken: int
    last_increment_norm: float


def iterate_to_tolerance(map: StepMap, z0, w, threshold: float, max_steps: int = DEFAULT_MAX_STEPS,
                         resolution: float = 0.0) -> InnerLoopResult:
    """Apply ``map.step`` until the increment norm drops to ``threshold``.

    At least one step is always taken; the increment of the last step is
    compared against the threshold (repeat-until).  With ``threshold == 0``
    the loop stops as soon as a step leaves the state unchanged.

    ``resolution`` is a relative round-off floor: increments at or below
    ``resolution * ||z||`` count as zero.  Iterating a contraction in floating
    point usually ends in a cycle a few ulps wide rather than an exact fixed
    point, so a zero threshold needs a floor to be attainable.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    z = np.asarray(z0, dtype=float)
    inc = float("inf")
    for i in range(1, max_steps + 1):
        z_next = map.step(z, w)
        inc = norm(map.state_norm, z_next - z)
        z = z_next
        if inc <= threshold or (resolution and inc <= resolution * norm(map.state_norm, z)):
            return InnerLoopResult(z, i, inc)
        if not np.isfinite(inc):
            break
    raise NonConvergenceError(
        f"no convergence to threshold {threshold:g} after {i} steps (last increment {inc:g})",
        last_increment_norm=inc,
        steps=i,
    )


def banach_tail_bound(beta: float, increment_norm: float) -> float:
    """Distance bound ``beta / (1 - beta) * increment`` from an iterate to the fixed point."""
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    return beta / (1.0 - beta) * increment_norm


def deep_solve(map: StepMap, z0, w, tol: float, max_steps: int = DEFAULT_MAX_STEPS, relative: bool = False) -> np.ndarray:
    """Iterate to a tight tolerance; used as the ground-truth fixed point.

    The returned point ``z`` satisfies ``||z - step(z, w)|| <= tol``.  With
    ``relative=True`` the tolerance is scaled by ``||z||`` instead, which is
    the only meaningful criterion once the solution itself decays towards
    zero.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    z = np.asarray(z0, dtype=float)
    inc = float("inf")
    for i in range(1, max_steps + 1):
        z_next = map.step(z, w)
        inc = norm(map.state_norm, z_next - z)
        z = z_next
        scale = norm(map.state_norm, z) if relative else 1.0
        if inc <= tol * scale or inc == 0.0:
            return z
        if not np.isfinite(inc):
            break
    raise NonConvergenceError(
        f"deep solve did not reach tol {tol:g} after {i} steps (last increment {inc:g})",
        last_increment_norm=inc,
        steps=i,
    )


def measure_contraction_ratio(map: StepMap, w, sample_pairs: Iterable) -> float:
    """Largest observed ``||T(u) - T(v)|| / ||u - v||`` over the sample pairs."""
    ratios = []
    for u, v in sample_pairs:
        d = norm(map.state_norm, np.asarray(u, dtype=float) - np.asarray(v, dtype=float))
        if d == 0.0:
            continue
        ratios.append(norm(map.state_norm, map.step(u, w) - map.step(v, w)) / d)
    if not ratios:
        raise ValueError("all sample pairs were identical")
    return float(max(ratios))
