"""Parallel combinations of instances sharing a parameter, with a mean squared loss."""

from __future__ import annotations

import numpy as np

from ..adjoint import LossFunction
from .crn import CrnSystem
from .nn import NnSystem


def squared_error_loss(targets) -> LossFunction:
    """``(1/m) sum_i ||x^i - target^i||_2^2`` on flattened ``(m, n)`` states."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    m = targets.shape[0]
    flat = targets.ravel()

    def value(x):
        d = np.asarray(x, dtype=float) - flat
        return float(d @ d) / m

    def gradient(x):
        return (2.0 / m) * (np.asarray(x, dtype=float) - flat)

    return LossFunction(value, gradient)


def squared_error_lipschitz(targets, lower, upper):
    """``(L_x e, L_{x^2} e)`` of the squared loss on the box ``[lower, upper]``.

    The dual of the sum-of-max state norm is the max over instances of the
    1-norm, so the gradient bound is ``(2/m) max_i sum_k max|corner - target|``
    and the curvature bound is ``2n/m``.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    m, n = targets.shape
    lo = np.reshape(lower, (m, n))
    hi = np.reshape(upper, (m, n))
    far = np.maximum(np.abs(lo - targets), np.abs(hi - targets))
    return 2.0 / m * float(far.sum(axis=1).max()), 2.0 * n / m


def make_parallel(kind, inputs, targets, pairs=None):
    """Stacked system and mean squared loss for ``m`` instances.

    ``kind`` is ``"crn"`` (inputs are log total concentrations) or ``"nn"``
    (inputs are external drives).  Returns ``(system, loss)``.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if inputs.shape != targets.shape:
        raise ValueError(f"inputs {inputs.shape} and targets {targets.shape} differ in shape")
    if kind == "crn":
        system = CrnSystem(inputs, pairs)
    elif kind == "nn":
        if pairs is not None:
            raise ValueError("reacting pairs only apply to reaction networks")
        system = NnSystem(inputs)
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    system.targets = targets
    return system, squared_error_loss(targets)


def lipschitz_bundle(system, theta):
    """Bundle for a parallel system and its squared loss at the given parameters."""
    lower, upper = system.state_box(theta)
    return system.lipschitz_bundle(theta, squared_error_lipschitz(system.targets, lower, upper))
