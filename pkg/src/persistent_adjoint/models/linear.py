"""Scalar affine test problem with exactly known derivative bounds.

``f(x, w) = a x + w`` and ``e(x) = x^2 / 2``, so ``x*(w) = w / (1 - a)`` and
``E(w) = w^2 / (2 (1 - a)^2)``.  Every constant of the certified schedule is
available in closed form, which makes it the test bed for the tracking and
descent guarantees.
"""

from __future__ import annotations

import numpy as np

from ..adjoint import FunctionalSystem, LipschitzBundle, LossFunction
from ..norms import EUCLIDEAN, MAX


def linear_system(a: float = 0.5, radius: float = None):
    """Return ``(system, loss)`` for the scalar problem.

    ``radius`` bounds ``|x|`` on the region the run stays in; when given, the
    system carries the exact Lipschitz bundle for that region.
    """
    if not abs(a) < 1:
        raise ValueError("|a| must be below 1 for a contraction")

    def step(x, w):
        return a * np.asarray(x, dtype=float) + w

    def vjp_x(x, w, y):
        return a * np.asarray(y, dtype=float)

    def vjp_w(x, w, y):
        return np.asarray(y, dtype=float).copy()

    bundle = None
    if radius is not None:
        bundle = LipschitzBundle(
            beta_x=abs(a), L_x2_f=0.0, L_w_f=1.0, L_w2_f=0.0, L_xw_f=0.0,
            L_x_e=float(radius), L_x2_e=1.0,
        )
    system = FunctionalSystem(step, vjp_x, vjp_w, 1, 1, MAX, EUCLIDEAN, bundle)
    loss = LossFunction(
        value=lambda x: 0.5 * float(np.asarray(x) @ np.asarray(x)),
        gradient=lambda x: np.asarray(x, dtype=float).copy(),
        lipschitz=None if radius is None else (float(radius), 1.0),
    )
    return system, loss


def exact_objective(w, a=0.5):
    return float(np.sum(np.asarray(w) ** 2)) / (2.0 * (1.0 - a) ** 2)


def exact_gradient(w, a=0.5):
    return np.asarray(w, dtype=float) / (1.0 - a) ** 2
