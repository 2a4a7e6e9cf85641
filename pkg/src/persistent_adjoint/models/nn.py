"""Logistic attractor networks ``x_i <- sigmoid(sum_j w_ij x_j + u_i)``."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit

from ..adjoint import DifferentiableSystem, LipschitzBundle
from ..norms import FROBENIUS, MAX, NormSpec, operator_norm_upper, stacked_sum

# sup |sigmoid'| and sup |sigmoid''|
SIGMOID_SLOPE = 0.25
SIGMOID_CURVATURE = 1.0 / (6.0 * math.sqrt(3.0))


def nn_step(x, w, u):
    """One synchronous update of every node.  Batched over leading axes of ``x``/``u``."""
    x = np.asarray(x, dtype=float)
    return expit(x @ np.asarray(w, dtype=float).T + u)


def nn_vjps(x, w, u, y):
    """Return ``((df/dx)^T y, (df/dw)^T y)`` with the latter as an ``n x n`` matrix.

    With ``D = diag(s (1 - s))`` at ``s = f(x)``: ``df/dx = D w`` and
    ``df_i/dw_ij = D_ii x_j``.  Leading batch axes are summed out of the
    weight product.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    s = expit(x @ w.T + u)
    dy = s * (1.0 - s) * np.asarray(y, dtype=float)
    vx = dy @ w
    n = w.shape[0]
    vw = dy.reshape(-1, n).T @ x.reshape(-1, n)
    return vx, vw


def nn_contraction_bound(w, norm: NormSpec = MAX) -> float:
    """``||w|| / 4`` in the matrix norm induced by an absolute vector norm; may exceed 1."""
    if norm.kind in ("max", "sum"):
        return operator_norm_upper(w, norm) * SIGMOID_SLOPE
    if norm.kind == "euclidean":
        return float(np.linalg.norm(np.asarray(w, dtype=float), 2)) * SIGMOID_SLOPE
    raise ValueError(f"{norm.kind} is not an absolute vector norm")


class NnSystem(DifferentiableSystem):
    """``m`` copies of one network, each driven by its own input vector.

    The parameter vector is the row-major flattened weight matrix; states
    are flattened ``(m, n)`` arrays and use the sum-of-max norm.
    """

    def __init__(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        self.u = u
        self.m, self.n = u.shape
        self.state_dim = self.m * self.n
        self.param_dim = self.n * self.n
        self.state_norm = stacked_sum(self.m, self.n)
        self.param_norm = FROBENIUS
        self.lipschitz = None

    def matrix(self, theta):
        return np.asarray(theta, dtype=float).reshape(self.n, self.n)

    def params(self, w):
        return np.asarray(w, dtype=float).ravel().copy()

    def step(self, x, theta):
        x = np.asarray(x, dtype=float).reshape(self.m, self.n)
        return nn_step(x, self.matrix(theta), self.u).ravel()

    def vjp_x(self, x, theta, y):
        x = np.asarray(x, dtype=float).reshape(self.m, self.n)
        vx, _ = nn_vjps(x, self.matrix(theta), self.u, np.reshape(y, (self.m, self.n)))
        return vx.ravel()

    def vjp_w(self, x, theta, y):
        x = np.asarray(x, dtype=float).reshape(self.m, self.n)
        _, vw = nn_vjps(x, self.matrix(theta), self.u, np.reshape(y, (self.m, self.n)))
        return vw.ravel()

    def contraction_bound(self, theta) -> float:
        return nn_contraction_bound(self.matrix(theta), MAX)

    def state_box(self, theta):
        return np.zeros(self.state_dim), np.ones(self.state_dim)

    def lipschitz_bundle(self, theta, loss_lipschitz) -> LipschitzBundle:
        """Derivative bounds on the unit box at the given weights (requires ``||w||_inf < 4``).

        The ``w``-Lipschitz entries are local to ``theta``.
        """
        w_inf = operator_norm_upper(self.matrix(theta), MAX)
        beta = w_inf * SIGMOID_SLOPE
        root_n = math.sqrt(self.n)
        L_e, L_e2 = loss_lipschitz
        return LipschitzBundle(
            beta_x=beta,
            L_x2_f=SIGMOID_CURVATURE * w_inf**2,
            L_w_f=self.m * SIGMOID_SLOPE * root_n,
            L_w2_f=self.m * SIGMOID_CURVATURE * self.n,
            L_xw_f=(SIGMOID_SLOPE + SIGMOID_CURVATURE * w_inf) * root_n,
            L_x_e=L_e,
            L_x2_e=L_e2,
        )
