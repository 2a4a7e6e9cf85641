"""Heterodimerization reaction networks in log-concentration space.

Simple species ``X_i`` pair up into complexes ``X_{ij}`` at rate ``exp(w_ij)``
and complexes fall apart at unit rate.  Equilibrium log-concentrations of
the simple species are the fixed point of

    f_i(x, w; b) = b_i - log(1 + sum_{j ~ i} exp(w_ij + x_j))

where ``b`` holds log total concentrations and ``j ~ i`` ranges over the
species that react with ``i``.  The free parameters are the rates of the
reacting pairs, one number per unordered pair.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ..adjoint import DifferentiableSystem, LipschitzBundle
from ..norms import FROBENIUS, stacked_sum


def complete_pairs(n):
    return list(combinations(range(n), 2))


def pair_mask(n, pairs=None):
    """Boolean ``n x n`` symmetric adjacency of the reacting pairs."""
    pairs = complete_pairs(n) if pairs is None else pairs
    mask = np.zeros((n, n), dtype=bool)
    for i, j in pairs:
        if i == j:
            raise ValueError("a species cannot react with itself")
        mask[i, j] = mask[j, i] = True
    return mask


def _log_weights(x, w, mask):
    # a[..., i, j] = w_ij + x_j on reacting pairs, -inf elsewhere
    x = np.asarray(x, dtype=float)
    return np.where(mask, w, -np.inf) + x[..., None, :]


def _log_denominator(a):
    # log(1 + sum_j exp(a_ij)), shifted so no exponent is positive
    shift = np.maximum(a.max(axis=-1), 0.0)
    return shift + np.log(np.exp(-shift) + np.exp(a - shift[..., None]).sum(axis=-1))


def crn_step(x, w, b, mask=None):
    """One application of the log-space equilibrium map.

    ``x`` and ``b`` may carry leading batch dimensions (one row per
    instance); ``w`` is the symmetric ``n x n`` log-rate matrix whose
    diagonal is ignored.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("crn_step requires finite states")
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    mask = pair_mask(n) if mask is None else mask
    return np.asarray(b, dtype=float) - _log_denominator(_log_weights(x, w, mask))


def crn_jacobian_weights(x, w, mask=None):
    """``P_ij = exp(w_ij + x_j) / (1 + sum_k exp(w_ik + x_k))``; the state Jacobian is ``-P``."""
    w = np.asarray(w, dtype=float)
    mask = pair_mask(w.shape[0]) if mask is None else mask
    a = _log_weights(x, w, mask)
    return np.exp(a - _log_denominator(a)[..., None])


def crn_vjps(x, w, b, y, mask=None):
    """Return ``((df/dx)^T y, (df/dw)^T y)``.

    The parameter product is a symmetric matrix: the ``(i, j)`` and
    ``(j, i)`` Jacobian entries both feed the single rate of the pair
    ``{i, j}``.  Leading batch dimensions of ``x``/``y`` are summed out of
    the parameter product.
    """
    P = crn_jacobian_weights(x, w, mask)
    y = np.asarray(y, dtype=float)
    G = -y[..., :, None] * P
    vx = G.sum(axis=-2)
    Gw = G.reshape(-1, *G.shape[-2:]).sum(axis=0)
    return vx, Gw + Gw.T


def crn_contraction_bound(w, b, mask=None) -> float:
    """``M / (1 + M)`` with ``M = max_i sum_{j~i} exp(w_ij) * max ||exp(b)||_inf``.

    ``b`` may be a single vector or a stack of vectors (one per instance);
    the stacked form bounds the parallel system in the sum-of-max norm.
    """
    w = np.asarray(w, dtype=float)
    mask = pair_mask(w.shape[0]) if mask is None else mask
    row = np.where(mask, np.exp(np.where(mask, w, 0.0)), 0.0).sum(axis=1).max()
    M = row * float(np.exp(np.max(b)))
    return M / (1.0 + M)


def crn_equilibrium_concentrations(x_star, w, mask=None):
    """Complex concentrations ``exp(w_ij + x_i + x_j)`` as a symmetric matrix (zero off the pair set)."""
    x_star = np.asarray(x_star, dtype=float)
    w = np.asarray(w, dtype=float)
    mask = pair_mask(w.shape[0]) if mask is None else mask
    out = np.exp(np.where(mask, w, 0.0) + x_star[:, None] + x_star[None, :])
    return np.where(mask, out, 0.0)


def crn_equilibrium_map_F(x, w, B, mask=None):
    """Concentration-space map ``F_i(x) = B_i / (1 + sum_j x_j exp(w_ij))``."""
    x = np.asarray(x, dtype=float)
    B = np.asarray(B, dtype=float)
    if np.any(x <= 0) or np.any(B <= 0):
        raise ValueError("concentrations must be positive")
    w = np.asarray(w, dtype=float)
    mask = pair_mask(w.shape[0]) if mask is None else mask
    rates = np.where(mask, np.exp(np.where(mask, w, 0.0)), 0.0)
    return B / (1.0 + rates @ x)


def mass_action_residuals(x, complexes, w, B, mask=None):
    """Stationarity and conservation residuals in concentration space.

    Returns ``(simple, complex, conservation)``: the right-hand sides of the
    mass-action rate equations for simple and complex species, and
    ``x_i + sum_j x_ij - B_i``.
    """
    w = np.asarray(w, dtype=float)
    mask = pair_mask(w.shape[0]) if mask is None else mask
    rates = np.where(mask, np.exp(np.where(mask, w, 0.0)), 0.0)
    formation = rates * np.outer(x, x)
    simple = complexes.sum(axis=1) - formation.sum(axis=1)
    cplx = np.where(mask, formation - complexes, 0.0)
    conservation = x + complexes.sum(axis=1) - B
    return simple, cplx, conservation


class CrnSystem(DifferentiableSystem):
    """``m`` heterodimerization networks sharing one rate matrix.

    States are flattened ``(m, n)`` arrays of log-concentrations; the
    parameter vector holds one log-rate per reacting pair (the upper
    triangle for the complete network).  The state norm is the sum over
    instances of the max-abs norm.
    """

    def __init__(self, b, pairs=None):
        b = np.atleast_2d(np.asarray(b, dtype=float))
        self.b = b
        self.m, self.n = b.shape
        self.pairs = complete_pairs(self.n) if pairs is None else [tuple(sorted(p)) for p in pairs]
        self.mask = pair_mask(self.n, self.pairs)
        self._rows = np.array([p[0] for p in self.pairs], dtype=int)
        self._cols = np.array([p[1] for p in self.pairs], dtype=int)
        self.state_dim = self.m * self.n
        self.param_dim = len(self.pairs)
        self.state_norm = stacked_sum(self.m, self.n)
        self.param_norm = FROBENIUS  # over the stored free entries
        self.lipschitz = None

    def matrix(self, theta):
        """Symmetric rate matrix from the pair parameters (zero off the pair set)."""
        w = np.zeros((self.n, self.n))
        w[self._rows, self._cols] = theta
        w[self._cols, self._rows] = theta
        return w

    def params(self, w):
        return np.asarray(w, dtype=float)[self._rows, self._cols].copy()

    def step(self, x, theta):
        x = np.asarray(x, dtype=float).reshape(self.m, self.n)
        return crn_step(x, self.matrix(theta), self.b, self.mask).ravel()

    def vjp_x(self, x, theta, y):
        x = np.asarray(x, dtype=float).reshape(self.m, self.n)
        y = np.asarray(y, dtype=float).reshape(self.m, self.n)
        vx, _ = crn_vjps(x, self.matrix(theta), self.b, y, self.mask)
        return vx.ravel()

    def step_and_vjp_x(self, x, theta, y):
        x = np.asarray(x, dtype=float).reshape(self.m, self.n)
        y = np.asarray(y, dtype=float).reshape(self.m, self.n)
        a = _log_weights(x, self.matrix(theta), self.mask)
        log_den = _log_denominator(a)
        P = np.exp(a - log_den[..., None])
        vx = -(y[..., :, None] * P).sum(axis=-2)
        return (self.b - log_den).ravel(), vx.ravel()

    def vjp_w(self, x, theta, y):
        x = np.asarray(x, dtype=float).reshape(self.m, self.n)
        y = np.asarray(y, dtype=float).reshape(self.m, self.n)
        _, gw = crn_vjps(x, self.matrix(theta), self.b, y, self.mask)
        return gw[self._rows, self._cols]

    def contraction_bound(self, theta) -> float:
        return crn_contraction_bound(self.matrix(theta), self.b, self.mask)

    def state_box(self, theta):
        """Lower and upper corners of the box every iterate lies in after one step."""
        w = self.matrix(theta)
        lower = self.b - _log_denominator(_log_weights(self.b, w, self.mask))
        return lower.ravel(), self.b.ravel().copy()

    def lipschitz_bundle(self, theta, loss_lipschitz) -> LipschitzBundle:
        """Derivative bounds valid on the invariant box at the given rates.

        The ``w``-Lipschitz entries are local to ``theta``.  ``loss_lipschitz`` is the ``(L_x e, L_{x^2} e)`` pair of the loss on
        that box.  The bounds use ``P_ij <= q_ij = e^{w_ij+b_j} / (1 + e^{w_ij+b_j})``
        and ``dP_ij/dx_k = P_ij (delta_jk - P_ik)``.
        """
        w = self.matrix(theta)
        beta = self.contraction_bound(theta)
        e = np.where(self.mask, w, -np.inf)[None, :, :] + self.b[:, None, :]
        q = np.exp(e - np.logaddexp(0.0, e))
        q_row = q.sum(axis=-1).max()
        curv = (1.0 + beta) * q_row
        L_e, L_e2 = loss_lipschitz
        return LipschitzBundle(
            beta_x=beta,
            L_x2_f=curv,
            L_w_f=self.m * beta,
            L_w2_f=self.m * curv,
            L_xw_f=curv,
            L_x_e=L_e,
            L_x2_e=L_e2,
        )
