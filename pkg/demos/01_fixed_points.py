"""
Fixed points of a contraction
=============================

Iterate a reaction-network equilibrium map, stop early with a loose
threshold, and compare the early stop against a deep solve using the
a-priori distance bound.
"""

import numpy as np

from persistent_adjoint import StepMap, banach_tail_bound, deep_solve, iterate_to_tolerance
from persistent_adjoint.models import crn_contraction_bound, crn_step
from persistent_adjoint.norms import MAX

rng = np.random.Generator(np.random.PCG64(0))
n = 5
a = rng.standard_normal((n, n))
w = (a + a.T) / 2
b = rng.standard_normal(n)

# the step map in log-concentration space and its certified coefficient
T = StepMap(lambda x, w_: crn_step(x, w_, b), MAX)
beta = crn_contraction_bound(w, b)
print(f"contraction coefficient bound: {beta:.4f}")

# stop as soon as one step moves the state by at most 1e-3
loose = iterate_to_tolerance(T, np.zeros(n), w, 1e-3)
exact = deep_solve(T, np.zeros(n), w, 1e-14)
gap = np.max(np.abs(loose.final_state - exact))
print(f"{loose.steps_taken} steps, last increment {loose.last_increment_norm:.2e}")
print(f"distance to the fixed point {gap:.2e} <= bound {banach_tail_bound(beta, loose.last_increment_norm):.2e}")

# the equilibrium conserves total concentration: e^x (1 + sum_j e^{w_ij + x_j}) = e^b
off = ~np.eye(n, dtype=bool)
lhs = np.exp(exact) * (1 + np.where(off, np.exp(w + exact[None, :]), 0).sum(axis=1))
print("conservation residual:", np.max(np.abs(lhs - np.exp(b))))
