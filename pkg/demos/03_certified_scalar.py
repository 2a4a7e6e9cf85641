"""
Certified step sizes on a scalar problem
========================================

For ``f(x, w) = x/2 + w`` and ``e(x) = x^2/2`` every derivative bound is
known, so the threshold, step size and time-scale factor can be computed
rather than tuned.  The run then tracks the moving equilibrium and
decreases the objective at every step.
"""

import numpy as np

from persistent_adjoint import RunConfig, adjoint_map, certified_constants, deep_solve, norm, run
from persistent_adjoint.adjoint import solve_adjoint, solve_primal
from persistent_adjoint.models import linear_system
from persistent_adjoint.models.linear import exact_objective

system, loss = linear_system(0.5, radius=2.0)
sc = certified_constants(system.lipschitz, alpha_c=0.4, alpha_eps=0.5, alpha_delta=0.5)
print(f"c = {sc.c:g}, epsilon = {sc.epsilon:g}, delta = {sc.delta:g}, 1 - A = {sc.one_minus_A:.4f}")

# start the auxiliary state at its equilibrium
w0 = np.array([1.0])
x0 = solve_primal(system, w0, 1e-15, relative=True)
z0 = np.concatenate([x0, solve_adjoint(system, loss, x0, w0, 1e-15, relative=True)])

cfg = RunConfig.certified(sc, w0, 400, z0=z0, keep_history=True)
tr = run(system, loss, cfg).trace

T = adjoint_map(system, loss, sc.p1)
ratios = []
for k in range(1, len(tr) + 1):
    z_star = deep_solve(T, tr.states[k - 1], tr.params[k - 1], 1e-13, relative=True)
    ratios.append(norm(T.state_norm, tr.states[k] - z_star) / (sc.c * tr.grad_norm[k - 1]))
print(f"worst tracking ratio (must stay below 1): {max(ratios):.3f}")

E = [exact_objective(w) for w in tr.params]
print(f"objective {E[0]:.3g} -> {E[-1]:.3g}, monotone: {bool(np.all(np.diff(E) <= 0))}")
print(f"inner steps per update: first {tr.inner_steps[:5]}, last {tr.inner_steps[-5:]}")
