"""
Training an attractor network
=============================

Fit the weights of a logistic recurrent network so that its equilibria
match targets.  The max-norm contraction bound ``||W||/4`` is recorded each
step; it may pass 1 during training while the iteration keeps converging.
"""

import numpy as np

from persistent_adjoint import RunConfig, objective, run
from persistent_adjoint.models import generate_dataset, make_parallel

ds = generate_dataset("nn", n=5, m=10, seed=0)
system, loss = make_parallel("nn", ds.inputs, ds.targets)
theta0 = system.params(ds.w0)

cfg = RunConfig.empirical(epsilon=0.4, delta=0.01, w0=theta0, max_iterations=5000, objective_stride=500)
result = run(system, loss, cfg, contraction_bound=system.contraction_bound)
tr = result.trace

for k in range(499, len(tr), 1000):
    print(f"iteration {k + 1:5d}: objective {tr.objective[k]:.3e}, bound {tr.contraction_bound[k]:.3f}, "
          f"inner steps {tr.inner_steps[k]}")

E0 = objective(system, loss, theta0)[0]
E1 = objective(system, loss, result.w)[0]
print(f"objective {E0:.3e} -> {E1:.3e}")
print("learned weights:\n", np.round(system.matrix(result.w), 2))
