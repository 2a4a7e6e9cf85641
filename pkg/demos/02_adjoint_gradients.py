"""
Gradients through a fixed point
===============================

The adjoint read-out at the equilibrium of the auxiliary system gives the
exact gradient of ``w -> e(x*(w))``.  Check it against central differences
on both bundled models.
"""

import numpy as np

from persistent_adjoint import fd_gradient, implicit_gradient
from persistent_adjoint.models import generate_dataset, make_parallel

for kind, n in (("crn", 5), ("nn", 8)):
    ds = generate_dataset(kind, n=n, m=3, seed=42)
    system, loss = make_parallel(kind, ds.inputs, ds.targets)
    theta = system.params(ds.w0)

    g_adj = implicit_gradient(system, loss, theta, tol=1e-13)
    g_fd = fd_gradient(system, loss, theta, h=1e-5, tol=1e-13)
    err = np.max(np.abs(g_adj - g_fd)) / np.max(np.abs(g_fd))
    print(f"{kind}: {theta.size} parameters, relative error {err:.2e}")

# the adjoint needs two fixed-point solves regardless of the parameter count,
# central differences need two per parameter
