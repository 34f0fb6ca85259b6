"""
Unconditional correlation of f between x0 and points further along a
space-time direction. Reduced Monte Carlo sizes keep this under a minute.
"""

import numpy as np

from kcoddp.covariance import NormalG0, correlation_sweep, spacetime_kernel
from kcoddp.geometry import ComputationalBox

box = ComputationalBox([0, 0, 0], [4, 4, 4])
rows = correlation_sweep(
    x0=[0.5, 0.5, 3.5],
    direction=[1, 1, -1],
    separations=np.geomspace(0.01, 5.0, 8),
    alpha=1.0,
    lam=1.0,
    box=box,
    kernel=spacetime_kernel(phi=3.0),
    g0=NormalG0.bivariate(),
    n_configs=200,
    n_mc=5000,
    rng=1,
)
print("separation  corr      se")
for r in rows:
    print(f"{r.separation:9.3f}  {r.estimate:7.4f}  {r.std_error:.4f}")
