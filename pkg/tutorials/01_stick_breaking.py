"""
Stick-breaking weights along a distance ordering.

Draws one Poisson configuration of atoms, orders them by proximity to two
nearby space-time points and shows how much weight the two points share.
"""

import numpy as np

from kcoddp.covariance import corr_G, overlap_sets
from kcoddp.geometry import ComputationalBox, compute_ordering, sample_poisson_configuration
from kcoddp.oddp import sample_sticks, stick_weights, tail_moment_U, truncation_bound

rng = np.random.default_rng(0)
alpha = 1.0
box = ComputationalBox([0, 0, 0], [4, 4, 4])
config = sample_poisson_configuration(box, 1.0, rng)
print(f"{len(config)} atoms in a box of volume {box.volume:g}")

x1, x2 = np.array([1.0, 1.0, 2.0]), np.array([1.3, 1.1, 1.9])
o1 = compute_ordering(x1, config)
o2 = compute_ordering(x2, config)
print("first atoms for x1:", o1[:6])
print("first atoms for x2:", o2[:6])
print(f"ordering correlation corr_G = {corr_G(alpha, overlap_sets(o1, o2), tail='common'):.3f}")

# only atoms in the relevant set of x1 enter its ordering
V = sample_sticks(alpha, len(config), rng)
w1 = stick_weights(V[o1])
print(f"{len(o1)} eligible atoms; weights on the first three: {w1[:3].round(3)}, total {w1.sum():.3f}")

# expected squared weight from atom N onwards, and the truncation bound
for N in (1, 5, 10):
    print(f"N={N:2d}  E sum_(i>=N) p_i^2 = {tail_moment_U(N, 2, alpha):.2e}"
          f"  bound(M=1, n=30) = {truncation_bound(M=1, n=30, alpha=alpha, N=N):.3g}")
