"""
Fit the model to a small synthetic dataset and summarise the posterior
predictive distribution at one held-out point.
"""

import numpy as np

from kcoddp.config import RunConfig
from kcoddp.pipeline import posterior_predictive, prepare
from kcoddp.synthgen import simulate_synthetic
from kcoddp.ttmcmc import run

record = simulate_synthetic(seed=2024, n_grid=35, n_holdout=5)
prep = prepare(record.dataset)
data = prep.dataset
print(f"{len(data)} training points")

arc = run(data, RunConfig(seed=11, n_iter=4000, burn_in=1000, thin=2))
rates = ", ".join(f"{m} {r:.3f}" for m, r in arc.acceptance_rates().items())
print(f"{len(arc)} retained draws; acceptance {rates}")
k = arc.k_values()
print(f"k: median {int(np.median(k))}, range {k.min()}..{k.max()}")
print(f"alpha posterior mean {arc.scalar('alpha').mean():.3f}, sigma {arc.scalar('sigma').mean():.3f}")

x_new = data.points[0]
summary = posterior_predictive(arc, x_new, np.random.default_rng(5))
print(f"predictive at {x_new.round(3)}: median {summary.median:.3f}, "
      f"95% interval [{summary.lower:.3f}, {summary.upper:.3f}], observed y {data.y[0]:.3f}")
