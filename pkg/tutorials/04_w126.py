"""Annual W126 index for a constant 0.10 ppm season and a synthetic diurnal profile."""

import numpy as np

from kcoddp.pipeline import HourlyOzoneSeries, calendar_months, w126_annual, w126_weight

for q in (0.03, 0.05, 0.075, 0.10, 0.15):
    print(f"q = {q:.3f} ppm  weighted {w126_weight(q):.5f}  ratio {w126_weight(q) / q:.3f}")

months = calendar_months()
flat = w126_annual(HourlyOzoneSeries(np.full((len(months), 12), 0.10), months))
print(f"constant 0.10 ppm season: W126 = {flat.index:.2f} ppm-hours, exceeds = {flat.exceeds}")

rng = np.random.default_rng(0)
hours = np.arange(12)
profile = 0.045 + 0.03 * np.sin(np.pi * hours / 11)
q = np.clip(profile + 0.01 * rng.standard_normal((len(months), 12)), 0, None)
res = w126_annual(HourlyOzoneSeries(q, months))
print(f"diurnal season: W126 = {res.index:.2f} ppm-hours, best 3-month window starts in month "
      f"{int(np.argmax(res.running)) + 1}")
