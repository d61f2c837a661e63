"""
Playing the contract out
========================

Simulate many seeded histories of the embracing contract, then have R
deviate once in period 10 and watch him get punished forever.
"""

import numpy as np

from powerbroker import Params, SimConfig, build_commitment, empirical_value, simulate
from powerbroker.sim import Deviation

par = Params(0.5, 0.25, 1.0, 0.0)
auto = build_commitment(par)

tr = simulate(auto, config=SimConfig(periods=200, paths=5000, seed=42))
print(tr.leader_frequencies())
print("mean period of R's first lead:", tr.first_r_lead().mean())
print("principal's value:", empirical_value(tr, "P"))

devs = tuple(Deviation(p, 10, "R", 1.0) for p in range(5000))
tr = simulate(auto, config=SimConfig(200, 5000, 42, devs))
led = tr.r_leads[:, 10]
print("paths where R led and deviated:", int(led.sum()))
print("share of those still in PunishR at the end:",
      np.mean(tr.terminal[led] == tr.labels.index("PunishR")))
