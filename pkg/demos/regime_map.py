"""
Where each contract is optimal
==============================

Sweep patience and the principal's bliss point at b=2.5, m=0.2 and print a
coarse text map of the commitment regimes.
"""

import numpy as np

from powerbroker import region_sweep

SYMBOL = {"FullEmbrace": "F", "PartialEmbrace": "p", "Opportunistic": "o", "FirstBest": "*",
          "Unsupported": "?"}

betas = np.linspace(0.05, 0.7, 14)
thetas = np.linspace(0.0, 0.5, 50, endpoint=False)
rows = region_sweep(0.2, 2.5, betas, thetas)

print("beta   theta ->")
for i, beta in enumerate(betas):
    line = "".join(SYMBOL[r.regime] for r in rows[i * len(thetas):(i + 1) * len(thetas)])
    print(f"{beta:.3f}  {line}")
print("F full embrace, p partial embrace, o opportunistic, * first best")
