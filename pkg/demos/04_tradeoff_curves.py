"""
Throughput against the delay bound
==================================

Holding the drop probability at eps, a larger interarrival time lambda lets
the link wait for better channels but also sends fewer packets. The curve
rises and then falls; periodic arrivals pay much less for a low eps.
Writes tradeoff.svg next to this script.
"""

import os

import numpy as np

from onoffnet import optimizer
from onoffnet.svg import line_chart

n, ah, eps = 500, 0.2, 0.05
grid = np.geomspace(1, 1e5, 300)

series = {}
for kind in ("pap", "cap"):
    pts = optimizer.tradeoff_curve(kind, n, ah, eps, grid)
    series[kind] = ([p.lam for p in pts], [p.t_eff for p in pts])
    peak = optimizer.tradeoff_peak(kind, n, ah, eps)
    print(f"{kind}: peak T = {peak.t_eff:.3f} at lambda = {peak.lam:.1f}"
          f"  (closed-form lambda_opt {optimizer.lambda_opt(kind, n, ah, eps):.3f})")

print()
for e in (0.05, 0.01, 0.001):
    print(f"eps={e}: throughput lost pap {optimizer.degradation('pap', e, ah):6.2f}"
          f"  cap {optimizer.degradation('cap', e, ah):6.2f} nats")

out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "tradeoff.svg")
with open(out, "w") as f:
    f.write(line_chart(series, f"throughput at drop probability {eps}", "lambda (slots)",
                       "T_eff (nats/channel use)", logx=True))
print("wrote", out)
