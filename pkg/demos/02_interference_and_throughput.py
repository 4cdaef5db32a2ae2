"""
Interference in a dense network
===============================

500 links, a packet every slot, transmit when the gain beats the threshold.
The aggregate interference at an active receiver concentrates around its
mean, and the network throughput is compared with the large-n formula and
its upper bound.
"""

import math

from onoffnet import analytics, optimizer, sim
from onoffnet.model import ArrivalSpec, ChannelParams, NetworkConfig, OnOffPolicy

n, alpha = 500, 0.4
tau = optimizer.solve_tau_fixed_point(n, alpha * 0.5)
q = math.exp(-tau)
print(f"threshold {tau:.4f}, activation probability {q:.5f}")

cfg = NetworkConfig(n=n, channel=ChannelParams(alpha), arrivals=ArrivalSpec("cap", 1),
                    policy=OnOffPolicy(tau), horizon=20_000, seed=11)
rep = analytics.report(cfg)
s = sim.run(cfg)

print(f"interference mean      {s.interference_mean:8.3f}  (closed form {rep.interference_mean:.3f})")
print(f"interference variance  {s.interference_variance:8.3f}  (bound {rep.interference_var_bound:.3f})")

c = sim.concentration_check(s, rep)
# lognormal shadowing has a heavy tail, so a 25% band still misses many slots
print(f"share of samples outside +-25% of the mean: {c.tail_fraction:.3f}")

t, t_se = s.summary()["throughput"]
print(f"throughput  simulated {t:.3f} +- {t_se:.3f}"
      f"  formula {rep.throughput_approx:.3f}  upper bound {rep.throughput_upper:.3f}")
