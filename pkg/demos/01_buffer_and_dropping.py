"""
One link, one packet of buffer
==============================

A single link keeps at most one packet. A new arrival pushes out the packet
it finds, and the link sends only when its fading gain clears the threshold,
which happens with probability q. This script compares the closed forms for
the full-buffer and dropping probabilities with a long one-link simulation.
"""

import numpy as np

from onoffnet import analytics, sim
from onoffnet.model import ArrivalSpec, ChannelParams, NetworkConfig, OnOffPolicy

lam, q = 10, 0.1

# closed forms for the three arrival processes
for kind in ("pap", "bap", "cap"):
    d = analytics.full_buffer_prob(kind, lam, q)
    p = analytics.drop_prob(kind, lam, q)
    print(f"{kind}: full buffer {d:.6f}  drop {p:.6f}")

# the same link simulated for 300k slots; no cross links so it is alone
print()
for kind in ("pap", "bap", "cap"):
    cfg = NetworkConfig(n=1, channel=ChannelParams(0.0), arrivals=ArrivalSpec(kind, lam),
                        policy=OnOffPolicy.from_activation_prob(q), horizon=300_000, seed=1)
    s = sim.run(cfg)
    est = s.summary()
    print(f"{kind}: simulated full {est['delta'][0]:.4f} +- {est['delta'][1]:.4f}"
          f"  drop {est['drop_prob'][0]:.4f} +- {est['drop_prob'][1]:.4f}")

# periodic arrivals drop least: a packet is lost only if all lam
# decisions before the next arrival fail
lams = np.array([2, 5, 10, 20, 50])
print()
print("lambda  " + "  ".join(f"{k:>8s}" for k in ("pap", "bap", "cap")))
for l in lams:
    print(f"{l:6d}  " + "  ".join(f"{analytics.drop_prob(k, l, q):8.5f}" for k in ("pap", "bap", "cap")))
