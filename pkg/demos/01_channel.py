"""
Channel impulse response of an absorbing receiver
=================================================

A molecule released ``y`` um from the surface of a spherical absorbing
receiver is captured with a probability that builds up over time. Here we
look at the hit rate, the captured fraction, the per-period CIR and the
CIR averaged over a band of transmitter distances.
"""

import numpy as np
from scipy import integrate

from cskct.channel import (ChannelParams, Topology, averaged_cir, build_cir_table,
                           cir, cum_hit, hit_rate)

params = ChannelParams()   # D=79.4 um^2/s, r=5 um, t_sym=21.12 s
print(params)

# The captured fraction is the integral of the hit rate.
y, T = 6.0, 10.0
area, _ = integrate.quad(lambda t: hit_rate(params, y, t), 0, T)
print(f"integral of hit rate up to {T} s: {area:.12f}")
print(f"captured fraction at {T} s:       {cum_hit(params, y, T):.12f}")

# Only r/(y+r) of the molecules are ever captured, and the approach is slow.
for t in (1e2, 1e3, 1e4, 1e5):
    print(f"t={t:>8.0f} s  F={cum_hit(params, y, t):.6f}  limit={params.r / (y + params.r):.6f}")

# Per-period CIR: most molecules arrive in the first symbol period, the
# rest leak into later periods and cause interference.
print("\nperiod   h(6, i)    h(17, i)")
for i in range(1, 8):
    print(f"{i:>6}   {cir(params, 6.0, i):.5f}    {cir(params, 17.0, i):.5f}")

# Averaging over transmitters spread uniformly in [6, 17] um.
H = [averaged_cir(params, 6.0, 17.0, i) for i in range(1, 6)]
print("\naveraged CIR H[1..5]:", np.round(H, 5))

# A CirTable holds both views for a whole topology.
table = build_cir_table(params, Topology.from_d_bar(11.5))
print(f"K={table.topology.K} transmitters, ISI memory {table.isi_memory}, "
      f"total leftover fraction {table.isi_sum():.5f}")
