"""
Designing release levels and common thresholds
==============================================

With many transmitters at different distances, one set of thresholds can
serve all of them if the release levels grow geometrically with ratio
``gamma**rho``. ``gamma`` compares the strongest and weakest first-period
CIR; ``rho`` above one opens a safety gap between symbol regions.
"""

from cskct.channel import ChannelParams, Topology, build_cir_table
from cskct.modulation import (count_threshold_computations, design_benchmark,
                              design_cskct, gamma_ratio)

params = ChannelParams()

# gamma falls as the symbol period grows and rises with the far distance.
print("t_sym   y_max=17  y_max=21")
for t in (1.28, 5.12, 21.12, 32.0):
    p = ChannelParams(t_sym=t)
    print(f"{t:>5}   {gamma_ratio(p, 6, 17):8.3f}  {gamma_ratio(p, 6, 21):8.3f}")

# A design table over the mean distance.
print("\nd_bar  rho   gamma   Q (4 levels)                  thresholds")
for d_bar in (11.5, 12.5, 13.5):
    table = build_cir_table(params, Topology.from_d_bar(d_bar))
    for rho in (1.0, 1.24):
        d = design_cskct(params, table, 4, rho)
        q = " ".join(f"{x:>6.0f}" for x in d.concentrations.levels)
        tau = " ".join(f"{x:>7.1f}" for x in d.thresholds)
        print(f"{d_bar:5}  {rho:4}  {d.gamma:.3f}   {q}   {tau}")

# rho = 1 leaves no room between the limits; rho > 1 widens the gap, more
# so for higher symbols.
table = build_cir_table(params, Topology.uniform_grid(6, 19))
for rho in (1.0, 1.12):
    print(f"\nrho={rho}: limits spacing", design_cskct(params, table, 4, rho).limits_spacing.round(2))

# The benchmark needs a threshold row per transmitter.
bench = design_benchmark(params, table, M=4)
print("\nbenchmark threshold matrix shape:", bench.thresholds.shape)
for K in (1, 8, 16):
    print(K, count_threshold_computations("csk-ct", K, 4), count_threshold_computations("benchmark", K, 4))

# Designs serialise to a small key=value block.
print()
print(design_cskct(params, table, 2, 1.24).to_text())
