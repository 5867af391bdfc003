"""
Analytic error probability
==========================

The received count for symbol ``j`` is modelled as Gaussian with the mean
and variance of the binomial arrivals, plus the interference averaged over
transmitters. Error probabilities follow from Gaussian tails around the
thresholds.
"""

import numpy as np

from cskct.channel import ChannelParams, Topology, build_cir_table
from cskct.detection import network_error_prob
from cskct.modulation import design_benchmark, design_cskct

params = ChannelParams()

# Common thresholds against the per-transmitter benchmark over d_bar.
print("d_bar   CSK-CT BCSK  CSK-CT 4-CSK  bench BCSK  bench 4-CSK   (rho=1.36)")
for d_bar in (11.5, 12.0, 12.5, 13.0, 13.5):
    table = build_cir_table(params, Topology.from_d_bar(d_bar))
    row = [network_error_prob(design_cskct(params, table, M, 1.36), table).network
           for M in (2, 4)]
    row += [network_error_prob(design_benchmark(params, table, M=M), table).network
            for M in (2, 4)]
    print(f"{d_bar:5}  " + "  ".join(f"{p:11.3e}" for p in row))

# With interference, raising rho helps until the extra released molecules
# start to hurt: 4-CSK has an interior optimum.
table = build_cir_table(params, Topology.from_d_bar(11.5))
rhos = np.round(np.arange(1.0, 4.0001, 0.04), 2)
pe = [network_error_prob(design_cskct(params, table, 4, r), table).network for r in rhos]
best = int(np.argmin(pe))
print(f"\n4-CSK with ISI: best rho {rhos[best]} with P_e {pe[best]:.3e}")

# Per-transmitter detail: the errors sit at the two ends of the distance band.
report = network_error_prob(design_cskct(params, table, 2, 1.12), table)
for k, y in enumerate(table.topology.distances):
    print(f"tx {k:>2} at {y:4.1f} um: P_e {report.per_tx[k]:.3e}")
