"""Threshold detection and Gaussian-tail symbol error probabilities."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .channel import CirTable
from .errors import DomainError
from .link import level_moments
from .modulation import ModulationDesign

__all__ = [
    "decode",
    "tail_prob",
    "symbol_error_prob",
    "ErrorReport",
    "network_error_prob",
    "REPORT_COLUMNS",
]

REPORT_COLUMNS = ("scheme", "M", "rho", "d_bar", "t_sym", "k_memory",
                  "tx_index", "symbol", "p_error")

_SQRT2 = math.sqrt(2.0)


def decode(observed, thresholds) -> int | np.ndarray:
    """Map received counts to symbol indices.

    A count equal to a threshold is assigned to the upper region, so symbol
    ``j`` covers ``[tau_{j-1}, tau_j)``. Works elementwise on arrays.
    """
    tau = np.asarray(thresholds, dtype=float)
    if tau.ndim != 1 or tau.size == 0:
        raise DomainError("need a non-empty 1-D threshold vector")
    if np.any(np.diff(tau) <= 0):
        raise DomainError("thresholds must be strictly increasing")
    out = np.searchsorted(tau, observed, side="right")
    return int(out) if np.ndim(out) == 0 else out


def tail_prob(distance: float, sigma: float) -> float:
    """``P(X - mu >= distance)`` for ``X ~ N(mu, sigma^2)``, computed as ``erfc/2``.

    ``distance`` is the signed gap from the mean to the boundary on the error
    side. With ``sigma == 0`` the probability collapses to a step that takes
    the value 0.5 at the boundary.
    """
    if sigma < 0:
        raise DomainError("standard deviation must be nonnegative")
    if sigma == 0:
        return 0.0 if distance > 0 else (0.5 if distance == 0 else 1.0)
    return 0.5 * float(special.erfc(distance / (_SQRT2 * sigma)))


def symbol_error_prob(j: int, mean: float, std: float, thresholds) -> float:
    """Probability that symbol ``j`` with count ``~N(mean, std^2)`` is misdetected."""
    tau = np.asarray(thresholds, dtype=float)
    M = tau.size + 1
    if not 0 <= j < M:
        raise DomainError(f"symbol {j} outside 0..{M - 1}")
    p = 0.0
    if j > 0:
        p += tail_prob(mean - tau[j - 1], std)
    if j < M - 1:
        p += tail_prob(tau[j] - mean, std)
    return p


@dataclass
class ErrorReport:
    """Analytic error probabilities.

    Attributes
    ----------
    per_symbol:
        ``(K, M)`` matrix of ``P_e,k(S_j)``.
    per_tx:
        Row means of ``per_symbol`` (equiprobable symbols).
    network:
        Mean of ``per_tx`` over transmitters.
    """

    per_symbol: np.ndarray
    scheme: str
    rho: float | None
    d_bar: float
    t_sym: float
    isi_memory: int
    per_tx: np.ndarray = field(init=False)
    network: float = field(init=False)

    def __post_init__(self):
        self.per_tx = self.per_symbol.mean(axis=1)
        self.network = float(self.per_tx.mean())

    @property
    def K(self) -> int:
        return self.per_symbol.shape[0]

    @property
    def M(self) -> int:
        return self.per_symbol.shape[1]

    def rows(self):
        """Per-cell rows, then per-transmitter aggregates, then the network total."""
        head = (self.scheme, self.M, "" if self.rho is None else self.rho,
                self.d_bar, self.t_sym, self.isi_memory)
        for k in range(self.K):
            for j in range(self.M):
                yield head + (k, j, float(self.per_symbol[k, j]))
        for k in range(self.K):
            yield head + (k, "all", float(self.per_tx[k]))
        yield head + ("all", "all", self.network)

    def to_csv(self, fh=None) -> str | None:
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        w.writerows(self.rows())
        return None if fh is not None else buf.getvalue()


def network_error_prob(design: ModulationDesign, cir_table: CirTable) -> ErrorReport:
    """Error probabilities of every (transmitter, symbol) pair and their averages."""
    topo = cir_table.topology
    cset = design.concentrations
    M = cset.M
    per = np.empty((topo.K, M))
    for k, y in enumerate(topo.distances):
        mean, var = level_moments(cset, cir_table, y)
        tau = design.thresholds_for(k)
        for j in range(M):
            per[k, j] = symbol_error_prob(j, mean[j], math.sqrt(var[j]), tau)
    return ErrorReport(per, design.scheme, design.rho, topo.d_bar,
                       cir_table.params.t_sym, cir_table.isi_memory)
