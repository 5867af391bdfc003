"""Received signal strength, ISI, and their Gaussian moments.

Molecule arrivals from a release of ``Q`` molecules during period ``i`` are
Binomial(Q, h(y, i)). The analytic path keeps only the first two moments: the
signal from the current slot is conditioned on the transmitter distance,
while interference from the previous ``k`` slots is averaged over both the
symbol alphabet (mean level ``Q_bar``) and the uniform distance distribution
(averaged CIRs ``H[i]``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import CirTable
from .errors import DimensionError, DomainError

__all__ = [
    "ConcentrationSet",
    "SignalMoments",
    "expected_signal",
    "expected_isi",
    "isi_variance",
    "conditional_moments",
    "level_moments",
]


@dataclass(frozen=True)
class ConcentrationSet:
    """Release concentrations ``Q_0 < Q_1 < ... < Q_{M-1}`` for equiprobable symbols."""

    levels: tuple[float, ...]

    def __post_init__(self):
        levels = tuple(float(q) for q in self.levels)
        object.__setattr__(self, "levels", levels)
        M = len(levels)
        if M < 2 or M & (M - 1):
            raise DomainError(f"symbol count must be a power of two >= 2, got {M}")
        if levels[0] < 0:
            raise DomainError("release concentrations must be nonnegative")
        for j in range(M - 1):
            if not levels[j] < levels[j + 1]:
                raise DomainError(f"levels must be strictly increasing (Q_{j}={levels[j]}, "
                                  f"Q_{j + 1}={levels[j + 1]})")

    @property
    def M(self) -> int:
        return len(self.levels)

    @property
    def bits_per_symbol(self) -> int:
        return self.M.bit_length() - 1

    @property
    def mean(self) -> float:
        return math.fsum(self.levels) / self.M

    @property
    def is_integral(self) -> bool:
        return all(q == int(q) for q in self.levels)

    def as_array(self) -> np.ndarray:
        return np.array(self.levels)

    def index(self, q: float) -> int:
        try:
            return self.levels.index(float(q))
        except ValueError:
            raise DomainError(f"{q} is not one of the design levels {self.levels}") from None


@dataclass(frozen=True)
class SignalMoments:
    """Mean and variance of the received count, split into signal and ISI parts."""

    signal_mean: float
    isi_mean: float
    signal_var: float
    isi_var: float

    @property
    def mean(self) -> float:
        return self.signal_mean + self.isi_mean

    @property
    def variance(self) -> float:
        return self.signal_var + self.isi_var

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def expected_signal(q_bar: float, h1: float) -> float:
    """Expected intended-signal count ``Q_bar * H[1]``."""
    if q_bar < 0 or not 0 <= h1 <= 1:
        raise DomainError(f"need q_bar >= 0 and h1 in [0, 1], got {q_bar}, {h1}")
    return q_bar * h1


def _isi_cirs(H: Sequence[float], k: int) -> np.ndarray:
    if k < 0:
        raise DomainError(f"ISI memory must be >= 0, got {k}")
    H = np.asarray(H, dtype=float)
    if k and len(H) < k + 1:
        raise DimensionError(f"need H[1..{k + 1}] for memory {k}, got {len(H)} entries")
    return H[1:k + 1]


def expected_isi(q_bar: float, H: Sequence[float], k: int) -> float:
    """Expected interference count ``Q_bar * (H[2] + ... + H[k+1])``.

    ``H`` is indexed from period 1, so ``H[0]`` in Python is the signal CIR.
    """
    return q_bar * float(_isi_cirs(H, k).sum())


def isi_variance(q_bar: float, H: Sequence[float], k: int) -> float:
    """Interference variance ``Q_bar * sum_i H[i] (1 - H[i])``."""
    Hi = _isi_cirs(H, k)
    return q_bar * float((Hi * (1.0 - Hi)).sum())


def conditional_moments(q_j: float, y: float, cset: ConcentrationSet,
                        cir_table: CirTable) -> SignalMoments:
    """Moments of the count received when a transmitter at ``y`` sends ``q_j``.

    The signal term uses the transmitter's own CIR ``h(y, 1)``; the ISI terms
    use the table's averaged CIRs and the mean level of ``cset``.
    """
    cset.index(q_j)
    h1 = cir_table.signal_cir(y)
    q_bar = cset.mean
    k = cir_table.isi_memory
    return SignalMoments(
        signal_mean=q_j * h1,
        isi_mean=expected_isi(q_bar, cir_table.averaged, k),
        signal_var=q_j * h1 * (1.0 - h1),
        isi_var=isi_variance(q_bar, cir_table.averaged, k),
    )


def level_moments(cset: ConcentrationSet, cir_table: CirTable,
                  y: float) -> tuple[np.ndarray, np.ndarray]:
    """Means and variances of the received count for every level at distance ``y``."""
    q = cset.as_array()
    h1 = cir_table.signal_cir(y)
    k = cir_table.isi_memory
    mean = q * h1 + expected_isi(cset.mean, cir_table.averaged, k)
    var = q * h1 * (1.0 - h1) + isi_variance(cset.mean, cir_table.averaged, k)
    return mean, var
