"""Release concentrations and detection thresholds for the two CSK schemes.

``csk-ct`` uses one set of ``M-1`` thresholds shared by every transmitter.
Threshold ``j`` must sit between the strongest mean count of symbol ``j``
(transmitter at ``y_min``) and the weakest mean count of symbol ``j+1``
(transmitter at ``y_max``). Release concentrations grow geometrically with
ratio ``gamma**rho`` where ``gamma = h(y_min, 1) / h(y_max, 1)``; ``rho = 1``
makes those two limits coincide, ``rho > 1`` opens a gap between them.

``benchmark`` places a geometric-mean threshold between every adjacent pair
of conditional means separately for each transmitter, ``K*(M-1)`` in total.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import ChannelParams, CirTable, Topology, build_cir_table, cir
from .errors import DomainError, InfeasibleDesignError
from .link import ConcentrationSet, level_moments

__all__ = [
    "SCHEMES",
    "BENCHMARK_LEVELS",
    "ModulationDesign",
    "ThresholdCount",
    "gamma_ratio",
    "design_concentrations",
    "signal_limits",
    "limits_spacing",
    "design_thresholds_cskct",
    "design_thresholds_benchmark",
    "count_threshold_computations",
    "design_cskct",
    "design_benchmark",
]

SCHEMES = ("csk-ct", "benchmark")

#: Distance-independent levels used for the benchmark scheme.
BENCHMARK_LEVELS = {2: (1000.0, 1500.0), 4: (1000.0, 1500.0, 2000.0, 3000.0)}


@dataclass(frozen=True, eq=False)
class ModulationDesign:
    """A complete modulation design.

    ``thresholds`` has shape ``(M-1,)`` for ``csk-ct`` and ``(K, M-1)`` for
    ``benchmark``. ``rho``, ``gamma`` and ``limits_spacing`` are ``None`` for
    the benchmark.
    """

    scheme: str
    concentrations: ConcentrationSet
    thresholds: np.ndarray
    rho: float | None = None
    gamma: float | None = None
    limits_spacing: np.ndarray | None = None

    @property
    def M(self) -> int:
        return self.concentrations.M

    @property
    def is_common(self) -> bool:
        return self.thresholds.ndim == 1

    def thresholds_for(self, k: int) -> np.ndarray:
        """Threshold vector used to decode transmitter ``k``."""
        return self.thresholds if self.is_common else self.thresholds[k]

    def to_text(self) -> str:
        """Flat ``key=value`` block; benchmark threshold rows are ``;``-separated."""
        fmt = lambda xs: ",".join(repr(float(x)) for x in xs)
        lines = [f"scheme={self.scheme}", f"M={self.M}"]
        if self.rho is not None:
            lines.append(f"rho={self.rho!r}")
        if self.gamma is not None:
            lines.append(f"gamma={self.gamma!r}")
        lines.append(f"Q={fmt(self.concentrations.levels)}")
        if self.is_common:
            lines.append(f"tau={fmt(self.thresholds)}")
        else:
            lines.append("tau=" + ";".join(fmt(row) for row in self.thresholds))
        if self.limits_spacing is not None:
            lines.append(f"limits_spacing={fmt(self.limits_spacing)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ModulationDesign":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                key, _, value = line.partition("=")
                kv[key.strip()] = value.strip()
        parse = lambda s: [float(x) for x in s.split(",") if x]
        scheme = kv["scheme"]
        if scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {scheme!r}")
        cset = ConcentrationSet(tuple(parse(kv["Q"])))
        if int(kv["M"]) != cset.M:
            raise DomainError("M does not match the number of levels")
        rows = [parse(row) for row in kv["tau"].split(";")]
        tau = np.array(rows[0]) if scheme == "csk-ct" else np.array(rows)
        spacing = kv.get("limits_spacing")
        return cls(
            scheme=scheme,
            concentrations=cset,
            thresholds=tau,
            rho=float(kv["rho"]) if "rho" in kv else None,
            gamma=float(kv["gamma"]) if "gamma" in kv else None,
            limits_spacing=np.array(parse(spacing)) if spacing else None,
        )


class ThresholdCount(NamedTuple):
    thresholds: int
    cirs: int


def gamma_ratio(params: ChannelParams, y_min: float, y_max: float) -> float:
    """Ratio ``h(y_min, 1) / h(y_max, 1)`` between adjacent levels at ``rho = 1``."""
    if not 0 < y_min < y_max:
        raise DomainError(f"need 0 < y_min < y_max, got {y_min}, {y_max}")
    return float(cir(params, y_min, 1) / cir(params, y_max, 1))


def design_concentrations(q0: float, gamma: float, rho: float, M: int,
                          rounding: bool = True) -> ConcentrationSet:
    """Levels ``Q_j = Q_0 * gamma**(j*rho)``, rounded to whole molecules by default.

    ``rounding=False`` keeps the real-valued levels, which is only useful to
    study the idealised design.
    """
    if q0 < 1:
        raise DomainError(f"Q_0 must be >= 1, got {q0}")
    if not gamma > 1:
        raise DomainError(f"gamma must exceed 1, got {gamma}")
    if not rho >= 1:
        raise DomainError(f"scaling exponent must be >= 1, got {rho}")
    if M < 2:
        raise DomainError(f"need M >= 2, got {M}")
    levels = [q0 * gamma ** (j * rho) for j in range(M)]
    if rounding:
        levels = [float(round(q)) for q in levels]
    return ConcentrationSet(tuple(levels))


def signal_limits(cset: ConcentrationSet, cir_table: CirTable) -> tuple[np.ndarray, np.ndarray]:
    """Mean counts of every level at ``y_min`` (strongest) and ``y_max`` (weakest)."""
    topo = cir_table.topology
    strong, _ = level_moments(cset, cir_table, topo.y_min)
    weak, _ = level_moments(cset, cir_table, topo.y_max)
    return strong, weak


def limits_spacing(cset: ConcentrationSet, cir_table: CirTable) -> np.ndarray:
    """Gap between the weakest mean of symbol ``j+1`` and the strongest of symbol ``j``."""
    strong, weak = signal_limits(cset, cir_table)
    return weak[1:] - strong[:-1]


def _rounding_slack(cset: ConcentrationSet, cir_table: CirTable) -> float:
    # each level may sit half a molecule off its exact geometric value
    if not cset.is_integral:
        return 0.0
    topo = cir_table.topology
    return 0.5 * (cir_table.signal_cir(topo.y_min) + cir_table.signal_cir(topo.y_max))


def design_thresholds_cskct(cset: ConcentrationSet, rho: float,
                            cir_table: CirTable) -> np.ndarray:
    """Common thresholds for all transmitters.

    With ``rho == 1`` the threshold is the weakest mean of the upper symbol;
    otherwise it is the geometric mean of the two limits.

    Raises
    ------
    InfeasibleDesignError
        If the strongest mean of some symbol ``j`` exceeds the weakest mean of
        ``j+1``. At ``rho == 1`` a violation no larger than the effect of
        rounding the levels to whole molecules is accepted.
    """
    if not rho >= 1:
        raise DomainError(f"scaling exponent must be >= 1, got {rho}")
    strong, weak = signal_limits(cset, cir_table)
    lo, hi = strong[:-1], weak[1:]
    if rho == 1:
        slack = _rounding_slack(cset, cir_table) + 1e-9 * np.abs(hi)
        bad = np.flatnonzero(lo > hi + slack)
    else:
        bad = np.flatnonzero(~(lo < hi))
    if bad.size:
        j = int(bad[0])
        raise InfeasibleDesignError(
            f"threshold {j} infeasible: strongest mean of S_{j} ({lo[j]:.6g}) is not "
            f"below the weakest mean of S_{j + 1} ({hi[j]:.6g})", index=j)
    return hi.copy() if rho == 1 else np.sqrt(lo * hi)


def design_thresholds_benchmark(cset: ConcentrationSet, cir_table: CirTable) -> np.ndarray:
    """Per-transmitter geometric-mean thresholds, shape ``(K, M-1)``."""
    rows = []
    for y in cir_table.topology.distances:
        mean, _ = level_moments(cset, cir_table, y)
        rows.append(np.sqrt(mean[:-1] * mean[1:]))
    return np.array(rows)


def count_threshold_computations(scheme: str, K: int, M: int) -> ThresholdCount:
    """Number of thresholds and CIRs the receiver has to compute."""
    if K < 1 or M < 2:
        raise DomainError(f"need K >= 1 and M >= 2, got K={K}, M={M}")
    if scheme == "csk-ct":
        return ThresholdCount(M - 1, 2)
    if scheme == "benchmark":
        return ThresholdCount(K * (M - 1), K)
    raise DomainError(f"unknown scheme {scheme!r}")


def design_cskct(params: ChannelParams, topo: Topology | CirTable, M: int, rho: float = 1.0,
                 q0: float = 1000.0, rounding: bool = True) -> ModulationDesign:
    """Full common-threshold design for a topology (or a prebuilt CIR table)."""
    table = topo if isinstance(topo, CirTable) else build_cir_table(params, topo)
    t = table.topology
    gamma = gamma_ratio(table.params, t.y_min, t.y_max)
    cset = design_concentrations(q0, gamma, rho, M, rounding)
    tau = design_thresholds_cskct(cset, rho, table)
    return ModulationDesign("csk-ct", cset, tau, rho=float(rho), gamma=gamma,
                            limits_spacing=limits_spacing(cset, table))


def design_benchmark(params: ChannelParams, topo: Topology | CirTable,
                     levels=None, M: int | None = None) -> ModulationDesign:
    """Per-transmitter design; ``levels`` default to :data:`BENCHMARK_LEVELS`."""
    table = topo if isinstance(topo, CirTable) else build_cir_table(params, topo)
    if levels is None:
        if M not in BENCHMARK_LEVELS:
            raise DomainError(f"no default benchmark levels for M={M}; pass levels")
        levels = BENCHMARK_LEVELS[M]
    cset = ConcentrationSet(tuple(levels))
    if M is not None and M != cset.M:
        raise DomainError(f"M={M} does not match {cset.M} levels")
    return ModulationDesign("benchmark", cset, design_thresholds_benchmark(cset, table))

