"""First-passage statistics of a point release towards an absorbing sphere.

A molecule released at distance ``y`` from the surface of a fully absorbing
spherical receiver of radius ``r`` in an unbounded 3D medium with diffusion
coefficient ``D`` is absorbed at rate

    f_hit(y, t) = r/(y+r) * y / sqrt(4 pi D t^3) * exp(-y^2 / (4 D t))

and the absorbed fraction by time ``t`` is

    F_hit(y, t) = r/(y+r) * erfc(y / sqrt(4 D t)).

The channel impulse response (CIR) of period ``i`` is the increment of
``F_hit`` across the ``i``-th symbol period. Distances are in micrometres
and times in seconds throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DegenerateIntervalError, DomainError, NumericalError

__all__ = [
    "ChannelParams",
    "Topology",
    "CirTable",
    "hit_rate",
    "cum_hit",
    "cir",
    "averaged_cir",
    "build_cir_table",
    "QUAD_ABS_TOL",
]

#: Absolute tolerance targeted on every distance-averaged CIR value.
QUAD_ABS_TOL = 1e-10


@dataclass(frozen=True)
class ChannelParams:
    """Physical constants of the medium and receiver.

    Attributes
    ----------
    D:
        Diffusion coefficient in um^2/s.
    r:
        Receiver radius in um.
    t_sym:
        Symbol period in s.
    dt:
        Receiver sampling period in s. Carried as metadata only; no analytic
        quantity depends on it.
    """

    D: float = 79.4
    r: float = 5.0
    t_sym: float = 21.12
    dt: float = 0.32

    def __post_init__(self):
        for name in ("D", "r", "t_sym", "dt"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class Topology:
    """Transmitter placement around the receiver.

    ``distances`` are nearest-surface distances, one per transmitter, in the
    round-robin order in which transmitters occupy slots. ``isi_memory`` is
    the number of prior slots whose molecules leak into the current slot and
    defaults to ``K - 1``.
    """

    y_min: float
    y_max: float
    distances: tuple[float, ...]
    isi_memory: int | None = None

    def __post_init__(self):
        dist = tuple(float(d) for d in self.distances)
        object.__setattr__(self, "distances", dist)
        if not dist:
            raise DomainError("topology needs at least one transmitter")
        if not (0 < self.y_min <= self.y_max):
            raise DomainError(f"need 0 < y_min <= y_max, got {self.y_min}, {self.y_max}")
        tol = 1e-12 * self.y_max
        for d in dist:
            if not (self.y_min - tol <= d <= self.y_max + tol):
                raise DomainError(f"distance {d} outside [{self.y_min}, {self.y_max}]")
        K = len(dist)
        k = K - 1 if self.isi_memory is None else int(self.isi_memory)
        if K == 1 and k != 0:
            raise DomainError("a single transmitter has no ISI memory")
        if K >= 2 and not (0 <= k <= K - 1):
            raise DomainError(f"isi_memory must lie in [0, {K - 1}], got {k}")
        object.__setattr__(self, "isi_memory", k)

    @property
    def K(self) -> int:
        return len(self.distances)

    @property
    def d_bar(self) -> float:
        return 0.5 * (self.y_min + self.y_max)

    @property
    def is_point(self) -> bool:
        """True when all transmitters sit at one distance (``y_min == y_max``)."""
        return self.y_min == self.y_max

    @classmethod
    def uniform_grid(cls, y_min: float, y_max: float, spacing: float = 1.0,
                     isi_memory: int | None = None) -> "Topology":
        """Transmitters every ``spacing`` um from ``y_min`` to ``y_max`` inclusive."""
        n = int(round((y_max - y_min) / spacing)) + 1
        dist = np.linspace(y_min, y_max, n) if n > 1 else np.array([y_min])
        return cls(y_min, y_max, tuple(dist), isi_memory)

    @classmethod
    def from_d_bar(cls, d_bar: float, y_min: float = 6.0,
                   isi_memory: int | None = None) -> "Topology":
        """Grid with 1 um spacing whose mean distance is ``d_bar``."""
        return cls.uniform_grid(y_min, 2.0 * d_bar - y_min, 1.0, isi_memory)

    def with_memory(self, isi_memory: int) -> "Topology":
        return Topology(self.y_min, self.y_max, self.distances, isi_memory)


def _check_y(y):
    if np.any(np.asarray(y) <= 0):
        raise DomainError(f"distance must be positive, got {y!r}")


def hit_rate(params: ChannelParams, y, t):
    """Instantaneous absorption rate (1/s) at time ``t`` after release."""
    _check_y(y)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("hit_rate needs t > 0")
    y = np.asarray(y, dtype=float)
    D, r = params.D, params.r
    out = r / (y + r) * y / np.sqrt(4 * np.pi * D * t**3) * np.exp(-(y**2) / (4 * D * t))
    return out[()] if out.ndim == 0 else out


def cum_hit(params: ChannelParams, y, t):
    """Fraction of released molecules absorbed by time ``t``.

    Exactly zero at ``t == 0``. The complementary error function is evaluated
    directly, never as ``1 - erf``.
    """
    _check_y(y)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("cum_hit needs t >= 0")
    y = np.asarray(y, dtype=float)
    r = params.r
    with np.errstate(divide="ignore"):
        arg = y / np.sqrt(4 * params.D * t)
    out = np.where(t > 0, r / (y + r) * special.erfc(arg), 0.0)
    return out[()] if out.ndim == 0 else out


def cir(params: ChannelParams, y, i: int):
    """Probability that a molecule is absorbed during the ``i``-th symbol period."""
    if int(i) != i or i < 1:
        raise DomainError(f"period index must be an integer >= 1, got {i!r}")
    ts = params.t_sym
    # cancellation in the difference is harmless: both terms are O(r/(y+r))
    return cum_hit(params, y, i * ts) - cum_hit(params, y, (i - 1) * ts)


def averaged_cir(params: ChannelParams, y_min: float, y_max: float, i: int,
                 tol: float = QUAD_ABS_TOL) -> float:
    """CIR of period ``i`` averaged over ``y ~ U(y_min, y_max)``.

    Raises
    ------
    DegenerateIntervalError
        If ``y_max <= y_min``. Callers wanting the point value should use
        :func:`cir` at ``y_min`` instead.
    NumericalError
        If adaptive quadrature cannot meet ``tol``.
    """
    if not y_max > y_min:
        raise DegenerateIntervalError(f"need y_max > y_min, got [{y_min}, {y_max}]")
    _check_y(y_min)
    if int(i) != i or i < 1:
        raise DomainError(f"period index must be an integer >= 1, got {i!r}")
    width = y_max - y_min
    value, abserr = integrate.quad(
        lambda y: float(cir(params, y, i)), y_min, y_max,
        epsabs=tol * width, epsrel=0.0, limit=200,
    )
    if not abserr <= tol * width:
        raise NumericalError(f"quadrature for H[{i}] stalled at error {abserr / width:.3g}")
    return value / width


@dataclass(frozen=True, eq=False)
class CirTable:
    """CIRs materialised over a topology.

    ``per_tx[k, i-1]`` is ``h(y_k, i)`` and ``averaged[i-1]`` is ``H[i]`` for
    ``i = 1..isi_memory+1``. For a point topology the averages are the point
    values.
    """

    params: ChannelParams
    topology: Topology
    per_tx: np.ndarray
    averaged: np.ndarray
    _h1_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def isi_memory(self) -> int:
        return self.topology.isi_memory

    def signal_cir(self, y: float) -> float:
        """``h(y, 1)`` reusing the tabulated row when ``y`` is a transmitter distance."""
        y = float(y)
        if y not in self._h1_cache:
            try:
                k = self.topology.distances.index(y)
                self._h1_cache[y] = float(self.per_tx[k, 0])
            except ValueError:
                self._h1_cache[y] = float(cir(self.params, y, 1))
        return self._h1_cache[y]

    def isi_sum(self) -> float:
        """Sum of averaged ISI CIRs, ``H[2] + ... + H[k+1]``."""
        return float(self.averaged[1:].sum())

    def isi_variance_weight(self) -> float:
        """``sum_i H[i] (1 - H[i])`` over the ISI periods."""
        H = self.averaged[1:]
        return float((H * (1.0 - H)).sum())


def build_cir_table(params: ChannelParams, topo: Topology,
                    tol: float = QUAD_ABS_TOL) -> CirTable:
    """Tabulate per-transmitter and distance-averaged CIRs for periods ``1..k+1``."""
    n = topo.isi_memory + 1
    dist = np.asarray(topo.distances)
    per_tx = np.column_stack([np.atleast_1d(cir(params, dist, i)) for i in range(1, n + 1)])
    if topo.is_point:
        averaged = np.array([float(cir(params, topo.y_min, i)) for i in range(1, n + 1)])
    else:
        averaged = np.array([averaged_cir(params, topo.y_min, topo.y_max, i, tol)
                             for i in range(1, n + 1)])
    per_tx.setflags(write=False)
    averaged.setflags(write=False)
    return CirTable(params, topo, per_tx, averaged)

