"""Slot-level stochastic simulation of the time-slotted multi-transmitter link.

Transmitters occupy slots round-robin in topology order. In every slot the
receiver counts the molecules from the current release plus the leftovers of
the ``k`` preceding releases, each drawn as an independent Binomial with the
CIR of the actual transmitter distance and the actually transmitted level.
The interference window runs over the continuous slot timeline, so it crosses
round boundaries; only the first ``k`` slots of a run see fewer interferers.

Random numbers come from Philox streams keyed by ``(seed, stream, chunk)``,
with a fixed number of rounds per chunk. Results therefore depend only on
the seed, never on how many worker threads process the chunks.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, CirTable, cir
from .errors import DomainError
from .modulation import ModulationDesign

__all__ = [
    "TrialConfig",
    "SimResult",
    "run",
    "wilson_interval",
    "estimate_cir_empirical",
    "CHUNK_ROUNDS",
]

#: Rounds simulated per RNG chunk. Changing it changes the random draws.
CHUNK_ROUNDS = 8192

_SYMBOL_STREAM = 0
_ARRIVAL_STREAM = 1
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class TrialConfig:
    """How to run a simulation.

    ``symbol_source`` is ``"uniform-random"`` or ``"fixed-sequence"``; in the
    latter case ``sequence`` is tiled over the slot timeline.
    """

    rounds: int = 100_000
    seed: int = 0
    arrival_model: str = "binomial"
    symbol_source: str = "uniform-random"
    sequence: tuple[int, ...] = ()
    workers: int = 1

    def __post_init__(self):
        if self.rounds < 1:
            raise DomainError("need at least one round")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.arrival_model not in ("binomial", "gaussian"):
            raise DomainError(f"unknown arrival model {self.arrival_model!r}")
        if self.symbol_source not in ("uniform-random", "fixed-sequence"):
            raise DomainError(f"unknown symbol source {self.symbol_source!r}")
        if self.symbol_source == "fixed-sequence" and not self.sequence:
            raise DomainError("fixed-sequence source needs a non-empty sequence")
        if self.workers < 1:
            raise DomainError("need at least one worker")


def wilson_interval(errors: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if trials <= 0:
        return (0.0, 1.0)
    p = errors / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


@dataclass
class SimResult:
    """Error tallies per (transmitter, true symbol).

    ``count_sum`` and ``count_sqsum`` accumulate the observed counts and their
    squares per cell, so moments of the received signal can be checked
    without keeping every observation.
    """

    errors: np.ndarray
    trials: np.ndarray
    count_sum: np.ndarray
    count_sqsum: np.ndarray
    rounds: int
    seed: int
    arrival_model: str
    per_tx: np.ndarray = field(init=False)
    network: float = field(init=False)

    def __post_init__(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            self.per_tx = self.errors.sum(axis=1) / self.trials.sum(axis=1)
        self.network = float(self.errors.sum() / self.trials.sum())

    @property
    def ser(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.errors / self.trials

    @property
    def network_ci(self) -> tuple[float, float]:
        return wilson_interval(int(self.errors.sum()), int(self.trials.sum()))

    def per_tx_ci(self, k: int) -> tuple[float, float]:
        return wilson_interval(int(self.errors[k].sum()), int(self.trials[k].sum()))

    def count_mean(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.count_sum / self.trials

    def count_var(self) -> np.ndarray:
        n = self.trials
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = self.count_sum / n
            return (self.count_sqsum - n * mean**2) / (n - 1)

    def rows(self, head: tuple):
        K, M = self.errors.shape
        for k in range(K):
            for j in range(M):
                e, n = int(self.errors[k, j]), int(self.trials[k, j])
                lo, hi = wilson_interval(e, n)
                yield ("montecarlo",) + head + (k, j, e / n if n else "", lo, hi)
        for k in range(K):
            lo, hi = self.per_tx_ci(k)
            yield ("montecarlo",) + head + (k, "all", float(self.per_tx[k]), lo, hi)
        lo, hi = self.network_ci
        yield ("montecarlo",) + head + ("all", "all", self.network, lo, hi)


def _chunk_bounds(rounds: int) -> list[tuple[int, int]]:
    return [(r0, min(r0 + CHUNK_ROUNDS, rounds)) for r0 in range(0, rounds, CHUNK_ROUNDS)]


def _stream(seed: int, stream: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32, stream, chunk])
    return np.random.Generator(np.random.Philox(ss))


def _symbols(cfg: TrialConfig, chunk: int, r0: int, r1: int, K: int, M: int) -> np.ndarray:
    n = (r1 - r0) * K
    if cfg.symbol_source == "fixed-sequence":
        seq = np.asarray(cfg.sequence, dtype=np.int64)
        return seq[np.arange(r0 * K, r1 * K) % seq.size]
    return _stream(cfg.seed, _SYMBOL_STREAM, chunk).integers(0, M, size=n, dtype=np.int64)


def _draw(rng: np.random.Generator, model: str, n: np.ndarray, p: np.ndarray) -> np.ndarray:
    if model == "binomial":
        return rng.binomial(n, p).astype(np.float64)
    mean = n * p
    return rng.normal(mean, np.sqrt(mean * (1.0 - p)))


def _simulate_chunk(chunk: int, bounds, design: ModulationDesign, table: CirTable,
                    cfg: TrialConfig):
    r0, r1 = bounds[chunk]
    topo = table.topology
    K, M, k = topo.K, design.M, table.isi_memory
    levels = design.concentrations.as_array()
    if cfg.arrival_model == "binomial":
        levels = levels.astype(np.int64)
    sym = _symbols(cfg, chunk, r0, r1, K, M)
    S = sym.size
    # the k releases preceding this chunk; absent before the first slot
    if chunk == 0 or k == 0:
        past = np.full(k, -1, dtype=np.int64)
    else:
        p0, p1 = bounds[chunk - 1]
        past = _symbols(cfg, chunk - 1, p0, p1, K, M)[-k:]
    ext = np.concatenate([past, sym])
    q_ext = np.where(ext >= 0, levels[np.maximum(ext, 0)], 0)

    tx = np.arange(S) % K
    rng = _stream(cfg.seed, _ARRIVAL_STREAM, chunk)
    obs = _draw(rng, cfg.arrival_model, q_ext[k:], table.per_tx[tx, 0])
    for m in range(1, k + 1):
        src = (tx - m) % K
        obs += _draw(rng, cfg.arrival_model, q_ext[k - m:k - m + S], table.per_tx[src, m])

    if design.is_common:
        decoded = np.searchsorted(design.thresholds, obs, side="right")
    else:
        decoded = (obs[:, None] >= design.thresholds[tx]).sum(axis=1)
    cell = tx * M + sym
    trials = np.bincount(cell, minlength=K * M)
    errors = np.bincount(cell, weights=(decoded != sym), minlength=K * M)
    csum = np.bincount(cell, weights=obs, minlength=K * M)
    csq = np.bincount(cell, weights=obs * obs, minlength=K * M)
    return errors.astype(np.int64), trials.astype(np.int64), csum, csq


def run(design: ModulationDesign, cir_table: CirTable, config: TrialConfig) -> SimResult:
    """Simulate ``config.rounds`` transmission rounds and tally decoding errors."""
    K, M = cir_table.topology.K, design.M
    if not design.is_common and design.thresholds.shape[0] != K:
        raise DomainError("benchmark threshold rows do not match the topology")
    if config.arrival_model == "binomial" and not design.concentrations.is_integral:
        raise DomainError("binomial arrivals need whole-molecule release levels")
    if config.symbol_source == "fixed-sequence":
        seq = np.asarray(config.sequence)
        if seq.min() < 0 or seq.max() >= M:
            raise DomainError(f"sequence symbols must lie in 0..{M - 1}")
    bounds = _chunk_bounds(config.rounds)
    work = lambda c: _simulate_chunk(c, bounds, design, cir_table, config)
    if config.workers == 1:
        parts = [work(c) for c in range(len(bounds))]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(work, range(len(bounds))))
    errors = np.zeros(K * M, dtype=np.int64)
    trials = np.zeros(K * M, dtype=np.int64)
    csum = np.zeros(K * M)
    csq = np.zeros(K * M)
    for e, n, s, s2 in parts:
        errors += e
        trials += n
        csum += s
        csq += s2
    shape = (K, M)
    return SimResult(errors.reshape(shape), trials.reshape(shape), csum.reshape(shape),
                     csq.reshape(shape), config.rounds, config.seed, config.arrival_model)


def estimate_cir_empirical(params: ChannelParams, y: float, n_molecules: int,
                           n_trials: int = 1, n_periods: int = 12,
                           seed: int = 0) -> np.ndarray:
    """Fractions of molecules absorbed in each of the first ``n_periods`` periods.

    Each molecule independently falls into period ``i`` with probability
    ``h(y, i)`` or is never absorbed in the window; this samples those
    categorical outcomes rather than tracing random walks.
    """
    if n_molecules < 1 or n_trials < 1 or n_periods < 1:
        raise DomainError("need positive molecule, trial and period counts")
    if n_molecules * n_trials > 10**10:
        raise DomainError("sample size exceeds 1e10 molecules")
    p = np.array([float(cir(params, y, i)) for i in range(1, n_periods + 1)])
    probs = np.append(p, max(0.0, 1.0 - p.sum()))
    rng = _stream(seed, 2, 0)
    counts = rng.multinomial(n_molecules, probs, size=n_trials).sum(axis=0)
    return counts[:-1] / (n_molecules * n_trials)

