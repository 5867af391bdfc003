"""Experiment configuration, parameter sweeps and CSV emitters.

Configurations are flat ``key=value`` files whose keys follow the table of
simulation parameters::

    D_um2_per_s=79.4
    r_um=5
    t_sym_s=21.12
    dt_s=0.32
    y_min_um=6
    d_bar_um=11.5      # derives y_max_um = 2*d_bar - y_min and K with 1 um spacing
    rho=1.24
    Q0=1000
    M=4
    scheme=csk-ct
    seed=1

Every emitter returns CSV text whose leading ``#`` lines echo the effective
configuration, so a file can be regenerated from its own header.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelParams, CirTable, Topology, build_cir_table
from .detection import REPORT_COLUMNS, network_error_prob
from .errors import CSKError, ConfigError, InfeasibleDesignError
from .modulation import (SCHEMES, ModulationDesign, count_threshold_computations,
                         design_benchmark, design_cskct, gamma_ratio)
from .montecarlo import TrialConfig, run

logger = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "SweepSpec",
    "parse_config",
    "load_config",
    "config_from_header",
    "cmd_design",
    "cmd_gamma_sweep",
    "cmd_ser",
    "cmd_complexity",
    "cmd_montecarlo",
    "cmd_cir_dump",
    "SIM_COLUMNS",
    "REFERENCE_RANGES",
]

SIM_COLUMNS = ("source",) + REPORT_COLUMNS + ("ci_lo", "ci_hi")

#: Parameter ranges covered by the reference study; values outside only warn.
REFERENCE_RANGES = {
    "t_sym_s": (1.28, 32.0),
    "y_max_um": (17.0, 21.0),
    "d_bar_um": (11.5, 13.5),
    "K": (12, 16),
    "rho": (1.0, 4.0),
}

SWEEPABLE = {
    "t_sym": "t_sym_s",
    "y_max": "y_max_um",
    "d_bar": "d_bar_um",
    "rho": "rho",
    "M": "M",
    "scheme": "scheme",
    "k_memory": "k_memory",
}


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _opt_int(text):
    return None if text in (None, "", "none", "None") else int(text)


def _opt_float(text):
    return None if text in (None, "", "none", "None") else float(text)


@dataclass(frozen=True)
class ExperimentConfig:
    D_um2_per_s: float = 79.4
    r_um: float = 5.0
    t_sym_s: float = 21.12
    dt_s: float = 0.32
    y_min_um: float = 6.0
    y_max_um: float = 17.0
    d_bar_um: float | None = None
    K: int | None = None
    rho: float = 1.0
    Q0: float = 1000.0
    M: int = 2
    scheme: str = "csk-ct"
    k_memory: int | None = None
    Q_levels: tuple[float, ...] = ()
    seed: int = 0
    rounds: int = 100_000
    workers: int = 1
    arrival_model: str = "binomial"

    _CONVERT = {
        "D_um2_per_s": float, "r_um": float, "t_sym_s": float, "dt_s": float,
        "y_min_um": float, "y_max_um": float, "d_bar_um": _opt_float, "K": _opt_int,
        "rho": float, "Q0": float, "M": int, "scheme": str, "k_memory": _opt_int,
        "Q_levels": _floats, "seed": int, "rounds": int, "workers": int,
        "arrival_model": str,
    }

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.M < 2 or self.M & (self.M - 1):
            raise ConfigError(f"M must be a power of two >= 2, got {self.M}")
        if self.workers < 1 or self.rounds < 1:
            raise ConfigError("workers and rounds must be positive")

    def replace(self, **changes) -> "ExperimentConfig":
        conv = {}
        for key, value in changes.items():
            if key not in self._CONVERT:
                raise ConfigError(f"unknown configuration key {key!r}")
            try:
                conv[key] = self._CONVERT[key](value) if isinstance(value, str) else value
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {value!r}") from exc
        # y_max and d_bar are tied; the most recent one wins
        if "y_max_um" in conv and "d_bar_um" not in conv:
            conv["d_bar_um"] = None
        try:
            return dataclasses.replace(self, **conv)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def y_max(self) -> float:
        if self.d_bar_um is not None:
            return 2.0 * self.d_bar_um - self.y_min_um
        return self.y_max_um

    @property
    def d_bar(self) -> float:
        return 0.5 * (self.y_min_um + self.y_max)

    def params(self) -> ChannelParams:
        try:
            return ChannelParams(self.D_um2_per_s, self.r_um, self.t_sym_s, self.dt_s)
        except CSKError as exc:
            raise ConfigError(str(exc)) from exc

    def topology(self) -> Topology:
        y0, y1 = self.y_min_um, self.y_max
        try:
            if self.K is None:
                return Topology.uniform_grid(y0, y1, 1.0, self.k_memory)
            dist = np.linspace(y0, y1, self.K) if self.K > 1 else np.array([y0])
            return Topology(y0, y1, tuple(dist), self.k_memory)
        except CSKError as exc:
            raise ConfigError(str(exc)) from exc

    def cir_table(self) -> CirTable:
        return _cached_table(self.params(), self.topology())

    def design(self, table: CirTable | None = None) -> ModulationDesign:
        table = table or self.cir_table()
        if self.scheme == "csk-ct":
            return design_cskct(table.params, table, self.M, self.rho, self.Q0)
        levels = self.Q_levels or None
        if levels is not None and len(levels) != self.M:
            raise ConfigError(f"Q_levels has {len(levels)} entries but M={self.M}")
        try:
            return design_benchmark(table.params, table, levels, M=self.M)
        except InfeasibleDesignError:
            raise
        except CSKError as exc:
            raise ConfigError(str(exc)) from exc

    def effective(self) -> dict:
        """All parameters after derivations, for the CSV comment header."""
        topo = self.topology()
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        out.update(y_max_um=self.y_max, d_bar_um=self.d_bar, K=topo.K,
                   k_memory=topo.isi_memory)
        return out

    def warn_outside_ranges(self) -> list[str]:
        values = {"t_sym_s": self.t_sym_s, "y_max_um": self.y_max, "d_bar_um": self.d_bar,
                  "K": self.topology().K, "rho": self.rho}
        notes = []
        for key, (lo, hi) in REFERENCE_RANGES.items():
            if not lo <= values[key] <= hi:
                notes.append(f"{key}={values[key]} outside the reference range [{lo}, {hi}]")
                logger.warning(notes[-1])
        return notes


@lru_cache(maxsize=256)
def _cached_table(params: ChannelParams, topo: Topology) -> CirTable:
    return build_cir_table(params, topo)


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    changes = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {n}: expected key=value, got {raw!r}")
        changes[key.strip()] = value.strip()
    cfg = base or ExperimentConfig()
    # apply y_max before d_bar so a file naming both keeps d_bar
    ordered = sorted(changes.items(), key=lambda kv: kv[0] == "d_bar_um")
    for key, value in ordered:
        cfg = cfg.replace(**{key: value})
    return cfg


def load_config(path: str | None, overrides: Iterable[str] = ()) -> ExperimentConfig:
    """Read a config file (optional) then apply ``KEY=VALUE`` overrides in order."""
    cfg = ExperimentConfig()
    if path:
        try:
            with open(path) as fh:
                cfg = parse_config(fh.read(), cfg)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config("\n".join(overrides), cfg)


def config_from_header(csv_text: str) -> ExperimentConfig:
    """Rebuild the configuration echoed in the ``#`` header of an emitted CSV.

    Keys that are not configuration keys (sweep lists, timestamps) are skipped.
    """
    lines = []
    for raw in csv_text.splitlines():
        if not raw.startswith("#"):
            break
        key, sep, value = raw[1:].strip().partition("=")
        if sep and key in ExperimentConfig._CONVERT:
            lines.append(f"{key}={value}")
    return parse_config("\n".join(lines))


@dataclass(frozen=True)
class SweepSpec:
    """One varied parameter over a list of values, all else fixed."""

    parameter: str
    values: tuple
    base: ExperimentConfig = ExperimentConfig()

    def __post_init__(self):
        if self.parameter not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {self.parameter!r}; choose from {sorted(SWEEPABLE)}")
        if not self.values:
            raise ConfigError("sweep needs at least one value")

    @property
    def key(self) -> str:
        return SWEEPABLE[self.parameter]

    def configs(self) -> list[ExperimentConfig]:
        out = []
        for v in self.values:
            cfg = self.base.replace(**{self.key: str(v)})
            cfg.warn_outside_ranges()
            out.append(cfg)
        return out


def _header(command: str, cfg: ExperimentConfig | None, extra: dict | None = None,
            timestamp: bool = False) -> str:
    lines = [f"# cskct {command}"]
    if timestamp:
        lines.append(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}")
    items = dict(cfg.effective()) if cfg is not None else {}
    items.update(extra or {})
    for key in sorted(items):
        value = items[key]
        if isinstance(value, tuple):
            value = ",".join(repr(v) for v in value)
        lines.append(f"# {key}={value}")
    return "\n".join(lines) + "\n"


def _csv(header: str, columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(header)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def design_report(cfg: ExperimentConfig, design: ModulationDesign) -> str:
    """Human-readable aligned text block."""
    lines = [f"scheme  {design.scheme}", f"M       {design.M}",
             f"d_bar   {cfg.d_bar:g} um   (y in [{cfg.y_min_um:g}, {cfg.y_max:g}], "
             f"K={cfg.topology().K})", f"t_sym   {cfg.t_sym_s:g} s"]
    if design.gamma is not None:
        lines += [f"gamma   {design.gamma:.4f}", f"rho     {design.rho:g}"]
    lines.append("Q       " + "  ".join(f"{q:>9.0f}" for q in design.concentrations.levels))
    if design.is_common:
        lines.append("tau     " + "  ".join(f"{t:>9.2f}" for t in design.thresholds))
    else:
        for k, row in enumerate(design.thresholds):
            lines.append(f"tau[{k:>2}] " + "  ".join(f"{t:>9.2f}" for t in row))
    return "\n".join(lines) + "\n"


def cmd_design(cfg: ExperimentConfig, timestamp: bool = False) -> tuple[str, str]:
    """Return ``(text report, csv)`` for one design."""
    table = cfg.cir_table()
    design = cfg.design(table)
    k = table.isi_memory
    head = (design.scheme, design.M, "" if design.rho is None else design.rho, cfg.d_bar,
            cfg.t_sym_s, k)
    rows = []
    if design.gamma is not None:
        rows.append(head + ("gamma", "", "", design.gamma))
    for j, q in enumerate(design.concentrations.levels):
        rows.append(head + ("Q", "", j, q))
    if design.is_common:
        rows += [head + ("tau", "all", j, t) for j, t in enumerate(design.thresholds)]
    else:
        rows += [head + ("tau", kk, j, t) for kk, row in enumerate(design.thresholds)
                 for j, t in enumerate(row)]
    if design.limits_spacing is not None:
        rows += [head + ("limits_spacing", "", j, s)
                 for j, s in enumerate(design.limits_spacing)]
    cols = ("scheme", "M", "rho", "d_bar", "t_sym", "k_memory", "quantity", "tx_index",
            "index", "value")
    return design_report(cfg, design), _csv(_header("design", cfg, timestamp=timestamp),
                                            cols, rows)


def cmd_gamma_sweep(t_syms: Sequence[float], y_maxs: Sequence[float],
                    cfg: ExperimentConfig | None = None, timestamp: bool = False) -> str:
    """Gamma on a ``t_sym x y_max`` grid; rows ordered by ``y_max`` then ``t_sym``."""
    cfg = cfg or ExperimentConfig()
    rows = []
    for y_max in y_maxs:
        for ts in t_syms:
            params = cfg.replace(t_sym_s=ts).params()
            rows.append((ts, y_max, gamma_ratio(params, cfg.y_min_um, y_max)))
    extra = {"sweep_t_sym_s": tuple(t_syms), "sweep_y_max_um": tuple(y_maxs)}
    return _csv(_header("gamma-sweep", cfg, extra, timestamp),
                ("t_sym_s", "y_max_um", "gamma"), rows)


def _ser_point(cfg: ExperimentConfig, montecarlo: bool):
    """Analytic (and optionally simulated) error rate for one sweep point."""
    table = cfg.cir_table()
    topo = table.topology
    row = {"scheme": cfg.scheme, "M": cfg.M,
           "rho": cfg.rho if cfg.scheme == "csk-ct" else "", "k_memory": topo.isi_memory}
    try:
        design = cfg.design(table)
    except InfeasibleDesignError as exc:
        logger.warning("infeasible point: %s", exc)
        return row | {"p_error": "", "status": "infeasible"}
    except CSKError as exc:
        logger.warning("failed point: %s", exc)
        return row | {"p_error": "", "status": "error"}
    row |= {"p_error": network_error_prob(design, table).network, "status": "ok"}
    if montecarlo:
        res = run(design, table, TrialConfig(cfg.rounds, cfg.seed, cfg.arrival_model))
        lo, hi = res.network_ci
        row |= {"ser_montecarlo": res.network, "ci_lo": lo, "ci_hi": hi}
    return row


def cmd_ser(spec: SweepSpec, montecarlo: bool = False, timestamp: bool = False) -> str:
    """Network error probability along a sweep.

    Infeasible points keep their row with a blank probability and
    ``status=infeasible``; the sweep continues past them.
    """
    cfgs = spec.configs()
    with ThreadPoolExecutor(max_workers=spec.base.workers) as pool:
        points = list(pool.map(lambda c: _ser_point(c, montecarlo), cfgs))
    cols = [spec.key] + [c for c in ("scheme", "M", "rho", "k_memory", "p_error", "status")
                         if c != spec.key]
    if montecarlo:
        cols += ["ser_montecarlo", "ci_lo", "ci_hi"]
    rows = [[v] + [p.get(c, "") for c in cols[1:]] for v, p in zip(spec.values, points)]
    extra = {"sweep_parameter": spec.key, "sweep_values": tuple(spec.values),
             "montecarlo": montecarlo}
    return _csv(_header("ser", spec.base, extra, timestamp), cols, rows)


def cmd_complexity(Ks: Sequence[int], Ms: Sequence[int], timestamp: bool = False) -> str:
    rows = [(K, scheme, M) + tuple(count_threshold_computations(scheme, K, M))
            for K in Ks for M in Ms for scheme in SCHEMES]
    extra = {"sweep_K": tuple(Ks), "sweep_M": tuple(Ms)}
    return _csv(_header("complexity", None, extra, timestamp),
                ("K", "scheme", "M", "threshold_count", "cir_count"), rows)


def cmd_montecarlo(cfg: ExperimentConfig, workers: int | None = None,
                   timestamp: bool = False) -> str:
    """Analytic and simulated error rates for one configuration, side by side."""
    table = cfg.cir_table()
    design = cfg.design(table)
    report = network_error_prob(design, table)
    res = run(design, table, TrialConfig(cfg.rounds, cfg.seed, cfg.arrival_model,
                                         workers=workers or cfg.workers))
    head = (design.scheme, design.M, "" if design.rho is None else design.rho,
            report.d_bar, report.t_sym, report.isi_memory)
    rows = [("analytic",) + tuple(r) + ("", "") for r in report.rows()]
    rows += list(res.rows(head))
    # workers do not affect results, keep them out of the header
    hdr_cfg = cfg.replace(workers=1)
    return _csv(_header("montecarlo", hdr_cfg, timestamp=timestamp), SIM_COLUMNS, rows)


def cmd_cir_dump(cfg: ExperimentConfig, timestamp: bool = False) -> str:
    table = cfg.cir_table()
    rows = []
    for k, y in enumerate(table.topology.distances):
        rows += [(k, y, i + 1, h) for i, h in enumerate(table.per_tx[k])]
    rows += [("avg", "", i + 1, h) for i, h in enumerate(table.averaged)]
    return _csv(_header("cir-dump", cfg, timestamp=timestamp),
                ("tx_index", "y_um", "period", "h"), rows)

