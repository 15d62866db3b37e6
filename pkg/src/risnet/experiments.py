"""Seeded Monte Carlo experiment runner.

Four experiments are provided: ensemble power scaling over Rayleigh
channels, architecture power-gain curves, a planar deployment with
distance-dependent pathloss and Rician fading, and per-instance bound
tightness. Results are emitted as CSV or JSON rows with a fixed column
order; the config hash and base seed are embedded so any output file can be
reproduced exactly.

Trials are independent: trial t draws its channels from a stream derived
from (seed, cell, t), so results do not depend on the worker count, and
rows are always merged in trial order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .architectures import Topology
from .channels import (
    ChannelRealization,
    Geometry2D,
    PathlossParams,
    RicianSpec,
    draw_geometry_realization,
    draw_rayleigh_vector,
    rician_k_from_db,
    trial_rng,
)
from .optimize import Objective, SolverConfig, align_direct_phase, solve
from .scaling import expected_power_rayleigh, group_connected_bound, power_gain

EXPERIMENTS = (
    "scaling_rayleigh",
    "power_gain_curve",
    "rician_geometry",
    "bound_tightness",
)

COLUMNS = (
    "experiment", "n_i", "n_g", "k_db", "mean_power_watts", "std_error",
    "analytic_value", "gain_vs_single", "trials", "seed",
)


class ConfigError(ValueError):
    """The experiment configuration is invalid; nothing was run."""


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment run.

    ``group_sizes`` lists the group-connected sizes to evaluate; the single
    connected baseline and the fully connected case are always included.
    ``p_t`` scales reported powers for the geometry experiment only; the
    ensemble experiments use unit transmit power by convention.
    """

    experiment: str
    n_i_list: list
    group_sizes: list = field(default_factory=list)
    rician_k_db_list: list = field(default_factory=list)
    trials: int = 1000
    seed: int = 0
    geometry: Geometry2D = field(default_factory=Geometry2D)
    pathloss: PathlossParams = field(default_factory=PathlossParams)
    p_t: float = 1.0
    solver: SolverConfig = field(default_factory=SolverConfig)
    output_path: str | None = None
    workers: int = 1

    def validate(self):
        problems = []
        if self.experiment not in EXPERIMENTS:
            problems.append(f"unknown experiment {self.experiment!r}, "
                            f"expected one of {EXPERIMENTS}")
        if not self.n_i_list:
            problems.append("n_i_list must not be empty")
        if any(int(n) < 1 for n in self.n_i_list):
            problems.append("element counts must be positive")
        for n_g in self.group_sizes:
            for n_i in self.n_i_list:
                if int(n_g) < 1 or int(n_i) % int(n_g) != 0:
                    problems.append(f"group size {n_g} does not divide n_i = {n_i}")
        if self.trials < 1:
            problems.append("trials must be at least 1")
        if self.seed < 0:
            problems.append("seed must be non-negative")
        if self.p_t <= 0:
            problems.append("transmit power p_t must be positive")
        if self.workers < 1:
            problems.append("workers must be at least 1")
        if self.experiment == "rician_geometry" and not self.rician_k_db_list:
            problems.append("rician_geometry requires a non-empty rician_k_db_list")
        if problems:
            raise ConfigError("; ".join(problems))

    def to_json(self):
        return {
            "experiment": self.experiment,
            "n_i_list": [int(n) for n in self.n_i_list],
            "group_sizes": [int(g) for g in self.group_sizes],
            "rician_k_db_list": [float(k) for k in self.rician_k_db_list],
            "trials": int(self.trials),
            "seed": int(self.seed),
            "geometry": {
                "tx": list(self.geometry.tx),
                "rx": list(self.geometry.rx),
                "ris_center": list(self.geometry.ris_center),
                "spacing_wavelengths": self.geometry.spacing_wavelengths,
                "wavelength": self.geometry.wavelength,
            },
            "pathloss": {
                "c0_db": self.pathloss.c0_db,
                "d0": self.pathloss.d0,
                "alpha_rt": self.pathloss.alpha_rt,
                "alpha_it": self.pathloss.alpha_it,
                "alpha_ri": self.pathloss.alpha_ri,
            },
            "p_t": float(self.p_t),
            "solver": {
                "max_iterations": self.solver.max_iterations,
                "gradient_tolerance": self.solver.gradient_tolerance,
                "step_tolerance": self.solver.step_tolerance,
                "restarts": self.solver.restarts,
                "seed": self.solver.seed,
            },
            "output_path": self.output_path,
            "workers": int(self.workers),
        }

    @classmethod
    def from_json(cls, data):
        def take(d, allowed, where):
            unknown = set(d) - set(allowed)
            if unknown:
                raise ConfigError(f"unknown {where} fields: {sorted(unknown)}")
            return {k: d[k] for k in allowed if k in d}

        top = take(data, [f for f in cls.__dataclass_fields__], "config")
        try:
            if "geometry" in top:
                g = take(top["geometry"],
                         ["tx", "rx", "ris_center", "spacing_wavelengths", "wavelength"],
                         "geometry")
                for key in ("tx", "rx", "ris_center"):
                    if key in g:
                        g[key] = tuple(float(v) for v in g[key])
                top["geometry"] = Geometry2D(**g)
            if "pathloss" in top:
                p = take(top["pathloss"],
                         ["c0_db", "d0", "alpha_rt", "alpha_it", "alpha_ri"], "pathloss")
                top["pathloss"] = PathlossParams(**p)
            if "solver" in top:
                s = take(top["solver"],
                         ["max_iterations", "gradient_tolerance", "step_tolerance",
                          "restarts", "seed"], "solver")
                top["solver"] = SolverConfig(**s)
            return cls(**top)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid config: {exc}") from exc

    @classmethod
    def from_file(cls, path):
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_json(data)

    def config_hash(self):
        """Hash of the scientific parameters (output path and worker count
        do not affect results and are excluded)."""
        payload = self.to_json()
        payload.pop("output_path")
        payload.pop("workers")
        canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    n_i: int
    n_g: int
    k_db: float | None
    mean_power_watts: float | None
    std_error: float | None
    analytic_value: float | None
    gain_vs_single: float | None
    trials: int
    seed: int

    def as_tuple(self):
        return tuple(getattr(self, c) for c in COLUMNS)


@dataclass
class ResultTable:
    """Rows plus the provenance needed to reproduce them."""

    rows: list
    config_hash: str
    seed: int

    def to_csv_text(self):
        lines = [f"# config_hash={self.config_hash} seed={self.seed}"]
        lines.append(",".join(COLUMNS))
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row.as_tuple()))
        return "\n".join(lines) + "\n"

    def to_json_text(self):
        payload = {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "columns": list(COLUMNS),
            "rows": [dict(zip(COLUMNS, row.as_tuple())) for row in self.rows],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


_INT_COLUMNS = {"n_i", "n_g", "trials", "seed"}
_STR_COLUMNS = {"experiment"}


def _parse_cell(column, text):
    if column in _STR_COLUMNS:
        return text
    if text == "" or text is None:
        return None
    if column in _INT_COLUMNS:
        return int(text)
    return float(text)


def read_result_csv(path):
    """Parse a CSV file produced by emit back into a ResultTable."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError(f"{path} is missing the provenance header line")
    meta = dict(kv.split("=", 1) for kv in lines[0][2:].split())
    if lines[1] != ",".join(COLUMNS):
        raise ValueError(f"{path} has an unexpected column header")
    rows = []
    for line in lines[2:]:
        if not line:
            continue
        cells = line.split(",")
        rows.append(ResultRow(*[_parse_cell(c, v) for c, v in zip(COLUMNS, cells)]))
    return ResultTable(rows, meta["config_hash"], int(meta["seed"]))


def read_result_json(path):
    """Parse a JSON file produced by emit back into a ResultTable."""
    payload = json.loads(Path(path).read_text())
    rows = [ResultRow(*[_parse_cell(c, r.get(c)) for c in COLUMNS])
            for r in payload["rows"]]
    return ResultTable(rows, payload["config_hash"], int(payload["seed"]))


def emit(table, path, fmt="csv"):
    """Write a ResultTable to ``path`` as CSV or JSON.

    The same table always produces byte-identical output.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}, expected 'csv' or 'json'")
    text = table.to_csv_text() if fmt == "csv" else table.to_json_text()
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"could not write results to {path}: {exc}") from exc
    return Path(path)


def _mc(trial_fn, trials, workers):
    """Run trials, in parallel when asked, always returning trial order."""
    if workers > 1:
        from joblib import Parallel, delayed

        return Parallel(n_jobs=workers)(delayed(trial_fn)(t) for t in range(trials))
    return [trial_fn(t) for t in range(trials)]


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
    return mean, se


def _arch_sizes(n_i, group_sizes):
    """Group sizes to evaluate at a given element count: the single connected
    baseline, the configured group sizes, and the fully connected case."""
    sizes = {1, int(n_i)}
    sizes.update(int(g) for g in group_sizes if 1 <= int(g) <= int(n_i))
    return sorted(sizes)


def run_scaling_rayleigh(cfg):
    """Optimized power and upper bound versus element count over i.i.d.
    CN(0, 1) channels, unit transmit power, no direct channel.

    Two rows per (n_i, group size): experiment 'scaling_rayleigh/optimized'
    and '/bound', both with the closed-form expectation in analytic_value.
    """
    rows = []
    for ci, n_i in enumerate(int(n) for n in cfg.n_i_list):
        archs = _arch_sizes(n_i, cfg.group_sizes)

        def trial(t, n_i=n_i, archs=archs, ci=ci):
            rng = trial_rng(cfg.seed, ci, t)
            h_ri = draw_rayleigh_vector(n_i, rng)
            h_it = draw_rayleigh_vector(n_i, rng)
            real = ChannelRealization(0.0, h_it, h_ri)
            out = np.empty((len(archs), 2))
            for ai, n_g in enumerate(archs):
                res = solve(Objective(real, Topology(n_i, n_g)), cfg.solver)
                out[ai] = (res.power, res.bound)
            return out

        data = np.stack(_mc(trial, cfg.trials, cfg.workers))
        for qi, quantity in enumerate(("optimized", "bound")):
            means_ses = [_mean_se(data[:, ai, qi]) for ai in range(len(archs))]
            single_mean = means_ses[0][0]
            for ai, n_g in enumerate(archs):
                mean, se = means_ses[ai]
                rows.append(ResultRow(
                    f"scaling_rayleigh/{quantity}", n_i, n_g, None, mean, se,
                    expected_power_rayleigh(n_i, n_g),
                    mean / single_mean if single_mean > 0 else None,
                    cfg.trials, cfg.seed,
                ))
    return ResultTable(rows, cfg.config_hash(), cfg.seed)


def run_power_gain_curve(cfg):
    """Power gain of the group and fully connected families over single
    connected, versus element count.

    mean_power_watts holds the Monte Carlo mean of the per-family upper
    bound (tight in practice), gain_vs_single its ratio to the single
    connected mean, and analytic_value the closed-form gain.
    """
    rows = []
    for ci, n_i in enumerate(int(n) for n in cfg.n_i_list):
        archs = _arch_sizes(n_i, cfg.group_sizes)

        def trial(t, n_i=n_i, archs=archs, ci=ci):
            rng = trial_rng(cfg.seed, ci, t)
            h_ri = draw_rayleigh_vector(n_i, rng)
            h_it = draw_rayleigh_vector(n_i, rng)
            return [group_connected_bound(h_ri, h_it, n_g) for n_g in archs]

        data = np.asarray(_mc(trial, cfg.trials, cfg.workers))
        means_ses = [_mean_se(data[:, ai]) for ai in range(len(archs))]
        single_mean = means_ses[0][0]
        for ai, n_g in enumerate(archs):
            mean, se = means_ses[ai]
            rows.append(ResultRow(
                "power_gain_curve", n_i, n_g, None, mean, se,
                power_gain(n_i, n_g).gain_group,
                mean / single_mean if single_mean > 0 else None,
                cfg.trials, cfg.seed,
            ))
    return ResultTable(rows, cfg.config_hash(), cfg.seed)


def run_rician_geometry(cfg):
    """Optimized received power in the planar deployment, in watts.

    The transmitter-receiver and surface-receiver links fade Rayleigh, the
    transmitter-surface link Rician with each configured factor. Rows come
    in two variants: 'rician_geometry/with_direct' adds the direct channel
    in phase with the cascade, '/cascade_only' reports the cascade alone;
    gains are relative to single connected within the same variant.
    """
    rows = []
    for ci, n_i in enumerate(int(n) for n in cfg.n_i_list):
        archs = _arch_sizes(n_i, cfg.group_sizes)
        for ki, k_db in enumerate(float(k) for k in cfg.rician_k_db_list):
            rician = RicianSpec(k_it=float(rician_k_from_db(k_db)))

            def trial(t, n_i=n_i, archs=archs, ci=ci, ki=ki, rician=rician):
                rng = trial_rng(cfg.seed, ci, ki, t)
                real = draw_geometry_realization(
                    cfg.geometry, cfg.pathloss, rician, rng, n_i=n_i)
                out = np.empty((len(archs), 2))
                for ai, n_g in enumerate(archs):
                    res = solve(Objective(real, Topology(n_i, n_g)), cfg.solver)
                    out[ai, 0] = res.power
                    out[ai, 1] = align_direct_phase(real.h_rt, np.sqrt(res.power))
                return out

            data = np.stack(_mc(trial, cfg.trials, cfg.workers)) * cfg.p_t
            for qi, variant in enumerate(("cascade_only", "with_direct")):
                means_ses = [_mean_se(data[:, ai, qi]) for ai in range(len(archs))]
                single_mean = means_ses[0][0]
                for ai, n_g in enumerate(archs):
                    mean, se = means_ses[ai]
                    rows.append(ResultRow(
                        f"rician_geometry/{variant}", n_i, n_g, k_db, mean, se,
                        None,
                        mean / single_mean if single_mean > 0 else None,
                        cfg.trials, cfg.seed,
                    ))
    return ResultTable(rows, cfg.config_hash(), cfg.seed)


def run_bound_tightness(cfg):
    """Distribution of the per-instance relative gap between the optimized
    power and its upper bound, over i.i.d. CN(0, 1) channels.

    Three rows per (n_i, group size) carry the mean, 95th percentile, and
    maximum gap in the value column.
    """
    rows = []
    for ci, n_i in enumerate(int(n) for n in cfg.n_i_list):
        archs = _arch_sizes(n_i, cfg.group_sizes)

        def trial(t, n_i=n_i, archs=archs, ci=ci):
            rng = trial_rng(cfg.seed, ci, t)
            h_ri = draw_rayleigh_vector(n_i, rng)
            h_it = draw_rayleigh_vector(n_i, rng)
            real = ChannelRealization(0.0, h_it, h_ri)
            return [solve(Objective(real, Topology(n_i, n_g)), cfg.solver).gap
                    for n_g in archs]

        data = np.asarray(_mc(trial, cfg.trials, cfg.workers))
        for ai, n_g in enumerate(archs):
            gaps = data[:, ai]
            mean, se = _mean_se(gaps)
            stats = (("mean_gap", mean, se),
                     ("p95_gap", float(np.percentile(gaps, 95)), None),
                     ("max_gap", float(np.max(gaps)), None))
            for stat, value, stat_se in stats:
                rows.append(ResultRow(
                    f"bound_tightness/{stat}", n_i, n_g, None, value, stat_se,
                    None, None, cfg.trials, cfg.seed,
                ))
    return ResultTable(rows, cfg.config_hash(), cfg.seed)


_RUNNERS = {
    "scaling_rayleigh": run_scaling_rayleigh,
    "power_gain_curve": run_power_gain_curve,
    "rician_geometry": run_rician_geometry,
    "bound_tightness": run_bound_tightness,
}


def run(cfg):
    """Validate the config and run its experiment."""
    cfg.validate()
    return _RUNNERS[cfg.experiment](cfg)
