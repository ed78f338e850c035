"""Config files, Monte Carlo sweeps and CSV output."""
from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .baselines import SCHEMES, run_scheme
from .channel import apply_estimation_error, draw_channel_set
from .config import CircuitPower, ConfigError, Geometry, Medium, SolverSettings, SystemConfig

AXES = ("power_dbm", "x_ris", "y_ris", "rho_e", "rho_si", "N")
RESULT_HEADER = ("scheme", "axis", "trial", "F_bits", "EE_bits_per_J", "T1",
                 "C1U", "C2U", "C1D", "C2D", "R1U", "R2U", "R1D", "R2D", "iters", "ms")
SUMMARY_HEADER = ("scheme", "axis", "n", "F_mean", "F_std", "EE_mean", "EE_std")
FAILURE_HEADER = ("scheme", "axis", "trial", "error")
DEFAULT_TRIALS = 100


@dataclass(frozen=True)
class Experiment:
    """A sweep of one system parameter. Empty ``values`` means the config's own value."""

    name: str = "default"
    axis: str = "power_dbm"
    values: tuple[float, ...] = ()
    trials: int = DEFAULT_TRIALS
    schemes: tuple[str, ...] = SCHEMES
    out: str = "results"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if self.axis not in AXES:
            raise ConfigError("experiment.axis", f"must be one of {AXES}, got {self.axis!r}")
        if self.trials < 1:
            raise ConfigError("experiment.trials", "must be >= 1")
        if self.workers < 1:
            raise ConfigError("experiment.workers", "must be >= 1")
        if not all(math.isfinite(v) for v in self.values):
            raise ConfigError("experiment.values", "must be finite")
        if list(self.values) != sorted(self.values):
            raise ConfigError("experiment.values", "must be sorted ascending")
        if not self.schemes:
            raise ConfigError("experiment.schemes", "needs at least one scheme")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ConfigError("experiment.schemes", f"unknown scheme(s) {unknown}")
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError("experiment.schemes", "duplicate scheme")

    def axis_values(self, config: SystemConfig) -> tuple[float, ...]:
        return self.values or (axis_value(config, self.axis),)


@dataclass
class ResultRow:
    scheme: str
    axis: float
    trial: int
    F: float
    EE: float
    T1: float
    capacities: tuple[float, float, float, float]
    rates: tuple[float, float, float, float]
    iterations: int
    ms: float | None = None
    trace: list = field(default_factory=list, repr=False)
    axis_index: int = 0

    def csv_fields(self) -> list[str]:
        vals = [self.F, self.EE, self.T1, *self.capacities, *self.rates]
        ms = "" if self.ms is None else repr(self.ms)
        return [self.scheme, _fmt(self.axis), str(self.trial), *map(repr, vals), str(self.iterations), ms]


@dataclass
class Failure:
    scheme: str
    axis: float
    trial: int
    error: str
    axis_index: int = 0


def _fmt(v) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 2 ** 53 else repr(v)


# ---------------------------------------------------------------- config I/O

def _schema() -> dict:
    return json.loads(resources.files("crossris").joinpath("config.schema.json").read_text())


def _nested(path: str, build):
    try:
        return build()
    except ConfigError as exc:
        raise ConfigError(f"{path}.{exc.path}", str(exc).split(": ", 1)[1]) from None


def _system_from_dict(d: dict) -> SystemConfig:
    kw = {k: v for k, v in d.items() if k not in ("media", "geometry", "circuit", "solver")}
    defaults = SystemConfig()
    if "media" in d:
        media = []
        for i, (m, base) in enumerate(zip(d["media"], defaults.media)):
            fields = {**dataclasses.asdict(base), **m}
            media.append(_nested(f"system.media[{i}]", lambda f=fields: Medium(**f)))
        kw["media"] = tuple(media)
    if "geometry" in d:
        kw["geometry"] = _nested("system.geometry", lambda: Geometry(**{k: tuple(v) for k, v in d["geometry"].items()}))
    if "circuit" in d:
        kw["circuit"] = _nested("system.circuit", lambda: CircuitPower(**d["circuit"]))
    if "solver" in d:
        s = dict(d["solver"])
        if "smoothing" in s:
            s["smoothing"] = tuple(s["smoothing"])
        kw["solver"] = _nested("system.solver", lambda: SolverSettings(**s))
    return _nested("system", lambda: SystemConfig(**kw))


def parse_config(data: dict) -> tuple[SystemConfig, Experiment]:
    """Validate a decoded config document and build the dataclasses."""
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path).lstrip(".")
        raise ConfigError(path or "<root>", err.message)
    system = _system_from_dict(data.get("system", {}))
    exp = data.get("experiment", {})
    experiment = Experiment(**{**exp, **({"values": tuple(exp["values"])} if "values" in exp else {}),
                               **({"schemes": tuple(exp["schemes"])} if "schemes" in exp else {})})
    return system, experiment


def load_config(path) -> tuple[SystemConfig, Experiment]:
    """Read a JSON config; missing fields take the defaults."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    except OSError as exc:
        raise ConfigError("<file>", str(exc)) from None
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    return parse_config(data)


def config_to_dict(config: SystemConfig, experiment: Experiment | None = None) -> dict:
    system = dataclasses.asdict(config)
    system["media"] = [dataclasses.asdict(m) for m in config.media]
    system["geometry"] = {k: list(v) for k, v in system["geometry"].items()}
    system["solver"]["smoothing"] = list(config.solver.smoothing)
    out = {"system": system}
    if experiment is not None:
        e = dataclasses.asdict(experiment)
        e["values"] = list(experiment.values)
        e["schemes"] = list(experiment.schemes)
        out["experiment"] = e
    return out


def save_config(path, config: SystemConfig, experiment: Experiment | None = None) -> None:
    Path(path).write_text(json.dumps(config_to_dict(config, experiment), indent=2) + "\n")


# ---------------------------------------------------------------- sweeps

def axis_value(config: SystemConfig, axis: str) -> float:
    if axis == "x_ris":
        return config.geometry.ris[0]
    if axis == "y_ris":
        return config.geometry.ris[1]
    return float(getattr(config, axis))


def with_axis(config: SystemConfig, axis: str, value: float) -> SystemConfig:
    """Copy of ``config`` with one sweep parameter replaced."""
    if axis == "x_ris":
        geo = dataclasses.replace(config.geometry, ris=(float(value), config.geometry.ris[1]))
        return dataclasses.replace(config, geometry=geo)
    if axis == "y_ris":
        geo = dataclasses.replace(config.geometry, ris=(config.geometry.ris[0], float(value)))
        return dataclasses.replace(config, geometry=geo)
    if axis == "N":
        if not float(value).is_integer():
            raise ConfigError("experiment.values", f"N must be an integer, got {value}")
        return dataclasses.replace(config, N=int(value))
    if axis not in AXES:
        raise ConfigError("experiment.axis", f"unknown axis {axis!r}")
    return dataclasses.replace(config, **{axis: float(value)})


def trial_seed(master: int, axis_index: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, axis_index, trial])


def run_trial(config: SystemConfig, schemes, axis_index: int, axis_val: float, trial: int,
              master: int, timing: bool = False):
    """Draw one realization and run every scheme on it. Returns (rows, failures)."""
    chan_seq, phase_seq = trial_seed(master, axis_index, trial).spawn(2)
    rows, failures = [], []
    try:
        channels = draw_channel_set(config, np.random.default_rng(chan_seq))
        channels, _ = apply_estimation_error(channels, config.rho_e)
    except Exception as exc:  # noqa: BLE001 - recorded, not fatal
        msg = f"{type(exc).__name__}: {exc}"
        return [], [Failure(s, axis_val, trial, msg, axis_index) for s in schemes]
    p2 = None
    for scheme in schemes:
        t0 = time.perf_counter()
        try:
            res = run_scheme(scheme, config, channels, rng=np.random.default_rng(phase_seq), p2=p2)
        except Exception as exc:  # noqa: BLE001
            failures.append(Failure(scheme, axis_val, trial, f"{type(exc).__name__}: {exc}", axis_index))
            continue
        ms = (time.perf_counter() - t0) * 1e3 if timing else None
        sol = res.solution
        if scheme == "P2":
            p2 = sol
        rows.append(ResultRow(
            scheme=scheme, axis=axis_val, trial=trial, F=res.F, EE=res.EE, T1=sol.alloc.T1,
            capacities=tuple(float(c) for c in sol.capacities), rates=tuple(float(r) for r in sol.rates),
            iterations=sol.iterations, ms=ms, trace=[float(f) for f in sol.trace], axis_index=axis_index))
    return rows, failures


def _run_item(item):
    return run_trial(*item)


def _ordered_schemes(schemes) -> tuple[str, ...]:
    # P2 first so 2bitPhi can reuse it; output order is fixed later by sorting.
    return tuple(sorted(schemes, key=lambda s: s != "P2"))


def run_experiment(config: SystemConfig, experiment: Experiment, seed: int | None = None,
                   timing: bool = False):
    """Run every (axis value, trial) pair. Returns (rows, failures), both sorted.

    Output does not depend on ``experiment.workers``.
    """
    master = config.solver.seed if seed is None else seed
    schemes = _ordered_schemes(experiment.schemes)
    items = []
    for k, v in enumerate(experiment.axis_values(config)):
        point_cfg = with_axis(config, experiment.axis, v)
        for t in range(experiment.trials):
            items.append((point_cfg, schemes, k, v, t, master, timing))
    rows, failures = [], []
    if experiment.workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=experiment.workers) as pool:
            results = list(pool.map(_run_item, items, chunksize=max(1, len(items) // (4 * experiment.workers))))
    else:
        results = [_run_item(it) for it in items]
    for r, f in results:
        rows.extend(r)
        failures.extend(f)
    order = {s: i for i, s in enumerate(SCHEMES)}
    rows.sort(key=lambda r: (order[r.scheme], r.axis_index, r.trial))
    failures.sort(key=lambda f: (order[f.scheme], f.axis_index, f.trial))
    return rows, failures


# ---------------------------------------------------------------- output

def summarize(rows) -> list[tuple]:
    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.scheme, r.axis_index, r.axis), []).append(r)
    out = []
    for (scheme, _, axis), rs in groups.items():
        F = np.array([r.F for r in rs])
        EE = np.array([r.EE for r in rs])
        ddof = 1 if len(rs) > 1 else 0
        out.append((scheme, axis, len(rs), float(F.mean()), float(F.std(ddof=ddof)),
                    float(EE.mean()), float(EE.std(ddof=ddof))))
    return out


def write_results(rows, out_dir, failures=(), traces: bool = True) -> list[Path]:
    """Write results.csv, summary.csv, failures.csv and one trace file per
    (scheme, axis point) from its lowest-numbered trial."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name, header, lines):
        path = out / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(lines)
        written.append(path)

    emit("results.csv", RESULT_HEADER, [r.csv_fields() for r in rows])
    emit("summary.csv", SUMMARY_HEADER,
         [[s, _fmt(a), str(n), *map(repr, stats)] for s, a, n, *stats in summarize(rows)])
    emit("failures.csv", FAILURE_HEADER, [[f.scheme, _fmt(f.axis), str(f.trial), f.error] for f in failures])
    if traces:
        first: dict[tuple, ResultRow] = {}
        for r in rows:
            key = (r.scheme, r.axis_index)
            if key not in first or r.trial < first[key].trial:
                first[key] = r
        for (scheme, k), r in sorted(first.items()):
            emit(f"trace_{scheme}_{k}.csv", ("iteration", "F_bits"),
                 [[str(i), repr(f)] for i, f in enumerate(r.trace)])
    return written
