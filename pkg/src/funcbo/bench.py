"""Experiment harness: flat-text configs, CSV results, ask/tell state.

Config files are flat ``key = value`` lines with dotted keys; blank
lines and ``#`` comments are allowed.  Parsing is total: unknown or
duplicate keys are errors.  All floats are serialised with repr(), so
writing and re-reading any artifact is byte-stable and reruns of the
same config produce byte-identical output.

Ask/tell state files extend the config format with a ``[trace]`` CSV
section, an optional ``[pending]`` suggestion and an ``[rng]`` draw
counter.  Loading a state replays the recorded evaluations through a
fresh engine (re-drawing every random value in order), which both
reconstructs the exact internal state and verifies the file against the
deterministic run schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import optimizer
from .errors import ConfigError, InputError, ProtocolError
from .gridfn import GridSpec, read_function_csv, write_function_csv
from .kernels import DISTANCE_KINDS, METRICS, SCALAR_KINDS, ScalarKernelSpec
from .objectives import EffectiveDimObjective, MatchingObjective
from .optimizer import ALGORITHMS, TERMINATIONS, OptConfig, RunRecord

OBJECTIVE_KINDS = ("match", "effdim")


def _parse_int(text: str) -> int:
    return int(text)


def _parse_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


def _parse_lengthscale(text: str):
    return "mle" if text == "mle" else _parse_float(text)


def _parse_enum(options):
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text

    return parse


def _parse_algorithms(text: str) -> tuple[str, ...]:
    names = tuple(part.strip() for part in text.split(",") if part.strip())
    if not names:
        raise ValueError("must list at least one algorithm")
    for name in names:
        if name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {name!r}")
    return names


# key -> (parser, default)
SCHEMA = {
    "grid.dim": (_parse_int, 1),
    "grid.points_per_axis": (_parse_int, 100),
    "kappa.kind": (_parse_enum(SCALAR_KINDS), "se"),
    "kappa.lengthscale": (_parse_float, 0.3),
    "K.kind": (_parse_enum(DISTANCE_KINDS), "se"),
    "K.metric": (_parse_enum(METRICS), "l2grid"),
    "K.lengthscale": (_parse_lengthscale, "mle"),
    "noise.sigma": (_parse_float, 0.01),
    "mle.grid_min": (_parse_float, 0.01),
    "mle.grid_max": (_parse_float, 10.0),
    "mle.grid_points": (_parse_int, 17),
    "acq.delta": (_parse_float, 0.1),
    "acq.restarts": (_parse_int, 8),
    "acq.local_steps": (_parse_int, 40),
    "acq.lambda_box": (_parse_float, 4.0),
    "opt.l_max": (_parse_float, 10.0),
    "opt.algorithm": (_parse_enum(ALGORITHMS), "s3bfo"),
    "opt.d": (_parse_int, 1),
    "opt.S": (_parse_int, 4),
    "opt.T": (_parse_int, 30),
    "opt.n_init": (_parse_int, 5),
    "opt.termination": (_parse_enum(TERMINATIONS), "budget"),
    "opt.epsilon": (_parse_float, 0.01),
    "opt.seed": (_parse_int, 0),
    "objective.kind": (_parse_enum(OBJECTIVE_KINDS), "match"),
    "objective.target_kernel": (_parse_enum(SCALAR_KINDS), "se"),
    "objective.target_lengthscale": (_parse_float, 0.3),
    "objective.target_seed": (_parse_int, 123),
    "objective.noise": (_parse_float, 0.01),
    "objective.d_e": (_parse_int, 2),
    "bench.repeats": (_parse_int, 5),
    "bench.base_seed": (_parse_int, 0),
    "bench.algorithms": (_parse_algorithms, ("s3bfo",)),
}

_BENCH_KEYS = ("bench.repeats", "bench.base_seed", "bench.algorithms")


def default_config() -> dict:
    return {key: default for key, (_, default) in SCHEMA.items()}


def parse_config_lines(lines, values: dict | None = None) -> dict:
    """Apply ``key = value`` lines on top of defaults; total, no unknowns."""
    values = default_config() if values is None else values
    seen = set()
    for idx, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {idx}: expected 'key = value', got {line!r}")
        key, _, text = line.partition("=")
        key, text = key.strip(), text.strip()
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        if key in seen:
            raise ConfigError(f"duplicate config key {key!r}")
        seen.add(key)
        try:
            values[key] = SCHEMA[key][0](text)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    return values


def parse_config(path) -> dict:
    return parse_config_lines(Path(path).read_text().splitlines())


def format_value(value) -> str:
    if isinstance(value, bool):
        raise ConfigError(f"unsupported config value {value!r}")
    if isinstance(value, tuple):
        return ",".join(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def build_opt_config(values: dict) -> OptConfig:
    try:
        return OptConfig(
            grid=GridSpec(values["grid.dim"], values["grid.points_per_axis"]),
            kappa=ScalarKernelSpec(values["kappa.kind"], values["kappa.lengthscale"]),
            k_kind=values["K.kind"],
            k_metric=values["K.metric"],
            k_lengthscale=values["K.lengthscale"],
            noise_sigma=values["noise.sigma"],
            d=values["opt.d"],
            S=values["opt.S"],
            T=values["opt.T"],
            n_init=values["opt.n_init"],
            termination=values["opt.termination"],
            epsilon=values["opt.epsilon"],
            seed=values["opt.seed"],
            acq_delta=values["acq.delta"],
            acq_restarts=values["acq.restarts"],
            acq_local_steps=values["acq.local_steps"],
            acq_lambda_box=values["acq.lambda_box"],
            l_max=values["opt.l_max"],
            mle_grid_min=values["mle.grid_min"],
            mle_grid_max=values["mle.grid_max"],
            mle_grid_points=values["mle.grid_points"],
        )
    except InputError as exc:
        raise ConfigError(str(exc)) from exc


def build_objective(values: dict, grid: GridSpec):
    kernel = ScalarKernelSpec(
        values["objective.target_kernel"], values["objective.target_lengthscale"]
    )
    if values["objective.kind"] == "match":
        return MatchingObjective.from_kernel(
            grid, kernel, values["objective.target_seed"], values["objective.noise"]
        )
    d_e = values["objective.d_e"]
    if d_e < 1:
        raise ConfigError("objective.d_e must be >= 1")
    target_child, dir_child = np.random.SeedSequence(
        values["objective.target_seed"]
    ).spawn(2)
    targets = 0.5 * np.random.default_rng(target_child).standard_normal(d_e)
    return EffectiveDimObjective.random_directions(
        grid, kernel, targets, dir_child, values["objective.noise"]
    )


# --- trace and summary CSV ----------------------------------------------


def write_trace_csv(path, trace: list[RunRecord]) -> None:
    aux_keys = sorted({key for rec in trace for key in rec.aux})
    header = ["eval_index", "s", "t", "y", "best_y", *aux_keys]
    lines = [",".join(header)]
    for rec in trace:
        row = [str(rec.eval_index), str(rec.s), str(rec.t), repr(rec.y), repr(rec.best_y)]
        row += [repr(float(rec.aux[key])) for key in aux_keys]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace_csv(path) -> list[dict]:
    """Trace rows as dicts (the CSV does not carry coordinates or aux
    structure beyond its columns)."""
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(header):
            raise InputError(f"bad trace row: {line!r}")
        row = dict(zip(header, parts))
        for key in ("eval_index", "s", "t"):
            row[key] = int(row[key])
        for key in header[3:]:
            row[key] = float(row[key])
        rows.append(row)
    return rows


def write_summary_csv(path, series: list[np.ndarray]) -> None:
    """Per-index median/min/max across repeat series of equal meaning."""
    length = min(len(s) for s in series)
    stack = np.array([np.asarray(s)[:length] for s in series])
    lines = ["eval_index,median,min,max"]
    for i in range(length):
        col = stack[:, i]
        lines.append(
            f"{i},{float(np.median(col))!r},{float(np.min(col))!r},{float(np.max(col))!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def best_gap_series(trace: list[RunRecord]) -> np.ndarray:
    """Running minimum of the noiseless matching gap along a trace."""
    return np.minimum.accumulate([rec.aux["l2_gap"] for rec in trace])


def best_y_series(trace: list[RunRecord]) -> np.ndarray:
    return np.array([rec.best_y for rec in trace])


@dataclass(frozen=True)
class BenchResult:
    trace_paths: dict[tuple[str, int], Path]
    summary_paths: dict[str, Path]
    traces: dict[tuple[str, int], list[RunRecord]]


def run_bench(values: dict, out_dir) -> BenchResult:
    """Run every configured (algorithm x repeat) cell and write CSVs.

    Per cell: one trace CSV, seeded base_seed + repeat.  Per algorithm:
    one summary CSV with the per-eval-index median and min/max across
    repeats of the best-so-far matching gap (or best_y for objectives
    without a gap diagnostic).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    opt_cfg = build_opt_config(values)
    objective = build_objective(values, opt_cfg.grid)
    matching = values["objective.kind"] == "match"
    repeats = values["bench.repeats"]
    if repeats < 1:
        raise ConfigError("bench.repeats must be >= 1")
    trace_paths, summary_paths, traces = {}, {}, {}
    for algorithm in values["bench.algorithms"]:
        series = []
        for rep in range(repeats):
            cfg = replace(opt_cfg, seed=values["bench.base_seed"] + rep)
            _, trace = optimizer.RUNNERS[algorithm](objective, cfg)
            path = out / f"trace_{algorithm}_rep{rep}.csv"
            write_trace_csv(path, trace)
            trace_paths[(algorithm, rep)] = path
            traces[(algorithm, rep)] = trace
            series.append(best_gap_series(trace) if matching else best_y_series(trace))
        spath = out / f"summary_{algorithm}.csv"
        write_summary_csv(spath, series)
        summary_paths[algorithm] = spath
    return BenchResult(trace_paths, summary_paths, traces)


# --- ask/tell state -------------------------------------------------------


def _lam_width(values: dict) -> int:
    return 1 if values["opt.algorithm"] == "linebo_bernstein" else values["opt.d"]


def save_state(path, values: dict, engine) -> None:
    width = _lam_width(values)
    lines = ["# funcbo ask/tell state"]
    for key in sorted(SCHEMA):
        if key in _BENCH_KEYS:
            continue
        lines.append(f"{key} = {format_value(values[key])}")
    lines.append("[trace]")
    lam_cols = [f"lambda{j}" for j in range(width)]
    lines.append(",".join(["eval_index", "s", "t", *lam_cols, "y", "best_y"]))
    for rec in engine.trace:
        row = [str(rec.eval_index), str(rec.s), str(rec.t)]
        row += [repr(v) for v in rec.lam]
        row += [repr(rec.y), repr(rec.best_y)]
        lines.append(",".join(row))
    if engine.pending is not None:
        kind, s, t, lam = engine.pending[0], engine.pending[1], engine.pending[2], engine.pending[3]
        lines.append("[pending]")
        lines.append(",".join([kind, str(s), str(t), *[repr(float(v)) for v in lam]]))
    lines.append("[rng]")
    lines.append(f"draws = {engine.draw_count}")
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_state_text(text: str):
    config_lines, trace_lines, pending_lines, rng_lines = [], [], [], []
    section = config_lines
    for raw in text.splitlines():
        line = raw.strip()
        if line == "[trace]":
            section = trace_lines
        elif line == "[pending]":
            section = pending_lines
        elif line == "[rng]":
            section = rng_lines
        elif line.startswith("[") and line.endswith("]"):
            raise ConfigError(f"unknown state section {line!r}")
        else:
            section.append(raw)
    values = parse_config_lines(config_lines)
    width = _lam_width(values)
    records = []
    body = [ln for ln in trace_lines if ln.strip()]
    for line in body[1:]:
        parts = line.split(",")
        if len(parts) != 5 + width:
            raise ConfigError(f"bad state trace row: {line!r}")
        records.append(
            RunRecord(
                eval_index=int(parts[0]),
                s=int(parts[1]),
                t=int(parts[2]),
                lam=tuple(float(v) for v in parts[3 : 3 + width]),
                y=float(parts[3 + width]),
                best_y=float(parts[4 + width]),
            )
        )
    pending = None
    body = [ln for ln in pending_lines if ln.strip()]
    if body:
        parts = body[0].split(",")
        if len(parts) != 3 + width or parts[0] not in ("init", "inner"):
            raise ConfigError(f"bad pending suggestion line: {body[0]!r}")
        pending = (
            parts[0],
            int(parts[1]),
            int(parts[2]),
            tuple(float(v) for v in parts[3:]),
        )
    draws = None
    for line in rng_lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, text_val = line.partition("=")
        if key.strip() != "draws":
            raise ConfigError(f"bad rng section line: {line!r}")
        draws = int(text_val.strip())
    return values, records, pending, draws


def load_state(path):
    """Parse a state (or plain config) file and replay it into an engine.

    Returns (values, engine).  Replay re-draws every random value the
    original session drew and checks the stored draw count, so stale or
    hand-edited states fail with a ProtocolError instead of silently
    diverging.
    """
    state_path = Path(path)
    if not state_path.exists():
        raise ConfigError(f"no such state file: {path}")
    values, records, pending, draws = _parse_state_text(state_path.read_text())
    engine = optimizer.make_engine(build_opt_config(values), values["opt.algorithm"])
    engine.replay(records, pending)
    if draws is not None and engine.draw_count != draws:
        raise ProtocolError(
            f"state rng cursor mismatch: replay drew {engine.draw_count}, file says {draws}"
        )
    return values, engine


def suggest(state_path, out_path) -> Path:
    """Emit the next query function as CSV and persist it as pending."""
    values, engine = load_state(state_path)
    if engine.pending is not None:
        raise ProtocolError("a suggestion is already pending; tell its value first")
    if engine.done:
        raise ProtocolError("run is complete; no further suggestions")
    g = engine.ask()
    write_function_csv(g, out_path)
    save_state(state_path, values, engine)
    return Path(out_path)


def tell(state_path, y: float) -> RunRecord:
    """Record the observed value for the pending suggestion."""
    values, engine = load_state(state_path)
    if engine.pending is None:
        raise ProtocolError("no pending suggestion; run suggest first")
    rec = engine.tell(float(y))
    save_state(state_path, values, engine)
    return rec


def export_function(state_path, out_path) -> Path:
    """Write the incumbent function of a finished run as CSV."""
    _, engine = load_state(state_path)
    if not engine.done:
        raise ProtocolError("run is not finished; cannot export the incumbent yet")
    best_g, _ = engine.best
    write_function_csv(best_g, out_path)
    return Path(out_path)


def reload_function(path):
    return read_function_csv(path)
