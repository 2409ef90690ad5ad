"""Command-line front end.

Every subcommand reads a flat ``key=value`` config file (``--config``),
applies ``--key value`` overrides and writes CSV/JSON data into the output
directory.  Precedence: flags > QTRANSPORT_OUTPUT_DIR (output directory
only) > config file > defaults.

Exit codes: 0 success, 2 invalid config, 3 numerical guard tripped,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import ast
import hashlib
import json
import logging
import math
import operator
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .classical import comoving_frame, integrate_trajectory
from .quantum import GridLeakageError
from .simulate import (
    MODEL_NAMES,
    Scenario,
    evolve_level,
    final_fidelity,
    mixture_run,
    run_report,
    snapshot_times,
    superposition_run,
)

log = logging.getLogger("qtransport")

ENV_OUTPUT = "QTRANSPORT_OUTPUT_DIR"
DEFAULT_OUTPUT = "qtransport-out"
SWEEP_PARAMETERS = {"T": "duration", "alpha": "alpha", "N": "steps", "g-period": "fourier_period"}
SWEEP_DEFAULT_MODEL = {"T": None, "alpha": "derivative", "N": "piecewise", "g-period": "fourier"}

class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# config parsing

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def parse_number(text: str) -> float:
    """A float, or arithmetic on numbers and ``pi`` such as ``2*pi`` or ``pi/2``."""
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ConfigError(f"cannot parse number {text!r}")

    try:
        return ev(ast.parse(text.replace("π", "pi"), mode="eval"))
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


def _parse_int(text: str) -> int:
    value = parse_number(text)
    if value != int(value):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(value)


def _optional(parse):
    def inner(text):
        return None if text.strip().lower() in ("", "none", "default") else parse(text)

    return inner


def _list(parse):
    def inner(text):
        return tuple(parse(v) for v in text.split(",") if v.strip())

    return inner


def _parse_superposition(text):
    coeffs = tuple(complex(v.strip().replace(" ", "")) for v in text.split(",") if v.strip())
    return coeffs or None


def _parse_mixture(text):
    text = text.strip()
    if text.startswith("thermal:"):
        _, theta, levels = text.split(":")
        return ("thermal", parse_number(theta), _parse_int(levels))
    return _list(parse_number)(text) or None


SCENARIO_KEYS = {
    "distance": parse_number,
    "duration": parse_number,
    "alpha": parse_number,
    "steps": _parse_int,
    "tau": _optional(parse_number),
    "fourier_period": _optional(parse_number),
    "fourier_harmonics": _parse_int,
    "fourier_amplitudes": _optional(_list(parse_number)),
    "fourier_cosine": _parse_bool,
    "seed": _parse_int,
    "points": _parse_int,
    "dt": _optional(parse_number),
    "control_samples": _parse_int,
    "classical_step": _optional(parse_number),
    "level": _parse_int,
    "initial_momentum": parse_number,
    "snapshots": _parse_int,
    "trace_samples": _parse_int,
    "engine": str.strip,
    "models": _list(str.strip),
}
EXTRA_KEYS = {
    "output_dir": str.strip,
    "superposition": _optional(_parse_superposition),
    "mixture": _optional(_parse_mixture),
    "jobs": _parse_int,
    "timing": _parse_bool,
}
ALL_KEYS = {**SCENARIO_KEYS, **EXTRA_KEYS}


def read_config_file(path: str | os.PathLike) -> dict[str, str]:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        raw[key] = value
    return raw


def resolve_config(file_values: dict[str, str], flag_values: dict[str, str]) -> dict:
    """Merge the layers and parse every value."""
    raw = dict(file_values)
    if os.environ.get(ENV_OUTPUT):
        raw["output_dir"] = os.environ[ENV_OUTPUT]
    raw.update({k: v for k, v in flag_values.items() if v is not None})
    parsed = {}
    for key, text in raw.items():
        try:
            parsed[key] = ALL_KEYS[key](text)
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from exc
    return parsed


def build_scenario(config: dict) -> Scenario:
    kwargs = {k: v for k, v in config.items() if k in SCENARIO_KEYS}
    if "models" in kwargs:
        models = tuple(m for m in kwargs["models"] if m != "reference")
        kwargs["models"] = ("reference",) + models
    try:
        return Scenario(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def config_lines(scenario: Scenario, config: dict) -> list[str]:
    resolved = scenario.resolved()
    for key in ("superposition", "mixture"):
        if config.get(key) is not None:
            resolved[key] = config[key]
    return [f"{k}={_fmt_value(resolved[k])}" for k in sorted(resolved)]


def _fmt_value(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    if v is None:
        return "none"
    if isinstance(v, tuple):
        return ",".join(_fmt_value(x) for x in v)
    return str(v)


def config_hash(lines: list[str]) -> str:
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]


# --------------------------------------------------------------------------
# writers


class Output:
    """Collects files for one command; everything carries the config hash and seed."""

    def __init__(self, directory: Path, command: str, scenario: Scenario, lines: list[str]):
        self.dir = directory
        self.command = command
        self.scenario = scenario
        self.lines = lines
        self.hash = config_hash(lines)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.written: list[Path] = []
        self._write(f"{command}.config", "".join(f"{line}\n" for line in lines))

    def _write(self, name: str, text: str):
        path = self.dir / name
        path.write_text(text)
        self.written.append(path)

    def csv(self, name: str, columns: dict[str, np.ndarray], notes=()):
        header = [
            f"# qtransport {self.command}",
            f"# config_hash={self.hash} seed={self.scenario.seed}",
            *(f"# {n}" for n in notes),
            ",".join(columns),
        ]
        data = np.column_stack([np.asarray(v, dtype=float) for v in columns.values()])
        body = "\n".join(",".join(format(v, ".17g") for v in row) for row in data)
        self._write(name, "\n".join(header) + "\n" + body + "\n")

    def json(self, name: str, payload: dict):
        payload = {"config_hash": self.hash, "seed": self.scenario.seed, **payload}
        self._write(name, json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _report_dict(report, out: Output, timing: bool, elapsed: float) -> dict:
    report.config_hash = out.hash
    report.wall_time = elapsed if timing else None
    return report.to_dict()


# --------------------------------------------------------------------------
# commands


def cmd_synth(scenario: Scenario, out: Output, config: dict):
    t = np.linspace(0.0, scenario.duration, scenario.control_samples)
    columns = {"t": t}
    for name in scenario.models:
        columns[name] = scenario.control(name)(t)
    notes = []
    if "fourier" in scenario.models:
        model = scenario.distortion("fourier")
        notes.append(
            f"fourier period={model.period!r} components(m,sin,cos)="
            + ";".join(f"{m}:{a!r}:{b!r}" for m, a, b in model.components)
        )
        if model.seed is not None:
            notes.append("Fourier amplitudes are seeded random draws; rerun with the same seed to reproduce")
    out.csv("synth.csv", columns, notes)


def cmd_classical(scenario: Scenario, out: Output, config: dict):
    p0 = scenario.initial_momentum
    for name in scenario.models:
        control = scenario.control(name)
        traj = comoving_frame(integrate_trajectory(0.0, p0, control, scenario.classical_step), control)
        out.csv(
            f"classical_{name}.csv",
            {"t": traj.times, "x_comoving": traj.x, "p": traj.p, "energy": traj.energy()},
            [f"initial (x, p) = (0, {p0!r}); position relative to the well centre"],
        )
    theta = np.linspace(0.0, 2 * math.pi, 257)
    out.csv(
        "energy_circle.csv",
        {"t": theta, "x": p0 * np.sin(theta), "p": p0 * np.cos(theta)},
        ["free oscillation in a static well with the same initial momentum"],
    )


def _quantum_runs(scenario: Scenario, out: Output, config: dict, with_panels: bool):
    timing = config.get("timing", False)
    panels = snapshot_times(scenario.duration, scenario.snapshots)
    trace_times = snapshot_times(scenario.duration, scenario.trace_samples)
    times = np.unique(np.concatenate((panels, trace_times)))
    grid = scenario.grid()
    reports = []
    for name in scenario.models:
        start = time.perf_counter()
        states = evolve_level(scenario, name, scenario.level, times, grid=grid)
        by_time = dict(zip(times.tolist(), states))
        trace_states = [by_time[t] for t in trace_times.tolist()]
        report, trace = run_report(scenario, name, trace_states)
        if with_panels:
            columns = {"x": grid.x}
            for i, t in enumerate(panels.tolist()):
                columns[f"density_{i}"] = by_time[t].density()
            out.csv(
                f"evolve_{name}.csv",
                columns,
                ["snapshot times " + " ".join(format(t, ".17g") for t in panels)],
            )
        else:
            out.csv(f"fidelity_{name}.csv", {"t": trace.times, "fidelity": trace.values})
        reports.append(_report_dict(report, out, timing, time.perf_counter() - start))
    out.json("report.json", {"reports": reports})
    return reports


def cmd_evolve(scenario, out, config):
    return _quantum_runs(scenario, out, config, with_panels=True)


def cmd_fidelity(scenario, out, config):
    return _quantum_runs(scenario, out, config, with_panels=False)


def _sweep_point(args):
    scenario, model = args
    return final_fidelity(scenario, model)


def sweep_values(text: str) -> list[float]:
    if ":" in text and "," not in text:
        start, stop, num = text.split(":")
        num = _parse_int(num)
        if num < 1:
            raise ConfigError("sweep range needs at least one point")
        return list(np.linspace(parse_number(start), parse_number(stop), num))
    values = [parse_number(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ConfigError("empty sweep range")
    return values


def cmd_sweep(scenario: Scenario, out: Output, config: dict, parameter: str, values, model=None):
    field = SWEEP_PARAMETERS[parameter]
    model = model or SWEEP_DEFAULT_MODEL[parameter] or scenario.models[-1]
    if model not in MODEL_NAMES:
        raise ConfigError(f"unknown model {model!r}")
    if field == "steps":
        values = [float(_parse_int(format(v, ".17g"))) for v in values]
    points = []
    for v in values:
        changes = {field: int(v) if field == "steps" else float(v)}
        try:
            points.append((scenario.with_(**changes), model))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    jobs = max(1, config.get("jobs", 1))
    if jobs == 1:
        fids = [_sweep_point(p) for p in points]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            fids = list(pool.map(_sweep_point, points))
    out.csv(
        f"sweep_{parameter}.csv",
        {parameter: np.asarray(values, dtype=float), "fidelity": np.asarray(fids)},
        [f"model={model} engine={scenario.engine} level={scenario.level}"],
    )
    return fids


def cmd_report(scenario: Scenario, out: Output, config: dict):
    timing = config.get("timing", False)
    reports = []
    for name in scenario.models:
        start = time.perf_counter()
        report, _ = run_report(scenario, name)
        reports.append(_report_dict(report, out, timing, time.perf_counter() - start))
    payload: dict = {"reports": reports}
    if config.get("superposition") is not None:
        payload["superposition"] = {
            name: superposition_run(scenario, name, config["superposition"])
            for name in scenario.models
        }
    if config.get("mixture") is not None:
        payload["mixture"] = {
            name: mixture_run(scenario, name, config["mixture"]) for name in scenario.models
        }
    out.json("report.json", payload)
    return payload


COMMANDS = {
    "synth": cmd_synth,
    "classical": cmd_classical,
    "evolve": cmd_evolve,
    "fidelity": cmd_fidelity,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value configuration file")
    common.add_argument("-v", "--verbose", action="store_true")
    for key in ALL_KEYS:
        flag = "--" + key.replace("_", "-")
        if key == "timing":
            common.add_argument(flag, dest=key, nargs="?", const="true", default=None,
                                help="add wall time to reports (breaks byte-identical output)")
        else:
            common.add_argument(flag, dest=key, default=None, metavar="VALUE")

    parser = argparse.ArgumentParser(
        prog="qtransport",
        description="Transport of a quantum state in a moving harmonic well under distorted controls.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "synth": "transport function and distorted controls (CSV)",
        "classical": "comoving phase-space trajectories (CSV)",
        "evolve": "probability-density snapshots plus run report",
        "fidelity": "instantaneous ground-state fidelity traces plus run report",
        "sweep": "final transport fidelity against one parameter",
        "report": "run report only (JSON)",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common], help=text)
        if name == "sweep":
            p.add_argument("--parameter", required=True, choices=sorted(SWEEP_PARAMETERS))
            p.add_argument("--values", required=True,
                           help="comma list (2*pi allowed) or start:stop:num")
            p.add_argument("--model", choices=MODEL_NAMES)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        file_values = read_config_file(args.config) if args.config else {}
        config = resolve_config(file_values, {k: getattr(args, k) for k in ALL_KEYS})
        scenario = build_scenario(config)
        extra = {}
        if args.command == "sweep":
            extra = {"parameter": args.parameter, "values": sweep_values(args.values),
                     "model": args.model}
        lines = config_lines(scenario, config)
        if args.command == "sweep":
            lines = sorted(lines + [f"sweep_parameter={args.parameter}",
                                    f"sweep_values={args.values}",
                                    f"sweep_model={args.model or 'default'}"])
    except ConfigError as exc:
        print(f"qtransport: invalid config: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"qtransport: cannot read config: {exc}", file=sys.stderr)
        return 4

    outdir = Path(config.get("output_dir", DEFAULT_OUTPUT))
    try:
        out = Output(outdir, args.command, scenario, lines)
        COMMANDS[args.command](scenario, out, config, **extra)
    except ConfigError as exc:
        print(f"qtransport: invalid config: {exc}", file=sys.stderr)
        return 2
    except (GridLeakageError, ArithmeticError) as exc:
        print(f"qtransport: numerical guard: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"qtransport: I/O failure: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"qtransport: invalid parameters: {exc}", file=sys.stderr)
        return 2
    for path in out.written:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
