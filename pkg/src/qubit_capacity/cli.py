"""Command-line front end: ``qubit-capacity <task> [channel options]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np

from . import capacity as cap
from .channel_core import CPViolation, DomainError, QubitChannel, choi_matrix, choi_min_eigenvalue, is_cp, make_family
from .shannon import optimize_shannon

SCHEMA = 1
TASKS = ("capacity", "vertical", "horizontal", "shannon", "crossing", "ellipse", "reproduce", "check-cp")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CP, EXIT_BRACKET = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    task: str
    channel: Optional[dict] = None
    seed: int = 0
    format: str = "json"
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown output format {self.format!r}")
        needs_channel = self.task not in ("reproduce", "crossing")
        if needs_channel and self.channel is None:
            raise ConfigError(f"task {self.task!r} needs a channel")

    @classmethod
    def from_json(cls, obj: dict) -> "RunConfig":
        known = {"task", "channel", "seed", "format", "tolerances", "options"}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**obj)


# ----------------------------------------------------------------------------
# formatting
# ----------------------------------------------------------------------------

def _fmt(x):
    """Round floats to 9 significant digits; non-finite values become null."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.9g}")
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    return x


def _report(task: str, config: RunConfig, payload: dict, channel: Optional[QubitChannel] = None) -> dict:
    out = {"schema": SCHEMA, "task": task, "seed": config.seed}
    out.update(_fmt(payload))
    if channel is not None:
        # exact floats so the channel re-parses identically
        out["channel"] = channel.to_json()
    return out


def _dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def _result_csv(result: cap.CapacityResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "x", "y", "z"])
    for p, s in result.ensemble.members:
        w.writerow(_fmt([p, *s]))
    return buf.getvalue()


# ----------------------------------------------------------------------------
# tasks
# ----------------------------------------------------------------------------

def emit_ellipse(channel: QubitChannel, samples: int = 64,
                 ensembles: Optional[dict] = None) -> list[tuple[float, float, str]]:
    """x-z cross-section of the channel image plus images of the given ensembles.

    Rows are ``(x, z, role)``; the boundary has role ``"boundary"``, each
    ensemble's images carry the ensemble's name.
    """
    if samples < 16:
        raise ConfigError("samples must be at least 16")
    l1, _, l3 = channel.lam
    t1, _, t3 = channel.shift
    rows = []
    for k in range(samples):
        a = 2 * math.pi * k / samples
        rows.append((t1 + l1 * math.sin(a), t3 + l3 * math.cos(a), "boundary"))
    for role, ens in (ensembles or {}).items():
        for _, w in ens.members:
            img = channel.apply(w)
            rows.append((img.x, img.z, role))
    return rows


def _ellipse_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "z", "role"])
    for x, z, role in rows:
        w.writerow([_fmt(x), _fmt(z), role])
    return buf.getvalue()


def load_scenarios() -> dict:
    text = resources.files("qubit_capacity").joinpath("scenarios.json").read_text()
    return json.loads(text)


def _family_fn(spec: dict):
    return lambda x: make_family(spec["family"], **spec["fixed"], **{spec["param"]: x})


def crossing_report(spec: dict, tol: float = 1e-7) -> dict:
    x = cap.find_crossing(_family_fn(spec), spec["lo"], spec["hi"], tol)
    ch = _family_fn(spec)(x)
    v, h = cap.optimize_vertical(ch), cap.optimize_horizontal(ch)
    return {
        "param": x,
        "param_name": spec["param"],
        "C_V": v.value,
        "C_H": h.value,
        "common_value": 0.5 * (v.value + h.value),
        "vertical_z": v.avg_output.z,
        "horizontal_z": h.avg_output.z,
    }


def _side_metrics(result: cap.CapacityResult) -> dict:
    members = result.ensemble.members
    north = max(members, key=lambda m: m[1].z)
    sides = [m for m in members if m is not north]
    out = {"p_north": north[0] if north[1].z > 1 - 1e-6 else 0.0}
    if sides:
        out["side_x"] = float(np.mean([math.hypot(w.x, w.y) for _, w in sides]))
        out["side_z"] = float(np.mean([w.z for _, w in sides]))
        out["side_p"] = float(np.mean([p for p, _ in sides]))
    return out


def reproduce(seed: int = 0, budget: float = 1.0, only: Optional[list] = None,
              tolerances: Optional[dict] = None) -> tuple[list[dict], bool]:
    """Run the built-in scenario table; returns rows and whether all passed."""
    table = load_scenarios()
    rows = [r for r in table["rows"] if only is None or r["id"] in only or r["source"] in only]
    tolerances = tolerances or {}
    cache: dict = {}

    def compute(source: str, task: str) -> dict:
        key = (source, task)
        if key in cache:
            return cache[key]
        if task == "crossing":
            out = crossing_report(table["crossings"][source])
        else:
            ch = QubitChannel.from_json(table["channels"][source])
            if task == "vertical":
                r = cap.optimize_vertical(ch)
                out = {"value": r.value, "avg_z": r.avg_output.z}
            elif task == "horizontal":
                r = cap.optimize_horizontal(ch)
                out = {"value": r.value, "avg_z": r.avg_output.z}
            elif task == "capacity":
                r = cap.optimize_global(ch, seed=seed, budget=budget)
                d = r.diagnostics
                out = {"value": r.value, "C_2": d["C_2"], "C_3": d["C_3"], "C_4": d["C_4"],
                       "C3_minus_C2": d["C_3"] - d["C_2"], **_side_metrics(r)}
            elif task == "shannon":
                r = optimize_shannon(ch, seed=seed, budget=budget)
                out = {"value": r.value}
            elif task == "gap_ratio":
                c = compute(source, "capacity")
                s = compute(source, "shannon")
                out = {"ratio": (c["C_3"] - c["C_2"]) / (c["C_2"] - s["value"])}
            else:
                raise ConfigError(f"unknown scenario task {task!r}")
        cache[key] = out
        return out

    report = []
    for row in rows:
        observed = compute(row["source"], row["task"]).get(row["metric"], math.nan)
        tol = tolerances.get(row["id"], row["tol"])
        passed = bool(abs(observed - row["reference"]) <= tol)
        report.append({"id": row["id"], "reference": row["reference"], "observed": observed,
                       "tol": tol, "pass": passed})
    return report, all(r["pass"] for r in report)


def _reproduce_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "reference", "observed", "tol", "pass"])
    for r in rows:
        w.writerow([r["id"], _fmt(r["reference"]), _fmt(r["observed"]), _fmt(r["tol"]), r["pass"]])
    return buf.getvalue()


def run(config: RunConfig) -> tuple[int, str]:
    """Execute one task; returns ``(exit status, report text)``."""
    opts = config.options
    channel = None
    if config.channel is not None:
        try:
            channel = QubitChannel.from_json(config.channel, check_positive=config.task != "check-cp")
        except CPViolation as exc:
            return EXIT_CP, f"error: {exc}\n"
        except DomainError as exc:
            return EXIT_CONFIG, f"error: {exc}\n"
        except (TypeError, KeyError, ValueError) as exc:
            return EXIT_CONFIG, f"error: invalid channel: {exc}\n"
        if opts.get("require_cp") and not is_cp(channel):
            return EXIT_CP, "error: channel is not completely positive\n"

    task = config.task
    budget = float(opts.get("budget", 1.0))
    if task == "check-cp":
        ok = is_cp(channel, opts.get("tol", 1e-10))
        c = choi_matrix(channel)
        payload = {"cp": ok, "min_eigenvalue": choi_min_eigenvalue(channel),
                   "choi_real": c.real.tolist(), "choi_imag": c.imag.tolist()}
        return (EXIT_OK if ok else EXIT_CP), _dumps(_report(task, config, payload, channel))

    if task == "ellipse":
        which = opts.get("ensembles", ["global"])
        ensembles = {}
        for name in which:
            if name == "global":
                ensembles[name] = cap.optimize_global(channel, seed=config.seed, budget=budget).ensemble
            elif name == "vertical":
                ensembles[name] = cap.optimize_vertical(channel).ensemble
            elif name == "horizontal":
                ensembles[name] = cap.optimize_horizontal(channel).ensemble
            elif name != "none":
                return EXIT_CONFIG, f"error: unknown ensemble {name!r}\n"
        rows = emit_ellipse(channel, int(opts.get("samples", 64)), ensembles)
        if config.format == "csv":
            return EXIT_OK, _ellipse_csv(rows)
        pts = [{"x": x, "z": z, "role": role} for x, z, role in rows]
        return EXIT_OK, _dumps(_report(task, config, {"points": pts}, channel))

    if task == "crossing":
        spec = opts.get("crossing")
        if spec is None:
            return EXIT_CONFIG, "error: crossing needs a family specification\n"
        try:
            payload = crossing_report(spec, float(opts.get("tol", 1e-7)))
        except cap.NoSignChangeError as exc:
            return EXIT_BRACKET, f"error: {exc}\n"
        except DomainError as exc:
            return EXIT_CONFIG, f"error: {exc}\n"
        ch = _family_fn(spec)(payload["param"])
        return EXIT_OK, _dumps(_report(task, config, payload, ch))

    if task == "reproduce":
        rows, ok = reproduce(config.seed, budget, opts.get("only"), config.tolerances)
        text = _reproduce_csv(rows) if config.format == "csv" else _dumps(
            _report(task, config, {"rows": rows, "all_pass": ok}))
        return (EXIT_OK if ok else EXIT_FAIL), text

    if task == "capacity":
        n = opts.get("n")
        if n is None:
            result = cap.optimize_global(channel, seed=config.seed, budget=budget)
        else:
            result = cap.optimize_n_state(channel, int(n), plane=opts.get("plane"), seed=config.seed, budget=budget)
    elif task == "vertical":
        result = cap.optimize_vertical(channel)
    elif task == "horizontal":
        result = cap.optimize_horizontal(channel)
    elif task == "shannon":
        result = optimize_shannon(channel, seed=config.seed, budget=budget,
                                  extended=bool(opts.get("extended", False)))
    else:  # pragma: no cover - guarded by RunConfig
        return EXIT_CONFIG, f"error: unknown task {task!r}\n"
    if config.format == "csv":
        return EXIT_OK, _result_csv(result)
    return EXIT_OK, _dumps(_report(task, config, {"result": result.to_json()}, channel))


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------

def _triple(text: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return [float(p) for p in parts]


def _add_channel_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("channel")
    g.add_argument("--family", help="named family: identity, depolarizing, amplitude_damping, "
                                    "stretched, squeezed, qc, cq, horizontal_cq")
    for name in ("mu", "s", "q", "t1", "t2", "t3", "nu"):
        g.add_argument(f"--{name}", type=float)
    g.add_argument("--lambda", dest="lam", type=_triple, help="diagonal scale triple l1,l2,l3")
    g.add_argument("--shift", type=_triple, help="shift triple t1,t2,t3")
    g.add_argument("--require-cp", action="store_true", help="reject channels that are not CP (exit 3)")


def _add_common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--budget", type=float, default=1.0, help="scale optimizer evaluation caps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qubit-capacity", description=__doc__)
    parser.add_argument("--config", help="JSON RunConfig file (alternative to a subcommand)")
    parser.add_argument("--out", dest="top_out", help="output path when using --config")
    sub = parser.add_subparsers(dest="task")

    for task in ("capacity", "vertical", "horizontal", "shannon", "check-cp", "ellipse"):
        p = sub.add_parser(task)
        _add_channel_args(p)
        _add_common_args(p)
        if task == "capacity":
            p.add_argument("--n", type=int, choices=(1, 2, 3, 4), help="fix the ensemble size")
            p.add_argument("--plane", choices=("xz",), help="restrict states to the x-z plane")
        if task == "shannon":
            p.add_argument("--extended", action="store_true", help="also probe 3-outcome POVMs (slow)")
        if task == "check-cp":
            p.add_argument("--tol", type=float, default=1e-10)
        if task == "ellipse":
            p.add_argument("--samples", type=int, default=64)
            p.add_argument("--ensembles", default="global",
                           help="comma list of global, vertical, horizontal, none")

    p = sub.add_parser("crossing")
    _add_common_args(p)
    p.add_argument("--family", choices=("stretched", "squeezed"), required=True)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-7)

    p = sub.add_parser("reproduce")
    _add_common_args(p)
    p.add_argument("--only", help="comma list of row ids or scenario sources")
    p.add_argument("--tol-override", action="append", default=[], metavar="ID=TOL")
    return parser


def _channel_from_args(args) -> Optional[dict]:
    if getattr(args, "lam", None) is not None:
        return {"lambda": args.lam, "shift": args.shift or [0.0, 0.0, 0.0]}
    if getattr(args, "family", None) is None:
        return None
    spec = {"family": args.family}
    for name in ("mu", "s", "q", "t1", "t2", "t3", "nu"):
        v = getattr(args, name, None)
        if v is not None:
            spec[name] = v
    return spec


def config_from_args(args) -> RunConfig:
    task = args.task
    options = {"budget": args.budget}
    if getattr(args, "require_cp", False):
        options["require_cp"] = True
    tolerances = {}
    default_format = "csv" if task == "ellipse" else "json"
    if task == "capacity":
        options.update(n=args.n, plane=args.plane)
    elif task == "shannon":
        options["extended"] = args.extended
    elif task == "check-cp":
        options["tol"] = args.tol
    elif task == "ellipse":
        options["samples"] = args.samples
        options["ensembles"] = [e for e in args.ensembles.split(",") if e]
    elif task == "crossing":
        param = "s" if args.family == "stretched" else "q"
        options["crossing"] = {"family": args.family, "fixed": {"mu": args.mu}, "param": param,
                               "lo": args.lo, "hi": args.hi}
        options["tol"] = args.tol
    elif task == "reproduce":
        if args.only:
            options["only"] = args.only.split(",")
        for item in args.tol_override:
            key, _, val = item.partition("=")
            tolerances[key] = float(val)
    return RunConfig(task=task, channel=None if task in ("crossing", "reproduce") else _channel_from_args(args),
                     seed=args.seed, format=args.format or default_format,
                     tolerances=tolerances, options=options)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            if args.task:
                raise ConfigError("use either --config or a subcommand, not both")
            with open(args.config) as fh:
                config = RunConfig.from_json(json.load(fh))
            out_path = args.top_out
        elif args.task:
            config = config_from_args(args)
            out_path = args.out
        else:
            parser.print_usage(sys.stderr)
            return EXIT_CONFIG
    except (ConfigError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        status, text = run(config)
    except ConfigError as exc:
        status, text = EXIT_CONFIG, f"error: {exc}\n"
    stream = sys.stderr if text.startswith("error:") else None
    if stream is not None:
        stream.write(text)
    elif out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
