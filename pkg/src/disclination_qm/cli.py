"""Command-line front end.

Every command reads one strict JSON document (``--config``) and/or flags;
flags win over file fields and unknown fields are rejected.  Exit codes:
0 success, 1 validation failure, 2 configuration error.

Examples
--------
    disclination-qm spectrum --alpha 1 --B 0 --phi 0 --potential harmonic --omega 1
    disclination-qm thermo --potential anharmonic --a 1 --b 1 --beta 0.5 --sweep alpha:0.1:1:10
    disclination-qm tables --which 1 --output table1.csv
    disclination-qm validate --sweep-seed 42
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DegenerateConfinement,
    DisclinationError,
    DomainError,
    KinkPoint,
    NoConventionMatches,
)
from .infoentropy import (
    ALL_CONVENTIONS,
    STANDARD_CONVENTION,
    DensityConvention,
    calibrate_convention,
    default_anchor_rows,
    entropy_report,
    reproduce_table,
)
from .magnetics import magnetic_report
from .model import QuantumNumbers, SystemConfig, potential_from_dict
from .oracle import numerov_eigenvalue
from .spectrum import effective_potential, energy, wavefunction
from .thermo import ThermoInput, thermo_summary

__all__ = ["COMMANDS", "SWEEP_VARIABLES", "ConfigError", "RunConfig", "build_parser", "load_config",
           "main", "run"]

COMMANDS = ("spectrum", "wavefunction", "effective-potential", "thermo", "magnetics", "entropy",
            "tables", "validate")
SWEEP_VARIABLES = ("alpha", "B", "phi", "beta", "a", "b", "omega", "De", "r0", "n", "ell")
_SWEEPABLE_COMMANDS = ("spectrum", "thermo", "magnetics", "entropy")
_INTEGER_VARIABLES = ("n", "ell")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    """The run configuration is malformed or describes an invalid system."""


# --- configuration ---------------------------------------------------------------


@dataclass
class Parameters:
    alpha: float = 1.0
    B: float = 0.0
    phi: float = 0.0
    mass: float = 1.0
    charge: float = 1.0
    charge_sign: int = 1
    potential: Optional[str] = None
    a: Optional[float] = None
    b: Optional[float] = None
    c: Optional[float] = None
    omega: Optional[float] = None
    De: Optional[float] = None
    r0: Optional[float] = None
    n: int = 0
    ell: int = 0
    beta: Optional[float] = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None or f.name == "potential":
                if f.name == "potential" and value is not None and not isinstance(value, str):
                    raise ConfigError("potential must be a string")
                continue
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"parameter {f.name} must be a number, got {value!r}")
            if f.name in ("n", "ell", "charge_sign"):
                if int(value) != value:
                    raise ConfigError(f"parameter {f.name} must be an integer, got {value!r}")
                setattr(self, f.name, int(value))
            else:
                setattr(self, f.name, float(value))


@dataclass
class Sweep:
    variable: str
    min: float
    max: float
    steps: int

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep variable {self.variable!r} not in {list(SWEEP_VARIABLES)}")
        if isinstance(self.steps, bool) or int(self.steps) != self.steps or self.steps < 1:
            raise ConfigError(f"sweep steps must be an integer >= 1, got {self.steps!r}")
        self.steps = int(self.steps)
        for name in ("min", "max"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"sweep {name} must be finite")

    def values(self) -> List[float]:
        xs = np.linspace(self.min, self.max, self.steps).tolist()
        if self.variable in _INTEGER_VARIABLES:
            ints = [round(x) for x in xs]
            if any(abs(x - i) > 1e-9 for x, i in zip(xs, ints)):
                raise ConfigError(f"sweep over {self.variable} must land on integers, got {xs}")
            return ints
        return xs

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"sweep must look like var:min:max:steps, got {text!r}")
        try:
            return cls(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))
        except ValueError as exc:
            raise ConfigError(f"bad sweep {text!r}: {exc}") from exc


@dataclass
class Output:
    path: Optional[str] = None
    format: Optional[str] = None  # csv | json | text (validate only); None picks per command


@dataclass
class Tolerances:
    numerov: float = 1e-8
    entropy: float = 1e-9


@dataclass
class Options:
    oracle: bool = False
    literal_current: bool = True
    flux_term: str = "signed"
    convention: Optional[str] = None
    which: List[int] = field(default_factory=lambda: [1, 2, 3])
    sweep_seed: int = 42
    r_min: Optional[float] = None
    r_max: Optional[float] = None
    points: int = 201


@dataclass
class RunConfig:
    command: str
    parameters: Parameters = field(default_factory=Parameters)
    sweep: Optional[Sweep] = None
    output: Output = field(default_factory=Output)
    tolerances: Tolerances = field(default_factory=Tolerances)
    options: Options = field(default_factory=Options)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {list(COMMANDS)}")
        if self.sweep is not None and self.command not in _SWEEPABLE_COMMANDS:
            raise ConfigError(f"command {self.command!r} does not take a sweep")
        fmt = self.output.format
        allowed = ("csv", "json", "text") if self.command == "validate" else ("csv", "json")
        if fmt is not None and fmt not in allowed:
            raise ConfigError(f"format for {self.command} must be one of {list(allowed)}, got {fmt!r}")
        if self.options.flux_term not in ("signed", "absolute"):
            raise ConfigError("flux_term must be 'signed' or 'absolute'")
        if self.options.points < 2:
            raise ConfigError("points must be >= 2")
        for t in self.options.which:
            if t not in (1, 2, 3):
                raise ConfigError(f"table must be 1, 2 or 3, got {t}")
        for name in ("numerov", "entropy"):
            value = getattr(self.tolerances, name)
            if not (isinstance(value, (int, float)) and value > 0):
                raise ConfigError(f"tolerance {name} must be positive")


_SECTIONS = {"parameters": Parameters, "output": Output, "tolerances": Tolerances, "options": Options}


def _strict(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown field(s) in {where}: {unknown}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data: Any) -> RunConfig:
    """Strictly parse the JSON document layout (see data/run_config.schema.json)."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {"command", "sweep", *_SECTIONS}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown top-level field(s): {unknown}")
    if "command" not in data:
        raise ConfigError("config needs a 'command'")
    kwargs: Dict[str, Any] = {"command": data["command"]}
    for name, cls in _SECTIONS.items():
        if name in data:
            kwargs[name] = _strict(cls, data[name], name)
    if data.get("sweep") is not None:
        kwargs["sweep"] = _strict(Sweep, data["sweep"], "sweep")
    return RunConfig(**kwargs)


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc


# --- argument parsing ------------------------------------------------------------

_PARAM_FLAGS = {
    "alpha": float, "B": float, "phi": float, "mass": float, "charge": float, "charge_sign": int,
    "potential": str, "a": float, "b": float, "c": float, "omega": float, "De": float,
    "r0": float, "n": int, "ell": int, "beta": float,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="disclination-qm",
        description="Spectra, thermodynamics, magnetic response and entropies of a charged "
                    "particle on a cone with flux and field.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command)
        p.add_argument("--config", help="JSON run configuration; flags override its fields")
        p.add_argument("--output", dest="path", help="output file (default: stdout)")
        fmt_choices = ["csv", "json", "text"] if command == "validate" else ["csv", "json"]
        p.add_argument("--format", choices=fmt_choices)
        if command == "validate":
            p.add_argument("--sweep-seed", type=int)
            continue
        if command == "tables":
            p.add_argument("--which", type=int, nargs="+", choices=[1, 2, 3])
            p.add_argument("--convention", help="'calibrated', 'standard' or a convention tag")
            p.add_argument("--tol-entropy", type=float)
            continue
        for name, typ in _PARAM_FLAGS.items():
            p.add_argument(f"--{name}", type=typ)
        if command in _SWEEPABLE_COMMANDS:
            p.add_argument("--sweep", help="var:min:max:steps")
        if command == "spectrum":
            p.add_argument("--oracle", action="store_true", default=None,
                           help="also solve the radial equation numerically")
            p.add_argument("--tol-numerov", type=float)
        if command == "magnetics":
            p.add_argument("--exact-current", dest="literal_current", action="store_false",
                           default=None, help="carry sign(ell - phi) into the current")
        if command == "entropy":
            p.add_argument("--convention", help="'standard' or a convention tag")
            p.add_argument("--tol-entropy", type=float)
        if command in ("wavefunction", "effective-potential"):
            p.add_argument("--r-min", type=float)
            p.add_argument("--r-max", type=float)
            p.add_argument("--points", type=int)
        if command == "effective-potential":
            p.add_argument("--flux-term", choices=["signed", "absolute"])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    data = load_config(args.config) if getattr(args, "config", None) else {"command": args.command}
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if data.get("command", args.command) != args.command:
        raise ConfigError(f"config command {data.get('command')!r} does not match {args.command!r}")
    data = dict(data, command=args.command)
    cfg = config_from_dict(data)
    ns = vars(args)
    overrides = {k: ns[k] for k in _PARAM_FLAGS if ns.get(k) is not None}
    if overrides:
        cfg.parameters = replace(cfg.parameters, **overrides)
    if ns.get("sweep") is not None:
        cfg.sweep = Sweep.parse(ns["sweep"])
    out = {k: ns[k] for k in ("path", "format") if ns.get(k) is not None}
    if out:
        cfg.output = replace(cfg.output, **out)
    tol = {name: ns[f"tol_{name}"] for name in ("numerov", "entropy")
           if ns.get(f"tol_{name}") is not None}
    if tol:
        cfg.tolerances = replace(cfg.tolerances, **tol)
    opt_keys = {"oracle": "oracle", "literal_current": "literal_current", "flux_term": "flux_term",
                "convention": "convention", "which": "which", "sweep_seed": "sweep_seed",
                "r_min": "r_min", "r_max": "r_max", "points": "points"}
    opts = {dst: ns[src] for src, dst in opt_keys.items() if ns.get(src) is not None}
    if opts:
        cfg.options = replace(cfg.options, **opts)
    return RunConfig(cfg.command, cfg.parameters, cfg.sweep, cfg.output, cfg.tolerances, cfg.options)


# --- physics objects from parameters ------------------------------------------------


def _system(p: Parameters):
    if p.potential is None:
        raise ConfigError("a potential kind is required (--potential)")
    config = SystemConfig(alpha=p.alpha, B=p.B, phi=p.phi, mass=p.mass, charge=p.charge,
                          charge_sign=p.charge_sign)
    potential = potential_from_dict(p.potential, {k: getattr(p, k) for k in
                                                  ("a", "b", "c", "omega", "De", "r0")})
    return config, potential, QuantumNumbers(p.n, p.ell)


def _convention(tag: Optional[str]) -> DensityConvention:
    if tag is None or tag == "standard":
        return STANDARD_CONVENTION
    try:
        return DensityConvention.from_tag(tag)
    except (DomainError, ValueError) as exc:
        raise ConfigError(f"unknown convention {tag!r}") from exc


# --- per-point evaluators -------------------------------------------------------------


def _point_spectrum(cfg: RunConfig, p: Parameters) -> Dict[str, Any]:
    config, potential, qn = _system(p)
    record = {"energy": energy(config, potential, qn).energy}
    if cfg.options.oracle:
        record["numerov"] = numerov_eigenvalue(config, potential, qn.ell, qn.n,
                                               tol=cfg.tolerances.numerov)
    return record


def _point_thermo(cfg: RunConfig, p: Parameters) -> Dict[str, Any]:
    if p.beta is None:
        raise ConfigError("thermo needs beta")
    config, potential, qn = _system(p)
    summary = thermo_summary(ThermoInput(p.beta, config, potential, qn.ell))
    return {"beta": summary["beta"], "temperature": 1.0 / summary["beta"],
            **{k: v for k, v in summary.items() if k != "beta"}}


def _point_magnetics(cfg: RunConfig, p: Parameters) -> Dict[str, Any]:
    config, potential, qn = _system(p)
    rep = magnetic_report(config, potential, qn, beta=p.beta,
                          literal_current=cfg.options.literal_current)
    return {"persistent_current": rep.persistent_current, "magnetization": rep.magnetization,
            "susceptibility": rep.susceptibility, "temperature": rep.temperature_tag}


def _point_entropy(cfg: RunConfig, p: Parameters) -> Dict[str, Any]:
    config, potential, qn = _system(p)
    conv = _convention(cfg.options.convention)
    rep = entropy_report(wavefunction(config, potential, qn), conv, tol=cfg.tolerances.entropy)
    return {"S_r": rep.s_position, "S_p": rep.s_momentum, "total": rep.total,
            "bbm_margin": rep.bbm_margin, "convention": conv.tag}


_POINT: Dict[str, Callable[[RunConfig, Parameters], Dict[str, Any]]] = {
    "spectrum": _point_spectrum,
    "thermo": _point_thermo,
    "magnetics": _point_magnetics,
    "entropy": _point_entropy,
}


def _workers() -> int:
    env = os.environ.get("DISCLINATION_QM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"DISCLINATION_QM_THREADS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def _sweep_points(cfg: RunConfig) -> List[Tuple[Optional[Any], Parameters]]:
    if cfg.sweep is None:
        return [(None, cfg.parameters)]
    var = cfg.sweep.variable
    return [(x, replace(cfg.parameters, **{var: x})) for x in cfg.sweep.values()]


def _evaluate(cfg: RunConfig) -> List[Dict[str, Any]]:
    fn = _POINT[cfg.command]
    points = _sweep_points(cfg)
    # validate every point before any heavy work starts
    for _, params in points:
        _system(params)
    workers = min(_workers(), len(points))

    def one(item):
        x, params = item
        record = fn(cfg, params)
        return record if x is None else {cfg.sweep.variable: x, **record}

    if workers <= 1:
        return [one(item) for item in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, points))  # map preserves sweep order


# --- serialization -------------------------------------------------------------------


def _num(value):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(value)
    if not math.isfinite(value):
        return None
    return float(f"{value:.12g}")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, str)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _assumptions(cfg: RunConfig) -> str:
    p = cfg.parameters
    return (f"command={cfg.command}; units: hbar=1, kappa=1, M={p.mass:.12g}, "
            f"|e|={p.charge:.12g}, charge_sign={p.charge_sign:+d}; entropies in nats")


def _render_records(cfg: RunConfig, records: List[Dict[str, Any]], fmt: str) -> str:
    if fmt == "json":
        if cfg.sweep is None and len(records) == 1:
            return json.dumps({k: _num(v) for k, v in records[0].items()}, sort_keys=False) + "\n"
        payload = {
            "assumptions": _assumptions(cfg),
            "sweep": None if cfg.sweep is None else {
                "variable": cfg.sweep.variable, "min": cfg.sweep.min, "max": cfg.sweep.max,
                "steps": cfg.sweep.steps},
            "rows": [{k: _num(v) for k, v in rec.items()} for rec in records],
        }
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# {_assumptions(cfg)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    header = list(records[0]) if records else []
    writer.writerow(header)
    for rec in records:
        writer.writerow([_cell(rec.get(k)) for k in header])
    return buf.getvalue()


def _emit(cfg: RunConfig, text: str):
    if cfg.output.path:
        with open(cfg.output.path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands --------------------------------------------------------------------------


def _radial_samples(cfg: RunConfig, state_scale: float, n: int, j: float) -> np.ndarray:
    r_max = cfg.options.r_max
    if r_max is None:
        r_max = 5.0 * state_scale * math.sqrt(2 * n + j + 1.0)
    r_min = cfg.options.r_min
    if r_min is None:
        r_min = r_max / cfg.options.points if cfg.command == "effective-potential" else 0.0
    if not 0.0 <= r_min < r_max:
        raise ConfigError(f"need 0 <= r_min < r_max, got {r_min}, {r_max}")
    return np.linspace(r_min, r_max, cfg.options.points)


def _cmd_wavefunction(cfg: RunConfig) -> Tuple[int, str]:
    config, potential, qn = _system(cfg.parameters)
    state = wavefunction(config, potential, qn)
    rs = _radial_samples(cfg, state.length_scale(), qn.n, state.j)
    psi = np.asarray(state(rs))
    records = [{"r": r, "s": s, "psi": v, "density": v * v}
               for r, s, v in zip(rs.tolist(), state.s(rs).tolist(), psi.tolist())]
    return EXIT_OK, _render_records(cfg, records, cfg.output.format or "csv")


def _cmd_effective_potential(cfg: RunConfig) -> Tuple[int, str]:
    config, potential, qn = _system(cfg.parameters)
    scale = 1.0
    try:
        scale = wavefunction(config, potential, qn).length_scale()
    except DegenerateConfinement:
        pass
    rs = _radial_samples(cfg, scale, qn.n, 0.0)
    if rs[0] <= 0.0:
        raise ConfigError("effective potential needs r_min > 0")
    values = np.asarray(effective_potential(config, potential, rs, qn.ell,
                                            flux_term=cfg.options.flux_term))
    records = [{"r": r, "V_eff": v} for r, v in zip(rs.tolist(), values.tolist())]
    return EXIT_OK, _render_records(cfg, records, cfg.output.format or "csv")


def _cmd_pointwise(cfg: RunConfig) -> Tuple[int, str]:
    records = _evaluate(cfg)
    default = "json" if cfg.sweep is None else "csv"
    return EXIT_OK, _render_records(cfg, records, cfg.output.format or default)


def _cmd_tables(cfg: RunConfig) -> Tuple[int, str]:
    tag = cfg.options.convention or "calibrated"
    tol = cfg.tolerances.entropy
    if tag == "calibrated":
        try:
            conv = calibrate_convention(default_anchor_rows(), ALL_CONVENTIONS, tol=tol).convention
        except NoConventionMatches as exc:
            sys.stderr.write(f"calibration failed: {exc}\n")
            return EXIT_VALIDATION, ""
    else:
        conv = _convention(tag)
    result = reproduce_table(tuple(sorted(set(cfg.options.which))), conv, tol=tol,
                             workers=_workers())
    good, total = result.cells_within(5e-3)
    trends_ok = all(t.holds for t in result.trends)
    sys.stderr.write(
        f"convention {conv.tag}: {good}/{total} cells within 5e-3; "
        f"trends {'hold' if trends_ok else 'VIOLATED'} "
        f"({sum(t.holds for t in result.trends)}/{len(result.trends)})\n"
    )
    if cfg.output.format == "json":
        rows = list(csv.DictReader(line for line in result.to_csv().splitlines()
                                   if not line.startswith("#")))
        text = json.dumps({"convention": conv.tag, "cells_within_5e-3": [good, total],
                           "trends": [{"table": t.table, "name": t.name, "passed": t.holds}
                                      for t in result.trends],
                           "rows": rows}, indent=2) + "\n"
    else:
        text = result.to_csv()
    return (EXIT_OK if trends_ok else EXIT_VALIDATION), text


def _cmd_validate(cfg: RunConfig) -> Tuple[int, str]:
    from .validation import run_validation

    report = run_validation(seed=cfg.options.sweep_seed)
    text = report.to_json() if cfg.output.format == "json" else report.to_text()
    return (EXIT_OK if report.passed else EXIT_VALIDATION), text


_COMMANDS = {
    "spectrum": _cmd_pointwise,
    "thermo": _cmd_pointwise,
    "magnetics": _cmd_pointwise,
    "entropy": _cmd_pointwise,
    "wavefunction": _cmd_wavefunction,
    "effective-potential": _cmd_effective_potential,
    "tables": _cmd_tables,
    "validate": _cmd_validate,
}


def run(cfg: RunConfig) -> int:
    """Execute a parsed configuration and write its output; returns the exit code."""
    try:
        code, text = _COMMANDS[cfg.command](cfg)
    except (ConfigError, DomainError, DegenerateConfinement, KinkPoint) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except DisclinationError as exc:
        sys.stderr.write(f"computation failed: {type(exc).__name__}: {exc}\n")
        return EXIT_VALIDATION
    _emit(cfg, text)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code) if exc.code is not None else EXIT_CONFIG
    try:
        cfg = config_from_args(args)
    except (ConfigError, DomainError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
