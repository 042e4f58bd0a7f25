"""Run configuration: TOML parsing, defaults, strict validation.

Every failure carries a stable error code so the CLI (and CI wrappers) can
distinguish syntax problems from semantic ones:

    syntax          malformed TOML (with line/column from the parser)
    missing_section required section absent
    unknown_key     a key the schema does not define
    type            wrong value type
    invariant       structurally valid but semantically inconsistent
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .geometry import DomainSpec, Rect
from .solver import SolveOptions

MODES = ("solve", "continuation", "sweep", "check")

DEFAULT_H = 0.025
DEFAULT_SCHEDULE = (1e3,)


class ConfigError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"[{code}] {message}")
        self.code = code


@dataclass
class RunConfig:
    domain: DomainSpec
    species: list[tuple[float, float]]        # (lam, p) per species
    solver: SolveOptions
    kappa_schedule: list[float]
    mode: str = "solve"
    sweep: list[float] = field(default_factory=list)  # channel widths
    output_dir: str = "out"
    workers: int = 1

    def to_json(self) -> dict:
        return {
            "domain": {
                "h": self.domain.h,
                "cores": [[r.x, r.y, r.width, r.height] for r in self.domain.cores],
                "channels": [[r.x, r.y, r.width, r.height] for r in self.domain.channels],
            },
            "species": [{"lam": lam, "p": p} for lam, p in self.species],
            "solver": {
                "tol_r": self.solver.tol_r,
                "max_iters": self.solver.max_iters,
                "step0_scale": self.solver.step0_scale,
                "armijo_slope": self.solver.armijo_slope,
                "backtrack": self.solver.backtrack,
                "clamp": self.solver.clamp,
            },
            "kappa_schedule": self.kappa_schedule,
            "mode": self.mode,
            "sweep": self.sweep,
            "output_dir": self.output_dir,
            "workers": self.workers,
        }


def parse_config(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("syntax", str(exc)) from exc
    return _build(raw)


def _build(raw: dict) -> RunConfig:
    _reject_unknown(raw, {"domain", "species", "solver", "run"}, where="top level")

    if "domain" not in raw:
        raise ConfigError("missing_section", "config needs a [domain] section")
    if "species" not in raw:
        raise ConfigError("missing_section", "config needs at least one [[species]] entry")

    dom = raw["domain"]
    _expect(dom, dict, "domain")
    _reject_unknown(dom, {"h", "cores", "channels"}, where="[domain]")
    h = _number(dom.get("h", DEFAULT_H), "domain.h")
    cores = [_rect(entry, f"domain.cores[{i}]") for i, entry in enumerate(_list(dom.get("cores", []), "domain.cores"))]
    channels = [_rect(entry, f"domain.channels[{i}]") for i, entry in enumerate(_list(dom.get("channels", []), "domain.channels"))]
    if not cores:
        raise ConfigError("invariant", "domain.cores must list at least one rectangle")
    spec = DomainSpec(tuple(cores), tuple(channels), h)

    species_raw = _list(raw["species"], "species")
    species = []
    for i, entry in enumerate(species_raw):
        _expect(entry, dict, f"species[{i}]")
        _reject_unknown(entry, {"lam", "p"}, where=f"[[species]][{i}]")
        if "lam" not in entry or "p" not in entry:
            raise ConfigError("missing_section", f"species[{i}] needs both lam and p")
        species.append((_number(entry["lam"], f"species[{i}].lam"),
                        _number(entry["p"], f"species[{i}].p")))

    solver_raw = raw.get("solver", {})
    _expect(solver_raw, dict, "solver")
    _reject_unknown(solver_raw, {"tol_r", "max_iters", "step0_scale", "armijo_slope",
                                 "backtrack", "clamp"}, where="[solver]")
    try:
        solver = SolveOptions(
            tol_r=_number(solver_raw.get("tol_r", 1e-8), "solver.tol_r"),
            max_iters=_int(solver_raw.get("max_iters", 200_000), "solver.max_iters"),
            step0_scale=_number(solver_raw.get("step0_scale", 1e-2), "solver.step0_scale"),
            armijo_slope=_number(solver_raw.get("armijo_slope", 1e-4), "solver.armijo_slope"),
            backtrack=_number(solver_raw.get("backtrack", 0.5), "solver.backtrack"),
            clamp=_bool(solver_raw.get("clamp", True), "solver.clamp"),
        )
    except ValueError as exc:
        raise ConfigError("invariant", str(exc)) from exc

    run_raw = raw.get("run", {})
    _expect(run_raw, dict, "run")
    _reject_unknown(run_raw, {"mode", "kappa_schedule", "sweep", "output_dir", "workers"},
                    where="[run]")
    mode = run_raw.get("mode", "solve")
    if mode not in MODES:
        raise ConfigError("invariant", f"run.mode must be one of {MODES}, got {mode!r}")
    schedule = [_number(x, "run.kappa_schedule") for x in
                _list(run_raw.get("kappa_schedule", list(DEFAULT_SCHEDULE)), "run.kappa_schedule")]
    sweep = [_number(x, "run.sweep") for x in _list(run_raw.get("sweep", []), "run.sweep")]
    output_dir = run_raw.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ConfigError("type", "run.output_dir must be a string")
    workers = _int(run_raw.get("workers", 1), "run.workers")

    cfg = RunConfig(
        domain=spec, species=species, solver=solver,
        kappa_schedule=schedule, mode=mode, sweep=sweep,
        output_dir=output_dir, workers=workers,
    )
    _check_invariants(cfg)
    return cfg


def _check_invariants(cfg: RunConfig) -> None:
    if len(cfg.species) != cfg.domain.k:
        raise ConfigError(
            "invariant",
            f"species/core mismatch: {len(cfg.species)} species for {cfg.domain.k} cores",
        )
    if not cfg.kappa_schedule:
        raise ConfigError("invariant", "kappa_schedule must not be empty")
    if any(b <= a for a, b in zip(cfg.kappa_schedule, cfg.kappa_schedule[1:])):
        raise ConfigError("invariant", f"schedule not increasing: {cfg.kappa_schedule}")
    if any(k <= 0 for k in cfg.kappa_schedule):
        raise ConfigError("invariant", "kappa values must be positive")
    for lam, p in cfg.species:
        if lam <= 1 or p <= 1:
            raise ConfigError("invariant", f"species needs lam > 1 and p > 1, got ({lam}, {p})")
    if cfg.mode == "sweep" and not cfg.sweep:
        raise ConfigError("invariant", "mode=sweep needs a run.sweep list of channel widths")
    if cfg.sweep and any(b >= a for a, b in zip(cfg.sweep, cfg.sweep[1:])):
        raise ConfigError("invariant", f"sweep widths must be strictly decreasing: {cfg.sweep}")
    if cfg.workers < 1:
        raise ConfigError("invariant", "workers must be >= 1")


def _rect(entry, where) -> Rect:
    _expect(entry, dict, where)
    _reject_unknown(entry, {"x", "y", "width", "height"}, where=where)
    try:
        return Rect(_number(entry["x"], where + ".x"), _number(entry["y"], where + ".y"),
                    _number(entry["width"], where + ".width"),
                    _number(entry["height"], where + ".height"))
    except KeyError as exc:
        raise ConfigError("missing_section", f"{where} needs x, y, width, height") from exc


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    extra = set(d) - allowed
    if extra:
        raise ConfigError("unknown_key", f"unknown key(s) {sorted(extra)} in {where}")


def _expect(value, typ, where):
    if not isinstance(value, typ):
        raise ConfigError("type", f"{where} must be a {typ.__name__}, got {type(value).__name__}")
    return value


def _list(value, where) -> list:
    if not isinstance(value, list):
        raise ConfigError("type", f"{where} must be an array")
    return value


def _number(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("type", f"{where} must be a number, got {value!r}")
    return float(value)


def _int(value, where) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("type", f"{where} must be an integer, got {value!r}")
    return value


def _bool(value, where) -> bool:
    if not isinstance(value, bool):
        raise ConfigError("type", f"{where} must be a boolean, got {value!r}")
    return value
