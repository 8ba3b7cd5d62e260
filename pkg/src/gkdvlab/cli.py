"""Command-line front end: one JSON config per run, one report directory out.

Usage::

    gkdvlab CONFIG.json [--output DIR] [--seed N] [--threads N]

The config is a flat JSON object with ``command`` plus that command's keys.
``output`` and ``seed`` may live in the config or come from the flags, which
win.  An optional ``assert`` object maps summary keys to ``{"min", "max",
"equals"}`` checks; the exit status is 0 only when all of them hold.

Exit codes: 0 pass, 1 runtime failure or failed assertion, 2 config error.
"""

from __future__ import annotations

import argparse
import contextlib
import dataclasses
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Callable

import jsonschema

from . import picard, snapshot
from .arithmetic import IntervalDivisorQuery, interval_divisor_count
from .estimates import EstimateProbe, mean_value_m_check, probe_estimate
from .imethod import IMethodConfig, drift_experiment
from .norms import NormSpec, norm
from .report import ExperimentReport
from .solver import QUINTIC, GkdvProblem, integrate
from .spectral import SpectralField, TorusGrid, l2_norm, random_field

log = logging.getLogger("gkdvlab")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# schema

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int = {"type": "integer"}
_posint = {"type": "integer", "minimum": 1}

_INITIAL = {
    "oneOf": [
        {
            "type": "object",
            "properties": {
                "kind": {"const": "random"},
                "decay": _num,
                "l2": {"type": "number", "minimum": 0},
                "seed": _int,
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "cosines"},
                "modes": {
                    "type": "array",
                    "items": {"type": "array", "prefixItems": [_int, _num], "minItems": 2, "maxItems": 2},
                },
            },
            "required": ["kind", "modes"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"kind": {"const": "snapshot"}, "path": {"type": "string"}, "index": _int},
            "required": ["kind", "path"],
            "additionalProperties": False,
        },
    ]
}

_COMMON = {
    "command": {"type": "string"},
    "output": {"type": "string"},
    "seed": _int,
    "assert": {
        "type": "object",
        "additionalProperties": {
            "type": "object",
            "properties": {"min": _num, "max": _num, "equals": {}},
            "additionalProperties": False,
            "minProperties": 1,
        },
    },
}

_COMMANDS: dict[str, dict] = {
    "solve": {
        "period": _pos,
        "modes": _posint,
        "nonlinearity": {"type": "array", "items": _num},
        "initial": _INITIAL,
        "horizon": _pos,
        "dt": _pos,
        "gauge": {"type": "boolean"},
        "save_every": _posint,
    },
    "picard": {
        "modes": _posint,
        "initial": _INITIAL,
        "count": _posint,
        "per_unit": _posint,
        "residual_s": _num,
        "tol": _pos,
    },
    "inflate": {
        "s": _num,
        "eps": _pos,
        "N": {"type": "array", "items": _posint, "minItems": 2},
        "t": _pos,
        "modes": _posint,
        "discard": {"type": "integer", "minimum": 0},
    },
    "probe": {
        "estimate": {"type": "string"},
        "s": _num,
        "k": _posint,
        "sweep": {"type": "array", "items": _posint, "minItems": 2},
        "family": {"type": "string"},
        "trials": _posint,
        "decay": _num,
        "band": _posint,
        "per_unit": _posint,
        "N": _pos,
        "samples": _posint,
        "x_max": _pos,
    },
    "divisors": {"xi": _int, "lambda": _int, "N": _int, "L": _int},
    "imethod": {
        "s": _num,
        "eps": _pos,
        "lambda": _pos,
        "N": {"oneOf": [_pos, {"const": "auto"}]},
        "N_list": {"type": "array", "items": _pos, "minItems": 1},
        "lambda_list": {"type": "array", "items": _pos, "minItems": 1},
        "C": _pos,
        "horizon": _pos,
        "modes": _posint,
        "dt": _pos,
        "units": {"enum": ["frequency", "wavenumber"]},
        "initial": _INITIAL,
    },
    "export": {"input": {"type": "string"}, "index": _int},
}

_REQUIRED = {"divisors": ["xi", "lambda", "N", "L"], "export": ["input"], "probe": ["estimate"]}


def schema_for(command: str) -> dict:
    return {
        "type": "object",
        "properties": {**_COMMON, **_COMMANDS[command]},
        "required": ["command"] + _REQUIRED.get(command, []),
        "additionalProperties": False,
    }


def validate(cfg: Any) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("the config must be a JSON object")
    cmd = cfg.get("command")
    if cmd not in _COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}; expected one of {sorted(_COMMANDS)}")
    try:
        jsonschema.validate(cfg, schema_for(cmd))
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {e.message}") from None
    return cfg


# ---------------------------------------------------------------------------
# builders


@contextlib.contextmanager
def _building():
    """Invalid parameter values caught while constructing inputs are config errors."""
    try:
        yield
    except ConfigError:
        raise
    except (ValueError, TypeError, IndexError, OSError) as e:
        raise ConfigError(str(e)) from e


def initial_field(spec: dict | None, grid: TorusGrid, seed: int) -> SpectralField:
    spec = spec or {"kind": "random"}
    kind = spec["kind"]
    if kind == "random":
        u = random_field(grid, spec.get("decay", 2.0), spec.get("seed", seed))
        target = spec.get("l2", 0.1)
        n = l2_norm(u)
        return u * (target / n) if n > 0 else u
    if kind == "cosines":
        modes: dict = {}
        for k, a in spec["modes"]:
            if k == 0 or abs(k) >= grid.nyquist:
                raise ConfigError(f"cosine mode {k} does not fit a grid of {grid.modes} modes")
            modes[k] = modes.get(k, 0) + a / 2
            modes[-k] = modes.get(-k, 0) + a / 2
        return SpectralField.from_modes(grid, modes, real=True)
    fields = snapshot.read(spec["path"])
    f = fields[spec.get("index", 0)]
    if f.grid.period != grid.period or f.grid.modes != grid.modes:
        raise ConfigError("snapshot grid does not match the configured grid")
    return f


def _solve(cfg: dict, seed: int, threads: int) -> ExperimentReport:
    with _building():
        grid = TorusGrid(cfg.get("period", 1.0), cfg.get("modes", 256))
        u0 = initial_field(cfg.get("initial"), grid, seed)
        prob = GkdvProblem(
            grid,
            tuple(cfg.get("nonlinearity", QUINTIC)),
            u0,
            cfg.get("horizon", 1.0),
            cfg.get("dt", 1e-4),
            gauge=cfg.get("gauge", False),
            save_every=cfg.get("save_every", 1),
        )
    return integrate(prob).to_report()


def _picard(cfg: dict, seed: int, threads: int) -> ExperimentReport:
    with _building():
        grid = TorusGrid(1.0, cfg.get("modes", 64))
        u0 = initial_field(cfg.get("initial"), grid, seed)
        prob = GkdvProblem(grid, QUINTIC, u0, 1.0, 1e-3, gauge=True)
        spec = NormSpec("Ys", s=cfg.get("residual_s", 0.5))
    stack = picard.picard_iterate(u0, prob, cfg.get("count", 4), cfg.get("per_unit", 64), spec, cfg.get("tol"))
    rep = ExperimentReport("picard", metadata={"grid": {"period": 1.0, "modes": grid.modes}, "norm": dataclasses.asdict(spec)})
    tab = rep.table(
        "residuals",
        ["iteration", "residual", "norm"],
        units={
            "iteration": ("integer", "n in u^(n+1) - u^(n)"),
            "residual": ("Y^s norm", "of u^(n+1) - u^(n)"),
            "norm": ("Y^s norm", "of u^(n+1)"),
        },
    )
    for i, (res, it) in enumerate(zip(stack.residuals, stack.iterates[1:])):
        tab.add(i, float(res), float(norm(it, spec)))
    r = stack.residuals
    ratios = [b / a for a, b in zip(r, r[1:]) if a > 0]
    rep.summary.update(
        {
            "iterations": len(r),
            "final_residual": float(r[-1]),
            "max_contraction": float(max(ratios)) if ratios else None,
            "converged": stack.converged,
        }
    )
    return rep


def _inflate(cfg: dict, seed: int, threads: int) -> ExperimentReport:
    return picard.inflation_experiment(
        cfg.get("s", 0.25),
        cfg.get("eps", 0.1),
        cfg.get("N", [32, 64, 128, 256, 512, 1024]),
        cfg.get("t", 0.01),
        cfg.get("modes", 8192),
        cfg.get("discard", 2),
        threads,
    )


def _probe(cfg: dict, seed: int, threads: int) -> ExperimentReport:
    if cfg["estimate"] == "mean-value":
        return mean_value_m_check(cfg.get("s", 0.5), cfg.get("N", 1.0), cfg.get("samples", 400), cfg.get("x_max", 8.0))
    keys = ("s", "k", "sweep", "family", "trials", "decay", "band", "per_unit")
    with _building():
        probe = EstimateProbe(cfg["estimate"], seed=seed, **{k: cfg[k] for k in keys if k in cfg})
    return probe_estimate(probe, threads)


def divisor_summary(xi: int, lam: int, N: int, L: int) -> dict:
    q = IntervalDivisorQuery(xi, lam, N, L)
    count = interval_divisor_count(q, force=True)
    return {
        "query": {"xi": xi, "lambda": lam, "N": N, "L": L},
        "count": count,
        "bound_N": N * (2 * L + 1),
        "bound_3L": 3 * L if q.second_bound_applies else None,
        "in_regime": q.in_regime,
    }


def _divisors(cfg: dict, seed: int, threads: int) -> ExperimentReport:
    rep = ExperimentReport("divisors")
    rep.summary.update(divisor_summary(cfg["xi"], cfg["lambda"], cfg["N"], cfg["L"]))
    return rep


def _imethod_inputs(cfg: dict, seed: int):
    ic = IMethodConfig(
        s=cfg.get("s", 0.5),
        eps=cfg.get("eps", 0.1),
        lam=cfg.get("lambda", 32.0),
        N=cfg.get("N", "auto"),
        C=cfg.get("C", 1.0),
        horizon=cfg.get("horizon", 1.0),
        modes=cfg.get("modes", 256),
        dt=cfg.get("dt", 1e-4),
        units=cfg.get("units", "frequency"),
    )
    return ic, initial_field(cfg.get("initial"), TorusGrid(1.0, ic.modes), seed)


def _imethod(cfg: dict, seed: int, threads: int) -> ExperimentReport:
    with _building():
        ic, u0 = _imethod_inputs(cfg, seed)
    if "lambda_list" in cfg:
        rep = drift_experiment(u0, ic, lam_list=cfg["lambda_list"], threads=threads)
    else:
        rep = drift_experiment(u0, ic, N_list=cfg.get("N_list", [ic.cutoff()]), threads=threads)
    return rep.to_report()


def _export(cfg: dict, seed: int, threads: int) -> ExperimentReport:
    idx = cfg.get("index", 0)
    with _building():
        fields = snapshot.read(cfg["input"])
        f = fields[idx]
    rep = ExperimentReport("export", metadata={"input": cfg["input"], "index": idx})
    tab = rep.table(
        "snapshot",
        ["wavenumber", "xi", "re", "im"],
        units={
            "wavenumber": ("integer", "xi * period"),
            "xi": ("frequency", "wavenumber / period"),
            "re": ("amplitude", "real part of the Fourier coefficient"),
            "im": ("amplitude", "imaginary part of the Fourier coefficient"),
        },
    )
    for row in snapshot.to_csv_rows(f):
        tab.add(*row)
    rep.summary.update({"snapshots": len(fields), "period": f.grid.period, "modes": f.grid.modes})
    return rep


COMMANDS: dict[str, Callable[[dict, int, int], ExperimentReport]] = {
    "solve": _solve,
    "picard": _picard,
    "inflate": _inflate,
    "probe": _probe,
    "divisors": _divisors,
    "imethod": _imethod,
    "export": _export,
}


# ---------------------------------------------------------------------------
# assertions and entry point


def _lookup(summary: dict, key: str):
    cur: Any = summary
    for part in key.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise KeyError(key)
        cur = cur[part]
    return cur


def check_assertions(summary: dict, checks: dict) -> dict[str, bool]:
    out = {}
    for key, rule in checks.items():
        try:
            v = _lookup(summary, key)
        except KeyError:
            out[key] = False
            continue
        ok = True
        if "equals" in rule:
            ok &= v == rule["equals"]
        if "min" in rule or "max" in rule:
            num = isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
            ok &= num and rule.get("min", -math.inf) <= v <= rule.get("max", math.inf)
        out[key] = bool(ok)
    return out


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("GKDV_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"GKDV_THREADS must be an integer, got {env!r}") from None
    return 1


def run(cfg: dict, output: str | Path, seed: int = 0, threads: int = 1) -> tuple[ExperimentReport, bool]:
    """Validate, dispatch and write the report; returns it with the assertion verdict."""
    cfg = validate(cfg)
    rep = COMMANDS[cfg["command"]](cfg, seed, threads)
    rep.metadata["config"] = cfg
    rep.metadata["seed"] = seed
    verdict = check_assertions(rep.summary, cfg.get("assert", {}))
    rep.summary["assertions"] = verdict
    rep.summary["passed"] = all(verdict.values())
    rep.write(output)
    return rep, rep.summary["passed"]


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="gkdvlab", description=__doc__.split("\n\n")[0])
    ap.add_argument("config", help="path to a JSON experiment config")
    ap.add_argument("--output", help="report directory (overrides the config)")
    ap.add_argument("--seed", type=int, help="random seed (overrides the config)")
    ap.add_argument("--threads", type=int, help="worker cap; falls back to GKDV_THREADS")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
        validate(cfg)
        output = args.output or cfg.get("output")
        if not output:
            raise ConfigError("no output directory: set 'output' or pass --output")
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        threads = resolve_threads(args.threads)
    except (OSError, json.JSONDecodeError, ConfigError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        rep, passed = run(cfg, output, seed, threads)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - every runtime failure maps to exit 1
        log.debug("runtime failure", exc_info=True)
        print(f"{cfg['command']} failed: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    if cfg["command"] == "divisors":  # the JSON answer also goes to stdout
        print(json.dumps({k: rep.summary[k] for k in ("query", "count", "bound_N", "bound_3L", "in_regime")}))
    if not passed:
        failed = [k for k, ok in rep.summary["assertions"].items() if not ok]
        print(f"assertions failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
