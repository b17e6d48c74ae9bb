"""Command-line front end.

Subcommands: ``regime``, ``fractal``, ``field``, ``verify`` and ``sweep``.
Each reads one INI config (``--config``); command-line flags override the
matching config keys. Exit codes: 0 success, 1 a check or regime row
failed, 2 bad usage or config, 3 a numerical limit was hit (level
overflow near T, point or grid caps).
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verify as V
from .field import AXISYM, CANTOR, SINGLE, FieldSpec, LevelOverflow
from .fractal import CantorSpec, CapExceeded, box_counting_dimension, generation
from .lift import LiftedField
from .params import (
    REQUIRED,
    VARIANTS,
    ParameterError,
    ScalingParams,
    check_regime,
    hausdorff_dimension,
)
from .profile import CARTESIAN, RADIAL, SPLIT_POLICIES, BumpProfile
from .reporting import (
    GridCapExceeded,
    GridDescriptor,
    config_hash,
    level_of,
    sample_grid,
    sample_vector_grid,
    write_csv,
    write_json,
    write_point_cloud,
    write_sidecar,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_LIMIT = 0, 1, 2, 3
THREADS_ENV = "SELFSING_THREADS"


class ConfigError(ValueError):
    """Config problem; ``lineno`` is 1-based when known."""

    def __init__(self, msg, lineno=None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {msg}" if lineno else msg)


# ------------------------------------------------------------------ value parsers


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "yes", "true", "on"):
        return True
    if v in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"expected a boolean, got {s!r}")


def _floats(s):
    return [float(v) for v in s.replace(";", ",").split(",") if v.strip()]


def _ints(s):
    out = []
    for v in _floats(s):
        if v != int(v):
            raise ValueError(f"expected an integer, got {v}")
        out.append(int(v))
    return out


def _pair(s):
    v = _ints(s)
    if len(v) != 2:
        raise ValueError("expected two comma-separated integers")
    return tuple(v)


def _fpair(s):
    v = _floats(s)
    if len(v) != 2:
        raise ValueError("expected two comma-separated numbers")
    return tuple(v)


def _grid(s):
    v = _ints(s)
    if len(v) != 3 or min(v) < 1:
        raise ValueError("expected NX,NY,NZ with positive integers")
    return tuple(v)


def _words(s):
    return [w.strip() for w in s.split(",") if w.strip()]


def _cells(s):
    cells = []
    for chunk in s.split(";"):
        if chunk.strip():
            c = _ints(chunk)
            if len(c) != 3:
                raise ValueError(f"cell {chunk.strip()!r} needs three indices")
            cells.append(tuple(c))
    return tuple(cells)


def _range(s):
    """``a,b,c`` lists or ``start:stop:count`` evenly spaced values."""
    s = s.strip()
    if ":" in s:
        parts = s.split(":")
        if len(parts) != 3:
            raise ValueError("ranges are start:stop:count")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise ValueError("range count must be positive")
        return [float(v) for v in np.linspace(a, b, n)]
    vals = _floats(s)
    if not vals:
        raise ValueError("empty range")
    return vals


SCHEMA = {
    "params": {
        "variant": str, "lam": float, "sigma": float, "k": int, "m": int, "q": float,
        "p": float, "beta": float, "epsilon": float, "M": float, "enforce_regime": _bool,
        "n_max": int,
    },
    "profile": {"radius": float, "zero_mean": _bool},
    "cantor": {"cells": _cells},
    "split": {"policy": str, "fraction": float},
    "fractal": {"depth": int, "cap": int},
    "field": {
        "t": float, "grid": _grid, "half_width": float, "fields": _words, "lift": str,
        "cap": int, "binary": _bool,
    },
    "verify": {
        "suite": _words, "n_max": int, "blowup_levels": int, "forcing_p": _floats,
        "oracle_grid": _pair, "oracle_refinements": int, "oracle_domain": _fpair,
        "weak_levels": int, "weak_tol": float,
    },
    "sweep": {
        "lam": _range, "sigma": _range, "k": _range, "m": _range, "q": _range, "p": _range,
    },
    "output": {"dir": str},
}

DEFAULTS = {
    "fractal": {"depth": 5, "cap": 10 ** 6},
    "field": {"t": 0.0, "grid": (33, 33, 33), "half_width": 1.5, "fields": ["z"], "lift": "none",
              "cap": 2_000_000, "binary": True},
    "verify": {"suite": ["all"], "n_max": 6, "blowup_levels": 20, "forcing_p": [],
               "oracle_grid": (32, 64), "oracle_refinements": 3, "oracle_domain": (1.0, 1.0),
               "weak_levels": 10, "weak_tol": 1e-9},
    "output": {"dir": "."},
}


def _key_line(lines, section, key):
    current = None
    for i, raw in enumerate(lines, 1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and s and s[0] not in "#;":
            name = s.split("=", 1)[0].split(":", 1)[0].strip()
            if name == key:
                return i
    return None


def _section_line(lines, section):
    for i, raw in enumerate(lines, 1):
        if raw.strip() == f"[{section}]":
            return i
    return None


@dataclass
class RunConfig:
    """Validated configuration: typed values per section plus the hash input."""

    variant: str
    params: ScalingParams
    profile: BumpProfile
    cantor: CantorSpec | None
    split_policy: str
    g_fraction: float
    enforce_regime: bool
    n_max: int
    sections: dict = field(default_factory=dict)

    def section(self, name) -> dict:
        merged = dict(DEFAULTS.get(name, {}))
        merged.update(self.sections.get(name, {}))
        return merged

    @property
    def hash(self) -> str:
        return config_hash(self.sections)

    def build_spec(self) -> FieldSpec:
        return FieldSpec(self.variant, self.params, self.profile, self.cantor,
                         self.split_policy, self.g_fraction, self.n_max, self.enforce_regime)


def parse_config(text: str) -> RunConfig:
    """Parse and validate INI text; unknown sections or keys are errors."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("missing section header", e.lineno) from e
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as e:
        raise ConfigError(e.message.split(": ", 1)[-1], e.lineno) from e
    except configparser.ParsingError as e:
        lineno, line = e.errors[0]
        raise ConfigError(f"cannot parse {line.strip()}", lineno) from e
    lines = text.splitlines()
    sections = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]", _section_line(lines, sec))
        typed = {}
        for key, raw in cp.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]", _key_line(lines, sec, key))
            try:
                typed[key] = SCHEMA[sec][key](raw)
            except ValueError as e:
                raise ConfigError(f"bad value for {sec}.{key}: {e}", _key_line(lines, sec, key)) from e
        sections[sec] = typed
    return _build(sections, lines)


def _build(sections, lines=()) -> RunConfig:
    p = sections.get("params")
    if p is None:
        raise ConfigError("missing section [params]")
    for key in ("variant", "lam"):
        if key not in p:
            raise ConfigError(f"missing key {key!r} in [params]", _section_line(lines, "params"))
    variant = p["variant"]
    if variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}, got {variant!r}",
                          _key_line(lines, "params", "variant"))
    kw = {k: p[k] for k in ("lam", "sigma", "k", "m", "q", "p", "beta", "epsilon", "M") if k in p}
    if "sigma" not in kw:
        if variant == CANTOR and "k" in kw:
            kw["sigma"] = 1.0 / (kw["k"] * kw["k"])
        else:
            raise ConfigError("missing key 'sigma' in [params]", _section_line(lines, "params"))
    try:
        params = ScalingParams(**kw)
    except ParameterError as e:
        raise ConfigError(str(e), _section_line(lines, "params")) from e
    prof = sections.get("profile", {})
    profile = BumpProfile(RADIAL if variant == AXISYM else CARTESIAN,
                          radius=prof.get("radius", 1.0), M=params.M,
                          zero_mean=prof.get("zero_mean", True))
    cantor = None
    if "cantor" in sections and "cells" in sections["cantor"]:
        if params.k is None:
            raise ConfigError("[cantor] cells need params.k", _section_line(lines, "cantor"))
        cantor = CantorSpec(params.k, sections["cantor"]["cells"])
    split = sections.get("split", {})
    policy = split.get("policy", "all-in-f")
    if policy not in SPLIT_POLICIES:
        raise ConfigError(f"split.policy must be one of {SPLIT_POLICIES}",
                          _key_line(lines, "split", "policy"))
    lift = sections.get("field", {}).get("lift", "none")
    if lift not in ("none", "full", "single"):
        raise ConfigError("field.lift must be none, full or single", _key_line(lines, "field", "lift"))
    return RunConfig(variant, params, profile, cantor, policy, split.get("fraction", 0.0),
                     p.get("enforce_regime", True), p.get("n_max", 300), sections)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from e
    return parse_config(text)


# ------------------------------------------------------------------ helpers


class _Out:
    def __init__(self, quiet):
        self.quiet = quiet

    def __call__(self, *a):
        if not self.quiet:
            print(*a)


def _outdir(cfg: RunConfig, args) -> Path:
    d = Path(args.out or cfg.section("output")["dir"])
    d.mkdir(parents=True, exist_ok=True)
    return d


def threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


# ------------------------------------------------------------------ regime


def cmd_regime(cfg: RunConfig, args) -> int:
    rep = check_regime(cfg.params)
    out = _Out(args.quiet)
    required = set(REQUIRED[cfg.variant])
    out(f"{'row':<16} {'expression':<34} {'lhs':>12} {'threshold':>12} {'margin':>12}  status")
    for e in rep.entries:
        status = {True: "ok", False: "FAIL", None: "n/a"}[e.satisfied]
        mark = "*" if e.name in required else " "
        out(f"{mark}{e.name:<15} {e.expression:<34} {e.lhs:>12.6g} {e.threshold:>12.6g} "
            f"{e.margin:>12.6g}  {status}")
    bad = rep.failures(cfg.variant)
    out(f"required rows for {cfg.variant} (*): {'pass' if not bad else 'FAIL'}")
    if args.out:
        d = _outdir(cfg, args)
        body = rep.as_dict()
        body["variant"] = cfg.variant
        body["required"] = sorted(required)
        body["pass"] = not bad
        path = write_json(d / "regime.json", body)
        write_sidecar(path, cfg.hash, kind="regime", variant=cfg.variant,
                      params=cfg.params.as_dict())
    return EXIT_FAIL if bad else EXIT_OK


# ------------------------------------------------------------------ fractal


def cmd_fractal(cfg: RunConfig, args) -> int:
    p = cfg.params
    if p.k is None:
        raise ConfigError("the fractal command needs params.k and params.m")
    sec = cfg.section("fractal")
    depth = sec["depth"] if args.depth is None else args.depth
    spec = cfg.cantor or CantorSpec.default(p.k, p.m)
    cloud = generation(spec, depth, cap=sec["cap"])
    sim = hausdorff_dimension(p.k, p.m)
    est = None
    if depth >= 3:
        scales = [float(p.k) ** -j for j in range(1, depth + 1)]
        est = box_counting_dimension(cloud, scales)
    out = _Out(args.quiet)
    out(f"points: {len(cloud)}")
    out(f"similarity dimension: {sim:.12g}")
    out(f"box-counting estimate: {'n/a (depth < 3)' if est is None else f'{est:.6g}'}")
    d = _outdir(cfg, args)
    path = write_point_cloud(d / f"fractal_depth{depth}.csv", cloud.points)
    write_sidecar(path, cfg.hash, kind="point_cloud", k=p.k, m=p.m, depth=depth,
                  cells=[list(c) for c in spec.cells], rows=len(cloud),
                  similarity_dimension=sim, box_counting_dimension=est)
    return EXIT_OK


# ------------------------------------------------------------------ field


def cmd_field(cfg: RunConfig, args) -> int:
    sec = cfg.section("field")
    t = sec["t"] if args.t is None else args.t
    dims = sec["grid"] if args.grid is None else args.grid
    if t < 0:
        raise ConfigError("t must be non-negative")
    spec = cfg.build_spec()
    try:
        N = level_of(spec, t)
    except LevelOverflow as e:
        print(f"error: {e} (max representable t = {spec.max_time()!r})", file=sys.stderr)
        return EXIT_LIMIT
    hw = sec["half_width"]
    grid = GridDescriptor(dims, ((-hw, hw), (-hw, hw), (-hw, hw)))
    if sec["lift"] != "none":
        lifted = LiftedField(spec, sec["lift"])
        dump = sample_vector_grid(lifted, t, grid, cap=sec["cap"])
    else:
        dump = sample_grid(spec, t, grid, tuple(sec["fields"]), cap=sec["cap"])
    d = _outdir(cfg, args)
    meta = dict(kind="grid", variant=cfg.variant, params=cfg.params.as_dict(), t=t, N=N,
                T=spec.T, dims=list(dims), bounds=[list(b) for b in grid.bounds],
                columns=dump.header())
    paths = [dump.to_csv(d / "field.csv")]
    if sec["binary"]:
        paths.append(dump.to_binary(d / "field.ssgrid"))
    for path in paths:
        write_sidecar(path, cfg.hash, **meta)
    out = _Out(args.quiet)
    out(f"t={t!r} level={'post-T' if N is None else N} points={grid.size} "
        f"max|value|={float(np.max(np.abs(dump.values))):.6g}")
    return EXIT_OK


# ------------------------------------------------------------------ verify

# which suites make sense for which variant
APPLICABLE = {
    "norms": VARIANTS,
    "flatness": (SINGLE, AXISYM),
    "residual": (SINGLE, AXISYM),
    "forcing": VARIANTS,
    "oracle": (AXISYM,),
    "blowup": VARIANTS,
    "assumptionB": (AXISYM,),
}


def select_suites(names, variant):
    if not names:
        names = ["all"]
    if "all" in names:
        return [s for s in V.SUITES if variant in APPLICABLE[s]]
    out = []
    for n in names:
        if n not in V.SUITES:
            raise ConfigError(f"unknown suite {n!r}; choose from {V.SUITES + ('all',)}")
        if variant not in APPLICABLE[n]:
            raise ConfigError(f"suite {n!r} does not apply to the {variant} variant")
        if n not in out:
            out.append(n)
    return out


def _forcing_entries(spec, ps):
    res = []
    for p in ps:
        rep = V.forcing_integrability(spec, p)
        entry = rep.as_dict()
        if rep.passed:
            entry["label"] = ("EXPECTED-divergent" if rep.expected == "divergent"
                              else "convergent")
        else:
            entry["label"] = "FAIL"
        res.append(entry)
    return {"report": "forcing", "pass": all(e["pass"] for e in res), "runs": res}


def run_suite(name, spec, sec):
    if name == "norms":
        return V.energy_norms(spec, sec["n_max"]).as_dict()
    if name == "flatness":
        return V.local_energy_flatness(spec).as_dict()
    if name == "residual":
        return V.weak_residual(spec, N_trunc=sec["weak_levels"], tol=sec["weak_tol"]).as_dict()
    if name == "forcing":
        ps = sec["forcing_p"] or ([spec.params.p, 2.0] if spec.variant == AXISYM else [spec.params.p])
        return _forcing_entries(spec, ps)
    if name == "oracle":
        return V.fd_oracle_compare(spec, grid=sec["oracle_grid"],
                                   refinements=sec["oracle_refinements"],
                                   domain=sec["oracle_domain"]).as_dict()
    if name == "blowup":
        return V.blowup_rate_fit(spec, range(1, sec["blowup_levels"] + 1)).as_dict()
    if name == "assumptionB":
        return V.assumption_B_check(spec, sec["n_max"]).as_dict()
    raise ConfigError(f"unknown suite {name!r}")


def _guarded(name, spec, sec):
    try:
        return run_suite(name, spec, sec)
    except (ValueError, ArithmeticError, RuntimeError) as e:
        return {"report": name, "pass": False, "error": f"{name}: {type(e).__name__}: {e}"}


CHECK_COLUMNS = ("suite", "run", "name", "level", "measured", "theoretical", "ratio", "pass")


def check_rows(bundle):
    """One CSV row per check, suites in run order."""
    rows = []
    for suite, res in bundle["suites"].items():
        runs = res.get("runs", [res])
        for i, run in enumerate(runs):
            for c in run.get("checks", []):
                rows.append([suite, i, c["name"], "" if c["level"] is None else c["level"],
                             c["measured"], c["theoretical"], c["ratio"], str(c["pass"]).lower()])
            if "error" in run:
                rows.append([suite, i, "error", "", "", "", "", "false"])
    return rows


def cmd_verify(cfg: RunConfig, args) -> int:
    sec = cfg.section("verify")
    names = select_suites(args.suite or sec["suite"], cfg.variant)
    spec = cfg.build_spec()
    with ThreadPoolExecutor(max_workers=threads()) as pool:
        results = list(pool.map(lambda n: _guarded(n, spec, sec), names))
    bundle = {"variant": cfg.variant, "params": cfg.params.as_dict(),
              "suites": dict(zip(names, results)), "pass": all(r["pass"] for r in results),
              "pressure": "Q = 0 (componentwise heat dynamics)"}
    out = _Out(args.quiet)
    for n, r in zip(names, results):
        label = "pass" if r["pass"] else "FAIL"
        if n == "forcing" and r["pass"]:
            label = "pass (" + ", ".join(f"p={e['data']['p']:g}: {e['label']}" for e in r["runs"]) + ")"
        out(f"{n:<12} {label}" + (f"  [{r['error']}]" if "error" in r else ""))
    d = _outdir(cfg, args)
    path = write_json(d / "verify.json", bundle)
    write_sidecar(path, cfg.hash, kind="verify", suites=names)
    path = write_csv(d / "verify_checks.csv", CHECK_COLUMNS, check_rows(bundle))
    write_sidecar(path, cfg.hash, kind="verify_checks", suites=names, columns=list(CHECK_COLUMNS))
    return EXIT_OK if bundle["pass"] else EXIT_FAIL


# ------------------------------------------------------------------ sweep

SWEEP_KEYS = ("lam", "sigma", "k", "m", "q", "p")


def sweep_rows(cfg: RunConfig):
    """Cartesian product of the [sweep] ranges over the base params; lam varies fastest."""
    base = cfg.params
    sec = cfg.sections.get("sweep", {})
    axes = []
    for key in SWEEP_KEYS:
        if key in sec:
            vals = sec[key]
            if key in ("k", "m"):
                if any(v != int(v) for v in vals):
                    raise ConfigError(f"sweep.{key} needs integer values")
                vals = [int(v) for v in vals]
        else:
            vals = [getattr(base, key)]
        axes.append(vals)
    names = [e.name for e in check_regime(base).entries]
    header = list(SWEEP_KEYS) + ["dimension"] + [f"{n}_lhs" for n in names] + \
        [f"{n}_ok" for n in names] + ["required_ok"]
    rows = []
    for combo in np.ndindex(*[len(a) for a in axes[::-1]]):
        vals = {SWEEP_KEYS[i]: axes[i][j] for i, j in zip(range(5, -1, -1), combo)}
        kw = {k: vals[k] for k in ("lam", "sigma", "q", "p")}
        if vals["k"] is not None:
            kw.update(k=vals["k"], m=vals["m"])
        try:
            params = base.with_(**kw)
        except ParameterError as e:
            rows.append([_cell(vals[k]) for k in SWEEP_KEYS] + [f"invalid: {e}"]
                        + [""] * (2 * len(names) + 1))
            continue
        rep = check_regime(params)
        dim = hausdorff_dimension(params.k, params.m) if params.k is not None else ""
        ok = not rep.failures(cfg.variant)
        rows.append([_cell(vals[k]) for k in SWEEP_KEYS] + [_cell(dim)]
                    + [_cell(rep[n].lhs) for n in names]
                    + ["" if rep[n].satisfied is None else str(rep[n].satisfied).lower() for n in names]
                    + [str(ok).lower()])
    return header, rows


def _cell(v):
    if v is None or v == "":
        return ""
    if isinstance(v, float) and math.isnan(v):
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def cmd_sweep(cfg: RunConfig, args) -> int:
    header, rows = sweep_rows(cfg)
    d = _outdir(cfg, args)
    path = write_csv(d / "sweep.csv", header, rows)
    write_sidecar(path, cfg.hash, kind="sweep", variant=cfg.variant, rows=len(rows), columns=header)
    _Out(args.quiet)(f"{len(rows)} rows -> {path}")
    return EXIT_OK


# ------------------------------------------------------------------ entry point

COMMANDS = {"regime": cmd_regime, "fractal": cmd_fractal, "field": cmd_field,
            "verify": cmd_verify, "sweep": cmd_sweep}


def _grid_arg(s):
    try:
        return _grid(s)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="INI config file")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
    common.add_argument("--quiet", action="store_true", help="suppress stdout")
    ap = argparse.ArgumentParser(prog="selfsing", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("regime", parents=[common], help="evaluate the parameter inequalities")
    f = sub.add_parser("fractal", parents=[common], help="Cantor point cloud and dimensions")
    f.add_argument("--depth", type=int, metavar="N")
    g = sub.add_parser("field", parents=[common], help="sample the field on a grid")
    g.add_argument("--t", type=float, metavar="VALUE")
    g.add_argument("--grid", type=_grid_arg, metavar="NX,NY,NZ")
    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("--suite", action="append", metavar="NAME",
                   help=f"one of {', '.join(V.SUITES)} or all; repeatable")
    sub.add_parser("sweep", parents=[common], help="regime table over parameter ranges")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for attr in ("depth", "t", "grid", "suite"):
        if not hasattr(args, attr):
            setattr(args, attr, None)
    if args.suite:
        args.suite = [w for s in args.suite for w in _words(s)]
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ParameterError as e:
        print(f"parameter error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (LevelOverflow, CapExceeded, GridCapExceeded) as e:
        print(f"limit: {e}", file=sys.stderr)
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())
