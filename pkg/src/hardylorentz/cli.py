"""Command-line front end: config file in, per-term CSV and JSON lines out.

Config grammar (INI syntax read with :mod:`configparser`)::

    [run]
    command = compute-k        # compute-k | compute-mnorm | verify | check-weights | sweep
    seed = 42                  # optional
    window = 64                # optional, verify only
    out = results              # optional output prefix
    n_samples = 2000           # optional, verify only
    refine_steps = 20          # optional, verify only
    grid.t_min = 1e-08         # optional grid overrides
    grid.t_max = 1e+08
    grid.n_points = 2048

    [case NAME]                # one section per case
    p = 2
    m = 0.5
    q = 3
    u = [(0, 1, 0, 0)]         # weight literal: list of (lo, coeff, a[, beta])
    b = [(0, 1, 0, 0)]
    v = [(0, 1, -1.1), (1, 1, -1.2)]
    w = [(0, 1, 0.5), (1, 1, -2)]

    [sweep]                    # sweep only
    target = compute-k         # compute-k | compute-mnorm
    param = q
    values = [1.5, 2.0, 3.0]

Maximal-operator cases use ``alpha``, ``r``, ``b``, ``phi``, ``v``, ``w`` and
an optional ``path`` (``direct``, ``reduced`` or ``both``). Verify cases may
set ``inequality`` to one of ``hardy``, ``copson``, ``gks``, ``krepick``,
``supD`` or ``supE`` to test a background constant instead of ``K``.

Exit codes: 0 all rows ok, 2 error rows (regime, admissibility, shape or
config problems), 3 failed verification, 1 internal error.
"""

from __future__ import annotations

import argparse
import ast
import configparser
import csv
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import constants as C
from .characterize import MaximalSpec, RestrictedSpec, k_restricted, maximal_norm
from .errors import HardyLorentzError, ParseError, ValidationError
from .grid import Grid
from .verify import BACKGROUND, brute_force_background, brute_force_k, equivalence_report
from .weights import Weight, check_admissibility, check_shape, parse_weight, render_weight

SCHEMA = "v1"
COLUMNS = ["case", "command", "regime", "status", "key", "value", "param", "message"]
COMMANDS = ("compute-k", "compute-mnorm", "verify", "check-weights", "sweep")
EXIT_OK, EXIT_INTERNAL, EXIT_ERROR, EXIT_VERIFY = 0, 1, 2, 3
DEFAULT_WINDOWS = {"k": 64.0, "background": 4.0}

_NUMBERS = ("p", "m", "q", "alpha", "r")
_WEIGHTS = ("u", "b", "v", "w", "phi")
_CASE_KEYS = set(_NUMBERS) | set(_WEIGHTS) | {"path", "inequality"}
_RUN_KEYS = {"command", "seed", "window", "out", "n_samples", "refine_steps",
             "grid.t_min", "grid.t_max", "grid.n_points"}
_ONE = Weight.constant(1.0)


@dataclass(frozen=True)
class CaseConfig:
    """Exponents and weights of one case; unused fields stay ``None``."""

    name: str
    p: float | None = None
    m: float | None = None
    q: float | None = None
    alpha: float | None = None
    r: float | None = None
    u: Weight | None = None
    b: Weight | None = None
    v: Weight | None = None
    w: Weight | None = None
    phi: Weight | None = None
    path: str | None = None
    inequality: str | None = None


@dataclass(frozen=True)
class RunConfig:
    """Validated run description."""

    command: str
    cases: tuple[CaseConfig, ...]
    t_min: float = Grid().t_min
    t_max: float = Grid().t_max
    n_points: int = Grid().n_points
    seed: int = 42
    window: float | None = None
    out: str = "hardylorentz_out"
    n_samples: int = 2000
    refine_steps: int = 20
    sweep_target: str | None = None
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] = field(default_factory=tuple)

    @property
    def grid(self) -> Grid:
        return Grid(self.t_min, self.t_max, self.n_points)


# ---------------------------------------------------------------------------
# parsing


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    """1-based line of ``key`` inside ``[section]`` (or of the header)."""
    current = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[(.+)\]$", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return no
            continue
        if current == section and key is not None:
            if re.match(rf"^{re.escape(key)}\s*[=:]", line):
                return no
    return None


def _number(text: str, raw: str, section: str, key: str, kind=float):
    try:
        val = kind(raw)
    except ValueError:
        raise ParseError(f"expected a {kind.__name__}, got {raw!r}",
                         _line_of(text, section, key), key) from None
    return val


def _parse_case(text: str, section: str, items: dict) -> CaseConfig:
    name = section[len("case"):].strip() or "case"
    kw: dict = {"name": name}
    for key, raw in items.items():
        line = _line_of(text, section, key)
        if key not in _CASE_KEYS:
            raise ParseError(f"unknown case key {key!r}", line, key)
        if key in _NUMBERS:
            kw[key] = _number(text, raw, section, key)
        elif key in _WEIGHTS:
            try:
                kw[key] = parse_weight(raw)
            except ParseError as exc:
                raise ParseError(str(exc), line, key) from None
            except ValidationError as exc:
                raise ValidationError(f"[line {line}, field {key!r}] {exc}",
                                      exc.violations) from None
        else:
            kw[key] = raw.strip()
    return CaseConfig(**kw)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config document.

    Raises
    ------
    ParseError
        Malformed text, unknown command, section or key; carries the line
        and field when known.
    ValidationError
        Well-formed but inconsistent content; lists every violation.
    """
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ParseError(str(exc).splitlines()[0], line) from None
    if "run" not in cp:
        raise ParseError("missing [run] section")
    run = dict(cp["run"])
    for key in run:
        if key not in _RUN_KEYS:
            raise ParseError(f"unknown run key {key!r}", _line_of(text, "run", key), key)
    command = run.get("command", "").strip()
    if command not in COMMANDS:
        raise ParseError(f"unknown command {command!r}", _line_of(text, "run", "command"),
                         "command")
    kw: dict = {"command": command}
    conv = {"seed": int, "n_samples": int, "refine_steps": int, "grid.n_points": int,
            "window": float, "grid.t_min": float, "grid.t_max": float}
    for key, kind in conv.items():
        if key in run:
            kw[key.replace("grid.", "")] = _number(text, run[key], "run", key, kind)
    if "out" in run:
        kw["out"] = run["out"].strip()
    cases = []
    for section in cp.sections():
        if section == "run":
            continue
        if section == "sweep":
            kw.update(_parse_sweep(text, dict(cp["sweep"])))
            continue
        if not section.startswith("case"):
            raise ParseError(f"unknown section [{section}]", _line_of(text, section))
        cases.append(_parse_case(text, section, dict(cp[section])))
    cfg = RunConfig(cases=tuple(cases), **kw)
    _validate(cfg)
    return cfg


def _parse_sweep(text: str, items: dict) -> dict:
    out: dict = {}
    for key, raw in items.items():
        line = _line_of(text, "sweep", key)
        if key == "target":
            out["sweep_target"] = raw.strip()
        elif key == "param":
            out["sweep_param"] = raw.strip()
        elif key == "values":
            try:
                vals = ast.literal_eval(raw.strip())
                out["sweep_values"] = tuple(float(x) for x in vals)
            except (ValueError, SyntaxError, TypeError):
                raise ParseError("values must be a list of numbers", line, key) from None
        else:
            raise ParseError(f"unknown sweep key {key!r}", line, key)
    return out


def _required(cmd: str, case: CaseConfig) -> list[str]:
    if cmd == "check-weights":
        return ["p", "m", "v"]
    if case.inequality is not None:
        need = ["p", "v", "w"]
        if case.inequality in ("hardy", "copson", "gks", "krepick"):
            need.append("q")
        if case.inequality in ("gks", "krepick"):
            need.append("m")
        if case.inequality != "hardy" and case.inequality != "copson":
            need.append("u")
        return need
    if cmd == "compute-mnorm":
        return ["p", "m", "q", "alpha", "r", "b", "phi", "v", "w"]
    return ["p", "m", "q", "v", "w"]


def _validate(cfg: RunConfig) -> None:
    problems = []
    if not (cfg.t_min > 0 and cfg.t_max > cfg.t_min):
        problems.append("grid: need 0 < t_min < t_max")
    if cfg.n_points < 2:
        problems.append("grid: need n_points >= 2")
    if cfg.window is not None and not cfg.window >= 1:
        problems.append("window must be at least 1")
    if not cfg.cases:
        problems.append("at least one [case NAME] section is required")
    target = cfg.command
    if cfg.command == "sweep":
        target = cfg.sweep_target or ""
        if target not in ("compute-k", "compute-mnorm"):
            problems.append("sweep target must be compute-k or compute-mnorm")
        if cfg.sweep_param not in _NUMBERS:
            problems.append(f"sweep param must be one of {', '.join(_NUMBERS)}")
        if not cfg.sweep_values:
            problems.append("sweep values must be a non-empty list")
    elif cfg.sweep_target or cfg.sweep_param or cfg.sweep_values:
        problems.append("[sweep] is only allowed with command = sweep")
    names = [c.name for c in cfg.cases]
    if len(set(names)) != len(names):
        problems.append("case names must be unique")
    for case in cfg.cases:
        if case.inequality is not None:
            if cfg.command != "verify":
                problems.append(f"case {case.name}: inequality is only used by verify")
            elif case.inequality not in BACKGROUND:
                problems.append(f"case {case.name}: unknown inequality {case.inequality!r}")
        if case.path is not None and case.path not in ("direct", "reduced", "both"):
            problems.append(f"case {case.name}: path must be direct, reduced or both")
        for key in _required(target, case):
            if getattr(case, key) is None:
                problems.append(f"case {case.name}: missing {key}")
        for key in _NUMBERS:
            val = getattr(case, key)
            if val is not None and not (val > 0 and math.isfinite(val)):
                problems.append(f"case {case.name}: {key} must be positive and finite")
    if problems:
        raise ValidationError("; ".join(problems), problems)


def render_config(cfg: RunConfig) -> str:
    """Text that :func:`parse_config` maps back to ``cfg``."""
    lines = ["[run]", f"command = {cfg.command}", f"seed = {cfg.seed}"]
    if cfg.window is not None:
        lines.append(f"window = {cfg.window!r}")
    lines += [f"out = {cfg.out}", f"n_samples = {cfg.n_samples}",
              f"refine_steps = {cfg.refine_steps}", f"grid.t_min = {cfg.t_min!r}",
              f"grid.t_max = {cfg.t_max!r}", f"grid.n_points = {cfg.n_points}"]
    for case in cfg.cases:
        lines += ["", f"[case {case.name}]"]
        for key in _NUMBERS:
            val = getattr(case, key)
            if val is not None:
                lines.append(f"{key} = {val!r}")
        for key in _WEIGHTS:
            val = getattr(case, key)
            if val is not None:
                lines.append(f"{key} = {render_weight(val)}")
        for key in ("path", "inequality"):
            val = getattr(case, key)
            if val is not None:
                lines.append(f"{key} = {val}")
    if cfg.command == "sweep":
        lines += ["", "[sweep]", f"target = {cfg.sweep_target}", f"param = {cfg.sweep_param}",
                  f"values = {list(cfg.sweep_values)!r}"]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# running


@dataclass
class Row:
    case: str
    command: str
    regime: str = ""
    status: str = "ok"
    key: str = ""
    value: float | str = ""
    param: float | str = ""
    message: str = ""


@dataclass
class Outcome:
    rows: list[Row] = field(default_factory=list)
    records: list[dict] = field(default_factory=list)
    errors: int = 0
    failures: int = 0
    internal: int = 0

    def merge(self, other: "Outcome") -> None:
        self.rows += other.rows
        self.records += other.records
        self.errors += other.errors
        self.failures += other.failures
        self.internal += other.internal

    @property
    def exit_code(self) -> int:
        if self.internal:
            return EXIT_INTERNAL
        if self.failures:
            return EXIT_VERIFY
        if self.errors:
            return EXIT_ERROR
        return EXIT_OK


def _restricted(case: CaseConfig) -> RestrictedSpec:
    return RestrictedSpec(case.p, case.m, case.q, case.u or _ONE, case.b or _ONE, case.v,
                          case.w, name=case.name)


def _maximal(case: CaseConfig) -> MaximalSpec:
    return MaximalSpec(case.p, case.m, case.q, case.alpha, case.r, case.b, case.phi, case.v,
                       case.w, name=case.name)


def _report_rows(case: str, command: str, rep: C.ConstantReport, param="") -> list[Row]:
    rows = [Row(case, command, rep.regime, "ok", k, v, param) for k, v in rep.terms.items()]
    rows.append(Row(case, command, rep.regime, "ok", "value", rep.value, param))
    return rows


def _compute(cfg: RunConfig, case: CaseConfig, command: str, out: Outcome, param="") -> None:
    grid = cfg.grid
    if command == "compute-k":
        rep = k_restricted(_restricted(case), grid)
        out.rows += _report_rows(case.name, command, rep, param)
        out.records.append({"case": case.name, "command": command, "param": param,
                            "status": "ok", **rep.to_dict()})
        return
    path = case.path or "both"
    rep = maximal_norm(_maximal(case), path, grid)
    out.rows += _report_rows(case.name, command, rep, param)
    out.records.append({"case": case.name, "command": command, "param": param, "path": path,
                        "status": "ok", **rep.to_dict()})


def _background_formula(case: CaseConfig, grid: Grid) -> C.ConstantReport:
    which = case.inequality
    if which == "hardy":
        return C.hardy_constant(case.p, case.q, case.v, case.w, grid)
    if which == "copson":
        return C.copson_constant(case.p, case.q, case.v, case.w, grid)
    if which == "gks":
        return C.gks_constant(case.p, case.m, case.q, case.u, case.v, case.w, grid)
    if which == "krepick":
        return C.krepick_constant(case.p, case.m, case.q, case.u, case.v, case.w, grid)
    if which == "supD":
        return C.supop_D(case.p, 0.0, case.u, case.v, case.w, grid)
    return C.supop_E(case.p, 0.0, case.u, case.v, case.w, grid)


def _verify(cfg: RunConfig, case: CaseConfig, out: Outcome) -> None:
    grid = cfg.grid
    if case.inequality is None:
        formula = k_restricted(_restricted(case), grid)
        rep = brute_force_k(_restricted(case), cfg.n_samples, cfg.refine_steps, cfg.seed,
                            formula=formula)
        window = cfg.window or DEFAULT_WINDOWS["k"]
    else:
        formula = _background_formula(case, grid)
        inputs = {k: getattr(case, k) for k in ("p", "m", "q", "u", "v", "w")
                  if getattr(case, k) is not None}
        rep = brute_force_background(case.inequality, inputs, cfg.n_samples, cfg.refine_steps,
                                     cfg.seed, formula=formula)
        window = cfg.window or DEFAULT_WINDOWS["background"]
    eq = equivalence_report(formula, rep, window)
    rep.window, rep.passed = window, eq.passed
    status = "pass" if eq.passed else "fail"
    if not eq.passed:
        out.failures += 1
    for key, val in (("formula", rep.formula_value), ("oracle", rep.oracle_lower_bound),
                     ("ratio", rep.ratio), ("window", window), ("n_samples", rep.n_samples)):
        out.rows.append(Row(case.name, "verify", rep.regime, status, key, val))
    out.records.append({"case": case.name, "command": "verify", "status": status,
                        **rep.to_dict()})


def _check_weights(cfg: RunConfig, case: CaseConfig, out: Outcome) -> None:
    rep = check_admissibility(case.v, case.m, case.p, cfg.grid)
    checks = {"nontriv_ok": rep.nontriv_ok, "nondegen_ok": rep.nondegen_ok,
              "member": rep.member}
    verdicts: dict[str, str] = {}
    if case.phi is not None:
        verdicts["phi quasi_increasing"] = check_shape(case.phi, "quasi_increasing")
        if case.r is not None:
            verdicts["phi q_r"] = check_shape(case.phi, "q_r", r=case.r)
    if case.b is not None:
        verdicts["b delta2"] = check_shape(case.b, "delta2")
        if case.r is not None and case.alpha is not None:
            verdicts["b b_over_power"] = check_shape(case.b, "b_over_power", r=case.r,
                                                     alpha=case.alpha)
    for key, ok in checks.items():
        out.rows.append(Row(case.name, "check-weights", "", "ok" if ok else "fail", key,
                            int(ok)))
    for key, verdict in verdicts.items():
        out.rows.append(Row(case.name, "check-weights", "", "ok" if verdict == "holds"
                            else "fail", key, int(verdict == "holds"), message=verdict))
    bad = (not rep.member) or any(v != "holds" for v in verdicts.values())
    if bad:
        out.errors += 1
    out.records.append({"case": case.name, "command": "check-weights",
                        "status": "fail" if bad else "ok", **checks, "shape": verdicts,
                        "diagnostics": _jsonable(rep.diagnostics)})


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _guard(out: Outcome, case: str, command: str, fn, param="") -> None:
    try:
        fn()
    except HardyLorentzError as exc:
        out.errors += 1
        out.rows.append(Row(case, command, type(exc).__name__, "error", param=param,
                            message=str(exc)))
        out.records.append({"case": case, "command": command, "param": param,
                            "status": "error", "error": type(exc).__name__,
                            "message": str(exc)})
    except Exception as exc:  # noqa: BLE001 - reported as an internal error row
        out.internal += 1
        out.rows.append(Row(case, command, "internal", "error", param=param,
                            message=f"{type(exc).__name__}: {exc}"))
        out.records.append({"case": case, "command": command, "param": param,
                            "status": "internal", "message": f"{type(exc).__name__}: {exc}"})


def run(cfg: RunConfig) -> Outcome:
    """Execute every case of ``cfg``; errors become rows, never exceptions."""
    out = Outcome()
    for case in cfg.cases:
        cmd = cfg.command
        if cmd in ("compute-k", "compute-mnorm"):
            _guard(out, case.name, cmd, lambda c=case: _compute(cfg, c, cmd, out))
        elif cmd == "verify":
            _guard(out, case.name, cmd, lambda c=case: _verify(cfg, c, out))
        elif cmd == "check-weights":
            _guard(out, case.name, cmd, lambda c=case: _check_weights(cfg, c, out))
        else:
            _sweep(cfg, case, out)
    return out


def _sweep_point(cfg: RunConfig, case: CaseConfig, val: float) -> Outcome:
    part = Outcome()
    swept = replace(case, **{cfg.sweep_param: val})
    _guard(part, case.name, cfg.sweep_target,
           lambda: _compute(cfg, swept, cfg.sweep_target, part, val), val)
    return part


def _sweep(cfg: RunConfig, case: CaseConfig, out: Outcome) -> None:
    # points run concurrently; merging in input order keeps the report deterministic
    workers = max(1, min(len(cfg.sweep_values), os.cpu_count() or 1))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda v: _sweep_point(cfg, case, v), cfg.sweep_values))
    for part in parts:
        out.merge(part)


def write_outputs(cfg: RunConfig, out: Outcome, prefix: str | None = None) -> tuple[Path, Path]:
    """Write ``<prefix>.csv`` (versioned schema header) and ``<prefix>.jsonl``."""
    base = Path(prefix or cfg.out)
    if base.parent and not base.parent.exists():
        base.parent.mkdir(parents=True, exist_ok=True)
    csv_path = base.with_name(base.name + ".csv")
    jsonl_path = base.with_name(base.name + ".jsonl")
    with open(csv_path, "w", newline="") as fh:
        fh.write(f"# schema: {SCHEMA} command={cfg.command}\n")
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for row in out.rows:
            writer.writerow([getattr(row, c) for c in COLUMNS])
    with open(jsonl_path, "w") as fh:
        for rec in out.records:
            fh.write(json.dumps(_jsonable(rec), default=str) + "\n")
    return csv_path, jsonl_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardylorentz",
        description="Compute and verify characterising constants of Hardy-type inequalities.")
    parser.add_argument("config", help="path to the INI config file")
    parser.add_argument("--grid-points", type=int, default=None,
                        help="override grid.n_points")
    parser.add_argument("--seed", type=int, default=None, help="override the search seed")
    parser.add_argument("--window", type=float, default=None,
                        help="override the verification window")
    parser.add_argument("--out", default=None, help="output prefix for .csv and .jsonl")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
        cfg = parse_config(text)
        over = {k: v for k, v in (("n_points", args.grid_points), ("seed", args.seed),
                                  ("window", args.window), ("out", args.out)) if v is not None}
        if over:
            cfg = replace(cfg, **over)
            _validate(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    out = run(cfg)
    csv_path, jsonl_path = write_outputs(cfg, out)
    for row in out.rows:
        if row.status in ("error", "fail"):
            print(f"{row.case}: {row.status} {row.key} {row.message}".rstrip(), file=sys.stderr)
    print(f"wrote {csv_path} and {jsonl_path}")
    return out.exit_code


if __name__ == "__main__":
    sys.exit(main())
