"""Command-line front end.

Subcommands: sweep, solve, reduced, perturb, dirac-check, verify.
Exit status 0 on success, 1 on usage errors, 2 when a verification fails.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import output
from .dirac import regularity_report
from .errors import InvalidParameterError
from .kernels import Grid
from .pencil import SweepRow, reduced_spectrum, solve_pencil_report, sweep, x0_grid
from .perturbation import DEFAULT_DELTAS, local_slope_check, solvability_e1
from .verify import format_table, run_suite

COMMANDS = ("sweep", "solve", "reduced", "perturb", "dirac-check", "verify")
EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2

_DEFAULT_X0 = {
    "sweep": "0:4:0.05",
    "solve": "0.5",
    "reduced": "0:3:0.05",
    "dirac-check": "0.1:1.5:0.1",
}
_DEFAULTS = {"l": "0,1,2,3", "L": 100.0, "n": 8000, "out": ".", "svg": False,
             "jobs": os.cpu_count() or 1, "delta": ",".join(str(d) for d in DEFAULT_DELTAS)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    x0_min: float = 0.0
    x0_max: float = 4.0
    x0_step: float = 0.05
    l_list: list[int] = field(default_factory=lambda: [0, 1, 2, 3])
    L: float = 100.0
    n: int = 8000
    output_dir: Path = Path(".")
    emit_svg: bool = False
    jobs: int = 1
    deltas: list[float] = field(default_factory=lambda: list(DEFAULT_DELTAS))

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not self.x0_step > 0:
            raise UsageError("x0 step must be positive")
        if self.x0_max < self.x0_min:
            raise UsageError("x0 range is empty")
        if not self.n >= 100:
            raise UsageError("n must be at least 100")
        if not self.L > 10:
            raise UsageError("L must exceed 10")
        if not self.l_list or any(l < 0 for l in self.l_list):
            raise UsageError("l values must be non-negative integers")
        if self.jobs < 1:
            raise UsageError("jobs must be positive")

    @property
    def grid(self) -> Grid:
        return Grid(self.L, self.n)

    @property
    def x0_values(self) -> np.ndarray:
        return x0_grid(self.x0_min, self.x0_max, self.x0_step)


def parse_x0(text: str) -> tuple[float, float, float]:
    """'a:b:step' or a single value 'a' (step 1)."""
    parts = str(text).split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"cannot parse x0 range {text!r}") from exc
    if len(vals) == 1:
        return vals[0], vals[0], 1.0
    if len(vals) == 3 and all(math.isfinite(v) for v in vals):
        return vals[0], vals[1], vals[2]
    raise UsageError(f"x0 range must be 'start:stop:step' or a number, got {text!r}")


def parse_int_list(text) -> list[int]:
    try:
        return [int(p) for p in str(text).split(",") if p.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse integer list {text!r}") from exc


def parse_float_list(text) -> list[float]:
    try:
        return [float(p) for p in str(text).split(",") if p.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc


def read_config_file(path) -> dict[str, str]:
    """key=value lines; blank lines and '#' comments are ignored."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for k, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{k}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in ("l", "x0", "L", "n", "out", "svg", "jobs", "delta"):
            raise UsageError(f"{path}:{k}: unknown key {key!r}")
        out[key] = value
    return out


def _truthy(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off", ""):
        return False
    raise UsageError(f"expected a boolean, got {v!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="alpha2dynamo", description="Spherical alpha^2-dynamo spectral solver.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="key=value file; explicit flags take precedence")
        s.add_argument("--L", type=float, default=None, help="box length (default 100)")
        s.add_argument("--n", type=int, default=None, help="interior nodes (default 8000)")
        if name == "verify":
            continue
        s.add_argument("--out", default=None, help="output directory (default .)")
        if name == "perturb":
            s.add_argument("--delta", default=None, help="comma-separated offsets from x_J")
            continue
        s.add_argument("--l", default=None, help="comma-separated angular orders")
        s.add_argument("--x0", default=None, help="start:stop:step or a single value")
        if name in ("sweep", "reduced"):
            s.add_argument("--svg", action="store_true", default=None, help="also write SVG plots")
        if name == "sweep":
            s.add_argument("--jobs", type=int, default=None, help="worker processes")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    merged = dict(_DEFAULTS)
    merged["x0"] = _DEFAULT_X0.get(ns.command, "0:4:0.05")
    if ns.command in ("solve", "dirac-check"):
        merged["l"] = "0"
    if getattr(ns, "config", None):
        merged.update(read_config_file(ns.config))
    for key in ("l", "x0", "L", "n", "out", "svg", "jobs", "delta"):
        v = getattr(ns, key, None)
        if v is not None:
            merged[key] = v
    lo, hi, step = parse_x0(merged["x0"])
    try:
        return RunConfig(
            command=ns.command, x0_min=lo, x0_max=hi, x0_step=step,
            l_list=parse_int_list(merged["l"]), L=float(merged["L"]), n=int(merged["n"]),
            output_dir=Path(merged["out"]), emit_svg=_truthy(merged["svg"]),
            jobs=int(merged["jobs"]), deltas=parse_float_list(merged["delta"]))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


# --------------------------------------------------------------------------
# commands


def _series(rows, l_list, value):
    series = {}
    for l in l_list:
        sub = [r for r in rows if r[0] == l]
        series[f"l={l}"] = ([r[1] for r in sub], [value(r) for r in sub])
    return series


def _cmd_sweep(cfg: RunConfig) -> int:
    rows = sweep(cfg.x0_values, cfg.l_list, cfg.grid, jobs=cfg.jobs)
    table = output.sweep_rows(rows)
    output.write_text(cfg.output_dir / "sweep.csv", output.render_csv(output.SWEEP_HEADER, table))
    if cfg.emit_svg:
        ls = sorted(set(cfg.l_list))
        output.write_text(cfg.output_dir / "sweep_lambda.svg", output.render_svg(
            _series(table, ls, lambda r: r[2]), "Bound-state growth rate", "x0", "lambda"))
        output.write_text(cfg.output_dir / "sweep_epsilon.svg", output.render_svg(
            _series(table, ls, lambda r: r[3]), "Pencil parameter", "x0", "epsilon"))
    found = sum(r.solution is not None for r in rows)
    print(f"sweep: {len(rows)} cells, {found} bound states -> {cfg.output_dir / 'sweep.csv'}")
    return EXIT_OK


def _cmd_solve(cfg: RunConfig) -> int:
    if len(cfg.l_list) != 1 or cfg.x0_min != cfg.x0_max:
        raise UsageError("solve takes a single --l and a single --x0")
    l, x0 = cfg.l_list[0], cfg.x0_min
    rep = solve_pencil_report(x0, l, cfg.grid)
    table = output.sweep_rows([SweepRow(l, x0, rep.solution, rep.reason)])
    text = output.render_csv(output.SWEEP_HEADER, table)
    sys.stdout.write(text)
    if rep.solution is None:
        print(f"# no bound state: {rep.reason}")
    output.write_text(cfg.output_dir / "solve.csv", text)
    return EXIT_OK


def _cmd_reduced(cfg: RunConfig) -> int:
    g = cfg.grid
    table = []
    for l in sorted(set(cfg.l_list)):
        for x0 in cfg.x0_values:
            lam = reduced_spectrum(float(x0), l, g, k=1)
            table.append((l, float(x0), lam[0] if lam else None))
    output.write_text(cfg.output_dir / "reduced.csv",
                      output.render_csv(output.REDUCED_HEADER, table))
    if cfg.emit_svg:
        output.write_text(cfg.output_dir / "reduced_lambda.svg", output.render_svg(
            _series(table, sorted(set(cfg.l_list)), lambda r: r[2]),
            "Reduced system growth rate", "x0", "lambda"))
    print(f"reduced: {len(table)} cells -> {cfg.output_dir / 'reduced.csv'}")
    return EXIT_OK


def _cmd_perturb(cfg: RunConfig) -> int:
    e1 = solvability_e1("+")
    tab = local_slope_check(cfg.deltas, cfg.grid, e1=e1)
    rows = [(r.delta, r.epsilon_pencil, r.epsilon_linear, r.deviation) for r in tab.rows]
    output.write_text(cfg.output_dir / "perturb.csv", output.render_csv(output.PERTURB_HEADER, rows))
    ok = abs(abs(e1) - 0.5) < 1e-6 and tab.quadratic and tab.complete
    print(f"e1 = {e1:.12f}  c_fit = {tab.c_fit:.6f}  e2_fit = {tab.e2_fit:.6f}  "
          f"quadratic = {tab.quadratic}  -> {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


def _cmd_dirac(cfg: RunConfig) -> int:
    g = cfg.grid
    table, ok = [], True
    for l in sorted(set(cfg.l_list)):
        for r in regularity_report(cfg.x0_values, l, g):
            table.append((r.l, r.x0, r.nodes, r.regular, r.epsilon, r.dirac_residual))
            if r.dirac_residual is not None and not r.dirac_residual < 1e-6:
                ok = False
            res = "" if r.dirac_residual is None else f" residual={r.dirac_residual:.3e}"
            note = f" ({r.note})" if r.note else ""
            print(f"l={r.l} x0={r.x0:.4f} nodes={r.nodes} regular={r.regular}{res}{note}")
    output.write_text(cfg.output_dir / "dirac.csv", output.render_csv(output.DIRAC_HEADER, table))
    return EXIT_OK if ok else EXIT_VERIFY


def _cmd_verify(cfg: RunConfig) -> int:
    checks = run_suite(cfg.grid)
    print(format_table(checks))
    bad = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(bad)}/{len(checks)} checks passed")
    return EXIT_OK if not bad else EXIT_VERIFY


_HANDLERS = {"sweep": _cmd_sweep, "solve": _cmd_solve, "reduced": _cmd_reduced,
             "perturb": _cmd_perturb, "dirac-check": _cmd_dirac, "verify": _cmd_verify}


def run(cfg: RunConfig) -> int:
    return _HANDLERS[cfg.command](cfg)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return run(cfg)
    except (UsageError, InvalidParameterError) as exc:
        print(f"alpha2dynamo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
