"""Command-line interface.

Usage:
    mcpiso profile  --K 0 --N 2 --D 1 --v 0.5 [--sharp]
    mcpiso density  --K 0 --N 2 --D 1 --a 0.5 --grid 401
    mcpiso validate --K 0 --N 2 density.csv --mode mcp
    mcpiso oracle   --K 0 --N 2 --D 1 --v 0.5 --trials 20 --grid 512
    mcpiso compare  --K 0 --N 2 --D 1 --v-count 9

Flags override values from ``--config`` (a JSON object keyed by flag name),
which in turn falls back to the file named by ``$ISO_PROFILE_CONFIG``.

Exit codes: 0 success, 1 numerical failure, 2 invalid input, 3 a check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from .density import (
    DEFAULT_CHECK_TOL,
    DEFAULT_GRID,
    DensityMismatchError,
    ModelDensity,
    TabulatedDensity,
    format_number,
    validate_cd,
    validate_mcp,
)
from .kernel import BracketError, ConvergenceError, CurvatureParams, DomainError, Tolerance
from .oracle import DEFAULT_GRID_TOL, InfeasibleVolumeError, verify_sharpness
from .profile import profile_restricted, profile_table

log = logging.getLogger("mcpiso")

CONFIG_ENV = "ISO_PROFILE_CONFIG"

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT, EXIT_CHECK = 0, 1, 2, 3

DEFAULTS = {
    "K": None, "N": None, "D": None,
    "v": None, "v_count": None,
    "a": None,
    "grid": None,
    "trials": 20,
    "seed": 0,
    "sharp": False,
    "mode": "mcp",
    "out": None,
    "format": "csv",
    "vol_tol": None,
    "max_intervals": 2,
    "components": 3,
    "check_tol": DEFAULT_CHECK_TOL,
    "grid_tol": DEFAULT_GRID_TOL,
    "quad_tol": 1e-10,
    "root_tol": 1e-10,
    "opt_tol": 1e-8,
}


class UsageError(Exception):
    """Invalid configuration; maps to exit status 2."""


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--K", type=float, help="curvature lower bound")
    p.add_argument("--N", type=float, help="dimension upper bound (> 1)")
    p.add_argument("--D", type=float, help="diameter")
    p.add_argument("--config", help="JSON config file; flags take precedence")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--quad-tol", dest="quad_tol", type=float)
    p.add_argument("--root-tol", dest="root_tol", type=float)
    p.add_argument("--opt-tol", dest="opt_tol", type=float)
    p.add_argument("--verbose", action="store_true")


def _add_vgrid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--v", action="append",
                   help="volume fraction; repeat or give a comma list ('' for none)")
    p.add_argument("--v-count", dest="v_count", type=int,
                   help="use the volumes i/(n+1), i = 1..n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcpiso", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", allow_abbrev=False, help="tabulate the restricted or sharp profile")
    _add_common(p)
    _add_vgrid(p)
    p.add_argument("--sharp", action="store_true", default=None,
                   help="minimise over sub-diameters when K > 0")

    p = sub.add_parser("density", allow_abbrev=False, help="export a tabulated model density")
    _add_common(p)
    p.add_argument("--a", type=float, help="bending point in (0, D)")
    p.add_argument("--grid", type=int, help=f"number of samples (default {DEFAULT_GRID})")

    p = sub.add_parser("validate", allow_abbrev=False, help="check a density CSV against MCP or CD")
    _add_common(p)
    p.add_argument("input", help="density CSV with header x,h")
    p.add_argument("--mode", choices=["mcp", "cd"])
    p.add_argument("--check-tol", dest="check_tol", type=float)

    p = sub.add_parser("oracle", allow_abbrev=False, help="brute-force sharpness check at one volume")
    _add_common(p)
    p.add_argument("--v", type=float, help="volume fraction in (0, 1)")
    p.add_argument("--grid", type=int, help="number of grid cells (default 512)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--vol-tol", dest="vol_tol", type=float)
    p.add_argument("--max-intervals", dest="max_intervals", type=int)
    p.add_argument("--components", type=int, help="model densities per random mixture")
    p.add_argument("--grid-tol", dest="grid_tol", type=float)

    p = sub.add_parser("compare", allow_abbrev=False, help="profile alongside the CD verdict of h^{a_v}")
    _add_common(p)
    _add_vgrid(p)
    p.add_argument("--grid", type=int, help=f"density samples for the CD check (default {DEFAULT_GRID})")
    p.add_argument("--check-tol", dest="check_tol", type=float)
    return parser


def _load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return {k.replace("-", "_"): val for k, val in data.items()}


def effective_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    cfg.update(_load_config(args.config))
    for key, val in vars(args).items():
        if key in ("config", "command", "verbose"):
            continue
        if val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    return cfg


def _params(cfg: dict) -> CurvatureParams:
    missing = [k for k in ("K", "N", "D") if cfg.get(k) is None]
    if missing:
        raise UsageError(f"missing parameter(s): {', '.join(missing)}")
    try:
        return CurvatureParams(float(cfg["K"]), float(cfg["N"]), float(cfg["D"]))
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _tolerance(cfg: dict) -> Tolerance:
    try:
        return Tolerance(float(cfg["quad_tol"]), float(cfg["root_tol"]), float(cfg["opt_tol"]))
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _v_grid(cfg: dict) -> list:
    if cfg.get("v") is not None:
        raw = cfg["v"] if isinstance(cfg["v"], list) else [cfg["v"]]
        vals = []
        try:
            for item in raw:
                if isinstance(item, str):
                    vals.extend(float(s) for s in item.split(",") if s.strip())
                else:
                    vals.append(float(item))
        except ValueError as exc:
            raise UsageError(f"bad volume list: {exc}") from None
    elif cfg.get("v_count") is not None:
        n = int(cfg["v_count"])
        if n < 0:
            raise UsageError("--v-count must be nonnegative")
        vals = [i / (n + 1) for i in range(1, n + 1)]
    else:
        raise UsageError("give --v or --v-count")
    vals = sorted(set(vals))
    if any(not 0 < v < 1 for v in vals):
        raise UsageError("volumes must lie in (0, 1)")
    return vals


def _write(cfg: dict, text: str) -> None:
    """Write atomically: temp file in the target directory, then rename."""
    out = cfg.get("out")
    if not out:
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _config_echo(cfg: dict) -> dict:
    return {k: v for k, v in sorted(cfg.items()) if k != "out"}


def cmd_profile(cfg: dict) -> int:
    params, tol = _params(cfg), _tolerance(cfg)
    mode = "sharp" if cfg.get("sharp") else "restricted"
    table = profile_table(params, _v_grid(cfg), mode, tol)
    if cfg["format"] == "json":
        data = table.as_dict()
        data["config"] = _config_echo(cfg)
        _write(cfg, json.dumps(data, indent=2, sort_keys=True) + "\n")
    else:
        _write(cfg, table.to_csv())
    return EXIT_OK


def cmd_density(cfg: dict) -> int:
    params, tol = _params(cfg), _tolerance(cfg)
    if cfg.get("a") is None:
        raise UsageError("--a is required")
    a = float(cfg["a"])
    if not 0 < a < params.D:
        raise UsageError(f"bending point {a} outside (0, {params.D})")
    grid = int(cfg.get("grid") or DEFAULT_GRID)
    if grid < 3:
        raise UsageError("--grid must be at least 3")
    _write(cfg, ModelDensity(params, a, tol).tabulate(grid).to_csv())
    return EXIT_OK


def cmd_validate(cfg: dict) -> int:
    try:
        text = Path(cfg["input"]).read_text()
        h = TabulatedDensity.from_csv(text)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read density {cfg['input']}: {exc}") from None
    if cfg.get("D") is None:
        cfg["D"] = h.D
    params = _params(cfg)
    check = validate_cd if cfg["mode"] == "cd" else validate_mcp
    try:
        report = check(h, params, float(cfg["check_tol"]))
    except DensityMismatchError as exc:
        raise UsageError(str(exc)) from None
    data = report.as_dict()
    data["params"] = params.as_dict()
    data["config"] = _config_echo(cfg)
    _write(cfg, json.dumps(data, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_oracle(cfg: dict) -> int:
    params, tol = _params(cfg), _tolerance(cfg)
    if cfg.get("v") is None:
        raise UsageError("--v is required")
    v = float(cfg["v"][0] if isinstance(cfg["v"], list) else cfg["v"])
    if not 0 < v < 1:
        raise UsageError("volume must lie in (0, 1)")
    grid = int(cfg.get("grid") or 512)
    if grid < 16 or int(cfg["max_intervals"]) < 1 or int(cfg["trials"]) < 0:
        raise UsageError("need grid >= 16, max-intervals >= 1, trials >= 0")
    vol_tol = None if cfg.get("vol_tol") is None else float(cfg["vol_tol"])
    report = verify_sharpness(
        params, v, trials=int(cfg["trials"]), seed=int(cfg["seed"]), grid=grid,
        max_intervals=int(cfg["max_intervals"]), components=int(cfg["components"]),
        grid_tol=float(cfg["grid_tol"]), vol_tol=vol_tol, tol=tol,
    )
    data = report.as_dict()
    data["config"] = _config_echo(cfg)
    _write(cfg, json.dumps(data, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_compare(cfg: dict) -> int:
    params, tol = _params(cfg), _tolerance(cfg)
    grid = int(cfg.get("grid") or DEFAULT_GRID)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["v", "a_v", "value", "cd_fails", "cd_worst_margin"])
    for v in _v_grid(cfg):
        pt = profile_restricted(params, v, tol)
        h = ModelDensity(params, pt.a_v, tol).tabulate(grid)
        rep = validate_cd(h, params, float(cfg["check_tol"]))
        writer.writerow([format_number(v), format_number(pt.a_v), format_number(pt.value),
                         "false" if rep.passed else "true", format_number(rep.worst_violation)])
    _write(cfg, buf.getvalue())
    return EXIT_OK


COMMANDS = {
    "profile": cmd_profile,
    "density": cmd_density,
    "validate": cmd_validate,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = effective_config(args)
        return COMMANDS[args.command](cfg)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except DomainError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INPUT
    except (InfeasibleVolumeError, ConvergenceError, BracketError, ArithmeticError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
