"""Volume map, bending-point inversion and the restricted and sharp profiles."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .density import f_lower, format_number, left_mass, right_mass, split_weights
from .kernel import DEFAULT_TOL, CurvatureParams, DomainError, Tolerance, invert_monotone, s_kappa

SCAN_POINTS = 64
SCAN_FLOOR = 1.0 / 1024


def volume_of_a(params: CurvatureParams, a: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Mass that ``h^a`` puts on ``[0, a]``."""
    if not 0 < a < params.D:
        raise DomainError(f"bending point {a} outside (0, {params.D})")
    p = params.N - 1
    wl = s_kappa(params.kappa, params.D - a) ** p
    wr = s_kappa(params.kappa, a) ** p
    il, ir = left_mass(params, a, tol), right_mass(params, a, tol)
    return il * wr / (il * wr + ir * wl)


def a_of_volume(params: CurvatureParams, v: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Bending point ``a_v`` whose model density puts mass ``v`` left of it."""
    if not 0 < v < 1:
        raise DomainError(f"volume {v} outside (0, 1)")
    eps = tol.root_tol
    lo, hi = eps, params.D - eps
    # v(a) is continuous and onto (0, 1); widen the bracket for extreme v.
    while volume_of_a(params, lo, tol) > v and lo > 1e-300:
        lo *= 1e-3
    while volume_of_a(params, hi, tol) < v and params.D - hi > 1e-15 * params.D:
        hi = params.D - (params.D - hi) * 1e-3
    return invert_monotone(lambda a: volume_of_a(params, a, tol), v, lo, hi, tol)


def A_fun(params: CurvatureParams, a: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """``int_0^a (s(D-x)/s(D-a))^(N-1) dx``, equal to ``v(a)/f(a)`` inside."""
    if not 0 <= a < params.D:
        raise DomainError(f"A is defined on [0, D), got {a}")
    if a == 0:
        return 0.0
    return split_weights(params, a, tol)[0]


@dataclass(frozen=True)
class ProfilePoint:
    v: float
    a_v: float
    value: float
    d_bar: Optional[float] = None


def profile_restricted(params: CurvatureParams, v: float, tol: Tolerance = DEFAULT_TOL) -> ProfilePoint:
    a = a_of_volume(params, v, tol)
    return ProfilePoint(v, a, f_lower(params, a, tol))


def _restricted_at(params: CurvatureParams, D: float, v: float, tol: Tolerance) -> ProfilePoint:
    return profile_restricted(replace(params, D=D), v, tol)


def _golden_min(fn, lo: float, hi: float, xtol: float):
    invphi = (math.sqrt(5) - 1) / 2
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = fn(c), fn(d)
    while hi - lo > xtol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = fn(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = fn(d)
    return (c, fc) if fc < fd else (d, fd)


def profile_sharp(params: CurvatureParams, v: float, tol: Tolerance = DEFAULT_TOL,
                  scan_points: int = SCAN_POINTS, floor: float = SCAN_FLOOR) -> ProfilePoint:
    """Profile over all densities with support diameter at most ``D``.

    For ``K <= 0`` this is the restricted profile. For ``K > 0`` the
    infimum over sub-diameters ``D'`` is located by a log-spaced scan on
    ``[floor*D, D]`` refined by golden-section search around the best
    sample. No uniqueness of the minimiser is claimed.
    """
    base = profile_restricted(params, v, tol)
    if params.K <= 0:
        return base
    D = params.D
    cache: dict[float, ProfilePoint] = {D: base}

    def at(d: float) -> float:
        if d not in cache:
            cache[d] = _restricted_at(params, d, v, tol)
        return cache[d].value

    scan = np.geomspace(floor * D, D, scan_points)
    scan[-1] = D
    values = [at(float(d)) for d in scan]
    best = int(np.argmin(values))
    lo = float(scan[max(best - 1, 0)])
    hi = float(scan[min(best + 1, len(scan) - 1)])
    d_opt, _ = _golden_min(at, lo, hi, tol.opt_tol * D)
    d_bar = min(cache, key=lambda d: cache[d].value)
    pt = cache[d_bar]
    if d_opt in cache and cache[d_opt].value <= pt.value:
        d_bar, pt = d_opt, cache[d_opt]
    return ProfilePoint(v, pt.a_v, pt.value, d_bar)


@dataclass(frozen=True)
class ProfileTable:
    params: CurvatureParams
    rows: tuple
    mode: str
    tol: Tolerance = DEFAULT_TOL

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["v", "a_v", "value", "d_bar"])
        for r in self.rows:
            writer.writerow([format_number(r.v), format_number(r.a_v), format_number(r.value),
                             "" if r.d_bar is None else format_number(r.d_bar)])
        return buf.getvalue()

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "mode": self.mode,
            "tolerances": self.tol.as_dict(),
            "rows": [{"v": r.v, "a_v": r.a_v, "value": r.value, "d_bar": r.d_bar} for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def profile_table(params: CurvatureParams, v_grid, mode: str = "restricted",
                  tol: Tolerance = DEFAULT_TOL) -> ProfileTable:
    v_grid = [float(v) for v in v_grid]
    if any(b <= a for a, b in zip(v_grid, v_grid[1:])):
        raise ValueError("v grid must be sorted and distinct")
    if mode == "restricted":
        rows = tuple(profile_restricted(params, v, tol) for v in v_grid)
    elif mode == "sharp":
        rows = tuple(profile_sharp(params, v, tol) for v in v_grid)
    else:
        raise ValueError(f"unknown profile mode {mode!r}")
    return ProfileTable(params, rows, mode, tol)
