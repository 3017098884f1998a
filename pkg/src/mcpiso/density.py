"""One-dimensional MCP(K,N) densities on ``[0, D]``.

Closed-form model densities glued at a bending point, tabulated candidate
densities on a uniform grid, and validators for the two-point MCP ratio
bounds and the CD concavity inequality.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import (
    DEFAULT_TOL,
    CurvatureParams,
    DomainError,
    Tolerance,
    integrate,
    s_kappa,
)

DEFAULT_CHECK_TOL = 1e-9
DEFAULT_GRID = 401
CD_T_STEPS = 16


class DensityMismatchError(ValueError):
    """A density and the curvature parameters live on different intervals."""


def _check_point(params: CurvatureParams, x: float, open_interval: bool = False) -> None:
    if open_interval:
        if not 0 < x < params.D:
            raise DomainError(f"point {x} outside (0, {params.D})")
    elif not 0 <= x <= params.D:
        raise DomainError(f"point {x} outside [0, {params.D}]")


def left_mass(params: CurvatureParams, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """``int_0^x s(D-y)^(N-1) dy``."""
    if x == 0:
        return 0.0
    k, p, D = params.kappa, params.N - 1, params.D
    return integrate(lambda y: s_kappa(k, np.clip(D - y, 0.0, D)) ** p, 0.0, x, tol)


def right_mass(params: CurvatureParams, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """``int_x^D s(y)^(N-1) dy``."""
    if x == params.D:
        return 0.0
    k, p = params.kappa, params.N - 1
    return integrate(lambda y: s_kappa(k, y) ** p, x, params.D, tol)


def f_lower(params: CurvatureParams, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Pointwise lower envelope of unit-mass MCP(K,N) densities on ``[0, D]``.

    Vanishes at both endpoints and is strictly positive inside.
    """
    _check_point(params, x)
    if x == 0 or x == params.D:
        return 0.0
    return split_weights(params, x, tol)[2]


def split_weights(params: CurvatureParams, x: float, tol: Tolerance = DEFAULT_TOL):
    """Return ``(A, B, f)`` at an interior point ``x``.

    ``A = int_0^x (s(D-y)/s(D-x))^(N-1) dy``, ``B = int_x^D (s(y)/s(x))^(N-1) dy``
    and ``f = 1/(A + B)``. The raw ``s^(N-1)`` integrals are bounded, so the
    quadrature tolerance stays meaningful near the endpoints.
    """
    p = params.N - 1
    wl = s_kappa(params.kappa, params.D - x) ** p
    wr = s_kappa(params.kappa, x) ** p
    il, ir = left_mass(params, x, tol), right_mass(params, x, tol)
    A = il / wl if wl > 0 else math.inf
    B = ir / wr if wr > 0 else math.inf
    denom = il * wr + ir * wl
    f = wl * wr / denom if denom > 0 else 0.0
    return A, B, f


@dataclass(frozen=True)
class ModelDensity:
    """Extremal density ``h^a``: two ``s_kappa^(N-1)`` branches glued at ``a``.

    Callable on scalars or arrays of points in ``[0, D]``.
    """

    params: CurvatureParams
    a: float
    tol: Tolerance = DEFAULT_TOL
    peak: float = field(init=False, repr=False)

    def __post_init__(self):
        _check_point(self.params, self.a, open_interval=True)
        object.__setattr__(self, "peak", f_lower(self.params, self.a, self.tol))

    @property
    def D(self) -> float:
        return self.params.D

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        if np.any((xs < 0) | (xs > self.D)):
            raise DomainError(f"evaluation point outside [0, {self.D}]")
        k, p, D, a = self.params.kappa, self.params.N - 1, self.D, self.a
        left = s_kappa(k, np.clip(D - xs, 0.0, D)) / s_kappa(k, D - a)
        right = s_kappa(k, xs) / s_kappa(k, a)
        out = self.peak * np.where(xs <= a, left, right) ** p
        return float(out) if out.ndim == 0 else out

    def integral(self, lo: float, hi: float) -> float:
        if not 0 <= lo <= hi <= self.D:
            raise DomainError(f"[{lo}, {hi}] not inside [0, {self.D}]")
        if lo < self.a < hi:
            return integrate(self, lo, self.a, self.tol) + integrate(self, self.a, hi, self.tol)
        return integrate(self, lo, hi, self.tol)

    def cell_masses(self, edges: np.ndarray) -> np.ndarray:
        """Mass of each cell ``[edges[i], edges[i+1]]``.

        Uses a 15-point Gauss rule per cell; the cell holding the bending
        point is split there, so every panel sees a smooth integrand.
        """
        edges = np.asarray(edges, dtype=float)
        nodes, weights = np.polynomial.legendre.leggauss(15)

        def panels(lo, hi):
            half = 0.5 * (hi - lo)
            pts = 0.5 * (lo + hi)[:, None] + half[:, None] * nodes[None, :]
            return half * (self(pts) @ weights)

        lo, hi = edges[:-1], edges[1:]
        cut = np.clip(self.a, lo, hi)
        return panels(lo, cut) + panels(cut, hi)

    def tabulate(self, M: int = DEFAULT_GRID) -> "TabulatedDensity":
        grid = np.linspace(0.0, self.D, M)
        return TabulatedDensity(self.D, self(grid))


@dataclass(frozen=True, eq=False)
class TabulatedDensity:
    """Nonnegative density sampled at ``M`` uniform points ``j*D/(M-1)``.

    Values between grid points are linearly interpolated. Unit mass is not
    enforced here because the MCP and CD conditions are scale invariant;
    see :meth:`mass` and :meth:`check_normalized`.
    """

    D: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 3:
            raise ValueError("a tabulated density needs at least 3 samples")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("density values must be finite and nonnegative")
        if not self.D > 0:
            raise ValueError("D must be positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def M(self) -> int:
        return self.values.size

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.D, self.M)

    @property
    def spacing(self) -> float:
        return self.D / (self.M - 1)

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        if np.any((xs < 0) | (xs > self.D)):
            raise DomainError(f"evaluation point outside [0, {self.D}]")
        out = np.interp(xs, self.grid, self.values)
        return float(out) if out.ndim == 0 else out

    def _cumulative(self, x: np.ndarray) -> np.ndarray:
        """Exact integral of the interpolant over ``[0, x]``."""
        dx = self.spacing
        node_cum = np.concatenate(([0.0], np.cumsum(0.5 * dx * (self.values[1:] + self.values[:-1]))))
        j = np.clip(np.floor(x / dx).astype(int), 0, self.M - 2)
        d = x - j * dx
        slope = (self.values[j + 1] - self.values[j]) / dx
        return node_cum[j] + self.values[j] * d + 0.5 * slope * d * d

    def integral(self, lo: float, hi: float) -> float:
        if not 0 <= lo <= hi <= self.D:
            raise DomainError(f"[{lo}, {hi}] not inside [0, {self.D}]")
        cum = self._cumulative(np.array([lo, hi]))
        return float(cum[1] - cum[0])

    def cell_masses(self, edges: np.ndarray) -> np.ndarray:
        return np.diff(self._cumulative(np.asarray(edges, dtype=float)))

    def mass(self) -> float:
        return self.integral(0.0, self.D)

    def check_normalized(self, tol: float) -> None:
        m = self.mass()
        if abs(m - 1.0) > tol:
            raise ValueError(f"density mass {m} differs from 1 by more than {tol}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "h"])
        for x, h in zip(self.grid, self.values):
            writer.writerow([format_number(x), format_number(h)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, rel_tol: float = 1e-9) -> "TabulatedDensity":
        """Parse the two-column ``x,h`` format; the grid must be uniform from 0 to D."""
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["x", "h"]:
            raise ValueError("missing 'x,h' header")
        try:
            data = np.array([[float(c) for c in row] for row in rows[1:] if row], dtype=float)
        except ValueError as exc:
            raise ValueError(f"non-numeric entry: {exc}") from None
        if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 3:
            raise ValueError("expected at least 3 rows of two columns")
        xs, hs = data[:, 0], data[:, 1]
        if np.any(np.diff(xs) <= 0):
            raise ValueError("x must be strictly increasing")
        D = xs[-1]
        expected = np.linspace(0.0, D, xs.size)
        if np.max(np.abs(xs - expected)) > rel_tol * max(D, 1.0) + 1e-11:
            raise ValueError("x must be a uniform grid starting at 0")
        return cls(float(D), hs)


def format_number(x: float) -> str:
    """Locale-independent rendering with 12 significant digits."""
    if x == 0:
        return "0"
    return f"{x:.12g}"


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    worst_violation: float
    witness: tuple
    checks_run: int
    check_tol: float
    condition: str

    def as_dict(self) -> dict:
        return {
            "condition": self.condition,
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "witness": list(self.witness),
            "checks_run": self.checks_run,
            "check_tol": self.check_tol,
        }


def _same_domain(h: TabulatedDensity, params: CurvatureParams) -> None:
    if not math.isclose(h.D, params.D, rel_tol=1e-9, abs_tol=1e-12):
        raise DensityMismatchError(f"density lives on [0, {h.D}] but D = {params.D}")


def validate_mcp(h: TabulatedDensity, params: CurvatureParams,
                 check_tol: float = DEFAULT_CHECK_TOL) -> ValidationReport:
    """Check the two-sided ratio bounds on every grid pair ``x0 < x1``.

    Margins are ``h(x1) - lower*h(x0)`` and ``upper*h(x0) - h(x1)``, divided
    by ``max(h(x0), h(x1))`` so they stay O(1) even where ``h`` nearly
    vanishes; the report carries the smallest one. Pairs whose bound has a
    vanishing denominator are skipped.
    """
    _same_domain(h, params)
    x = np.linspace(0.0, params.D, h.M)
    hv = h.values
    p = params.N - 1
    s_left = s_kappa(params.kappa, params.D - x)  # s(D - x)
    s_right = s_kappa(params.kappa, x)            # s(x)
    floor = 1e-13 * max(np.max(s_left), np.max(s_right))

    worst, witness, checks = math.inf, (), 0
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(h.M - 1):
            j = np.arange(i + 1, h.M)
            scale = np.maximum(hv[j], hv[i])
            scale = np.where(scale > 0, scale, 1.0)
            if s_left[i] > floor:
                low = (s_left[j] / s_left[i]) ** p
                m = (hv[j] - low * hv[i]) / scale
                checks += m.size
                k = int(np.argmin(m))
                if m[k] < worst:
                    worst, witness = float(m[k]), (float(x[i]), float(x[j[k]]), "lower")
            if s_right[i] > floor:
                up = (s_right[j] / s_right[i]) ** p
                m = (up * hv[i] - hv[j]) / scale
                checks += m.size
                k = int(np.argmin(m))
                if m[k] < worst:
                    worst, witness = float(m[k]), (float(x[i]), float(x[j[k]]), "upper")
    if checks == 0:
        worst = 0.0
    return ValidationReport(worst >= -check_tol, worst, witness, checks, check_tol, "mcp")


def _t_offsets(gap: int) -> np.ndarray:
    t = np.arange(1, CD_T_STEPS) / CD_T_STEPS
    k = np.unique(np.rint(t * gap).astype(int))
    return k[(k > 0) & (k < gap)]


def validate_cd(h: TabulatedDensity, params: CurvatureParams,
                check_tol: float = DEFAULT_CHECK_TOL) -> ValidationReport:
    """Check the CD(K,N) concavity inequality on ``h^(1/(N-1))``.

    For every grid pair ``x0 < x1`` the interpolation parameter runs over a
    17-point grid in ``[0, 1]`` snapped to the nearest grid node, so each
    test point is a sample rather than an interpolated value. The trivial
    ``t = 0, 1`` checks are omitted. Margins are normalised by the left side.
    """
    _same_domain(h, params)
    M = h.M
    x = np.linspace(0.0, params.D, M)
    g = h.values ** (1.0 / (params.N - 1))
    kappa = params.kappa
    limit = math.pi / math.sqrt(kappa) if kappa > 0 else math.inf

    worst, witness, checks = math.inf, (), 0
    for gap in range(2, M):
        offs = _t_offsets(gap)
        if offs.size == 0:
            continue
        i = np.arange(0, M - gap)
        theta = x[i + gap] - x[i]
        ok = theta < limit * (1 - 1e-12)
        if not np.any(ok):
            continue
        i, theta = i[ok], theta[ok]
        t = offs / gap
        lhs = g[i[:, None] + offs[None, :]]
        if kappa == 0:
            c0 = np.broadcast_to(1 - t, lhs.shape)
            c1 = np.broadcast_to(t, lhs.shape)
        else:
            denom = s_kappa(kappa, theta)[:, None]
            c0 = s_kappa(kappa, (1 - t)[None, :] * theta[:, None]) / denom
            c1 = s_kappa(kappa, t[None, :] * theta[:, None]) / denom
        rhs = c0 * g[i][:, None] + c1 * g[i + gap][:, None]
        scale = np.where(lhs > 0, lhs, 1.0)
        m = (lhs - rhs) / scale
        checks += m.size
        r, c = np.unravel_index(int(np.argmin(m)), m.shape)
        if m[r, c] < worst:
            worst = float(m[r, c])
            witness = (float(x[i[r]]), float(x[i[r] + gap]), float(t[c]))
    if checks == 0:
        worst = 0.0
    return ValidationReport(worst >= -check_tol, worst, witness, checks, check_tol, "cd")


def sup_bound(params: CurvatureParams, tol: Tolerance = DEFAULT_TOL) -> float:
    """Upper bound on the supremum of a unit-mass MCP density on ``[0, D]``."""
    N, D = params.N, params.D
    if params.K >= 0:
        return N / D
    kappa = params.kappa
    denom = s_kappa(kappa, D)
    mean = integrate(lambda t: (s_kappa(kappa, t * D) / denom) ** (N - 1), 0.0, 1.0, tol)
    return 1.0 / (D * mean)


def random_mcp_density(params: CurvatureParams, seed: int, k: int = 3,
                       M: int = DEFAULT_GRID, tol: Tolerance = DEFAULT_TOL) -> TabulatedDensity:
    """Convex combination of ``k`` tabulated model densities with random bending points.

    The ratio bounds are linear in ``h`` with coefficients independent of
    ``h``, so the combination stays an MCP(K,N) density.
    """
    if k < 1 or M < 3:
        raise ValueError("need k >= 1 and M >= 3")
    rng = np.random.default_rng(seed)
    bends = rng.uniform(0.0, params.D, size=k)
    bends = np.where(bends == 0.0, 0.5 * params.D, bends)
    weights = rng.dirichlet(np.ones(k))
    return mixture_density(params, bends, weights, M, tol)


def mixture_density(params: CurvatureParams, bends, weights, M: int = DEFAULT_GRID,
                    tol: Tolerance = DEFAULT_TOL) -> TabulatedDensity:
    """Tabulate ``sum_i w_i h^{a_i}`` with weights normalised to sum to 1."""
    bends = np.asarray(bends, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if bends.shape != weights.shape or np.any(weights < 0) or weights.sum() <= 0:
        raise ValueError("bends and nonnegative weights must match in shape")
    weights = weights / weights.sum()
    grid = np.linspace(0.0, params.D, M)
    values = np.zeros(M)
    for a, w in zip(bends, weights):
        values += w * ModelDensity(params, float(a), tol)(grid)
    return TabulatedDensity(params.D, values)


def lower_bound_contacts(h: TabulatedDensity, params: CurvatureParams, atol: float = 1e-9,
                         tol: Tolerance = DEFAULT_TOL) -> list[float]:
    """Interior grid points where ``h`` meets the lower envelope within ``atol``."""
    _same_domain(h, params)
    grid = h.grid
    return [float(y) for y, hv in zip(grid[1:-1], h.values[1:-1])
            if abs(hv - f_lower(params, float(y), tol)) <= atol]
