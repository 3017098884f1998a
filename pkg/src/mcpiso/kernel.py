"""Shared numerical substrate: comparison coefficients, ``s_kappa``,
adaptive Gauss-Legendre quadrature and bracketed monotone inversion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq


class DomainError(ValueError):
    """An argument lies outside the domain of a formula."""


class BracketError(ValueError):
    """The target of an inversion is not bracketed."""


class ConvergenceError(ArithmeticError):
    """An iterative routine exhausted its budget."""


# Relative slack accepted when an argument sits on a closed threshold
# (e.g. D computed as pi*sqrt((N-1)/K) may overshoot by an ulp).
_EDGE_RTOL = 1e-12


@dataclass(frozen=True)
class CurvatureParams:
    """Curvature lower bound ``K``, dimension upper bound ``N`` and diameter ``D``."""

    K: float
    N: float
    D: float

    def __post_init__(self):
        for name in ("K", "N", "D"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not self.N > 1:
            raise DomainError(f"N must exceed 1, got {self.N}")
        if not self.D > 0:
            raise DomainError(f"D must be positive, got {self.D}")
        if self.K > 0 and self.D > self.max_diameter * (1 + _EDGE_RTOL):
            raise DomainError(
                f"D={self.D} exceeds pi*sqrt((N-1)/K)={self.max_diameter} for K>0"
            )

    @property
    def kappa(self) -> float:
        """The curvature ``K/(N-1)`` fed to ``s_kappa``."""
        return self.K / (self.N - 1)

    @property
    def max_diameter(self) -> float:
        if self.K > 0:
            return math.pi * math.sqrt((self.N - 1) / self.K)
        return math.inf

    @property
    def is_rigid(self) -> bool:
        """True for K > 0 with D on the maximal diameter."""
        return self.K > 0 and abs(self.D - self.max_diameter) <= _EDGE_RTOL * self.D

    def as_dict(self) -> dict:
        return {"K": self.K, "N": self.N, "D": self.D}


@dataclass(frozen=True)
class Tolerance:
    quad_tol: float = 1e-10
    root_tol: float = 1e-10
    opt_tol: float = 1e-8

    def __post_init__(self):
        for name in ("quad_tol", "root_tol", "opt_tol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive")

    def as_dict(self) -> dict:
        return {"quad_tol": self.quad_tol, "root_tol": self.root_tol, "opt_tol": self.opt_tol}


DEFAULT_TOL = Tolerance()


def s_kappa(kappa: float, theta):
    """Generalised sine: ``sin(sqrt(k) t)/sqrt(k)``, ``t`` or ``sinh(sqrt(-k) t)/sqrt(-k)``.

    Accepts scalars or arrays for ``theta``. For ``kappa > 0`` the argument
    may reach ``pi/sqrt(kappa)`` (where the value is 0) but not exceed it.
    """
    th = np.asarray(theta, dtype=float)
    if np.any(th < 0):
        raise DomainError("theta must be nonnegative")
    if kappa > 0:
        r = math.sqrt(kappa)
        limit = math.pi / r
        if np.any(th > limit * (1 + _EDGE_RTOL)):
            raise DomainError(f"theta must not exceed pi/sqrt(kappa)={limit}")
        out = np.sin(np.minimum(r * th, math.pi)) / r
        out = np.where(r * th >= math.pi * (1 - _EDGE_RTOL), 0.0, np.maximum(out, 0.0))
    elif kappa < 0:
        r = math.sqrt(-kappa)
        out = np.sinh(r * th) / r
    else:
        out = th.copy()
    return float(out) if out.ndim == 0 else out


def _comparison_diameter(K: float, Ncal: float) -> float:
    if K > 0 and math.isfinite(Ncal):
        r = math.sqrt(K / Ncal)
        # r underflows to 0 for subnormal K; the threshold is then unreachable
        return math.pi / r if r > 0 else math.inf
    return math.inf


def sigma_coeff(t: float, K: float, Ncal: float, theta: float) -> float:
    """Distortion coefficient sigma^{(t)}_{K,Ncal}(theta); ``math.inf`` past the conjugate distance."""
    if not 0 <= t <= 1:
        raise DomainError("t must lie in [0, 1]")
    if not Ncal > 0:
        raise DomainError("Ncal must be positive")
    if theta < 0:
        raise DomainError("theta must be nonnegative")
    if theta >= _comparison_diameter(K, Ncal):
        return math.inf
    if theta == 0 or K == 0 or math.isinf(Ncal):
        return float(t)
    if K > 0:
        r = math.sqrt(K / Ncal)
        num, den = math.sin(t * theta * r), math.sin(theta * r)
    else:
        r = math.sqrt(-K / Ncal)
        num, den = math.sinh(t * theta * r), math.sinh(theta * r)
    # theta*r can underflow; the limit as theta -> 0 is t
    return num / den if den > 0 else float(t)


def tau_coeff(t: float, K: float, N: float, theta: float) -> float:
    """Mixed coefficient ``t^(1/N) * sigma_{K,N-1}^(1-1/N)``, with the N = 1 convention."""
    if not 0 <= t <= 1:
        raise DomainError("t must lie in [0, 1]")
    if N < 1:
        raise DomainError("N must be at least 1")
    if N == 1:
        return float(t) if K <= 0 else math.inf
    sig = sigma_coeff(t, K, N - 1, theta)
    if math.isinf(sig):
        return math.inf
    return t ** (1.0 / N) * sig ** (1.0 - 1.0 / N)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


def _gl(f, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(np.dot(_GL_WEIGHTS, f(mid + half * _GL_NODES)))


def integrate(f: Callable, a: float, b: float, tol: Tolerance = DEFAULT_TOL,
              max_panels: int = 4000) -> float:
    """Adaptive composite Gauss-Legendre quadrature to absolute error ``tol.quad_tol``.

    ``f`` must accept a numpy array of abscissae. Panels are bisected until
    the 15-point rule and the sum over both halves agree; the error budget
    is split proportionally to panel length.
    """
    if b < a:
        raise DomainError("integrate requires a <= b")
    if a == b:
        return 0.0
    length = b - a
    total = 0.0
    whole = _gl(f, a, b)
    stack = [(a, b, whole)]
    panels = 0
    while stack:
        lo, hi, coarse = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = _gl(f, lo, mid), _gl(f, mid, hi)
        fine = left + right
        budget = tol.quad_tol * (hi - lo) / length
        if abs(fine - coarse) <= budget or (hi - lo) <= 1e-14 * length:
            total += fine
            continue
        panels += 1
        if panels > max_panels:
            raise ConvergenceError(
                f"quadrature on [{a}, {b}] did not reach {tol.quad_tol} within {max_panels} panels"
            )
        stack.append((lo, mid, left))
        stack.append((mid, hi, right))
    return total


def invert_monotone(g: Callable[[float], float], target: float, lo: float, hi: float,
                    tol: Tolerance = DEFAULT_TOL) -> float:
    """Solve ``g(x) = target`` for strictly increasing continuous ``g`` on ``[lo, hi]``."""
    g_lo, g_hi = g(lo), g(hi)
    if not g_lo <= target <= g_hi:
        raise BracketError(f"target {target} outside [{g_lo}, {g_hi}]")
    if g_lo == target:
        return lo
    if g_hi == target:
        return hi
    xtol = tol.root_tol
    while True:
        x = brentq(lambda s: g(s) - target, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps,
                   maxiter=200)
        # brentq bounds the error in x; the contract bounds the residual too
        if abs(g(x) - target) <= tol.root_tol or xtol < 1e-300:
            return float(x)
        xtol *= 1e-3
