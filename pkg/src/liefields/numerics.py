"""Shared numerical kernels: adaptive Simpson quadrature, cumulative integral
tables with cubic Hermite interpolation, and finite-difference stencils.

Everything here is deterministic: fixed node layouts, no randomized pivoting,
pure-Python float arithmetic in the scalar hot paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "QuadratureError",
    "adaptive_simpson",
    "CumulativeTable",
    "hermite_interp",
    "stencil_d1",
    "stencil_d2",
]


class QuadratureError(ArithmeticError):
    """Adaptive refinement failed to reach the requested tolerance."""


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 48,
) -> float:
    """Integrate f over [a, b] by adaptive Simpson with Richardson correction.

    `tol` is an absolute tolerance on the whole interval.  Raises
    QuadratureError if the recursion exceeds `max_depth` anywhere.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return sign * _simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth) -> float:
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureError(
            f"adaptive Simpson did not converge on [{a!r}, {b!r}] (|delta|={abs(delta):.3e})"
        )
    half = 0.5 * tol
    return _simpson_rec(f, a, m, fa, flm, fm, left, half, depth - 1) + _simpson_rec(
        f, m, b, fm, frm, fb, right, half, depth - 1
    )


@dataclass
class CumulativeTable:
    """Cumulative integral of a smooth integrand on a uniform grid.

    Stores node values of F(t) = int_{t0}^{t} f and the exact node derivatives
    F'(t_i) = f(t_i); evaluation is piecewise cubic Hermite, which keeps the
    interpolation error at O(h^4) and the interpolant C^1 across nodes.
    Lookups slightly outside the grid extrapolate with the boundary cubic.
    """

    t0: float
    h: float
    values: np.ndarray
    derivs: np.ndarray

    @classmethod
    def build(cls, f: Callable[[float], float], t0: float, t1: float, n: int = 2048) -> "CumulativeTable":
        """Tabulate int_{t0}^{t} f on n uniform nodes spanning [t0, t1].

        Each subinterval is integrated with a single midpoint Simpson rule,
        giving O(h^5) local accuracy.
        """
        if n < 2:
            raise ValueError("need at least two nodes")
        if not t1 > t0:
            raise ValueError("t1 must exceed t0")
        h = (t1 - t0) / (n - 1)
        ts = [t0 + i * h for i in range(n)]
        fs = [f(t) for t in ts]
        vals = [0.0] * n
        acc = 0.0
        for i in range(n - 1):
            fmid = f(ts[i] + 0.5 * h)
            acc += h / 6.0 * (fs[i] + 4.0 * fmid + fs[i + 1])
            vals[i + 1] = acc
        return cls(t0=t0, h=h, values=np.asarray(vals), derivs=np.asarray(fs))

    @property
    def t1(self) -> float:
        return self.t0 + self.h * (len(self.values) - 1)

    def _segment(self, t: float) -> int:
        i = int((t - self.t0) / self.h)
        return min(max(i, 0), len(self.values) - 2)

    def __call__(self, t: float) -> float:
        i = self._segment(t)
        s = (t - (self.t0 + i * self.h)) / self.h
        v0, v1 = self.values[i], self.values[i + 1]
        d0, d1 = self.derivs[i] * self.h, self.derivs[i + 1] * self.h
        s2 = s * s
        s3 = s2 * s
        return (
            (2.0 * s3 - 3.0 * s2 + 1.0) * v0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * v1
            + (s3 - s2) * d1
        )

    def invert_monotone(self, target: float, tol: float = 1e-12) -> float:
        """Solve F(t) = target for strictly monotone increasing F by bracketed
        bisection on the interpolant; raises ValueError outside the table range."""
        vals = self.values
        if target < vals[0] - 1e-12 or target > vals[-1] + 1e-12:
            raise ValueError(f"target {target!r} outside table range [{vals[0]!r}, {vals[-1]!r}]")
        j = int(np.searchsorted(vals, target))
        lo = self.t0 + self.h * max(j - 1, 0)
        hi = self.t0 + self.h * min(j, len(vals) - 1)
        if hi <= lo:
            return lo
        flo = self(lo) - target
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fmid = self(mid) - target
            if fmid == 0.0 or (hi - lo) < tol:
                return mid
            if (flo < 0.0) == (fmid < 0.0):
                lo, flo = mid, fmid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def hermite_interp(
    xs: Sequence[float],
    ys: Sequence[float],
    dys: Sequence[float],
    xq: np.ndarray,
) -> np.ndarray:
    """Piecewise cubic Hermite interpolation on strictly increasing nodes.

    `dys` holds the exact derivatives dy/dx at the nodes; query points must
    lie within [xs[0], xs[-1]].
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    dys = np.asarray(dys, dtype=float)
    idx = np.clip(np.searchsorted(xs, xq, side="right") - 1, 0, len(xs) - 2)
    h = xs[idx + 1] - xs[idx]
    s = (xq - xs[idx]) / h
    s2 = s * s
    s3 = s2 * s
    return (
        (2.0 * s3 - 3.0 * s2 + 1.0) * ys[idx]
        + (s3 - 2.0 * s2 + s) * h * dys[idx]
        + (-2.0 * s3 + 3.0 * s2) * ys[idx + 1]
        + (s3 - s2) * h * dys[idx + 1]
    )


def stencil_d1(values: np.ndarray, h: float) -> np.ndarray:
    """5-point first derivative on a uniform grid; valid on interior [2, n-3]."""
    v = np.asarray(values)
    out = np.full_like(v, np.nan, dtype=float)
    out[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    return out


def stencil_d2(values: np.ndarray, h: float) -> np.ndarray:
    """5-point second derivative on a uniform grid; valid on interior [2, n-3]."""
    v = np.asarray(values)
    out = np.full_like(v, np.nan, dtype=float)
    out[2:-2] = (-v[:-4] + 16.0 * v[1:-3] - 30.0 * v[2:-2] + 16.0 * v[3:-1] - v[4:]) / (
        12.0 * h * h
    )
    return out
