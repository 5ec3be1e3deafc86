"""Symmetry parameter bundles, the point-symmetry generator, and canonical
group coordinates for the four admissible cases.

Case tags:
  A : nonvanishing squeeze profile rho(t); generator mixes time
      reparameterization, rotation, translation and scaling.
  B : pure rotation (constant nonzero Omega, normalized to 1) plus
      time-dependent translation; canonical coordinates are translated
      polar coordinates with the azimuth as new time.
  C : pure time-dependent translation with a2 != 0.
  D : scaling (k != 0) plus rotation and translation; canonical time is the
      logarithmic radius about a moving center.

In canonical coordinates the generator acts as d/d(tbar): G xbar = 0,
G ybar = 0, G tbar = 1; `canonical_defining_residual` measures exactly that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .expr import Expression, constant, derive, parse
from .numerics import CumulativeTable, adaptive_simpson

__all__ = [
    "GeneratorValue",
    "SymmetryParams",
    "CanonicalMap",
    "SingularPointError",
    "generator_eval",
    "derived_translations",
    "quad",
    "canonical_defining_residual",
    "FD_SCALE",
]

CASES = ("A", "B", "C", "D")
FD_SCALE = 1e-5
_SINGULAR_RADIUS = 1e-12
_VALIDATION_SAMPLES = 257


class SingularPointError(ValueError):
    """Evaluation requested at an excluded center of a case B or D map."""


def _fd_step(c: float) -> float:
    return FD_SCALE * (1.0 + abs(c))


def _as_time_expr(value: "Expression | str | float | None", default: float = 0.0) -> Expression:
    if value is None:
        return constant(default, ("t",))
    if isinstance(value, Expression):
        if value.varnames != ("t",):
            raise ValueError("time profiles must be expressions in t")
        return value
    if isinstance(value, str):
        return parse(value, ("t",))
    return constant(float(value), ("t",))


class TimeFn:
    """A scalar function of time with compiled symbolic derivatives."""

    __slots__ = ("exprs", "fns")

    def __init__(self, e: Expression, orders: int):
        exprs = [e]
        for _ in range(orders):
            exprs.append(derive(exprs[-1], "t"))
        self.exprs = exprs
        self.fns = [x.compiled() for x in exprs]

    def __call__(self, t: float, order: int = 0) -> float:
        return self.fns[order](t)

    @property
    def expr(self) -> Expression:
        return self.exprs[0]


@dataclass(frozen=True)
class GeneratorValue:
    tau: float
    eta1: float
    eta2: float


class SymmetryParams:
    """One case-tagged parameter bundle fully determining the generator.

    Immutable after construction; all derived profiles (translations for
    case A, rotation/scaling centers for cases B and D) are built eagerly
    with symbolic derivatives, so instances are safe to share across workers.
    """

    def __init__(
        self,
        case: str,
        *,
        k: float = 0.0,
        rho: Expression | str | float | None = None,
        omega: Expression | str | float | None = None,
        alpha1: Expression | str | float | None = None,
        alpha2: Expression | str | float | None = None,
        a1: Expression | str | float | None = None,
        a2: Expression | str | float | None = None,
        interval: tuple[float, float] = (0.0, 1.0),
    ):
        if case not in CASES:
            raise ValueError(f"unknown case tag {case!r}")
        self.case = case
        self.k = float(k)
        self.t0, self.t1 = float(interval[0]), float(interval[1])
        if not self.t1 > self.t0:
            raise ValueError("working interval must have t1 > t0")
        self.pad = 0.01 * (self.t1 - self.t0)

        self.omega = TimeFn(_as_time_expr(omega, 0.0), 2)

        if case == "A":
            if rho is None:
                raise ValueError("case A requires rho")
            self.rho = TimeFn(_as_time_expr(rho), 3)
            self.alpha1 = TimeFn(_as_time_expr(alpha1, 0.0), 3)
            self.alpha2 = TimeFn(_as_time_expr(alpha2, 0.0), 3)
            if a1 is not None or a2 is not None:
                raise ValueError("case A is parameterized by alpha1/alpha2, not a1/a2")
            r, al1, al2 = self.rho.expr, self.alpha1.expr, self.alpha2.expr
            coeff = r * derive(r, "t") + self.k
            self.a1 = TimeFn(r * r * derive(al1, "t") - coeff * al1, 2)
            self.a2 = TimeFn(r * r * derive(al2, "t") - coeff * al2, 2)
        else:
            self.rho = None
            self.alpha1 = None
            self.alpha2 = None
            self.a1 = TimeFn(_as_time_expr(a1, 0.0), 2)
            self.a2 = TimeFn(_as_time_expr(a2, 0.0), 2)

        self.beta1 = self.beta2 = None
        self.gamma1 = self.gamma2 = None
        if case == "B":
            if omega is None:
                self.omega = TimeFn(constant(1.0, ("t",)), 2)
            if self.k != 0.0:
                raise ValueError("case B requires k = 0")
            w = self.omega.expr
            self.beta1 = TimeFn(-self.a2.expr / w, 2)
            self.beta2 = TimeFn(self.a1.expr / w, 2)
        elif case == "C":
            if self.k != 0.0 or omega is not None:
                raise ValueError("case C requires k = 0 and no rotation profile")
        elif case == "D":
            if self.k == 0.0:
                raise ValueError("case D requires k != 0")
            w = self.omega.expr
            denom = w * w + self.k * self.k
            self.gamma1 = TimeFn(-(self.a1.expr * self.k + w * self.a2.expr) / denom, 2)
            self.gamma2 = TimeFn((w * self.a1.expr - self.a2.expr * self.k) / denom, 2)

        self._validate()

    # -- construction helpers ------------------------------------------------

    @classmethod
    def case_a(cls, rho, omega=None, alpha1=None, alpha2=None, k=0.0, interval=(0.0, 1.0)):
        return cls("A", rho=rho, omega=omega, alpha1=alpha1, alpha2=alpha2, k=k, interval=interval)

    @classmethod
    def case_b(cls, a1=None, a2=None, omega=None, interval=(0.0, 1.0)):
        return cls("B", a1=a1, a2=a2, omega=omega, interval=interval)

    @classmethod
    def case_c(cls, a1=None, a2=None, interval=(0.0, 1.0)):
        return cls("C", a1=a1, a2=a2, interval=interval)

    @classmethod
    def case_d(cls, k, omega=None, a1=None, a2=None, interval=(0.0, 1.0)):
        return cls("D", k=k, omega=omega, a1=a1, a2=a2, interval=interval)

    def _sample_times(self) -> list[float]:
        lo, hi = self.t0 - self.pad, self.t1 + self.pad
        n = _VALIDATION_SAMPLES
        return [lo + (hi - lo) * i / (n - 1) for i in range(n)]

    def _validate(self) -> None:
        ts = self._sample_times()
        if self.case == "A":
            vals = [self.rho(t) for t in ts]
            if min(abs(v) for v in vals) < 1e-6:
                raise ValueError("case A requires rho(t) != 0 on the working interval")
        elif self.case == "B":
            vals = [self.omega(t) for t in ts]
            spread = max(vals) - min(vals)
            if spread > 1e-10 * (1.0 + max(abs(v) for v in vals)):
                raise ValueError("case B requires a constant rotation rate")
            if abs(vals[0]) < 1e-12:
                raise ValueError("case B requires a nonzero rotation rate")
        elif self.case == "C":
            vals = [self.a2(t) for t in ts]
            if min(abs(v) for v in vals) < 1e-9:
                raise ValueError("case C requires a2(t) != 0 on the working interval")

    # -- generator pieces ----------------------------------------------------

    def tau(self, t: float) -> float:
        if self.case == "A":
            r = self.rho(t)
            return r * r
        return 0.0

    def scale_coeff(self, t: float) -> float:
        """Coefficient of the radial part of (eta1, eta2): rho*rho' + k."""
        if self.case == "A":
            return self.rho(t) * self.rho(t, 1) + self.k
        return self.k

    def interval_contains(self, t: float) -> bool:
        return self.t0 - self.pad <= t <= self.t1 + self.pad


def generator_eval(params: SymmetryParams, x: float, y: float, t: float) -> GeneratorValue:
    """Evaluate the generator components (tau, eta1, eta2) at a point."""
    c = params.scale_coeff(t)
    w = params.omega(t)
    return GeneratorValue(
        tau=params.tau(t),
        eta1=c * x - w * y + params.a1(t),
        eta2=w * x + c * y + params.a2(t),
    )


def derived_translations(params: SymmetryParams, t: float) -> tuple[float, float]:
    """Translation components induced by (alpha1, alpha2) in case A."""
    if params.case != "A":
        raise ValueError("derived translations are defined for case A only")
    return params.a1(t), params.a2(t)


def quad(f: Expression, t0: float, t: float, tol: float = 1e-10) -> float:
    """Adaptive Simpson integral of an expression in t from t0 to t."""
    return adaptive_simpson(f.compiled(), t0, t, tol=tol)


class CanonicalMap:
    """Forward/inverse transform between lab (x, y, t) and canonical
    (xbar, ybar, tbar) coordinates for a given parameter bundle.

    Case A caches four quadrature tables (tbar, rotation phase, and the two
    rotation-induced drifts) on a dense uniform grid over the padded working
    interval; the other cases are closed-form.  Instances are immutable and
    reentrant.
    """

    def __init__(self, params: SymmetryParams, nodes: int = 2048):
        self.params = params
        self.tbar_table = None
        self.phase_table = None
        self.drift1_table = None
        self.drift2_table = None
        if params.case == "A":
            self._build_tables(nodes)

    def _build_tables(self, nodes: int) -> None:
        p = self.params
        lo, hi = p.t0 - p.pad, p.t1 + p.pad
        rho, omega = p.rho, p.omega
        al1, al2 = p.alpha1, p.alpha2
        k = p.k

        self.tbar_table = CumulativeTable.build(
            lambda t: 1.0 / rho(t) ** 2, lo, hi, nodes
        )
        self.phase_table = CumulativeTable.build(
            lambda t: omega(t) / rho(t) ** 2, lo, hi, nodes
        )
        tbar = self.tbar_table
        phase = self.phase_table

        def drift1_integrand(t: float) -> float:
            r = rho(t)
            ph = phase(t)
            return (
                -omega(t)
                / r**3
                * math.exp(-k * tbar(t))
                * (al1(t) * math.sin(ph) - al2(t) * math.cos(ph))
            )

        def drift2_integrand(t: float) -> float:
            r = rho(t)
            ph = phase(t)
            return (
                -omega(t)
                / r**3
                * math.exp(-k * tbar(t))
                * (al1(t) * math.cos(ph) + al2(t) * math.sin(ph))
            )

        self.drift1_table = CumulativeTable.build(drift1_integrand, lo, hi, nodes)
        self.drift2_table = CumulativeTable.build(drift2_integrand, lo, hi, nodes)

    # -- forward -------------------------------------------------------------

    def to_canonical(self, x: float, y: float, t: float) -> tuple[float, float, float]:
        p = self.params
        case = p.case
        if case == "A":
            r = p.rho(t)
            tb = self.tbar_table(t)
            ph = self.phase_table(t)
            scale = math.exp(-p.k * tb) / r
            u = x - p.alpha1(t)
            v = y - p.alpha2(t)
            c, s = math.cos(ph), math.sin(ph)
            xb = scale * (u * c + v * s) + self.drift1_table(t)
            yb = scale * (-u * s + v * c) + self.drift2_table(t)
            return xb, yb, tb
        if case == "B":
            u = x - p.beta1(t)
            v = y - p.beta2(t)
            rr = math.hypot(u, v)
            if rr < _SINGULAR_RADIUS:
                raise SingularPointError(f"point ({x}, {y}) is at the excluded center at t={t}")
            return rr, t, math.atan2(v, u) / p.omega(t)
        if case == "C":
            a2 = p.a2(t)
            return x - p.a1(t) * y / a2, t, y / a2
        # case D
        u = x - p.gamma1(t)
        v = y - p.gamma2(t)
        r2 = u * u + v * v
        if math.sqrt(r2) < _SINGULAR_RADIUS:
            raise SingularPointError(f"point ({x}, {y}) is at the excluded center at t={t}")
        tb = math.log(r2) / (2.0 * p.k)
        xb = math.atan2(v, u) - p.omega(t) * tb
        return xb, t, tb

    # -- inverse -------------------------------------------------------------

    def from_canonical(self, xb: float, yb: float, tb: float) -> tuple[float, float, float]:
        p = self.params
        case = p.case
        if case == "A":
            t = self.tbar_table.invert_monotone(tb)
            r = p.rho(t)
            scale = r * math.exp(p.k * tb)
            pq1 = (xb - self.drift1_table(t)) * scale
            pq2 = (yb - self.drift2_table(t)) * scale
            ph = self.phase_table(t)
            c, s = math.cos(ph), math.sin(ph)
            u = pq1 * c - pq2 * s
            v = pq1 * s + pq2 * c
            return u + p.alpha1(t), v + p.alpha2(t), t
        if case == "B":
            t = yb
            theta = p.omega(t) * tb
            return p.beta1(t) + xb * math.cos(theta), p.beta2(t) + xb * math.sin(theta), t
        if case == "C":
            t = yb
            y = p.a2(t) * tb
            return xb + p.a1(t) * tb, y, t
        # case D
        t = yb
        r = math.exp(p.k * tb)
        theta = xb + p.omega(t) * tb
        return p.gamma1(t) + r * math.cos(theta), p.gamma2(t) + r * math.sin(theta), t

    # -- partial derivatives used by velocity transforms ----------------------

    def spatial_jacobian(self, x: float, y: float, t: float) -> tuple[tuple[float, float], ...]:
        """Rows d(xbar)/d(x,y), d(ybar)/d(x,y), d(tbar)/d(x,y), closed form."""
        p = self.params
        case = p.case
        if case == "A":
            tb = self.tbar_table(t)
            scale = math.exp(-p.k * tb) / p.rho(t)
            ph = self.phase_table(t)
            c, s = math.cos(ph), math.sin(ph)
            return ((scale * c, scale * s), (-scale * s, scale * c), (0.0, 0.0))
        if case == "B":
            u = x - p.beta1(t)
            v = y - p.beta2(t)
            r2 = u * u + v * v
            rr = math.sqrt(r2)
            if rr < _SINGULAR_RADIUS:
                raise SingularPointError("jacobian at the excluded center")
            w = p.omega(t)
            return ((u / rr, v / rr), (0.0, 0.0), (-v / (w * r2), u / (w * r2)))
        if case == "C":
            a2 = p.a2(t)
            return ((1.0, -p.a1(t) / a2), (0.0, 0.0), (0.0, 1.0 / a2))
        u = x - p.gamma1(t)
        v = y - p.gamma2(t)
        r2 = u * u + v * v
        if math.sqrt(r2) < _SINGULAR_RADIUS:
            raise SingularPointError("jacobian at the excluded center")
        k, w = p.k, p.omega(t)
        tb_x, tb_y = u / (k * r2), v / (k * r2)
        th_x, th_y = -v / r2, u / r2
        return ((th_x - w * tb_x, th_y - w * tb_y), (0.0, 0.0), (tb_x, tb_y))

    def time_partials(self, x: float, y: float, t: float) -> tuple[float, float, float]:
        """(d xbar/dt, d ybar/dt, d tbar/dt) at fixed (x, y).

        Case A uses central differences (step 1e-6) through the cached
        quadrature tables; the closed-form cases are analytic.
        """
        p = self.params
        case = p.case
        if case == "A":
            h = 1e-6
            xb_p, yb_p, tb_p = self.to_canonical(x, y, t + h)
            xb_m, yb_m, tb_m = self.to_canonical(x, y, t - h)
            return (
                (xb_p - xb_m) / (2 * h),
                (yb_p - yb_m) / (2 * h),
                (tb_p - tb_m) / (2 * h),
            )
        if case == "B":
            u = x - p.beta1(t)
            v = y - p.beta2(t)
            r2 = u * u + v * v
            rr = math.sqrt(r2)
            if rr < _SINGULAR_RADIUS:
                raise SingularPointError("partials at the excluded center")
            db1, db2 = p.beta1(t, 1), p.beta2(t, 1)
            w = p.omega(t)
            xb_t = (-u * db1 - v * db2) / rr
            tb_t = (-u * db2 + v * db1) / (w * r2)
            return (xb_t, 1.0, tb_t)
        if case == "C":
            a1, a2 = p.a1(t), p.a2(t)
            da1, da2 = p.a1(t, 1), p.a2(t, 1)
            xb_t = -y * (da1 * a2 - a1 * da2) / a2**2
            tb_t = -y * da2 / a2**2
            return (xb_t, 1.0, tb_t)
        u = x - p.gamma1(t)
        v = y - p.gamma2(t)
        r2 = u * u + v * v
        if math.sqrt(r2) < _SINGULAR_RADIUS:
            raise SingularPointError("partials at the excluded center")
        k, w, dw = p.k, p.omega(t), p.omega(t, 1)
        dg1, dg2 = p.gamma1(t, 1), p.gamma2(t, 1)
        tb = math.log(r2) / (2.0 * k)
        tb_t = (-u * dg1 - v * dg2) / (k * r2)
        theta_t = (v * dg1 - u * dg2) / r2
        xb_t = theta_t - dw * tb - w * tb_t
        return (xb_t, 1.0, tb_t)

    def angle_period(self) -> tuple[int, float] | None:
        """Index and period of the angle-valued output component, if any.

        Case B: tbar (index 2) jumps by 2*pi/Omega across the branch cut;
        case D: xbar (index 0) jumps by 2*pi.  Returns None otherwise.
        """
        p = self.params
        if p.case == "B":
            return 2, 2.0 * math.pi / p.omega(p.t0)
        if p.case == "D":
            return 0, 2.0 * math.pi
        return None


def _nearest_branch(value: float, ref: float, period: float) -> float:
    return value + period * round((ref - value) / period)


def canonical_defining_residual(
    cmap: CanonicalMap, x: float, y: float, t: float
) -> tuple[float, float, float]:
    """Residuals (G xbar, G ybar, G tbar - 1) by central differences.

    Angle-valued components are continued onto the branch nearest the center
    evaluation, so points near the cut of the two-argument arctangent do not
    produce spurious 2*pi jumps.
    """
    params = cmap.params
    g = generator_eval(params, x, y, t)
    center = cmap.to_canonical(x, y, t)
    branch = cmap.angle_period()

    def shifted(dx: float, dy: float, dt: float) -> tuple[float, float, float]:
        vals = list(cmap.to_canonical(x + dx, y + dy, t + dt))
        if branch is not None:
            i, period = branch
            vals[i] = _nearest_branch(vals[i], center[i], period)
        return tuple(vals)

    hx, hy, ht = _fd_step(x), _fd_step(y), _fd_step(t)
    fx_p, fx_m = shifted(hx, 0, 0), shifted(-hx, 0, 0)
    fy_p, fy_m = shifted(0, hy, 0), shifted(0, -hy, 0)
    ft_p, ft_m = shifted(0, 0, ht), shifted(0, 0, -ht)

    out = []
    for i in range(3):
        d_dx = (fx_p[i] - fx_m[i]) / (2 * hx)
        d_dy = (fy_p[i] - fy_m[i]) / (2 * hy)
        d_dt = (ft_p[i] - ft_m[i]) / (2 * ht)
        out.append(g.tau * d_dt + g.eta1 * d_dx + g.eta2 * d_dy)
    return out[0], out[1], out[2] - 1.0
