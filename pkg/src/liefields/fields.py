"""Construction of the four electromagnetic field families admitting a point
symmetry, plus the induction-law completion helpers for cases A and D.

Each builder returns a :class:`FieldFamily` whose evaluators are total on the
case domain minus the documented singular centers (cases B and D).  The master
property, checked by :mod:`liefields.verify`, is that every constructed family
drives the determining residuals to zero.
"""

from __future__ import annotations

import math
from typing import Callable

from .expr import Expression, derive
from .numerics import adaptive_simpson
from .symmetry import CanonicalMap, SymmetryParams

__all__ = [
    "FieldFamily",
    "RawField",
    "build_case_a",
    "build_case_b",
    "build_case_c",
    "build_case_d",
    "faraday_complete_case_a",
    "faraday_complete_case_d",
    "potential_electric",
]

Fn2 = Callable[[float, float], float]


def _as_fn2(f: "Expression | Fn2 | float") -> Fn2:
    """Coerce a free function of the canonical coordinates to a callable."""
    if isinstance(f, Expression):
        if len(f.varnames) != 2:
            raise ValueError("free functions take exactly two canonical coordinates")
        return f.compiled()
    if callable(f):
        return f
    value = float(f)
    return lambda xb, yb: value


class FieldFamily:
    """Evaluator triple (E1, E2, B) over lab coordinates (x, y, t).

    Immutable and reentrant; `eval_all` shares one canonical-coordinate
    lookup across the three components and is the hot path used by the
    integrators and residual checks.
    """

    def __init__(
        self,
        case: str,
        params: SymmetryParams | None,
        cmap: CanonicalMap | None,
        eval_all: Callable[[float, float, float], tuple[float, float, float]],
        free: dict | None = None,
    ):
        self.case = case
        self.params = params
        self.cmap = cmap
        self._eval_all = eval_all
        self.free = free or {}

    def eval_all(self, x: float, y: float, t: float) -> tuple[float, float, float]:
        return self._eval_all(x, y, t)

    def e1(self, x: float, y: float, t: float) -> float:
        return self._eval_all(x, y, t)[0]

    def e2(self, x: float, y: float, t: float) -> float:
        return self._eval_all(x, y, t)[1]

    def b(self, x: float, y: float, t: float) -> float:
        return self._eval_all(x, y, t)[2]


class RawField(FieldFamily):
    """User-supplied lab-frame field, e.g. expressions in (x, y, t)."""

    def __init__(self, e1, e2, b):
        fns = []
        for f in (e1, e2, b):
            if isinstance(f, Expression):
                if f.varnames != ("x", "y", "t"):
                    raise ValueError("raw field expressions must use variables (x, y, t)")
                fns.append(f.compiled())
            elif callable(f):
                fns.append(f)
            else:
                value = float(f)
                fns.append(lambda x, y, t, value=value: value)
        fe1, fe2, fb = fns
        super().__init__(
            "raw", None, None, lambda x, y, t: (fe1(x, y, t), fe2(x, y, t), fb(x, y, t))
        )


def build_case_a(
    params: SymmetryParams,
    bbar: "Expression | Fn2 | float",
    ebar1: "Expression | Fn2 | float",
    ebar2: "Expression | Fn2 | float",
    cmap: CanonicalMap | None = None,
) -> FieldFamily:
    """Case A family: general squeeze/rotation/translation/scaling symmetry."""
    if params.case != "A":
        raise ValueError("build_case_a requires case A parameters")
    cmap = cmap or CanonicalMap(params)
    Bb, E1b, E2b = _as_fn2(bbar), _as_fn2(ebar1), _as_fn2(ebar2)
    rho, omega = params.rho, params.omega
    al1f, al2f = params.alpha1, params.alpha2
    k = params.k
    phase = cmap.phase_table
    drift1 = cmap.drift1_table
    drift2 = cmap.drift2_table

    def eval_all(x: float, y: float, t: float) -> tuple[float, float, float]:
        xb, yb, tb = cmap.to_canonical(x, y, t)
        r, dr, d2r = rho(t), rho(t, 1), rho(t, 2)
        w, dw = omega(t), omega(t, 1)
        al1, dal1, d2al1 = al1f(t), al1f(t, 1), al1f(t, 2)
        al2, dal2, d2al2 = al2f(t), al2f(t, 1), al2f(t, 2)
        ph = phase(t)
        cT, sT = math.cos(ph), math.sin(ph)
        dl1, dl2 = drift1(t), drift2(t)
        ek = math.exp(k * tb)
        Bbv = Bb(xb, yb)
        E1bv = E1b(xb, yb)
        E2bv = E2b(xb, yb)
        r2 = r * r
        r3 = r2 * r
        r4 = r2 * r2

        B = (-2.0 * w + Bbv) / r2
        e1 = (
            d2al1
            + (d2r / r) * (x - al1)
            + w * w * x / r4
            - (r * dw - 2.0 * dr * w) * y / r3
            + (w / r3) * (r * dal2 - dr * al2)
            + (k * k * ek / r3) * (dl2 * sT - dl1 * cT)
            - k * w * al2 / r4
            + (ek / r3) * (E1bv * cT - E2bv * sT)
            - (r * dr * (y - al2) + r2 * dal2 + w * x - k * r * ek * (dl2 * cT + dl1 * sT))
            * Bbv
            / r4
        )
        e2 = (
            d2al2
            + (d2r / r) * (y - al2)
            + w * w * y / r4
            + (r * dw - 2.0 * dr * w) * x / r3
            - (w / r3) * (r * dal1 - dr * al1)
            - (k * k * ek / r3) * (dl2 * cT + dl1 * sT)
            + k * w * al1 / r4
            + (ek / r3) * (E2bv * cT + E1bv * sT)
            + (r * dr * (x - al1) + r2 * dal1 - w * y - k * r * ek * (dl1 * cT - dl2 * sT))
            * Bbv
            / r4
        )
        return e1, e2, B

    return FieldFamily("A", params, cmap, eval_all, {"bbar": Bb, "ebar1": E1b, "ebar2": E2b})


def build_case_b(
    params: SymmetryParams,
    psi: Expression,
    ebar1: "Expression | Fn2 | float",
    cmap: CanonicalMap | None = None,
) -> FieldFamily:
    """Case B family (rotation symmetry), built from the stream-like potential
    psi: Ebar2 = psi_y / xbar^2 and Bbar = -psi_x / xbar, which solves the
    induction constraint identically.  Singular at the rotating center."""
    if params.case != "B":
        raise ValueError("build_case_b requires case B parameters")
    if not isinstance(psi, Expression) or len(psi.varnames) != 2:
        raise ValueError("psi must be an expression in the two canonical coordinates")
    cmap = cmap or CanonicalMap(params)
    xn, yn = psi.varnames
    psi_x = derive(psi, xn).compiled()
    psi_y = derive(psi, yn).compiled()
    E1b = _as_fn2(ebar1)

    def Bb(xb: float, yb: float) -> float:
        return -psi_x(xb, yb) / xb

    def E2b(xb: float, yb: float) -> float:
        return psi_y(xb, yb) / (xb * xb)

    b1f, b2f = params.beta1, params.beta2

    def eval_all(x: float, y: float, t: float) -> tuple[float, float, float]:
        xb, yb, tb = cmap.to_canonical(x, y, t)
        u = x - b1f(t)
        v = y - b2f(t)
        Bbv = Bb(xb, yb)
        E1bv = E1b(xb, yb)
        E2bv = E2b(xb, yb)
        e1 = b1f(t, 2) - b2f(t, 1) * Bbv + u * E1bv - v * E2bv
        e2 = b2f(t, 2) + b1f(t, 1) * Bbv + u * E2bv + v * E1bv
        return e1, e2, Bbv

    return FieldFamily(
        "B", params, cmap, eval_all, {"psi": psi, "bbar": Bb, "ebar1": E1b, "ebar2": E2b}
    )


def build_case_c(
    params: SymmetryParams,
    psi: Expression,
    vbar: Expression,
    cmap: CanonicalMap | None = None,
) -> FieldFamily:
    """Case C family (translation symmetry) from potentials psi and Vbar:
    Bbar = psi_x, Ebar1 = -Vbar_x, and Ebar2 carries the induction-law
    completion with time-dependent coefficients."""
    if params.case != "C":
        raise ValueError("build_case_c requires case C parameters")
    for f, name in ((psi, "psi"), (vbar, "vbar")):
        if not isinstance(f, Expression) or len(f.varnames) != 2:
            raise ValueError(f"{name} must be an expression in the two canonical coordinates")
    cmap = cmap or CanonicalMap(params)
    psi_c = psi.compiled()
    psi_x = derive(psi, psi.varnames[0]).compiled()
    psi_y = derive(psi, psi.varnames[1]).compiled()
    v_x = derive(vbar, vbar.varnames[0]).compiled()
    a1f, a2f = params.a1, params.a2

    def Bb(xb: float, yb: float) -> float:
        return psi_x(xb, yb)

    def E1b(xb: float, yb: float) -> float:
        return -v_x(xb, yb)

    def E2b(xb: float, yb: float) -> float:
        a2v = a2f(yb)
        return (
            a1f(yb, 2) / a2v * xb
            - a2f(yb, 1) / a2v * psi_c(xb, yb)
            - psi_y(xb, yb)
            + a1f(yb) / a2v * v_x(xb, yb)
        )

    def eval_all(x: float, y: float, t: float) -> tuple[float, float, float]:
        xb, yb, tb = cmap.to_canonical(x, y, t)
        a2v = a2f(t)
        Bbv = Bb(xb, yb)
        e1 = a1f(t, 2) * y / a2v - a2f(t, 1) * y / a2v * Bbv + E1b(xb, yb)
        e2 = a2f(t, 2) * y / a2v + a1f(t, 1) * y / a2v * Bbv + E2b(xb, yb)
        return e1, e2, Bbv

    return FieldFamily(
        "C",
        params,
        cmap,
        eval_all,
        {"psi": psi, "vbar": vbar, "bbar": Bb, "ebar1": E1b, "ebar2": E2b},
    )


def build_case_d(
    params: SymmetryParams,
    bbar: "Expression | Fn2 | float",
    ebar1: "Expression | Fn2 | float",
    ebar2: "Expression | Fn2 | float",
    cmap: CanonicalMap | None = None,
) -> FieldFamily:
    """Case D family (scaling symmetry, k != 0); the magnetic field picks up a
    secular term proportional to the rotation-rate drift.  Singular at the
    moving center."""
    if params.case != "D":
        raise ValueError("build_case_d requires case D parameters")
    cmap = cmap or CanonicalMap(params)
    Bb, E1b, E2b = _as_fn2(bbar), _as_fn2(ebar1), _as_fn2(ebar2)
    g1f, g2f = params.gamma1, params.gamma2
    omega = params.omega
    k = params.k

    def eval_all(x: float, y: float, t: float) -> tuple[float, float, float]:
        xb, yb, tb = cmap.to_canonical(x, y, t)
        u = x - g1f(t)
        v = y - g2f(t)
        w, dw, d2w = omega(t), omega(t, 1), omega(t, 2)
        dg1, dg2 = g1f(t, 1), g2f(t, 1)
        ek = math.exp(k * tb)
        Bbv = Bb(xb, yb)
        E1bv = E1b(xb, yb)
        E2bv = E2b(xb, yb)
        B = -2.0 * dw * tb + Bbv
        cwt, swt = math.cos(w * tb), math.sin(w * tb)
        e1 = (
            g1f(t, 2)
            + 2.0 * dw * dg2 * tb
            - dg2 * Bbv
            + dw * tb * (dw * tb - Bbv) * u
            - d2w * tb * v
            + ek * (E1bv * cwt - E2bv * swt)
        )
        e2 = (
            g2f(t, 2)
            - 2.0 * dw * dg1 * tb
            + dg1 * Bbv
            + dw * tb * (dw * tb - Bbv) * v
            + d2w * tb * u
            + ek * (E1bv * swt + E2bv * cwt)
        )
        return e1, e2, B

    return FieldFamily("D", params, cmap, eval_all, {"bbar": Bb, "ebar1": E1b, "ebar2": E2b})


def faraday_complete_case_a(
    k: float,
    bbar: Expression,
    ebar1: Expression,
    tol: float = 1e-10,
) -> Fn2:
    """Solve the case A induction constraint for Ebar2 by quadrature in xbar.

    Ebar2(xb, yb) = int_0^xb [Ebar1_y + k*(s*Bbar_x(s, yb) + yb*Bbar_y(s, yb))] ds,
    with the free additive function of yb set to zero.  Returns a numeric
    evaluator backed by adaptive Simpson quadrature.
    """
    for f, name in ((bbar, "bbar"), (ebar1, "ebar1")):
        if not isinstance(f, Expression) or len(f.varnames) != 2:
            raise ValueError(f"{name} must be an expression in the two canonical coordinates")
    db_x = derive(bbar, bbar.varnames[0]).compiled()
    db_y = derive(bbar, bbar.varnames[1]).compiled()
    de1_y = derive(ebar1, ebar1.varnames[1]).compiled()

    def ebar2(xb: float, yb: float) -> float:
        def integrand(s: float) -> float:
            return de1_y(s, yb) + k * (s * db_x(s, yb) + yb * db_y(s, yb))

        return adaptive_simpson(integrand, 0.0, xb, tol=tol)

    return ebar2


def faraday_complete_case_d(
    params: SymmetryParams,
    ebar1: Expression,
    ebar2: Expression,
    tol: float = 1e-10,
) -> Fn2:
    """Solve the case D induction constraint for Bbar by quadrature in ybar.

    k*Bbar_y equals a trigonometric combination of Ebar1, Ebar2, their
    xbar-derivatives and the rotation-rate drift; the free additive function
    of xbar is set to zero at ybar = t0 (start of the working interval).
    """
    if params.case != "D":
        raise ValueError("the Bbar completion applies to case D parameters")
    for f, name in ((ebar1, "ebar1"), (ebar2, "ebar2")):
        if not isinstance(f, Expression) or len(f.varnames) != 2:
            raise ValueError(f"{name} must be an expression in the two canonical coordinates")
    e1c, e2c = ebar1.compiled(), ebar2.compiled()
    de1_x = derive(ebar1, ebar1.varnames[0]).compiled()
    de2_x = derive(ebar2, ebar2.varnames[0]).compiled()
    omega = params.omega
    k = params.k
    y0 = params.t0

    def bbar(xb: float, yb: float) -> float:
        cx, sx = math.cos(xb), math.sin(xb)

        def integrand(s: float) -> float:
            w = omega(s)
            return (
                -omega(s, 2)
                + (k * sx - w * cx) * e1c(xb, s)
                - (k * cx + w * sx) * e2c(xb, s)
                + (k * cx - w * sx) * de1_x(xb, s)
                + (k * sx + w * cx) * de2_x(xb, s)
            )

        return adaptive_simpson(integrand, y0, yb, tol=tol) / k

    return bbar


def potential_electric(vbar: Expression) -> tuple[Expression, Expression]:
    """Electrostatic-potential route for the k = 0 sector of case A:
    (Ebar1, Ebar2) = (-dVbar/dxb, -dVbar/dyb)."""
    if not isinstance(vbar, Expression) or len(vbar.varnames) != 2:
        raise ValueError("vbar must be an expression in the two canonical coordinates")
    return -derive(vbar, vbar.varnames[0]), -derive(vbar, vbar.varnames[1])
