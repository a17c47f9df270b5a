"""The two-dimensional fractional Lotka-Volterra model.

    D^alpha y1 = y1 (a - b y2)
    D^beta  y2 = y2 (-c + b y1)

with equilibria at the origin and at (c/b, a/b).  Closed-form stability
conditions, the order-lifting construction for orders in (1, 2), the
integer-order separatrix, and the nullcline partition of the plane all
live here; the generic numeric machinery stays in solver/stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateParameterError, DomainError, UnsupportedCaseError
from .solver import FractionalIVP
from .stability import (
    RationalOrder,
    StabilityReport,
    Verdict,
    analyze_equilibrium,
    reduce_order,
)

SADDLE_OFFSET = 1e-6
TRACE_STEP = 1e-3
TRACE_BUDGET = 20.0
FIELD_FLOOR = 1e-12


@dataclass(frozen=True)
class LotkaParams:
    """Coefficients a (prey growth), b (interaction, nonzero), c (predator decay)."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"parameter {name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if self.b == 0.0:
            raise DegenerateParameterError("b must be nonzero (both equilibria defined)")


@dataclass(frozen=True)
class LotkaSystem:
    """Parameters plus the two rational differentiation orders."""

    params: LotkaParams
    alpha: RationalOrder
    beta: RationalOrder

    def __post_init__(self):
        object.__setattr__(self, "alpha", reduce_order(self.alpha))
        object.__setattr__(self, "beta", reduce_order(self.beta))
        for o in (self.alpha, self.beta):
            if not (0.0 < o.value < 2.0):
                raise DomainError(f"orders must lie in (0, 2), got {o}")

    @property
    def case(self) -> int:
        """1 when both orders are <= 1, 2 when both exceed 1, 0 otherwise (mixed)."""
        low = (self.alpha.value <= 1.0, self.beta.value <= 1.0)
        if all(low):
            return 1
        if not any(low):
            return 2
        return 0


def rhs(params: LotkaParams, state) -> np.ndarray:
    """Vector field; accepts a single state (2,) or a stacked batch (..., 2)."""
    y = np.asarray(state, dtype=float)
    y1 = y[..., 0]
    y2 = y[..., 1]
    return np.stack((y1 * (params.a - params.b * y2), y2 * (-params.c + params.b * y1)), axis=-1)


def equilibria(params: LotkaParams) -> list:
    """The origin and the coexistence point (c/b, a/b), in that order."""
    if params.b == 0.0:
        raise DegenerateParameterError("b must be nonzero")
    return [(0.0, 0.0), (params.c / params.b, params.a / params.b)]


def jacobian(params: LotkaParams, point) -> np.ndarray:
    """Jacobian of the vector field at an arbitrary point."""
    y1, y2 = (float(v) for v in point)
    a, b, c = params.a, params.b, params.c
    return np.array([[a - b * y2, -b * y1], [b * y2, -c + b * y1]])


def as_ivp(system: LotkaSystem, y0, t_end: float, h: float) -> FractionalIVP:
    """Package a case-1 system as a solver problem (vectorized rhs)."""
    if system.case != 1:
        raise UnsupportedCaseError(
            "direct integration needs both orders in (0, 1]; lift the system first"
        )
    p = system.params
    return FractionalIVP(
        orders=(system.alpha.value, system.beta.value),
        rhs=lambda t, y: rhs(p, y),
        y0=tuple(float(v) for v in y0),
        t_end=t_end,
        h=h,
        vectorized=True,
    )


@dataclass(frozen=True)
class ClosedFormVerdicts:
    """Predicted stability of the two equilibria from the sign conditions."""

    origin: Verdict
    coexistence: Verdict
    case: int


def closed_form_stability(system: LotkaSystem) -> ClosedFormVerdicts:
    """Stability of both equilibria without touching the numeric pipeline.

    Both orders at most 1: the origin is stable iff a < 0 and c > 0; the
    coexistence point is stable iff a*c > 0 and alpha + beta < 2 (at
    alpha = beta = 1 with a*c > 0 the characteristic roots sit exactly on
    the sector boundary, reported as marginal).  Both orders in (1, 2):
    both equilibria are unstable regardless of parameters.  Equalities in
    the sign conditions are reported as marginal rather than resolved.
    Neither verdict depends on b.
    """
    case = system.case
    if case == 0:
        raise UnsupportedCaseError(
            "one order below 1 and one above is not covered by the analysis"
        )
    if case == 2:
        return ClosedFormVerdicts(Verdict.UNSTABLE, Verdict.UNSTABLE, 2)
    a, c = system.params.a, system.params.c
    if a > 0.0 or c < 0.0:
        origin = Verdict.UNSTABLE
    elif a == 0.0 or c == 0.0:
        origin = Verdict.MARGINAL
    else:
        origin = Verdict.STABLE
    ac = a * c
    order_sum = system.alpha.as_fraction() + system.beta.as_fraction()
    if ac < 0.0:
        coex = Verdict.UNSTABLE
    elif ac == 0.0:
        coex = Verdict.MARGINAL
    elif order_sum < 2:
        coex = Verdict.STABLE
    else:
        coex = Verdict.MARGINAL  # alpha = beta = 1: roots on the sector boundary
    return ClosedFormVerdicts(origin, coex, 1)


@dataclass(frozen=True)
class LiftedSystem:
    """Case-2 system rewritten with orders in (0, 1].

    With y3 = dy1/dt and y4 = dy2/dt the state (y3, y4, y1, y2) obeys

        D^(alpha-1) y3 = y1 (a - b y2)
        D^(beta-1)  y4 = y2 (-c + b y1)
        D y1 = y3
        D y2 = y4

    analysis_jacobian returns the 4x4 matrix this package classifies
    case-2 equilibria with: the rhs rows are differentiated with respect
    to (y1, y2, y3, y4) while the diagonal exponents keep the equation
    order (alpha-1, beta-1, 1, 1); this pairing is what yields the
    (lambda^M - 1)^2 factor and hence the unconditional instability.
    """

    params: LotkaParams
    alpha1: RationalOrder
    beta1: RationalOrder

    @property
    def orders(self) -> tuple:
        return (self.alpha1, self.beta1, RationalOrder(1, 1), RationalOrder(1, 1))

    def rhs(self, state) -> np.ndarray:
        x = np.asarray(state, dtype=float)
        y3, y4, y1, y2 = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
        a, b, c = self.params.a, self.params.b, self.params.c
        return np.stack((y1 * (a - b * y2), y2 * (-c + b * y1), y3, y4), axis=-1)

    def equilibria(self) -> list:
        p = self.params
        return [(0.0, 0.0, 0.0, 0.0), (0.0, 0.0, p.c / p.b, p.a / p.b)]

    def analysis_jacobian(self, point) -> np.ndarray:
        _, _, y1, y2 = (float(v) for v in point)
        a, b, c = self.params.a, self.params.b, self.params.c
        return np.array(
            [
                [a - b * y2, -b * y1, 0.0, 0.0],
                [b * y2, -c + b * y1, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ]
        )

    def as_ivp(self, y0, t_end: float, h: float) -> FractionalIVP:
        """Solver problem for the 4-state form; y0 is (y3, y4, y1, y2)."""
        return FractionalIVP(
            orders=tuple(o.value for o in self.orders),
            rhs=lambda t, x: self.rhs(x),
            y0=tuple(float(v) for v in y0),
            t_end=t_end,
            h=h,
            vectorized=True,
        )


def lift(system: LotkaSystem) -> LiftedSystem:
    """Rewrite a system with both orders in (1, 2) in the 4-state form."""
    al, be = system.alpha, system.beta
    if not (1.0 < al.value < 2.0 and 1.0 < be.value < 2.0):
        raise DomainError(f"lifting needs both orders in (1, 2), got {al}, {be}")
    a1 = al.as_fraction() - 1
    b1 = be.as_fraction() - 1
    return LiftedSystem(
        params=system.params,
        alpha1=RationalOrder(a1.numerator, a1.denominator),
        beta1=RationalOrder(b1.numerator, b1.denominator),
    )


def analyze(system: LotkaSystem, tol_band: float = 1e-8, M: int = 0) -> dict:
    """Numeric sector verdicts for both equilibria (lifting case 2 first).

    Returns {"origin": StabilityReport, "coexistence": StabilityReport}.
    """
    case = system.case
    if case == 0:
        raise UnsupportedCaseError(
            "one order below 1 and one above is not covered by the analysis"
        )
    p = system.params
    reports = {}
    if case == 1:
        orders = (system.alpha, system.beta)
        for name, point in zip(("origin", "coexistence"), equilibria(p)):
            reports[name] = analyze_equilibrium(
                lambda y: rhs(p, y),
                point,
                orders,
                jacobian=lambda y: jacobian(p, y),
                tol_band=tol_band,
                M=M,
            )
    else:
        lifted = lift(system)
        for name, point in zip(("origin", "coexistence"), lifted.equilibria()):
            reports[name] = analyze_equilibrium(
                lifted.rhs,
                point,
                lifted.orders,
                jacobian=lifted.analysis_jacobian,
                tol_band=tol_band,
                M=M,
            )
    return reports


def _real_power(base: float, exponent: float) -> float:
    """base**exponent restricted to real results.

    Negative bases are allowed only for integer exponents; zero bases only
    for nonnegative ones.  Anything else raises DomainError.
    """
    if base > 0.0:
        return base ** exponent
    if base == 0.0:
        if exponent > 0.0:
            return 0.0
        if exponent == 0.0:
            return 1.0
        raise DomainError("zero base with negative exponent")
    if exponent != round(exponent):
        raise DomainError(
            f"negative base {base} with non-integer exponent {exponent} has no real value"
        )
    return base ** int(round(exponent))


def separatrix_residual(params: LotkaParams, point) -> float:
    """Implicit-equation residual for the integer-order basin border.

    F(y1, y2) = y2^a y1^c - (a/b)^a (c/b)^c exp(b (y1 + y2) - (a + c)),
    which vanishes along the separatrix through the saddle (c/b, a/b).
    """
    y1, y2 = (float(v) for v in point)
    a, b, c = params.a, params.b, params.c
    lhs = _real_power(y2, a) * _real_power(y1, c)
    const = _real_power(a / b, a) * _real_power(c / b, c)
    value = lhs - const * math.exp(b * (y1 + y2) - (a + c))
    if not math.isfinite(value):
        raise DomainError(f"separatrix residual is not finite at ({y1}, {y2})")
    return value


@dataclass(frozen=True)
class SeparatrixTrace:
    """Polyline through the saddle; truncated=True if a branch died early."""

    points: np.ndarray
    truncated: bool


def _trace_unit_speed(field, start, budget: float, step: float):
    """Arclength RK4 along the unit-speed field; stops where the field dies.

    Returns (points excluding the start, truncated flag).
    """
    pts = []
    z = np.asarray(start, dtype=float).copy()
    travelled = 0.0

    def unit(zz):
        v = np.asarray(field(zz), dtype=float)
        norm = math.hypot(*v)
        if norm < FIELD_FLOOR or not math.isfinite(norm):
            return None
        return v / norm

    while travelled + 0.5 * step <= budget:
        k1 = unit(z)
        if k1 is None:
            return pts, True
        k2 = unit(z + 0.5 * step * k1)
        k3 = unit(z + 0.5 * step * k2) if k2 is not None else None
        k4 = unit(z + step * k3) if k3 is not None else None
        if k2 is None or k3 is None or k4 is None:
            return pts, True
        z = z + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(z).all():
            return pts, True
        travelled += step
        pts.append(z.copy())
    return pts, False


def _decimate(points: list, max_points: int) -> list:
    if max_points is None or len(points) <= max_points:
        return points
    idx = np.unique(np.round(np.linspace(0, len(points) - 1, max_points)).astype(int))
    return [points[i] for i in idx]


def separatrix_trace(
    params: LotkaParams,
    arclength_budget: float = TRACE_BUDGET,
    step: float = TRACE_STEP,
    max_points: Optional[int] = None,
) -> SeparatrixTrace:
    """Trace the integer-order basin border through the saddle (c/b, a/b).

    Shoots from the saddle offset by +/-1e-6 along its stable
    eigendirection and follows the reversed flow, reparameterized by
    arclength, for half the budget on each branch.  With max_points set,
    the polyline is decimated evenly (the saddle itself is always kept).
    A zero budget returns just the saddle.
    """
    a, b, c = params.a, params.b, params.c
    if b == 0.0:
        raise DegenerateParameterError("b must be nonzero")
    if not a * c < 0.0:
        raise DomainError(
            f"the coexistence point is a saddle only for a*c < 0, got a*c = {a * c}"
        )
    if arclength_budget < 0.0 or step <= 0.0:
        raise ValueError("budget must be >= 0 and step > 0")
    saddle = np.array([c / b, a / b])
    if arclength_budget == 0.0:
        return SeparatrixTrace(points=saddle[None, :], truncated=False)
    # stable eigenpair of [[0, -c], [a, 0]]: lambda = -sqrt(-ac), w = (1, a/lambda)
    lam = -math.sqrt(-a * c)
    w = np.array([1.0, a / lam])
    w = w / math.hypot(*w)

    def reversed_field(z):
        return -rhs(params, z)

    per_branch = arclength_budget / 2.0
    up, trunc_up = _trace_unit_speed(reversed_field, saddle + SADDLE_OFFSET * w, per_branch, step)
    dn, trunc_dn = _trace_unit_speed(reversed_field, saddle - SADDLE_OFFSET * w, per_branch, step)
    half = None if max_points is None else max(1, (max_points - 1) // 2)
    up = _decimate(up, half)
    dn = _decimate(dn, half)
    pts = list(reversed(dn)) + [saddle] + up
    return SeparatrixTrace(points=np.asarray(pts), truncated=trunc_up or trunc_dn)


def isocline_region(params: LotkaParams, point) -> tuple:
    """Cell index (i, j) of a point in the nullcline partition of the plane.

    The lines y1 in {0, c/b} and y2 in {0, a/b} split the plane into nine
    cells; i positions y1 against its two sorted lines (0 left of or on the
    lower line, 1 between, 2 right of the upper), j does the same for y2.
    Points exactly on a line take the lower index.
    """
    if params.b == 0.0:
        raise DegenerateParameterError("b must be nonzero")
    y1, y2 = (float(v) for v in point)
    lo1, hi1 = sorted((0.0, params.c / params.b))
    lo2, hi2 = sorted((0.0, params.a / params.b))
    i = 0 if y1 <= lo1 else (1 if y1 <= hi1 else 2)
    j = 0 if y2 <= lo2 else (1 if y2 <= hi2 else 2)
    return (i, j)
