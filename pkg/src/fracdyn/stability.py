"""Sector stability test for incommensurate linear fractional systems.

For a system D^(a_i) x_i = sum_j J[i][j] x_j with rational orders
a_i = v_i/u_i in lowest terms and M the least common multiple of the u_i,
every root of

    det(diag(lambda^(M a_1), ..., lambda^(M a_n)) - J) = 0

must satisfy |arg(lambda)| > pi/(2M) for asymptotic stability.  The same
test applies to an equilibrium of a nonlinear system through its Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, NotAnEquilibriumError, PrecisionError

MAX_DECIMAL_DENOMINATOR = 1000
DECIMAL_RECOVERY_TOL = 1e-9
DEFAULT_TOL_BAND = 1e-8
RESIDUAL_BOUND = 1e-8
FD_STEP = 1e-6


class Verdict(Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"

    def __str__(self) -> str:  # JSON / report friendliness
        return self.value


@dataclass(frozen=True)
class RationalOrder:
    """A differentiation order v/u stored in lowest terms."""

    v: int
    u: int

    def __post_init__(self):
        if self.u <= 0 or self.v <= 0:
            raise DomainError(f"order must be positive, got {self.v}/{self.u}")
        g = math.gcd(self.v, self.u)
        object.__setattr__(self, "v", self.v // g)
        object.__setattr__(self, "u", self.u // g)

    @property
    def value(self) -> float:
        return self.v / self.u

    def as_fraction(self) -> Fraction:
        return Fraction(self.v, self.u)

    def __str__(self) -> str:
        return f"{self.v}/{self.u}"


def reduce_order(value) -> RationalOrder:
    """Coerce a float, Fraction, "v/u" string, or RationalOrder to lowest terms.

    Decimal inputs are recovered as the nearest fraction with denominator at
    most 1000 (continued-fraction convergents, via Fraction.limit_denominator);
    if no such fraction lies within 1e-9 a PrecisionError is raised.
    """
    if isinstance(value, RationalOrder):
        return value
    if isinstance(value, Fraction):
        if value <= 0:
            raise DomainError(f"order must be positive, got {value}")
        return RationalOrder(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, _, den = text.partition("/")
            try:
                return reduce_order(Fraction(int(num), int(den)))
            except (ValueError, ZeroDivisionError) as exc:
                raise DomainError(f"cannot parse order {value!r}") from exc
        try:
            value = float(text)
        except ValueError as exc:
            raise DomainError(f"cannot parse order {value!r}") from exc
    if isinstance(value, int):
        if value <= 0:
            raise DomainError(f"order must be positive, got {value}")
        return RationalOrder(value, 1)
    x = float(value)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"order must be a positive finite number, got {x!r}")
    frac = Fraction(x).limit_denominator(MAX_DECIMAL_DENOMINATOR)
    if frac <= 0 or abs(float(frac) - x) > DECIMAL_RECOVERY_TOL:
        raise PrecisionError(
            f"no fraction with denominator <= {MAX_DECIMAL_DENOMINATOR} "
            f"matches {x!r} within {DECIMAL_RECOVERY_TOL}"
        )
    return RationalOrder(frac.numerator, frac.denominator)


def common_multiple(orders: Sequence[RationalOrder]) -> int:
    """Least common multiple of the reduced denominators."""
    orders = list(orders)
    if not orders:
        raise ValueError("need at least one order")
    return math.lcm(*(o.u for o in orders))


@dataclass(frozen=True)
class SectorProblem:
    """Jacobian plus rational orders, ready for the sector test.

    M defaults to the least common multiple of the denominators; a larger
    common multiple may be passed explicitly (the verdict is invariant, the
    polynomial degree and the sector half-angle both scale by the same
    factor).
    """

    jacobian: np.ndarray
    orders: tuple
    M: int = 0

    def __post_init__(self):
        J = np.asarray(self.jacobian, dtype=float)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError(f"jacobian must be square, got shape {J.shape}")
        orders = tuple(reduce_order(o) for o in self.orders)
        if len(orders) != J.shape[0]:
            raise ValueError(
                f"{len(orders)} orders for a {J.shape[0]}-dimensional jacobian"
            )
        if not np.isfinite(J).all():
            raise ValueError("jacobian entries must be finite")
        M = self.M if self.M else common_multiple(orders)
        for o in orders:
            if M % o.u != 0:
                raise ValueError(f"M={M} is not a multiple of denominator {o.u}")
        object.__setattr__(self, "jacobian", J)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "M", int(M))

    @property
    def dim(self) -> int:
        return self.jacobian.shape[0]

    @property
    def exponents(self) -> tuple:
        """Integer powers M*v_i/u_i appearing on the diagonal."""
        return tuple(self.M * o.v // o.u for o in self.orders)


@dataclass(frozen=True)
class CharacteristicPolynomial:
    """Monic polynomial in lambda, coefficients from highest degree down."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or len(c) < 2:
            raise ValueError("need a degree >= 1 coefficient vector")
        if not np.isfinite(c).all():
            raise ValueError("coefficients must be finite")
        if c[0] != 1.0:
            raise ValueError("polynomial must be monic")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return np.polyval(self.coeffs, z)


def _poly_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.convolve(p, q)


def _poly_add(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    n = max(len(p), len(q))
    out = np.zeros(n)
    out[n - len(p):] += p
    out[n - len(q):] += q
    return out


def characteristic_polynomial(problem: SectorProblem) -> CharacteristicPolynomial:
    """Expand det(diag(lambda^e_i) - J) by cofactors (n <= 8)."""
    n = problem.dim
    if n > 8:
        raise ValueError(f"cofactor expansion supports n <= 8, got {n}")
    J = problem.jacobian
    exps = problem.exponents
    entries = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == j:
                p = np.zeros(exps[i] + 1)
                p[0] = 1.0
                p[-1] += -J[i, j]
            else:
                p = np.array([-J[i, j]])
            row.append(p)
        entries.append(row)

    def det(rows, cols):
        if len(rows) == 1:
            return entries[rows[0]][cols[0]]
        acc = np.zeros(1)
        r0 = rows[0]
        for k, cc in enumerate(cols):
            e = entries[r0][cc]
            if len(e) == 1 and e[0] == 0.0:
                continue
            sub = det(rows[1:], cols[:k] + cols[k + 1:])
            term = _poly_mul(e, sub)
            acc = _poly_add(acc, term if k % 2 == 0 else -term)
        return acc

    p = det(list(range(n)), list(range(n)))
    degree = sum(exps)
    if len(p) < degree + 1:
        p = np.concatenate([np.zeros(degree + 1 - len(p)), p])
    else:
        p = p[len(p) - degree - 1:]
    return CharacteristicPolynomial(p)


def _normalized_residual(coeffs: np.ndarray, z: complex, degree: int) -> float:
    return abs(np.polyval(coeffs, z)) / (1.0 + abs(z) ** degree)


def polynomial_roots(
    poly: CharacteristicPolynomial,
    cluster_tol: float = 5e-4,
) -> np.ndarray:
    """All roots with multiplicity, companion-matrix eigenvalues plus polish.

    Eigenvalue estimates of an m-fold root scatter on a radius ~eps^(1/m)
    circle around it.  Clusters tighter than cluster_tol are therefore
    collapsed to their centroid and polished by Newton iteration on the
    (m-1)-th derivative, which has a simple zero at the multiple root; the
    replacement is kept only when it does not worsen the normalized residual
    max|p(z)| / (1 + |z|^d).  Pass cluster_tol=0 to disable collapsing.
    """
    coeffs = poly.coeffs
    d = poly.degree
    roots = np.roots(coeffs).astype(complex)
    if cluster_tol <= 0.0 or d == 1:
        return np.sort_complex(roots)
    order = np.lexsort((roots.imag, roots.real))
    used = np.zeros(d, dtype=bool)
    out = []
    for idx in order:
        if used[idx]:
            continue
        members = [idx]
        used[idx] = True
        for jdx in order:
            if not used[jdx] and abs(roots[jdx] - roots[idx]) <= cluster_tol:
                members.append(jdx)
                used[jdx] = True
        zs = roots[members]
        m = len(members)
        if m == 1:
            out.append(zs[0])
            continue
        z = zs.mean()
        g = np.polyder(coeffs, m - 1)
        dg = np.polyder(g)
        for _ in range(5):
            dgv = np.polyval(dg, z)
            if dgv == 0:
                break
            step = np.polyval(g, z) / dgv
            if abs(step) > cluster_tol:
                break
            z = z - step
            if abs(step) < 1e-15:
                break
        res_new = _normalized_residual(coeffs, z, d)
        res_old = max(_normalized_residual(coeffs, w, d) for w in zs)
        if res_new <= max(res_old, RESIDUAL_BOUND):
            out.extend([z] * m)
        else:
            out.extend(zs)
    return np.sort_complex(np.asarray(out))


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the sector test, with enough context to reproduce it."""

    roots: np.ndarray
    abs_args: np.ndarray
    M: int
    sector_half_angle: float
    verdict: Verdict
    witness: complex
    min_abs_arg: float
    tol_band: float
    polynomial: Optional[CharacteristicPolynomial] = None
    jacobian: Optional[np.ndarray] = None
    equilibrium: Optional[tuple] = None

    def as_dict(self) -> dict:
        """JSON-ready summary."""
        out = {
            "verdict": self.verdict.value,
            "M": self.M,
            "sector_half_angle": self.sector_half_angle,
            "min_abs_arg": self.min_abs_arg,
            "witness": {"re": self.witness.real, "im": self.witness.imag},
            "roots": [
                {"re": z.real, "im": z.imag, "abs_arg": float(a)}
                for z, a in zip(self.roots, self.abs_args)
            ],
        }
        if self.polynomial is not None:
            out["polynomial"] = list(map(float, self.polynomial.coeffs))
        if self.equilibrium is not None:
            out["equilibrium"] = list(map(float, self.equilibrium))
        return out


def classify_sector(
    roots: np.ndarray,
    M: int,
    tol_band: float = DEFAULT_TOL_BAND,
) -> StabilityReport:
    """Compare every root argument against the half-angle pi/(2M).

    Stable when the smallest |arg| clears the half-angle by more than
    tol_band, unstable when it falls short by more than tol_band, marginal
    inside the band (the theorem is silent on the boundary, so no stability
    claim is made there).
    """
    roots = np.asarray(roots, dtype=complex)
    if roots.size == 0:
        raise ValueError("need at least one root")
    if M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    if tol_band < 0.0:
        raise ValueError("tol_band must be >= 0")
    abs_args = np.abs(np.angle(roots))
    k = int(np.argmin(abs_args))
    min_arg = float(abs_args[k])
    half = math.pi / (2.0 * M)
    if min_arg > half + tol_band:
        verdict = Verdict.STABLE
    elif min_arg < half - tol_band:
        verdict = Verdict.UNSTABLE
    else:
        verdict = Verdict.MARGINAL
    return StabilityReport(
        roots=roots,
        abs_args=abs_args,
        M=int(M),
        sector_half_angle=half,
        verdict=verdict,
        witness=complex(roots[k]),
        min_abs_arg=min_arg,
        tol_band=tol_band,
    )


def finite_difference_jacobian(
    rhs: Callable,
    point: Sequence[float],
    step: float = FD_STEP,
) -> np.ndarray:
    """Central-difference Jacobian of y -> rhs(y) at a point."""
    x = np.asarray(point, dtype=float)
    n = x.size
    J = np.empty((n, n))
    for j in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[j] += step
        xm[j] -= step
        J[:, j] = (np.asarray(rhs(xp), dtype=float) - np.asarray(rhs(xm), dtype=float)) / (
            2.0 * step
        )
    return J


def analyze_equilibrium(
    rhs: Callable,
    point: Sequence[float],
    orders: Sequence,
    jacobian=None,
    tol_band: float = DEFAULT_TOL_BAND,
    M: int = 0,
) -> StabilityReport:
    """Sector classification of an equilibrium of a nonlinear system.

    rhs maps a state vector to its derivative vector and must vanish at the
    point (residual <= 1e-8), otherwise NotAnEquilibriumError.  jacobian may
    be an explicit matrix or a callable point -> matrix; when omitted it is
    approximated by central differences with step 1e-6.
    """
    point = tuple(float(v) for v in point)
    orders = tuple(reduce_order(o) for o in orders)
    for o in orders:
        if o.value > 1.0:
            raise DomainError(
                f"equilibrium analysis needs orders in (0, 1], got {o}; "
                "rewrite higher-order systems in a lifted form first"
            )
    residual = float(np.max(np.abs(np.asarray(rhs(np.asarray(point)), dtype=float))))
    if not residual <= 1e-8:
        raise NotAnEquilibriumError(point, residual)
    if jacobian is None:
        J = finite_difference_jacobian(rhs, point)
    elif callable(jacobian):
        J = np.asarray(jacobian(np.asarray(point)), dtype=float)
    else:
        J = np.asarray(jacobian, dtype=float)
    problem = SectorProblem(jacobian=J, orders=orders, M=M)
    poly = characteristic_polynomial(problem)
    roots = polynomial_roots(poly)
    report = classify_sector(roots, problem.M, tol_band=tol_band)
    return StabilityReport(
        roots=report.roots,
        abs_args=report.abs_args,
        M=report.M,
        sector_half_angle=report.sector_half_angle,
        verdict=report.verdict,
        witness=report.witness,
        min_abs_arg=report.min_abs_arg,
        tol_band=report.tol_band,
        polynomial=poly,
        jacobian=J,
        equilibrium=point,
    )
