"""Predictor-corrector (PECE) integration of Caputo fractional ODE systems.

Each state component i carries its own differentiation order alpha_i in
(0, 1].  One step of the scheme, advancing from grid index n to n+1 with
uniform step h, evaluates for every component

    predictor:  yP[n+1] = y[0] + (1/Gamma(a)) * sum_{j<=n} b(j, n+1) f(t_j, y_j)
    corrector:  y[n+1]  = y[0] + (h^a/Gamma(a+2)) *
                          ( f(t_{n+1}, yP[n+1]) + a(0, n+1) f(t_0, y_0)
                            + sum_{1<=j<=n} a(j, n+1) f(t_j, y_j) )

with the classical fractional Adams-Bashforth-Moulton weights

    b(j, n+1) = (h^a / a) * ((n+1-j)^a - (n-j)^a)
    a(0, n+1) = n^(a+1) - (n-a) (n+1)^a
    a(j, n+1) = (n-j+2)^(a+1) + (n-j)^(a+1) - 2 (n-j+1)^(a+1)

The full history enters every step (no truncation), so the total work is
O(N^2).  At alpha = 1 the scheme collapses to the one-step explicit-Euler /
trapezoid PECE pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

DEFAULT_ESCAPE_RADIUS = 1e4


def gamma(x: float) -> float:
    """Gamma function for positive real x.

    Raises DomainError for non-positive or non-finite arguments.  Relative
    accuracy is that of the platform libm (well below 1e-12 on [0.5, 20]).
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"gamma requires a positive finite argument, got {x!r}")
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise DomainError(f"gamma({x}) overflows double precision") from exc


def caputo_power_derivative(p: float, alpha: float, t: float) -> float:
    """Exact Caputo derivative of order alpha of the monomial t**p.

    Returns Gamma(p+1)/Gamma(p-alpha+1) * t**(p-alpha).  Requires p >= alpha
    (for p < alpha the formula does not describe the Caputo derivative);
    used as an analytic oracle for the integrator.
    """
    p = float(p)
    alpha = float(alpha)
    t = float(t)
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"order must lie in (0, 1], got {alpha}")
    if p < alpha:
        raise DomainError(f"power rule needs p >= alpha, got p={p}, alpha={alpha}")
    if t < 0.0:
        raise DomainError(f"t must be >= 0, got {t}")
    return gamma(p + 1.0) / gamma(p - alpha + 1.0) * t ** (p - alpha)


@dataclass(frozen=True)
class FractionalIVP:
    """A Caputo initial-value problem on a uniform grid.

    rhs maps (t, y) -> dy where y has the same length as orders; set
    vectorized=True if rhs also accepts stacked states of shape (batch, d)
    and returns the same shape (enables the fast batched kernel).
    """

    orders: tuple
    rhs: Callable
    y0: tuple
    t_end: float
    h: float
    vectorized: bool = False

    def __post_init__(self):
        orders = tuple(float(a) for a in self.orders)
        y0 = tuple(float(v) for v in self.y0)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "y0", y0)
        if len(orders) == 0 or len(orders) != len(y0):
            raise ValueError(
                f"orders ({len(orders)}) and y0 ({len(y0)}) must have equal nonzero length"
            )
        for a in orders:
            if not (math.isfinite(a) and 0.0 < a <= 1.0):
                raise DomainError(f"every order must lie in (0, 1], got {a}")
        for v in y0:
            if not math.isfinite(v):
                raise ValueError(f"initial state must be finite, got {v}")
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise ValueError(f"step size must be positive, got {self.h}")
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise ValueError(f"horizon must be positive, got {self.t_end}")
        if self.t_end / self.h < 1.0:
            raise ValueError("horizon must cover at least one step (t_end/h >= 1)")

    @property
    def dim(self) -> int:
        return len(self.y0)

    @property
    def n_steps(self) -> int:
        """Number of steps; the horizon is rounded to a whole step count."""
        return max(1, int(round(self.t_end / self.h)))


@dataclass(frozen=True)
class Trajectory:
    """Integrator output: uniform time stamps and one state row per stamp."""

    times: np.ndarray
    states: np.ndarray
    escaped: bool = False

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have equal length")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _weight_tables(alphas: np.ndarray, n_steps: int):
    """Precompute per-component weight tables for the PECE scheme.

    Returns (c_store, d_store, a0); the first two are stored reversed so
    that the slice [N-1-n:] (resp. [N-n:]) is exactly the weight vector
    aligned with the stored history at step n.
    """
    N = n_steps
    al = alphas[None, :]
    m = np.arange(1, N + 1, dtype=float)[:, None]
    c = m ** al - (m - 1.0) ** al                                   # (N, d)
    mm = np.arange(0, N, dtype=float)[:, None]
    dtab = (mm + 2.0) ** (al + 1.0) - 2.0 * (mm + 1.0) ** (al + 1.0) + mm ** (al + 1.0)
    nn = np.arange(0, N, dtype=float)[:, None]
    a0 = nn ** (al + 1.0) - (nn - al) * (nn + 1.0) ** al            # (N, d)
    c_store = np.ascontiguousarray(c[::-1].T)                       # (d, N)
    d_store = np.ascontiguousarray(dtab[::-1].T)                    # (d, N)
    return c_store, d_store, a0


def abm_solve_batch(
    orders: Sequence[float],
    rhs: Callable,
    y0_batch: np.ndarray,
    t_end: float,
    h: float,
    escape_radius: float = DEFAULT_ESCAPE_RADIUS,
    vectorized: bool = True,
):
    """Integrate many independent copies of one system in lockstep.

    y0_batch has shape (batch, d).  Returns (states, escaped, escape_step)
    with states of shape (n_steps+1, batch, d).  Columns that leave the
    escape radius (or turn non-finite) are frozen at their last valid state;
    escape_step[k] is the index of the last trustworthy row for column k.

    The arithmetic per column is identical whatever the batch is grouped
    with, apart from floating-point reduction order inside the BLAS dot;
    callers that need bitwise reproducibility must keep the batch
    decomposition fixed (scan_basin does).
    """
    y0_batch = np.atleast_2d(np.asarray(y0_batch, dtype=float))
    B, d = y0_batch.shape
    alphas = np.asarray([float(a) for a in orders], dtype=float)
    if alphas.shape != (d,):
        raise ValueError(f"orders length {alphas.size} does not match state dimension {d}")
    if np.any(alphas <= 0.0) or np.any(alphas > 1.0):
        raise DomainError("every order must lie in (0, 1]")
    N = max(1, int(round(t_end / h)))

    def eval_rhs(t, Y):
        if vectorized:
            out = np.asarray(rhs(t, Y), dtype=float)
        else:
            out = np.array([rhs(t, row) for row in Y], dtype=float)
        if out.shape != (B, d):
            raise ValueError(f"rhs returned shape {out.shape}, expected {(B, d)}")
        return out

    c_store, d_store, a0 = _weight_tables(alphas, N)
    h_pow = h ** alphas
    pred_pref = h_pow / np.array([math.gamma(a + 1.0) for a in alphas])
    corr_pref = h_pow / np.array([math.gamma(a + 2.0) for a in alphas])

    states = np.empty((N + 1, B, d))
    states[0] = y0_batch
    F = np.empty((d, N + 1, B))
    f0 = eval_rhs(0.0, y0_batch)
    if not np.isfinite(f0).all():
        raise ValueError("rhs is not finite at the initial state")
    F[:, 0, :] = f0.T

    active = np.ones(B, dtype=bool)
    escaped = np.zeros(B, dtype=bool)
    escape_step = np.full(B, N, dtype=np.int64)
    yp = np.empty((B, d))
    ynew = np.empty((B, d))
    y_init = y0_batch.copy()

    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(N):
            t1 = (n + 1) * h
            for i in range(d):
                s_pred = c_store[i, N - 1 - n:] @ F[i, : n + 1, :]
                yp[:, i] = y_init[:, i] + pred_pref[i] * s_pred
            fp = eval_rhs(t1, yp)
            for i in range(d):
                if n > 0:
                    s_corr = d_store[i, N - n:] @ F[i, 1 : n + 1, :]
                else:
                    s_corr = 0.0
                ynew[:, i] = y_init[:, i] + corr_pref[i] * (
                    fp[:, i] + a0[n, i] * F[i, 0, :] + s_corr
                )
            frozen_before = ~active
            if frozen_before.any():
                ynew[frozen_before] = states[n, frozen_before]  # hold the frozen value
            finite = np.isfinite(ynew).all(axis=1)
            inside = finite & (np.abs(ynew).max(axis=1) <= escape_radius)
            newly_bad = active & ~inside
            if newly_bad.any():
                for k in np.nonzero(newly_bad)[0]:
                    if finite[k]:
                        escape_step[k] = n + 1        # keep the escaping state
                    else:
                        escape_step[k] = n            # last finite state wins
                        ynew[k] = states[n, k]
                    escaped[k] = True
                active[newly_bad] = False
            states[n + 1] = ynew
            fn = eval_rhs(t1, ynew)
            F[:, n + 1, :] = fn.T
            inactive = ~active
            if inactive.any():
                F[:, n + 1, inactive] = 0.0
    return states, escaped, escape_step


def abm_solve(ivp: FractionalIVP, escape_radius: float = DEFAULT_ESCAPE_RADIUS) -> Trajectory:
    """Integrate a FractionalIVP and return its trajectory.

    If any state component exceeds escape_radius the run stops early and the
    truncated trajectory comes back with escaped=True; a rhs that is already
    non-finite at the initial state is a usage error and raises.
    """
    states, escaped, escape_step = abm_solve_batch(
        ivp.orders,
        ivp.rhs,
        np.asarray(ivp.y0, dtype=float)[None, :],
        ivp.t_end,
        ivp.h,
        escape_radius=escape_radius,
        vectorized=ivp.vectorized,
    )
    last = int(escape_step[0])
    times = np.arange(last + 1, dtype=float) * ivp.h
    return Trajectory(times=times, states=states[: last + 1, 0, :], escaped=bool(escaped[0]))


def predictor_weights(alpha: float, n: int, h: float) -> np.ndarray:
    """Weights b(j, n+1) for j = 0..n; all strictly positive on (0, 1]."""
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"order must lie in (0, 1], got {alpha}")
    j = np.arange(0, n + 1, dtype=float)
    return (h ** alpha / alpha) * ((n + 1 - j) ** alpha - (n - j) ** alpha)
