"""Run configuration: a single INI-style file plus command-line overrides.

Sections and keys (all optional unless a command needs them):

    [model]      kind = lotka | generic
                 a, b, c                     (lotka)
                 dim, f1..fn                 (generic; monomial sums, see below)
    [orders]     alpha, beta                 (decimals or fractions like 9/10)
                 orders = a1, a2, ...        (generic)
    [simulate]   y0, t_end, h, escape
    [basin]      y1_range, y2_range, n1, n2, t_end, h, eps, window, escape
    [separatrix] budget, step, max_points
    [output]     dir, format

A generic right-hand side is a comma-separated sum of monomials per state
component, each monomial a coefficient with optional variable powers:

    f1 = 1*y1, -1*y1*y2
    f2 = -1*y2, 1*y1^2*y2
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .basin import GridSpec, ScanModel, ScanSettings
from .errors import ConfigError
from .lotka import LotkaParams, LotkaSystem
from .solver import DEFAULT_ESCAPE_RADIUS
from .stability import RationalOrder, reduce_order

_MONOMIAL = re.compile(r"^\s*([+-]?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)\s*((?:\*\s*y\d+(?:\^\d+)?\s*)*)$")
_FACTOR = re.compile(r"y(\d+)(?:\^(\d+))?")


@dataclass(frozen=True)
class Monomial:
    coefficient: float
    powers: tuple  # exponent per state variable


@dataclass(frozen=True)
class PolynomialRHS:
    """Polynomial vector field parsed from the config; vectorized over batches."""

    dim: int
    terms: tuple  # per component: tuple of Monomial

    def __call__(self, t, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        for i, monos in enumerate(self.terms):
            acc = np.zeros(y.shape[:-1])
            for m in monos:
                term = np.full(y.shape[:-1], m.coefficient)
                for j, p in enumerate(m.powers):
                    if p:
                        term = term * y[..., j] ** p
                acc = acc + term
            out[..., i] = acc
        return out


def parse_monomial_sum(text: str, dim: int, where: str) -> tuple:
    """Parse "coef*y1^p*y2, coef, ..." into Monomial terms."""
    terms = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        m = _MONOMIAL.match(chunk)
        if not m:
            raise ConfigError(
                f"{where}: cannot parse monomial {chunk!r} "
                "(expected e.g. '-1.5*y1^2*y2' or a bare coefficient)"
            )
        coef = float(m.group(1))
        powers = [0] * dim
        for var, expo in _FACTOR.findall(m.group(2)):
            idx = int(var) - 1
            if not (0 <= idx < dim):
                raise ConfigError(f"{where}: variable y{var} out of range for dim={dim}")
            powers[idx] += int(expo) if expo else 1
        terms.append(Monomial(coef, tuple(powers)))
    if not terms:
        raise ConfigError(f"{where}: empty right-hand side")
    return tuple(terms)


@dataclass(frozen=True)
class GenericModel:
    """A polynomial system defined inline in the config."""

    orders: tuple  # RationalOrder per component
    rhs: PolynomialRHS

    def scan_model(self) -> ScanModel:
        eqs = np.zeros((0, self.rhs.dim))
        return ScanModel(
            orders=tuple(o.value for o in self.orders),
            rhs=self.rhs,
            equilibria=eqs,
            nullcline_values=(),
            description={"model": "generic", "dim": self.rhs.dim},
        )


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI command needs, already validated."""

    model_kind: str
    lotka_system: Optional[LotkaSystem] = None
    generic_model: Optional[GenericModel] = None
    y0: tuple = ()
    t_end: float = 80.0
    h: float = 0.01
    escape_radius: float = DEFAULT_ESCAPE_RADIUS
    grid: Optional[GridSpec] = None
    scan: ScanSettings = field(default_factory=ScanSettings)
    separatrix_budget: float = 20.0
    separatrix_step: float = 1e-3
    separatrix_max_points: Optional[int] = 2001
    out_dir: str = "out"
    out_format: str = "csv"


def _get(parser, section, key, cast, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ConfigError(f"[{section}] {key}: missing required key")
        return default
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}: {exc}") from exc


def _float_list(raw: str):
    return tuple(float(x) for x in raw.split(","))


def _pair(raw: str):
    vals = _float_list(raw)
    if len(vals) != 2:
        raise ValueError(f"expected two comma-separated numbers, got {len(vals)}")
    return vals


def load_config(path: str, overrides: Optional[dict] = None) -> RunConfig:
    """Read an INI run file; overrides win over file values."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found or unreadable: {path}")
    overrides = overrides or {}

    kind = _get(parser, "model", "kind", str, default="lotka").strip().lower()
    lotka_system = None
    generic_model = None
    if kind == "lotka":
        a = _get(parser, "model", "a", float, required=True)
        b = _get(parser, "model", "b", float, required=True)
        c = _get(parser, "model", "c", float, required=True)
        alpha = _get(parser, "orders", "alpha", reduce_order, default=RationalOrder(1, 1))
        beta = _get(parser, "orders", "beta", reduce_order, default=RationalOrder(1, 1))
        try:
            lotka_system = LotkaSystem(LotkaParams(a, b, c), alpha, beta)
        except ValueError as exc:
            raise ConfigError(f"[model]/[orders]: {exc}") from exc
    elif kind == "generic":
        dim = _get(parser, "model", "dim", int, required=True)
        if dim < 1:
            raise ConfigError(f"[model] dim: must be >= 1, got {dim}")
        raw_orders = _get(parser, "orders", "orders", str, required=True)
        orders = tuple(reduce_order(tok.strip()) for tok in raw_orders.split(","))
        if len(orders) != dim:
            raise ConfigError(
                f"[orders] orders: got {len(orders)} entries for dim={dim}"
            )
        comps = []
        for i in range(1, dim + 1):
            raw = _get(parser, "model", f"f{i}", str, required=True)
            comps.append(parse_monomial_sum(raw, dim, where=f"[model] f{i}"))
        generic_model = GenericModel(orders=orders, rhs=PolynomialRHS(dim, tuple(comps)))
    else:
        raise ConfigError(f"[model] kind: expected 'lotka' or 'generic', got {kind!r}")

    y0 = _get(parser, "simulate", "y0", _float_list, default=())
    t_end = _get(parser, "simulate", "t_end", float, default=80.0)
    h = _get(parser, "simulate", "h", float, default=0.01)
    escape = _get(parser, "simulate", "escape", float, default=DEFAULT_ESCAPE_RADIUS)

    grid = None
    if parser.has_section("basin"):
        r1 = _get(parser, "basin", "y1_range", _pair, required=True)
        r2 = _get(parser, "basin", "y2_range", _pair, required=True)
        n1 = _get(parser, "basin", "n1", int, required=True)
        n2 = _get(parser, "basin", "n2", int, required=True)
        try:
            grid = GridSpec(r1, r2, n1, n2)
        except ValueError as exc:
            raise ConfigError(f"[basin]: {exc}") from exc
    scan_kwargs = {}
    for key, cast, name in (
        ("t_end", float, "t_end"),
        ("h", float, "h"),
        ("eps", float, "eps"),
        ("window", float, "window_fraction"),
        ("escape", float, "escape_radius"),
    ):
        val = _get(parser, "basin", key, cast) if parser.has_section("basin") else None
        if val is not None:
            scan_kwargs[name] = val
    try:
        scan = ScanSettings(**scan_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[basin]: {exc}") from exc

    budget = _get(parser, "separatrix", "budget", float, default=20.0)
    sep_step = _get(parser, "separatrix", "step", float, default=1e-3)
    max_points = _get(parser, "separatrix", "max_points", int, default=2001)

    out_dir = overrides.get("out_dir") or _get(parser, "output", "dir", str, default="out")
    out_format = (
        overrides.get("out_format") or _get(parser, "output", "format", str, default="csv")
    ).strip().lower()
    if out_format not in ("csv", "json", "svg"):
        raise ConfigError(f"[output] format: expected csv|json|svg, got {out_format!r}")

    if budget < 0.0:
        raise ConfigError(f"[separatrix] budget: must be >= 0, got {budget}")
    if sep_step <= 0.0:
        raise ConfigError(f"[separatrix] step: must be > 0, got {sep_step}")
    if h <= 0.0 or t_end <= 0.0:
        raise ConfigError(f"[simulate]: need t_end > 0 and h > 0, got t_end={t_end}, h={h}")

    return RunConfig(
        model_kind=kind,
        lotka_system=lotka_system,
        generic_model=generic_model,
        y0=tuple(y0),
        t_end=t_end,
        h=h,
        escape_radius=escape,
        grid=grid,
        scan=scan,
        separatrix_budget=budget,
        separatrix_step=sep_step,
        separatrix_max_points=max_points,
        out_dir=out_dir,
        out_format=out_format,
    )
