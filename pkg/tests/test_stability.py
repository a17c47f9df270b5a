"""Stability module tests: rational orders, the characteristic polynomial,
root extraction, and the sector classification."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracdyn.errors import DomainError, NotAnEquilibriumError, PrecisionError
from fracdyn.lotka import LotkaParams, jacobian as lotka_jacobian, rhs as lotka_rhs
from fracdyn.stability import (
    CharacteristicPolynomial,
    RationalOrder,
    SectorProblem,
    Verdict,
    analyze_equilibrium,
    characteristic_polynomial,
    classify_sector,
    common_multiple,
    finite_difference_jacobian,
    polynomial_roots,
    reduce_order,
)


class TestReduceOrder:
    def test_decimal(self):
        o = reduce_order(0.9)
        assert (o.v, o.u) == (9, 10)

    def test_integer_one(self):
        assert (reduce_order(1.0).v, reduce_order(1.0).u) == (1, 1)

    def test_gcd_reduction(self):
        o = reduce_order(Fraction(6, 8))
        assert (o.v, o.u) == (3, 4)

    def test_string_fraction(self):
        o = reduce_order("9/10")
        assert (o.v, o.u) == (9, 10)

    def test_rational_order_passthrough(self):
        o = RationalOrder(6, 8)
        assert (o.v, o.u) == (3, 4)
        assert reduce_order(o) is o

    @pytest.mark.parametrize("bad", [0.0, -0.5, float("nan"), float("inf"), "x/y"])
    def test_domain_errors(self, bad):
        with pytest.raises((DomainError, PrecisionError)):
            reduce_order(bad)

    def test_unrepresentable_decimal(self):
        with pytest.raises(PrecisionError):
            reduce_order(1.0 / 1009.0)  # denominator above the cap

    @given(st.integers(1, 999), st.integers(1, 1000))
    @settings(max_examples=80, deadline=None)
    def test_float_roundtrip(self, v, u):
        o = reduce_order(v / u)
        assert abs(o.value - v / u) <= 1e-9


class TestCommonMultiple:
    def test_examples(self):
        assert common_multiple([RationalOrder(9, 10), RationalOrder(4, 5)]) == 10
        assert common_multiple([RationalOrder(1, 1), RationalOrder(1, 1)]) == 1
        assert common_multiple([RationalOrder(1, 2), RationalOrder(1, 3)]) == 6

    def test_empty(self):
        with pytest.raises(ValueError):
            common_multiple([])


def _problem(J, orders, M=0):
    return SectorProblem(np.asarray(J, dtype=float), tuple(reduce_order(o) for o in orders), M=M)


class TestCharacteristicPolynomial:
    def test_double_negative_identity(self):
        # J = -I with unit exponents: (lambda + 1)^2
        poly = characteristic_polynomial(_problem([[-1.0, 0.0], [0.0, -1.0]], ("1/1", "1/1")))
        assert np.allclose(poly.coeffs, [1.0, 2.0, 1.0])

    def test_decoupled_orders_9_10_and_4_5(self):
        # diag(a, -c) with a=-1, c=1: (lambda^9 + 1)(lambda^8 + 1)
        poly = characteristic_polynomial(_problem([[-1.0, 0.0], [0.0, -1.0]], ("9/10", "4/5")))
        expected = np.convolve([1.0] + [0.0] * 8 + [1.0], [1.0] + [0.0] * 7 + [1.0])
        assert poly.degree == 17
        assert np.allclose(poly.coeffs, expected)

    def test_coupled_coexistence_form(self):
        # J = [[0, -c], [a, 0]] with a = c = 1: lambda^17 + 1
        poly = characteristic_polynomial(_problem([[0.0, -1.0], [1.0, 0.0]], ("9/10", "4/5")))
        expected = np.zeros(18)
        expected[0] = 1.0
        expected[-1] = 1.0
        assert np.allclose(poly.coeffs, expected)

    def test_degree_equals_exponent_sum(self):
        prob = _problem(np.eye(3), ("1/2", "1/3", "5/6"))
        assert characteristic_polynomial(prob).degree == sum(prob.exponents)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            _problem([[1.0, 0.0], [0.0, 1.0]], ("1/2",))

    def test_dimension_cap(self):
        with pytest.raises(ValueError):
            characteristic_polynomial(_problem(np.eye(9), ["1/2"] * 9))


class TestPolynomialRoots:
    def test_quadratic(self):
        roots = polynomial_roots(CharacteristicPolynomial(np.array([1.0, 0.0, -1.0])))
        assert np.allclose(sorted(roots.real), [-1.0, 1.0])
        assert np.allclose(roots.imag, 0.0)

    def test_seventeenth_roots_of_minus_one(self):
        coeffs = np.zeros(18)
        coeffs[0] = 1.0
        coeffs[-1] = 1.0
        roots = polynomial_roots(CharacteristicPolynomial(coeffs))
        assert len(roots) == 17
        assert np.allclose(np.abs(roots), 1.0, atol=1e-10)
        angles = np.sort(np.mod(np.angle(roots), 2 * math.pi))
        expected = np.sort(np.mod((2 * np.arange(17) + 1) * math.pi / 17, 2 * math.pi))
        assert np.allclose(angles, expected, atol=1e-9)

    def test_ninth_roots_of_minus_one(self):
        coeffs = np.zeros(10)
        coeffs[0] = 1.0
        coeffs[-1] = 1.0
        roots = polynomial_roots(CharacteristicPolynomial(coeffs))
        assert np.allclose(np.abs(roots), 1.0, atol=1e-10)
        assert np.min(np.abs(np.angle(roots))) == pytest.approx(math.pi / 9, abs=1e-9)

    def test_multiple_root_collapses_to_machine_precision(self):
        # (lambda - 1)^2 (lambda + 2) expanded
        coeffs = np.convolve(np.convolve([1.0, -1.0], [1.0, -1.0]), [1.0, 2.0])
        roots = polynomial_roots(CharacteristicPolynomial(coeffs))
        assert np.abs(roots - 1.0).min() < 1e-10
        assert (np.abs(roots - 1.0) < 1e-10).sum() == 2

    def test_residual_contract(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            true_roots = rng.normal(size=6) + 1j * rng.normal(size=6)
            coeffs = np.real_if_close(np.poly(true_roots))
            poly = CharacteristicPolynomial(np.asarray(np.poly(true_roots).real))
            roots = polynomial_roots(poly)
            d = poly.degree
            for z in roots:
                assert abs(np.polyval(poly.coeffs, z)) / (1.0 + abs(z) ** d) <= 1e-8

    def test_degree_zero_rejected(self):
        with pytest.raises(ValueError):
            CharacteristicPolynomial(np.array([1.0]))


class TestClassifySector:
    def test_negative_real_axis_stable(self):
        rep = classify_sector(np.array([-1.0 + 0j, -1.0 + 0j]), M=1)
        assert rep.verdict is Verdict.STABLE
        assert rep.min_abs_arg == pytest.approx(math.pi)

    def test_pi_over_17_clears_pi_over_20(self):
        coeffs = np.zeros(18)
        coeffs[0] = 1.0
        coeffs[-1] = 1.0
        roots = polynomial_roots(CharacteristicPolynomial(coeffs))
        rep = classify_sector(roots, M=10)
        assert rep.verdict is Verdict.STABLE
        assert rep.min_abs_arg == pytest.approx(math.pi / 17, abs=1e-12)
        assert rep.sector_half_angle == pytest.approx(math.pi / 20)

    def test_root_at_one_unstable(self):
        for M in (1, 4, 10):
            rep = classify_sector(np.array([1.0 + 0j, -1.0 + 0j]), M=M)
            assert rep.verdict is Verdict.UNSTABLE
            assert rep.witness == 1.0 + 0j

    def test_marginal_band(self):
        M = 2
        half = math.pi / (2 * M)
        on_boundary = np.exp(1j * half)
        assert classify_sector(np.array([on_boundary]), M=M).verdict is Verdict.MARGINAL
        just_inside = np.exp(1j * (half - 5e-9))
        assert classify_sector(np.array([just_inside]), M=M).verdict is Verdict.MARGINAL
        clearly_inside = np.exp(1j * (half - 1e-6))
        assert classify_sector(np.array([clearly_inside]), M=M).verdict is Verdict.UNSTABLE
        clearly_outside = np.exp(1j * (half + 1e-6))
        assert classify_sector(np.array([clearly_outside]), M=M).verdict is Verdict.STABLE


class TestAnalyzeEquilibrium:
    def test_origin_stable_for_negative_growth(self):
        p = LotkaParams(-1.0, -1.0, 1.0)
        rep = analyze_equilibrium(
            lambda y: lotka_rhs(p, y), (0.0, 0.0), ("1/2", "1/2"),
            jacobian=lambda y: lotka_jacobian(p, y),
        )
        assert rep.verdict is Verdict.STABLE

    def test_coexistence_stable_for_spiral_parameters(self):
        p = LotkaParams(1.0, -1.0, 1.0)
        rep = analyze_equilibrium(
            lambda y: lotka_rhs(p, y), (-1.0, -1.0), ("9/10", "4/5"),
            jacobian=lambda y: lotka_jacobian(p, y),
        )
        assert rep.verdict is Verdict.STABLE
        assert rep.M == 10

    def test_saddle_unstable(self):
        p = LotkaParams(-1.0, -1.0, 1.0)
        rep = analyze_equilibrium(
            lambda y: lotka_rhs(p, y), (-1.0, 1.0), ("1/2", "1/2"),
        )
        assert rep.verdict is Verdict.UNSTABLE

    def test_finite_difference_fallback_matches_analytic(self):
        p = LotkaParams(0.7, 1.3, -0.4)
        rep_fd = analyze_equilibrium(lambda y: lotka_rhs(p, y), (0.0, 0.0), ("1/2", "2/3"))
        assert np.allclose(rep_fd.jacobian, lotka_jacobian(p, (0.0, 0.0)), atol=1e-5)

    def test_rejects_non_equilibrium(self):
        p = LotkaParams(1.0, -1.0, 1.0)
        with pytest.raises(NotAnEquilibriumError) as exc:
            analyze_equilibrium(lambda y: lotka_rhs(p, y), (0.5, 0.5), ("1/2", "1/2"))
        assert exc.value.residual > 1e-8

    def test_rejects_orders_above_one(self):
        p = LotkaParams(1.0, -1.0, 1.0)
        with pytest.raises(DomainError):
            analyze_equilibrium(lambda y: lotka_rhs(p, y), (0.0, 0.0), ("3/2", "1/2"))


class TestFiniteDifferenceJacobian:
    @given(
        st.floats(min_value=-2.0, max_value=2.0),
        st.floats(min_value=-2.0, max_value=2.0).filter(lambda b: abs(b) > 0.1),
        st.floats(min_value=-2.0, max_value=2.0),
        st.floats(min_value=-3.0, max_value=3.0),
        st.floats(min_value=-3.0, max_value=3.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_matches_analytic_lotka_jacobian(self, a, b, c, y1, y2):
        p = LotkaParams(a, b, c)
        J_fd = finite_difference_jacobian(lambda y: lotka_rhs(p, y), (y1, y2))
        assert np.allclose(J_fd, lotka_jacobian(p, (y1, y2)), atol=1e-5)


class TestRepresentationInvariance:
    @pytest.mark.parametrize("k", [2, 3, 5])
    def test_verdict_survives_common_factor(self, k):
        cases = [
            ([[-1.0, 0.0], [0.0, -1.0]], ("9/10", "4/5")),
            ([[0.0, -1.0], [1.0, 0.0]], ("9/10", "4/5")),
            ([[0.0, 2.0], [-0.5, 0.0]], ("3/10", "1/2")),
            ([[1.0, 0.0], [0.0, -1.0]], ("1/2", "1/2")),
        ]
        for J, orders in cases:
            base = _problem(J, orders)
            scaled = _problem(J, orders, M=k * base.M)
            v_base = classify_sector(
                polynomial_roots(characteristic_polynomial(base)), base.M
            ).verdict
            v_scaled = classify_sector(
                polynomial_roots(characteristic_polynomial(scaled)), scaled.M
            ).verdict
            assert v_base == v_scaled


class TestFactoredFormAgreement:
    @pytest.mark.parametrize("a,c", [(-1.0, 1.0), (-2.0, 0.5), (-0.5, 2.0)])
    def test_diagonal_roots_match_analytic_union(self, a, c):
        # det factors as (lambda^u - a)(lambda^v + c) for diag(a, -c)
        orders = (reduce_order("9/10"), reduce_order("4/5"))
        prob = _problem([[a, 0.0], [0.0, -c]], orders)
        u, v = prob.exponents
        roots = polynomial_roots(characteristic_polynomial(prob))
        h1 = np.arange(u)
        analytic_u = np.abs(a) ** (1.0 / u) * np.exp(1j * (2 * h1 + 1) * math.pi / u)
        h2 = np.arange(v)
        analytic_v = c ** (1.0 / v) * np.exp(1j * (2 * h2 + 1) * math.pi / v)
        analytic = np.concatenate([analytic_u, analytic_v])
        # match greedily
        remaining = list(roots)
        for z in analytic:
            dists = [abs(z - w) for w in remaining]
            kmin = int(np.argmin(dists))
            assert dists[kmin] < 1e-7
            remaining.pop(kmin)
