from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from orthocensus.qlattice import det
from orthocensus.reidtai import QuotientSingularity
from orthocensus.toric import (
    CHARTS,
    Cone,
    Fan,
    G4,
    LAMBDA,
    NonCyclicQuotient,
    PRINTED_CHART_WEIGHTS,
    SIGMA,
    SIGMA4,
    SIGMA_SUBDIVISION,
    V3,
    V4,
    box_element,
    cone_index,
    fan_walls_ok,
    induced_weight,
    is_canonical,
    is_subdivision_of,
    movediv_coeffs,
    quotient_type,
    ray_discrepancy,
    section_count,
    section_points,
)

Q = QuotientSingularity.parse


class TestCones:
    def test_index(self):
        assert cone_index(Cone(((1, 0, 0), (0, 1, 0), (0, 0, 1)))) == 1
        assert cone_index(SIGMA) == 6

    def test_subdivision_is_smooth(self):
        assert [cone_index(c) for c in SIGMA_SUBDIVISION.maximal_cones()] == [1, 1, 1, 1]
        assert is_subdivision_of(SIGMA_SUBDIVISION, SIGMA)
        assert [cone_index(c) for c in SIGMA4] == [1, 1, 1, 1]

    def test_missing_cone_is_not_subdivision(self):
        partial = Fan(SIGMA_SUBDIVISION.rays, SIGMA_SUBDIVISION.cones[:3])
        assert not is_subdivision_of(partial, SIGMA)

    def test_errors(self):
        with pytest.raises(ValueError):
            Cone(((2, 0), (0, 1)))
        with pytest.raises(ValueError):
            cone_index(Cone(((1, 0, 0), (0, 1, 0))))
        with pytest.raises(ValueError):
            cone_index(Cone(((1, 0), (1, 0))))


class TestQuotient:
    def test_sigma(self):
        q = quotient_type(SIGMA)
        assert q.m == 6
        assert q.canonical_class() == Q("1/6(4,5,5)").canonical_class()

    def test_examples(self):
        assert quotient_type(Cone(((2, -1), (0, 1)))) == Q("1/2(1,1)")
        assert quotient_type(Cone(((1, 0), (0, 1)))).is_trivial()
        assert quotient_type(Cone(((1, 0), (1, 3)))).canonical_class() == Q("1/3(1,2)").canonical_class()

    def test_non_cyclic(self):
        with pytest.raises(NonCyclicQuotient) as e:
            quotient_type(Cone(((1, 0, 0), (1, 2, 0), (1, 0, 2))))
        assert e.value.invariant_factors == [2, 2]

    def test_against_sympy_snf(self):
        # the order of the group is the product of invariant factors
        from sympy.matrices.normalforms import smith_normal_form
        M = sympy.Matrix(SIGMA.rays)
        d = smith_normal_form(M, domain=sympy.ZZ)
        assert abs(sympy.prod(d[i, i] for i in range(3))) == quotient_type(SIGMA).m

    @given(st.lists(st.integers(-3, 3), min_size=9, max_size=9))
    @settings(max_examples=60, deadline=None)
    def test_basis_invariance(self, entries):
        # a GL(3, Z) change of ambient basis preserves the class
        g = [entries[0:3], entries[3:6], entries[6:9]]
        if abs(det(g)) != 1:
            return
        rays = [tuple(sum(r[k] * g[k][j] for k in range(3)) for j in range(3)) for r in SIGMA.rays]
        q = quotient_type(Cone(tuple(rays)))
        assert q.canonical_class() == quotient_type(SIGMA).canonical_class()


class TestDiscrepancy:
    def test_original_rays(self):
        for v in SIGMA.rays:
            assert ray_discrepancy(SIGMA, v) == 0

    def test_blowup_rays(self):
        assert ray_discrepancy(SIGMA, V4) == Fraction(1, 3)
        assert ray_discrepancy(SIGMA, V3) == 0

    def test_against_age(self):
        # second route: the coefficient is 1 - age of the box element
        for v in (V3, V4):
            assert ray_discrepancy(SIGMA, v) == 1 - box_element(SIGMA, v).age()

    def test_box_elements_generate(self):
        g = quotient_type(SIGMA)
        powers = {g.power(k) for k in range(6)}
        assert box_element(SIGMA, V4) in powers and box_element(SIGMA, V3) in powers

    def test_outside(self):
        with pytest.raises(ValueError):
            ray_discrepancy(SIGMA, (-1, 0, 0))
        with pytest.raises(ValueError):
            ray_discrepancy(SIGMA, (1, 0))


class TestCharts:
    def test_printed_actions(self):
        assert tuple(induced_weight(G4, c) for c in CHARTS) == PRINTED_CHART_WEIGHTS

    def test_identity(self):
        eye = [[int(i == j) for j in range(4)] for i in range(4)]
        assert induced_weight(G4, eye) == G4

    def test_rho4(self):
        assert induced_weight(G4, CHARTS[3]) == Q("1/4(2,1,1,0)")

    def test_chart_determinants(self):
        # rho_2 as printed is an isogeny of degree 3, prime to the order 4
        assert [int(det(c)) for c in CHARTS] == [1, -3, 1, -1]

    def test_charts_follow_cones(self):
        for i, (c, chart) in enumerate(zip(SIGMA4, CHARTS)):
            same = [tuple(r) for r in chart] == list(c.rays)
            assert same == (i != 1)

    def test_canonical_above_P(self):
        for w in PRINTED_CHART_WEIGHTS:
            assert w.age() >= 1
            assert is_canonical(w)

    def test_errors(self):
        with pytest.raises(ValueError):
            induced_weight(G4, [[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
        with pytest.raises(ValueError):
            induced_weight(G4, [[1, 0], [0, 1]])
        with pytest.raises(ValueError):
            induced_weight(G4, [[1, 0, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])

    @given(st.lists(st.integers(0, 11), min_size=4, max_size=4), st.integers(0, 3), st.integers(0, 3))
    @settings(max_examples=100, deadline=None)
    def test_composition(self, exps, i, j):
        # charts act linearly: elementary row operations compose
        w = QuotientSingularity(12, tuple(exps))
        e = [[int(r == c) for c in range(4)] for r in range(4)]
        if i != j:
            e[i][j] = 1
        out = induced_weight(w, e)
        expect = list(w.exponents)
        if i != j:
            expect[i] += w.exponents[j]
        assert out == QuotientSingularity(12, tuple(expect))


class TestSections:
    def test_lambda_fan(self):
        assert fan_walls_ok(LAMBDA)
        assert all(cone_index(c) == 1 for c in LAMBDA.maximal_cones())

    @pytest.mark.parametrize("a", [0, 1, 2])
    def test_movediv(self, a):
        assert section_count(LAMBDA, movediv_coeffs(a)) == 0

    def test_zero_divisor(self):
        assert section_count(LAMBDA, [0] * 6) == 1
        assert section_points(LAMBDA, {}) == [(0, 0, 0)]

    def test_segment(self):
        p1 = Fan(((1,), (-1,)), ((0,), (1,)))
        assert section_count(p1, [1, 1]) == 3
        assert section_count(p1, {0: 2}) == 3

    def test_p2(self):
        p2 = Fan(((1, 0), (0, 1), (-1, -1)), ((0, 1), (1, 2), (0, 2)))
        assert fan_walls_ok(p2)
        # h^0(O(k)) on P^2
        for k in range(5):
            assert section_count(p2, [0, 0, k]) == (k + 1) * (k + 2) // 2

    def test_unbounded(self):
        half = Fan(((1, 0), (0, 1)), ((0, 1),))
        with pytest.raises(ValueError, match="unbounded"):
            section_count(half, [0, 0])

    def test_coefficient_count(self):
        with pytest.raises(ValueError):
            section_count(LAMBDA, [0, 0])

    def test_json_roundtrip(self):
        assert Fan.from_json(LAMBDA.to_json()) == LAMBDA

    def test_bad_fan(self):
        with pytest.raises(ValueError):
            Fan(((1, 0),), ((0, 1),))
        assert not fan_walls_ok(Fan(((1, 0), (0, 1), (-1, 0), (0, -1)), ((0, 1), (1, 2))))
