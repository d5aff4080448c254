from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st
from sympy.functions.combinatorial.numbers import jacobi_symbol

from orthocensus.modforms import (
    FourierSeries2,
    JacobiMeta,
    condition_value,
    cusp_constant_check,
    cusp_witnesses,
    general_type_verdict,
    lift_coefficient,
    product,
    scale_z,
    support_ok,
    tensor,
    theta,
    theta32,
    weight3_cusp_exists,
)

GOLDEN = Path(__file__).parent / "golden"


class TestTheta:
    def test_examples(self):
        th, meta = theta(3)
        assert th.coefficient(F(1, 8), F(1, 2)) == 1
        assert th.coefficient(F(1, 8), F(-1, 2)) == -1
        assert th.coefficient(F(9, 8), F(3, 2)) == -1
        assert th.coefficient(F(1, 2), F(1)) == 0
        assert meta == JacobiMeta(F(1, 2), F(1, 2), 3, 1)

    def test_theta32_examples(self):
        t, meta = theta32(3)
        assert t.coefficient(F(1, 24), F(1, 2)) == 1
        assert t.coefficient(F(25, 24), F(5, 2)) == -1
        assert t.coefficient(F(9, 24), F(3, 2)) == 0
        assert meta.index == F(3, 2) and meta.eta_power == 1

    def test_golden(self):
        assert (GOLDEN / "theta_q3.txt").read_text() == theta(3)[0].dump()
        assert (GOLDEN / "theta32_q3.txt").read_text() == theta32(3)[0].dump()

    @pytest.mark.parametrize("prec", [1, 3, 10, 40])
    def test_characters_against_jacobi(self, prec):
        th, _ = theta(prec)
        for m in range(-30, 31):
            if F(m * m, 8) >= prec:
                continue
            expect = 0 if m % 2 == 0 else jacobi_symbol(-1, abs(m)) * (1 if m > 0 else -1)
            assert th.coefficient(F(m * m, 8), F(m, 2)) == expect
        t, _ = theta32(prec)
        for n in range(-40, 41):
            if F(n * n, 24) >= prec:
                continue
            expect = 0 if n % 2 == 0 or n % 3 == 0 else jacobi_symbol(3, abs(n))
            assert t.coefficient(F(n * n, 24), F(n, 2)) == expect

    @pytest.mark.parametrize("prec", [1, 2, 3, 7, 20])
    def test_parity(self, prec):
        th, _ = theta(prec)
        t, _ = theta32(prec)
        for (q, r), c in th.coeffs.items():
            assert th.coeffs[(q, -r)] == -c
        for (q, r), c in t.coeffs.items():
            assert t.coeffs[(q, -r)] == c

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            theta(0)


class TestProducts:
    def test_scale(self):
        t, _ = theta32(3)
        assert scale_z(t, 1) == t
        assert scale_z(t, 3).meta.index == F(27, 2)
        th2 = scale_z(theta(3)[0], 2)
        assert all(r % 2 == 0 for _, r in th2.coeffs)

    def test_metas(self):
        th, _ = theta(3)
        t, _ = theta32(3)
        assert product([th, th, th])[1] == JacobiMeta(F(3, 2), F(3, 2), 9, 1)
        assert product([t, t, t])[1] == JacobiMeta(F(3, 2), F(9, 2), 3, 1)

    def test_empty_product(self):
        one, meta = product([])
        assert one.coeffs == {(0, 0): 1} and meta.weight == 0

    def test_mismatch(self):
        with pytest.raises(ValueError):
            product([theta(3)[0], theta(2)[0]])

    @pytest.mark.parametrize("T", [F(1), F(2), F(3)])
    def test_truncation_coherence(self, T):
        direct = product([theta32(T)[0]] * 3)[0]
        wide = product([theta32(T + 2)[0]] * 3)[0].truncate(T)
        assert direct == wide

    def test_support(self):
        t, _ = theta32(6)
        f, meta = product([t, t, scale_z(t, 2)])
        assert support_ok(f, meta.index)
        th, m = product([theta(6)[0]] * 3)
        assert support_ok(th, m.index)
        assert not support_ok(th, F(1, 4))


class TestCusp:
    def test_theta_cube(self):
        f, _ = product([theta(4)[0]] * 3)
        assert cusp_constant_check(f)
        assert f.q_min() == F(3, 8)

    def test_constant(self):
        assert not cusp_constant_check(FourierSeries2({(0, 0): 1}, None))

    def test_tensor(self):
        t, _ = theta32(3)
        phi1, _ = product([t, t, scale_z(t, 2)])
        phi2, _ = product([theta(3)[0]] * 3)
        T = tensor(phi1, phi2)
        assert T.nvars == 2 and cusp_constant_check(T)
        assert T.q_min() == F(1, 8) + F(3, 8)


class TestLift:
    @staticmethod
    def table(q, *l):
        return int(q * 8) + 3 * int(sum(l) * 4)

    def test_primitive(self):
        f = self.table
        assert lift_coefficient(f, 3, 1, 5) == f(F(15, 2), F(1, 2))

    def test_conventions(self):
        f = self.table
        # content 3: a in {1, 3}
        printed = lift_coefficient(f, 3, 3, 3)
        standard = lift_coefficient(f, 3, 3, 3, convention="standard")
        assert printed == f(F(9, 2), F(3, 2)) + 9 * f(F(1, 2), F(3, 2))
        assert standard == f(F(9, 2), F(3, 2)) + 9 * f(F(1, 2), F(1, 2))

    def test_character(self):
        f = self.table
        chi = lambda a: -1 if a == 3 else 1
        assert lift_coefficient(f, 3, 3, 3, chi) == f(F(9, 2), F(3, 2)) - 9 * f(F(1, 2), F(3, 2))

    def test_linearity(self):
        f, g = self.table, (lambda q, *l: int(q * 2) ** 2)
        h = lambda q, *l: f(q, *l) + g(q, *l)
        assert lift_coefficient(h, 5, (5, 0), 5) == lift_coefficient(f, 5, (5, 0), 5) + lift_coefficient(g, 5, (5, 0), 5)

    def test_errors(self):
        with pytest.raises(ValueError):
            lift_coefficient(self.table, 2, 1, 1)
        with pytest.raises(ValueError):
            lift_coefficient(self.table, 1, 1, 1, convention="other")


class TestCensus:
    def test_examples(self):
        assert weight3_cusp_exists(18) == (2, 1, 1)
        assert weight3_cusp_exists(9) is None
        assert weight3_cusp_exists(20) is None

    def test_family(self):
        for t in range(1, 101):
            w = weight3_cusp_exists(18 * t * t)
            assert w is not None and 3 * sum(x * x for x in w) == 18 * t * t

    def test_other_reading(self):
        # the reading with gcd = 1 accepts (1, 1, 1)
        assert weight3_cusp_exists(9, reading="eq1") == (1, 1, 1)
        assert weight3_cusp_exists(18, reading="eq1") is None

    def test_zero_flag(self):
        assert weight3_cusp_exists(6) is None
        assert weight3_cusp_exists(6, allow_zero=True) == (1, 1, 0)

    @given(st.integers(1, 30), st.integers(1, 30), st.integers(1, 30), st.integers(1, 6))
    @settings(max_examples=200, deadline=None)
    def test_condition_invariance(self, a, b, c, t):
        assert condition_value(a, b, c) == condition_value(c, a, b) == condition_value(b, c, a)
        assert condition_value(t * a, t * b, t * c) == condition_value(a, b, c)

    def test_range_matches_pointwise(self):
        w = cusp_witnesses(1, 2000)
        for d in range(1, 2001):
            assert w.get(d) == weight3_cusp_exists(d)
            if d in w:
                assert d % 3 == 0

    def test_verdicts(self):
        assert general_type_verdict(259200, frozenset()) == "general_type"
        assert general_type_verdict(9, frozenset()) == "unknown"
        assert general_type_verdict(1800, frozenset({1800})) == "unknown"
        assert general_type_verdict(1800, frozenset()) == "general_type"
        assert general_type_verdict(18, frozenset()) == "unknown"
