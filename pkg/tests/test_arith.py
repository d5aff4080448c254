import math
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from orthocensus.arith import (
    CertifiedReal,
    Factorization,
    IndeterminateError,
    Sign,
    certified_constant,
    count_unit_sqrt,
    count_unit_sqrt_naive,
    decide_sign,
    factorize,
    invariant_factors,
    is_prime,
    kronecker,
    nu,
    padic_abs,
    smith_normal_form,
    zeta_borwein,
    zeta_euler_maclaurin,
)


def matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def det(M):
    return sympy.Matrix(M).det()


class TestFactorize:
    def test_examples(self):
        assert factorize(1).factors == ()
        assert factorize(12).factors == ((2, 2), (3, 1))
        assert factorize(18504).factors == ((2, 3), (3, 2), (257, 1))

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            factorize(0)

    def test_invariant_checked(self):
        with pytest.raises(ValueError):
            Factorization(12, ((3, 1), (2, 2)))

    @given(st.integers(min_value=1, max_value=10**15))
    @settings(max_examples=300)
    def test_matches_sympy(self, n):
        assert factorize(n).as_dict() == sympy.factorint(n)

    def test_reconstruction_small_range(self):
        # full 10^6 sweep lives in the acceptance run; sample densely here
        for n in range(1, 20001):
            f = factorize(n)
            assert math.prod(p**e for p, e in f.factors) == n

    def test_large_semiprime(self):
        p, q = 1000003, 998244353
        assert factorize(p * q).factors == ((p, 1), (q, 1))

    @given(st.integers(min_value=2, max_value=10**12))
    def test_is_prime(self, n):
        assert is_prime(n) == sympy.isprime(n)


def test_nu_examples():
    assert nu(1) == 0
    assert nu(12) == 2
    assert nu(2520) == 4


def test_padic_abs():
    assert padic_abs(12, 2) == Fraction(1, 4)
    assert padic_abs(12, 3) == Fraction(1, 3)
    assert padic_abs(18504, 2) == Fraction(1, 8)
    with pytest.raises(ValueError):
        padic_abs(0, 5)


def test_nu_bound_certified():
    # 2^nu(x) <= 10 x^(1/4); checked as 2^(4 nu) <= 10^4 x exactly
    worst = max(Fraction(16 ** nu(x), x) for x in (2, 6, 30, 210, 2310, 30030, 510510, 9699690))
    assert worst <= 10**4


class TestKronecker:
    def test_examples(self):
        assert kronecker(1, 7) == 1
        assert kronecker(14, 7) == 0
        assert kronecker(-12, 5) == -1

    def test_against_enumeration(self):
        for p in sympy.primerange(3, 98):
            squares = {x * x % p for x in range(1, p)}
            for D in range(-200, 201):
                expect = 0 if D % p == 0 else (1 if D % p in squares else -1)
                assert kronecker(D, p) == expect


def test_kronecker_two_mod8():
    table = {1: 1, 7: 1, 3: -1, 5: -1}
    for D in range(-60, 61):
        expect = 0 if D % 2 == 0 else table[D % 8]
        assert kronecker(D, 2) == expect


class TestSNF:
    def test_examples(self):
        assert invariant_factors([[1, 0], [0, 1]]) == [1, 1]
        assert invariant_factors([[2, 1], [1, 2]]) == [1, 3]
        assert invariant_factors([[6, 0], [0, 2]]) == [2, 6]

    @given(st.lists(st.lists(st.integers(-20, 20), min_size=3, max_size=3), min_size=2, max_size=4))
    def test_decomposition(self, M):
        U, D, V = smith_normal_form(M)
        assert matmul(matmul(U, M), V) == D
        assert abs(det(U)) == 1 and abs(det(V)) == 1
        diag = [D[i][i] for i in range(min(len(D), len(D[0])))]
        assert all(x >= 0 for x in diag)
        for a, b in zip(diag, diag[1:]):
            assert (a == 0 and b == 0) or (a != 0 and b % a == 0)
        for i, row in enumerate(D):
            for j, x in enumerate(row):
                if i != j:
                    assert x == 0


class TestUnitSqrt:
    def test_examples(self):
        assert count_unit_sqrt(1, 8) == 4
        assert count_unit_sqrt(1, 3) == 2
        assert count_unit_sqrt(2, 4) == 0

    def test_self_oracle(self):
        for M in list(range(1, 400)) + [720, 1000, 2520, 4096, 9999, 10000]:
            for theta in (1, -1, 2, 3, 5, 7):
                assert count_unit_sqrt(theta, M) == count_unit_sqrt_naive(theta, M), (theta, M)


class TestCertified:
    @pytest.mark.parametrize("name,lo,hi", [
        ("zeta(2)", "1.6449", "1.6450"),
        ("zeta(3)", "1.20205", "1.20206"),
        ("pi", "3.14159", "3.14160"),
    ])
    def test_examples(self, name, lo, hi):
        c = certified_constant(name, 64)
        assert Fraction(lo) <= c.lower and c.upper <= Fraction(hi)

    def test_low_precision_rejected(self):
        with pytest.raises(ValueError):
            certified_constant("pi", 32)
        with pytest.raises(ValueError):
            certified_constant("catalan", 128)

    @pytest.mark.parametrize("prec", [64, 256, 1024])
    def test_against_mpmath(self, prec):
        mpmath.mp.dps = prec // 3 + 40
        refs = {
            "pi": mpmath.pi, "log2": mpmath.log(2), "zeta(3)": mpmath.zeta(3),
            "zeta(6)": mpmath.zeta(6), "gamma_half(5)": mpmath.gamma(mpmath.mpf(5) / 2),
        }
        for name, ref in refs.items():
            c = certified_constant(name, prec)
            r = Fraction(mpmath.nstr(ref, mpmath.mp.dps - 5))
            assert c.contains(r), name
            assert c.width <= Fraction(2) ** (1 - prec) * r

    def test_zeta_routes_agree(self):
        for s in (2, 3, 6):
            em = zeta_euler_maclaurin(s, 128)
            bw = zeta_borwein(s, 128)
            assert em is not None
            assert max(em.lower, bw.lower) <= min(em.upper, bw.upper)

    def test_nesting_across_precisions(self):
        for name in ("pi", "zeta(3)", "zeta(6)", "gamma_half(3)"):
            outer = certified_constant(name, 64)
            inner = certified_constant(name, 512)
            assert outer.encloses(inner)

    @given(st.fractions(min_value=-100, max_value=100, max_denominator=1000),
           st.fractions(min_value=-100, max_value=100, max_denominator=1000))
    def test_ops_outward(self, a, b):
        x, y = CertifiedReal.exact(a, 64), CertifiedReal.exact(b, 64)
        assert (x + y).contains(a + b)
        assert (x - y).contains(a - b)
        assert (x * y).contains(a * b)
        if b != 0:
            assert (x / y).contains(a / b)
        assert (x ** 2).contains(a * a)

    @given(st.fractions(min_value=0, max_value=10**6, max_denominator=10**4))
    def test_sqrt_outward(self, a):
        r = CertifiedReal.exact(a, 80).sqrt()
        assert r.lower ** 2 <= a <= r.upper ** 2

    def test_decide_sign(self):
        pi = lambda p: certified_constant("pi", p)
        assert decide_sign(lambda p: pi(p) - Fraction(314159, 100000))[0] is Sign.POSITIVE
        with pytest.raises(IndeterminateError):
            decide_sign(lambda p: pi(p) - pi(p), limit=256)
