import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from orthocensus.localdensity import (
    alpha_p,
    alpha_p_oracle,
    chi_unimodular,
    jordan_decompose,
    oracle_count,
    p_product,
    stable_level,
)
from orthocensus.qlattice import A2, GramLattice, U, diagonal, direct_sum, lattice_L, matmul, transpose

F = Fraction

RANK2 = {
    "<2>": ([[2]], (4, 1, 1)),
    "<4>": ([[4]], (8, 1, 1)),
    "<6>": ([[6]], (4, 3, 1)),
    "<10>": ([[10]], (4, 1, 5)),
    "U": ([[0, 1], [1, 0]], (2, F(2, 3), F(4, 5))),
    "A2": ([[2, 1], [1, 2]], (6, 6, F(6, 5))),
    "<2,6>": ([[2, 0], [0, 6]], (16, 6, F(6, 5))),
    "<2,2>": ([[2, 0], [0, 2]], (32, F(4, 3), F(4, 5))),
    "[2,1;1,4]": ([[2, 1], [1, 4]], (2, F(4, 3), F(6, 5))),
    "[4,1;1,4]": ([[4, 1], [1, 4]], (2, 6, 10)),
    "<2,-6>": ([[2, 0], [0, -6]], (32, 6, F(6, 5))),
    "U(3)": ([[0, 3], [3, 0]], (2, 18, F(4, 5))),
    "[2,1;1,-2]": ([[2, 1], [1, -2]], (6, F(4, 3), 10)),
    "[6,3;3,6]": ([[6, 3], [3, 6]], (6, 162, F(6, 5))),
    "<2,10>": ([[2, 0], [0, 10]], (32, F(2, 3), 10)),
    "[4,2;2,4]": ([[4, 2], [2, 4]], (48, 6, F(6, 5))),
}

RANK3 = {
    "<2,2,2>": ([[2, 0, 0], [0, 2, 0], [0, 0, 2]], (384, F(8, 9), F(24, 25))),
    "A3": ([[2, -1, 0], [-1, 2, -1], [0, -1, 2]], (96, F(8, 9), F(24, 25))),
    "U+<2>": ([[0, 1, 0], [1, 0, 0], [0, 0, 2]], (12, F(8, 9), F(24, 25))),
    "[2,1,1;1,2,1;1,1,2]": ([[2, 1, 1], [1, 2, 1], [1, 1, 2]], (96, F(8, 9), F(24, 25))),
    "<2,2,6>": ([[2, 0, 0], [0, 2, 0], [0, 0, 6]], (128, 8, F(24, 25))),
    "U+<-6>": ([[0, 1, 0], [1, 0, 0], [0, 0, -6]], (12, 4, F(24, 25))),
    "A2+<-2>": ([[2, 1, 0], [1, 2, 0], [0, 0, -2]], (12, 4, F(24, 25))),
    "<2,6,10>": ([[2, 0, 0], [0, 6, 0], [0, 0, 10]], (128, 4, 12)),
    "[4,2;2,4]+<2>": ([[4, 2, 0], [2, 4, 0], [0, 0, 2]], (384, 4, F(24, 25))),
    "A2+<2>": ([[2, 1, 0], [1, 2, 0], [0, 0, 2]], (12, 8, F(24, 25))),
    "U+<-10>": ([[0, 1, 0], [1, 0, 0], [0, 0, -10]], (12, F(8, 9), 8)),
    "<2,-2,6>": ([[2, 0, 0], [0, -2, 0], [0, 0, 6]], (128, 4, F(24, 25))),
}

PRIMES = (2, 3, 5)
LEVELS2 = {2: 6, 3: 3, 5: 2}
LEVELS3 = {2: 5, 3: 3, 5: 2}


def _cases(table):
    for name, (G, vals) in table.items():
        for p, v in zip(PRIMES, vals):
            yield pytest.param(G, p, F(v), id=f"{name}-p{p}")


@pytest.mark.parametrize("G,p,expected", list(_cases(RANK2)) + list(_cases(RANK3)))
def test_formula_corpus(G, p, expected):
    assert alpha_p(jordan_decompose(G, p)) == expected


@pytest.mark.parametrize("G,p,expected", list(_cases(RANK2)))
def test_oracle_rank2(G, p, expected):
    assert alpha_p_oracle(G, p, LEVELS2[p]) == expected


@pytest.mark.parametrize("G,p,expected", list(_cases(RANK3)))
def test_oracle_rank3(G, p, expected):
    assert alpha_p_oracle(G, p, LEVELS3[p]) == expected


class TestJordan:
    def test_good_prime_single_block(self):
        dec = jordan_decompose(lattice_L(7), 5)
        assert [(b.scale_exp, b.rank) for b in dec.blocks] == [(0, 6)]

    @pytest.mark.parametrize("d,a", [(8, 5), (5, 2), (6, 3), (4, 4)])
    def test_L_at_two(self, d, a):
        # a = v_2(12d); blocks 2^0 even rank 4, 2^1 odd rank 1, 2^(a-1) odd rank 1
        dec = jordan_decompose(lattice_L(d), 2)
        b0 = dec.block(0)
        assert b0.rank == 4 and b0.parity == "even"
        if a - 1 == 1:
            b1 = dec.block(1)
            assert b1.rank == 2 and b1.parity == "odd"
        else:
            assert dec.block(1).rank == 1 and dec.block(1).parity == "odd"
            assert dec.block(a - 1).rank == 1 and dec.block(a - 1).parity == "odd"

    def test_A2_at_three(self):
        dec = jordan_decompose(A2(), 3)
        assert [b.scale_exp for b in dec.blocks] == [0, 1]

    def test_chi_examples(self):
        assert jordan_decompose(U(), 2).block(0).chi == 1
        assert jordan_decompose(A2(), 2).block(0).chi == -1
        assert chi_unimodular(jordan_decompose(U(), 3).block(0), 3) == 1
        # <2,2> at 3: det 4 and -4 is not a square mod 3
        assert chi_unimodular(jordan_decompose(diagonal(2, 2), 3).block(0), 3) == -1
        assert chi_unimodular(jordan_decompose(diagonal(2, 2, 2), 3).block(0), 3) == 0

    def test_chi_odd_block_rejected_at_two(self):
        with pytest.raises(ValueError):
            chi_unimodular(jordan_decompose(diagonal(2), 2).blocks[0], 2)

    def test_pretty(self):
        text = jordan_decompose(A2(), 3).pretty()
        assert text.splitlines()[0].startswith("3^0: rank 1")
        assert "3^1" in text

    @pytest.mark.parametrize("d", [5, 6, 9, 12, 18, 49, 96])
    @pytest.mark.parametrize("p", [2, 3, 5, 7])
    def test_det_bookkeeping(self, d, p):
        L = lattice_L(d)
        dec = jordan_decompose(L, p)
        assert dec.rank == 6
        from orthocensus.arith import valuation
        assert dec.det_valuation == valuation(12 * d, p)


def test_p_products():
    assert p_product(2, 2) == F(45, 64)
    assert p_product(3, 1) == F(8, 9)
    assert p_product(3, 2) == F(640, 729)


def test_oracle_examples():
    assert alpha_p_oracle([[1]], 3, 2) == 1
    assert alpha_p_oracle(U(), 3, 2) == F(2, 3)


def test_oracle_shards_sum():
    G = [[2, 1], [1, 2]]
    full = oracle_count(G, 3, 2)
    assert sum(oracle_count(G, 3, 2, (i, 4)) for i in range(4)) == full


def test_oracle_limits():
    with pytest.raises(ValueError):
        oracle_count([[2, 0, 0, 0]] * 4, 3, 1)


def test_stable_level():
    assert stable_level(A2(), 3) == 2
    assert stable_level(A2(), 2) == 3


def _random_unimodular(rng, n, steps=12):
    M = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = rng.choice([-2, -1, 1, 2])
        E = [[int(a == b) for b in range(n)] for a in range(n)]
        E[i][j] = c
        M = matmul(M, E)
    return M


@given(st.integers(0, 10**6), st.sampled_from([5, 6, 12, 18, 49]), st.sampled_from([2, 3, 5, 7]))
@settings(max_examples=40, deadline=None)
def test_basis_change_invariance(seed, d, p):
    L = lattice_L(d)
    P = _random_unimodular(random.Random(seed), 6)
    G2 = matmul(matmul(transpose(P), L.gram), P)
    assert alpha_p(jordan_decompose(G2, p)) == alpha_p(jordan_decompose(L, p))


class TestEFactors:
    def test_odd_neighbour_halves(self):
        # the unimodular block of U + <2> is odd, so E_{-1} = E_1 = 1/2
        dec = jordan_decompose(direct_sum(U(), diagonal(2)), 2)
        assert alpha_p(dec) == 12

    def test_exceptional_block(self):
        # <2,2> has odd part <1,1> with 1 = 1 mod 4
        b = jordan_decompose(diagonal(2, 2), 2).blocks[0]
        assert b.exceptional

    def test_even_unimodular_chi(self):
        assert alpha_p(jordan_decompose(U(), 2)) == 2
        assert alpha_p(jordan_decompose(A2(), 2)) == 6
