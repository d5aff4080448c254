"""Jordan decompositions over Z_p and local densities.

``alpha_p`` evaluates the closed formula from the block data; the counting
oracle ``alpha_p_oracle`` evaluates the defining limit at a finite level by
brute force.  At p = 2 the oracle counts X mod 2^r with X^T S X = S mod 2^r
entrywise on the (even) Gram matrix, which is the normalisation that agrees
with the formula.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arith import kronecker, valuation
from .qlattice import GramLattice


def _val(x: Fraction, p: int) -> int:
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    return valuation(x.numerator, p) - valuation(x.denominator, p)


def _unit_mod(x: Fraction, p: int, k: int) -> int:
    """Residue of the unit part of x modulo p^k."""
    x = Fraction(x)
    v = _val(x, p)
    u = x / Fraction(p) ** v
    m = p**k
    return u.numerator * pow(u.denominator, -1, m) % m


@dataclass(frozen=True)
class JordanBlock:
    """One p^j-modular constituent.

    For odd p, ``chi`` is the character of the whole block and ``det_unit``
    its unit determinant mod p.  For p = 2, ``chi`` belongs to the even part
    and ``odd_part`` lists the odd diagonal units mod 8 (at most two).
    """

    scale_exp: int
    rank: int
    parity: str
    chi: int
    odd_part: tuple[int, ...] = ()
    det_unit: int = 1

    @property
    def even_rank(self) -> int:
        return self.rank - len(self.odd_part)

    @property
    def exceptional(self) -> bool:
        """Odd part is <e1> + <e2> with e1 = e2 mod 4."""
        return len(self.odd_part) == 2 and (self.odd_part[0] - self.odd_part[1]) % 4 == 0


@dataclass(frozen=True)
class JordanDecomposition:
    p: int
    blocks: tuple[JordanBlock, ...]

    @property
    def rank(self) -> int:
        return sum(b.rank for b in self.blocks)

    def block(self, j: int) -> JordanBlock | None:
        for b in self.blocks:
            if b.scale_exp == j:
                return b
        return None

    @property
    def w(self) -> int:
        total = Fraction(0)
        for b in self.blocks:
            later = sum(c.rank for c in self.blocks if c.scale_exp > b.scale_exp)
            total += b.scale_exp * b.rank * (Fraction(b.rank + 1, 2) + later)
        assert total.denominator == 1
        return int(total)

    @property
    def det_valuation(self) -> int:
        return sum(b.scale_exp * b.rank for b in self.blocks)

    def pretty(self) -> str:
        lines = []
        for b in self.blocks:
            lines.append(f"{self.p}^{b.scale_exp}: rank {b.rank} ({b.parity}, χ={b.chi:+d})"
                         if b.chi else f"{self.p}^{b.scale_exp}: rank {b.rank} ({b.parity}, χ=0)")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# decomposition


def _split(G: list[list[Fraction]], p: int):
    """Congruence-diagonalise over Z_p (exact rationals, p-integral moves).

    Returns a list of pieces: ('1', scale, value) or ('2', scale, 2x2 matrix).
    """
    n = len(G)
    G = [[Fraction(x) for x in row] for row in G]
    idx = list(range(n))
    pieces = []
    while idx:
        best = None
        for i in idx:
            for j in idx:
                if G[i][j] != 0:
                    v = _val(G[i][j], p)
                    key = (v, 0 if i == j else 1)
                    if best is None or key < best[0]:
                        best = (key, i, j)
        if best is None:
            raise ValueError("degenerate form")
        (v, off), i, j = best
        if off and p != 2:
            # e_i += e_j makes the diagonal attain the minimal valuation
            for k in range(n):
                G[i][k] += G[j][k]
            for k in range(n):
                G[k][i] += G[k][j]
            off = 0
        if not off:
            a = G[i][i]
            for k in idx:
                if k != i and G[i][k] != 0:
                    c = G[i][k] / a
                    for t in range(n):
                        G[k][t] -= c * G[i][t]
                    for t in range(n):
                        G[t][k] -= c * G[t][i]
            pieces.append(("1", v, a))
            idx.remove(i)
        else:
            a, b, c = G[i][i], G[i][j], G[j][j]
            dt = a * c - b * b
            inv = [[c / dt, -b / dt], [-b / dt, a / dt]]
            for k in idx:
                if k in (i, j):
                    continue
                x, y = G[k][i], G[k][j]
                if x == 0 and y == 0:
                    continue
                ci = x * inv[0][0] + y * inv[1][0]
                cj = x * inv[0][1] + y * inv[1][1]
                for t in range(n):
                    G[k][t] -= ci * G[i][t] + cj * G[j][t]
                for t in range(n):
                    G[t][k] -= ci * G[t][i] + cj * G[t][j]
            pieces.append(("2", v, [[a, b], [b, c]]))
            idx.remove(i)
            idx.remove(j)
    return pieces


def _plane_chi(det_scaled: Fraction) -> int:
    """Even unimodular Z_2-plane: +1 for U (det = 7 mod 8), -1 for V (det = 3 mod 8)."""
    r = _unit_mod(det_scaled, 2, 3)
    if r == 7:
        return 1
    if r == 3:
        return -1
    raise AssertionError(f"unexpected even plane determinant class {r}")


def jordan_decompose(L: GramLattice | Sequence[Sequence[int]], p: int) -> JordanDecomposition:
    G = L.gram if isinstance(L, GramLattice) else L
    pieces = _split([list(r) for r in G], p)
    by_scale: dict[int, list] = {}
    for piece in pieces:
        by_scale.setdefault(piece[1], []).append(piece)
    blocks = []
    for j in sorted(by_scale):
        parts = by_scale[j]
        if p != 2:
            units = [x / Fraction(p) ** j for _, _, x in parts]
            prod = Fraction(1)
            for u in units:
                prod *= u
            du = _unit_mod(prod, p, 1)
            n = len(units)
            chi = 0 if n % 2 else kronecker((-1) ** (n // 2) * du, p)
            blocks.append(JordanBlock(j, n, "even", chi, (), du))
            continue
        scale = Fraction(2) ** j
        odd = [x / scale for kind, _, x in parts if kind == "1"]
        planes = [[[y / scale for y in row] for row in M] for kind, _, M in parts if kind == "2"]
        chi = 1
        for M in planes:
            chi *= _plane_chi(M[0][0] * M[1][1] - M[0][1] ** 2)
        # fold odd triples <a,b,c> into an even plane plus one unit
        while len(odd) >= 3:
            a, b, c = odd[:3]
            dt = a * b + b * c + c * a
            chi *= _plane_chi(dt)
            odd = [a * b * c / dt] + odd[3:]
        rank = sum(1 for kind, _, _ in parts if kind == "1") + 2 * len(planes)
        units = tuple(sorted(_unit_mod(u, 2, 3) for u in odd))
        blocks.append(JordanBlock(j, rank, "odd" if odd else "even", chi, units))
    return JordanDecomposition(p, tuple(blocks))


# ---------------------------------------------------------------------------
# densities


def p_product(p: int, n: int) -> Fraction:
    """P_p(n) = prod_{i=1}^n (1 - p^{-2i})."""
    out = Fraction(1)
    for i in range(1, n + 1):
        out *= 1 - Fraction(1, p ** (2 * i))
    return out


def chi_unimodular(block: JordanBlock, p: int) -> int:
    if p == 2:
        if block.parity != "even":
            raise ValueError("chi at p = 2 is defined for even blocks")
        return block.chi
    if block.rank % 2:
        return 0
    return kronecker((-1) ** (block.rank // 2) * block.det_unit, p)


def _E_two(dec: JordanDecomposition) -> Fraction:
    def odd(j):
        b = dec.block(j)
        return b is not None and b.parity == "odd"

    scales = [b.scale_exp for b in dec.blocks]
    out = Fraction(1)
    for j in range(min(scales) - 1, max(scales) + 2):
        b = dec.block(j)
        if odd(j - 1) or odd(j + 1) or (b is not None and b.exceptional):
            Ej = Fraction(1, 2)
        else:
            chi = b.chi if b is not None else 1
            er = b.even_rank if b is not None else 0
            Ej = Fraction(1, 2) * (1 + chi * Fraction(1, 2 ** (er // 2)))
        out /= Ej
    return out


def _q_two(dec: JordanDecomposition) -> int:
    q = 0
    for b in dec.blocks:
        if b.parity != "odd":
            continue
        nxt = dec.block(b.scale_exp + 1)
        q += b.rank + (1 if nxt is not None and nxt.parity == "odd" else 0)
    return q


def alpha_p(dec: JordanDecomposition) -> Fraction:
    p = dec.p
    w = dec.w
    if p != 2:
        s = len(dec.blocks)
        P = Fraction(1)
        E = Fraction(1)
        for b in dec.blocks:
            P *= p_product(p, b.rank // 2)
            if b.chi:
                E /= 1 + b.chi * Fraction(1, p ** (b.rank // 2))
        return 2 ** (s - 1) * Fraction(p) ** w * P * E
    m = dec.rank
    q = _q_two(dec)
    P = Fraction(1)
    for b in dec.blocks:
        P *= p_product(2, b.even_rank // 2)
    return Fraction(2) ** (m - 1 + w - q) * P * _E_two(dec)


# ---------------------------------------------------------------------------
# counting oracle


def alpha_p_oracle(L: GramLattice | Sequence[Sequence[int]], p: int, r: int,
                   shard: tuple[int, int] = (0, 1)) -> Fraction:
    """(1/2) p^{-r n(n-1)/2} #{X mod p^r : X^T S X = S mod p^r}.

    ``shard=(i, k)`` restricts the outer loop to every k-th first column
    starting at i; summing the k shards' counts reproduces the full count.
    Use ``oracle_count`` for the raw shard counts.
    """
    G = L.gram if isinstance(L, GramLattice) else L
    n = len(G)
    c = oracle_count(G, p, r, shard)
    return Fraction(c, 2 * p ** (r * n * (n - 1) // 2))


def oracle_count(G, p: int, r: int, shard: tuple[int, int] = (0, 1)) -> int:
    n = len(G)
    M = p**r
    if n > 3 or M > 128:
        raise ValueError("oracle limited to rank <= 3 and p^r <= 128")
    S = np.array(G, dtype=np.int64)
    vecs = np.array(list(itertools.product(range(M), repeat=n)), dtype=np.int64).reshape(-1, n)
    norms = np.einsum("ij,jk,ik->i", vecs, S, vecs)
    cand = [vecs[(norms - S[i, i]) % M == 0] for i in range(n)]
    start, step = shard
    first = cand[0][start::step]
    if n == 1:
        return len(first)
    total = 0
    for x in first:
        Sx = S @ x
        c1 = cand[1][(cand[1] @ Sx - S[0, 1]) % M == 0]
        if n == 2:
            total += len(c1)
            continue
        c2 = cand[2][(cand[2] @ Sx - S[0, 2]) % M == 0]
        if len(c1) == 0 or len(c2) == 0:
            continue
        B = (c1 @ S @ c2.T - S[1, 2]) % M
        total += int((B == 0).sum())
    return total


def stable_level(L: GramLattice | Sequence[Sequence[int]], p: int) -> int:
    """Level r at which the finite count has settled for this lattice."""
    G = L.gram if isinstance(L, GramLattice) else L
    from .qlattice import det
    v = valuation(abs(int(det(G))), p)
    return v + (3 if p == 2 else 1)
