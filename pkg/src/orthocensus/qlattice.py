"""Integral lattices, discriminant forms and isometries.

Vectors are coordinate columns in the lattice basis; an isometry matrix ``M``
sends the column ``x`` to ``M @ x``, so its columns are the images of the
basis vectors.  All arithmetic is exact (``int`` or ``Fraction``).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Sequence

from .arith import smith_normal_form

Matrix = tuple[tuple[int, ...], ...]


# ---------------------------------------------------------------------------
# small exact linear algebra


def _mat(M) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in M)


def matmul(A, B):
    n, m, k = len(A), len(B), len(B[0]) if B else 0
    return [[sum(A[i][t] * B[t][j] for t in range(m)) for j in range(k)] for i in range(n)]


def matvec(A, x):
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def transpose(A):
    return [list(col) for col in zip(*A)] if A else []


def identity(n: int):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def bilinear(G, x, y):
    return sum(x[i] * G[i][j] * y[j] for i in range(len(x)) for j in range(len(y)))


def det(M) -> Fraction:
    """Determinant by fraction-free elimination (Bareiss)."""
    n = len(M)
    if n == 0:
        return Fraction(1)
    A = [[Fraction(x) for x in row] for row in M]
    sign = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        for i in range(k + 1, n):
            f = A[i][k] / A[k][k]
            if f:
                for j in range(k, n):
                    A[i][j] -= f * A[k][j]
    out = Fraction(sign)
    for k in range(n):
        out *= A[k][k]
    return out


def inverse(M):
    """Exact inverse over Q."""
    n = len(M)
    A = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for k in range(n):
        piv = next((i for i in range(k, n) if A[i][k] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        A[k], A[piv] = A[piv], A[k]
        p = A[k][k]
        A[k] = [x / p for x in A[k]]
        for i in range(n):
            if i != k and A[i][k] != 0:
                f = A[i][k]
                A[i] = [x - f * y for x, y in zip(A[i], A[k])]
    return [row[n:] for row in A]


def integer_kernel(M) -> list[list[int]]:
    """Saturated Z-basis (as columns) of {x in Z^n : M x = 0}."""
    rows = len(M)
    if rows == 0:
        return identity(len(M[0])) if M else []
    n = len(M[0])
    U, D, V = smith_normal_form(M)
    rank = sum(1 for i in range(min(rows, n)) if D[i][i] != 0)
    return [[V[i][j] for j in range(rank, n)] for i in range(n)]


def diagonalize_rational(G):
    """Columns B with B^T G B diagonal, over Q.  Returns (B, diagonal)."""
    n = len(G)
    basis = [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]  # list of vectors
    out, diag = [], []
    pool = basis
    while pool:
        idx = next((i for i, v in enumerate(pool) if bilinear(G, v, v) != 0), None)
        if idx is None:
            pair = next(((i, j) for i in range(len(pool)) for j in range(i + 1, len(pool))
                         if bilinear(G, pool[i], pool[j]) != 0), None)
            if pair is None:
                raise ValueError("degenerate form")
            i, j = pair
            pool[i] = [a + b for a, b in zip(pool[i], pool[j])]
            idx = i
        b = pool.pop(idx)
        bb = bilinear(G, b, b)
        out.append(b)
        diag.append(bb)
        pool = [[x - bilinear(G, v, b) / bb * y for x, y in zip(v, b)] for v in pool]
    return transpose(out), diag


@lru_cache(maxsize=256)
def _orthogonal_basis(G: Matrix):
    B, diag = diagonalize_rational(G)
    return tuple(tuple(v) for v in transpose(B)), tuple(diag)


# ---------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class GramLattice:
    """Even nondegenerate integral lattice given by its Gram matrix.

    ``embedding`` optionally records the basis as integer columns of an
    ambient lattice (used for fixed and perpendicular sublattices).
    """

    gram: Matrix
    signature: tuple[int, int] = None
    embedding: Matrix | None = field(default=None, compare=False)

    def __post_init__(self):
        G = _mat(self.gram)
        object.__setattr__(self, "gram", G)
        n = len(G)
        if any(len(r) != n for r in G):
            raise ValueError("Gram matrix must be square")
        if any(G[i][j] != G[j][i] for i in range(n) for j in range(n)):
            raise ValueError("Gram matrix must be symmetric")
        if any(G[i][i] % 2 for i in range(n)):
            raise ValueError("lattice is not even")
        if n and det(G) == 0:
            raise ValueError("degenerate lattice")
        if n:
            _, diag = _orthogonal_basis(G)
            sig = (sum(1 for x in diag if x > 0), sum(1 for x in diag if x < 0))
        else:
            sig = (0, 0)
        if self.signature is not None and tuple(self.signature) != sig:
            raise ValueError(f"signature {self.signature} does not match {sig}")
        object.__setattr__(self, "signature", sig)

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def det(self) -> int:
        return int(det(self.gram))

    def pair(self, x, y):
        return bilinear(self.gram, x, y)

    def norm(self, x):
        return bilinear(self.gram, x, x)

    def to_json(self) -> str:
        return json.dumps({"gram": [list(r) for r in self.gram]})

    @classmethod
    def from_json(cls, text: str) -> "GramLattice":
        return cls(json.loads(text)["gram"])


def diagonal(*entries: int) -> GramLattice:
    return GramLattice([[e if i == j else 0 for j in range(len(entries))] for i, e in enumerate(entries)])


def direct_sum(*lats: GramLattice) -> GramLattice:
    n = sum(L.rank for L in lats)
    G = [[0] * n for _ in range(n)]
    off = 0
    for L in lats:
        for i in range(L.rank):
            for j in range(L.rank):
                G[off + i][off + j] = L.gram[i][j]
        off += L.rank
    return GramLattice(G)


def scaled(L: GramLattice, k: int) -> GramLattice:
    return GramLattice([[k * x for x in row] for row in L.gram])


def U(k: int = 1) -> GramLattice:
    """Hyperbolic plane, optionally scaled by k."""
    return GramLattice([[0, k], [k, 0]])


def A2() -> GramLattice:
    return GramLattice([[2, 1], [1, 2]])


def lattice_L(d: int, n: int = 2) -> GramLattice:
    """2U + <-2d> + <-2(n+1)> in the basis (e1, f1, e2, f2, v, w)."""
    if d < 1 or n < 1:
        raise ValueError("need d, n >= 1")
    return direct_sum(U(), U(), diagonal(-2 * d), diagonal(-2 * (n + 1)))


# ---------------------------------------------------------------------------
# discriminant forms


@dataclass(frozen=True)
class FiniteQuadForm:
    """Finite quadratic form on a product of cyclic groups.

    ``q`` holds q(g_i) in [0, 2); ``b`` holds b(g_i, g_j) in [0, 1).
    ``generators`` are representatives in the dual lattice, when known.
    """

    invariant_factors: tuple[int, ...]
    q: tuple[Fraction, ...]
    b: tuple[tuple[Fraction, ...], ...]
    generators: tuple[tuple[Fraction, ...], ...] = field(default=(), compare=False)

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    def elements(self):
        return itertools.product(*(range(n) for n in self.invariant_factors))

    def qvalue(self, a) -> Fraction:
        k = len(a)
        v = sum(a[i] * a[i] * self.q[i] for i in range(k))
        v += 2 * sum(a[i] * a[j] * self.b[i][j] for i in range(k) for j in range(i + 1, k))
        return v % 2

    def bvalue(self, a, c) -> Fraction:
        return sum(a[i] * c[j] * self.b[i][j] for i in range(len(a)) for j in range(len(c))) % 1

    def element_order(self, a) -> int:
        return reduce(math.lcm, (n // math.gcd(n, x) for n, x in zip(self.invariant_factors, a)), 1)

    def add(self, a, c):
        return tuple((x + y) % n for x, y, n in zip(a, c, self.invariant_factors))

    def scale(self, a, k):
        return tuple((k * x) % n for x, n in zip(a, self.invariant_factors))

    def automorphisms(self, limit: int = 10**4) -> int:
        """|O(q)| by search over generator images respecting orders and q."""
        return _count_isometries(self, self, limit)

    def is_isomorphic(self, other: "FiniteQuadForm", limit: int = 10**4) -> bool:
        if sorted(_elementary_divisors(self.invariant_factors)) != sorted(_elementary_divisors(other.invariant_factors)):
            return False
        return _count_isometries(self, other, limit, first_only=True) > 0


def _elementary_divisors(factors) -> list[int]:
    from .arith import factorize
    out = []
    for n in factors:
        if n > 1:
            out.extend(p**e for p, e in factorize(n).factors)
    return out


def _count_isometries(F: FiniteQuadForm, H: FiniteQuadForm, limit: int, first_only: bool = False) -> int:
    if F.order != H.order:
        return 0
    if F.order > limit:
        raise ValueError(f"group order {F.order} exceeds brute-force cap {limit}")
    gens = [i for i, n in enumerate(F.invariant_factors) if n > 1]
    targets = list(H.elements())
    cands = []
    for i in gens:
        cands.append([t for t in targets if H.element_order(t) == F.invariant_factors[i] and H.qvalue(t) == F.q[i]])
    count = 0

    def images_ok(chosen):
        m = len(chosen)
        i = gens[m - 1]
        t = chosen[-1]
        for jj in range(m - 1):
            j = gens[jj]
            if H.bvalue(chosen[jj], t) != F.b[j][i] % 1:
                return False
        return True

    def rec(chosen):
        nonlocal count
        if len(chosen) == len(gens):
            # bijectivity: image spans H (orders multiply and map is injective)
            seen = set()
            for a in F.elements():
                img = tuple(0 for _ in H.invariant_factors)
                for idx, i in enumerate(gens):
                    img = H.add(img, H.scale(chosen[idx], a[i]))
                seen.add(img)
            if len(seen) == H.order:
                count += 1
                return True
            return False
        for t in cands[len(chosen)]:
            chosen.append(t)
            if images_ok(chosen):
                if rec(chosen) and first_only:
                    chosen.pop()
                    return True
            chosen.pop()
        return False

    rec([])
    return count


def cyclic_form(n: int, qgen: Fraction) -> FiniteQuadForm:
    """Cyclic group C_n generated by g with q(g) = qgen mod 2."""
    qgen = Fraction(qgen) % 2
    return FiniteQuadForm((n,), (qgen,), ((qgen / 1 % 1,),))


def orthogonal_sum(*forms: FiniteQuadForm) -> FiniteQuadForm:
    facs, q = [], []
    for F in forms:
        facs.extend(F.invariant_factors)
        q.extend(F.q)
    k = len(facs)
    b = [[Fraction(0)] * k for _ in range(k)]
    off = 0
    for F in forms:
        m = len(F.invariant_factors)
        for i in range(m):
            for j in range(m):
                b[off + i][off + j] = F.b[i][j]
        off += m
    return FiniteQuadForm(tuple(facs), tuple(q), tuple(tuple(r) for r in b))


def discriminant_form(L: GramLattice) -> FiniteQuadForm:
    """D(L) = L^v / L with q(x) = (x, x) mod 2 and b(x, y) = (x, y) mod 1."""
    if L.rank == 0:
        return FiniteQuadForm((), (), ())
    U_, D, V = smith_normal_form(L.gram)
    n = L.rank
    if any(D[i][i] == 0 for i in range(n)):
        raise ValueError("degenerate lattice")
    gens, facs = [], []
    for i in range(n):
        di = D[i][i]
        if di > 1:
            gens.append(tuple(Fraction(V[r][i], di) for r in range(n)))
            facs.append(di)
    G = L.gram
    q = tuple(bilinear(G, g, g) % 2 for g in gens)
    b = tuple(tuple(bilinear(G, g, h) % 1 for h in gens) for g in gens)
    return FiniteQuadForm(tuple(facs), q, b, tuple(gens))


def is_p_elementary(F: FiniteQuadForm, p: int) -> bool:
    return all(n in (1, p) for n in F.invariant_factors)


def divisor(z: Sequence[int], L: GramLattice) -> int:
    """div(z): positive generator of the ideal (z, L)."""
    z = [int(x) for x in z]
    if not any(z):
        raise ValueError("zero vector")
    if reduce(math.gcd, z) != 1:
        raise ValueError("vector is not primitive")
    return reduce(math.gcd, matvec(L.gram, z))


# ---------------------------------------------------------------------------
# isometries


@dataclass(frozen=True)
class Isometry:
    matrix: Matrix
    lattice: GramLattice

    def __post_init__(self):
        M = _mat(self.matrix)
        object.__setattr__(self, "matrix", M)
        G = self.lattice.gram
        if len(M) != len(G) or matmul(matmul(transpose(M), G), M) != [list(r) for r in G]:
            raise ValueError("matrix is not an isometry of the lattice")

    @property
    def det(self) -> int:
        return int(det(self.matrix))

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return Isometry(matmul(self.matrix, other.matrix), self.lattice)

    def __pow__(self, k: int) -> "Isometry":
        if k < 0:
            return self.inverse() ** (-k)
        out = Isometry(identity(len(self.matrix)), self.lattice)
        base = self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def inverse(self) -> "Isometry":
        inv = inverse(self.matrix)
        return Isometry([[int(x) for x in row] for row in inv], self.lattice)

    def apply(self, x):
        return matvec(self.matrix, x)

    def is_identity(self) -> bool:
        return [list(r) for r in self.matrix] == identity(len(self.matrix))

    def to_json(self) -> str:
        return json.dumps({"gram": [list(r) for r in self.lattice.gram],
                           "matrix": [list(r) for r in self.matrix]})

    @classmethod
    def from_json(cls, text: str) -> "Isometry":
        data = json.loads(text)
        return cls(data["matrix"], GramLattice(data["gram"]))


def reflection(z: Sequence[int], L: GramLattice) -> Isometry:
    """sigma_z: u -> u - 2 (u, z)/(z, z) z."""
    z = [int(x) for x in z]
    zz = L.norm(z)
    if zz == 0:
        raise ValueError("isotropic vector has no reflection")
    Gz = matvec(L.gram, z)
    n = L.rank
    cols = []
    for i in range(n):
        c = Fraction(2 * Gz[i], zz)
        if c.denominator != 1:
            raise ValueError("reflection is not an isometry of L")
        cols.append([int(i == r) - int(c) * z[r] for r in range(n)])
    return Isometry(transpose(cols), L)


def reflection_factorization(g: Isometry) -> list[list[Fraction]]:
    """Rational vectors u_1..u_k with g = sigma_{u_1} ... sigma_{u_k}.

    Walk an orthogonal basis b_i.  If u = g b_i - b_i is anisotropic,
    sigma_u sends g b_i to b_i; if it is isotropic then w = g b_i + b_i is
    anisotropic and sigma_{b_i} sigma_w does the job.  Both moves fix the
    b_j already handled.
    """
    G = g.lattice.gram
    n = len(G)
    basis = [list(b) for b in _orthogonal_basis(G)[0]]
    h = [[Fraction(x) for x in row] for row in g.matrix]
    left = []  # reflections applied on the left of g, in order

    def reflect_left(u, h):
        # sigma_u h = h - 2 u (u^T G h) / (u, u), a rank-one update
        uu = bilinear(G, u, u)
        uG = [sum(u[r] * G[r][c] for r in range(n)) for c in range(n)]
        row = [2 * sum(uG[r] * h[r][c] for r in range(n)) / uu for c in range(n)]
        return [[h[r][c] - u[r] * row[c] for c in range(n)] for r in range(n)]

    for b in basis:
        hb = matvec(h, b)
        if hb == b:
            continue
        u = [x - y for x, y in zip(hb, b)]
        if bilinear(G, u, u) != 0:
            h = reflect_left(u, h)
            left.append(u)
        else:
            w = [x + y for x, y in zip(hb, b)]
            h = reflect_left(b, reflect_left(w, h))
            left.extend([w, list(b)])
    assert h == [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    # sigma_k ... sigma_1 g = 1, so g = sigma_1 ... sigma_k
    return left


def spinor_norm(g: Isometry) -> int:
    """Real spinor norm as +1 or -1, with sn(sigma_v) = sign(-(v, v)/2)."""
    G = g.lattice.gram
    sign = 1
    for u in reflection_factorization(g):
        if bilinear(G, u, u) > 0:
            sign = -sign
    return sign


def _dual_v_star(d: int, n: int):
    return [Fraction(0)] * 4 + [Fraction(-1, 2 * d), Fraction(0)], \
           [Fraction(0)] * 5 + [Fraction(-1, 2 * (n + 1))]


def gamma_membership(g: Isometry, d: int, n: int = 2) -> bool:
    """g in Gamma: positive spinor norm, g v* = v*, g w* = det(g) w* mod L."""
    if g.lattice.gram != lattice_L(d, n).gram:
        raise ValueError("not an isometry of L(d, n)")
    if spinor_norm(g) != 1:
        return False
    vs, ws = _dual_v_star(d, n)
    dg = g.det
    if any((x - y).denominator != 1 for x, y in zip(matvec(g.matrix, vs), vs)):
        return False
    return all((x - dg * y).denominator == 1 for x, y in zip(matvec(g.matrix, ws), ws))


# ---------------------------------------------------------------------------
# characteristic polynomials


def char_poly(M) -> list[int]:
    """Coefficients of det(xI - M), lowest degree first (Faddeev-LeVerrier)."""
    n = len(M)
    A = [[int(x) for x in row] for row in M]
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    Mk = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        Mk = matmul(A, Mk)
        for i in range(n):
            Mk[i][i] += coeffs[n - k + 1]
        AM = matmul(A, Mk)
        tr = sum(AM[i][i] for i in range(n))
        assert tr % k == 0
        coeffs[n - k] = -tr // k
    return coeffs


def _poly_divmod(a: list[int], b: list[int]):
    a = list(a)
    q = [0] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and any(a):
        shift = len(a) - len(b)
        c = a[-1] // b[-1]
        if c * b[-1] != a[-1]:
            return None, a
        q[shift] = c
        for i, x in enumerate(b):
            a[i + shift] -= c * x
        while a and a[-1] == 0:
            a.pop()
    return q, a


def cyclotomic(k: int) -> list[int]:
    """Coefficients of the k-th cyclotomic polynomial, lowest degree first."""
    return list(_cyclotomic(k))


def _cyclotomic(k: int) -> tuple[int, ...]:
    num = [-1] + [0] * (k - 1) + [1]
    for j in range(1, k):
        if k % j == 0:
            num, r = _poly_divmod(num, list(_cyclotomic(j)))
            assert not any(r)
    return tuple(num)


def cyclotomic_factorization(poly: list[int]) -> tuple[tuple[int, int], ...] | None:
    """Write a monic integer polynomial as a product of phi_k; None if impossible."""
    p = list(poly)
    deg = len(p) - 1
    out = []
    k = 1
    # phi(k) <= deg forces k <= 2 deg^2 comfortably
    while len(p) > 1 and k <= max(2, 2 * deg * deg):
        phi = list(_cyclotomic(k))
        mult = 0
        while len(p) >= len(phi):
            q, r = _poly_divmod(p, phi)
            if q is None or any(r):
                break
            p = q
            while len(p) > 1 and p[-1] == 0:
                p.pop()
            mult += 1
        if mult:
            out.append((k, mult))
        k += 1
    if len(p) != 1 or p[0] != 1:
        return None
    return tuple(out)


def char_poly_type(g: Isometry) -> tuple[tuple[int, int], ...]:
    fac = cyclotomic_factorization(char_poly(g.matrix))
    if fac is None:
        raise ValueError("characteristic polynomial is not a product of cyclotomic factors")
    order = reduce(math.lcm, (k for k, _ in fac), 1)
    if not (g ** order).is_identity():
        raise ValueError("isometry has infinite order")
    return fac


# ---------------------------------------------------------------------------
# SL2 x SL2 -> SO+(2U)


G3 = ((0, 1), (-1, -1))


def _check_sl2(A):
    (a, b), (c, d) = A
    if a * d - b * c != 1:
        raise ValueError("matrix must have determinant 1")
    return a, b, c, d


def _delta_left(A):
    a, b, c, d = _check_sl2(A)
    return [[a, 0, 0, b], [0, d, -c, 0], [0, -b, a, 0], [c, 0, 0, d]]


def _delta_right(B):
    a, b, c, d = _check_sl2(B)
    return [[d, 0, -c, 0], [0, a, 0, b], [-b, 0, a, 0], [0, c, 0, d]]


def delta_embed(A, B) -> Isometry:
    """delta(A, B) acting on 2U = <e1, f1, e2, f2>."""
    return Isometry(matmul(_delta_left(A), _delta_right(B)), direct_sum(U(), U()))


def Delta(A, B, L: GramLattice) -> Isometry:
    """Extend delta(A, B) to L = 2U + rest by the identity on the rest."""
    small = delta_embed(A, B).matrix
    n = L.rank
    M = identity(n)
    for i in range(4):
        for j in range(4):
            M[i][j] = small[i][j]
    return Isometry(M, L)


def invariant_split(g: Isometry) -> tuple[GramLattice, GramLattice]:
    """(T, S): the fixed sublattice of g and its orthogonal complement.

    Both carry their basis in ``embedding`` (columns in ambient coordinates).
    """
    L = g.lattice
    n = L.rank
    gm1 = [[g.matrix[i][j] - int(i == j) for j in range(n)] for i in range(n)]
    T = integer_kernel(gm1)
    tcols = transpose(T) if T and T[0] else []
    if tcols:
        S = integer_kernel(matmul(tcols, L.gram))
    else:
        S = identity(n)
    scols = transpose(S) if S and S[0] else []

    def sub(cols):
        gram = [[L.pair(x, y) for y in cols] for x in cols]
        return GramLattice(gram, embedding=tuple(tuple(c) for c in cols))

    return sub(tcols), sub(scols)
