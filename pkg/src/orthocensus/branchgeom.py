"""Reflective vectors of L = 2U + <-2r> + <-2s> and their orthogonal complements.

A primitive z in L with div(z) = m, z^2 = -u and z/m = k v* + l w* mod L is
recorded as the data (u, m, k, l).  The congruence classifier decides when the
reflection in z normalises the dual classes in the way membership in Gamma
requires; the remaining functions count the resulting lattice classes.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, TextIO

from .arith import count_unit_sqrt, factorize, nu, valuation
from .qlattice import (
    FiniteQuadForm,
    GramLattice,
    divisor,
    integer_kernel,
    lattice_L,
    matmul,
    matvec,
    transpose,
)


def order_mod(x: int, n: int) -> int:
    """Order of x in Z/nZ."""
    return n // math.gcd(x % n, n)


@dataclass(frozen=True)
class CongruenceInstance:
    r: int
    s: int
    k: int
    l: int
    m: int
    u: int

    def __post_init__(self):
        if self.r < 1 or self.s < 2:
            raise ValueError("need r >= 1 and s > 1")
        m = math.lcm(order_mod(self.k, 2 * self.r), order_mod(self.l, 2 * self.s))
        if self.m != m:
            raise ValueError(f"m = {self.m} is not the order {m} of (k, l)")
        if self.u not in (self.m, 2 * self.m):
            raise ValueError("u must be m or 2m")

    @classmethod
    def make(cls, r: int, s: int, k: int, l: int, double: bool = False) -> "CongruenceInstance":
        k, l = k % (2 * r), l % (2 * s)
        m = math.lcm(order_mod(k, 2 * r), order_mod(l, 2 * s))
        return cls(r, s, k, l, m, 2 * m if double else m)

    @property
    def m_l(self) -> int:
        return order_mod(self.l, 2 * self.s)


def congruence_oracle(inst: CongruenceInstance) -> bool:
    """Literal test of ur | mk, 2rsu | m^2 kl and 2s | m^2 l^2/(us) - 2."""
    r, s, k, l, m, u = inst.r, inst.s, inst.k % (2 * inst.r), inst.l % (2 * inst.s), inst.m, inst.u
    if (m * k) % (u * r):
        return False
    if (m * m * k * l) % (2 * r * s * u):
        return False
    t = Fraction(m * m * l * l, u * s) - 2
    return t.denominator == 1 and t.numerator % (2 * s) == 0


def classify_congruence(inst: CongruenceInstance) -> str:
    """Case tag 1a, 1b, 2a, 2b, or none."""
    r, s, m, u = inst.r, inst.s, inst.m, inst.u
    k, l = inst.k % (2 * r), inst.l % (2 * s)
    if k == 0:
        if u == m:
            if l % 2 and (l * l - 1) % s == 0 and m == 2 * s:
                return "1a"
            if l % 2 == 0 and (l * l - 2) % (2 * s) == 0 and m == s:
                return "1a"
        elif l % 2 == 0 and (2 * (l // 2) ** 2 - 2) % (2 * s) == 0 and m == s:
            return "1b"
        return "none"
    if k == r and u == m:
        ml = inst.m_l
        if ml % 2 == 0 and l % 2 and (2 * l * l - 2) % (2 * s) == 0 and m == 2 * s:
            return "2a"
        if ml % 2 and l % 2 == 0 and (l * l - 1) % s == 0 and ml == s:
            return "2b"
    return "none"


# ---------------------------------------------------------------------------
# genus of the orthogonal complement


@dataclass(frozen=True)
class KGenus:
    """Discriminant data of z^perp as stated for the listed cases.

    ``kind`` is "cyclic", "split" or "impossible"; ``gram`` is the Gram
    matrix of delta (so q_K = -delta) on the canonical generators.
    """

    kind: str
    invariant_factors: tuple[int, ...] = ()
    gram: tuple[tuple[Fraction, ...], ...] = ()

    def form(self, negate: bool = True) -> FiniteQuadForm:
        if self.kind == "impossible":
            raise ValueError("no form for an impossible case")
        sgn = -1 if negate else 1
        n = len(self.gram)
        q = tuple((sgn * self.gram[i][i]) % 2 for i in range(n))
        b = tuple(tuple((sgn * self.gram[i][j]) % 1 for j in range(n)) for i in range(n))
        return FiniteQuadForm(self.invariant_factors, q, b)


IMPOSSIBLE = KGenus("impossible")


def k_genus(u: int, m: int, r: int, s: int, k: int, l: int) -> KGenus:
    k %= 2 * r
    l %= 2 * s
    if k == 0 and ((u == m == 2 * s) or (u == 2 * m and m == s)):
        return KGenus("cyclic", (2 * r,), ((Fraction(1, 2 * r),),))
    if k == 0 and u == m == s:
        return IMPOSSIBLE
    if k == r and u == m == 2 * s:
        if l % 2 or r % 2 == 0 or s % 2 == 0:
            return IMPOSSIBLE
        off = Fraction(-l, 2)
        gram = ((Fraction(1 - l * l, 2 * s), off), (off, Fraction(1 - s * r, 2 * r)))
        return KGenus("split", (2, r), gram)
    raise ValueError(f"parameters (u={u}, m={m}, k={k}, l={l}) match no listed case")


def realize_vector(u: int, m: int, r: int, s: int, k: int, l: int,
                   search: int | None = None) -> list[int] | None:
    """A primitive z in 2U + <-2r> + <-2s> with data (u, m, k, l), if one is found.

    z = m (k v* + l w* + lam) with lam = alpha v + beta w + e1 + t f1 and
    alpha, beta in a window of width ``search`` (default m + 2).
    """
    L = lattice_L(r, s - 1)
    w = m + 2 if search is None else search
    for al in range(-w, w + 1):
        cv = m * (Fraction(-k, 2 * r) + al)
        if cv.denominator != 1:
            continue
        for be in range(-w, w + 1):
            cw = m * (Fraction(-l, 2 * s) + be)
            if cw.denominator != 1 or math.gcd(m, int(cv), int(cw)) != 1:
                continue
            rest = Fraction(-u) + cv * cv * 2 * r + cw * cw * 2 * s
            t = rest / (2 * m * m)
            if t.denominator != 1:
                continue
            z = [m, m * int(t), 0, 0, int(cv), int(cw)]
            if divisor(z, L) == m:
                return z
    return None


def perp_lattice(L: GramLattice, z: list[int]) -> GramLattice:
    """z^perp in L, with its basis recorded as the embedding."""
    B = integer_kernel([matvec(L.gram, z)])
    return GramLattice(matmul(transpose(B), matmul(L.gram, B)), embedding=B)


# ---------------------------------------------------------------------------
# reflective classes


@dataclass(frozen=True)
class ReflectiveClass:
    tag: str
    u: int
    m: int
    r: int
    s: int
    k: int
    family: int
    j_case: str
    sign: int
    odd_only: bool

    @property
    def k_pattern(self) -> str:
        return "0" if self.k == 0 else "r"


def reflective_classes(d: int, n: int = 2) -> list[ReflectiveClass]:
    """The classes B1..B6 of complements of reflective vectors in L(d)."""
    if d <= 1:
        raise ValueError("d > 1")
    t = n + 1
    out = [
        ReflectiveClass("B1", 2 * t, t, d, t, 0, 2, "even2", +1, False),
        ReflectiveClass("B2", 2 * t, 2 * t, d, t, 0, 1, "odd", +1, False),
        ReflectiveClass("B3", 2 * t, 2 * t, d, t, d, 3, "even", +1, True),
        ReflectiveClass("B4", 2 * d, d, t, d, 0, 2, "even2", -1, False),
        ReflectiveClass("B5", 2 * d, 2 * d, t, d, 0, 1, "odd", -1, False),
        ReflectiveClass("B6", 2 * d, 2 * d, t, d, t, 3, "even", -1, True),
    ]
    return [c for c in out if not (c.odd_only and d % 2 == 0)]


def _j_condition(s: int, l: int, case: str) -> bool:
    if case == "odd":
        return l % 2 == 1 and (l * l - 1) % s == 0
    if case == "even2":
        return l % 2 == 0 and (2 * (l // 2) ** 2 - 2) % (2 * s) == 0
    if case == "even":
        return l % 2 == 0 and (l * l - 1) % s == 0
    raise ValueError(f"unknown case {case!r}")


def class_residues(c: ReflectiveClass) -> list[int]:
    """Residues l mod 2s allowed for the class."""
    return [l for l in range(2 * c.s) if _j_condition(c.s, l, c.j_case)]


def class_instance(c: ReflectiveClass, l: int) -> CongruenceInstance:
    return CongruenceInstance.make(c.r, c.s, c.k, l, double=(c.u == 2 * c.m))


# ---------------------------------------------------------------------------
# counting


def _unit_sqrt_one_mod(s: int) -> int:
    """#{x mod s : x^2 = 1 mod s} via CRT."""
    total = 1
    for p, e in factorize(s).factors:
        if p > 2:
            total *= 2
        else:
            total *= {1: 1, 2: 2}.get(e, 4)
    return total


def jj_count(s: int, case: str) -> int:
    """Number of l mod 2s satisfying the case condition."""
    if s < 1:
        raise ValueError("s >= 1")
    if case not in ("odd", "even2", "even"):
        raise ValueError(f"unknown case {case!r}")
    roots = _unit_sqrt_one_mod(s) if s > 1 else 1
    if case == "even2" or s % 2:
        # l = 2 l1 with l1^2 = 1 mod s, or s odd where parity picks one lift of each root
        count = roots
    else:
        # s even forces l odd; both lifts mod 2s of each root are odd
        count = 2 * roots if case == "odd" else 0
    bound = jj_bound(s, case)
    if count > bound:
        raise AssertionError(f"J count {count} exceeds bound {bound} for s={s}")
    return count


def jj_bound(s: int, case: str) -> int:
    v, n = valuation(s, 2), nu(s)
    if case == "even":
        return 2 ** (n + 1)
    if case == "odd":
        return 2 ** (n + {0: 1, 1: 0, 2: 1}.get(v, 2))
    if case == "even2":
        return 2 ** (n + {0: 0, 1: -1, 2: 0}.get(v, 1))
    raise ValueError(f"unknown case {case!r}")


def jj_count_naive(s: int, case: str) -> int:
    return sum(1 for l in range(2 * s) if _j_condition(s, l, case))


def oq_bound(r: int) -> int:
    return 2 ** (nu(2 * r) - 1) if r % 2 else 2 ** nu(2 * r)


def oq_count(r: int, theta: int = 1) -> int:
    """|O(q)| for the cyclic form theta/2r on C_{2r} (theta a unit).

    Automorphisms are x -> cx with c^2 = 1 mod 4r; the residues c mod 4r come
    in pairs c, c + 2r, so the count mod 4r is halved.
    """
    if r < 1:
        raise ValueError("r >= 1")
    if math.gcd(theta, 2 * r) != 1:
        raise ValueError("theta must be a unit mod 2r")
    count = count_unit_sqrt(1, 4 * r) // 2
    if count > oq_bound(r):
        raise AssertionError(f"|O(q)| = {count} exceeds bound {oq_bound(r)}")
    return count


def _cyclic_automorphisms(n: int, qgen: Fraction) -> int:
    """#{c mod n unit : (c^2 - 1) q = 0 mod 2} via CRT on prime powers."""
    qgen = Fraction(qgen) % 2
    if qgen == 0:
        M = 1
    else:
        M = 2 * qgen.denominator // math.gcd(2 * qgen.denominator, qgen.numerator)
    N = math.lcm(n, M)
    total = 1
    for p, e in factorize(N).factors:
        f = valuation(M, p)
        phi = p ** (e - 1) * (p - 1)
        if f == 0:
            total *= phi
        elif p > 2:
            total *= 2 * p ** (e - f)
        elif f <= 2:
            total *= phi
        else:
            total *= 4 * 2 ** (e - f)
    return total // (N // n)


def orthogonal_group_order(q: FiniteQuadForm, cap: int = 10**4) -> int:
    if q.order <= cap:
        return q.automorphisms(limit=cap)
    nontrivial = [i for i, n in enumerate(q.invariant_factors) if n > 1]
    if len(nontrivial) == 1:
        i = nontrivial[0]
        return _cyclic_automorphisms(q.invariant_factors[i], q.q[i])
    raise ValueError("group too large for brute force and not cyclic")


def ii_bound(q: FiniteQuadForm, cap: int = 10**4) -> int:
    """4 |O(q)|."""
    return 4 * orthogonal_group_order(q, cap)


# ---------------------------------------------------------------------------
# tables


CLASS_CSV_FIELDS = ("d", "tag", "u", "m", "k_pattern", "J", "I_bound", "vol_lo", "vol_hi")


def class_table(d: int, precision: int = 128) -> list[dict]:
    from .arith import CertifiedReal, certified_constant
    from .hmvol import kbound, vol_O_K

    rows = []
    pi = certified_constant("pi", precision)
    for c in reflective_classes(d):
        J = jj_count(c.s, c.j_case)
        I = 4 * oq_count(c.r)
        if c.family in (1, 2):
            enc = vol_O_K(c.family, c.r, precision=precision).enclosure
        else:
            kb, _ = kbound(3, c.r)
            enc = CertifiedReal.exact(kb, precision) / (pi * pi)
        rows.append({"d": d, "tag": c.tag, "u": c.u, "m": c.m, "k_pattern": c.k_pattern, "J": J,
                     "I_bound": I, "vol_lo": f"{float(enc.lower):.12e}", "vol_hi": f"{float(enc.upper):.12e}"})
    return rows


def write_class_csv(rows: Iterable[dict], fh: TextIO) -> None:
    w = csv.DictWriter(fh, fieldnames=CLASS_CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
