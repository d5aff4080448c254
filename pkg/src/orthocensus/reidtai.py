"""Cyclic quotient singularities of orthogonal modular fourfolds.

An isometry g of finite order m of a lattice N of signature (2, n) fixing
[w] in the period domain acts on the tangent space Hom(W, W^perp/W).  If the
eigenvalues of g are xi_m^{e_1}, ..., xi_m^{e_{n+4}} and w, together with the
dual eigenline that pairs with it, carry exponents e_a and e_b = -e_a, the
tangent action is 1/m(e_j - e_a : j != a, b).  The scan runs over all
rational types of g and all such eigenline pairs and records the tangent
actions whose cyclic quotient fails the Reid-Tai test.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

from .arith import factorize

QR_MODES = ("exempt", "naive")


def totient(n: int) -> int:
    out = n
    for p in factorize(n).primes:
        out = out // p * (p - 1)
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients of phi_n, constant term first."""
    if n < 1:
        raise ValueError("n >= 1")
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            num = _divide(num, cyclotomic_poly(d))
    return tuple(num)


def _divide(num: list[int], den: tuple[int, ...]) -> list[int]:
    num = list(num)
    q = [0] * (len(num) - len(den) + 1)
    for i in range(len(q) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        q[i] = c
        for j, dj in enumerate(den):
            num[i + j] -= c * dj
    if any(num):
        raise ArithmeticError("inexact division")
    return q


def phi_value(n: int, x: int) -> int:
    return sum(c * x**i for i, c in enumerate(cyclotomic_poly(n)))


def phi_at_one(n: int) -> int:
    """Classical value: 0 for n = 1, p for n = p^k, 1 otherwise."""
    if n == 1:
        return 0
    ps = factorize(n).primes
    return ps[0] if len(ps) == 1 else 1


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class CyclotomicType:
    """Characteristic polynomial prod phi_n^{k_n} of a finite-order isometry."""

    parts: tuple[tuple[int, int], ...]

    def __post_init__(self):
        merged: Counter = Counter()
        for n, k in self.parts:
            if n < 1 or k < 1:
                raise ValueError("orders and multiplicities must be positive")
            merged[n] += k
        object.__setattr__(self, "parts", tuple(sorted(merged.items())))

    @classmethod
    def of(cls, *orders: int) -> "CyclotomicType":
        return cls(tuple(Counter(orders).items()))

    @property
    def degree(self) -> int:
        return sum(k * totient(n) for n, k in self.parts)

    @property
    def order(self) -> int:
        return math.lcm(*(n for n, _ in self.parts))

    def eigen_exponents(self, m: int | None = None) -> tuple[int, ...]:
        """Exponents e with eigenvalue xi_m^e, listed part by part."""
        m = m or self.order
        if m % self.order:
            raise ValueError("m must be a multiple of the order")
        out = []
        for n, k in self.parts:
            roots = [j * (m // n) for j in range(n) if math.gcd(j, n) == 1]
            out.extend(roots * k)
        return tuple(out)

    def det(self) -> int:
        s = sum(self.eigen_exponents())
        m = self.order
        if (2 * s) % m:
            raise ArithmeticError("determinant is not real")
        return 1 if s % m == 0 else -1

    def value(self, x: int) -> int:
        out = 1
        for n, k in self.parts:
            out *= phi_value(n, x) ** k
        return out

    def label(self) -> str:
        return "*".join(f"phi{n}" + (f"^{k}" if k > 1 else "") for n, k in self.parts)

    @classmethod
    def parse(cls, text: str) -> "CyclotomicType":
        parts = []
        for tok in text.replace(" ", "").split("*"):
            if not tok.startswith("phi"):
                raise ValueError(f"bad factor {tok!r}")
            base, _, exp = tok[3:].partition("^")
            parts.append((int(base), int(exp) if exp else 1))
        return cls(tuple(parts))


def _all_types(dim: int) -> list[CyclotomicType]:
    orders = [n for n in range(1, 2 * dim * dim + 3) if totient(n) <= dim]
    out = []

    def rec(i, left, acc):
        if left == 0:
            out.append(CyclotomicType.of(*acc))
            return
        for j in range(i, len(orders)):
            t = totient(orders[j])
            if t <= left:
                rec(j, left - t, acc + [orders[j]])

    rec(0, dim, [])
    return out


@lru_cache(maxsize=None)
def _types_by_order(dim: int) -> dict[int, tuple[CyclotomicType, ...]]:
    table: dict[int, list] = {}
    for t in _all_types(dim):
        table.setdefault(t.order, []).append(t)
    return {m: tuple(v) for m, v in sorted(table.items())}


def enumerate_types(m: int, dim: int = 6) -> list[CyclotomicType]:
    """Faithful rational types of C_m in dimension dim."""
    if m < 1:
        raise ValueError("m >= 1")
    return list(_types_by_order(dim).get(m, ()))


def admissible_orders(dim: int = 6) -> list[int]:
    return list(_types_by_order(dim))


# ---------------------------------------------------------------------------
# singularities


@dataclass(frozen=True)
class QuotientSingularity:
    """1/m(a_1, ..., a_k): the diagonal action diag(xi_m^{a_i})."""

    m: int
    exponents: tuple[int, ...]

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m >= 1")
        object.__setattr__(self, "exponents", tuple(a % self.m for a in self.exponents))

    def age(self) -> Fraction:
        return Fraction(sum(self.exponents), self.m)

    def power(self, k: int) -> "QuotientSingularity":
        return QuotientSingularity(self.m, tuple(k * a for a in self.exponents))

    def inverse(self) -> "QuotientSingularity":
        return self.power(-1)

    def is_trivial(self) -> bool:
        return not any(self.exponents)

    def is_quasi_reflection(self) -> bool:
        return sum(1 for a in self.exponents if a) == 1

    def order(self) -> int:
        g = self.m
        for a in self.exponents:
            g = math.gcd(g, a)
        return self.m // g

    def sorted(self) -> "QuotientSingularity":
        return QuotientSingularity(self.m, tuple(sorted(self.exponents)))

    def canonical_class(self) -> tuple[int, tuple[int, ...]]:
        """Invariant of the cyclic group: reduced order and the least sorted generator."""
        r = self.order()
        if r == 1:
            return 1, (0,) * len(self.exponents)
        step = self.m // r
        base = [a // step for a in self.exponents]
        best = min(tuple(sorted(u * a % r for a in base))
                   for u in range(1, r) if math.gcd(u, r) == 1)
        return r, best

    def label(self) -> str:
        return f"1/{self.m}(" + ",".join(map(str, self.exponents)) + ")"

    @classmethod
    def parse(cls, text: str) -> "QuotientSingularity":
        t = text.replace(" ", "")
        if not t.startswith("1/") or not t.endswith(")") or "(" not in t:
            raise ValueError(f"bad singularity {text!r}")
        m, _, rest = t[2:].partition("(")
        return cls(int(m), tuple(int(x) for x in rest[:-1].split(",")))


def age(s: QuotientSingularity) -> Fraction:
    return s.age()


def tangent_weights(eigen_exponents: Iterable[int], a: int, b: int, m: int) -> QuotientSingularity:
    """Tangent action at [w] when w is the a-th eigenline and pairs with the b-th.

    Positions are 1-based.  The pair must be dual: e_a + e_b = 0 mod m.
    """
    e = [x % m for x in eigen_exponents]
    if not (1 <= a <= len(e) and 1 <= b <= len(e)) or a == b:
        raise ValueError("a and b must be distinct positions")
    if (e[a - 1] + e[b - 1]) % m:
        raise ValueError("the eigenlines a and b do not pair")
    rest = [x - e[a - 1] for j, x in enumerate(e, 1) if j not in (a, b)]
    return QuotientSingularity(m, tuple(rest))


def noncanonical_witness(s: QuotientSingularity, quasi_reflections: str = "exempt") -> QuotientSingularity | None:
    """First power of s failing the age test, or None if C^k/<s> passes.

    With quasi_reflections="exempt" powers acting as quasi-reflections are
    skipped; "naive" applies the age test to every nontrivial power.
    """
    if quasi_reflections not in QR_MODES:
        raise ValueError(f"quasi_reflections must be one of {QR_MODES}")
    for k in range(1, s.m):
        h = s.power(k)
        if h.is_trivial():
            continue
        if quasi_reflections == "exempt" and h.is_quasi_reflection():
            continue
        if h.age() < 1:
            return h
    return None


# ---------------------------------------------------------------------------
# scan


@dataclass(frozen=True)
class ScanRow:
    singularity: QuotientSingularity
    chi: CyclotomicType
    alpha: int
    witness: QuotientSingularity = field(compare=False)

    def key(self) -> tuple:
        return (self.chi.parts, self.alpha % self.singularity.m, self.witness.canonical_class())

    def line(self) -> str:
        m = self.singularity.m
        return f"{self.singularity.sorted().label()} | {self.chi.label()} | xi{m}^{self.alpha % m}"


def _scan_type(t: CyclotomicType, quasi_reflections: str) -> list[ScanRow]:
    m = t.order
    e = t.eigen_exponents()
    seen = set()
    rows = []
    for a in range(1, len(e) + 1):
        for b in range(1, len(e) + 1):
            if a == b or (e[a - 1] + e[b - 1]) % m:
                continue
            s = tangent_weights(e, a, b, m).sorted()
            if (e[a - 1], s) in seen:
                continue
            seen.add((e[a - 1], s))
            h = noncanonical_witness(s, quasi_reflections)
            if h is not None:
                rows.append(ScanRow(s, t, e[a - 1], h))
    return rows


def noncanonical_scan(n: int = 2, quasi_reflections: str = "exempt") -> list[ScanRow]:
    """All (tangent action, chi_g, alpha) with a non-canonical cyclic quotient."""
    dim = n + 4
    rows = []
    for m in admissible_orders(dim):
        for t in enumerate_types(m, dim):
            rows.extend(_scan_type(t, quasi_reflections))
    rows.sort(key=lambda r: (r.singularity.m, r.chi.parts, r.alpha, r.singularity.exponents))
    return rows


def format_table(rows: Iterable[ScanRow]) -> str:
    return "".join(r.line() + "\n" for r in rows)


# ---------------------------------------------------------------------------
# the published table


@dataclass(frozen=True)
class TableEntry:
    singularity: QuotientSingularity
    chi: CyclotomicType
    alpha: int

    def key(self) -> tuple:
        return (self.chi.parts, self.alpha % self.chi.order, self.singularity.canonical_class())


def _parse_alpha(tok: str, chi: CyclotomicType) -> int:
    t = tok.strip()
    if not t.startswith("xi"):
        raise ValueError(f"bad alpha {tok!r}")
    base, _, exp = t[2:].partition("^")
    r, k = int(base), int(exp) if exp else 1
    m = chi.order
    if m % r:
        raise ValueError(f"xi_{r} is not an m-th root of unity for m = {m}")
    e = k * (m // r) % m
    if e not in chi.eigen_exponents():
        raise ValueError(f"{tok} is not an eigenvalue of {chi.label()}")
    return e


def load_table(path: str | Path | None = None) -> list[TableEntry]:
    """Rows 'singularity | chi | alpha'; '#' starts a comment."""
    if path is None:
        text = (resources.files("orthocensus") / "data" / "reidtai_table.txt").read_text()
    else:
        text = Path(path).read_text()
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cols = [c.strip() for c in line.split("|")]
        if len(cols) != 3:
            raise ValueError(f"line {lineno}: expected 3 columns")
        chi = CyclotomicType.parse(cols[1])
        out.append(TableEntry(QuotientSingularity.parse(cols[0]), chi, _parse_alpha(cols[2], chi)))
    return out


@dataclass
class TableComparison:
    matched: list[tuple]
    scan_only: list[tuple]
    table_only: list[tuple]

    @property
    def exact(self) -> bool:
        return not self.scan_only and not self.table_only

    def summary(self) -> dict:
        def fmt(keys):
            return sorted(f"{CyclotomicType(k[0]).label()} alpha={k[1]} class="
                          + QuotientSingularity(k[2][0], k[2][1]).label() for k in keys)
        return {"matched": len(self.matched), "scan_only": fmt(self.scan_only),
                "table_only": fmt(self.table_only), "exact": self.exact}


def compare_with_table(rows: Iterable[ScanRow], table: Iterable[TableEntry]) -> TableComparison:
    """Match (chi, alpha, class of the non-canonical subgroup) as multisets.

    The table may repeat a key; the scan emits each key once, so table keys
    are first reduced to a set.
    """
    scan = set(r.key() for r in rows)
    tab = set(e.key() for e in table)
    return TableComparison(sorted(scan & tab), sorted(scan - tab), sorted(tab - scan))


# ---------------------------------------------------------------------------
# Gamma congruences

LEMMA_TYPES = (CyclotomicType.of(3, 3, 3), CyclotomicType.of(1, 1, 6, 6),
               CyclotomicType.of(1, 1, 1, 2, 3), CyclotomicType.of(6, 6, 6))


def gamma_congruence_filter(t: CyclotomicType, d: int, n: int = 2) -> bool:
    """chi(1) = 0 mod 2d and chi(det g) = 0 mod 2(n+1)."""
    if d <= 48:
        raise ValueError("the filter is stated for d > 48")
    return t.value(1) % (2 * d) == 0 and t.value(t.det()) % (2 * (n + 1)) == 0


def filter_report(d: int, chis: Iterable[CyclotomicType], n: int = 2) -> dict:
    """Types surviving the congruences, compared with the four-type list."""
    chis = sorted(set(chis), key=lambda c: c.parts)
    surviving = [c for c in chis if gamma_congruence_filter(c, d, n)]
    lemma = set(LEMMA_TYPES)
    return {
        "d": d,
        "surviving": [c.label() for c in surviving],
        "lemma_not_surviving": sorted(c.label() for c in lemma - set(surviving)),
        "surviving_not_in_lemma": sorted(c.label() for c in set(surviving) - lemma),
    }
