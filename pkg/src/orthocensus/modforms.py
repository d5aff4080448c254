"""Theta blocks, Jacobi-form bookkeeping and the weight-3 cusp form census.

Series are stored with exponents as scaled integers: q-exponents in units of
1/24 and each r-exponent in units of 1/2.  A key is (q_num, r_num, ...) with
one r entry per elliptic variable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

Q_DEN = 24
R_DEN = 2


@dataclass(frozen=True)
class JacobiMeta:
    weight: Fraction
    index: Fraction
    eta_power: int  # e in v_eta^e, mod 24
    heisenberg: int  # f in nu_H^f, mod 2

    def __mul__(self, other: "JacobiMeta") -> "JacobiMeta":
        return JacobiMeta(self.weight + other.weight, self.index + other.index,
                          (self.eta_power + other.eta_power) % 24, (self.heisenberg + other.heisenberg) % 2)

    def label(self) -> str:
        return f"J_{{{self.weight}, A1; {self.index}}}(v_eta^{self.eta_power} x nu_H^{self.heisenberg})"


ONE_META = JacobiMeta(Fraction(0), Fraction(0), 0, 0)


@dataclass(frozen=True)
class FourierSeries2:
    """sum c q^{q_num/24} r_1^{r_1/2} ... truncated below q^{q_trunc}.

    ``q_trunc`` is None for an exact (finite) series.
    """

    coeffs: dict
    q_trunc: Fraction | None
    nvars: int = 1
    meta: JacobiMeta | None = field(default=None, compare=False)

    def __post_init__(self):
        clean = {}
        for k, c in self.coeffs.items():
            if len(k) != self.nvars + 1:
                raise ValueError("key length does not match the number of variables")
            if c and (self.q_trunc is None or Fraction(k[0], Q_DEN) < self.q_trunc):
                clean[tuple(k)] = c
        object.__setattr__(self, "coeffs", clean)

    def coefficient(self, q: Fraction, *r: Fraction) -> int:
        q = Fraction(q)
        if self.q_trunc is not None and q >= self.q_trunc:
            raise ValueError("exponent beyond truncation")
        qn = q * Q_DEN
        rn = [Fraction(x) * R_DEN for x in r]
        if qn.denominator != 1 or any(x.denominator != 1 for x in rn):
            return 0
        return self.coeffs.get((int(qn), *map(int, rn)), 0)

    def truncate(self, q_trunc: Fraction) -> "FourierSeries2":
        q_trunc = Fraction(q_trunc)
        if self.q_trunc is not None and q_trunc > self.q_trunc:
            raise ValueError("cannot extend truncation")
        return FourierSeries2(self.coeffs, q_trunc, self.nvars, self.meta)

    def q_min(self) -> Fraction | None:
        if not self.coeffs:
            return None
        return Fraction(min(k[0] for k in self.coeffs), Q_DEN)

    def dump(self) -> str:
        """Lines 'q_num/24 r_num/2 coeff', sorted."""
        lines = []
        for k in sorted(self.coeffs):
            rs = " ".join(f"{x}/{R_DEN}" for x in k[1:])
            lines.append(f"{k[0]}/{Q_DEN} {rs} {self.coeffs[k]}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def parse(cls, text: str, q_trunc: Fraction | None) -> "FourierSeries2":
        coeffs = {}
        nvars = 1
        for line in text.splitlines():
            if not line.strip():
                continue
            parts = line.split()
            key = tuple(int(p.split("/")[0]) for p in parts[:-1])
            nvars = len(key) - 1
            coeffs[key] = int(parts[-1])
        return cls(coeffs, q_trunc, nvars)


def kron_m4(m: int) -> int:
    """(-4/m)."""
    if m % 2 == 0:
        return 0
    return 1 if m % 4 == 1 else -1


def kron_12(n: int) -> int:
    """(12/n)."""
    if math.gcd(n, 12) != 1:
        return 0
    return 1 if n % 12 in (1, 11) else -1


def theta(prec) -> tuple[FourierSeries2, JacobiMeta]:
    """sum (-4/m) q^{m^2/8} r^{m/2} below q^prec."""
    prec = Fraction(prec)
    if prec <= 0:
        raise ValueError("prec > 0")
    coeffs = {}
    m = 0
    while Fraction(m * m, 8) < prec:
        for s in ((m, -m) if m else (0,)):
            c = kron_m4(s)
            if c:
                coeffs[(3 * s * s, s)] = c
        m += 1
    meta = JacobiMeta(Fraction(1, 2), Fraction(1, 2), 3, 1)
    return FourierSeries2(coeffs, prec, 1, meta), meta


def theta32(prec) -> tuple[FourierSeries2, JacobiMeta]:
    """sum (12/n) q^{n^2/24} r^{n/2} below q^prec."""
    prec = Fraction(prec)
    if prec <= 0:
        raise ValueError("prec > 0")
    coeffs = {}
    n = 0
    while Fraction(n * n, 24) < prec:
        for s in ((n, -n) if n else (0,)):
            c = kron_12(s)
            if c:
                coeffs[(s * s, s)] = c
        n += 1
    meta = JacobiMeta(Fraction(1, 2), Fraction(3, 2), 1, 1)
    return FourierSeries2(coeffs, prec, 1, meta), meta


def scale_z(f: FourierSeries2, a: int) -> FourierSeries2:
    """f(tau, a z): r-exponents times a, index times a^2."""
    if a < 1:
        raise ValueError("a >= 1")
    coeffs = {(k[0], *(a * x for x in k[1:])): c for k, c in f.coeffs.items()}
    meta = None
    if f.meta is not None:
        meta = JacobiMeta(f.meta.weight, f.meta.index * a * a, f.meta.eta_power, f.meta.heisenberg)
    return FourierSeries2(coeffs, f.q_trunc, f.nvars, meta)


def _min_trunc(a: Fraction | None, b: Fraction | None) -> Fraction | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _multiply(f: FourierSeries2, g: FourierSeries2, tensor: bool) -> FourierSeries2:
    trunc = _min_trunc(f.q_trunc, g.q_trunc)
    limit = None if trunc is None else trunc * Q_DEN
    out: dict = {}
    for kf, cf in f.coeffs.items():
        for kg, cg in g.coeffs.items():
            q = kf[0] + kg[0]
            if limit is not None and q >= limit:
                continue
            if tensor:
                key = (q, *kf[1:], *kg[1:])
            else:
                key = (q, *(x + y for x, y in zip(kf[1:], kg[1:])))
            out[key] = out.get(key, 0) + cf * cg
    nv = f.nvars + g.nvars if tensor else f.nvars
    meta = f.meta * g.meta if (f.meta is not None and g.meta is not None and not tensor) else None
    return FourierSeries2(out, trunc, nv, meta)


def product(fs: Sequence[FourierSeries2]) -> tuple[FourierSeries2, JacobiMeta]:
    """Product in a common elliptic variable; all truncations must agree."""
    fs = list(fs)
    truncs = {f.q_trunc for f in fs if f.q_trunc is not None}
    if len(truncs) > 1:
        raise ValueError("truncation mismatch")
    out = FourierSeries2({(0, 0): 1}, None, 1, ONE_META)
    meta = ONE_META
    for f in fs:
        if f.nvars != 1:
            raise ValueError("product expects one elliptic variable")
        out = _multiply(out, f, tensor=False)
        meta = meta * (f.meta or ONE_META)
    return FourierSeries2(out.coeffs, out.q_trunc, 1, meta), meta


def tensor(f: FourierSeries2, g: FourierSeries2) -> FourierSeries2:
    """(f x g)(tau, z, w) = f(tau, z) g(tau, w)."""
    return _multiply(f, g, tensor=True)


def cusp_constant_check(f: FourierSeries2) -> bool:
    """True iff every coefficient with q-exponent 0 vanishes."""
    return all(k[0] != 0 for k in f.coeffs)


def support_ok(f: FourierSeries2, index: Fraction) -> bool:
    """4 m n - l^2 >= 0 on the support (one elliptic variable)."""
    if f.nvars != 1:
        raise ValueError("one elliptic variable expected")
    for qn, rn in f.coeffs:
        n, l = Fraction(qn, Q_DEN), Fraction(rn, R_DEN)
        if 4 * index * n - l * l < 0:
            return False
    return True


# ---------------------------------------------------------------------------
# lift coefficients


def lift_coefficient(f: Callable[..., int], n: int, l: int | Sequence[int], m: int,
                     character: Callable[[int], int] | None = None,
                     convention: str = "as-printed") -> int:
    """sum_{a | (n, l, m)} a^2 chi(a) f(nm / 2a^2, l / 2) (as printed) or
    f(nm / 2a^2, l / 2a) (standard convention).

    ``l`` is an integer or a tuple of integer coordinates.
    """
    if convention not in ("as-printed", "standard"):
        raise ValueError("convention must be 'as-printed' or 'standard'")
    ls = (l,) if isinstance(l, int) else tuple(l)
    g = math.gcd(n, m, *ls)
    if g == 0:
        raise ValueError("content zero")
    if n < 1 or m < 1 or n % 2 == 0 or m % 2 == 0:
        raise ValueError("n and m must be odd and positive")
    chi = character or (lambda a: 1)
    total = 0
    for a in range(1, g + 1):
        if g % a:
            continue
        qexp = Fraction(n * m, 2 * a * a)
        div = 2 if convention == "as-printed" else 2 * a
        lexp = tuple(Fraction(x, div) for x in ls)
        val = f(qexp, *lexp)
        total += a * a * chi(a) * val
    return total


# ---------------------------------------------------------------------------
# cusp forms of weight 3 and general type


def condition_value(a: int, b: int, c: int) -> int:
    """abc / gcd(a, b, c)^3."""
    g = math.gcd(a, b, c)
    if g == 0:
        return 0
    return a * b * c // g**3


def condition_holds(a: int, b: int, c: int, reading: str = "ne1") -> bool:
    """gcd(abc/(a,b,c)^3, 6) != 1 ("ne1") or == 1 ("eq1")."""
    t = math.gcd(condition_value(a, b, c), 6)
    if reading == "ne1":
        return t != 1
    if reading == "eq1":
        return t == 1
    raise ValueError("reading must be 'ne1' or 'eq1'")


def _triples(target: int, allow_zero: bool) -> Iterable[tuple[int, int, int]]:
    """a >= b >= c with a^2 + b^2 + c^2 = target, lexicographically ascending."""
    low = 0 if allow_zero else 1
    a = max(low, math.isqrt(max(target - 1, 0) // 3))
    while a * a <= target:
        if 3 * a * a >= target:
            rest = target - a * a
            for b in range(low, a + 1):
                c2 = rest - b * b
                if c2 < 0:
                    break
                c = math.isqrt(c2)
                if c * c == c2 and low <= c <= b:
                    yield (a, b, c)
        a += 1


def weight3_cusp_exists(d: int, allow_zero: bool = False, reading: str = "ne1") -> tuple[int, int, int] | None:
    """Smallest (a >= b >= c) with 3(a^2 + b^2 + c^2) = d meeting the condition."""
    if d < 1:
        raise ValueError("d >= 1")
    if d % 3:
        return None
    for t in _triples(d // 3, allow_zero):
        if condition_holds(*t, reading=reading):
            return t
    return None


def cusp_witnesses(lo: int, hi: int, allow_zero: bool = False, reading: str = "ne1") -> dict[int, tuple[int, int, int]]:
    """weight3_cusp_exists over a range, by enumerating triples once."""
    out: dict[int, tuple[int, int, int]] = {}
    low = 0 if allow_zero else 1
    top = hi // 3
    a = low
    while a * a <= top:
        for b in range(low, a + 1):
            if a * a + b * b > top:
                break
            for c in range(low, b + 1):
                s = a * a + b * b + c * c
                if s > top:
                    break
                d = 3 * s
                if d < lo or not condition_holds(a, b, c, reading):
                    continue
                t = (a, b, c)
                if d not in out or t < out[d]:
                    out[d] = t
        a += 1
    return out


GT_UPPER = 252288
GT_LOWER = 1168


_UNSET = object()


def general_type_verdict(d: int, appendix_ii: set[int] | frozenset[int], witness=_UNSET,
                         reading: str = "ne1") -> str:
    """general_type when a cusp form exists and d is past the census or absent from Appendix II."""
    w = weight3_cusp_exists(d, reading=reading) if witness is _UNSET else witness
    if w and (d > GT_UPPER or (d > GT_LOWER and d not in appendix_ii)):
        return "general_type"
    return "unknown"
