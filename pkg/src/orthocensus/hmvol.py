"""Hirzebruch-Mumford volumes.

A volume is stored as

    rational_coeff * sqrt(sqrt_radicand) * pi**pi_power
        * prod(euler_product) * L(s, chi_D)**l_exponent

with the Dirichlet L-value kept symbolic and bracketed by
zeta(2s)/zeta(s) <= L(s, chi) <= zeta(s) in the enclosure.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .arith import (
    CertifiedReal,
    certified_constant,
    certified_sqrt,
    factorize,
    kronecker,
    nu,
    padic_abs,
    valuation,
)
from .arith import _bernoulli_even
from .localdensity import alpha_p, jordan_decompose, p_product
from .qlattice import GramLattice

DEFAULT_PRECISION = 128


@dataclass(frozen=True)
class LFactor:
    s: int
    discriminant: int
    exponent: int  # +1 or -1
    direction: str = "exact-unknown"


@dataclass(frozen=True)
class StructuredVolume:
    rational_coeff: Fraction
    sqrt_radicand: int
    pi_power: int
    l_factor: LFactor | None
    euler_product: tuple[tuple[int, Fraction], ...]
    enclosure: CertifiedReal

    @property
    def exact_rational(self) -> Fraction:
        """rational_coeff times the finite Euler product."""
        out = self.rational_coeff
        for _, f in self.euler_product:
            out *= f
        return out

    def to_dict(self) -> dict:
        return {
            "rational_coeff": str(self.rational_coeff),
            "sqrt_radicand": self.sqrt_radicand,
            "pi_power": self.pi_power,
            "l_factor": None if self.l_factor is None else {
                "s": self.l_factor.s, "discriminant": self.l_factor.discriminant,
                "exponent": self.l_factor.exponent, "direction": self.l_factor.direction},
            "euler_product": [[p, str(f)] for p, f in self.euler_product],
            "enclosure": [str(self.enclosure.lower), str(self.enclosure.upper)],
            "enclosure_float": [float(self.enclosure.lower), float(self.enclosure.upper)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _assemble(coeff: Fraction, radicand: int, pi_power: int, lf: LFactor | None,
              euler: list[tuple[int, Fraction]], precision: int) -> StructuredVolume:
    total = coeff
    for _, f in euler:
        total *= f
    val = CertifiedReal.exact(total, precision) * certified_sqrt(radicand, precision)
    pi = certified_constant("pi", precision)
    if pi_power >= 0:
        val = val * pi ** pi_power
    else:
        val = val / pi ** (-pi_power)
    if lf is not None:
        lo, hi = lf_bounds(lf.s, precision)
        if lf.exponent == 1:
            a, b = val * lo, val * hi
        else:
            a, b = val / hi, val / lo
        val = CertifiedReal.from_bounds(min(a.lower, b.lower), max(a.upper, b.upper), precision)
    return StructuredVolume(coeff, radicand, pi_power, lf, tuple(euler), val)


# ---------------------------------------------------------------------------
# gamma factors and zeta values


def gamma_half_product(n: int) -> tuple[Fraction, int]:
    """prod_{k=1}^n pi^{-k/2} Gamma(k/2) as (rational, power of pi)."""
    if n < 1:
        raise ValueError("n >= 1")
    coeff = Fraction(1)
    twice_power = 0
    for k in range(1, n + 1):
        twice_power -= k
        if k % 2 == 0:
            coeff *= math.factorial(k // 2 - 1)
        else:
            dfact = math.prod(range(k - 2, 0, -2)) if k > 2 else 1
            coeff *= Fraction(dfact, 2 ** ((k - 1) // 2))
            twice_power += 1
    assert twice_power % 2 == 0
    return coeff, twice_power // 2


def zeta_even(k: int) -> tuple[Fraction, int]:
    """zeta(2m) for k = 2m as (rational, power of pi)."""
    if k < 2 or k % 2:
        raise ValueError("even k >= 2")
    m = k // 2
    B = _bernoulli_even(m + 1)[m]
    c = Fraction((-1) ** (m + 1)) * B * Fraction(2) ** k / (2 * math.factorial(k))
    return c, k


def lf_bounds(s: int, precision: int = DEFAULT_PRECISION) -> tuple[CertifiedReal, CertifiedReal]:
    """Enclosures of zeta(2s)/zeta(s) and zeta(s), the range of L(s, chi)."""
    if s < 2:
        raise ValueError("s >= 2")
    zs = certified_constant(("zeta", s), precision)
    z2s = certified_constant(("zeta", 2 * s), precision)
    return z2s / zs, zs


def E_L(precision: int = DEFAULT_PRECISION) -> CertifiedReal:
    """3 pi^3 / (705438720 zeta(3)^2)."""
    pi = certified_constant("pi", precision)
    z3 = certified_constant("zeta(3)", precision)
    return 3 * pi ** 3 / (705438720 * z3 * z3)


# ---------------------------------------------------------------------------
# the lattice L(d) = 2U + <-2d> + <-6>


def alpha2_L(d: int) -> Fraction:
    a = valuation(12 * d, 2)
    P = p_product(2, 2)
    if a == 2:
        return 2 ** (9 if d % 4 == 3 else 8) * P
    if a in (3, 4):
        return 2 ** (7 + a) * P
    return 2 ** (8 + a) * P


def alpha3_L(d: int) -> Fraction:
    a = valuation(12 * d, 3)
    P2, P1 = p_product(3, 2), p_product(3, 1)
    if a == 1:
        return 2 * 3 * P2
    if a == 2:
        chi = kronecker(-4 * (d // 3), 3)
        return 2 * 27 * P2 * P1 / (1 + Fraction(1, 9)) / (1 + Fraction(chi, 3))
    return 4 * Fraction(3) ** (a + 1) * P2 / (1 + Fraction(1, 9))


def vol_O_L(d: int, precision: int = DEFAULT_PRECISION) -> StructuredVolume:
    """Closed form for Vol_HM(O(L)) with the printed L(3, .)^{-1} factor."""
    if d <= 1:
        raise ValueError("d > 1")
    N = 12 * d
    D = -N
    coeff = Fraction(N * N, 137781) * Fraction(1, 2 ** nu(N))
    euler = []
    for p in factorize(N).primes:
        euler.append((p, (1 - Fraction(1, p**6)) / (1 + Fraction(kronecker(D, p), p**3))))
    coeff *= 1 / padic_abs(N, 3) / padic_abs(N, 2) / alpha3_L(d) / alpha2_L(d)
    return _assemble(coeff, N, 3, LFactor(3, D, -1), euler, precision)


def vol_O_L_lower(d: int, precision: int = DEFAULT_PRECISION) -> CertifiedReal:
    return CertifiedReal.exact(vol_O_L(d, precision).enclosure.lower, precision)


def vol_generic(L: GramLattice, precision: int = DEFAULT_PRECISION, sg: int = 1) -> StructuredVolume:
    """2/|sg| |det|^{(n+1)/2} prod pi^{-k/2} Gamma(k/2) prod_p alpha_p^{-1}.

    Primes dividing 2 det use the Jordan-block formula; the remaining primes
    are unimodular and their product is folded into zeta values and, for
    even rank, L(n/2, chi_D)/L(n, chi_0) with D = (-1)^{n/2} det.
    """
    n = L.rank
    det = abs(L.det)
    g, pipow = gamma_half_product(n)
    half = n + 1  # exponent of det in halves
    coeff = Fraction(2, sg) * g * Fraction(det) ** (half // 2)
    radicand = det if half % 2 else 1
    bad = sorted(set(factorize(2 * det).primes))
    euler = []
    for p in bad:
        euler.append((p, 1 / alpha_p(jordan_decompose(L, p))))
    for i in range(1, n // 2 + 1):
        c, k = zeta_even(2 * i)
        coeff *= c
        pipow += k
        for p in bad:
            euler.append((p, 1 - Fraction(1, p ** (2 * i))))
    lf = None
    if n % 2 == 0:
        s = n // 2
        D = (-1) ** s * L.det
        # prod_{p good} (1 + chi p^-s) = L(s, chi) prod_{p bad, chi(p) != 0} (1 - chi p^-s) / L(n, chi_0)
        c, k = zeta_even(n)
        coeff /= c
        pipow -= k
        for p in bad:
            euler.append((p, 1 / (1 - Fraction(1, p**n))))
            chi = kronecker(D, p)
            if chi:
                euler.append((p, 1 - Fraction(chi, p**s)))
        lf = LFactor(s, D, 1)
    return _assemble(coeff, radicand, pipow, lf, euler, precision)


# ---------------------------------------------------------------------------
# K-lattices


FAMILIES = ("K(2s,2s;0,l)", "K(2s,s;0,l)", "K(2s,2s;r,l)")


def alpha2_K_factor(r: int) -> Fraction:
    """alpha_2(K)^{-1} |2r|_2^{-1} for the first two families."""
    a = valuation(2 * r, 2)
    P = p_product(2, 2)
    if a == 1:
        alpha = 2**6 * P
    else:
        alpha = Fraction(2) ** (6 + a) * P / (1 + Fraction(1, 4))
    return 1 / alpha / padic_abs(2 * r, 2)


def vol_O_K(family: int, r: int, chi_data: dict[int, int] | None = None,
            precision: int = DEFAULT_PRECISION) -> StructuredVolume:
    """Closed forms for the three K families (1, 2 or 3).

    For family 3, ``chi_data`` maps each odd prime p | r to chi(N_0) at p;
    the prime 2 always contributes chi = +1.
    """
    if r < 1:
        raise ValueError("r >= 1")
    N = 2 * r
    primes = factorize(N).primes
    if family in (1, 2):
        coeff = Fraction(N * N, 450) * Fraction(1, 2 ** nu(N)) * alpha2_K_factor(r)
        euler = [(p, 1 + Fraction(1, p * p)) for p in primes]
    elif family == 3:
        if chi_data is None:
            raise ValueError("family 3 needs chi(N_0) data")
        coeff = Fraction(N * N, 14400) * Fraction(1, 2 ** nu(N))
        euler = []
        for p in primes:
            chi = 1 if p == 2 else chi_data[p]
            euler.append((p, 1 + Fraction(chi, p * p)))
    else:
        raise ValueError(f"unknown family {family}")
    return _assemble(coeff, 1, 0, None, euler, precision)


def chi_N0(K: GramLattice, p: int) -> int:
    """chi of the unimodular Jordan constituent of K at an odd prime."""
    dec = jordan_decompose(K, p)
    b = dec.block(0)
    return 0 if b is None else b.chi


def kbound(family: int, r: int) -> tuple[Fraction, int]:
    """Upper bound (2r)^2 pi^-2 / c * 2^{-nu(2r)}; returns (rational, pi power)."""
    N = 2 * r
    c = 675 if family in (1, 2) else 960
    return Fraction(N * N, c * 2 ** nu(N)), -2


# ---------------------------------------------------------------------------
# bounds


def vol_gamma_lower(d: int, precision: int = DEFAULT_PRECISION) -> CertifiedReal:
    if d <= 1:
        raise ValueError("d > 1")
    N = 12 * d
    val = CertifiedReal.exact(N * N, precision) * certified_sqrt(N, precision) * E_L(precision)
    return val if d % 3 == 0 else val / 2


def leading_dimension(vol: StructuredVolume | CertifiedReal, m: int, k: int) -> CertifiedReal:
    enc = vol.enclosure if isinstance(vol, StructuredVolume) else vol
    return enc * (k ** m)
