"""Integer and number-theoretic primitives, plus certified real enclosures.

Everything here is exact or outward-rounded.  ``CertifiedReal`` stores an
interval ``[lo * 2**exp, hi * 2**exp]`` with integer mantissas, which keeps
the census hot loop in plain integer arithmetic.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

# ---------------------------------------------------------------------------
# factorization


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError("factors must have increasing primes and positive exponents")
            last = p
            prod *= p ** e
        if prod != self.value:
            raise ValueError("factors do not multiply to value")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def exponent(self, p: int) -> int:
        for q, e in self.factors:
            if q == p:
                return e
        return 0

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    # Brent's variant with a deterministic sequence of constants
    for c in range(1, 200):
        y, r, q, g = 2, 1, 1, 1
        f = lambda t: (t * t + c) % n
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = f(y)
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(128, r - k)):
                    y = f(y)
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += 128
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = f(ys)
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"pollard rho failed on {n}")


def _split(n: int, out: dict[int, int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    f = _pollard_rho(n)
    _split(f, out)
    _split(n // f, out)


@lru_cache(maxsize=1 << 16)
def factorize(n: int) -> Factorization:
    """Prime factorization by trial division up to 1000, then Pollard rho."""
    if n < 1:
        raise ValueError("factorize needs a positive integer")
    found: dict[int, int] = {}
    m = n
    p = 2
    while p * p <= m and p < 1000:
        while m % p == 0:
            found[p] = found.get(p, 0) + 1
            m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        _split(m, found)
    return Factorization(n, tuple(sorted(found.items())))


def nu(n: int) -> int:
    """Number of distinct prime divisors."""
    return len(factorize(n).factors)


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def padic_abs(n: int, p: int) -> Fraction:
    """|n|_p = p^(-v_p(n))."""
    if n == 0:
        raise ValueError("padic_abs of zero")
    return Fraction(1, p ** valuation(n, p))


def kronecker(D: int, p: int) -> int:
    """Kronecker symbol (D/p) for a prime p."""
    if p == 2:
        if D % 2 == 0:
            return 0
        return 1 if D % 8 in (1, 7) else -1
    r = D % p
    if r == 0:
        return 0
    return 1 if pow(r, (p - 1) // 2, p) == 1 else -1


# ---------------------------------------------------------------------------
# Smith normal form


def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(M: Sequence[Sequence[int]]):
    """Return (U, D, V) with U*M*V = D diagonal, d1 | d2 | ..., d_i >= 0.

    U and V are unimodular.  Plain elimination with gcd steps; matrices in
    this package are tiny so no care is taken over coefficient growth.
    """
    A = [list(map(int, row)) for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):  # row dst += c * row src
        A[dst] = [a + c * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        for row in A:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero magnitude in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        done = False
        while not done:
            done = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(t, i, -(A[i][t] // A[t][t]))
                    if A[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(t, j, -(A[t][j] // A[t][t]))
                    if A[t][j]:
                        swap_cols(t, j)
                        done = False
            if done:
                # divisibility: pull in any entry not divisible by the pivot
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if A[i][j] % A[t][t]:
                            add_row(i, t, 1)
                            done = False
                            break
                    if not done:
                        break
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return U, A, V


def invariant_factors(M: Sequence[Sequence[int]]) -> list[int]:
    _, D, _ = smith_normal_form(M)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0))]


# ---------------------------------------------------------------------------
# square roots of units


def _unit_sqrt_prime_power(theta: int, p: int, e: int) -> int:
    q = p ** e
    t = theta % q
    if p == 2:
        if t % 2 == 0:
            return 0
        if e == 1:
            return 1
        if e == 2:
            return 2 if t % 4 == 1 else 0
        return 4 if t % 8 == 1 else 0
    if t % p == 0:
        return 0
    return 2 if pow(t, (p - 1) // 2, p) == 1 else 0


def count_unit_sqrt(theta: int, M: int) -> int:
    """#{x mod M : gcd(x, M) = 1, x^2 = theta mod M}, via CRT."""
    if M < 1:
        raise ValueError("modulus must be positive")
    if M == 1:
        return 1
    total = 1
    for p, e in factorize(M).factors:
        total *= _unit_sqrt_prime_power(theta, p, e)
        if not total:
            return 0
    return total


def count_unit_sqrt_naive(theta: int, M: int) -> int:
    return sum(1 for x in range(M) if math.gcd(x, M) == 1 and (x * x - theta) % M == 0)


# ---------------------------------------------------------------------------
# certified reals


class Sign(enum.Enum):
    NEGATIVE = -1
    INDETERMINATE = 0
    POSITIVE = 1


class IndeterminateError(ArithmeticError):
    pass


_SLACK = 8  # extra mantissa bits kept above the nominal precision


def _floor_shift(x: int, k: int) -> int:
    return x >> k if k >= 0 else x << -k


def _ceil_shift(x: int, k: int) -> int:
    return -((-x) >> k) if k >= 0 else x << -k


@dataclass(frozen=True)
class CertifiedReal:
    """Closed interval [lo*2^exp, hi*2^exp] with integer mantissas."""

    lo: int
    hi: int
    exp: int
    precision: int = 128

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")

    # construction ---------------------------------------------------------
    @classmethod
    def exact(cls, q, precision: int = 128) -> "CertifiedReal":
        q = Fraction(q)
        if q.denominator == 1:
            return cls(q.numerator, q.numerator, 0, precision)
        den = q.denominator
        if den & (den - 1) == 0:  # dyadic: exact
            k = den.bit_length() - 1
            return cls(q.numerator, q.numerator, -k, precision)
        s = precision + _SLACK + den.bit_length()
        num = q.numerator << s
        return cls(num // den, -((-num) // den), -s, precision)._norm()

    @classmethod
    def from_bounds(cls, lower, upper, precision: int = 128) -> "CertifiedReal":
        a = cls.exact(lower, precision)
        b = cls.exact(upper, precision)
        e = min(a.exp, b.exp)
        return cls(a.lo << (a.exp - e), b.hi << (b.exp - e), e, precision)._norm()

    # accessors ------------------------------------------------------------
    @property
    def lower(self) -> Fraction:
        return Fraction(self.lo) * Fraction(2) ** self.exp

    @property
    def upper(self) -> Fraction:
        return Fraction(self.hi) * Fraction(2) ** self.exp

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def contains(self, q) -> bool:
        q = Fraction(q)
        return self.lower <= q <= self.upper

    def encloses(self, other: "CertifiedReal") -> bool:
        return self.lower <= other.lower and other.upper <= self.upper

    def sign(self) -> Sign:
        if self.lo > 0:
            return Sign.POSITIVE
        if self.hi < 0:
            return Sign.NEGATIVE
        return Sign.INDETERMINATE

    def mid(self) -> float:
        return float((self.lower + self.upper) / 2)

    def __float__(self):
        return self.mid()

    def __repr__(self):
        return f"CertifiedReal([{float(self.lower):.17g}, {float(self.upper):.17g}], prec={self.precision})"

    # arithmetic -----------------------------------------------------------
    def _norm(self) -> "CertifiedReal":
        big = max(abs(self.lo), abs(self.hi)).bit_length()
        k = big - (self.precision + _SLACK)
        if k <= 0:
            return self
        return CertifiedReal(_floor_shift(self.lo, k), _ceil_shift(self.hi, k), self.exp + k, self.precision)

    def _coerce(self, other) -> "CertifiedReal":
        if isinstance(other, CertifiedReal):
            return other
        return CertifiedReal.exact(other, self.precision)

    def _prec(self, other: "CertifiedReal") -> int:
        return min(self.precision, other.precision)

    def __neg__(self):
        return CertifiedReal(-self.hi, -self.lo, self.exp, self.precision)

    def __add__(self, other):
        o = self._coerce(other)
        e = min(self.exp, o.exp)
        a, b = self.exp - e, o.exp - e
        return CertifiedReal((self.lo << a) + (o.lo << b), (self.hi << a) + (o.hi << b), e,
                             self._prec(o))._norm()

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        c = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return CertifiedReal(min(c), max(c), self.exp + o.exp, self._prec(o))._norm()

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("divisor interval contains zero")
        prec = self._prec(o)
        s = prec + _SLACK + max(abs(o.lo), abs(o.hi)).bit_length()
        lows, highs = [], []
        for x in (self.lo, self.hi):
            for y in (o.lo, o.hi):
                num = x << s
                lows.append(num // y)
                highs.append(-((-num) // y))
        return CertifiedReal(min(lows), max(highs), self.exp - o.exp - s, prec)._norm()

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        result = CertifiedReal(1, 1, 0, self.precision)
        for _ in range(k):
            result = result * self
        if k % 2 == 0 and self.lo < 0 < self.hi:
            result = CertifiedReal(0, result.hi, result.exp, result.precision)
        return result

    def sqrt(self) -> "CertifiedReal":
        if self.hi < 0:
            raise ValueError("square root of a negative interval")
        lo = max(self.lo, 0)
        e = self.exp
        s = 2 * (self.precision + _SLACK)
        if (e - s) % 2:
            s += 1
        a = math.isqrt(lo << s)
        hnum = self.hi << s
        b = math.isqrt(hnum)
        if b * b < hnum:
            b += 1
        return CertifiedReal(a, b, (e - s) // 2, self.precision)._norm()

    def with_precision(self, precision: int) -> "CertifiedReal":
        return CertifiedReal(self.lo, self.hi, self.exp, precision)._norm()


def certified_sqrt(n, precision: int = 128) -> CertifiedReal:
    return CertifiedReal.exact(n, precision).sqrt()


# constants -----------------------------------------------------------------


def _arctan_inv(x: int, bits: int) -> tuple[int, int]:
    """Fixed-point arctan(1/x) * 2^bits, returned as (value, error bound in ulps)."""
    one = 1 << bits
    power = one // x
    x2 = x * x
    total = 0
    k = 0
    while power:
        term = power // (2 * k + 1)
        total += -term if k % 2 else term
        power //= x2
        k += 1
    return total, 2 * k + 2


@lru_cache(maxsize=None)
def _pi(precision: int) -> CertifiedReal:
    bits = precision + _SLACK + 16
    a, ea = _arctan_inv(5, bits)
    b, eb = _arctan_inv(239, bits)
    val = 16 * a - 4 * b
    err = 16 * ea + 4 * eb
    return CertifiedReal(val - err, val + err, -bits, precision)._norm()


@lru_cache(maxsize=None)
def _log2(precision: int) -> CertifiedReal:
    bits = precision + _SLACK + 16
    total = 0
    k = 1
    while True:
        term = (1 << bits) // (k << k)
        if term == 0:
            break
        total += term
        k += 1
    # each term truncated by < 1 ulp; tail bounded by 1/((k)2^(k-1)) < 1 ulp
    return CertifiedReal(total, total + k + 2, -bits, precision)._norm()


@lru_cache(maxsize=None)
def _bernoulli_even(count: int) -> tuple[Fraction, ...]:
    """B_0, B_2, ..., B_{2(count-1)} by the Akiyama-Tanigawa algorithm."""
    need = 2 * count
    a = [Fraction(0)] * (need + 1)
    out = []
    for m in range(need + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        if m % 2 == 0:
            out.append(a[0])
    return tuple(out[:count])


def _rising(s: int, m: int) -> int:
    r = 1
    for i in range(m):
        r *= s + i
    return r


def zeta_euler_maclaurin(s: int, precision: int) -> CertifiedReal | None:
    """Euler-Maclaurin with an explicit remainder bound.

    zeta(s) = sum_{n<N} n^-s + N^(1-s)/(s-1) + N^-s/2
              + sum_{j=1}^{K} B_2j/(2j)! (s)_(2j-1) N^(-s-2j+1) + R,
    and for real s > 1 the remainder R is bounded by the first omitted
    correction term in absolute value.  We take twice that.  Returns None
    when the cached Bernoulli table cannot reach the requested width.
    """
    bits = precision + _SLACK + 16
    N = max(8, bits // 6)
    bern = _bernoulli_even(80)
    target = Fraction(1, 1 << (bits + 2))
    corr = Fraction(1, (s - 1) * N ** (s - 1)) + Fraction(1, 2 * N ** s)
    rem = None
    for j in range(1, 79):
        term = bern[j] / math.factorial(2 * j) * _rising(s, 2 * j - 1) / Fraction(N) ** (s + 2 * j - 1)
        nxt = bern[j + 1] / math.factorial(2 * j + 2) * _rising(s, 2 * j + 1) / Fraction(N) ** (s + 2 * j + 1)
        corr += term
        if abs(nxt) < target:
            rem = 2 * abs(nxt)
            break
    if rem is None:
        return None
    partial = 0
    for n in range(1, N):
        partial += (1 << bits) // n ** s
    scale = 1 << bits
    lo = partial + math.floor((corr - rem) * scale)
    hi = partial + N + math.ceil((corr + rem) * scale)  # N floors, each < 1 ulp
    return CertifiedReal(lo, hi, -bits, precision)._norm()


def zeta_borwein(s: int, precision: int) -> CertifiedReal:
    """Borwein's accelerated alternating series.

    zeta(s) = -1/(d_n (1 - 2^(1-s))) sum_{k<n} (-1)^k (d_k - d_n)/(k+1)^s + g,
    |g| <= 3 / ((3 + sqrt 8)^n |1 - 2^(1-s)|) for real s > 1.
    """
    bits = precision + _SLACK + 16
    n = (bits + 8) * 100 // 254 + 2  # log2(3 + sqrt 8) > 2.54
    d = []
    acc = 0
    for i in range(n + 1):
        acc += math.factorial(n + i - 1) * 4 ** i // (math.factorial(n - i) * math.factorial(2 * i))
        d.append(n * acc)
    dn = d[n]
    total = 0
    for k in range(n):
        t = ((dn - d[k]) << bits) // (k + 1) ** s
        total += -t if k % 2 else t
    # sum_k (-1)^k (d_k - d_n)/(k+1)^s = -total/2^bits, each floor off by < 1 ulp
    denom = dn * ((1 << (s - 1)) - 1)  # d_n (1 - 2^(1-s)) * 2^(s-1), sign handled below
    # zeta = total * 2^(s-1) / denom / 2^bits
    lo_num = (total - n) << (s - 1)
    hi_num = (total + n) << (s - 1)
    lo = lo_num // denom
    hi = -((-hi_num) // denom)
    # tail: 3 / (5.828^n (1 - 2^(1-s))) <= 6 * 2^(-2.54 n) < 2^(-bits)
    return CertifiedReal(lo - 8, hi + 8, -bits, precision)._norm()


@lru_cache(maxsize=None)
def _zeta(s: int, precision: int) -> CertifiedReal:
    if s < 2:
        raise ValueError("zeta needs integer s >= 2")
    em = zeta_euler_maclaurin(s, precision)
    return em if em is not None else zeta_borwein(s, precision)


@lru_cache(maxsize=None)
def _gamma_half(k: int, precision: int) -> CertifiedReal:
    if k < 1:
        raise ValueError("gamma_half needs k >= 1")
    if k % 2 == 0:
        return CertifiedReal.exact(math.factorial(k // 2 - 1), precision)
    # Gamma(k/2) = sqrt(pi) * (k-2)!! / 2^((k-1)/2)
    dfact = 1
    for i in range(k - 2, 0, -2):
        dfact *= i
    return _pi(precision).sqrt() * Fraction(dfact, 2 ** ((k - 1) // 2))


def certified_constant(name, precision: int = 128) -> CertifiedReal:
    """Enclosure of a named constant.

    Accepted names: ``"pi"``, ``"log2"``, ``"zeta(s)"`` or ``("zeta", s)``,
    ``"gamma_half(k)"`` or ``("gamma_half", k)`` for Gamma(k/2).
    """
    if precision < 53:
        raise ValueError("precision must be at least 53 bits")
    if isinstance(name, str):
        key = name.replace(" ", "")
        if "(" in key and key.endswith(")"):
            head, arg = key[:-1].split("(", 1)
            name = (head, int(arg))
        else:
            name = (key, None)
    head, arg = name
    if head == "pi" and arg is None:
        return _pi(precision)
    if head == "log2" and arg is None:
        return _log2(precision)
    if head == "zeta" and arg is not None:
        return _zeta(int(arg), precision)
    if head == "gamma_half" and arg is not None:
        return _gamma_half(int(arg), precision)
    raise ValueError(f"unsupported constant {name!r}")


def decide_sign(fn: Callable[[int], CertifiedReal], start: int = 128, limit: int = 4096) -> tuple[Sign, int]:
    """Evaluate ``fn`` at doubling precision until its sign is decided.

    Returns (sign, precision used).  Raises IndeterminateError past ``limit``.
    """
    prec = start
    while prec <= limit:
        s = fn(prec).sign()
        if s is not Sign.INDETERMINATE:
            return s, prec
        prec *= 2
    raise IndeterminateError(f"sign undecided at {limit} bits")


def dyadic_str(q: Fraction, digits: int, rounding: str) -> str:
    """Decimal string with ``digits`` significant figures, rounded down or up."""
    q = Fraction(q)
    if q == 0:
        return "0"
    neg = q < 0
    a = -q if neg else q
    e = math.floor(math.log10(a.numerator) - math.log10(a.denominator))
    # correct the estimate
    while Fraction(10) ** e > a:
        e -= 1
    while Fraction(10) ** (e + 1) <= a:
        e += 1
    scale = Fraction(10) ** (digits - 1 - e)
    x = a * scale
    up = (rounding == "up") != neg
    m = math.ceil(x) if up else math.floor(x)
    if m >= 10 ** digits:
        m //= 10
        e += 1
    s = str(m)
    mant = s[0] + ("." + s[1:] if len(s) > 1 else "")
    return f"{'-' if neg else ''}{mant}e{e:+d}"


def iter_primes(limit: int) -> Iterable[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, limit + 1, i)))
    return (i for i in range(limit + 1) if sieve[i])
