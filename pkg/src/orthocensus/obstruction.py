"""Reflective-obstruction bounds and the per-d census.

Two predicates compare the growth of dim M_{k(n-a)}(Gamma) with the
reflective obstruction.  ``global_predicate`` is the uniform inequality
d^{5/2} D0 - d^2 D1 - d^{1/4} D2 > 0.  ``refined_predicate`` evaluates the
two sides for a single d, replacing uniform bounds by exact quantities as
selected by a ``RefinementConfig``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, TextIO

from .arith import (
    CertifiedReal,
    Sign,
    certified_constant,
    certified_sqrt,
    dyadic_str,
    nu,
    padic_abs,
    valuation,
)
from .branchgeom import jj_count, oq_bound, oq_count, reflective_classes
from .hmvol import E_L, alpha2_L, alpha3_L, vol_O_K
from .localdensity import p_product

N_DEFAULT = 4

# E_i <= coefficient * d^2 / pi^2 (i = 1, 2, 3) or * 2^nu(d) / pi^2 (i = 4, 5, 6)
E_COEFFS = (Fraction(32, 675), Fraction(64, 675), Fraction(1, 15),
            Fraction(16, 75), Fraction(32, 75), Fraction(3, 20))

PRINTED_CONSTANTS = {
    2: ("0.00036417", "0.17197", "6.5036"),
    3: ("2.2761e-5", "0.039684", "1.5008"),
}
PRINTED_THRESHOLDS = {2: 336016568, 3: 4580959607}

APPENDIX_SPEC = {
    "I": {"a": 2, "lo": 90, "hi": 18504, "count": 1367, "complement": 17048},
    "II": {"a": 3, "lo": 1170, "hi": 252288, "count": 18765, "complement": 232354},
}


class AppendixError(ValueError):
    pass


# ---------------------------------------------------------------------------
# the polynomial C(k, n, a)


def c_poly(k: int, n: int = N_DEFAULT, a: int = 2) -> int:
    """sum_{j=0}^{k/2-1} (k(n-a) + 2j)^3."""
    if k <= 0 or k % 2:
        raise ValueError("k must be a positive even integer")
    if a >= n:
        raise ValueError("need a < n")
    return sum((k * (n - a) + 2 * j) ** 3 for j in range(k // 2))


def c_prime(n: int = N_DEFAULT, a: int = 2) -> Fraction:
    """Leading coefficient of C(k, n, a) in k."""
    t = n - a
    return Fraction(4 * t**3 + 6 * t**2 + 4 * t + 1, 8)


# ---------------------------------------------------------------------------
# global constants


@dataclass(frozen=True)
class ObstructionConstants:
    a: int
    n: int
    c_prime: Fraction
    e_coeffs: tuple[Fraction, ...]
    d0: CertifiedReal
    d1: CertifiedReal
    d2: CertifiedReal

    def yineq_threshold(self) -> CertifiedReal:
        """((D1 + D2) / D0)^2."""
        return ((self.d1 + self.d2) / self.d0) ** 2


@lru_cache(maxsize=None)
def global_constants(a: int, n: int = N_DEFAULT, precision: int = 128) -> ObstructionConstants:
    if a not in (2, 3):
        raise ValueError("a must be 2 or 3")
    cp = c_prime(n, a)
    pi2 = certified_constant("pi", precision) ** 2
    C = E_COEFFS
    d0 = certified_sqrt(12, precision) * 144 * E_L(precision) / 2 * (n - a) ** 4
    d1 = CertifiedReal.exact((C[0] + C[1] + C[2]) * cp, precision) / pi2
    d2 = CertifiedReal.exact(10 * (C[3] + C[4] + C[5]) * cp, precision) / pi2
    return ObstructionConstants(a, n, cp, C, d0, d1, d2)


def printed_constants(a: int, precision: int = 128) -> tuple[CertifiedReal, CertifiedReal, CertifiedReal]:
    return tuple(CertifiedReal.exact(Fraction(x), precision) for x in PRINTED_CONSTANTS[a])


def yineq_threshold(a: int, printed: bool = False, precision: int = 128) -> CertifiedReal:
    if printed:
        d0, d1, d2 = printed_constants(a, precision)
        return ((d1 + d2) / d0) ** 2
    return global_constants(a, precision=precision).yineq_threshold()


def _global_value(d: int, consts: tuple, precision: int) -> CertifiedReal:
    d0, d1, d2 = consts
    rd = certified_sqrt(d, precision)
    return d0 * d * d * rd - d1 * d * d - d2 * rd.sqrt()


def global_predicate(d: int, a: int, printed: bool = False,
                     start: int = 128, limit: int = 4096) -> bool | None:
    """Certified sign of d^{5/2} D0 - d^2 D1 - d^{1/4} D2; None if undecided."""
    if d <= 1:
        raise ValueError("d > 1")
    prec = start
    while prec <= limit:
        if printed:
            consts = printed_constants(a, prec)
        else:
            c = global_constants(a, precision=prec)
            consts = (c.d0, c.d1, c.d2)
        s = _global_value(d, consts, prec).sign()
        if s is not Sign.INDETERMINATE:
            return s is Sign.POSITIVE
        prec *= 2
    return None


def global_threshold(a: int, printed: bool = False) -> int:
    """Smallest d with global_predicate true.

    The expression is increasing once d^{1/2} > 7 D1 / (9 D0), well below
    the crossing, so bisection on the certified predicate is valid.
    """
    hi = int(yineq_threshold(a, printed).upper) + 2
    lo = 2
    if not global_predicate(hi, a, printed):
        raise AssertionError("sufficient threshold does not satisfy the inequality")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if global_predicate(mid, a, printed):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# refined predicate


@dataclass(frozen=True)
class RefinementConfig:
    """Which quantities enter the refined comparison exactly.

    euler_product: "exact" keeps prod_{p | 12d} (1 - p^-6); "zeta6" bounds it
        below by 1/zeta(6).
    alpha3_chi: "exact" uses chi(-4 d/3) in the 3^2 || 12d branch of
        alpha_3(L); "minus_one" fixes chi = -1 there.
    counts: "paper" uses the per-class bounds I <= 4|O(q)|, the printed J
        constants and the K-volume bounds; "exact" uses exact |O(q)|, exact
        J counts and the exact K-volume closed forms (chi = +1 in family 3).
    oq_odd_halving: in "paper" mode, use |O(q)| <= 2^{nu(2d)-1} for odd d in
        the classes with r = d.
    nu_exact: in "paper" mode, keep 2^{nu(d)} instead of 10 d^{1/4}.
    """

    euler_product: str = "zeta6"
    alpha3_chi: str = "minus_one"
    counts: str = "paper"
    oq_odd_halving: bool = True
    nu_exact: bool = True
    start_precision: int = 128
    max_precision: int = 4096

    def __post_init__(self):
        if self.euler_product not in ("exact", "zeta6"):
            raise ValueError("euler_product must be 'exact' or 'zeta6'")
        if self.alpha3_chi not in ("exact", "minus_one"):
            raise ValueError("alpha3_chi must be 'exact' or 'minus_one'")
        if self.counts not in ("paper", "exact"):
            raise ValueError("counts must be 'paper' or 'exact'")
        if self.start_precision < 128 or self.max_precision < self.start_precision:
            raise ValueError("bad precision range")

    @classmethod
    def calibrated(cls) -> "RefinementConfig":
        return cls()

    @classmethod
    def all_exact(cls) -> "RefinementConfig":
        return cls(euler_product="exact", alpha3_chi="exact", counts="exact")

    @classmethod
    def preset(cls, name: str) -> "RefinementConfig":
        presets = {"calibrated": cls.calibrated, "default": cls.calibrated, "all-exact": cls.all_exact}
        if name not in presets:
            raise ValueError(f"unknown preset {name!r}")
        return presets[name]()


def _alpha3_minus_one(d: int) -> Fraction:
    if valuation(12 * d, 3) != 2:
        return alpha3_L(d)
    P2, P1 = p_product(3, 2), p_product(3, 1)
    return 54 * P2 * P1 / (1 + Fraction(1, 9)) / (1 - Fraction(1, 3))


def lhs_rational(d: int, a: int, config: RefinementConfig) -> Fraction:
    """Rational part of the lower bound (n-a)^4 |PO(L) : P Gamma| Vol(O(L)).

    The full value is this times (12d)^{1/2} pi^3 / zeta(3), further divided
    by zeta(6) when the Euler product is bounded.
    """
    N = 12 * d
    al3 = alpha3_L(d) if config.alpha3_chi == "exact" else _alpha3_minus_one(d)
    coeff = Fraction(N * N, 137781) / padic_abs(N, 2) / padic_abs(N, 3) / alpha2_L(d) / al3
    # 2^{-nu(12d)} from the volume and 2^{nu(2d)} from the index
    coeff *= Fraction(1, 2 ** (nu(N) - nu(2 * d)))
    coeff *= (N_DEFAULT - a) ** 4
    if config.euler_product == "exact":
        from .arith import factorize
        for p in factorize(N).primes:
            coeff *= 1 - Fraction(1, p**6)
    return coeff


@lru_cache(maxsize=None)
def _lhs_constant(precision: int, zeta6: bool) -> CertifiedReal:
    pi = certified_constant("pi", precision)
    c = pi**3 / certified_constant("zeta(3)", precision)
    if zeta6:
        c = c / certified_constant("zeta(6)", precision)
    return c


@lru_cache(maxsize=None)
def _inv_pi2(precision: int) -> CertifiedReal:
    return 1 / certified_constant("pi", precision) ** 2


def _paper_class_bound(c, d: int, config: RefinementConfig) -> tuple[Fraction, bool]:
    """(rational, uses_nu): I_bound * J_bound * Kbound / pi^-2.

    When uses_nu is set the rational multiplies 2^{nu(d)} (or 10 d^{1/4}).
    """
    if c.r == d:
        # r = d, s = 3: I <= 4 |O(q)|, J <= printed constant, Vol <= (2d)^2/(c 2^nu(2d)) pi^-2
        idx = {"even2": 0, "odd": 1, "even": 2}[c.j_case]
        coeff = E_COEFFS[idx]
        if config.oq_odd_halving and d % 2:
            coeff /= 2
        return coeff * d * d, False
    idx = {"even2": 3, "odd": 4, "even": 5}[c.j_case]
    return E_COEFFS[idx], True


def _exact_class_term(c) -> Fraction:
    I = 4 * oq_count(c.r)
    J = jj_count(c.s, c.j_case)
    if c.family in (1, 2):
        vol = vol_O_K(c.family, c.r).exact_rational
    else:
        from .arith import factorize
        chi = {p: 1 for p in factorize(2 * c.r).primes}
        vol = vol_O_K(3, c.r, chi).exact_rational
    return I * J * vol


@dataclass(frozen=True)
class RhsParts:
    """RHS = c_prime (over_pi2 / pi^2 + nu_coeff * nu_factor / pi^2 + plain)."""

    over_pi2: Fraction
    nu_coeff: Fraction
    plain: Fraction


def rhs_parts(d: int, a: int, config: RefinementConfig) -> RhsParts:
    cp = c_prime(N_DEFAULT, a)
    over, nuc, plain = Fraction(0), Fraction(0), Fraction(0)
    for c in reflective_classes(d):
        if config.counts == "exact":
            plain += _exact_class_term(c)
            continue
        val, uses_nu = _paper_class_bound(c, d, config)
        if uses_nu:
            nuc += val
        else:
            over += val
    return RhsParts(over * cp, nuc * cp, plain * cp)


@dataclass(frozen=True)
class CensusRecord:
    d: int
    a: int
    global_pass: bool
    refined_pass: bool | None
    lhs: CertifiedReal
    rhs: CertifiedReal
    in_appendix: bool = False
    precision: int = 128

    def csv_row(self) -> list[str]:
        def b(x):
            return "indeterminate" if x is None else ("true" if x else "false")
        return [str(self.d), str(self.a), b(self.global_pass), b(self.refined_pass),
                dyadic_str(self.lhs.lower, 12, "down"), dyadic_str(self.lhs.upper, 12, "up"),
                dyadic_str(self.rhs.lower, 12, "down"), dyadic_str(self.rhs.upper, 12, "up"),
                b(self.in_appendix)]


CSV_FIELDS = ("d", "a", "global_pass", "refined_pass", "lhs_lo", "lhs_hi", "rhs_lo", "rhs_hi", "in_appendix")


def _sides(d: int, a: int, config: RefinementConfig, precision: int,
           lrat: Fraction, parts: RhsParts) -> tuple[CertifiedReal, CertifiedReal]:
    N = 12 * d
    lhs = CertifiedReal.exact(lrat, precision) * certified_sqrt(N, precision) \
        * _lhs_constant(precision, config.euler_product == "zeta6")
    if config.nu_exact:
        nu_factor = CertifiedReal.exact(2 ** nu(d), precision)
    else:
        nu_factor = certified_sqrt(d, precision).sqrt() * 10
    rhs = (CertifiedReal.exact(parts.over_pi2, precision) + nu_factor * parts.nu_coeff) * _inv_pi2(precision) \
        + CertifiedReal.exact(parts.plain, precision)
    return lhs, rhs


def refined_predicate(d: int, a: int, config: RefinementConfig | None = None,
                      appendix: frozenset[int] | set[int] | None = None) -> CensusRecord:
    if d <= 48:
        raise ValueError("refined predicate needs d > 48")
    if a not in (2, 3):
        raise ValueError("a must be 2 or 3")
    config = config or RefinementConfig()
    lrat = lhs_rational(d, a, config)
    parts = rhs_parts(d, a, config)
    prec = config.start_precision
    verdict = None
    while prec <= config.max_precision:
        lhs, rhs = _sides(d, a, config, prec, lrat, parts)
        s = (lhs - rhs).sign()
        if s is not Sign.INDETERMINATE:
            verdict = s is Sign.POSITIVE
            break
        prec *= 2
    prec = min(prec, config.max_precision)
    g = _global_pass_fast(d, a)
    return CensusRecord(d, a, g, verdict, lhs, rhs, bool(appendix and d in appendix), prec)


@lru_cache(maxsize=4)
def _global_cutoff(a: int) -> int:
    return global_threshold(a)


def _global_pass_fast(d: int, a: int) -> bool:
    # the global expression is increasing past its root, so compare with the cached threshold
    return d >= _global_cutoff(a)


# ---------------------------------------------------------------------------
# appendices


def appendix_path(which: str, data_dir: str | Path | None = None) -> Path:
    if which not in APPENDIX_SPEC:
        raise ValueError("which must be 'I' or 'II'")
    name = f"appendix_{which}.txt"
    if data_dir is not None:
        return Path(data_dir) / name
    return Path(str(resources.files("orthocensus") / "data" / name))


def load_appendix(path: str | Path | None = None, which: str = "I") -> list[int]:
    """Strictly ascending list of the excluded d values.

    Malformed lines, duplicates, descending order and values outside the
    appendix range raise ``AppendixError``.
    """
    spec = APPENDIX_SPEC[which] if which in APPENDIX_SPEC else None
    if spec is None:
        raise ValueError("which must be 'I' or 'II'")
    p = Path(path) if path is not None else appendix_path(which)
    out: list[int] = []
    lines = p.read_text().split("\n")
    if len(lines) > 1 and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, 1):
        if not line.isdigit():
            raise AppendixError(f"{p}:{lineno}: malformed line {line!r}")
        x = int(line)
        if not spec["lo"] <= x <= spec["hi"]:
            raise AppendixError(f"{p}:{lineno}: value {x} outside [{spec['lo']}, {spec['hi']}]")
        if out and x == out[-1]:
            raise AppendixError(f"{p}:{lineno}: duplicate value {x}")
        if out and x < out[-1]:
            raise AppendixError(f"{p}:{lineno}: values not ascending")
        out.append(x)
    return out


def appendix_report(which: str, path: str | Path | None = None) -> dict:
    values = load_appendix(path, which)
    spec = APPENDIX_SPEC[which]
    size = spec["hi"] - spec["lo"] + 1
    report = {
        "which": which,
        "count": len(values),
        "expected_count": spec["count"],
        "min": values[0] if values else None,
        "max": values[-1] if values else None,
        "expected_range": [spec["lo"], spec["hi"]],
        "complement": size - len(values),
        "expected_complement": spec["complement"],
    }
    report["ok"] = (report["count"] == spec["count"] and report["min"] == spec["lo"]
                    and report["max"] == spec["hi"] and report["complement"] == spec["complement"])
    return report


# ---------------------------------------------------------------------------
# census


def _census_chunk(args) -> list[CensusRecord]:
    lo, hi, a, config, appendix = args
    return [refined_predicate(d, a, config, appendix) for d in range(lo, hi + 1)]


@dataclass
class CensusSummary:
    a: int
    lo: int
    hi: int
    config: dict
    total: int = 0
    passed: int = 0
    failed: int = 0
    indeterminate: list[int] = field(default_factory=list)
    global_passed: int = 0
    agreement: dict = field(default_factory=dict)
    bad: list[int] = field(default_factory=list)
    missed_count: int = 0
    slack_histogram: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_json(self, with_timing: bool = True) -> str:
        data = asdict(self)
        if not with_timing:
            data.pop("seconds")
        return json.dumps(data, indent=2, sort_keys=True)


def _slack_bin(rec: CensusRecord) -> str:
    ratio = float(rec.lhs.mid()) / float(rec.rhs.mid()) if rec.rhs.mid() > 0 else math.inf
    if ratio <= 0:
        return "<=0"
    k = math.floor(math.log2(ratio) * 4) / 4
    return f"{k:+.2f}"


def census(lo: int, hi: int, a: int, config: RefinementConfig | None = None,
           appendix: Iterable[int] | None = None, workers: int = 1,
           chunk: int = 1024) -> tuple[list[CensusRecord], CensusSummary]:
    """Refined predicate over [lo, hi] in ascending order of d."""
    if lo < 49:
        raise ValueError("census range must start at d >= 49")
    config = config or RefinementConfig()
    app = frozenset(appendix) if appendix is not None else frozenset()
    t0 = time.perf_counter()
    tasks = [(s, min(s + chunk - 1, hi), a, config, app) for s in range(lo, hi + 1, chunk)]
    records: list[CensusRecord] = []
    _global_cutoff(a)
    if workers > 1 and len(tasks) > 1:
        import multiprocessing as mp
        with mp.get_context("fork").Pool(workers) as pool:
            for part in pool.imap(_census_chunk, tasks):
                records.extend(part)
    else:
        for t in tasks:
            records.extend(_census_chunk(t))
    summary = summarize(records, a, lo, hi, config, app)
    summary.seconds = round(time.perf_counter() - t0, 3)
    return records, summary


def summarize(records: list[CensusRecord], a: int, lo: int, hi: int,
              config: RefinementConfig, appendix: frozenset[int]) -> CensusSummary:
    s = CensusSummary(a, lo, hi, asdict(config))
    agree = {"pass_in_appendix": 0, "pass_not_in_appendix": 0,
             "fail_in_appendix": 0, "fail_not_in_appendix": 0}
    hist: dict[str, int] = {}
    for r in records:
        s.total += 1
        s.global_passed += r.global_pass
        if r.refined_pass is None:
            s.indeterminate.append(r.d)
            continue
        key = ("pass" if r.refined_pass else "fail") + ("_in_appendix" if r.in_appendix else "_not_in_appendix")
        agree[key] += 1
        if r.refined_pass:
            s.passed += 1
            if r.in_appendix:
                s.bad.append(r.d)
        else:
            s.failed += 1
        b = _slack_bin(r)
        hist[b] = hist.get(b, 0) + 1
    s.agreement = agree
    s.missed_count = agree["fail_not_in_appendix"]
    s.slack_histogram = dict(sorted(hist.items(), key=lambda kv: float(kv[0]) if kv[0][0] != "<" else -1e9))
    return s


def write_census_csv(records: Iterable[CensusRecord], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow(r.csv_row())


def census_csv_text(records: Iterable[CensusRecord]) -> str:
    buf = io.StringIO()
    write_census_csv(records, buf)
    return buf.getvalue()
