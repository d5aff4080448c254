"""Command-line front end: ``python -m orthocensus <subcommand> ...``.

Every flag falls back to an environment variable ORTHOCENSUS_<FLAG> (upper
case, dashes as underscores) and then to a built-in default.  Exit codes:
0 success, 1 validation failure, 2 malformed input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__

SUBCOMMANDS = ("volume", "density", "reidtai-table", "branch", "census", "cusp", "gt-classify",
               "validate-appendix")
FORMATS = ("json", "csv")
ENV_PREFIX = "ORTHOCENSUS_"

EXIT_OK, EXIT_VALIDATION, EXIT_INPUT = 0, 1, 2

DEFAULTS = {
    "format": "json",
    "precision": 128,
    "workers": 1,
    "a": 2,
    "preset": "calibrated",
    "data_dir": None,
    "output": None,
    "range": None,
    "chunk": 1024,
}


class InputError(ValueError):
    """Malformed command-line input; maps to exit code 2."""


def parse_range(text: str) -> tuple[int, int]:
    lo, sep, hi = str(text).partition(":")
    if not sep:
        raise InputError(f"range must look like lo:hi, got {text!r}")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise InputError(f"range must look like lo:hi, got {text!r}") from None


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    lo: int | None = None
    hi: int | None = None
    a: int = 2
    precision: int = 128
    preset: str = "calibrated"
    refinement: dict = field(default_factory=dict)
    data_dir: str | None = None
    output: str | None = None
    workers: int = 1
    format: str = "json"
    chunk: int = 1024
    d: tuple[int, ...] = ()
    p: int | None = None
    lattice: str | None = None
    which: str = "I"
    check: bool = False
    quasi_reflections: str = "exempt"
    reading: str = "ne1"
    allow_zero: bool = False

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise InputError(f"unknown subcommand {self.subcommand!r}")
        if (self.lo is None) != (self.hi is None):
            raise InputError("range needs both ends")
        if self.lo is not None and self.lo > self.hi:
            raise InputError("range must satisfy lo <= hi")
        if self.precision < 128:
            raise InputError("precision must be at least 128 bits")
        if self.workers < 1 or self.chunk < 1:
            raise InputError("workers and chunk must be positive")
        if self.a not in (2, 3):
            raise InputError("a must be 2 or 3")
        if self.format not in FORMATS:
            raise InputError(f"format must be one of {FORMATS}")
        if self.which not in ("I", "II"):
            raise InputError("which must be I or II")

    @property
    def range(self) -> tuple[int, int] | None:
        return None if self.lo is None else (self.lo, self.hi)


# ---------------------------------------------------------------------------
# output helpers


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _refinement(cfg: RunConfig):
    from .obstruction import RefinementConfig
    base = RefinementConfig.preset(cfg.preset)
    over = dict(cfg.refinement)
    over["start_precision"] = cfg.precision
    over["max_precision"] = max(base.max_precision, cfg.precision)
    return replace(base, **over)


def _appendix(cfg: RunConfig, which: str) -> list[int]:
    from .obstruction import appendix_path, load_appendix
    return load_appendix(appendix_path(which, cfg.data_dir), which)


def _targets(cfg: RunConfig) -> list[int]:
    if cfg.d:
        return list(cfg.d)
    if cfg.range is not None:
        return list(range(cfg.lo, cfg.hi + 1))
    raise InputError(f"{cfg.subcommand} needs d values or --range")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_volume(cfg: RunConfig) -> int:
    from .hmvol import vol_O_L
    from .arith import dyadic_str
    rows, bounds = [], []
    for d in _targets(cfg):
        if d < 2:
            raise InputError("d must be at least 2")
        v = vol_O_L(d, cfg.precision)
        rows.append({"d": d, **v.to_dict()})
        bounds.append((dyadic_str(v.enclosure.lower, 15, "down"), dyadic_str(v.enclosure.upper, 15, "up")))
    if cfg.format == "json":
        _emit(cfg, _json_text(rows))
    else:
        header = ("d", "rational_coeff", "sqrt_radicand", "pi_power", "lower", "upper")
        _emit(cfg, _csv_text(header, [[r["d"], r["rational_coeff"], r["sqrt_radicand"], r["pi_power"],
                                       *b] for r, b in zip(rows, bounds)]))
    return EXIT_OK


def _cmd_density(cfg: RunConfig) -> int:
    from .localdensity import alpha_p, jordan_decompose
    from .qlattice import GramLattice
    if cfg.lattice is None or cfg.p is None:
        raise InputError("density needs a lattice file and --p")
    try:
        L = GramLattice.from_json(Path(cfg.lattice).read_text())
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise InputError(f"cannot read lattice file: {e}") from None
    from .arith import factorize
    if cfg.p < 2 or tuple(factorize(cfg.p).primes) != (cfg.p,):
        raise InputError("p must be prime")
    value = alpha_p(jordan_decompose(L, cfg.p))
    if cfg.format == "json":
        _emit(cfg, _json_text({"gram": [list(r) for r in L.gram], "p": cfg.p, "alpha_p": str(value)}))
    else:
        _emit(cfg, _csv_text(("p", "alpha_p"), [[cfg.p, str(value)]]))
    return EXIT_OK


def _cmd_reidtai(cfg: RunConfig) -> int:
    from .reidtai import compare_with_table, load_table, noncanonical_scan
    rows = noncanonical_scan(quasi_reflections=cfg.quasi_reflections)
    records = [{"singularity": r.singularity.sorted().label(), "chi": r.chi.label(),
                "alpha": f"xi{r.singularity.m}^{r.alpha % r.singularity.m}", "witness": r.witness.label()}
               for r in rows]
    code = EXIT_OK
    comparison = None
    if cfg.check:
        table_path = Path(cfg.data_dir) / "reidtai_table.txt" if cfg.data_dir else None
        comparison = compare_with_table(rows, load_table(table_path)).summary()
        if not comparison["exact"]:
            code = EXIT_VALIDATION
            print(f"scan differs from the table: {len(comparison['scan_only'])} scan-only, "
                  f"{len(comparison['table_only'])} table-only", file=sys.stderr)
    if cfg.format == "json":
        out = {"rows": records}
        if comparison is not None:
            out["comparison"] = comparison
        _emit(cfg, _json_text(out))
    else:
        header = ("singularity", "chi", "alpha", "witness")
        _emit(cfg, _csv_text(header, [[r[k] for k in header] for r in records]))
    return code


def _cmd_branch(cfg: RunConfig) -> int:
    from .branchgeom import CLASS_CSV_FIELDS, class_table
    rows = []
    for d in _targets(cfg):
        if d < 2:
            raise InputError("d must be at least 2")
        rows.extend(class_table(d, cfg.precision))
    if cfg.format == "json":
        _emit(cfg, _json_text(rows))
    else:
        _emit(cfg, _csv_text(CLASS_CSV_FIELDS, [[r[k] for k in CLASS_CSV_FIELDS] for r in rows]))
    return EXIT_OK


def _cmd_census(cfg: RunConfig) -> int:
    from .obstruction import census, census_csv_text
    if cfg.range is None:
        raise InputError("census needs --range lo:hi")
    if cfg.lo < 49:
        raise InputError("census range must start at d >= 49")
    app = _appendix(cfg, "I" if cfg.a == 2 else "II")
    records, summary = census(cfg.lo, cfg.hi, cfg.a, _refinement(cfg), app, cfg.workers, cfg.chunk)
    summary_text = summary.to_json(with_timing=False) + "\n"
    if cfg.format == "csv":
        _emit(cfg, census_csv_text(records))
        if cfg.output:
            Path(cfg.output + ".summary.json").write_text(summary_text)
        else:
            sys.stderr.write(summary_text)
    else:
        _emit(cfg, summary_text)
    if summary.bad:
        print(f"refined pass-set meets the appendix at {len(summary.bad)} values", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_cusp(cfg: RunConfig) -> int:
    from .modforms import cusp_witnesses, weight3_cusp_exists
    if cfg.d:
        found = {d: weight3_cusp_exists(d, cfg.allow_zero, cfg.reading) for d in cfg.d}
    elif cfg.range is not None:
        found = cusp_witnesses(cfg.lo, cfg.hi, cfg.allow_zero, cfg.reading)
        found = {d: found[d] for d in sorted(found)}
    else:
        raise InputError("cusp needs d values or --range")
    if cfg.format == "json":
        _emit(cfg, _json_text({str(d): (list(w) if w else None) for d, w in found.items()}))
    else:
        _emit(cfg, _csv_text(("d", "a", "b", "c"),
                             [[d, *(w if w else ("", "", ""))] for d, w in found.items()]))
    return EXIT_OK


def _cmd_gt(cfg: RunConfig) -> int:
    from .modforms import cusp_witnesses, general_type_verdict
    targets = _targets(cfg)
    app = frozenset(_appendix(cfg, "II"))
    wit = cusp_witnesses(min(targets), max(targets), reading=cfg.reading) if targets else {}
    rows = [(d, general_type_verdict(d, app, wit.get(d), cfg.reading), wit.get(d)) for d in targets]
    if cfg.format == "json":
        _emit(cfg, _json_text([{"d": d, "verdict": v, "witness": list(w) if w else None} for d, v, w in rows]))
    else:
        _emit(cfg, _csv_text(("d", "verdict", "a", "b", "c"),
                             [[d, v, *(w if w else ("", "", ""))] for d, v, w in rows]))
    return EXIT_OK


def _cmd_validate(cfg: RunConfig) -> int:
    from .obstruction import appendix_path, appendix_report
    rep = appendix_report(cfg.which, appendix_path(cfg.which, cfg.data_dir))
    if cfg.format == "json":
        _emit(cfg, _json_text(rep))
    else:
        keys = sorted(rep)
        _emit(cfg, _csv_text(keys, [[json.dumps(rep[k]) if isinstance(rep[k], list) else rep[k] for k in keys]]))
    return EXIT_OK if rep["ok"] else EXIT_VALIDATION


_HANDLERS = {
    "volume": _cmd_volume,
    "density": _cmd_density,
    "reidtai-table": _cmd_reidtai,
    "branch": _cmd_branch,
    "census": _cmd_census,
    "cusp": _cmd_cusp,
    "gt-classify": _cmd_gt,
    "validate-appendix": _cmd_validate,
}


def run(cfg: RunConfig) -> int:
    """Execute one subcommand; returns the exit code."""
    from .obstruction import AppendixError
    try:
        return _HANDLERS[cfg.subcommand](cfg)
    except AppendixError as e:
        print(f"appendix error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (InputError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=FORMATS, default=None)
    p.add_argument("--precision", type=int, default=None, help="bits, at least 128")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--chunk", type=int, default=None)
    p.add_argument("--range", default=None, help="lo:hi (inclusive)")
    p.add_argument("--a", type=int, default=None, choices=(2, 3))
    p.add_argument("--data-dir", default=None)
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--preset", default=None, choices=("calibrated", "default", "all-exact"))
    p.add_argument("--euler-product", choices=("exact", "zeta6"), default=None)
    p.add_argument("--alpha3-chi", choices=("exact", "minus_one"), default=None)
    p.add_argument("--counts", choices=("paper", "exact"), default=None)
    p.add_argument("--oq-halving", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--nu-exact", action=argparse.BooleanOptionalAction, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orthocensus")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("volume", help="Hirzebruch-Mumford volume of O(L) for L = L(d)")
    p.add_argument("d", type=int, nargs="*")
    _common(p)
    p = sub.add_parser("density", help="local density alpha_p of a lattice given as JSON")
    p.add_argument("lattice")
    p.add_argument("--p", type=int, required=True)
    _common(p)
    p = sub.add_parser("reidtai-table", help="non-canonical cyclic quotient singularities")
    p.add_argument("--check", action="store_true", help="compare with the shipped table; exit 1 on mismatch")
    p.add_argument("--quasi-reflections", choices=("exempt", "naive"), default=None)
    _common(p)
    p = sub.add_parser("branch", help="reflective classes and their bounds for d")
    p.add_argument("d", type=int, nargs="*")
    _common(p)
    p = sub.add_parser("census", help="refined obstruction census over a range")
    _common(p)
    p = sub.add_parser("cusp", help="weight 3 cusp form witnesses (a, b, c)")
    p.add_argument("d", type=int, nargs="*")
    p.add_argument("--reading", choices=("ne1", "eq1"), default=None)
    p.add_argument("--allow-zero", action="store_true")
    _common(p)
    p = sub.add_parser("gt-classify", help="general_type / unknown per d")
    p.add_argument("d", type=int, nargs="*")
    p.add_argument("--reading", choices=("ne1", "eq1"), default=None)
    _common(p)
    p = sub.add_parser("validate-appendix", help="check an appendix file against the published counts")
    p.add_argument("--which", choices=("I", "II"), default=None)
    _common(p)
    return parser


def _pick(args, name: str, env: dict, cast=str):
    """flag > environment > default."""
    val = getattr(args, name, None)
    if val is not None:
        return val
    raw = env.get(ENV_PREFIX + name.upper())
    if raw is not None and raw != "":
        try:
            return cast(raw)
        except ValueError:
            raise InputError(f"bad value {raw!r} for {ENV_PREFIX + name.upper()}") from None
    return DEFAULTS.get(name)


def _env_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def config_from_args(argv: list[str] | None = None, env: dict | None = None) -> RunConfig:
    env = dict(os.environ if env is None else env)
    args = build_parser().parse_args(argv)
    rng = _pick(args, "range", env)
    lo, hi = parse_range(rng) if rng else (None, None)
    refinement = {}
    for flag, key, cast in (("euler_product", "euler_product", str), ("alpha3_chi", "alpha3_chi", str),
                            ("counts", "counts", str), ("oq_halving", "oq_odd_halving", _env_bool),
                            ("nu_exact", "nu_exact", _env_bool)):
        v = _pick(args, flag, env, cast)
        if v is not None:
            refinement[key] = v
    return RunConfig(
        subcommand=args.subcommand,
        lo=lo, hi=hi,
        a=_pick(args, "a", env, int),
        precision=_pick(args, "precision", env, int),
        preset=_pick(args, "preset", env),
        refinement=refinement,
        data_dir=_pick(args, "data_dir", env),
        output=_pick(args, "output", env),
        workers=_pick(args, "workers", env, int),
        format=_pick(args, "format", env),
        chunk=_pick(args, "chunk", env, int),
        d=tuple(getattr(args, "d", ()) or ()),
        p=getattr(args, "p", None),
        lattice=getattr(args, "lattice", None),
        which=_pick(args, "which", env) or "I",
        check=bool(getattr(args, "check", False)),
        quasi_reflections=_pick(args, "quasi_reflections", env) or "exempt",
        reading=_pick(args, "reading", env) or "ne1",
        allow_zero=bool(getattr(args, "allow_zero", False)),
    )


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as e:
        # argparse reports usage errors with status 2 and --help with 0
        return int(e.code or 0)
    except (InputError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    try:
        _refinement(cfg)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    return run(cfg)
