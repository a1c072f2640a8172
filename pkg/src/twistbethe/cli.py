"""Command-line front end: ``twistbethe {solve,classify,expand,verify,census,spectrum}``.

Exit status is 0 on success, 1 on a usage error (bad flag, out-of-range value,
malformed roots) and 2 on a numerical failure (no convergence, precision
exhausted, or a verification that does not pass).
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import _numeric as nm
from .errors import BetheError, NumericalError, UnphysicalError
from .model import Family, Kind, ModelSpec, classify, detect_singular, energy

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
COMMANDS = ("solve", "classify", "expand", "verify", "census", "spectrum")
TEST_POINTS = (0.3 + 0.1j, -0.7 + 0.25j)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    sites: int
    spin: Fraction
    spec: ModelSpec | None
    precision: int
    order: int | None
    tol: float | None
    seeds: int
    rng: int
    roots: str | None
    out: str | None
    fmt: str


def _spin(text: str) -> Fraction:
    try:
        s = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad spin {text!r}") from exc
    if s <= 0 or (2 * s).denominator != 1:
        raise argparse.ArgumentTypeError(f"spin must be a positive half-integer, got {text}")
    return s


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {text}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--model", choices=["xxx", "xxz"], default="xxx")
    common.add_argument("--spin", type=_spin, default=Fraction(1, 2), help="spin per site, e.g. 1/2 or 1")
    common.add_argument("--eta", type=float, default=None, help="XXZ anisotropy")
    common.add_argument("-N", dest="N", type=_positive(int), required=True, help="number of sites")
    common.add_argument("-M", dest="M", type=int, default=None, help="number of magnons")
    common.add_argument("--beta", type=float, default=0.0, help="twist angle")
    common.add_argument("--order", type=_positive(int), default=None, help="series order (default N)")
    common.add_argument(
        "--precision", type=int, default=None,
        help=f"decimal digits, 0 = double (default ${nm.PRECISION_ENV} or 0; expand uses 40)",
    )
    common.add_argument("--tol", type=_positive(float), default=None, help="residual tolerance")
    common.add_argument("--seeds", type=_positive(int), default=400, help="Newton seeds per sector")
    common.add_argument("--rng", type=int, default=0, help="random seed")
    common.add_argument("--roots", default=None, help='comma-separated roots, e.g. "i/2,-i/2,0.3+0.1i"')
    common.add_argument("--out", default=None, help="also write the output to this file")
    common.add_argument("--format", dest="fmt", choices=["json", "table"], default="table")

    parser = _Parser(prog="twistbethe", description="Twisted Bethe equations for XXX/XXZ chains.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "solve": "find all solutions in one magnon sector (or polish --roots)",
        "classify": "classify a root set as regular, physical or unphysical singular",
        "expand": "twist-series coefficients of a physical singular solution",
        "verify": "check a root set against the transfer matrix and exact diagonalization",
        "census": "count solutions in every sector against the highest-weight numbers",
        "spectrum": "exact-diagonalization sector spectrum matched to Bethe energies",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def parse_args(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    precision = args.precision
    if precision is None:
        precision = nm.default_digits()
        if args.command == "expand" and precision == 0:
            precision = 40
    if precision < 0:
        raise UsageError("--precision must be >= 0")
    if args.command in ("solve", "classify", "verify", "spectrum") and args.M is None:
        raise UsageError(f"{args.command} needs -M")
    if args.command == "classify" and args.roots is None:
        raise UsageError("classify needs --roots")
    if args.command == "verify" and args.roots is None:
        raise UsageError("verify needs --roots")
    if args.M is not None and args.M < 0:
        raise UsageError("-M must be >= 0")
    spec = None
    if args.command != "census":
        m = args.M
        if m is None:
            m = int(2 * args.spin + 1)
        # ModelSpec validates M <= sN and the XXZ genericity condition
        spec = ModelSpec(
            family=Family(args.model), spin=args.spin, sites=args.N, magnons=m,
            eta=args.eta, beta=args.beta, digits=precision,
        )
    elif args.model != "xxx" or args.beta != 0:
        raise UsageError("census runs the untwisted XXX chain only")
    return RunConfig(
        args.command, args.N, args.spin, spec, precision, args.order, args.tol, args.seeds, args.rng,
        args.roots, args.out, args.fmt,
    )


def _opts(cfg: RunConfig):
    from .solver import SolveOptions

    return SolveOptions(seed_count=cfg.seeds, random_seed=cfg.rng, residual_tolerance=cfg.tol)


def _roots(cfg: RunConfig):
    from .io import parse_roots

    roots = parse_roots(cfg.roots, cfg.precision)
    if len(roots) != cfg.spec.M:
        raise UsageError(f"got {len(roots)} roots for M = {cfg.spec.M}")
    return roots


def _fmt(z, digits=12) -> str:
    z = complex(z)
    if abs(z.imag) < 10.0**-digits:
        return f"{z.real:.{digits}g}"
    return f"{z.real:.{digits}g}{z.imag:+.{digits}g}i"


def _decimal(x, digits: int) -> str:
    """``x`` to ``digits`` significant digits, trailing zeros dropped."""
    if not digits:
        return nm.fmt_real(float(x))
    text = mpmath.nstr(x, digits, strip_zeros=True, min_fixed=-digits, max_fixed=digits)
    return "0" if text in ("0.0", "-0.0") else text.removesuffix(".0")


def _fmt_roots(roots) -> str:
    return "{" + ", ".join(_fmt(z, 10) for z in roots) + "}"


# ---------------------------------------------------------------------------
# commands


def cmd_solve(cfg: RunConfig):
    from .solver import enumerate_solutions, newton_solve

    spec = cfg.spec
    if cfg.roots:
        roots = newton_solve(spec, _roots(cfg), _opts(cfg))
        c = classify(spec, roots, cfg.tol)
        return roots, f"{_fmt_roots(roots)}  {c.kind.value}  residual {c.residual_norm:.3e}"
    sols = enumerate_solutions(spec, _opts(cfg))
    lines = [f"N = {spec.N}  M = {spec.M}  beta = {spec.beta}  ({sols.seeds_tried} seeds, {len(sols.solutions)} solutions)"]
    for roots, c in sols.solutions:
        lines.append(f"{c.kind.value:<20} {_fmt_roots(roots)}")
    return sols, "\n".join(lines)


def cmd_classify(cfg: RunConfig):
    roots = _roots(cfg)
    c = classify(cfg.spec, roots, cfg.tol)
    extra = "" if c.constraint_value is None else f"  constraint {_fmt(c.constraint_value)}"
    return c, f"{c.kind.value}  residual {c.residual_norm:.3e}{extra}"


def _series_table(series) -> str:
    lines = [f"twist series to order {series.order} ({series.spec.digits} digits)"]
    for j, row in enumerate(series.coefficients):
        lines.append(f"root {j + 1}: {_fmt(series.zeroth[j])}")
        for l, c in enumerate(row, start=1):
            re, im = (_decimal(x, series.spec.digits) for x in (c.real, c.imag))
            lines.append(f"  c({l}) = {re} {'-' if im.startswith('-') else '+'} {im.lstrip('-')}i")
    return "\n".join(lines)


def cmd_expand(cfg: RunConfig):
    from .solver import solve_reduced
    from .model import RootSet, SingularDecomposition
    from .twist import expand_series

    spec = cfg.spec
    if cfg.roots:
        dec = detect_singular(spec, _roots(cfg))
        if dec is None:
            raise UsageError("roots contain no singular string")
        decs = [dec]
    elif spec.M == spec.string_length:
        decs = [SingularDecomposition(spec.string_values(), RootSet(()))]
    else:
        found = solve_reduced(spec.with_digits(0), _opts(cfg))
        decs = [detect_singular(spec, r) for r, c in found.solutions if c.kind is Kind.SINGULAR_PHYSICAL]
        if not decs:
            raise UnphysicalError(f"no physical singular solution with N = {spec.N}, M = {spec.M}")
    series = [expand_series(spec, d, cfg.order) for d in decs]
    table = "\n\n".join(_series_table(s) for s in series)
    if len(series) == 1:
        return series[0], table
    from .io import to_document

    return {"series": [to_document(s, spec.digits) for s in series]}, table


def cmd_verify(cfg: RunConfig):
    from .aba import singular_limit_vector, transfer_eigenvalue_check
    from .ed import build_hamiltonian, match_spectrum
    from .twist import expand_series

    spec = cfg.spec
    if spec.family is not Family.XXX or spec.spin != Fraction(1, 2):
        from .errors import UnsupportedModelError

        raise UnsupportedModelError("verify supports the spin-1/2 XXX chain")
    roots = _roots(cfg)
    c = classify(spec, roots, cfg.tol)
    report = {"kind": c.kind.value, "residual": c.residual_norm, "N": spec.N, "M": spec.M, "beta": spec.beta}
    lines = [f"{c.kind.value}  residual {c.residual_norm:.3e}"]
    passed = c.kind in (Kind.REGULAR, Kind.SINGULAR_PHYSICAL)
    if passed:
        e = float(energy(spec, roots))
        sr = match_spectrum(spec.N, spec.M, spec.beta, [(roots, e, spec.M)])
        matched = bool(sr.bethe_matches)
        report.update(energy=e, ed_match=matched)
        lines.append(f"energy {e:.12f}  ED level {'found' if matched else 'MISSING'}")
        passed &= matched
        if c.kind is Kind.REGULAR:
            chk = transfer_eigenvalue_check(spec.N, roots, spec.beta, TEST_POINTS, spec.digits)
            report["transfer_residual"] = chk.max_residual
            lines.append(f"transfer eigen-check residual {chk.max_residual:.3e}")
            passed &= chk.passed()
        else:
            dec = detect_singular(spec, roots)
            vec = singular_limit_vector(spec, expand_series(spec.with_digits(max(spec.digits, 40)), dec))
            v = np.array([complex(x) for x in vec.amplitudes])
            h = build_hamiltonian(spec.N, 0.0)
            hv = h @ v
            rq = float(np.vdot(v, hv).real / np.vdot(v, v).real)
            res = float(np.linalg.norm(hv - rq * v) / np.linalg.norm(v))
            report.update(limit_rayleigh=rq, limit_residual=res)
            lines.append(f"limit vector Rayleigh quotient {rq:.12f}  residual {res:.3e}")
            passed &= res < 1e-8 and abs(rq - e) < 1e-8
    report["passed"] = bool(passed)
    lines.append("PASS" if passed else "FAIL")
    return report, "\n".join(lines)


def cmd_census(cfg: RunConfig):
    from .census import census_vs_ed, format_table, multiplet_sum_check, run_census

    spin = cfg.spin
    rep = run_census(cfg.sites, _opts(cfg), spin)
    table = format_table(rep)
    if spin == Fraction(1, 2) and rep.complete:
        ok = multiplet_sum_check(rep) and all(r.complete for r in census_vs_ed(rep))
        table += "\nED cross-check " + ("ok" if ok else "FAILED")
    return rep, table


def cmd_spectrum(cfg: RunConfig):
    from .ed import match_spectrum
    from .solver import enumerate_ladder

    spec = cfg.spec
    if spec.family is not Family.XXX or spec.spin != Fraction(1, 2):
        from .errors import UnsupportedModelError

        raise UnsupportedModelError("spectrum supports the spin-1/2 XXX chain")
    bethe = []
    # match_spectrum keeps lower sectors only at zero twist, where descendants reach this one
    for sols in enumerate_ladder(spec.with_digits(0), _opts(cfg)):
        m = sols.spec.M
        for roots, c in sols.solutions:
            if c.kind in (Kind.REGULAR, Kind.SINGULAR_PHYSICAL):
                bethe.append((roots, float(energy(sols.spec, roots)), m))
    rep = match_spectrum(spec.N, spec.M, spec.beta, bethe)
    lines = [f"N = {spec.N}  M = {spec.M}  beta = {spec.beta}  {len(rep.ed_eigenvalues)} levels"]
    owner = {idx: roots for roots, _, idx, _ in rep.bethe_matches}
    for k, e in enumerate(rep.ed_eigenvalues):
        lines.append(f"{e:+.12f}  " + (_fmt_roots(owner[k]) if k in owner else "(no Bethe state)"))
    lines.append("complete" if rep.complete else "INCOMPLETE")
    return rep, "\n".join(lines)


def run(cfg: RunConfig) -> tuple:
    """Dispatch; returns ``(result, table_text)``."""
    return {
        "census": cmd_census,
        "solve": cmd_solve,
        "classify": cmd_classify,
        "expand": cmd_expand,
        "verify": cmd_verify,
        "spectrum": cmd_spectrum,
    }[cfg.command](cfg)


def main(argv=None) -> int:
    from .io import emit

    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_args(argv)
        result, table = run(cfg)
        text = emit(result, cfg.fmt, cfg.out, cfg.precision, table)
        print(text)
        if isinstance(result, dict) and result.get("passed") is False:
            return EXIT_NUMERIC
        if cfg.command == "census" and not result.complete:
            return EXIT_NUMERIC
        return EXIT_OK
    except UsageError as exc:
        print(f"twistbethe: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"twistbethe: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (BetheError, ValueError) as exc:
        print(f"twistbethe: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
