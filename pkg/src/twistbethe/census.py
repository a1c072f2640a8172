"""Completeness bookkeeping: solutions per magnon sector against highest-weight counts."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import comb

import numpy as np

from .ed import match_spectrum
from .errors import UnsupportedModelError
from .model import Family, Kind, ModelSpec, detect_singular, energy
from .solver import SolutionSet, SolveOptions, enumerate_solutions, ladder_seeds

CENSUS_CAP = 10


def expected_count(n: int, m: int) -> int:
    """Highest-weight states with ``m`` magnons: ``C(N, M) - C(N, M - 1)``."""
    return comb(n, m) - (comb(n, m - 1) if m >= 1 else 0)


@dataclass
class CensusRow:
    M: int
    n_regular: int
    n_singular_physical: int
    n_singular_unphysical: int
    expected: int | None
    seeds_tried: int
    reruns: int = 0
    solutions: SolutionSet | None = field(default=None, repr=False)

    @property
    def found(self) -> int:
        return self.n_regular + self.n_singular_physical

    @property
    def complete(self) -> bool:
        return self.expected is None or self.found == self.expected


@dataclass
class CensusReport:
    N: int
    rows: list
    spin: Fraction = Fraction(1, 2)
    elapsed: float = 0.0

    @property
    def complete(self) -> bool:
        return all(r.complete for r in self.rows)

    @property
    def weighted_total(self) -> int:
        """``sum_M (n_regular + n_physical) (N - 2M + 1)``."""
        return sum(r.found * (self.N - 2 * r.M + 1) for r in self.rows)

    def row(self, m: int) -> CensusRow:
        for r in self.rows:
            if r.M == m:
                return r
        raise KeyError(m)


def _row(spec: ModelSpec, opts: SolveOptions, extra) -> CensusRow:
    sols = enumerate_solutions(spec, opts, extra)
    return CensusRow(
        spec.M,
        sols.count(Kind.REGULAR),
        sols.count(Kind.SINGULAR_PHYSICAL),
        sols.count(Kind.SINGULAR_UNPHYSICAL),
        expected_count(spec.N, spec.M) if spec.spin == Fraction(1, 2) else None,
        sols.seeds_tried,
        solutions=sols,
    )


def run_census(n: int, opts: SolveOptions | None = None, spin=Fraction(1, 2), cap: int = CENSUS_CAP) -> CensusReport:
    """Enumerate every sector ``M <= N/2`` of the zero-twist XXX chain.

    A row short of its expected count is redone once with four times the seeds;
    if it is still short it stays flagged as incomplete.  Spin other than 1/2
    has no expected column.
    """
    opts = opts or SolveOptions()
    if n < 1:
        raise ValueError("N must be >= 1")
    if n > cap:
        raise UnsupportedModelError(f"census is capped at N = {cap}")
    start = time.perf_counter()
    base = ModelSpec(family=Family.XXX, spin=spin, sites=n, magnons=0)
    rows = []
    lower = None
    for m in range(base.max_magnons + 1 if spin == Fraction(1, 2) else base.max_magnons // 2 + 1):
        spec = base.with_magnons(m)
        extra = ladder_seeds(spec, lower)
        row = _row(spec, opts, extra)
        if not row.complete:
            again = _row(spec, replace(opts, seed_count=4 * opts.seed_count), extra)
            again.reruns = 1
            again.seeds_tried += row.seeds_tried
            row = again
        rows.append(row)
        lower = row.solutions
    return CensusReport(n, rows, Fraction(spin), time.perf_counter() - start)


def multiplet_sum_check(report: CensusReport) -> bool:
    """True iff the census accounts for all ``2^N`` states."""
    if not report.complete:
        raise ValueError("census has incomplete rows")
    return report.weighted_total == 2**report.N


def census_energies(report: CensusReport) -> list:
    """``(roots, energy, M)`` for every regular and physical singular solution."""
    out = []
    for row in report.rows:
        spec = row.solutions.spec
        for roots, c in row.solutions.solutions:
            if c.kind in (Kind.REGULAR, Kind.SINGULAR_PHYSICAL):
                out.append((roots, float(energy(spec, roots)), row.M))
    return out


def census_vs_ed(report: CensusReport, tol: float = 1e-8) -> list:
    """One :class:`~twistbethe.ed.SpectrumReport` per sector, matching census energies against ED."""
    bethe = census_energies(report)
    return [match_spectrum(report.N, row.M, 0.0, bethe, tol) for row in report.rows]


def format_table(report: CensusReport) -> str:
    head = ["M", "regular", "phys.sing", "unphys.sing", "expected", "seeds", "status"]
    lines = [head]
    for r in report.rows:
        lines.append([
            str(r.M), str(r.n_regular), str(r.n_singular_physical), str(r.n_singular_unphysical),
            "-" if r.expected is None else str(r.expected), str(r.seeds_tried),
            "ok" if r.complete else "INCOMPLETE",
        ])
    widths = [max(len(row[k]) for row in lines) for k in range(len(head))]
    text = [f"N = {report.N}"]
    text += ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in lines]
    if report.spin == Fraction(1, 2):
        text.append(f"weighted total {report.weighted_total} (2^N = {2 ** report.N})")
    return "\n".join(text)
