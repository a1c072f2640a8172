from dataclasses import replace
from fractions import Fraction

import pytest

from twistbethe.census import (
    census_vs_ed,
    expected_count,
    format_table,
    multiplet_sum_check,
    run_census,
)
from twistbethe.errors import UnsupportedModelError
from twistbethe.model import Kind, detect_singular, physical_constraint, reduced_norm
from twistbethe.solver import SolveOptions


def counts(rep, m):
    r = rep.row(m)
    return (r.n_regular, r.n_singular_physical, r.n_singular_unphysical, r.expected)


@pytest.fixture(scope="module")
def census6():
    return run_census(6)


def test_expected_counts():
    assert [expected_count(8, m) for m in range(5)] == [1, 7, 20, 28, 14]


def test_census_n2():
    rep = run_census(2)
    assert counts(rep, 1) == (1, 0, 0, 1)
    assert multiplet_sum_check(rep)


def test_census_n4():
    rep = run_census(4)
    assert counts(rep, 1) == (3, 0, 0, 3)
    # the only singular candidate at N = 4 is the physical pair itself
    assert counts(rep, 2) == (1, 1, 0, 2)
    assert rep.weighted_total == 1 * 5 + 3 * 3 + 2 * 1 == 16
    assert multiplet_sum_check(rep)
    assert "weighted total 16" in format_table(rep)


def test_census_n5_has_unphysical_pair():
    row = run_census(5).row(2)
    assert row.n_regular == row.expected == 5
    assert row.n_singular_unphysical >= 1


def test_census_n6_against_ed(census6):
    assert census6.complete and multiplet_sum_check(census6)
    assert all(r.complete for r in census_vs_ed(census6))


def test_singular_entries_satisfy_their_equations(census6):
    for row in census6.rows:
        spec = row.solutions.spec
        for roots, c in row.solutions.solutions:
            if c.kind in (Kind.SINGULAR_PHYSICAL, Kind.SINGULAR_UNPHYSICAL):
                dec = detect_singular(spec, roots)
                assert reduced_norm(spec, dec.remainder) < 1e-10
                assert physical_constraint(spec, dec)[1] == (c.kind is Kind.SINGULAR_PHYSICAL)


def test_dropping_a_solution_breaks_the_sum(census6):
    rows = list(census6.rows)
    rows[2] = replace(rows[2], n_regular=rows[2].n_regular - 1, expected=None)
    broken = replace(census6, rows=rows)
    assert broken.weighted_total != 2**6
    assert multiplet_sum_check(broken) is False


def test_incomplete_report_refuses_check(census6):
    rows = list(census6.rows)
    rows[1] = replace(rows[1], n_regular=0)
    with pytest.raises(ValueError):
        multiplet_sum_check(replace(census6, rows=rows))


def test_reproducible_across_random_seeds():
    a = run_census(6, SolveOptions(random_seed=11))
    b = run_census(6, SolveOptions(random_seed=12))
    assert [counts(a, m) for m in range(4)] == [counts(b, m) for m in range(4)]


def test_spin_one_census_has_no_expected_column():
    rep = run_census(3, spin=Fraction(1))
    assert all(r.expected is None for r in rep.rows)
    assert "-" in format_table(rep)


def test_cap():
    with pytest.raises(UnsupportedModelError):
        run_census(11)
