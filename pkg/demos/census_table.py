"""
Counting solutions
==================

Every highest-weight eigenstate of the periodic chain should come from exactly
one admissible solution of the Bethe equations, once physical singular
solutions are counted and unphysical ones discarded.  Weighting each sector by
the size of its multiplet must then reproduce 2**N.
"""

import sys

from twistbethe.census import census_vs_ed, format_table, multiplet_sum_check, run_census

n_max = int(sys.argv[1]) if len(sys.argv) > 1 else 7

for n in range(2, n_max + 1):
    rep = run_census(n)
    print(format_table(rep))
    ed_ok = all(s.complete for s in census_vs_ed(rep))
    print(f"multiplet sum ok: {multiplet_sum_check(rep)}   ED cross-check ok: {ed_ok}\n")
