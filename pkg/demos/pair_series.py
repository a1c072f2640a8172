"""
The bound pair at four sites
============================

The roots +-i/2 make the Bethe equations 0/0 at zero twist.  Switching on a
small twist beta resolves the pair into two roots that move off the imaginary
axis as a power series in beta**(1/N).  This script prints the coefficients,
sums the series and compares with a direct Newton solve at finite twist.
"""

import mpmath
from twistbethe.model import ModelSpec, RootSet, SingularDecomposition, classify
from twistbethe.solver import newton_solve
from twistbethe.twist import evaluate_series, expand_series, series_residual

spec = ModelSpec(sites=4, magnons=2, digits=40)
pair = SingularDecomposition(spec.string_values(), RootSet(()))
print(classify(spec, pair.string_part).kind.value)

# %%
# Coefficients to fourth order.  The first is real and common to both roots,
# the fourth is imaginary and opposite.
series = expand_series(spec, pair, 6)
for j, row in enumerate(series.coefficients):
    print(f"root {j + 1}:")
    for l, c in enumerate(row, start=1):
        print(f"  c{l} = {mpmath.nstr(c, 12)}")

# %%
# Residual of the twisted equations at the summed series.
for beta in (1e-1, 1e-2, 1e-3, 1e-4):
    print(f"beta={beta:g}  residual {series_residual(series, beta):.2e}")

# %%
# At beta = 0.1 a double-precision Newton solve started from the series lands
# on the same roots.
beta = 0.1
guess = RootSet(tuple(complex(z) for z in evaluate_series(series, beta)))
exact = newton_solve(ModelSpec(sites=4, magnons=2, beta=beta), guess)
for a, b in zip(guess, exact):
    print(f"series {a:.10f}   newton {b:.10f}")
