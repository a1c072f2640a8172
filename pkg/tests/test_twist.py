import mpmath as mp
import pytest

from twistbethe.errors import InconsistentSystemError, NumericalError, PrecisionError, UnsupportedModelError
from twistbethe.model import ModelSpec, RootSet, SingularDecomposition, physical_constraint, residual_norm
from twistbethe.solver import newton_solve
from twistbethe.twist import (
    epsilon_constraint_check,
    epsilon_limit,
    evaluate_series,
    expand_series,
    first_order_correction,
    homotopy_track,
    pair_shift_gap,
    richardson_limit,
    series_residual,
)


def contour_coefficients(order, radius="0.05", points=16, dps=50):
    """Independent N=4 oracle: solve at complex beta on a circle with mpmath, then a discrete Cauchy integral."""
    i = mp.mpc(0, 1)
    with mp.workdps(dps):
        r = mp.mpf(radius)
        samples = []
        for k in range(points):
            b = r * mp.exp(2 * mp.pi * i * k / points)
            ph = mp.exp(-i * b)

            def f(x, y, ph=ph):
                return [
                    (x + i / 2) ** 4 * (x - y - i) - ph * (x - i / 2) ** 4 * (x - y + i),
                    (y + i / 2) ** 4 * (y - x - i) - ph * (y - i / 2) ** 4 * (y - x + i),
                ]

            # the stretched start keeps findroot off the valley of exact pairs
            samples.append(mp.findroot(f, (i / 2 * 1.01 + b / 4, -i / 2 * 1.01 + b / 4)))
        return [
            [complex(sum(s[j] * mp.exp(-2 * mp.pi * i * k * l / points) for k, s in enumerate(samples)) / points / r**l)
             for l in range(1, order + 1)]
            for j in (0, 1)
        ]


def test_series_matches_worked_example(series4):
    exact = [[0.25, 0, -1 / 96, 1j / 256], [0.25, 0, -1 / 96, -1j / 256]]
    for j in range(2):
        for l in range(4):
            assert abs(complex(series4.coefficients[j][l]) - exact[j][l]) < 1e-30


def test_series_matches_contour_oracle(pair4):
    spec, dec = pair4
    series = expand_series(spec, dec, 6)
    oracle = contour_coefficients(6)
    for j in range(2):
        for l in range(6):
            assert abs(complex(series.coefficients[j][l]) - oracle[j][l]) < 1e-12


def test_zeroth_order_is_string(series4):
    assert [complex(z) for z in evaluate_series(series4, 0)] == [0.5j, -0.5j]


def test_first_order(pair4):
    spec, dec = pair4
    assert abs(complex(first_order_correction(spec, dec)) - 0.25) < 1e-30


def test_order_consistency(pair4):
    spec, dec = pair4
    lo, hi = expand_series(spec, dec, 3), expand_series(spec, dec, 6)
    for j in range(2):
        for l in range(3):
            assert abs(lo.coefficients[j][l] - hi.coefficients[j][l]) < 1e-30
    assert hi.truncated(1).coefficients[0][0] == hi.coefficients[0][0]


def test_series_with_remainder_n6():
    spec = ModelSpec(sites=6, magnons=3, digits=40)
    dec = SingularDecomposition(spec.string_values(), RootSet((mp.mpc(0),)))
    s = expand_series(spec, dec, 6)
    c = s.coefficients
    assert abs(c[0][0] - c[1][0]) < 1e-30
    r1, r2 = series_residual(s, 1e-2), series_residual(s, 5e-3)
    assert r1 < 1e-13
    # truncation at beta^6 leaves an O(beta^7) residual
    assert 2**6 < r1 / r2 < 2**8


def test_residual_decay_n4(series4):
    r = [series_residual(series4, b) for b in (4e-2, 2e-2, 1e-2)]
    assert r[0] / r[1] > 2**4 and r[1] / r[2] > 2**4


def test_series_vs_newton_at_0_1(series4):
    spec = ModelSpec(sites=4, magnons=2, beta=0.1)
    ref = RootSet(tuple(complex(z) for z in evaluate_series(series4, 0.1)))
    assert newton_solve(spec, ref).distance(ref) < 1e-6


def test_series_parity(series4):
    plus = [complex(z) for z in evaluate_series(series4.truncated(1), 0.01)]
    minus = [complex(z) for z in evaluate_series(series4.truncated(1), -0.01)]
    for p, m, z0 in zip(plus, minus, (0.5j, -0.5j)):
        assert abs((p - z0) + (m - z0)) < 1e-15


def test_unphysical_pair_has_no_series():
    spec = ModelSpec(sites=5, magnons=2, digits=40)
    with pytest.raises(InconsistentSystemError):
        expand_series(spec, SingularDecomposition(spec.string_values(), RootSet(())))


def test_series_spin_one_unsupported():
    spec = ModelSpec(spin=1, sites=4, magnons=3, digits=40)
    with pytest.raises(UnsupportedModelError):
        expand_series(spec, SingularDecomposition(spec.string_values(), RootSet(())))


# --- homotopy


def test_homotopy_endpoint_matches_series(series4):
    spec = ModelSpec(sites=4, magnons=2)
    path = homotopy_track(spec, evaluate_series(series4, 0.5), 0.5, 1e-3)
    end = path[-1][1]
    ref = RootSet(tuple(complex(z) for z in evaluate_series(series4, 1e-3)))
    assert path[-1][0] == pytest.approx(1e-3)
    assert end.distance(ref) < 1e-8


def test_homotopy_same_beta_is_identity():
    spec = ModelSpec(sites=2, magnons=1)
    path = homotopy_track(spec, [0.0], 0.2, 0.2, steps=1)
    assert path[0][1].distance(path[-1][1]) == 0


def test_homotopy_from_unphysical_pair_violates_first_order_condition():
    """N odd: no twisted family keeps c_1 = c_2; record what the tracker does."""
    spec = ModelSpec(sites=5, magnons=2)
    try:
        path = homotopy_track(spec, [0.5j + 0.002, -0.5j + 0.002], 1e-2, 1e-3, steps=5)
    except NumericalError:
        return
    end = path[-1][1]
    # whatever the tracker settled on is not a deformed pair with equal shifts
    assert pair_shift_gap(end, 1e-3, spec) > 1e-2 or end.distance(RootSet((0.5j, -0.5j))) > 0.1


# --- epsilon regulator


def test_epsilon_values_n4():
    spec = ModelSpec(sites=4, magnons=2)
    dec = SingularDecomposition(spec.string_values(), RootSet(()))
    v3, v4 = (complex(x) for x in epsilon_constraint_check(spec, dec, [1e-3, 1e-4]))
    assert abs(v3 - 1) < 1e-2
    assert abs(v4 - 1) < abs(v3 - 1) / 5


def test_epsilon_limit_odd_n():
    spec = ModelSpec(sites=5, magnons=2, digits=40)
    dec = SingularDecomposition(spec.string_values(), RootSet(()))
    value, _ = epsilon_limit(spec, dec)
    assert abs(value + 1) < 1e-12


def test_epsilon_floor():
    spec = ModelSpec(sites=4, magnons=2)
    dec = SingularDecomposition(spec.string_values(), RootSet(()))
    with pytest.raises(PrecisionError):
        epsilon_constraint_check(spec, dec, [1e-14])


def test_richardson_on_polynomial():
    xs = [0.1 / 2**k for k in range(4)]
    value, err = richardson_limit(xs, [3 + 2 * x - x**3 for x in xs])
    assert abs(value - 3) < 1e-13


def test_regulators_agree_with_constraint_n6():
    from twistbethe.twist import beta_limit

    spec = ModelSpec(sites=6, magnons=3, digits=40)
    dec = SingularDecomposition(spec.string_values(), RootSet((mp.mpc(0),)))
    target, _ = physical_constraint(spec, dec)
    b, _ = beta_limit(expand_series(spec, dec))
    e, _ = epsilon_limit(spec, dec)
    assert abs(b - target) < 1e-6 and abs(e - target) < 1e-6
