from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistbethe.ed import (
    build_hamiltonian,
    eigenspace_overlap,
    eigvec_overlap,
    match_spectrum,
    sector_basis,
    sector_spectrum,
    site_operator,
    total_spin,
)
from twistbethe.errors import SizeCapError
from twistbethe.model import Kind, ModelSpec, energy, formal_singular_energy, detect_singular
from twistbethe.solver import enumerate_solutions


def gauge_hamiltonian(n, beta):
    """Twist spread evenly over all bonds; unitarily equivalent to the boundary form."""
    dim = 1 << n
    h = np.zeros((dim, dim), dtype=complex)
    phase = np.exp(-1j * beta / n)
    for s in range(dim):
        for a in range(n):
            b = (a + 1) % n
            ua, ub = (s >> a) & 1, (s >> b) & 1
            if ua == ub:
                continue
            h[s, s] -= 0.5
            t = s ^ (1 << a) ^ (1 << b)
            # a down spin hopping from a to b picks up the phase, the reverse its conjugate
            h[t, s] += 0.5 * (phase if ua else np.conj(phase))
    return h


def comm_norm(a, b):
    return abs(a @ b - b @ a).max()


def test_two_sites():
    assert np.allclose(np.linalg.eigvalsh(build_hamiltonian(2).toarray()), [-2, 0, 0, 0])
    assert np.allclose(sector_spectrum(2, 1), [-2, 0])


@pytest.mark.parametrize("n", [3, 4, 6])
def test_symmetries_untwisted(n):
    h = build_hamiltonian(n)
    assert abs(h - h.getH()).max() == 0
    assert comm_norm(h, total_spin(n, "x")) < 1e-12
    assert comm_norm(h, total_spin(n, "z")) < 1e-12


def test_twist_breaks_su2_keeps_u1():
    h = build_hamiltonian(4, 0.3)
    assert abs(h - h.getH()).max() < 1e-15
    assert comm_norm(h, total_spin(4, "z")) < 1e-12
    assert comm_norm(h, total_spin(4, "x")) > 1e-3


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 7), st.floats(-3, 3))
def test_gauge_form_has_same_spectrum(n, beta):
    a = np.linalg.eigvalsh(build_hamiltonian(n, beta).toarray())
    b = np.linalg.eigvalsh(gauge_hamiltonian(n, beta))
    assert np.allclose(a, b, atol=1e-10)


def test_trace_identity():
    h = build_hamiltonian(6, 0.2)
    vals = np.concatenate([sector_spectrum(6, m, 0.2) for m in range(7)])
    assert abs(vals.sum() - h.diagonal().sum().real) < 1e-9


def test_spectrum_continuous_in_twist():
    a = sector_spectrum(6, 3, 0.0)
    b = sector_spectrum(6, 3, 1e-3)
    assert np.abs(a - b).max() < 1e-2


def test_sectors():
    assert np.allclose(sector_spectrum(4, 0), [0])
    assert np.any(np.abs(sector_spectrum(4, 2) + 1) < 1e-12)
    assert all(len(sector_basis(6, m)) == comb(6, m) for m in range(7))


def test_site_operators():
    assert np.allclose(site_operator(2, 1, "-").toarray()[:, 0], [0, 1, 0, 0])
    sz = total_spin(3, "z").toarray()
    assert sz[0, 0] == 1.5


def test_overlaps():
    v = np.array([1, 2j, 0])
    assert eigvec_overlap(v, v) == pytest.approx(1)
    assert eigvec_overlap([1, 0], [0, 1]) == 0
    with pytest.raises(ValueError):
        eigvec_overlap([0, 0], [1, 0])
    assert eigenspace_overlap([1, 1, 0], np.eye(3)[:, :2]) == pytest.approx(1)


def test_match_n4_counts_descendants():
    bethe = []
    for m in range(3):
        spec = ModelSpec(sites=4, magnons=m)
        for roots, c in enumerate_solutions(spec).solutions:
            if c.kind in (Kind.REGULAR, Kind.SINGULAR_PHYSICAL):
                bethe.append((roots, float(energy(spec, roots)), m))
    rep = match_spectrum(4, 2, 0.0, bethe)
    assert rep.complete
    per_m = [sum(1 for _, _, k in bethe if k == m) for m in range(3)]
    assert per_m == [1, 3, 2]


def test_match_n5_unphysical_energy_is_absent():
    spec = ModelSpec(sites=5, magnons=2)
    sols = enumerate_solutions(spec)
    regular = [(r, float(energy(spec, r)), 2) for r, c in sols.solutions if c.kind is Kind.REGULAR]
    assert len(regular) == 5
    rep = match_spectrum(5, 2, 0.0, regular)
    assert not rep.unmatched_bethe
    (bad,) = [r for r, c in sols.solutions if c.kind is Kind.SINGULAR_UNPHYSICAL]
    e = float(formal_singular_energy(spec, detect_singular(spec, bad)))
    assert match_spectrum(5, 2, 0.0, [(bad, e, 2)]).unmatched_bethe


def test_match_empty():
    rep = match_spectrum(4, 1, 0.0, [])
    assert rep.unmatched_ed == [0, 1, 2, 3]


def test_size_cap():
    with pytest.raises(SizeCapError):
        build_hamiltonian(15)
