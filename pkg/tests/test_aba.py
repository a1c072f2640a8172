import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistbethe.aba import (
    apply_monodromy,
    apply_transfer,
    bethe_vector,
    hamiltonian_from_transfer,
    monodromy_entry,
    singular_limit_vector,
    transfer_eigenvalue,
    transfer_eigenvalue_check,
    transfer_matrix,
)
from twistbethe.ed import build_hamiltonian, eigvec_overlap, reference_state, sector_spectrum, total_spin
from twistbethe.errors import PoleError, SizeCapError
from twistbethe.model import Kind, ModelSpec, RootSet, SingularDecomposition, energy
from twistbethe.solver import enumerate_solutions, newton_solve
from twistbethe.twist import evaluate_series, expand_series

from conftest import explicit_pair_state

points = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


def dense(x):
    return x.toarray() if hasattr(x, "toarray") else np.asarray(x, dtype=complex)


def test_single_site_lax():
    b = dense(monodromy_entry(1, "B", 0.3))
    assert np.allclose(b @ reference_state(1), [0, 1j])


def test_reference_state_eigen_relations():
    v = reference_state(3)
    assert np.allclose(dense(monodromy_entry(3, "A", 0.7)) @ v, (0.7 + 0.5j) ** 3 * v)
    assert np.allclose(dense(monodromy_entry(3, "D", 0.7)) @ v, (0.7 - 0.5j) ** 3 * v)


@settings(max_examples=10, deadline=None)
@given(points, points, st.sampled_from([4, 6]))
def test_b_operators_commute(lam, mu, n):
    b1, b2 = dense(monodromy_entry(n, "B", lam)), dense(monodromy_entry(n, "B", mu))
    assert np.linalg.norm(b1 @ b2 - b2 @ b1) < 1e-10 * max(1, np.linalg.norm(b1) * np.linalg.norm(b2))


@settings(max_examples=10, deadline=None)
@given(points, points, st.floats(-1, 1))
def test_twisted_transfer_matrices_commute(lam, mu, beta):
    t1, t2 = dense(transfer_matrix(4, lam, beta)), dense(transfer_matrix(4, mu, beta))
    assert np.linalg.norm(t1 @ t2 - t2 @ t1) < 1e-10 * max(1, np.linalg.norm(t1) * np.linalg.norm(t2))


def test_transfer_at_shift_point_is_translation():
    t = dense(transfer_matrix(2, 0.5j))
    swap = np.zeros((4, 4))
    for s in range(4):
        swap[((s & 1) << 1) | (s >> 1), s] = 1
    assert np.allclose(t, 1j**2 * swap)


def test_transfer_conserves_magnon_number():
    t = dense(transfer_matrix(4, 0.2 - 0.1j))
    sz = dense(total_spin(4, "z"))
    assert np.linalg.norm(t @ sz - sz @ t) < 1e-12


@pytest.mark.parametrize("n", [3, 4, 6])
def test_hamiltonian_from_transfer_matches_direct(n):
    ht = hamiltonian_from_transfer(n)
    hd = build_hamiltonian(n).toarray()
    assert np.abs(ht - hd).max() < 1e-9
    assert abs(np.trace(ht) - np.trace(hd)) < 1e-9


def test_twisted_hamiltonian_from_transfer():
    assert np.abs(hamiltonian_from_transfer(4, 0.3) - build_hamiltonian(4, 0.3).toarray()).max() < 1e-9


@settings(max_examples=5, deadline=None)
@given(points)
def test_matrix_free_action_matches_operators(lam):
    rng = np.random.default_rng(3)
    v = rng.normal(size=32) + 1j * rng.normal(size=32)
    for label in "ABCD":
        assert np.allclose(apply_monodromy(5, label, lam, v), dense(monodromy_entry(5, label, lam)) @ v)
    assert np.allclose(apply_transfer(5, lam, v, 0.4), dense(transfer_matrix(5, lam, 0.4)) @ v)


def test_bethe_vector_basics():
    assert np.allclose(bethe_vector(4, []).as_complex(), reference_state(4))
    singlet = bethe_vector(2, [0.0]).as_complex()
    assert abs(singlet[1] + singlet[2]) < 1e-14 and abs(singlet[1]) > 0
    a = bethe_vector(4, [0.3 + 0.1j, -0.2]).as_complex()
    b = bethe_vector(4, [-0.2, 0.3 + 0.1j]).as_complex()
    assert np.allclose(a, b)


def test_bethe_vector_refuses_string():
    with pytest.raises(PoleError):
        bethe_vector(4, [0.5j, -0.5j])
    null = bethe_vector(4, [0.5j, -0.5j], allow_singular=True).as_complex()
    assert np.linalg.norm(null) < 1e-12


def test_regular_energies_are_rayleigh_quotients():
    for n, m in [(5, 2), (6, 2), (6, 3)]:
        spec = ModelSpec(sites=n, magnons=m)
        h = build_hamiltonian(n)
        for roots, c in enumerate_solutions(spec).solutions:
            if c.kind is Kind.REGULAR:
                v = bethe_vector(n, roots).as_complex()
                rq = np.vdot(v, h @ v).real / np.vdot(v, v).real
                assert abs(rq - energy(spec, roots)) < 1e-8


def test_eigen_check_reference_state():
    rep = transfer_eigenvalue_check(4, [], 0.3, [0.2 + 0.1j])
    expected = (0.2 + 0.1j + 0.5j) ** 4 + np.exp(-0.3j) * (0.2 + 0.1j - 0.5j) ** 4
    assert rep.residuals[0] < 1e-13 and abs(rep.eigenvalues[0] - expected) < 1e-12


def test_eigen_check_twisted_pair(series4):
    spec = ModelSpec(sites=4, magnons=2, beta=0.1)
    roots = newton_solve(spec, RootSet(tuple(complex(z) for z in evaluate_series(series4, 0.1))))
    pts = [0.3, -0.5 + 0.1j]
    rep = transfer_eigenvalue_check(4, roots, 0.1, pts)
    assert rep.passed(1e-9)
    for mu, lam in zip(pts, rep.eigenvalues):
        assert abs(lam - transfer_eigenvalue(4, roots, mu, 0.1)) < 1e-8 * abs(lam)


def test_eigen_check_negative_control():
    assert transfer_eigenvalue_check(4, [0.3, -0.1], 0.0, [0.3]).max_residual > 1e-3


def test_limit_vector_n4(series4):
    v = singular_limit_vector(series4.spec, series4).as_complex()
    assert eigvec_overlap(v, explicit_pair_state(4)) > 1 - 1e-8
    h = build_hamiltonian(4)
    assert abs(np.vdot(v, h @ v).real + 1) < 1e-8


def test_limit_vector_n6():
    spec = ModelSpec(sites=6, magnons=2, digits=40)
    series = expand_series(spec, SingularDecomposition(spec.string_values(), RootSet(())))
    v = singular_limit_vector(spec, series).as_complex()
    vals, vecs = sector_spectrum(6, 2, vectors=True)
    e = float(energy(spec.with_digits(0), [0.5j, -0.5j]))
    k = int(np.argmin(np.abs(vals - e)))
    assert abs(vals[k] - e) < 1e-10
    assert eigvec_overlap(v, vecs[:, k]) > 1 - 1e-8


def test_size_cap():
    with pytest.raises(SizeCapError):
        monodromy_entry(15, "B", 0.1)
