"""Exact diagonalization of the (twisted) periodic spin-1/2 XXX chain.

Basis states are bitmasks: bit ``n`` holds the spin at site ``n + 1`` and a set
bit means spin down.  The all-up reference state is index 0 and the magnon
number of a state is its popcount.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DimensionError, SizeCapError

SIZE_CAP = 14
DENSE_LIMIT = 4096


def _check_size(n: int, cap: int | None = None):
    cap = SIZE_CAP if cap is None else cap
    if n < 1:
        raise DimensionError("need at least one site")
    if n > cap:
        raise SizeCapError(f"N = {n} exceeds the size cap {cap}")


def popcount(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    out = np.zeros_like(x)
    while np.any(x):
        out += x & 1
        x = x >> 1
    return out


def sector_basis(n: int, m: int) -> np.ndarray:
    """Sorted bitmasks with exactly ``m`` down spins."""
    states = np.arange(1 << n, dtype=np.int64)
    return states[popcount(states) == m]


def _bonds(n: int, beta: float):
    """Yield ``(a, b, phase)``: the flip term is 1/2 (phase s_a^+ s_b^- + h.c.)."""
    for a in range(n - 1):
        yield a, a + 1, 1.0
    if n >= 2:
        # boundary bond: substituting the rotated sigma_{N+1} gives
        # sigma_{N+1}^+ = e^{i beta} sigma_1^+
        yield n - 1, 0, np.exp(-1j * beta)


def _build(n: int, beta: float, states: np.ndarray):
    """Sparse H on the span of ``states`` (sorted bitmasks closed under flips)."""
    dim = len(states)
    rows, cols, vals = [], [], []
    diag = np.zeros(dim, dtype=complex)
    for a, b, phase in _bonds(n, beta):
        sa = (states >> a) & 1
        sb = (states >> b) & 1
        anti = np.nonzero(sa != sb)[0]
        diag[anti] -= 0.5
        flipped = states[anti] ^ ((1 << a) | (1 << b))
        # s_a^+ s_b^- raises a (down -> up) and lowers b; it acts where a is down
        amp = np.where(sa[anti] == 1, 0.5 * phase, 0.5 * np.conj(phase))
        rows.append(np.searchsorted(states, flipped))
        cols.append(anti)
        vals.append(amp)
    if rows:
        mat = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))
    else:
        mat = sp.coo_matrix((dim, dim), dtype=complex)
    return (mat.tocsr() + sp.diags(diag)).tocsr()


def build_hamiltonian(n: int, beta: float = 0.0, cap: int | None = None) -> sp.csr_matrix:
    """H = 1/4 sum_n (sigma_n . sigma_{n+1} - 1) with the twisted boundary bond.

    Returned as a sparse ``2^N x 2^N`` matrix in the bitmask basis.
    """
    _check_size(n, cap)
    if n < 2:
        raise DimensionError("the chain needs at least two sites")
    return _build(n, beta, np.arange(1 << n, dtype=np.int64))


def sector_hamiltonian(n: int, m: int, beta: float = 0.0, cap: int | None = None):
    """Block of H on the ``m``-magnon sector, with the sector's basis states."""
    _check_size(n, cap)
    if not 0 <= m <= n:
        raise DimensionError(f"magnon number {m} outside 0..{n}")
    states = sector_basis(n, m)
    return _build(n, beta, states), states


def sector_spectrum(n: int, m: int, beta: float = 0.0, vectors: bool = False, cap: int | None = None, k: int = 6):
    """Sorted eigenvalues of H in the ``m``-magnon sector (optionally with eigenvectors).

    Eigenvectors are columns embedded in the full ``2^N`` space.  Sectors larger
    than :data:`DENSE_LIMIT` only return the ``k`` lowest levels.
    """
    h, states = sector_hamiltonian(n, m, beta, cap)
    dim = len(states)
    if dim <= DENSE_LIMIT:
        vals, vecs = np.linalg.eigh(h.toarray())
    else:
        vals, vecs = spla.eigsh(h, k=min(k, dim - 2), which="SA")
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    if not vectors:
        return vals
    full = np.zeros((1 << n, vecs.shape[1]), dtype=complex)
    full[states] = vecs
    return vals, full


# ---------------------------------------------------------------------------
# spin operators in the same basis


def site_operator(n: int, site: int, which: str) -> sp.csr_matrix:
    """``which`` in {"+", "-", "z", "x", "y"} acting on ``site`` (1-based)."""
    if not 1 <= site <= n:
        raise DimensionError(f"site {site} outside 1..{n}")
    states = np.arange(1 << n, dtype=np.int64)
    bit = 1 << (site - 1)
    down = (states & bit) != 0
    dim = 1 << n
    if which == "z":
        return sp.diags(np.where(down, -1.0, 1.0).astype(complex)).tocsr()
    if which == "+":
        src = states[down]
        return sp.csr_matrix((np.ones(len(src), dtype=complex), (src ^ bit, src)), shape=(dim, dim))
    if which == "-":
        src = states[~down]
        return sp.csr_matrix((np.ones(len(src), dtype=complex), (src ^ bit, src)), shape=(dim, dim))
    plus, minus = site_operator(n, site, "+"), site_operator(n, site, "-")
    if which == "x":
        return (plus + minus).tocsr()
    if which == "y":
        return (-1j * (plus - minus)).tocsr()
    raise ValueError(f"unknown operator {which!r}")


def total_spin(n: int, axis: str) -> sp.csr_matrix:
    """Total ``S^axis = 1/2 sum sigma^axis`` (axis "+" / "-" gives sum sigma^+/-)."""
    scale = 1.0 if axis in "+-" else 0.5
    out = sp.csr_matrix((1 << n, 1 << n), dtype=complex)
    for site in range(1, n + 1):
        out = out + scale * site_operator(n, site, axis)
    return out


def reference_state(n: int) -> np.ndarray:
    v = np.zeros(1 << n, dtype=complex)
    v[0] = 1
    return v


# ---------------------------------------------------------------------------
# matching Bethe predictions against spectra


def eigvec_overlap(v, w) -> float:
    """``|<v, w>| / (|v| |w|)``."""
    v = np.asarray(v, dtype=complex).ravel()
    w = np.asarray(w, dtype=complex).ravel()
    if v.shape != w.shape:
        raise DimensionError("vectors live in different spaces")
    nv, nw = np.linalg.norm(v), np.linalg.norm(w)
    if nv == 0 or nw == 0:
        raise ValueError("zero vector has no direction")
    return float(min(1.0, abs(np.vdot(v, w)) / (nv * nw)))


def eigenspace_overlap(v, basis) -> float:
    """Norm of the projection of unit ``v`` onto the span of the columns of ``basis``."""
    v = np.asarray(v, dtype=complex).ravel()
    q, _ = np.linalg.qr(np.asarray(basis, dtype=complex).reshape(len(v), -1))
    nv = np.linalg.norm(v)
    if nv == 0:
        raise ValueError("zero vector has no direction")
    return float(min(1.0, np.linalg.norm(q.conj().T @ v) / nv))


@dataclass
class SpectrumReport:
    sector: int
    ed_eigenvalues: list
    bethe_matches: list = field(default_factory=list)  # (roots, energy, ed index, |dE|)
    unmatched_ed: list = field(default_factory=list)
    unmatched_bethe: list = field(default_factory=list)  # (roots, energy)
    ambiguous: list = field(default_factory=list)  # (roots, energy, candidate indices)

    @property
    def complete(self) -> bool:
        return not self.unmatched_ed and not self.unmatched_bethe and not self.ambiguous


def match_spectrum(n: int, m: int, beta: float, bethe, tol: float = 1e-8, eigenvalues=None) -> SpectrumReport:
    """Match Bethe energies against the ``m``-magnon ED levels.

    ``bethe`` holds ``(roots, energy, magnons)`` triples.  At zero twist a state
    with ``magnons <= m`` reaches sector ``m`` through its SU(2) descendants, so
    it claims one level there; at nonzero twist only ``magnons == m`` counts.
    Matching is greedy by distance.  An energy with several free levels inside
    ``tol`` is fine when those levels are exactly degenerate with each other;
    if the candidates split into distinguishable groups the match is flagged.
    """
    vals = np.sort(np.asarray(sector_spectrum(n, m, beta) if eigenvalues is None else eigenvalues, dtype=float))
    report = SpectrumReport(m, [float(x) for x in vals])
    free = np.ones(len(vals), dtype=bool)
    items = [(r, float(e), mm) for r, e, mm in bethe if (mm <= m if beta == 0 else mm == m)]
    items.sort(key=lambda t: t[1])
    for roots, e, _ in items:
        dist = np.abs(vals - e)
        cand = np.nonzero(free & (dist < tol))[0]
        if len(cand) == 0:
            report.unmatched_bethe.append((roots, e))
            continue
        if np.ptp(vals[cand]) > tol:
            report.ambiguous.append((roots, e, [int(c) for c in cand]))
        best = int(cand[np.argmin(dist[cand])])
        free[best] = False
        report.bethe_matches.append((roots, e, best, float(dist[best])))
    report.unmatched_ed = [int(k) for k in np.nonzero(free)[0]]
    return report


def expected_sector_dimension(n: int, m: int) -> int:
    return comb(n, m)
