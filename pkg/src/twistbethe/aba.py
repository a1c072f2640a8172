"""Algebraic Bethe ansatz for the spin-1/2 XXX chain.

The Lax operator on auxiliary space ``a`` and site ``n`` is
``L(l) = (l - i/2) + i P``.  In auxiliary 2x2 block form (rows/columns are the
auxiliary up/down states) its site operators are

    L[0][0] = diag(l + i/2, l - i/2)      L[0][1] = i s^-
    L[1][0] = i s^+                       L[1][1] = diag(l - i/2, l + i/2)

and the monodromy ``T = L_N ... L_1 = [[A, B], [C, D]]``.  Operators use the
bitmask basis of :mod:`twistbethe.ed` (site ``n`` is bit ``n - 1``, set = down).

Two independent routes are provided: explicit operators built by the block
recursion ``T_n[a][b] = sum_c L_n[a][c] (x) T_{n-1}[c][b]`` and a matrix-free
action on vectors that carries the auxiliary space along as an extra index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import _numeric as nm
from .errors import DimensionError, PoleError, PrecisionError, SizeCapError
from .model import ModelSpec, RootSet, as_roots
from .twist import evaluate_series, expand_series, richardson_limit

SIZE_CAP = 14
DENSE_CAP = 8
LABELS = {"A": (0, 0), "B": (0, 1), "C": (1, 0), "D": (1, 1)}


def _check(n: int, cap: int | None):
    cap = SIZE_CAP if cap is None else cap
    if n < 1:
        raise DimensionError("need at least one site")
    if n > cap:
        raise SizeCapError(f"N = {n} exceeds the size cap {cap}")


def _half_i(digits: int):
    return nm.context(digits).mpc(0, 0.5)


def _lax_blocks(lam, digits: int):
    """Site operators ``L[a][b]`` as 2x2 arrays."""
    ctx = nm.context(digits)
    lam = ctx.convert(lam)
    hi = _half_i(digits)
    one_i = ctx.mpc(0, 1)
    zero = ctx.mpc(0)
    dt = complex if digits <= 0 else object
    p, m = lam + hi, lam - hi
    return [
        [np.array([[p, zero], [zero, m]], dtype=dt), np.array([[zero, zero], [one_i, zero]], dtype=dt)],
        [np.array([[zero, one_i], [zero, zero]], dtype=dt), np.array([[m, zero], [zero, p]], dtype=dt)],
    ]


def _kron(x, y, sparse: bool):
    if sparse:
        return sp.kron(sp.csr_matrix(x), y, format="csr")
    # block form works for object arrays as well
    return np.block([[x[0, 0] * y, x[0, 1] * y], [x[1, 0] * y, x[1, 1] * y]])


def _monodromy(n: int, lam, digits: int, derivative: bool = False):
    """All four entries (and optionally their ``d/dl``) as 2^N operators."""
    sparse = digits <= 0 and n > DENSE_CAP
    if digits > 0 and n > DENSE_CAP + 2:
        raise SizeCapError(f"multiprecision operators are dense; N = {n} is too large")
    lax = _lax_blocks(lam, digits)
    t = [[lax[a][b] for b in range(2)] for a in range(2)]
    eye2 = np.eye(2, dtype=complex if digits <= 0 else object)
    if digits > 0:
        eye2 = np.array([[nm.context(digits).mpc(1), 0], [0, nm.context(digits).mpc(1)]], dtype=object)
    dt = [[eye2 if a == b else 0 * eye2 for b in range(2)] for a in range(2)]
    if sparse:
        t = [[sp.csr_matrix(x) for x in row] for row in t]
        dt = [[sp.csr_matrix(x) for x in row] for row in dt]
    for _ in range(2, n + 1):
        new = [[None, None], [None, None]]
        dnew = [[None, None], [None, None]]
        for a in range(2):
            for b in range(2):
                new[a][b] = sum(_kron(lax[a][c], t[c][b], sparse) for c in range(2))
                if derivative:
                    # dL[a][c] = delta_ac * identity on the new site
                    dnew[a][b] = _kron(eye2, t[a][b], sparse) + sum(
                        _kron(lax[a][c], dt[c][b], sparse) for c in range(2)
                    )
        t = new
        if derivative:
            dt = dnew
    return (t, dt) if derivative else t


def monodromy_entry(n: int, label: str, lam, digits: int = 0, cap: int | None = None):
    """Operator ``A``, ``B``, ``C`` or ``D`` of the monodromy matrix at ``lam``.

    Dense for ``N <= 8`` (numpy; object dtype at ``digits > 0``), sparse CSR above.
    """
    _check(n, cap)
    a, b = LABELS[label]
    return _monodromy(n, lam, digits)[a][b]


def _twist_phase(beta, digits: int):
    ctx = nm.context(digits)
    return ctx.exp(-ctx.mpc(0, 1) * ctx.convert(beta))


def transfer_matrix(n: int, lam, beta=0.0, digits: int = 0, cap: int | None = None):
    """Twisted transfer matrix ``t_beta(l) = A(l) + e^{-i beta} D(l)``."""
    _check(n, cap)
    t = _monodromy(n, lam, digits)
    return t[0][0] + t[1][1] * _twist_phase(beta, digits)


def hamiltonian_from_transfer(n: int, beta: float = 0.0, cap: int | None = None) -> np.ndarray:
    """``H = (i/2) t'(i/2) t(i/2)^{-1} - N/2`` with the exact derivative of the monodromy."""
    _check(n, cap)
    if n > DENSE_CAP + 2:
        raise SizeCapError("the transfer-matrix Hamiltonian is built densely")
    t, dt = _monodromy(n, 0.5j, 0, derivative=True)
    phase = np.exp(-1j * beta)
    tm = _dense(t[0][0] + phase * t[1][1])
    dtm = _dense(dt[0][0] + phase * dt[1][1])
    # H1 = (i/2) dt t^{-1}  <=>  t^T H1^T = (i/2) dt^T
    h1 = np.linalg.solve(tm.T, (0.5j * dtm).T).T
    return h1 - n / 2 * np.eye(1 << n)


def _dense(x):
    return x.toarray() if sp.issparse(x) else np.asarray(x)


# ---------------------------------------------------------------------------
# matrix-free action on vectors


def _apply_lax(psi, site: int, lam, digits: int):
    """Apply ``L_site(lam)`` to ``psi`` of shape ``(2, 2^N)`` (auxiliary first)."""
    n_states = psi.shape[1]
    low = 1 << (site - 1)
    high = n_states // (2 * low)
    hi = _half_i(digits)
    one_i = nm.context(digits).mpc(0, 1)
    p, m = lam + hi, lam - hi
    v = psi.reshape(2, high, 2, low)
    out = np.empty_like(v)
    out[0, :, 0] = p * v[0, :, 0]
    out[0, :, 1] = m * v[0, :, 1] + one_i * v[1, :, 0]
    out[1, :, 0] = one_i * v[0, :, 1] + m * v[1, :, 0]
    out[1, :, 1] = p * v[1, :, 1]
    return out.reshape(2, n_states)


def apply_monodromy(n: int, label: str, lam, vec, digits: int = 0):
    """``T[a][b](lam) @ vec`` without building the operator (O(N 2^N))."""
    a, b = LABELS[label]
    ctx = nm.context(digits)
    lam = ctx.convert(lam)
    vec = _as_vector(vec, digits)
    if vec.shape[0] != 1 << n:
        raise DimensionError(f"vector of length {vec.shape[0]} is not a {n}-site state")
    psi = np.zeros((2, vec.shape[0]), dtype=vec.dtype)
    if digits > 0:
        psi[:] = ctx.mpc(0)
    psi[b] = vec
    for site in range(1, n + 1):
        psi = _apply_lax(psi, site, lam, digits)
    return psi[a]


def apply_transfer(n: int, lam, vec, beta=0.0, digits: int = 0):
    a = apply_monodromy(n, "A", lam, vec, digits)
    d = apply_monodromy(n, "D", lam, vec, digits)
    return a + d * _twist_phase(beta, digits)


def _as_vector(vec, digits: int):
    if digits <= 0:
        return np.asarray(vec, dtype=complex)
    ctx = nm.context(digits)
    return np.array([ctx.convert(x) for x in np.asarray(vec).ravel()], dtype=object)


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class StateVector:
    """Amplitudes in the bitmask basis, confined to one magnon sector."""

    amplitudes: np.ndarray
    magnon_number: int
    sites: int = field(default=0)

    def __post_init__(self):
        amps = self.amplitudes
        n = int(len(amps)).bit_length() - 1
        if 1 << n != len(amps):
            raise DimensionError("state length must be a power of two")
        object.__setattr__(self, "sites", n)
        mags = np.array([bin(k).count("1") for k in range(len(amps))])
        outside = np.array([abs(x) for x in amps], dtype=float)[mags != self.magnon_number]
        scale = max(1e-300, float(np.max(np.abs(self.as_complex()))) if len(amps) else 1.0)
        if outside.size and outside.max() > 1e-9 * scale:
            raise DimensionError(f"amplitudes leak outside the {self.magnon_number}-magnon sector")

    def as_complex(self) -> np.ndarray:
        return np.array([complex(x) for x in self.amplitudes], dtype=complex)

    def norm(self):
        return float(np.linalg.norm(self.as_complex()))

    def normalized(self) -> "StateVector":
        """Unit norm, first non-negligible amplitude real and positive."""
        v = self.as_complex()
        nv = np.linalg.norm(v)
        if nv == 0:
            raise ValueError("cannot normalize the zero vector")
        v = v / nv
        k = int(np.nonzero(np.abs(v) > 1e-12)[0][0])
        v = v * (abs(v[k]) / v[k])
        return StateVector(v, self.magnon_number)


def reference_vector(n: int, digits: int = 0):
    ctx = nm.context(digits)
    if digits <= 0:
        v = np.zeros(1 << n, dtype=complex)
    else:
        v = np.array([ctx.mpc(0)] * (1 << n), dtype=object)
    v[0] = ctx.mpc(1)
    return v


def _raw_bethe_vector(n: int, roots, digits: int):
    v = reference_vector(n, digits)
    for lam in roots:
        v = apply_monodromy(n, "B", lam, v, digits)
    return v


def bethe_vector(n: int, roots, digits: int = 0, allow_singular: bool = False, cap: int | None = None) -> StateVector:
    """``prod_j B(l_j) |0>``.

    Roots at ``+-i/2`` are refused (the product is null there); use
    :func:`singular_limit_vector`.  ``allow_singular`` bypasses the guard for
    tests that want to look at the null vector itself.
    """
    _check(n, cap)
    roots = as_roots(roots)
    if not allow_singular:
        tol = nm.detect_tol(digits)
        for lam in roots:
            if min(abs(complex(lam) - 0.5j), abs(complex(lam) + 0.5j)) < tol:
                raise PoleError("root at +-i/2: the Bethe vector is null there, use singular_limit_vector")
    return StateVector(_raw_bethe_vector(n, roots, digits), len(roots))


# ---------------------------------------------------------------------------
# checks


@dataclass
class EigenCheckReport:
    points: list
    eigenvalues: list
    residuals: list

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0

    def passed(self, tol: float = 1e-9) -> bool:
        return self.max_residual < tol


def transfer_eigenvalue_check(n: int, roots, beta: float, test_points, digits: int = 0) -> EigenCheckReport:
    """Per test point ``mu``: ``|t_beta(mu) v - Lambda v| / |v|`` with ``Lambda`` the Rayleigh quotient."""
    v = bethe_vector(n, roots, digits).amplitudes
    vc = np.array([complex(x) for x in v])
    nv2 = np.vdot(vc, vc).real
    report = EigenCheckReport([], [], [])
    for mu in test_points:
        w = apply_transfer(n, mu, v, beta, digits)
        wc = np.array([complex(x) for x in w])
        lam = np.vdot(vc, wc) / nv2
        report.points.append(complex(mu))
        report.eigenvalues.append(complex(lam))
        report.residuals.append(float(np.linalg.norm(wc - lam * vc) / np.sqrt(nv2)))
    return report


def transfer_eigenvalue(n: int, roots, mu, beta: float = 0.0):
    """Eigenvalue of ``t_beta(mu)`` predicted by the Bethe roots."""
    mu = complex(mu)
    a = (mu + 0.5j) ** n
    d = (mu - 0.5j) ** n
    for lam in as_roots(roots):
        lam = complex(lam)
        a *= (mu - lam - 1j) / (mu - lam)
        d *= (mu - lam + 1j) / (mu - lam)
    return a + np.exp(-1j * beta) * d


# ---------------------------------------------------------------------------
# the renormalized singular limit


def limit_digits(n: int) -> int:
    """Working digits for the ``beta^{-N}`` limit: the division eats about ``N`` digits per decade of ``beta``."""
    return 40 + 4 * n


@dataclass
class LimitReport:
    vector: StateVector
    raw: np.ndarray
    error_estimate: float
    betas: list


def singular_limit_vector(spec: ModelSpec, series, beta0: float = 1e-2, levels: int = 10, tol: float = 1e-12, report: bool = False):
    """``lim_{beta->0} beta^{-N} prod_j B(l_j(beta)) |0>`` along the twist series.

    The product is evaluated on ``beta0 / 2^k`` and extrapolated to zero by
    Neville's scheme, componentwise.  The series is re-expanded at
    :func:`limit_digits` if it was built at lower precision.  Returns the unit
    vector with its first nonzero amplitude real positive.
    """
    n = spec.N
    _check(n, None)
    if series.order < n:
        raise ValueError(f"series order {series.order} is below N = {n}")
    digits = limit_digits(n)
    if series.spec.digits < digits:
        series = expand_series(series.spec.with_digits(digits), series.base, series.order)
    ctx = series.spec.ctx
    betas = [ctx.mpf(beta0) / 2**k for k in range(levels)]
    samples = []
    for b in betas:
        v = _raw_bethe_vector(n, evaluate_series(series, b).roots, digits)
        samples.append(v / b**n)
    mags = len(series.zeroth)
    limit = np.empty(1 << n, dtype=object)
    err = 0.0
    for k in range(1 << n):
        limit[k], e = richardson_limit(betas, [s[k] for s in samples], ctx)
        err = max(err, e)
    scale = max(abs(x) for x in limit)
    if scale == 0:
        raise PrecisionError("the extrapolated limit vanished")
    rel = err / float(scale)
    if rel > tol:
        raise PrecisionError(f"extrapolation stages disagree (relative {rel:.2e})")
    vec = StateVector(limit, mags).normalized()
    if report:
        return LimitReport(vec, limit, rel, [float(b) for b in betas])
    return vec
