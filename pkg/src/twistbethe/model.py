"""Bethe equations for twisted XXX/XXZ chains, singular solutions and their classification.

All four families share one polynomial-cleared form.  With ``phi`` the identity
and ``h = i`` (XXX) or ``phi = sinh`` and ``h = eta`` (XXZ), equation ``j`` reads

    phi(l_j + s h)^N prod_{k!=j} phi(l_j - l_k - h)
        = e^{-i beta} phi(l_j - s h)^N prod_{k!=j} phi(l_j - l_k + h)

which is finite at singular candidates, so no 0/0 ever has to be resolved.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _numeric as nm
from .errors import (
    DimensionError,
    GenericityError,
    ModelError,
    NotDecomposableError,
    PoleError,
    UnphysicalError,
    UnsupportedModelError,
)


class Family(str, enum.Enum):
    XXX = "xxx"
    XXZ = "xxz"


def _as_spin(spin) -> Fraction:
    if isinstance(spin, str):
        spin = Fraction(spin)
    s = Fraction(spin).limit_denominator(2)
    if s <= 0 or (2 * s).denominator != 1:
        raise ModelError(f"spin must be a positive half-integer, got {spin}")
    return s


@dataclass(frozen=True)
class ModelSpec:
    """Chain family, spin, size, magnon number, anisotropy, twist and working precision.

    ``digits == 0`` selects machine doubles; otherwise every number produced for
    this spec lives in an mpmath context with that many decimal digits.
    """

    family: Family = Family.XXX
    spin: Fraction = Fraction(1, 2)
    sites: int = 4
    magnons: int = 0
    eta: float | None = None
    beta: float = 0.0
    digits: int = 0
    genericity_order: int = 24
    genericity_tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "spin", _as_spin(self.spin))
        if self.sites < 1:
            raise ModelError("need N >= 1")
        if self.magnons < 0:
            raise ModelError("need M >= 0")
        if self.magnons > self.max_magnons:
            raise ModelError(f"M={self.magnons} exceeds the highest-weight bound {self.max_magnons}")
        if self.family is Family.XXZ:
            if self.eta is None or self.eta == 0:
                raise ModelError("XXZ needs a nonzero anisotropy eta")
            for k in range(1, self.genericity_order + 1):
                if abs(complex(np.exp(k * complex(self.eta))) - 1) <= self.genericity_tol * k:
                    raise GenericityError(f"q = e^eta is (numerically) a root of unity of order {k}")
        elif self.eta is not None:
            raise ModelError("eta is only meaningful for the XXZ family")

    @property
    def N(self) -> int:
        return self.sites

    @property
    def M(self) -> int:
        return self.magnons

    @property
    def max_magnons(self) -> int:
        return math.floor(self.spin * self.sites)

    @property
    def string_length(self) -> int:
        return int(2 * self.spin + 1)

    @property
    def ctx(self):
        return nm.context(self.digits)

    @property
    def detect_tol(self) -> float:
        return nm.detect_tol(self.digits)

    @property
    def solve_tol(self) -> float:
        return nm.solve_tol(self.digits)

    @property
    def unit(self):
        """Rapidity shift ``h``: ``i`` for XXX, ``eta`` for XXZ."""
        ctx = self.ctx
        if self.family is Family.XXX:
            return ctx.mpc(0, 1)
        return ctx.mpc(ctx.mpf(self.eta) if self.digits else self.eta, 0)

    @property
    def twist_phase(self):
        """``e^{-i beta}``."""
        ctx = self.ctx
        return ctx.exp(-ctx.mpc(0, 1) * ctx.mpf(self.beta))

    def phi(self, x):
        return x if self.family is Family.XXX else self.ctx.sinh(x)

    def string_values(self) -> tuple:
        """Exact singular string ``{s h, (s-1) h, ..., -s h}`` (top first)."""
        ctx, h = self.ctx, self.unit
        n = self.string_length
        out = []
        for k in range(n):
            m = self.spin - k
            out.append(ctx.mpc(0, 0) + h * ctx.mpf(m.numerator) / m.denominator)
        return tuple(out)

    def with_beta(self, beta: float) -> "ModelSpec":
        return replace(self, beta=beta)

    def with_digits(self, digits: int) -> "ModelSpec":
        return replace(self, digits=digits)

    def with_magnons(self, magnons: int) -> "ModelSpec":
        return replace(self, magnons=magnons)


def _sort_key(z, quantum=1e-9):
    z = complex(z)
    # exact parts break ties inside a bucket so the order is total
    return (round(z.real / quantum), -z.imag, z.real)


@dataclass(frozen=True)
class RootSet:
    """Ordered multiset of rapidities; solution semantics ignore the order."""

    roots: tuple = ()
    canonical_order: bool = False

    def __post_init__(self):
        roots = tuple(self.roots)
        for r in roots:
            z = complex(r)
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise ValueError(f"non-finite root {r!r}")
        object.__setattr__(self, "roots", roots)

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    def __getitem__(self, k):
        return self.roots[k]

    def canonical(self) -> "RootSet":
        """Sort by real part, then imaginary part descending."""
        if self.canonical_order:
            return self
        return RootSet(tuple(sorted(self.roots, key=_sort_key)), True)

    def as_complex(self) -> np.ndarray:
        return np.array([complex(r) for r in self.roots], dtype=complex)

    def distance(self, other: "RootSet") -> float:
        """Symmetric Hausdorff distance between the two multisets."""
        if len(self) != len(other):
            return math.inf
        if not len(self):
            return 0.0
        a, b = self.as_complex(), other.as_complex()
        d = np.abs(a[:, None] - b[None, :])
        return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def as_roots(roots) -> RootSet:
    return roots if isinstance(roots, RootSet) else RootSet(tuple(roots))


@dataclass(frozen=True)
class SingularDecomposition:
    """Exact string part plus the remaining roots."""

    string_part: tuple
    remainder: RootSet = field(default_factory=RootSet)

    @property
    def roots(self) -> RootSet:
        return RootSet(tuple(self.string_part) + tuple(self.remainder.roots))


class Kind(str, enum.Enum):
    REGULAR = "Regular"
    SINGULAR_PHYSICAL = "SingularPhysical"
    SINGULAR_UNPHYSICAL = "SingularUnphysical"
    NOT_A_SOLUTION = "NotASolution"


@dataclass(frozen=True)
class ClassificationResult:
    kind: Kind
    constraint_value: complex | None = None
    residual_norm: float = 0.0

    @property
    def is_physical(self) -> bool:
        return self.kind in (Kind.REGULAR, Kind.SINGULAR_PHYSICAL)


# ---------------------------------------------------------------------------
# vectorized polynomial systems


class BetheSystem:
    """Polynomial-cleared Bethe system, vectorized over leading batch axes.

    ``sources_p``/``sources_q`` are ``(shift, power)`` pairs giving the
    single-root factors ``prod phi(l + shift)^power`` on each side.
    """

    def __init__(self, spec: ModelSpec, sources_p, sources_q, phase, size: int):
        self.spec = spec
        self.sources_p = tuple(sources_p)
        self.sources_q = tuple(sources_q)
        self.phase = phase
        self.size = size
        self.digits = spec.digits
        self.h = spec.unit
        if spec.family is Family.XXX:
            self._phi = lambda x: x
            self._dphi = lambda x: np.ones_like(x) if self.digits <= 0 else np.full(x.shape, spec.ctx.mpc(1), dtype=object)
        else:
            self._phi = nm.elementwise("sinh", self.digits)
            self._dphi = nm.elementwise("cosh", self.digits)

    @classmethod
    def full(cls, spec: ModelSpec) -> "BetheSystem":
        sh = spec.string_values()[0]
        return cls(spec, [(sh, spec.N)], [(-sh, spec.N)], spec.twist_phase, spec.M)

    @classmethod
    def reduced(cls, spec: ModelSpec) -> "BetheSystem":
        sh = spec.string_values()[0]
        s1h = sh + spec.unit
        return cls(
            spec,
            [(sh, spec.N - 1), (-s1h, 1)],
            [(-sh, spec.N - 1), (s1h, 1)],
            spec.ctx.mpc(1),
            spec.M - spec.string_length,
        )

    def _source(self, lam, sources):
        val = None
        dval = None
        for shift, power in sources:
            f = self._phi(lam + shift)
            fp = f**power
            dfp = power * f ** (power - 1) * self._dphi(lam + shift) if power else 0 * f
            if val is None:
                val, dval = fp, dfp
            else:
                dval = dval * fp + val * dfp
                val = val * fp
        return val, dval

    def _pair_factors(self, lam, sign):
        m = lam.shape[-1]
        d = lam[..., :, None] - lam[..., None, :] + sign * self.h
        f = self._phi(d)
        df = self._dphi(d)
        idx = np.arange(m)
        one = 1.0 if self.digits <= 0 else self.spec.ctx.mpc(1)
        f[..., idx, idx] = one
        df[..., idx, idx] = 0
        return f, df

    def _side(self, lam, sources, sign):
        src, dsrc = self._source(lam, sources)
        f, df = self._pair_factors(lam, sign)
        prod = np.prod(f, axis=-1)
        return src, dsrc, f, df, prod

    def sides(self, lam):
        """Return ``(P, Q)`` with residual ``P - phase * Q``."""
        lam = self._prepare(lam)
        p = self._side(lam, self.sources_p, -1)
        q = self._side(lam, self.sources_q, +1)
        return p[0] * p[4], q[0] * q[4]

    def residual(self, lam):
        p, q = self.sides(lam)
        return p - self.phase * q

    def scaled_norm(self, lam):
        """Max over equations of ``|P - phase Q| / max(1, |P|, |Q|)``."""
        p, q = self.sides(lam)
        r = p - self.phase * q
        if self.digits <= 0:
            scale = np.maximum(1.0, np.maximum(np.abs(p), np.abs(q)))
            out = np.abs(r) / scale
        else:
            out = np.array([abs(a) / max(1, abs(b), abs(c)) for a, b, c in zip(r.ravel(), p.ravel(), q.ravel())], dtype=float).reshape(r.shape)
        if out.shape[-1] == 0:
            return np.zeros(out.shape[:-1])
        return out.max(axis=-1).astype(float)

    def _jac_side(self, lam, sources, sign):
        src, dsrc, f, df, prod = self._side(lam, sources, sign)
        m = lam.shape[-1]
        excl = np.empty(f.shape, dtype=f.dtype)
        for col in range(m):
            g = f.copy()
            g[..., :, col] = 1
            excl[..., :, col] = np.prod(g, axis=-1)
        jac = -df * excl * src[..., :, None]
        diag = dsrc * prod + src * np.sum(df * excl, axis=-1)
        idx = np.arange(m)
        jac[..., idx, idx] = diag
        return src * prod, jac

    def residual_and_jacobian(self, lam):
        lam = self._prepare(lam)
        p, jp = self._jac_side(lam, self.sources_p, -1)
        q, jq = self._jac_side(lam, self.sources_q, +1)
        return p - self.phase * q, jp - self.phase * jq

    def _prepare(self, lam):
        if self.digits <= 0:
            return np.asarray(lam, dtype=complex)
        arr = np.asarray(lam, dtype=object)
        conv = np.frompyfunc(self.spec.ctx.convert, 1, 1)
        return conv(arr) if arr.size else arr


def _check_dims(spec: ModelSpec, roots: RootSet, expected: int | None = None):
    expected = spec.M if expected is None else expected
    if len(roots) != expected:
        raise DimensionError(f"expected {expected} roots, got {len(roots)}")


# ---------------------------------------------------------------------------
# operations


def bethe_residual(spec: ModelSpec, roots) -> list:
    """LHS - RHS of each polynomial-cleared Bethe equation, in root order."""
    roots = as_roots(roots)
    _check_dims(spec, roots)
    if not len(roots):
        return []
    return list(BetheSystem.full(spec).residual(nm.array(roots, spec.digits)))


def residual_norm(spec: ModelSpec, roots) -> float:
    """Scaled max-norm of :func:`bethe_residual` (0 for ``M = 0``)."""
    roots = as_roots(roots)
    _check_dims(spec, roots)
    if not len(roots):
        return 0.0
    return float(BetheSystem.full(spec).scaled_norm(nm.array(roots, spec.digits)))


def _near(a, b, tol) -> bool:
    return abs(complex(a) - complex(b)) < tol


def detect_singular(spec: ModelSpec, roots) -> SingularDecomposition | None:
    """Split off the exact string ``{s h, ..., -s h}`` if every member is present.

    Returns ``None`` when no string value appears at all.  A partial string
    raises :class:`NotDecomposableError` carrying which members were found.
    """
    roots = as_roots(roots)
    _check_dims(spec, roots)
    tol = spec.detect_tol
    values = spec.string_values()
    remaining = list(roots.roots)
    present, missing = [], []
    for v in values:
        hits = [k for k, r in enumerate(remaining) if _near(r, v, tol)]
        if hits:
            present.append(v)
            remaining.pop(hits[0])
        else:
            missing.append(v)
    if not present:
        return None
    if missing:
        raise NotDecomposableError(
            f"partial string: {len(present)} of {len(values)} members present", present, missing
        )
    for r in remaining:
        if any(_near(r, v, tol) for v in values):
            raise NotDecomposableError("remainder repeats a string value", present, ())
    for a in range(len(remaining)):
        for b in range(a + 1, len(remaining)):
            if _near(remaining[a], remaining[b], tol):
                raise NotDecomposableError("remainder roots are not distinct", present, ())
    return SingularDecomposition(values, RootSet(tuple(remaining)))


def _ratio_factor(spec: ModelSpec, lam):
    """``phi(l + s h) / phi(l - s h)``, guarding the pole at ``l = s h``."""
    ctx = spec.ctx
    sh = spec.string_values()[0]
    den = spec.phi(ctx.convert(lam) - sh)
    if abs(den) < spec.detect_tol:
        raise PoleError(f"root {lam} sits on the pole {sh}")
    return spec.phi(ctx.convert(lam) + sh) / den


def physical_constraint(spec: ModelSpec, dec: SingularDecomposition) -> tuple:
    """``[(-1)^{2s} prod_rem phi(l + s h)/phi(l - s h)]^N`` and whether it equals 1."""
    ctx = spec.ctx
    sign = (-1) ** int(2 * spec.spin)
    tol = spec.detect_tol
    for lam in dec.remainder:
        for v in spec.string_values():
            if _near(lam, v, tol):
                raise PoleError(f"remainder root {lam} coincides with string value {v}")
    if not len(dec.remainder):
        value = ctx.mpc(sign**spec.N)
    else:
        prod = ctx.mpc(sign)
        for lam in dec.remainder:
            prod *= _ratio_factor(spec, lam)
        value = prod**spec.N
    return value, abs(value - 1) < tol


def reduced_residual(spec: ModelSpec, remainder) -> list:
    """Residuals of the equations left for the remainder roots once the string is fixed (beta -> 0)."""
    remainder = as_roots(remainder)
    _check_dims(spec, remainder, spec.M - spec.string_length)
    if not len(remainder):
        return []
    tol = spec.detect_tol
    poles = list(spec.string_values())
    s1 = poles[0] + spec.unit
    poles += [s1, -s1]
    for lam in remainder:
        for p in poles:
            if _near(lam, p, tol):
                raise PoleError(f"remainder root {lam} sits on excluded value {p}")
    return list(BetheSystem.reduced(spec).residual(nm.array(remainder, spec.digits)))


def reduced_norm(spec: ModelSpec, remainder) -> float:
    remainder = as_roots(remainder)
    if not len(remainder):
        return 0.0
    reduced_residual(spec, remainder)
    return float(BetheSystem.reduced(spec).scaled_norm(nm.array(remainder, spec.digits)))


def _distinct(roots: RootSet, tol: float) -> bool:
    z = roots.as_complex()
    if len(z) < 2:
        return True
    d = np.abs(z[:, None] - z[None, :]) + np.eye(len(z)) * 1e300
    return bool(d.min() >= tol)


def classify(spec: ModelSpec, roots, tol: float | None = None) -> ClassificationResult:
    """Regular / physical singular / unphysical singular / not a solution."""
    roots = as_roots(roots)
    tol = spec.solve_tol if tol is None else tol
    if len(roots) != spec.M:
        return ClassificationResult(Kind.NOT_A_SOLUTION, None, math.inf)
    try:
        dec = detect_singular(spec, roots)
    except NotDecomposableError:
        return ClassificationResult(Kind.NOT_A_SOLUTION, None, residual_norm(spec, roots))
    if dec is None:
        r = residual_norm(spec, roots)
        ok = r < tol and _distinct(roots, spec.detect_tol)
        return ClassificationResult(Kind.REGULAR if ok else Kind.NOT_A_SOLUTION, None, r)
    try:
        value, physical = physical_constraint(spec, dec)
        r = reduced_norm(spec, dec.remainder) if spec.beta == 0 else residual_norm(spec, roots)
    except PoleError:
        return ClassificationResult(Kind.NOT_A_SOLUTION, None, math.inf)
    if r >= tol:
        return ClassificationResult(Kind.NOT_A_SOLUTION, value, r)
    if spec.beta != 0:
        # an exact string survives any twist undeformed, and then it is never physical
        return ClassificationResult(Kind.SINGULAR_UNPHYSICAL, value, r)
    kind = Kind.SINGULAR_PHYSICAL if physical else Kind.SINGULAR_UNPHYSICAL
    return ClassificationResult(kind, value, r)


def product_identity(spec: ModelSpec, roots):
    """``[prod_j phi(l_j + s h)/phi(l_j - s h)]^N e^{i M beta}``; 1 on every solution."""
    roots = as_roots(roots)
    _check_dims(spec, roots)
    ctx = spec.ctx
    prod = ctx.mpc(1)
    for lam in roots:
        prod *= _ratio_factor(spec, lam)
    return prod**spec.N / spec.twist_phase**spec.M


def _require_xxx_half(spec: ModelSpec):
    if spec.family is not Family.XXX or spec.spin != Fraction(1, 2):
        raise UnsupportedModelError("energies are only defined for the spin-1/2 XXX chain")


def magnon_energy(lam):
    # factored: lam^2 + 1/4 cancels badly for lam close to +-i/2
    half = 0.5j if isinstance(lam, (complex, float, int, np.number)) else lam.context.mpc(0, 0.5)
    return -0.5 / ((lam + half) * (lam - half))


def energy(spec: ModelSpec, roots: RootSet | SingularDecomposition | Sequence):
    """Energy of the eigenstate labelled by ``roots`` for H = 1/4 sum (s.s - 1).

    A physical singular pair ``+-i/2`` contributes its regularized value -1.
    """
    _require_xxx_half(spec)
    if isinstance(roots, SingularDecomposition):
        dec = roots
    else:
        roots = as_roots(roots)
        _check_dims(spec, roots)
        dec = detect_singular(spec, roots)
    ctx = spec.ctx
    if dec is None:
        return sum((magnon_energy(ctx.convert(r)) for r in roots), ctx.mpc(0)).real
    if spec.beta != 0:
        raise UnphysicalError("an exact singular pair at nonzero twist has no eigenstate")
    _, physical = physical_constraint(spec, dec)
    if not physical:
        raise UnphysicalError("singular solution violates the physicality constraint")
    rest = sum((magnon_energy(ctx.convert(r)) for r in dec.remainder), ctx.mpc(0))
    return (rest - 1).real


def formal_singular_energy(spec: ModelSpec, dec: SingularDecomposition):
    """Regularized energy assigned to a singular candidate, physical or not."""
    _require_xxx_half(spec)
    ctx = spec.ctx
    return (sum((magnon_energy(ctx.convert(r)) for r in dec.remainder), ctx.mpc(0)) - 1).real
