"""Twist deformation of physical singular solutions.

For spin 1/2 a physical singular solution ``{h/2, -h/2, mu_3, ...}`` moves with
the twist as

    l_2 = -h/2 + beta tau(beta)
    l_1 = +h/2 + beta tau(beta) + beta^N u(beta)
    mu_k = mu_k^0 + sum_l mu_k^(l) beta^l

so the pair shares its shift through order ``N - 1`` and ``l_1 - l_2 - h``
vanishes like ``beta^N``.  Plugging this form into the Bethe equations,
the pair equations degenerate.  The missing information comes from the
product of all equations ``P = [prod phi(l+h/2)/phi(l-h/2)]^N e^{iM beta} - 1``.
Stage ``m`` solves the order ``m + 1`` parts of ``P`` and of the remainder
equations for ``(tau_m, mu^(m+1))``.  It then solves the first pair equation,
divided by ``beta^N``, at order ``m`` for ``u_m``.  Every order is affine in
its unknowns, so each stage is one small linear solve.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _numeric as nm
from ._series import Series
from .errors import (
    ConvergenceError,
    InconsistentSystemError,
    ModelError,
    PathTrackingError,
    PrecisionError,
    SingularJacobianError,
    UnsupportedModelError,
)
from .model import (
    BetheSystem,
    Family,
    ModelSpec,
    RootSet,
    SingularDecomposition,
    as_roots,
    physical_constraint,
    product_identity,
    reduced_norm,
)
from .solver import SolveOptions, _mp_newton, newton_solve

SERIES_DIGITS = 40


@dataclass(frozen=True)
class TwistSeries:
    """``coefficients[j][l - 1]`` is the ``beta^l`` coefficient of root ``j``.

    Root order: the two string roots (top first), then the remainder.
    """

    spec: ModelSpec
    base: SingularDecomposition
    coefficients: tuple
    order: int

    @property
    def zeroth(self) -> tuple:
        return tuple(self.base.string_part) + tuple(self.base.remainder.roots)

    def coefficient(self, j: int, l: int):
        return self.zeroth[j] if l == 0 else self.coefficients[j][l - 1]

    def truncated(self, order: int) -> "TwistSeries":
        if not 1 <= order <= self.order:
            raise ValueError(f"order must lie in 1..{self.order}")
        return TwistSeries(self.spec, self.base, tuple(c[:order] for c in self.coefficients), order)


@dataclass(frozen=True)
class EpsilonReg:
    """Shift of the singular pair by ``epsilon``; ``c`` multiplies ``epsilon^N`` on the top root."""

    epsilon: float
    c: complex = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


# ---------------------------------------------------------------------------
# the order-by-order solver


def _require_half(spec: ModelSpec):
    if spec.spin != Fraction(1, 2):
        raise UnsupportedModelError("the twist series is implemented for spin 1/2 only")


def _series_spec(spec: ModelSpec) -> ModelSpec:
    return spec if spec.digits > 0 else spec.with_digits(SERIES_DIGITS)


class _Expansion:
    """State of the order-by-order solve for one decomposition."""

    def __init__(self, spec: ModelSpec, dec: SingularDecomposition, order: int):
        self.spec = spec
        self.ctx = spec.ctx
        self.n = spec.N
        self.K = order + 1
        self.h = spec.unit
        self.mu0 = [self.ctx.convert(v) for v in dec.remainder.roots]
        self.r = len(self.mu0)
        self.tau = [self.ctx.mpc(0)] * (order + 1)
        self.u = [self.ctx.mpc(0)] * (order + 1)
        self.mu = [[self.ctx.mpc(0)] * (order + 2) for _ in range(self.r)]
        for k in range(self.r):
            self.mu[k][0] = self.mu0[k]

    # -- series building blocks
    def _phi(self, s: Series) -> Series:
        return s if self.spec.family is Family.XXX else s.sinh()

    def _phi_over(self, y: Series) -> Series:
        """``phi(x y) / x`` for the expansion variable ``x``."""
        if self.spec.family is Family.XXX:
            return y
        return y * y.shift_up(1).sinhc()

    def _roots(self):
        ctx, K = self.ctx, self.K
        tau = Series(self.tau, ctx, K)
        u = Series(self.u, ctx, K)
        shift = tau.shift_up(1)
        l2 = shift + (-self.h / 2)
        l1 = shift + u.shift_up(self.n) + self.h / 2
        mus = [Series(m, ctx, K) for m in self.mu]
        return tau, u, l1, l2, mus

    def equations(self):
        """Series for ``P``, the remainder equations and the first pair equation over ``beta^N``."""
        ctx, K, n, h = self.ctx, self.K, self.n, self.h
        tau, u, l1, l2, mus = self._roots()
        beta = Series.var(ctx, K)
        phase_m = (beta * (-ctx.mpc(0, 1))).exp()
        y1 = tau + u.shift_up(n - 1)
        # product identity; the pair contributes phi(h+d1)/phi(d2-h) * phi(d2)/phi(d1)
        p = (self._phi(l1 + h / 2) / self._phi(l2 - h / 2)) * (self._phi_over(tau) / self._phi_over(y1))
        for m in mus:
            p = p * (self._phi(m + h / 2) / self._phi(m - h / 2))
        p = p**n * (beta * ctx.mpc(0, self.spec.M)).exp() - 1
        roots = [l1, l2] + mus
        rem = []
        for k, m in enumerate(mus):
            left = self._phi(m + h / 2) ** n
            right = self._phi(m - h / 2) ** n
            for j, other in enumerate(roots):
                if j == k + 2:
                    continue
                left = left * self._phi(m - other - h)
                right = right * self._phi(m - other + h)
            rem.append(left - phase_m * right)
        # first pair equation: phi(l1 - l2 - h) = phi(beta^N u) and phi(l1 - h/2)^N carry beta^N
        d_over = u if self.spec.family is Family.XXX else u * u.shift_up(n).sinhc()
        left = self._phi(l1 + h / 2) ** n * d_over
        right = self._phi_over(y1) ** n * self._phi(l1 - l2 + h)
        for m in mus:
            left = left * self._phi(l1 - m - h)
            right = right * self._phi(l1 - m + h)
        ea = left - phase_m * right
        return p, rem, ea

    # -- stages
    def _stage_vector(self, m: int):
        p, rem, _ = self.equations()
        return [p[m + 1]] + [e[m + 1] for e in rem]

    def _set_stage(self, m: int, x):
        self.tau[m] = x[0]
        for k in range(self.r):
            self.mu[k][m + 1] = x[k + 1]

    def _affine_solve(self, evaluate, setter, base, tol: float, what: str):
        ctx = self.ctx
        size = len(base)
        setter(base)
        g0 = evaluate()
        cols = []
        for i in range(size):
            probe = list(base)
            probe[i] = probe[i] + 1
            setter(probe)
            cols.append([a - b for a, b in zip(evaluate(), g0)])
        jac = np.array([[cols[j][i] for j in range(size)] for i in range(size)], dtype=object)
        try:
            step = nm.solve_linear(jac, np.array([-v for v in g0], dtype=object), self.spec.digits)
        except (ZeroDivisionError, ValueError) as exc:
            setter(base)
            raise InconsistentSystemError(f"{what}: degenerate linear system") from exc
        x = [base[i] + step[i] for i in range(size)]
        setter(x)
        resid = max((abs(v) for v in evaluate()), default=0)
        scale = max([1] + [abs(v) for v in g0])
        if resid > tol * scale:
            raise InconsistentSystemError(f"{what}: linear solve left residual {float(resid):.3e}")
        return x

    def run(self, order: int):
        ctx = self.ctx
        tol = 10.0 ** (-(self.spec.digits - 8))
        # any nonzero tau_0 works here: the pair factor at order zero is tau/tau
        self.tau[0] = ctx.mpc(1)
        p, _, _ = self.equations()
        # order zero of P is the physicality constraint (minus one)
        if abs(p[0]) > self.spec.detect_tol:
            raise InconsistentSystemError(
                f"unphysical input: constraint value {complex(p[0] + 1):.6g} differs from 1"
            )
        for m in range(order):
            base = [ctx.mpc(1) if m == 0 else ctx.mpc(0)] + [ctx.mpc(0)] * self.r
            self._affine_solve(lambda: self._stage_vector(m), lambda x: self._set_stage(m, x), base, tol, f"order {m + 1}")
            if m == 0 and abs(self.tau[0]) < tol:
                raise InconsistentSystemError("vanishing first-order shift: the pair does not move with the twist")

            def ea_coeff(m=m):
                return [self.equations()[2][m]]

            def set_u(x, m=m):
                self.u[m] = x[0]

            self._affine_solve(ea_coeff, set_u, [ctx.mpc(0)], tol, f"pair split at order {m + self.n}")

    def coefficients(self, order: int):
        pair1, pair2 = [], []
        for l in range(1, order + 1):
            t = self.tau[l - 1]
            pair2.append(t)
            pair1.append(t + (self.u[l - self.n] if l >= self.n else 0))
        rem = [tuple(self.mu[k][1 : order + 1]) for k in range(self.r)]
        return (tuple(pair1), tuple(pair2), *rem)


def _polish_remainder(spec: ModelSpec, dec: SingularDecomposition) -> SingularDecomposition:
    if not len(dec.remainder):
        return dec
    system = BetheSystem.reduced(spec)
    try:
        rem = _mp_newton(system, dec.remainder.roots, SolveOptions(max_iterations=60), spec.solve_tol)
    except (ConvergenceError, SingularJacobianError) as exc:
        raise InconsistentSystemError("remainder does not solve the reduced equations") from exc
    return SingularDecomposition(dec.string_part, RootSet(tuple(rem)))


def _prepare(spec: ModelSpec, dec: SingularDecomposition):
    _require_half(spec)
    spec = _series_spec(spec).with_beta(0.0)
    string = tuple(spec.string_values())
    dec = SingularDecomposition(string, dec.remainder)
    if spec.M != 2 + len(dec.remainder):
        spec = spec.with_magnons(2 + len(dec.remainder))
    # polish first: a double-precision remainder would miss the constraint at full precision
    dec = _polish_remainder(spec, dec)
    value, physical = physical_constraint(spec, dec)
    if not physical:
        raise InconsistentSystemError(
            f"unphysical singular solution (constraint value {complex(value):.6g}): no twist deformation with equal shifts"
        )
    return spec, dec


def expand_series(spec: ModelSpec, dec: SingularDecomposition, order: int | None = None) -> TwistSeries:
    """Coefficients of the twist expansion up to ``beta^order`` (default ``order = N``).

    Works at ``spec.digits`` when set, else at 40 digits.
    """
    order = spec.N if order is None else int(order)
    if order < 1:
        raise ValueError("order must be >= 1")
    spec, dec = _prepare(spec, dec)
    exp = _Expansion(spec, dec, order)
    exp.run(order)
    return TwistSeries(spec, dec, exp.coefficients(order), order)


def first_order_correction(spec: ModelSpec, dec: SingularDecomposition):
    """The common first-order shift ``c`` of the string roots."""
    return expand_series(spec, dec, 1).coefficients[0][0]


def evaluate_series(series: TwistSeries, beta) -> RootSet:
    """Truncated series at ``beta`` (advised radius ``|beta| <= 0.5``)."""
    ctx = series.spec.ctx
    b = ctx.convert(beta)
    out = []
    for j, z0 in enumerate(series.zeroth):
        acc = ctx.mpc(0)
        for c in reversed(series.coefficients[j]):
            acc = (acc + c) * b
        out.append(ctx.convert(z0) + acc)
    return RootSet(tuple(out))


def series_residual(series: TwistSeries, beta) -> float:
    """Scaled Bethe residual of the truncated series at ``beta``."""
    from .model import residual_norm

    return residual_norm(series.spec.with_beta(float(beta)), evaluate_series(series, beta))


# ---------------------------------------------------------------------------
# homotopy in beta


def _schedule(b0: float, b1: float, steps: int):
    if b0 == b1:
        return [b1] * steps
    if b0 * b1 > 0:
        return list(np.geomspace(b0, b1, steps + 1)[1:])
    return list(np.linspace(b0, b1, steps + 1)[1:])


def homotopy_track(
    spec: ModelSpec,
    start,
    beta_start: float,
    beta_end: float,
    steps: int = 20,
    opts: SolveOptions | None = None,
    max_bisections: int = 12,
):
    """Follow a solution from ``beta_start`` to ``beta_end``.

    Geometric schedule when both ends share a sign, linear otherwise.  Each step
    predicts by secant extrapolation and corrects with Newton; failed steps are
    halved up to ``max_bisections`` times.  Returns ``[(beta, RootSet), ...]``
    starting with the corrected start point.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    opts = opts or SolveOptions(max_iterations=40)
    cur = _correct(spec, beta_start, as_roots(start), opts)
    path = [(float(beta_start), cur)]
    prev = None
    targets = _schedule(float(beta_start), float(beta_end), steps)
    b = float(beta_start)
    for target in targets:
        depth = 0
        while b != target:
            nxt = target
            for _ in range(depth):
                nxt = _midpoint(b, nxt)
            guess = _predict(path, prev, nxt)
            try:
                new = _correct(spec, nxt, guess, opts, near=cur)
            except (ConvergenceError, SingularJacobianError, PathTrackingError):
                depth += 1
                if depth > max_bisections:
                    raise PathTrackingError(f"step bisection exhausted near beta = {b:.6g}")
                continue
            prev = (b, cur)
            b, cur = nxt, new
            path.append((b, cur))
            depth = max(0, depth - 1)
    if len(path) == 1:
        path.append((float(beta_end), cur))
    return path


def _midpoint(a: float, b: float) -> float:
    if a * b > 0:
        return float(np.sign(a) * np.sqrt(a * b))
    return 0.5 * (a + b)


def _predict(path, prev, nxt):
    b1, r1 = path[-1]
    if prev is None:
        return r1
    b0, r0 = prev
    if b1 == b0:
        return r1
    # stay in the roots' own arithmetic: the pair's offset from the string can sit below double resolution
    t = (nxt - b1) / (b1 - b0)
    return RootSet(tuple(z1 + t * (z1 - z0) for z1, z0 in zip(r1, r0)))


def _correct(spec, beta, guess, opts, near=None):
    s = spec.with_beta(float(beta))
    roots = newton_solve(s, guess, opts)
    # a jump to another branch shows up as a large root displacement
    if near is not None and roots.distance(near) > 0.25:
        raise PathTrackingError("Newton jumped to another branch")
    return _match_order(roots, guess)


def _match_order(roots: RootSet, ref) -> RootSet:
    """Reorder ``roots`` to follow ``ref`` (greedy nearest)."""
    left = [complex(v) for v in roots]
    vals = list(roots.roots)
    out = []
    for r in ref:
        k = int(np.argmin([abs(v - complex(r)) for v in left]))
        out.append(vals.pop(k))
        left.pop(k)
    return RootSet(tuple(out))


# ---------------------------------------------------------------------------
# regulator limits


def epsilon_constraint_check(spec: ModelSpec, dec: SingularDecomposition, epsilons, reg_c=0) -> list:
    """Product identity at zero twist with the pair shifted to ``+-h/2 + eps``.

    The ``eps^N`` term on the top root defaults to zero; it does not affect the
    limit.  Returns one complex value per ``eps``.
    """
    spec = spec.with_beta(0.0)
    if spec.spin != Fraction(1, 2):
        raise UnsupportedModelError("the epsilon regulator is implemented for spin 1/2 only")
    ctx = spec.ctx
    floor = 10.0 ** (-(max(spec.digits, 15) - 4))
    out = []
    top, bottom = spec.string_values()
    for eps in epsilons:
        reg = EpsilonReg(float(eps), reg_c)
        if reg.epsilon < floor:
            raise PrecisionError(f"epsilon = {reg.epsilon:g} is below the cancellation floor {floor:g}")
        e = ctx.convert(reg.epsilon)
        pair = (top + e + ctx.convert(reg.c) * e**spec.N, bottom + e)
        roots = RootSet(pair + tuple(ctx.convert(v) for v in dec.remainder.roots))
        out.append(product_identity(spec.with_magnons(len(roots)), roots))
    return out


def richardson_limit(xs, values, ctx=None):
    """Neville extrapolation of ``values(x)`` to ``x = 0``; returns ``(limit, error estimate)``."""
    ctx = ctx or nm.context(0)
    xs = [ctx.convert(x) for x in xs]
    table = [ctx.convert(v) for v in values]
    n = len(xs)
    if n == 0:
        raise ValueError("need at least one sample")
    estimates = [table[0]]
    for k in range(1, n):
        for i in range(n - k):
            table[i] = (xs[i + k] * table[i] - xs[i] * table[i + 1]) / (xs[i + k] - xs[i])
        estimates.append(table[0])
    err = abs(estimates[-1] - estimates[-2]) if n > 1 else float("inf")
    return estimates[-1], float(err)


def _halving(x0: float, levels: int):
    return [x0 / 2**k for k in range(levels)]


def epsilon_limit(spec: ModelSpec, dec: SingularDecomposition, eps0: float = 1e-4, levels: int = 5):
    """``eps -> 0`` limit of :func:`epsilon_constraint_check` from a halving sequence starting at ``eps0``."""
    spec = _series_spec(spec)
    xs = _halving(eps0, levels)
    return richardson_limit(xs, epsilon_constraint_check(spec, dec, xs), spec.ctx)


def beta_limit(series: TwistSeries, beta0: float = 1e-4, levels: int = 5):
    """``beta -> 0`` limit of the product identity along the twist series."""
    spec = series.spec
    xs = _halving(beta0, levels)
    vals = [product_identity(spec.with_beta(float(b)), evaluate_series(series, b)) for b in xs]
    return richardson_limit(xs, vals, spec.ctx)


def pair_shift_gap(roots, beta: float, spec: ModelSpec) -> float:
    """``|(l_1 - h/2)/beta - (l_2 + h/2)/beta|`` for the two roots nearest the string."""
    top, bottom = (complex(v) for v in spec.string_values())
    z = [complex(v) for v in as_roots(roots)]
    a = min(z, key=lambda v: abs(v - top))
    b = min(z, key=lambda v: abs(v - bottom))
    return abs((a - top) / beta - (b - bottom) / beta)
