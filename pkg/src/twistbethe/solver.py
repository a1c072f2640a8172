"""Newton iteration and multi-seed enumeration for full and reduced Bethe systems."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import optimize

from . import _numeric as nm
from .errors import ConvergenceError, NotDecomposableError, SingularJacobianError
from .model import (
    BetheSystem,
    ClassificationResult,
    Family,
    Kind,
    ModelSpec,
    RootSet,
    SingularDecomposition,
    as_roots,
    classify,
    detect_singular,
    physical_constraint,
)


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 100
    residual_tolerance: float | None = None
    step_damping: float = 1.0
    seed_count: int = 400
    dedup_distance: float = 1e-6
    random_seed: int = 0
    singular_guard: float = 0.1
    confirm_digits: int = 0  # 0: 30 + 4N
    workers: int = 1
    max_halvings: int = 30

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.residual_tolerance is not None and self.residual_tolerance <= 0:
            raise ValueError("residual_tolerance must be positive")
        if not 0 < self.step_damping <= 1:
            raise ValueError("step_damping must lie in (0, 1]")
        if self.dedup_distance <= 0:
            raise ValueError("dedup_distance must be positive")

    def tol(self, spec: ModelSpec) -> float:
        return spec.solve_tol if self.residual_tolerance is None else self.residual_tolerance


@dataclass
class SolutionSet:
    spec: ModelSpec
    solutions: list = field(default_factory=list)  # (RootSet, ClassificationResult)
    seeds_tried: int = 0
    failures: int = 0

    def count(self, kind: Kind) -> int:
        return sum(1 for _, c in self.solutions if c.kind is kind)

    def of_kind(self, *kinds: Kind) -> list:
        return [r for r, c in self.solutions if c.kind in kinds]


def canonicalize(roots) -> RootSet:
    return as_roots(roots).canonical()


# ---------------------------------------------------------------------------
# Newton


def _merit(system: BetheSystem, lam):
    return system.scaled_norm(lam)


def _step_tol(digits: int) -> float:
    return 1e-9 if digits <= 0 else 10.0 ** (-(digits // 2))


def _safe_solve(jac, f):
    """Batched solve; singular members come back as non-finite rows."""
    try:
        return np.linalg.solve(jac, f[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full(f.shape, np.nan, dtype=complex)
        for k in range(len(f)):
            try:
                out[k] = np.linalg.solve(jac[k], f[k])
            except np.linalg.LinAlgError:
                pass
        return out


def _batch_newton(system: BetheSystem, seeds: np.ndarray, opts: SolveOptions, tol: float):
    """Damped Newton on a batch of seeds (double precision).

    A seed converges once its scaled residual is below ``tol`` *and* the next
    Newton step is negligible; the second test rejects the slow linear creep
    along the singular valley where ``phi(l_1 - l_2 - h)`` is tiny.

    Returns ``(roots, converged_mask, singular_mask)``.
    """
    lam = np.array(seeds, dtype=complex)
    s = lam.shape[0]
    active = np.ones(s, dtype=bool)
    converged = np.zeros(s, dtype=bool)
    singular = np.zeros(s, dtype=bool)
    merit = _merit(system, lam)
    exact = merit == 0
    converged |= exact
    active &= ~exact
    step_tol = _step_tol(0)
    for _ in range(opts.max_iterations):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        cur = lam[idx]
        f, jac = system.residual_and_jacobian(cur)
        step = _safe_solve(jac, f)
        bad = ~np.all(np.isfinite(step), axis=1) | (np.abs(step).max(axis=1) > 1e8)
        step[bad] = 0
        ok = ~bad
        singular[idx[bad]] = True
        active[idx[bad]] = False
        small = np.abs(step).max(axis=1) < step_tol * (1 + np.abs(cur).max(axis=1))
        done = ok & small & (merit[idx] < tol)
        lam[idx[done]] = cur[done] - step[done]
        converged[idx[done]] = True
        active[idx[done]] = False
        move = ok & ~done
        t = np.full(len(idx), opts.step_damping)
        trial = cur - t[:, None] * step
        new_merit = _merit(system, trial)
        # backtracking: halve the step until the scaled residual decreases
        for _ in range(12):
            worse = (new_merit >= merit[idx]) & move
            if not worse.any():
                break
            t[worse] *= 0.5
            trial[worse] = cur[worse] - t[worse, None] * step[worse]
            new_merit[worse] = _merit(system, trial[worse])
        upd = move & np.all(np.isfinite(trial), axis=1)
        lam[idx[upd]] = trial[upd]
        merit[idx[upd]] = new_merit[upd]
        blown = np.abs(lam[idx]).max(axis=1) > 1e6
        active[idx[blown]] = False
    return lam, converged, singular


def _mp_newton(system: BetheSystem, seed, opts: SolveOptions, tol: float):
    digits = system.digits
    ctx = system.spec.ctx
    lam = nm.array(seed, digits)
    merit = float(_merit(system, lam))
    if merit == 0:
        return lam
    step_tol = _step_tol(digits)
    for it in range(opts.max_iterations):
        f, jac = system.residual_and_jacobian(lam)
        try:
            step = nm.solve_linear(jac, f, digits)
        except (ZeroDivisionError, ValueError) as exc:
            raise SingularJacobianError(f"singular Jacobian at iteration {it}") from exc
        size = max(abs(z) for z in step)
        scale = 1 + max(abs(z) for z in lam)
        if merit < tol and size < step_tol * scale:
            return lam - step
        # ndarray on the left: mpf * ndarray falls back to a slow conversion
        t = ctx.mpf(opts.step_damping)
        trial = lam - step * t
        new = float(_merit(system, trial))
        for _ in range(opts.max_halvings):
            if new < merit:
                break
            t /= 2
            trial = lam - step * t
            new = float(_merit(system, trial))
        else:
            raise ConvergenceError(f"line search stalled at iteration {it} (residual {merit:.3e})")
        lam, merit = trial, new
    raise ConvergenceError(f"no convergence after {opts.max_iterations} iterations (residual {merit:.3e})")


def _solve_system(system: BetheSystem, seed, opts: SolveOptions, tol: float) -> RootSet:
    if system.size == 0:
        return RootSet((), True)
    if system.digits > 0:
        return RootSet(tuple(_mp_newton(system, seed, opts, tol))).canonical()
    lam, conv, sing = _batch_newton(system, np.asarray([list(seed)], dtype=complex), opts, tol)
    if conv[0]:
        return RootSet(tuple(complex(z) for z in lam[0])).canonical()
    if sing[0]:
        raise SingularJacobianError("Newton hit a singular Jacobian")
    raise ConvergenceError(f"no convergence after {opts.max_iterations} iterations")


def newton_solve(spec: ModelSpec, seed, opts: SolveOptions | None = None) -> RootSet:
    """Polish ``seed`` into a solution of the full (twisted) polynomial system."""
    opts = opts or SolveOptions()
    seed = as_roots(seed)
    if len(seed) != spec.M:
        from .errors import DimensionError

        raise DimensionError(f"expected {spec.M} roots, got {len(seed)}")
    if spec.digits > 0:
        return _solve_system(BetheSystem.full(spec), seed, opts, opts.tol(spec))
    z = _unpin_pairs(spec, seed.as_complex())
    roots = _solve_system(BetheSystem.full(spec), z, opts, opts.tol(spec))
    lam = roots.as_complex()
    if _detect_or_none(spec, roots) is None and _near_string(spec, lam, opts.singular_guard):
        # near-string limits in doubles can be points of the singular valley
        if _confirm_regular(spec, roots, opts) is None:
            raise ConvergenceError("Newton settled on the singular valley, not on a solution")
    return roots


def _unpin_pairs(spec: ModelSpec, z: np.ndarray) -> np.ndarray:
    """Stretch exactly ``h``-spaced seed pairs off the string; Newton cannot leave that valley."""
    h = complex(spec.unit)
    z = z.copy()
    for a, b in _pairs_of(spec, z):
        c = (z[a] + z[b]) / 2
        if abs(c) > spec.detect_tol:
            z[a], z[b] = c + 1.01 * h / 2, c - 1.01 * h / 2
    return z


def _detect_or_none(spec: ModelSpec, roots):
    try:
        return detect_singular(spec, roots)
    except NotDecomposableError:
        return None


def newton_solve_reduced(spec: ModelSpec, seed, opts: SolveOptions | None = None) -> RootSet:
    opts = opts or SolveOptions()
    return _solve_system(BetheSystem.reduced(spec), as_roots(seed), opts, opts.tol(spec))


# ---------------------------------------------------------------------------
# seeding


def _free_magnon(spec: ModelSpec, k: float) -> complex:
    """XXX rapidity of a single magnon with momentum ``k``: ``s cot(k/2)``."""
    t = math.tan(k / 2)
    return float(spec.spin) / t if abs(t) > 1e-12 else 10.0


STRING_STRETCHES = (1.0, 1.05, 1.2, 0.9)


def _theta(n: int, x):
    return 2 * np.arctan(2 * x / n) if n else 0 * x


def _scatter(n: int, m: int, x):
    """String-string phase: theta_|n-m| + 2 theta_|n-m|+2 + ... + 2 theta_n+m-2 + theta_n+m."""
    out = _theta(abs(n - m), x) + _theta(n + m, x)
    for k in range(abs(n - m) + 2, n + m, 2):
        out = out + 2 * _theta(k, x)
    return out


def _string_configs(m: int, max_len: int = 3):
    """Multisets of string lengths summing to ``m`` as ``{length: count}``."""
    def rec(rest, top):
        if rest == 0:
            yield {}
            return
        for n in range(min(top, rest), 0, -1):
            for sub in rec(rest - n, n):
                d = dict(sub)
                d[n] = d.get(n, 0) + 1
                yield d
    yield from rec(m, max_len)


def _string_centres(n_sites: int, lengths, quanta, iterations: int = 200):
    """Solve N theta_n(x_a) = 2 pi J_a + sum_b Theta_nm(x_a - x_b) by damped fixed point."""
    lengths = np.asarray(lengths)
    quanta = np.asarray(quanta, dtype=float)
    x = np.zeros(len(lengths))
    for _ in range(iterations):
        rhs = 2 * np.pi * quanta
        for a in range(len(x)):
            for b in range(len(x)):
                if a != b:
                    rhs[a] += _scatter(int(lengths[a]), int(lengths[b]), x[a] - x[b])
        arg = np.clip(rhs / (2 * n_sites), -np.pi / 2 + 1e-9, np.pi / 2 - 1e-9)
        new = lengths / 2 * np.tan(arg)
        x = 0.5 * x + 0.5 * new
    return x


def string_hypothesis_seeds(spec: ModelSpec, m: int, budget: int, rng: np.random.Generator) -> list:
    """Seeds from the string hypothesis (XXX, spin 1/2).

    For each split of ``m`` into strings the quantum numbers of
    ``n``-strings are distinct, integer or half-odd, with
    ``|J| <= (N - sum_k t_nk M_k - 1)/2`` and ``t_nk = 2 min(n, k) - delta_nk``.
    Configurations are listed exhaustively while they fit the budget and
    sampled otherwise.
    """
    n_sites = spec.N
    combos = []
    budget = max(1, budget // len(STRING_STRETCHES))
    for cfg in _string_configs(m, m):
        choices = []
        for n, count in sorted(cfg.items()):
            t = sum((2 * min(n, k) - (n == k)) * c for k, c in cfg.items())
            jmax = (n_sites - t - 1) / 2
            if jmax < 0:
                choices = None
                break
            allowed = [-jmax + k for k in range(int(math.floor(2 * jmax + 1e-9)) + 1)]
            if len(allowed) < count:
                choices = None
                break
            choices.append((n, count, allowed))
        if choices is None:
            continue
        pools = [list(itertools.combinations(a, c)) for _, c, a in choices]
        total = math.prod(len(p) for p in pools)
        if total <= budget:
            picks = itertools.product(*pools)
        else:
            picks = (tuple(p[rng.integers(len(p))] for p in pools) for _ in range(budget))
        for pick in picks:
            lengths, quanta = [], []
            for (n, _, _), js in zip(choices, pick):
                lengths += [n] * len(js)
                quanta += list(js)
            combos.append((lengths, quanta))
    if len(combos) > budget:
        idx = rng.choice(len(combos), size=budget, replace=False)
        combos = [combos[k] for k in sorted(idx)]
    out = []
    h = complex(spec.unit)
    for lengths, quanta in combos:
        x = _string_centres(n_sites, lengths, quanta)
        # exact h spacing sits on the degenerate valley, so each configuration
        # is tried with a few stretched and jittered copies
        for stretch in STRING_STRETCHES:
            roots = []
            for n, c in zip(lengths, x):
                st = stretch * (1 + abs(rng.normal(scale=0.02)))
                roots += [c + h * st * (n + 1 - 2 * a) / 2 for a in range(1, n + 1)]
            roots = np.array(roots) + rng.normal(scale=1e-2, size=m) + 1j * rng.normal(scale=1e-2, size=m)
            if np.all(np.isfinite(roots)) and np.abs(roots).max() < 1e3:
                out.append(roots)
    return out


def make_seeds(spec: ModelSpec, size: int, m: int | None, rng: np.random.Generator, extra=()) -> np.ndarray:
    """Seed matrix of shape ``(count, m)``.

    Mixes real grids built from free-magnon rapidities, grids with one or two
    near-string pairs ``x +- h/2`` and uniform random points in a disk of radius 3.
    """
    m = spec.M if m is None else m
    if m == 0:
        return np.zeros((1, 0), dtype=complex)
    h = complex(spec.unit)
    n = spec.N
    out = [np.asarray(e, dtype=complex) for e in extra if len(e) == m]
    if spec.family.value == "xxx" and spec.spin == Fraction(1, 2):
        out += string_hypothesis_seeds(spec, m, size, rng)
    keep = max(size, len(out))
    if spec.family.value == "xxx":
        grid = [_free_magnon(spec, 2 * math.pi * q / n) for q in range(1, n)]
        if spec.beta != 0:
            b = spec.beta
            grid += [_free_magnon(spec, (2 * math.pi * q + sg * b) / n) for q in range(n) for sg in (1, -1)]
            grid += [sg * n / (c * b) for c in (1, 2, 3, 4) for sg in (1, -1)]
        grid = np.array(grid, dtype=complex)
        n_grid = size // 3
    else:
        grid, n_grid = None, 0
    for _ in range(n_grid):
        pick = rng.choice(len(grid), size=m, replace=len(grid) < m)
        base = grid[pick] + rng.normal(scale=0.05, size=m)
        n_pairs = rng.integers(0, m // 2 + 1)
        for p in range(n_pairs):
            x = rng.normal(scale=1.0)
            # narrow pairs hug +-h/2, wide pairs cover deformed strings
            width = 1 + rng.normal(scale=0.1) if rng.random() < 0.5 else rng.uniform(0.6, 3.6)
            base[2 * p] = x + h / 2 * width
            base[2 * p + 1] = x - h / 2 * width
        if m >= 3 and rng.random() < 0.2:
            x = rng.normal(scale=0.7)
            base[:3] = [x + h, x, x - h]
            base[:3] += rng.normal(scale=0.05, size=3)
        if rng.random() < 0.5:
            # parity-symmetric configuration {l} u {-l}
            half = base[: m // 2]
            base = np.concatenate([half, -half, [0.0] if m % 2 else []])
            base = base + rng.normal(scale=1e-3, size=m)
        out.append(base)
    if spec.beta != 0:
        # descendants of zero twist move in from infinity, |l| ~ N / beta
        far = max(3.0, 4 * n / abs(spec.beta))
        for _ in range(size // 4):
            r = np.exp(rng.uniform(0, math.log(far), size=m))
            r[rng.random(m) < 0.5] = 3 * rng.random()
            out.append(r * np.exp(2j * math.pi * rng.random(m)))
    while len(out) < size:
        r = 3 * np.sqrt(rng.random(m))
        th = 2 * math.pi * rng.random(m)
        out.append(r * np.exp(1j * th))
    return np.array(out[:keep], dtype=complex)


# ---------------------------------------------------------------------------
# enumeration


def _admissible(roots: np.ndarray, min_sep: float) -> bool:
    if len(roots) < 2:
        return True
    d = np.abs(roots[:, None] - roots[None, :]) + np.eye(len(roots)) * 1e300
    return bool(d.min() > min_sep)


def _string_distance(spec: ModelSpec, roots: np.ndarray) -> float:
    """How far the closest near copy of the singular string inside ``roots`` is (inf if none)."""
    vals = [complex(v) for v in spec.string_values()]
    if len(roots) < len(vals):
        return math.inf
    return max(np.abs(roots - v).min() for v in vals)


def _near_string(spec: ModelSpec, roots: np.ndarray, guard: float) -> bool:
    """True if a near copy of the full singular string sits inside ``roots``."""
    return _string_distance(spec, roots) < guard


def _dedup_insert(found: list, roots: RootSet, dist: float) -> bool:
    for other in found:
        if other.distance(roots) < dist:
            return False
    found.append(roots)
    return True


def _run_chunks(system, seeds, opts, tol):
    if opts.workers <= 1 or len(seeds) < 2 * opts.workers:
        return [_batch_newton(system, seeds, opts, tol)]
    chunks = np.array_split(seeds, opts.workers)
    with ThreadPoolExecutor(max_workers=opts.workers) as pool:
        return list(pool.map(lambda c: _batch_newton(system, c, opts, tol), chunks))


def _valley_snap(spec: ModelSpec, row: np.ndarray, width: float = 1e-2):
    """Snap every near-``h`` pair of a stalled row onto an exact string, or ``None``.

    A 2-string ``c +- h/2`` with a small centre deviates from exact spacing by
    roughly ``c^N``, far below double precision, so Newton stalls in the
    valley of exact pairs.  The snapped point is a good start for a
    high-precision polish.
    """
    if not np.all(np.isfinite(row)) or np.abs(row).max() > 1e3:
        return None
    h = complex(spec.unit)
    out = row.copy()
    hit = False
    for a in range(len(row)):
        for b in range(len(row)):
            if a != b and abs(row[a] - row[b] - h) < width:
                c = (row[a] + row[b]) / 2
                out[a], out[b] = c + h / 2, c - h / 2
                hit = True
    return out if hit else None


def _pairs_of(spec: ModelSpec, lam: np.ndarray, tol: float = 1e-12):
    h = complex(spec.unit)
    return [(a, b) for a in range(len(lam)) for b in range(len(lam)) if a != b and abs(lam[a] - lam[b] - h) < tol]


def _collapsed_polish(spec: ModelSpec, lam: np.ndarray):
    """Solve the Bethe system with every snapped pair held as an exact string.

    Multiplying the two equations of a pair ``c +- h/2`` cancels their mutual
    factor (``phi`` is odd) and the common ``phi(c)^N``, leaving a regular
    equation for ``c``.  Unmatched roots keep their own equations.  Returns the
    polished roots or ``None``.
    """
    pairs = _pairs_of(spec, lam)
    paired = {i for ab in pairs for i in ab}
    free = [i for i in range(len(lam)) if i not in paired]
    h = complex(spec.unit)
    n = spec.N
    phase = complex(spec.twist_phase)
    phi = (lambda x: x) if spec.family is Family.XXX else np.sinh

    def unpack(v):
        z = v[: len(v) // 2] + 1j * v[len(v) // 2:]
        out = np.array(lam, dtype=complex)
        for k, (a, b) in enumerate(pairs):
            out[a], out[b] = z[k] + h / 2, z[k] - h / 2
        for k, i in enumerate(free):
            out[i] = z[len(pairs) + k]
        return out

    def side(x, skip, sign):
        d = x - np.delete(cur, skip) + sign * h
        return np.prod(phi(d))

    def fun(v):
        nonlocal cur
        cur = unpack(v)
        res = []
        for a, b in pairs:
            c = (cur[a] + cur[b]) / 2
            lhs = phi(c + h) ** n * side(cur[a], [a, b], -1) * side(cur[b], [a, b], -1)
            rhs = phi(c - h) ** n * side(cur[a], [a, b], +1) * side(cur[b], [a, b], +1)
            res.append((lhs - phase**2 * rhs) / max(1.0, abs(lhs), abs(rhs)))
        for i in free:
            lhs = phi(cur[i] + h / 2) ** n * side(cur[i], [i], -1)
            rhs = phi(cur[i] - h / 2) ** n * side(cur[i], [i], +1)
            res.append((lhs - phase * rhs) / max(1.0, abs(lhs), abs(rhs)))
        res = np.array(res)
        return np.concatenate([res.real, res.imag])

    cur = np.array(lam, dtype=complex)
    z0 = np.array([(lam[a] + lam[b]) / 2 for a, b in pairs] + [lam[i] for i in free])
    with np.errstate(all="ignore"):
        sol = optimize.root(fun, np.concatenate([z0.real, z0.imag]), method="hybr")
        bad = not sol.success or not np.abs(fun(sol.x)).max() <= 1e-10
    if bad:
        return None
    return unpack(sol.x)


def _sweep(spec, system, m, opts, tol, seeds, accept, stalled=None):
    found: list[RootSet] = []
    failures = 0
    for lam, conv, _ in _run_chunks(system, seeds, opts, tol):
        failures += int((~conv).sum())
        if stalled is not None:
            for row in lam[~conv]:
                snap = _valley_snap(spec, row)
                if snap is not None:
                    _dedup_insert(stalled, RootSet(tuple(complex(z) for z in snap)).canonical(), opts.dedup_distance)
        for row in lam[conv]:
            if not accept(row):
                continue
            _dedup_insert(found, RootSet(tuple(complex(z) for z in row)).canonical(), opts.dedup_distance)
    # deterministic merge: canonical order of the root sets themselves
    found.sort(key=lambda r: tuple((round(complex(z).real, 8), round(-complex(z).imag, 8)) for z in r))
    return found, failures


def solve_reduced(spec: ModelSpec, opts: SolveOptions | None = None) -> SolutionSet:
    """Singular candidates: exact string plus every remainder solving the reduced system."""
    opts = opts or SolveOptions()
    n = spec.string_length
    out = SolutionSet(spec.with_beta(0.0))
    spec0 = out.spec
    if spec.M < n:
        return out
    r = spec.M - n
    tol = opts.tol(spec0)
    strings = np.array([complex(v) for v in spec0.string_values()])
    h = complex(spec0.unit)
    forbidden = np.concatenate([strings, [strings[0] + h, strings[-1] - h]])
    if r == 0:
        remainders = [RootSet((), True)]
        out.seeds_tried = 1
    else:
        system = BetheSystem.reduced(spec0)
        rng = np.random.default_rng(opts.random_seed + 7919)
        seeds = make_seeds(spec0, opts.seed_count, r, rng)

        def accept(row):
            if not _admissible(row, opts.dedup_distance):
                return False
            return np.abs(row[:, None] - forbidden[None, :]).min() > 10 * spec0.detect_tol

        remainders, out.seeds_tried, out.failures = _collect(spec0, system, r, opts, tol, seeds, accept, reduced=True)
    for rem in remainders:
        roots = RootSet(tuple(spec0.string_values()) + tuple(rem.roots))
        out.solutions.append((roots, classify(spec0, roots, tol)))
    out.solutions = [(r_, c) for r_, c in out.solutions if c.kind is not Kind.NOT_A_SOLUTION]
    return out


def _symmetry_images(spec: ModelSpec, found) -> list[RootSet]:
    """Images under the symmetries of the equations.

    ``l -> -conj(l)`` holds for any real twist; at zero twist parity
    ``l -> -l`` and conjugation hold separately.  XXZ with real ``eta`` shares
    these because ``sinh`` is odd and real-analytic.
    """
    maps = [lambda z: -np.conj(z)]
    if spec.beta == 0:
        maps += [lambda z: -z, np.conj]
    out = []
    for r in found:
        z = r.as_complex()
        out.extend(RootSet(tuple(f(z))).canonical() for f in maps)
    return out


def confirm_digits(spec: ModelSpec, opts: SolveOptions) -> int:
    return opts.confirm_digits if opts.confirm_digits > 0 else 30 + 4 * spec.N


RESCUE_DIGITS_CAP = 250


def _resolution(spec: ModelSpec, digits: int) -> float:
    # results are stored as doubles, so keep clear of the exact-string detection radius
    margin = 10 if spec.beta == 0 else 2
    return max(10.0 ** (1 - (digits - 10) / spec.N), margin * nm.detect_tol(0))


def _confirm_regular(
    spec: ModelSpec, roots: RootSet, opts: SolveOptions, reduced: bool = False, digits: int | None = None
) -> RootSet | None:
    """Re-polish a near-singular candidate at high precision.

    Genuine solutions converge quadratically and stay away from the exact
    string; points on the singular valley creep toward it and are rejected.
    With ``D`` digits a pair within ``rho`` of the string leaves a residual of
    order ``rho^N``, so anything closer than ``10^{-(D-10)/N}`` is
    indistinguishable from the singular solution itself.
    """
    digits = confirm_digits(spec, opts) if digits is None else digits
    hp = spec.with_digits(digits)
    system = BetheSystem.reduced(hp) if reduced else BetheSystem.full(hp)
    try:
        polished = _mp_newton(system, roots, SolveOptions(max_iterations=15, max_halvings=10), hp.solve_tol)
    except (ConvergenceError, SingularJacobianError):
        return None
    z = np.array([complex(v) for v in polished])
    if _near_string(spec, z, _resolution(spec, digits)):
        return None
    return RootSet(tuple(z)).canonical()


def _collect(spec, system, m, opts, tol, seeds, accept, reduced=False):
    """Sweep, confirm near-string limits, then close under the symmetries.

    Returns ``(kept, seeds_tried, failures)``.
    """
    # stalled rows are only rescued for the full system
    stalled: list[RootSet] = []
    found, failures = _sweep(spec, system, m, opts, tol, seeds, accept, None if reduced else stalled)
    tried = len(seeds)
    kept: list[RootSet] = []

    def admit(batch, confirmed=False):
        nonlocal failures
        added = 0
        for roots in batch:
            if any(roots.distance(k) < opts.dedup_distance for k in kept):
                continue
            if not confirmed and _near_string(spec, roots.as_complex(), opts.singular_guard):
                polished = _confirm_regular(spec, roots, opts, reduced)
                if polished is None:
                    failures += 1
                    snap = None if reduced else _valley_snap(spec, roots.as_complex())
                    if snap is not None:
                        _dedup_insert(stalled, RootSet(tuple(snap)).canonical(), opts.dedup_distance)
                    continue
                roots = polished
            added += _dedup_insert(kept, roots, opts.dedup_distance)
        return added

    admit(found)
    # collapses onto the string itself are skipped before the costly confirm
    # at nonzero twist the string is not a solution, so only exact collapses are dropped
    near = 1e-4 if spec.beta == 0 else 1e-25
    rescued = []
    for roots in stalled:
        start = _collapsed_polish(spec, roots.as_complex())
        if start is None or not accept(start) or _near_string(spec, start, near):
            continue
        start = RootSet(tuple(start)).canonical()
        if any(start.distance(k) < opts.dedup_distance for k in kept + rescued):
            continue
        # resolve the pair: D digits separate points down to 10^(1 - (D - 10)/N)
        rho = _string_distance(spec, start.as_complex())
        digits = confirm_digits(spec, opts)
        if spec.beta != 0 and rho < math.inf:
            digits = min(max(digits, int(10 + spec.N * (2 - math.log10(rho)))), RESCUE_DIGITS_CAP)
        polished = _confirm_regular(spec, start, opts, reduced, digits)
        if polished is not None and accept(polished.as_complex()):
            rescued.append(polished)
    admit(rescued, confirmed=True)
    while True:
        images = _symmetry_images(spec, kept)
        fresh = [im for im in images if all(im.distance(r) >= opts.dedup_distance for r in kept)]
        if not fresh:
            break
        more, f2 = _sweep(spec, system, m, opts, tol, np.array([im.as_complex() for im in fresh]), accept)
        tried += len(fresh)
        failures += f2
        if not admit(more):
            break
    return kept, tried, failures


def ladder_seeds(spec: ModelSpec, lower: SolutionSet | None) -> list:
    """Seeds for ``spec.M`` magnons from the ``M - 1`` solutions plus one new root.

    The new root runs over the free-magnon rapidities and, at nonzero twist,
    over the scale ``-+(N - 2M + 2)/beta`` where a magnon added "at infinity"
    lands once the twist is on.
    """
    if lower is None:
        return []
    n = spec.N
    grid = [_free_magnon(spec, 2 * np.pi * q / n) for q in range(1, n)] + [0.0]
    if spec.beta != 0:
        far = (n - 2 * (spec.M - 1)) / spec.beta
        grid += [sg * far * c for sg in (1, -1) for c in (1.0, 0.5, 1.5)]
        grid += [sg * far * (1 + 0.5j * t) for sg in (1, -1) for t in (1, -1)]
    extra = []
    for roots, c in lower.solutions:
        if c.kind is Kind.SINGULAR_UNPHYSICAL:
            continue
        base = [complex(z) for z in roots]
        for g in grid:
            if all(abs(g - z) > 1e-3 for z in base):
                extra.append(base + [complex(g) + 1e-3])
    return extra


def infinity_cluster(k: int, n_eff: int) -> np.ndarray:
    """Scaled positions ``x = beta * l`` of ``k`` roots sent in from infinity by a small twist.

    To leading order in ``beta`` the large roots obey
    ``n_eff / x_j + 1 = 2 sum_{k != j} 1/(x_j - x_k)``, with ``n_eff = N - 2M'``
    when ``M'`` finite roots are present.  This is the Stieltjes condition for
    ``x P'' - (x + n_eff) P' + k P = 0``, whose polynomial solution is the
    generalized Laguerre polynomial ``L_k^(a)`` with ``a = -n_eff - 1``.
    """
    a = -n_eff - 1
    coeffs = []
    for i in range(k + 1):
        # binomial(k + a, k - i) as a falling product; a may be a negative integer
        top, m = k + a, k - i
        binom = math.prod(top - t for t in range(m)) / math.factorial(m)
        coeffs.append((-1) ** i * binom / math.factorial(i))
    return np.roots(coeffs[::-1]).astype(complex)


def descendant_seeds(spec: ModelSpec, lower_sets) -> list:
    """Seeds for ``spec.M`` at nonzero twist: each lower solution plus an infinity cluster."""
    if spec.beta == 0:
        return []
    out = []
    for sols in lower_sets:
        k = spec.M - sols.spec.M
        n_eff = spec.N - 2 * sols.spec.M
        if k <= 0 or n_eff <= 0:
            continue
        cluster = infinity_cluster(k, n_eff) / spec.beta
        for roots, c in sols.solutions:
            if c.kind is not Kind.SINGULAR_UNPHYSICAL:
                out.append(np.concatenate([roots.as_complex(), cluster]))
    return out


def enumerate_ladder(spec: ModelSpec, opts: SolveOptions | None = None) -> list:
    """Solution sets for ``0..spec.M`` magnons, each seeded from the ones below.

    At nonzero twist this is how the states that descend from lower sectors at
    zero twist are reached: their extra roots are of order ``1/beta``
    (:func:`infinity_cluster`).
    """
    out = []
    for m in range(spec.M + 1):
        sub = spec.with_magnons(m)
        extra = ladder_seeds(sub, out[-1] if out else None) + descendant_seeds(sub, out)
        out.append(enumerate_solutions(sub, opts, extra))
    return out


def enumerate_solutions(spec: ModelSpec, opts: SolveOptions | None = None, extra_seeds=()) -> SolutionSet:
    """Multi-seed Newton sweep of the full system plus, at zero twist, the singular sweep.

    Full-system limits within ``opts.singular_guard`` of the singular string
    are re-polished at :func:`confirm_digits` digits and kept only if they
    converge to a genuine solution; exact singular solutions come from
    :func:`solve_reduced`.
    """
    opts = opts or SolveOptions()
    tol = opts.tol(spec)
    out = SolutionSet(spec)
    if spec.M == 0:
        out.solutions.append((RootSet((), True), classify(spec, RootSet(()), tol)))
        out.seeds_tried = 1
        return out
    rng = np.random.default_rng(opts.random_seed)
    seeds = make_seeds(spec, opts.seed_count, None, rng, extra_seeds)
    system = BetheSystem.full(spec)

    accept = lambda row: _admissible(row, opts.dedup_distance)  # noqa: E731
    kept, out.seeds_tried, out.failures = _collect(spec, system, spec.M, opts, tol, seeds, accept)
    for roots in kept:
        c = classify(spec, roots, tol)
        if c.kind is not Kind.NOT_A_SOLUTION:
            out.solutions.append((roots, c))
    if spec.beta == 0 and spec.M >= spec.string_length:
        sing = solve_reduced(spec, opts)
        out.solutions.extend(sing.solutions)
        out.seeds_tried += sing.seeds_tried
        out.failures += sing.failures
    return out
