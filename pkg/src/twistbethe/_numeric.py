"""Precision plumbing: one arithmetic context per digit count.

``digits == 0`` means machine double (``complex`` and ``numpy.complex128``);
``digits > 0`` means an isolated :class:`mpmath.MPContext` at that many
decimal digits, so computations at different precisions never interfere.
"""
from __future__ import annotations

import cmath
import math
import os
from functools import lru_cache

import mpmath
import numpy as np
from mpmath.libmp import repr_dps, to_str

PRECISION_ENV = "TWISTBETHE_PRECISION"


class DoubleContext:
    """Minimal mpmath-like facade over ``cmath`` for machine precision."""

    dps = 15
    j = 1j
    pi = math.pi
    eps = np.finfo(float).eps

    @staticmethod
    def mpc(re=0.0, im=0.0):
        return complex(re, im)

    @staticmethod
    def mpf(x):
        return float(x)

    @staticmethod
    def convert(x):
        if isinstance(x, str):
            return complex(x.replace("i", "j"))
        return complex(x)

    exp = staticmethod(cmath.exp)
    log = staticmethod(cmath.log)
    sinh = staticmethod(cmath.sinh)
    cosh = staticmethod(cmath.cosh)
    sqrt = staticmethod(cmath.sqrt)

    @staticmethod
    def chop(x, tol):
        z = complex(x)
        re = 0.0 if abs(z.real) < tol else z.real
        im = 0.0 if abs(z.imag) < tol else z.imag
        return complex(re, im)


DOUBLE = DoubleContext()


@lru_cache(maxsize=None)
def context(digits: int = 0):
    """Arithmetic context for ``digits`` decimal digits (0 = double)."""
    if digits <= 0:
        return DOUBLE
    ctx = mpmath.MPContext()
    ctx.dps = int(digits)
    return ctx


def default_digits() -> int:
    """Default precision from the environment, 0 (double) if unset."""
    raw = os.environ.get(PRECISION_ENV, "").strip()
    return int(raw) if raw else 0


def detect_tol(digits: int) -> float:
    """Distance below which a root is taken to equal an exact string value."""
    return 1e-8 if digits <= 0 else 10.0 ** (-(digits // 2))


def solve_tol(digits: int) -> float:
    """Scaled residual below which a root set counts as a solution."""
    return 1e-10 if digits <= 0 else 10.0 ** (-(digits - 10))


def is_mp(digits: int) -> bool:
    return digits > 0


def array(values, digits: int):
    """Pack values into an array suitable for the precision mode."""
    ctx = context(digits)
    if digits <= 0:
        return np.asarray([complex(v) for v in values], dtype=complex)
    return np.array([ctx.convert(v) for v in values], dtype=object)


def elementwise(func, digits: int):
    """Vectorize a scalar context function for the precision mode."""
    if digits <= 0:
        return {
            "sinh": np.sinh,
            "cosh": np.cosh,
            "exp": np.exp,
        }[func]
    return np.frompyfunc(getattr(context(digits), func), 1, 1)


def absval(x) -> float:
    return float(abs(x))


def solve_linear(a, b, digits: int):
    """Solve ``a x = b``; raises ``ZeroDivisionError`` or ``LinAlgError`` when singular."""
    if digits <= 0:
        return np.linalg.solve(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    ctx = context(digits)
    a = np.asarray(a, dtype=object)
    x = ctx.lu_solve(ctx.matrix(a.tolist()), ctx.matrix([[v] for v in np.asarray(b).ravel()]))
    return np.array([x[k] for k in range(a.shape[1])], dtype=object)


def fmt_real(x) -> str:
    """Shortest decimal string that round-trips ``x`` at its own precision."""
    if isinstance(x, (float, int)):
        text = repr(float(x))
    else:
        mpf = mpmath.mpf(x) if not hasattr(x, "_mpf_") else x
        prec = getattr(getattr(mpf, "context", None), "prec", 53)
        text = to_str(mpf._mpf_, repr_dps(prec))
    if text in ("-0.0", "0.0", "-0", "0"):
        return "0"
    if text.endswith(".0"):
        text = text[:-2]
    return text


def fmt_complex(z) -> list[str]:
    """Encode a complex number as ``[re, im]`` decimal strings."""
    if isinstance(z, (complex, float, int)):
        z = complex(z)
        return [fmt_real(z.real), fmt_real(z.imag)]
    return [fmt_real(z.real), fmt_real(z.imag)]


def parse_complex(pair, digits: int):
    """Inverse of :func:`fmt_complex`."""
    re, im = pair
    ctx = context(digits)
    if digits <= 0:
        return complex(float(re), float(im))
    return ctx.mpc(ctx.mpf(re), ctx.mpf(im))
