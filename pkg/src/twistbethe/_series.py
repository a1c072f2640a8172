"""Truncated power series in one variable over a (possibly multiprecision) context."""
from __future__ import annotations

from math import factorial


class Series:
    """Coefficients ``c[0..K]`` of ``sum c_k x^k``, truncated at order ``K``."""

    __slots__ = ("c", "ctx")

    def __init__(self, coeffs, ctx, order: int | None = None):
        coeffs = list(coeffs)
        if order is not None:
            coeffs = (coeffs + [0] * (order + 1))[: order + 1]
        self.ctx = ctx
        self.c = [ctx.convert(v) for v in coeffs]

    @property
    def order(self) -> int:
        return len(self.c) - 1

    @classmethod
    def const(cls, value, ctx, order: int) -> "Series":
        return cls([value], ctx, order)

    @classmethod
    def var(cls, ctx, order: int) -> "Series":
        return cls([0, 1], ctx, order)

    def _wrap(self, other) -> "Series":
        if isinstance(other, Series):
            return other
        return Series.const(other, self.ctx, self.order)

    def __add__(self, other):
        o = self._wrap(other)
        return Series([a + b for a, b in zip(self.c, o.c)], self.ctx)

    __radd__ = __add__

    def __neg__(self):
        return Series([-a for a in self.c], self.ctx)

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __mul__(self, other):
        if not isinstance(other, Series):
            v = self.ctx.convert(other)
            return Series([a * v for a in self.c], self.ctx)
        k = min(self.order, other.order)
        a, b = self.c, other.c
        out = []
        for n in range(k + 1):
            acc = self.ctx.mpc(0)
            for i in range(n + 1):
                if a[i] and b[n - i]:
                    acc += a[i] * b[n - i]
            out.append(acc)
        return Series(out, self.ctx)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.reciprocal() ** (-n)
        result = Series.const(1, self.ctx, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def reciprocal(self) -> "Series":
        a = self.c
        if a[0] == 0:
            raise ZeroDivisionError("series with zero constant term has no reciprocal")
        inv0 = 1 / a[0]
        out = [inv0]
        for n in range(1, len(a)):
            acc = self.ctx.mpc(0)
            for i in range(1, n + 1):
                acc += a[i] * out[n - i]
            out.append(-acc * inv0)
        return Series(out, self.ctx)

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.reciprocal()
        return self * (1 / self.ctx.convert(other))

    def __rtruediv__(self, other):
        return self._wrap(other) * self.reciprocal()

    def exp(self) -> "Series":
        # f = exp(g)  =>  n f_n = sum_k k g_k f_{n-k}
        g = self.c
        out = [self.ctx.exp(g[0])]
        for n in range(1, len(g)):
            acc = self.ctx.mpc(0)
            for k in range(1, n + 1):
                acc += k * g[k] * out[n - k]
            out.append(acc / n)
        return Series(out, self.ctx)

    def sinh(self) -> "Series":
        e = self.exp()
        return (e - e.reciprocal()) * self.ctx.mpf(0.5)

    def sinhc(self) -> "Series":
        """``sinh(g)/g`` for ``g`` with zero constant term."""
        if self.c[0] != 0:
            raise ValueError("sinhc expects a series with zero constant term")
        g2 = self * self
        out = Series.const(0, self.ctx, self.order)
        term = Series.const(1, self.ctx, self.order)
        # g has valuation >= 1, so g^(2k) vanishes once 2k exceeds the order
        for k in range(self.order // 2 + 1):
            out = out + term * (self.ctx.mpf(1) / factorial(2 * k + 1))
            term = term * g2
        return out

    def shift_up(self, k: int) -> "Series":
        """Multiply by ``x^k``."""
        return Series([0] * k + self.c[: len(self.c) - k], self.ctx)

    def __call__(self, x):
        acc = self.ctx.mpc(0)
        for a in reversed(self.c):
            acc = acc * x + a
        return acc

    def __getitem__(self, k: int):
        return self.c[k]

    def __repr__(self):
        return f"Series({[complex(v) for v in self.c]})"
