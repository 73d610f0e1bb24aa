"""Batched forward-mode automatic differentiation on dual numbers.

A :class:`Dual` carries a value array of shape ``S`` and a partials array of
shape ``S + (width,)``: one derivative column per seeded input. Propagating a
whole batch of transcription intervals through the dynamics at once amortizes
python overhead into vectorized numpy ops, which is what makes assembling the
defect Jacobian cheap.

Only the primitives the dynamics and power laws need are implemented (+ - * /,
powers, sqrt, sin, cos, exp). The module-level helpers dispatch on type so the
same kernel code runs on plain arrays (value-only evaluation) and on duals
(value + Jacobian evaluation).
"""
from __future__ import annotations

import numpy as np


def _col(x):
    """Add a trailing axis so a value-shaped array broadcasts against partials."""
    if isinstance(x, np.ndarray) and x.ndim > 0:
        return x[..., None]
    return x


class Dual:
    """Value plus partial derivatives with respect to ``width`` seeded inputs."""

    __slots__ = ("val", "der")
    # Without this numpy would try to consume `array + dual` itself and
    # broadcast against our object; setting it forces the reflected operator.
    __array_ufunc__ = None

    def __init__(self, val, der):
        self.val = val
        self.der = der

    @classmethod
    def variable(cls, val, index: int, width: int) -> "Dual":
        """Seed one independent variable on derivative column ``index``."""
        val = np.asarray(val, dtype=float)
        der = np.zeros(val.shape + (width,))
        der[..., index] = 1.0
        return cls(val, der)

    @classmethod
    def constant(cls, val, width: int) -> "Dual":
        val = np.asarray(val, dtype=float)
        return cls(val, np.zeros(val.shape + (width,)))

    # arithmetic -----------------------------------------------------------

    def __neg__(self):
        return Dual(-self.val, -self.der)

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.der + other.der)
        return Dual(self.val + other, self.der)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.der - other.der)
        return Dual(self.val - other, self.der)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.der)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.val * other.val,
                self.der * _col(other.val) + other.der * _col(self.val),
            )
        return Dual(self.val * other, self.der * _col(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            q = self.val / other.val
            return Dual(q, (self.der - other.der * _col(q)) / _col(other.val))
        return Dual(self.val / other, self.der / _col(other))

    def __rtruediv__(self, other):
        q = other / self.val
        return Dual(q, self.der * _col(-q / self.val))

    def __pow__(self, n):
        if isinstance(n, Dual):
            raise TypeError("dual exponents are not supported")
        return Dual(self.val**n, self.der * _col(n * self.val ** (n - 1)))

    # elementary functions -------------------------------------------------

    def sqrt(self):
        root = np.sqrt(self.val)
        return Dual(root, self.der / _col(2.0 * root))

    def sin(self):
        return Dual(np.sin(self.val), self.der * _col(np.cos(self.val)))

    def cos(self):
        return Dual(np.cos(self.val), self.der * _col(-np.sin(self.val)))

    def exp(self):
        e = np.exp(self.val)
        return Dual(e, self.der * _col(e))

    def __repr__(self):
        return f"Dual(val={self.val!r})"


# type-dispatch helpers so kernels run on floats, arrays, and duals alike ----


def sqrt(x):
    return x.sqrt() if isinstance(x, Dual) else np.sqrt(x)


def sin(x):
    return x.sin() if isinstance(x, Dual) else np.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Dual) else np.cos(x)


def exp(x):
    return x.exp() if isinstance(x, Dual) else np.exp(x)


def value(x):
    """Strip partials; identity on non-duals."""
    return x.val if isinstance(x, Dual) else x


def clip_min(x, lo):
    """Lower clamp that is exact (identity) wherever value(x) > lo.

    On the clamped branch the derivative is zero. Used to keep kernels
    totally defined when an optimizer's line search wanders outside the
    physical region; the clamp level must sit strictly below any value a
    feasible point can take so converged solutions never touch the kink.
    """
    if isinstance(x, Dual):
        mask = x.val > lo
        return Dual(np.where(mask, x.val, lo), x.der * _col(mask.astype(float)))
    return np.maximum(x, lo)


def clip_max(x, hi):
    """Upper clamp, mirror of clip_min."""
    if isinstance(x, Dual):
        mask = x.val < hi
        return Dual(np.where(mask, x.val, hi), x.der * _col(mask.astype(float)))
    return np.minimum(x, hi)


def seed_components(components) -> list:
    """Seed a list of same-shaped arrays as independent variables.

    Returns duals whose partial width equals ``len(components)``, with the
    i-th dual seeded on column i.
    """
    width = len(components)
    return [Dual.variable(c, i, width) for i, c in enumerate(components)]


def jacobian(fn, x):
    """Dense Jacobian of a small vector function via one forward sweep.

    ``fn`` maps a list of scalar duals to a list of dual outputs. Returns
    ``(values, jac)`` with shapes (m,) and (m, n). Intended for tests and toy
    problems, not the batched transcription path.
    """
    x = np.asarray(x, dtype=float)
    seeds = [Dual.variable(xi, i, x.size) for i, xi in enumerate(x)]
    outs = fn(seeds)
    vals = np.array([value(o) for o in outs], dtype=float)
    jac = np.vstack([
        o.der if isinstance(o, Dual) else np.zeros(x.size) for o in outs
    ])
    return vals, jac
