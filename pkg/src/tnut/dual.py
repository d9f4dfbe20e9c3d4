"""Tagged dual numbers for nested forward-mode differentiation.

A ``Dual`` is ``re + eps * e`` with ``e**2 == 0``.  Parts may be floats,
complex numbers, numpy arrays (vectorised seeds or batches) or other
``Dual`` objects carrying a *lower* tag.  Every seeding call draws a fresh
tag, so nesting derivative computations never confuses perturbations: in a
binary operation the operand with the larger tag is the active one and the
other is treated as a constant.
"""

from __future__ import annotations

import itertools
import math
from typing import Any, Callable, Sequence

import numpy as np

_tags = itertools.count(1)


def new_tag() -> int:
    return next(_tags)


class Dual:
    __slots__ = ("re", "eps", "tag")
    # let ndarray (op) Dual fall through to Dual's reflected methods
    __array_ufunc__ = None

    def __init__(self, re: Any, eps: Any, tag: int):
        self.re = re
        self.eps = eps
        self.tag = tag

    def __repr__(self) -> str:
        return f"Dual({self.re!r}, {self.eps!r}, tag={self.tag})"

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        t = _top(self, other)
        ar, ae = part(self, t)
        br, be = part(other, t)
        return Dual(ar + br, ae + be, t)

    __radd__ = __add__

    def __sub__(self, other):
        t = _top(self, other)
        ar, ae = part(self, t)
        br, be = part(other, t)
        return Dual(ar - br, ae - be, t)

    def __rsub__(self, other):
        t = _top(self, other)
        ar, ae = part(self, t)
        br, be = part(other, t)
        return Dual(br - ar, be - ae, t)

    def __mul__(self, other):
        t = _top(self, other)
        ar, ae = part(self, t)
        br, be = part(other, t)
        return Dual(ar * br, _madd(ar, be, ae, br), t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return other * reciprocal(self)

    def __neg__(self):
        return Dual(-self.re, -self.eps, self.tag)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if isinstance(n, Dual):
            return exp(n * log(self))
        if n == 0:
            return 1.0
        if n == 1:
            return self
        if n == 2:
            return self * self
        return Dual(self.re**n, n * self.re ** (n - 1) * self.eps, self.tag)

    def __rpow__(self, base):
        return exp(self * math.log(base))

    # comparisons use the innermost real value
    def __lt__(self, other):
        return value(self) < value(other)

    def __le__(self, other):
        return value(self) <= value(other)

    def __gt__(self, other):
        return value(self) > value(other)

    def __ge__(self, other):
        return value(self) >= value(other)

    def __abs__(self):
        return -self if np.all(np.real(value(self)) < 0) else self

    def __float__(self):
        return float(value(self))

    # hooks used when numpy ufuncs meet object arrays of Duals
    def sin(self):
        return sin(self)

    def cos(self):
        return cos(self)

    def sqrt(self):
        return sqrt(self)

    def exp(self):
        return exp(self)

    def log(self):
        return log(self)

    def conjugate(self):
        return Dual(np.conj(self.re), np.conj(self.eps), self.tag)


def _is_zero(x) -> bool:
    return isinstance(x, (int, float)) and x == 0


def _madd(a, b, c, d):
    """a*b + c*d, skipping literal zero factors."""
    if _is_zero(b):
        return 0.0 if _is_zero(d) else c * d
    if _is_zero(d):
        return a * b
    return a * b + c * d


def _top(a, b) -> int:
    ta = a.tag if isinstance(a, Dual) else 0
    tb = b.tag if isinstance(b, Dual) else 0
    return ta if ta > tb else tb


def part(x, tag: int):
    """(re, eps) of ``x`` with respect to ``tag``; constants get eps 0."""
    if isinstance(x, Dual) and x.tag == tag:
        return x.re, x.eps
    return x, 0.0


def value(x):
    """Strip every dual layer and return the primal value."""
    while isinstance(x, Dual):
        x = x.re
    return x


# elementary functions -----------------------------------------------------


def _chain(x: Dual, f, df):
    return Dual(f(x.re), df(x.re) * x.eps if not _is_zero(x.eps) else 0.0, x.tag)


def sin(x):
    if isinstance(x, Dual):
        return _chain(x, sin, cos)
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return _chain(x, cos, lambda u: -sin(u))
    return np.cos(x)


def sqrt(x):
    if isinstance(x, Dual):
        s = sqrt(x.re)
        return Dual(s, x.eps / (2.0 * s) if not _is_zero(x.eps) else 0.0, x.tag)
    return np.sqrt(x)


def exp(x):
    if isinstance(x, Dual):
        e = exp(x.re)
        return Dual(e, e * x.eps if not _is_zero(x.eps) else 0.0, x.tag)
    return np.exp(x)


def log(x):
    if isinstance(x, Dual):
        return _chain(x, log, reciprocal)
    return np.log(x)


def reciprocal(x):
    if isinstance(x, Dual):
        inv = reciprocal(x.re)
        return Dual(inv, -(inv * inv) * x.eps if not _is_zero(x.eps) else 0.0, x.tag)
    return 1.0 / x


# derivative helpers -------------------------------------------------------


def seed(point: Sequence, direction: Sequence, tag: int | None = None) -> list:
    """Lift ``point`` to duals moving along ``direction`` under one fresh tag."""
    t = new_tag() if tag is None else tag
    return [Dual(p, d, t) for p, d in zip(point, direction)]


def seed_gradient(point: Sequence, tag: int | None = None) -> list:
    """Lift ``point`` so that each eps part is a unit row; one pass yields a gradient.

    Eps parts have shape ``(n,) + shape(point[k])`` so batched (array) points work.
    """
    t = new_tag() if tag is None else tag
    n = len(point)
    out = []
    for k, p in enumerate(point):
        e = np.zeros((n,) + np.shape(p))
        e[k] = 1.0
        out.append(Dual(p, e, t))
    return out


def eps_of(y, tag: int, shape=()):
    """Derivative part of ``y`` for ``tag`` (zeros if ``y`` is constant)."""
    _, e = part(y, tag)
    if _is_zero(e) and shape:
        return np.zeros(shape)
    return e


def derivative(f: Callable, x: float) -> float:
    t = new_tag()
    return eps_of(f(Dual(x, 1.0, t)), t)


def directional(f: Callable, point: Sequence, direction: Sequence):
    """(f(point), directional derivative) with an array-valued ``f`` allowed."""
    t = new_tag()
    y = f(seed(point, direction, t))
    return _map(lambda v: part(v, t)[0], y), _map(lambda v: part(v, t)[1], y)


def gradient(f: Callable, point: Sequence) -> tuple[Any, np.ndarray]:
    """Value and gradient of scalar ``f`` at ``point`` in one forward pass."""
    t = new_tag()
    y = f(seed_gradient(point, t))
    re, e = part(y, t)
    if _is_zero(e):
        e = np.zeros(len(point))
    return re, e


def hessian_pair(point: Sequence, i: int, j: int) -> list:
    """Second-order seed: f(X) carries f, d_i f, d_j f and d_i d_j f.

    Returns coordinates X_k = Dual_B(Dual_A(p_k, [k==i]), Dual_A([k==j], 0)).
    """
    ta = new_tag()
    tb = new_tag()
    return [
        Dual(Dual(p, 1.0 if k == i else 0.0, ta), Dual(1.0 if k == j else 0.0, 0.0, ta), tb)
        for k, p in enumerate(point)
    ]


def hessian_parts(y, tags: tuple[int, int]):
    """Split a value produced from :func:`hessian_pair` seeds into (f, d_i, d_j, d_ij)."""
    ta, tb = tags
    re_b, eps_b = part(y, tb)
    f, di = part(re_b, ta)
    dj, dij = part(eps_b, ta)
    return f, di, dj, dij


def _map(fn, y):
    if isinstance(y, np.ndarray) and y.dtype == object:
        out = np.empty(y.shape, dtype=object)
        for idx, v in np.ndenumerate(y):
            out[idx] = fn(v)
        return densify(out)
    if isinstance(y, (list, tuple)):
        return densify(np.array([_map(fn, v) for v in y], dtype=object))
    return fn(y)


def densify(a):
    """Convert an object array to a float/complex array when no duals remain."""
    if isinstance(a, np.ndarray) and a.dtype == object:
        flat = a.ravel()
        if not any(isinstance(v, Dual) for v in flat):
            if any(isinstance(v, complex) or np.iscomplexobj(v) for v in flat):
                return a.astype(complex)
            return a.astype(float)
    return a


def has_dual(*xs) -> bool:
    for x in xs:
        if isinstance(x, Dual):
            return True
        if isinstance(x, np.ndarray) and x.dtype == object:
            if any(isinstance(v, Dual) for v in x.ravel()):
                return True
        elif isinstance(x, (list, tuple)) and has_dual(*x):
            return True
    return False
