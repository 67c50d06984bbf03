"""Small helpers for dense object arrays of :class:`Expr`."""

import itertools

import numpy as np

from .symbolic import ZERO, Expr, parse_expr
from .symbolic.expr import _coerce


def zeros(shape):
    a = np.empty(shape, dtype=object)
    a.fill(ZERO)
    return a


def as_expr_array(data, shape, chart=None, name="array"):
    """Object array of Exprs from nested lists of Exprs, numbers or strings."""
    a = np.empty(shape, dtype=object)
    src = np.asarray(data, dtype=object)
    if src.shape != tuple(shape):
        raise ValueError(f"{name} has shape {src.shape}, expected {tuple(shape)}")
    for idx in itertools.product(*map(range, shape)):
        v = src[idx]
        if isinstance(v, str):
            v = parse_expr(v, chart)
        else:
            e = _coerce(v)
            if e is None:
                raise TypeError(f"{name}{list(idx)}: cannot convert {type(v).__name__} to Expr")
            v = e
        a[idx] = v
    return a


def indices(shape):
    return itertools.product(*map(range, shape))


def nonzero_items(a):
    for idx in indices(a.shape):
        v = a[idx]
        if v:
            yield idx, v


def all_zero(a):
    return all(not v for v in a.flat)


def equal(a, b):
    return a.shape == b.shape and all(x == y for x, y in zip(a.flat, b.flat))


def is_expr(x):
    return isinstance(x, Expr)
