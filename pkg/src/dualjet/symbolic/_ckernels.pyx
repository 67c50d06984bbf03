# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sparse polynomial kernels (same API as ``_pykernels``)."""

from cpython.tuple cimport PyTuple_New, PyTuple_SET_ITEM, PyTuple_GET_SIZE, PyTuple_GET_ITEM
from cpython.ref cimport Py_INCREF, PyObject
from cpython.long cimport PyLong_AsLong, PyLong_FromLong
from libc.stdlib cimport malloc, free

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"

cdef extern from "Python.h":
    Py_hash_t PyObject_Hash(object o) except -1
    PyObject* _PyDict_GetItem_KnownHash(object mp, object key, Py_hash_t hash)
    int _PyDict_SetItem_KnownHash(object mp, object key, object item, Py_hash_t hash) except -1
    int _PyDict_DelItem_KnownHash(object mp, object key, Py_hash_t hash) except -1


cdef tuple _build(long* buf, Py_ssize_t k):
    cdef tuple out = PyTuple_New(k)
    cdef Py_ssize_t t
    for t in range(k):
        o = PyLong_FromLong(buf[t])
        Py_INCREF(o)
        PyTuple_SET_ITEM(out, t, o)
    return out


cdef inline long _get(tuple a, Py_ssize_t i):
    return PyLong_AsLong(<object>PyTuple_GET_ITEM(a, i))


cdef tuple _merge(tuple a, tuple b):
    cdef Py_ssize_t la = PyTuple_GET_SIZE(a), lb = PyTuple_GET_SIZE(b)
    if la == 0:
        return b
    if lb == 0:
        return a
    cdef long stackbuf[256]
    cdef long* buf = stackbuf
    cdef bint heap = la + lb > 256
    if heap:
        buf = <long*>malloc((la + lb) * sizeof(long))
        if buf == NULL:
            raise MemoryError()
    cdef Py_ssize_t i = 0, j = 0, k = 0
    cdef long ai, bj, e
    try:
        while i < la and j < lb:
            ai = _get(a, i)
            bj = _get(b, j)
            if ai < bj:
                buf[k] = ai
                buf[k + 1] = _get(a, i + 1)
                k += 2
                i += 2
            elif ai > bj:
                buf[k] = bj
                buf[k + 1] = _get(b, j + 1)
                k += 2
                j += 2
            else:
                e = _get(a, i + 1) + _get(b, j + 1)
                if e != 0:
                    buf[k] = ai
                    buf[k + 1] = e
                    k += 2
                i += 2
                j += 2
        while i < la:
            buf[k] = _get(a, i)
            k += 1
            i += 1
        while j < lb:
            buf[k] = _get(b, j)
            k += 1
            j += 1
        return _build(buf, k)
    finally:
        if heap:
            free(buf)


def mono_mul(tuple a, tuple b):
    return _merge(a, b)


cdef inline void _acc(dict r, tuple m, object v) except *:
    cdef Py_hash_t h = PyObject_Hash(m)
    cdef PyObject* old = _PyDict_GetItem_KnownHash(r, m, h)
    if old == NULL:
        _PyDict_SetItem_KnownHash(r, m, v, h)
    else:
        c = <object>old + v
        if c:
            _PyDict_SetItem_KnownHash(r, m, c, h)
        else:
            _PyDict_DelItem_KnownHash(r, m, h)


def poly_addmul(dict acc, dict p, dict q, c):
    """acc += c * p * q, in place."""
    cdef tuple m1, m2
    for m1, c1 in p.items():
        k1 = c1 * c
        for m2, c2 in q.items():
            _acc(acc, _merge(m1, m2), k1 * c2)


def poly_mul(dict p, dict q):
    cdef dict r = {}
    cdef tuple m1, m2
    if len(p) > len(q):
        p, q = q, p
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            _acc(r, _merge(m1, m2), c1 * c2)
    return r


def poly_addscaled(dict acc, dict p, c):
    """acc += c * p, in place."""
    cdef tuple m
    for m, v in p.items():
        _acc(acc, m, v * c)


def poly_scale(dict p, c):
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


def poly_diff(dict p, dict derivs):
    """Total derivative of ``p`` given per-atom derivative polynomials."""
    cdef dict acc = {}
    cdef tuple m, m2, rest
    cdef Py_ssize_t n, k, t, r
    cdef long e
    cdef long stackbuf[256]
    cdef long* buf
    for m, c in p.items():
        n = PyTuple_GET_SIZE(m)
        for k in range(0, n, 2):
            d = derivs.get(<object>PyTuple_GET_ITEM(m, k))
            if d is None:
                continue
            e = _get(m, k + 1)
            if n > 256:
                lst = list(m)
                if e == 1:
                    del lst[k:k + 2]
                else:
                    lst[k + 1] = e - 1
                rest = tuple(lst)
            else:
                buf = stackbuf
                r = 0
                for t in range(n):
                    if t == k and e == 1:
                        continue
                    if t == k + 1:
                        if e == 1:
                            continue
                        buf[r] = e - 1
                    else:
                        buf[r] = _get(m, t)
                    r += 1
                rest = _build(buf, r)
            ce = c * e
            for m2, c2 in (<dict>d).items():
                _acc(acc, _merge(rest, m2), ce * c2)
    return acc


def poly_atoms(dict p):
    cdef set s = set()
    cdef tuple m
    cdef Py_ssize_t k
    for m in p:
        for k in range(0, PyTuple_GET_SIZE(m), 2):
            s.add(<object>PyTuple_GET_ITEM(m, k))
    return s


def poly_eval(dict p, dict vals):
    """Evaluate at one point; raises ZeroDivisionError on 0 ** negative."""
    cdef double total = 0.0, t, v
    cdef tuple m
    cdef Py_ssize_t k
    cdef long e, j
    for m, c in p.items():
        t = float(c)
        for k in range(0, PyTuple_GET_SIZE(m), 2):
            v = vals[<object>PyTuple_GET_ITEM(m, k)]
            e = _get(m, k + 1)
            if e > 0:
                for j in range(e):
                    t *= v
            else:
                if v == 0.0:
                    raise ZeroDivisionError("zero base with negative exponent")
                for j in range(-e):
                    t /= v
        total += t
    return total


def poly_eval_points(dict p, dict vals, Py_ssize_t npts):
    """Evaluate at ``npts`` points; division by zero yields inf/nan."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(npts)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.empty(npts)
    cdef double[::1] v
    cdef double cf, x, y
    cdef tuple m
    cdef Py_ssize_t k, q
    cdef long e, j
    for m, c in p.items():
        cf = float(c)
        for q in range(npts):
            t[q] = cf
        for k in range(0, PyTuple_GET_SIZE(m), 2):
            v = vals[<object>PyTuple_GET_ITEM(m, k)]
            e = _get(m, k + 1)
            for q in range(npts):
                x = v[q]
                y = 1.0
                if e > 0:
                    for j in range(e):
                        y *= x
                    t[q] *= y
                else:
                    for j in range(-e):
                        y *= x
                    t[q] /= y
        for q in range(npts):
            out[q] += t[q]
    return out
