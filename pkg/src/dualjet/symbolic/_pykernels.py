"""Pure-Python sparse polynomial kernels.

A polynomial is a ``dict`` mapping a monomial to a nonzero rational
coefficient.  A monomial is a flat tuple ``(id0, e0, id1, e1, ...)`` with
strictly increasing atom ids and nonzero integer exponents.  The compiled
module ``_ckernels`` exposes exactly the same functions.
"""

import numpy as np

BACKEND = "python"


def mono_mul(a, b):
    la = len(a)
    lb = len(b)
    if not la:
        return b
    if not lb:
        return a
    out = []
    i = j = 0
    while i < la and j < lb:
        ai = a[i]
        bj = b[j]
        if ai < bj:
            out.append(ai)
            out.append(a[i + 1])
            i += 2
        elif ai > bj:
            out.append(bj)
            out.append(b[j + 1])
            j += 2
        else:
            e = a[i + 1] + b[j + 1]
            if e:
                out.append(ai)
                out.append(e)
            i += 2
            j += 2
    if i < la:
        out.extend(a[i:])
    if j < lb:
        out.extend(b[j:])
    return tuple(out)


def poly_addmul(acc, p, q, c):
    """acc += c * p * q, in place."""
    get = acc.get
    for m1, c1 in p.items():
        k1 = c1 * c
        for m2, c2 in q.items():
            m = mono_mul(m1, m2)
            v = get(m)
            if v is None:
                acc[m] = k1 * c2
            else:
                v = v + k1 * c2
                if v:
                    acc[m] = v
                else:
                    del acc[m]


def poly_mul(p, q):
    r = {}
    if len(p) > len(q):
        p, q = q, p
    poly_addmul(r, p, q, 1)
    return r


def poly_addscaled(acc, p, c):
    """acc += c * p, in place."""
    get = acc.get
    for m, v0 in p.items():
        v = get(m)
        if v is None:
            acc[m] = v0 * c
        else:
            v = v + v0 * c
            if v:
                acc[m] = v
            else:
                del acc[m]


def poly_scale(p, c):
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


def poly_diff(p, derivs):
    """Total derivative of ``p`` given per-atom derivative polynomials.

    ``derivs`` maps an atom id to the polynomial of its derivative; atoms
    absent from the mapping are treated as constants.
    """
    acc = {}
    for m, c in p.items():
        n = len(m)
        for k in range(0, n, 2):
            d = derivs.get(m[k])
            if d is None:
                continue
            e = m[k + 1]
            if e == 1:
                rest = m[:k] + m[k + 2:]
            else:
                rest = m[:k + 1] + (e - 1,) + m[k + 2:]
            poly_addmul(acc, {rest: c * e}, d, 1)
    return acc


def poly_atoms(p):
    s = set()
    for m in p:
        s.update(m[0::2])
    return s


def poly_eval(p, vals):
    """Evaluate at one point; ``vals`` maps atom id to float.

    Raises ZeroDivisionError when a zero base carries a negative exponent.
    """
    total = 0.0
    for m, c in p.items():
        t = float(c)
        for k in range(0, len(m), 2):
            t *= vals[m[k]] ** m[k + 1]
        total += t
    return total


def poly_eval_points(p, vals, npts):
    """Evaluate at ``npts`` points; ``vals`` maps atom id to float64 arrays.

    Division by zero yields inf/nan instead of raising.
    """
    out = np.zeros(npts)
    with np.errstate(all="ignore"):
        for m, c in p.items():
            t = np.full(npts, float(c))
            for k in range(0, len(m), 2):
                e = m[k + 1]
                v = vals[m[k]]
                if e == 1:
                    t *= v
                elif e > 0:
                    t *= v ** e
                else:
                    t /= v ** (-e)
            out += t
    return out
