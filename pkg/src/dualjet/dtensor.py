"""Distinguished tensors with typed index slots and their covariant derivatives.

A slot has a class (``"T"`` temporal, ``"S"`` spatial, ``"V"`` vertical)
and a variance.  Vertical slots range over pairs (a, i), flattened to
``a*n + i`` in the 0-based component array; a contravariant vertical slot
matches the pattern ^(a)_(i), a covariant one ^(i)_(a).

Each derivative appends one covariant slot of its direction class at the
end of the signature.  The correction for a slot is chosen from a fixed
table keyed by (class, variance):

============  =====================  ==========================
slot          contravariant          covariant
============  =====================  ==========================
T             ``+ T[f] B[u, f, g]``  ``- T[f] B[f, u, g]``
S             ``+ T[r] B[u, r, g]``  ``- T[r] B[r, u, g]``
V             ``- T[F] B[u, F, g]``  ``+ T[F] B[F, u, g]``
============  =====================  ==========================

where ``B`` is the block of the derivative direction for that slot class
(see :attr:`NLinearConnection.frame_blocks`).
"""

from collections import namedtuple

import numpy as np

from . import arrays
from .symbolic import Expr, sum_products

__all__ = [
    "Slot",
    "DTensor",
    "DerivativeEngine",
    "cov_deriv_hT",
    "cov_deriv_hM",
    "cov_deriv_v",
    "covariant_derivative",
    "T_UP",
    "T_DN",
    "S_UP",
    "S_DN",
    "V_UP",
    "V_DN",
]


class Slot(namedtuple("Slot", "cls contra")):
    __slots__ = ()

    def size(self, chart):
        return {"T": chart.m, "S": chart.n, "V": chart.m * chart.n}[self.cls]

    def __str__(self):
        return f"{self.cls}{'^' if self.contra else '_'}"


T_UP, T_DN = Slot("T", True), Slot("T", False)
S_UP, S_DN = Slot("S", True), Slot("S", False)
V_UP, V_DN = Slot("V", True), Slot("V", False)

_SIGN = {("T", True): 1, ("S", True): 1, ("V", True): -1, ("T", False): -1, ("S", False): -1, ("V", False): 1}


class DTensor:
    """Dense array of Exprs with a typed signature."""

    __slots__ = ("chart", "signature", "comps")

    def __init__(self, chart, signature, comps):
        self.chart = chart
        self.signature = tuple(Slot(*s) for s in signature)
        shape = tuple(s.size(chart) for s in self.signature)
        if not (isinstance(comps, np.ndarray) and comps.dtype == object and all(isinstance(e, Expr) for e in comps.flat)):
            comps = arrays.as_expr_array(comps, shape, chart, "components")
        if comps.shape != shape:
            raise ValueError(f"components have shape {comps.shape}, signature needs {shape}")
        self.comps = comps

    @classmethod
    def zeros(cls, chart, signature):
        signature = tuple(Slot(*s) for s in signature)
        return cls(chart, signature, arrays.zeros(tuple(s.size(chart) for s in signature)))

    @classmethod
    def from_function(cls, chart, signature, fn):
        """Components from ``fn(*idx)`` with 0-based (flattened) indices."""
        t = cls.zeros(chart, signature)
        for idx in arrays.indices(t.comps.shape):
            v = fn(*idx)
            t.comps[idx] = v if isinstance(v, Expr) else Expr(v)
        return t

    @property
    def shape(self):
        return self.comps.shape

    @property
    def rank(self):
        return len(self.signature)

    def _key(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        if len(idx) != self.rank:
            raise IndexError(f"expected {self.rank} indices, got {len(idx)}")
        out = []
        n = self.chart.n
        for slot, k in zip(self.signature, idx):
            if slot.cls == "V":
                if not (isinstance(k, tuple) and len(k) == 2):
                    raise IndexError(f"a vertical slot takes an (a, i) pair, got {k!r}")
                a, i = k
                out.append((a - 1) * n + (i - 1))
            else:
                out.append(k - 1)
        return tuple(out)

    def __getitem__(self, idx):
        """1-based access; vertical slots take an (a, i) pair."""
        return self.comps[self._key(idx)]

    def nonzero(self):
        """(1-based index, Expr) pairs of nonzero components."""
        for idx, e in arrays.nonzero_items(self.comps):
            yield self.external_index(idx), e

    def external_index(self, idx):
        n = self.chart.n
        out = []
        for slot, k in zip(self.signature, idx):
            if slot.cls == "V":
                a, i = divmod(k, n)
                out.append((a + 1, i + 1))
            else:
                out.append(k + 1)
        return tuple(out)

    def is_zero(self):
        return arrays.all_zero(self.comps)

    def __eq__(self, other):
        return (
            isinstance(other, DTensor)
            and self.signature == other.signature
            and arrays.equal(self.comps, other.comps)
        )

    __hash__ = None

    def __sub__(self, other):
        if self.signature != other.signature:
            raise ValueError("signature mismatch")
        return DTensor(self.chart, self.signature, self.comps - other.comps)

    def __add__(self, other):
        if self.signature != other.signature:
            raise ValueError("signature mismatch")
        return DTensor(self.chart, self.signature, self.comps + other.comps)

    def scale(self, f):
        return DTensor(self.chart, self.signature, np.vectorize(lambda e: e * f, otypes=[object])(self.comps))

    def __repr__(self):
        sig = ",".join(map(str, self.signature))
        return f"DTensor[{sig}] shape={self.shape}"


class DerivativeEngine:
    """Covariant derivatives with one connection, caching frame derivatives."""

    def __init__(self, conn):
        self.conn = conn
        self.chart = conn.chart
        self.N = conn.N
        self._frame = {}
        self._tables = {}
        fb = conn.frame_blocks
        for d in ("T", "S", "V"):
            for k in ("T", "S", "V"):
                B = fb[d][k]
                size_k, _, size_d = B.shape
                up = {}
                dn = {}
                for u in range(size_k):
                    for g in range(size_d):
                        up[u, g] = [(f, B[u, f, g]) for f in range(size_k) if B[u, f, g]]
                        dn[u, g] = [(f, B[f, u, g]) for f in range(size_k) if B[f, u, g]]
                self._tables[d, k, True] = up
                self._tables[d, k, False] = dn

    def frame(self, e):
        r = self._frame.get(e)
        if r is None:
            r = self._frame[e] = self.N.frame_derivatives(e)
        return r

    def leading(self, e, d):
        if not e:
            return None
        dt, dx, dp = self.frame(e)
        return {"T": dt, "S": dx, "V": dp}[d]

    def derivative(self, T, d):
        """Covariant derivative in direction class ``d`` (``"T"``, ``"S"``, ``"V"``)."""
        ch = self.chart
        size_d = Slot(d, False).size(ch)
        sig = T.signature + (Slot(d, False),)
        out = np.empty(T.shape + (size_d,), dtype=object)
        comps = T.comps
        tables = [(pos, _SIGN[s.cls, s.contra], self._tables[d, s.cls, s.contra]) for pos, s in enumerate(T.signature)]
        for idx in arrays.indices(T.shape):
            lead = self.leading(comps[idx], d)
            for g in range(size_d):
                terms = []
                for pos, sign, table in tables:
                    pairs = table[idx[pos], g]
                    if not pairs:
                        continue
                    j = list(idx)
                    for f, coef in pairs:
                        j[pos] = f
                        x = comps[tuple(j)]
                        if x:
                            terms.append((sign, x, coef))
                base = lead[g] if lead is not None else None
                out[idx + (g,)] = sum_products(terms, base)
        return DTensor(ch, sig, out)


def _engine(conn):
    from .connections import HNormalConnection

    if isinstance(conn, HNormalConnection):
        conn = conn.completed
    return conn.engine


def covariant_derivative(T, conn, d):
    return _engine(conn).derivative(T, d)


def cov_deriv_hT(T, conn):
    """T-horizontal covariant derivative; appends a temporal covariant slot."""
    return covariant_derivative(T, conn, "T")


def cov_deriv_hM(T, conn):
    """M-horizontal covariant derivative; appends a spatial covariant slot."""
    return covariant_derivative(T, conn, "S")


def cov_deriv_v(T, conn):
    """Vertical covariant derivative; appends a vertical covariant slot."""
    return covariant_derivative(T, conn, "V")
