"""N-linear connections: nine coefficient blocks, h-normal completion, Berwald.

Block arrays are 0-based numpy object arrays laid out as follows (letters
are the 1-based indices of the usual notation, shifted down by one):

=========  ======================  ==========================================
attribute  shape                   entry
=========  ======================  ==========================================
A_tt       (m, m, m)               A^a_bc                      -> [a, b, c]
A_ss       (n, n, m)               A^i_jc                      -> [i, j, c]
A_vv       (m, n, m, n, m)         A^(a)(j)_(i)(b)c            -> [a, i, b, j, c]
H_tt       (m, m, n)               H^a_bk                      -> [a, b, k]
H_ss       (n, n, n)               H^i_jk                      -> [i, j, k]
H_vv       (m, n, m, n, n)         H^(a)(j)_(i)(b)k            -> [a, i, b, j, k]
C_tt       (m, m, n, m)            C^a(k)_b(c)                 -> [a, b, k, c]
C_ss       (n, n, n, m)            C^i(k)_j(c)                 -> [i, j, k, c]
C_vv       (m, n, m, n, n, m)      C^(a)(j)(k)_(i)(b)(c)       -> [a, i, b, j, k, c]
=========  ======================  ==========================================
"""

import random
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import arrays
from .chart import (
    JetChart,
    NonlinearConnection,
    SpatialMetric,
    TemporalMetric,
    canonical_nonlinear_connection,
    christoffel_spatial,
    christoffel_temporal,
)
from .symbolic import ONE, ZERO, Expr, const

__all__ = [
    "NLinearConnection",
    "HNormalConnection",
    "NotCartanError",
    "BLOCK_NAMES",
    "complete_hnormal",
    "berwald_connection",
    "is_cartan",
    "random_cartan",
    "random_polynomial",
    "normalization_tensor",
    "verify_normalization",
]

BLOCK_NAMES = ("A_tt", "A_ss", "A_vv", "H_tt", "H_ss", "H_vv", "C_tt", "C_ss", "C_vv")


class NotCartanError(ValueError):
    """The identity suites need an h-normal connection of Cartan type."""


def _block_shapes(m, n):
    return {
        "A_tt": (m, m, m),
        "A_ss": (n, n, m),
        "A_vv": (m, n, m, n, m),
        "H_tt": (m, m, n),
        "H_ss": (n, n, n),
        "H_vv": (m, n, m, n, n),
        "C_tt": (m, m, n, m),
        "C_ss": (n, n, n, m),
        "C_vv": (m, n, m, n, n, m),
    }


class NLinearConnection:
    """A general N-linear connection given by its nine adapted blocks.

    ``source`` records the h-normal connection it was completed from, if
    any; the closed-form torsion and curvature formulas require it.
    """

    def __init__(self, N, blocks, source=None):
        self.N = N
        self.chart = N.chart
        shapes = _block_shapes(self.chart.m, self.chart.n)
        for name in BLOCK_NAMES:
            data = blocks.get(name)
            arr = arrays.zeros(shapes[name]) if data is None else arrays.as_expr_array(data, shapes[name], self.chart, name)
            setattr(self, name, arr)
        self.source = source

    def block(self, name):
        return getattr(self, name)

    def component(self, name, *idx):
        """1-based access, e.g. ``component("A_vv", a, i, b, j, c)``."""
        return getattr(self, name)[tuple(k - 1 for k in idx)]

    def blocks(self):
        return {name: getattr(self, name) for name in BLOCK_NAMES}

    def perturbed(self, name, idx, delta=1):
        """Copy with one 1-based block entry shifted by ``delta``; drops ``source``."""
        blocks = {k: v.copy() for k, v in self.blocks().items()}
        key = tuple(k - 1 for k in idx)
        blocks[name][key] = blocks[name][key] + delta
        return NLinearConnection(self.N, blocks)

    def __eq__(self, other):
        return (
            isinstance(other, NLinearConnection)
            and self.N == other.N
            and all(arrays.equal(getattr(self, k), getattr(other, k)) for k in BLOCK_NAMES)
        )

    __hash__ = None

    @cached_property
    def engine(self):
        """Covariant-derivative engine bound to this connection."""
        from .dtensor import DerivativeEngine

        return DerivativeEngine(self)

    @cached_property
    def frame_blocks(self):
        """Blocks regrouped by derivative direction and slot class.

        ``frame_blocks[d][k]`` is a (size_k, size_k, size_d) array with
        ``d, k`` in ``"T", "S", "V"``; vertical indices are flattened as
        a*n + i.  Entry ``[u, v, g]`` is the coefficient used by the
        covariant derivative: a contravariant slot of class k gains
        ``+T[v] * B[u, v, g]`` (T, S) or ``-T[v] * B[u, v, g]`` (V).
        """
        m, n = self.chart.m, self.chart.n
        mn = m * n
        out = {}
        for d, (tt, ss, vv) in {
            "T": (self.A_tt, self.A_ss, self.A_vv),
            "S": (self.H_tt, self.H_ss, self.H_vv),
            "V": (self.C_tt, self.C_ss, self.C_vv),
        }.items():
            if d == "V":
                # (c, k) direction pair flattened; stored block order is [.., k, c]
                tt = np.moveaxis(tt, (2, 3), (3, 2)).reshape(m, m, mn)
                ss = np.moveaxis(ss, (2, 3), (3, 2)).reshape(n, n, mn)
                vv = np.moveaxis(vv, (4, 5), (5, 4)).reshape(mn, mn, mn)
            else:
                vv = vv.reshape(mn, mn, vv.shape[-1])
            out[d] = {"T": tt, "S": ss, "V": vv}
        return out


class HNormalConnection:
    """h-normal N-linear connection from its four effective blocks.

    ``A[i, j, c] = A^i_jc``, ``H[i, j, k] = H^i_jk`` and
    ``C[i, j, k, c] = C^i(k)_j(c)`` (0-based); chi comes from ``h``.
    """

    def __init__(self, h, N, A=None, H=None, C=None):
        chart = N.chart
        if h.chart != chart:
            raise ValueError("metric and nonlinear connection live on different charts")
        m, n = chart.m, chart.n
        self.chart = chart
        self.h = h
        self.N = N
        self.chi = christoffel_temporal(h)
        self.A = arrays.zeros((n, n, m)) if A is None else arrays.as_expr_array(A, (n, n, m), chart, "A")
        self.H = arrays.zeros((n, n, n)) if H is None else arrays.as_expr_array(H, (n, n, n), chart, "H")
        self.C = arrays.zeros((n, n, n, m)) if C is None else arrays.as_expr_array(C, (n, n, n, m), chart, "C")

    def effective(self, name):
        return {"chi": self.chi, "A": self.A, "H": self.H, "C": self.C}[name]

    def perturbed(self, name, idx, delta=1):
        """Copy with one 1-based entry of A, H or C shifted by ``delta``."""
        arrs = {"A": self.A.copy(), "H": self.H.copy(), "C": self.C.copy()}
        key = tuple(k - 1 for k in idx)
        arrs[name][key] = arrs[name][key] + delta
        return HNormalConnection(self.h, self.N, **arrs)

    @cached_property
    def completed(self):
        return complete_hnormal(self)

    def __eq__(self, other):
        return (
            isinstance(other, HNormalConnection)
            and self.N == other.N
            and arrays.equal(self.h.matrix, other.h.matrix)
            and all(arrays.equal(self.effective(k), other.effective(k)) for k in ("A", "H", "C"))
        )

    __hash__ = None


def complete_hnormal(hn):
    """The nine blocks of an h-normal connection from (chi, A, H, C)."""
    ch = hn.chart
    m, n = ch.m, ch.n
    shapes = _block_shapes(m, n)
    A_vv = arrays.zeros(shapes["A_vv"])
    H_vv = arrays.zeros(shapes["H_vv"])
    C_vv = arrays.zeros(shapes["C_vv"])
    for a in range(m):
        for i in range(n):
            for b in range(m):
                for j in range(n):
                    for c in range(m):
                        v = ZERO
                        if a == b:
                            v = v + hn.A[j, i, c]
                        if i == j:
                            v = v - hn.chi[a, b, c]
                        A_vv[a, i, b, j, c] = v
                    if a == b:
                        for k in range(n):
                            H_vv[a, i, b, j, k] = hn.H[j, i, k]
                            for c in range(m):
                                C_vv[a, i, b, j, k, c] = hn.C[j, i, k, c]
    blocks = {
        "A_tt": hn.chi,
        "A_ss": hn.A,
        "A_vv": A_vv,
        "H_ss": hn.H,
        "H_vv": H_vv,
        "C_ss": hn.C,
        "C_vv": C_vv,
    }
    return NLinearConnection(hn.N, blocks, source=hn)


def berwald_connection(h, phi, chart=None):
    """The Berwald connection (chi, 0, Gamma, 0) over the canonical N0."""
    chart = chart or h.chart
    chi = christoffel_temporal(h)
    Gamma = christoffel_spatial(phi)
    N0 = canonical_nonlinear_connection(chi, Gamma, chart)
    return HNormalConnection(h, N0, H=Gamma)


def is_cartan(hn):
    """H^i_jk = H^i_kj and C^i(k)_j(c) = C^k(i)_j(c) for all indices."""
    if isinstance(hn, NLinearConnection):
        if hn.source is None:
            return False
        hn = hn.source
    n, m = hn.chart.n, hn.chart.m
    for i in range(n):
        for j in range(n):
            for k in range(j + 1, n):
                if hn.H[i, j, k] != hn.H[i, k, j]:
                    return False
    for i in range(n):
        for k in range(i + 1, n):
            for j in range(n):
                for c in range(m):
                    if hn.C[i, j, k, c] != hn.C[k, j, i, c]:
                        return False
    return True


# ---------------------------------------------------------------------------
# Random test data


def random_polynomial(rng, symbols, degree=2, max_terms=3, coeff_range=2):
    """Sparse polynomial with small nonzero integer coefficients."""
    nterms = rng.randint(1, max_terms)
    out = ZERO
    for _ in range(nterms):
        deg = rng.randint(0, degree)
        term = const(rng.choice([c for c in range(-coeff_range, coeff_range + 1) if c]))
        for _ in range(deg):
            term = term * rng.choice(symbols)
        out = out + term
    return out


def random_cartan(chart, seed=0, degree=2, density=0.5, max_terms=3, h=None, N=None, canonical_N=False):
    """A seeded random h-normal connection of Cartan type.

    ``A`` and ``C`` are sparse polynomials in all coordinates, ``H`` is
    symmetrized in its lower pair and ``C`` in the (i, k) pair.  Without
    an explicit ``h`` a curved default is used (``1`` for m = 1,
    ``diag(1, t1^4)`` for m = 2, identity padding beyond).  ``N`` is random
    unless ``canonical_N`` is set.
    """
    rng = random.Random(seed)
    m, n = chart.m, chart.n
    coords = list(chart.T) + list(chart.X) + [p for row in chart.P for p in row]

    def rp():
        if rng.random() >= density:
            return ZERO
        return random_polynomial(rng, coords, degree, max_terms)

    if h is None:
        hm = [[ONE if a == b else ZERO for b in range(m)] for a in range(m)]
        if m >= 2:
            hm[1][1] = chart.T[0] ** 4
        h = TemporalMetric(chart, hm)
    if N is None:
        if canonical_N:
            phi = SpatialMetric(chart, np.identity(n, dtype=int).tolist())
            N = canonical_nonlinear_connection(christoffel_temporal(h), christoffel_spatial(phi), chart)
        else:
            N1 = arrays.zeros((m, n, m))
            N2 = arrays.zeros((m, n, n))
            for idx in arrays.indices(N1.shape):
                N1[idx] = rp()
            for idx in arrays.indices(N2.shape):
                N2[idx] = rp()
            N = NonlinearConnection(chart, N1, N2)
    A = arrays.zeros((n, n, m))
    H = arrays.zeros((n, n, n))
    C = arrays.zeros((n, n, n, m))
    for idx in arrays.indices(A.shape):
        A[idx] = rp()
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                H[i, j, k] = H[i, k, j] = rp()
    for i in range(n):
        for k in range(i, n):
            for j in range(n):
                for c in range(m):
                    C[i, j, k, c] = C[k, j, i, c] = rp()
    return HNormalConnection(h, N, A=A, H=H, C=C)


# ---------------------------------------------------------------------------
# Normalization tensor


def normalization_tensor(hn):
    """J^(i)_(a)bj = h_ab delta^i_j as a d-tensor with slots [V_, T_, S_]."""
    from .dtensor import DTensor, Slot

    ch = hn.chart
    m, n = ch.m, ch.n
    comps = arrays.zeros((m * n, m, n))
    for a in range(m):
        for i in range(n):
            for b in range(m):
                comps[a * n + i, b, i] = hn.h.matrix[a, b]
    return DTensor(ch, (Slot("V", False), Slot("T", False), Slot("S", False)), comps)


@dataclass
class NormalizationResult:
    """Covariant derivatives of J and whether each vanishes identically."""

    hT: object
    hM: object
    v: object

    @property
    def zero(self):
        return {k: arrays.all_zero(getattr(self, k).comps) for k in ("hT", "hM", "v")}

    @property
    def passed(self):
        return all(self.zero.values())

    def nonzero_components(self):
        out = []
        for k in ("hT", "hM", "v"):
            out.extend((k, idx, e) for idx, e in getattr(self, k).nonzero())
        return out


def verify_normalization(conn, hn=None):
    """Compute D J in all three directions.

    ``conn`` is an h-normal connection or any nine-block connection; for
    the latter ``hn`` supplies the metric h that defines J (defaulting to
    ``conn.source``).
    """
    from .dtensor import cov_deriv_hM, cov_deriv_hT, cov_deriv_v

    if isinstance(conn, HNormalConnection):
        hn = conn
        conn = conn.completed
    if hn is None:
        hn = conn.source
    if hn is None:
        raise ValueError("the metric h is needed to build the normalization tensor")
    J = normalization_tensor(hn)
    return NormalizationResult(cov_deriv_hT(J, conn), cov_deriv_hM(J, conn), cov_deriv_v(J, conn))
