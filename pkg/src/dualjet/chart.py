"""The coordinate chart of the dual jet space, metrics and nonlinear connections.

Coordinates are ``t^a`` (a = 1..m), ``x^i`` (i = 1..n) and the polymomenta
``p^a_i``.  Public index arguments are 1-based; the numpy arrays that store
components are 0-based, so ``N1[a-1, i-1, b-1]`` holds N1^(a)_(i)b.
"""

import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import arrays
from .symbolic import ZERO, Expr, Rational, diff, evaluate, symbol, sum_products
from .symbolic.expr import FUNCTIONS, symbol_id

__all__ = [
    "JetChart",
    "TemporalMetric",
    "SpatialMetric",
    "ChristoffelSymbols",
    "NonlinearConnection",
    "DegenerateMetricError",
    "christoffel_temporal",
    "christoffel_spatial",
    "christoffel_symbols",
    "canonical_nonlinear_connection",
    "delta_dt",
    "delta_dx",
    "determinant",
    "inverse_matrix",
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class DegenerateMetricError(ValueError):
    pass


class JetChart:
    """Coordinates (t^a, x^i, p^a_i) with dimensions m and n."""

    def __init__(self, m, n, t_names=None, x_names=None, momentum_prefix="p"):
        if int(m) != m or int(n) != n or m < 1 or n < 1:
            raise ValueError("dimensions m and n must be integers >= 1")
        self.m = m = int(m)
        self.n = n = int(n)
        self.t_names = tuple(t_names) if t_names is not None else tuple(f"t{a}" for a in range(1, m + 1))
        self.x_names = tuple(x_names) if x_names is not None else tuple(f"x{i}" for i in range(1, n + 1))
        if len(self.t_names) != m:
            raise ValueError(f"expected {m} temporal names, got {len(self.t_names)}")
        if len(self.x_names) != n:
            raise ValueError(f"expected {n} spatial names, got {len(self.x_names)}")
        self.momentum_prefix = momentum_prefix
        self.p_names = tuple(
            tuple(f"{momentum_prefix}{a}_{i}" for i in range(1, n + 1)) for a in range(1, m + 1)
        )
        names = self.coordinate_names
        for nm in names:
            if not _IDENT.match(nm) or nm in FUNCTIONS:
                raise ValueError(f"invalid coordinate name {nm!r}")
        if len(set(names)) != len(names):
            raise ValueError("coordinate names must be distinct")
        self.T = tuple(symbol(s) for s in self.t_names)
        self.X = tuple(symbol(s) for s in self.x_names)
        self.P = tuple(tuple(symbol(s) for s in row) for row in self.p_names)
        self.t_ids = tuple(symbol_id(s) for s in self.t_names)
        self.x_ids = tuple(symbol_id(s) for s in self.x_names)
        self.p_ids = tuple(symbol_id(s) for row in self.p_names for s in row)

    @property
    def coordinate_names(self):
        return self.t_names + self.x_names + tuple(s for row in self.p_names for s in row)

    @property
    def dim(self):
        return self.m + self.n + self.m * self.n

    def t(self, a):
        return self.T[a - 1]

    def x(self, i):
        return self.X[i - 1]

    def p(self, a, i):
        return self.P[a - 1][i - 1]

    def vpair(self, k):
        """0-based flat vertical index -> 0-based (a, i)."""
        return divmod(k, self.n)

    def vflat(self, a, i):
        """0-based (a, i) -> 0-based flat vertical index."""
        return a * self.n + i

    def __eq__(self, other):
        return isinstance(other, JetChart) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def key(self):
        return (self.m, self.n, self.t_names, self.x_names, self.momentum_prefix)

    def __repr__(self):
        return f"JetChart(m={self.m}, n={self.n}, t={self.t_names}, x={self.x_names})"

    def sample_point(self, rng=None):
        """A deterministic (or rng-drawn) point inside the default sampling box."""
        vals = {}
        k = 0
        for nm in self.t_names + self.x_names:
            vals[nm] = 0.2 + (0.6180339887 * (k + 1)) % 1.0 if rng is None else rng.uniform(0.2, 1.2)
            k += 1
        for row in self.p_names:
            for nm in row:
                vals[nm] = -1 + 2 * ((0.4142135623 * (k + 1)) % 1.0) if rng is None else rng.uniform(-1, 1)
                k += 1
        return vals


# ---------------------------------------------------------------------------
# Matrices over Expr


def determinant(M):
    M = np.asarray(M, dtype=object)
    n = M.shape[0]
    if n == 1:
        return M[0, 0]
    if n == 2:
        return M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    total = ZERO
    for j in range(n):
        if not M[0, j]:
            continue
        minor = np.delete(np.delete(M, 0, axis=0), j, axis=1)
        term = M[0, j] * determinant(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def inverse_matrix(M):
    """Exact inverse by cofactors; raises DegenerateMetricError on det = 0."""
    M = np.asarray(M, dtype=object)
    n = M.shape[0]
    det = determinant(M)
    if det.is_zero():
        raise DegenerateMetricError("determinant is identically zero")
    inv_det = det ** -1
    out = arrays.zeros((n, n))
    if n == 1:
        out[0, 0] = inv_det
        return out, det
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(M, j, axis=0), i, axis=1)
            c = determinant(minor)
            out[i, j] = c * inv_det if (i + j) % 2 == 0 else -c * inv_det
    return out, det


class _Metric:
    _kind = "metric"

    def __init__(self, chart, g):
        self.chart = chart
        size = self._size(chart)
        g = arrays.as_expr_array(g, (size, size), chart, self._kind)
        allowed = self._allowed_ids(chart)
        for i in range(size):
            for j in range(size):
                if g[i, j] != g[j, i]:
                    raise ValueError(f"{self._kind} is not symmetric at [{i + 1}][{j + 1}]")
                extra = g[i, j].free_ids - allowed
                if extra:
                    names = sorted(g[i, j].free_symbols - set(self._allowed_names(chart)))
                    raise ValueError(f"{self._kind}[{i + 1}][{j + 1}] depends on {', '.join(names)}")
        inv, det = inverse_matrix(g)
        self._spot_check(det)
        self.matrix = g
        self.inverse = inv
        self.det = det

    def _spot_check(self, det):
        point = self.chart.sample_point()
        try:
            v = evaluate(det, point)
        except ArithmeticError as exc:
            raise DegenerateMetricError(f"{self._kind} determinant not evaluable at sample point: {exc}")
        if abs(v) < 1e-12:
            raise DegenerateMetricError(f"{self._kind} determinant vanishes at sample point")

    def __getitem__(self, idx):
        """1-based entry access: ``g[1, 2]``."""
        i, j = idx
        return self.matrix[i - 1, j - 1]

    def inv(self, i, j):
        return self.inverse[i - 1, j - 1]

    def identity_check(self):
        """True iff g * g_inv canonicalizes to the identity matrix."""
        n = self.matrix.shape[0]
        for i in range(n):
            for j in range(n):
                s = sum_products([(1, self.matrix[i, k], self.inverse[k, j]) for k in range(n)])
                if s != (1 if i == j else 0):
                    return False
        return True


class TemporalMetric(_Metric):
    """Semi-Riemannian metric h_ab(t) on the temporal manifold."""

    _kind = "h"

    @staticmethod
    def _size(chart):
        return chart.m

    @staticmethod
    def _allowed_ids(chart):
        return frozenset(chart.t_ids)

    @staticmethod
    def _allowed_names(chart):
        return chart.t_names

    @property
    def h(self):
        return self.matrix

    @property
    def h_inv(self):
        return self.inverse


class SpatialMetric(_Metric):
    """Semi-Riemannian metric phi_ij(x) on the spatial manifold."""

    _kind = "phi"

    @staticmethod
    def _size(chart):
        return chart.n

    @staticmethod
    def _allowed_ids(chart):
        return frozenset(chart.x_ids)

    @staticmethod
    def _allowed_names(chart):
        return chart.x_names

    @property
    def phi(self):
        return self.matrix

    @property
    def phi_inv(self):
        return self.inverse


def _levi_civita(g, ginv, coords):
    n = len(coords)
    dg = np.empty((n, n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                dg[i, j, k] = diff(g[i, j], coords[k])
    out = arrays.zeros((n, n, n))
    half = Rational(1, 2)
    for a in range(n):
        for b in range(n):
            for c in range(b, n):
                terms = []
                for d in range(n):
                    if not ginv[a, d]:
                        continue
                    lower = dg[d, b, c] + dg[d, c, b] - dg[b, c, d]
                    terms.append((half, ginv[a, d], lower))
                v = sum_products(terms)
                out[a, b, c] = v
                out[a, c, b] = v
    return out


def christoffel_temporal(h):
    """chi[a, b, c] = chi^a_bc of the temporal metric (0-based storage)."""
    return _levi_civita(h.matrix, h.inverse, h.chart.T)


def christoffel_spatial(phi):
    """Gamma[i, j, k] = Gamma^i_jk of the spatial metric (0-based storage)."""
    return _levi_civita(phi.matrix, phi.inverse, phi.chart.X)


@dataclass(frozen=True)
class ChristoffelSymbols:
    chi: np.ndarray
    Gamma: np.ndarray


def christoffel_symbols(h, phi):
    return ChristoffelSymbols(christoffel_temporal(h), christoffel_spatial(phi))


# ---------------------------------------------------------------------------


class NonlinearConnection:
    """N1[a, i, b] = N1^(a)_(i)b and N2[a, i, j] = N2^(a)_(i)j (0-based storage)."""

    def __init__(self, chart, N1, N2):
        m, n = chart.m, chart.n
        self.chart = chart
        self.N1 = arrays.as_expr_array(N1, (m, n, m), chart, "N1")
        self.N2 = arrays.as_expr_array(N2, (m, n, n), chart, "N2")

    @classmethod
    def zero(cls, chart):
        return cls(chart, arrays.zeros((chart.m, chart.n, chart.m)), arrays.zeros((chart.m, chart.n, chart.n)))

    def n1(self, a, i, b):
        return self.N1[a - 1, i - 1, b - 1]

    def n2(self, a, i, j):
        return self.N2[a - 1, i - 1, j - 1]

    def __eq__(self, other):
        return (
            isinstance(other, NonlinearConnection)
            and self.chart == other.chart
            and arrays.equal(self.N1, other.N1)
            and arrays.equal(self.N2, other.N2)
        )

    __hash__ = None

    @cached_property
    def _flat(self):
        # per direction g: list of (flat vertical index, coefficient) pairs
        m, n = self.chart.m, self.chart.n
        t_rows = [[(b * n + j, self.N1[b, j, g]) for b in range(m) for j in range(n) if self.N1[b, j, g]] for g in range(m)]
        x_rows = [[(b * n + j, self.N2[b, j, g]) for b in range(m) for j in range(n) if self.N2[b, j, g]] for g in range(n)]
        return t_rows, x_rows

    def frame_derivatives(self, e):
        """All adapted derivatives of ``e``: (delta/delta t, delta/delta x, d/dp) lists.

        Index layout is 0-based; the vertical list is flattened as a*n + i.
        """
        ch = self.chart
        dp = [diff(e, v) for v in ch.p_ids]
        t_rows, x_rows = self._flat
        dt = [sum_products([(-1, c, dp[k]) for k, c in t_rows[g] if dp[k]], diff(e, ch.t_ids[g])) for g in range(ch.m)]
        dx = [sum_products([(-1, c, dp[k]) for k, c in x_rows[g] if dp[k]], diff(e, ch.x_ids[g])) for g in range(ch.n)]
        return dt, dx, dp

    def delta_t(self, e, g):
        """delta e / delta t^g with 0-based g."""
        ch = self.chart
        return sum_products(
            [(-1, c, diff(e, ch.p_ids[k])) for k, c in self._flat[0][g]], diff(e, ch.t_ids[g])
        )

    def delta_x(self, e, g):
        """delta e / delta x^g with 0-based g."""
        ch = self.chart
        return sum_products(
            [(-1, c, diff(e, ch.p_ids[k])) for k, c in self._flat[1][g]], diff(e, ch.x_ids[g])
        )

    def d_p(self, e, k):
        """d e / d p with flat 0-based vertical index k."""
        return diff(e, self.chart.p_ids[k])


def canonical_nonlinear_connection(chi, Gamma, chart):
    """N0: N1^(a)_(i)b = chi^a_bc p^c_i and N2^(a)_(i)j = -Gamma^k_ij p^a_k."""
    m, n = chart.m, chart.n
    N1 = arrays.zeros((m, n, m))
    N2 = arrays.zeros((m, n, n))
    for a in range(m):
        for i in range(n):
            for b in range(m):
                N1[a, i, b] = sum_products([(1, chi[a, b, c], chart.P[c][i]) for c in range(m)])
            for j in range(n):
                N2[a, i, j] = sum_products([(-1, Gamma[k, i, j], chart.P[a][k]) for k in range(n)])
    return NonlinearConnection(chart, N1, N2)


def delta_dt(e, a, N):
    """delta e / delta t^a, 1-based ``a``."""
    if not 1 <= a <= N.chart.m:
        raise IndexError(f"temporal index {a} outside 1..{N.chart.m}")
    return N.delta_t(_as_expr(e), a - 1)


def delta_dx(e, i, N):
    """delta e / delta x^i, 1-based ``i``."""
    if not 1 <= i <= N.chart.n:
        raise IndexError(f"spatial index {i} outside 1..{N.chart.n}")
    return N.delta_x(_as_expr(e), i - 1)


def _as_expr(e):
    if isinstance(e, Expr):
        return e
    return Expr(e)
