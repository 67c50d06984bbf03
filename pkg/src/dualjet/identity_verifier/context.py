"""Shared family arrays and cached covariant derivatives for the identity suites."""

import numpy as np

from .. import arrays
from ..connections import HNormalConnection, NLinearConnection, NotCartanError, is_cartan
from ..dtensor import S_DN, S_UP, V_DN, V_UP, DTensor
from ..torsion_curvature import V_COLUMN, curvature_closed_form, torsion_closed_form

__all__ = ["IdentityContext", "cartan_source", "DVectorField", "liouville_field", "chart_kinds", "E", "cyc", "alt"]


def chart_kinds(chart):
    """Symbol name -> ``"t"``, ``"x"`` or ``"p"`` for numeric sampling."""
    out = {}
    for s in chart.T:
        out[str(s)] = "t"
    for s in chart.X:
        out[str(s)] = "x"
    for row in chart.P:
        for s in row:
            out[str(s)] = "p"
    return out


def E(out, *args):
    """Einsum over Expr object arrays: ``E("ab", A, "ar", B, "rb")``."""
    ops = args[0::2]
    subs = ",".join(args[1::2])
    r = np.einsum(f"{subs}->{out}", *ops)
    return np.array(r, dtype=object) if r.dtype != object else r


def cyc(fn, x, y, z):
    """Cyclic sum of the term lists ``fn(x, y, z)``."""
    return fn(x, y, z) + fn(y, z, x) + fn(z, x, y)


def alt(fn, x, y):
    """Alternate sum ``fn(x, y) - fn(y, x)`` of term lists."""
    return fn(x, y) + [-t for t in fn(y, x)]


class DVectorField:
    """X = X^a d/dt^a + X^i d/dx^i + X^(a)_(i) d/dp^a_i as three d-tensors."""

    def __init__(self, chart, t=None, s=None, v=None):
        m, n = chart.m, chart.n
        self.chart = chart

        def mk(data, size, slot, name):
            if data is None:
                return DTensor.zeros(chart, (slot,))
            a = np.asarray(data, dtype=object).reshape(size)
            return DTensor(chart, (slot,), arrays.as_expr_array(a, (size,), chart, name))

        from ..dtensor import T_UP

        self.t = mk(t, m, T_UP, "X^a")
        self.s = mk(s, n, S_UP, "X^i")
        self.v = mk(v, m * n, V_UP, "X^(a)_(i)")

    def frame_components(self):
        """Components in the flat adapted-frame layout."""
        return np.concatenate([self.t.comps, self.s.comps, self.v.comps])


def liouville_field(chart):
    """C* = p^a_i d/dp^a_i."""
    return DVectorField(chart, v=[p for row in chart.P for p in row])


def cartan_source(D):
    """The h-normal connection behind ``D``; refuses anything not of Cartan type."""
    if isinstance(D, NLinearConnection):
        if D.source is None:
            raise NotCartanError("identity suites need an h-normal connection of Cartan type")
        D = D.source
    if not isinstance(D, HNormalConnection):
        raise TypeError("expected an h-normal connection")
    if not is_cartan(D):
        raise NotCartanError("connection is not of Cartan type (H or C lacks the required symmetry)")
    return D


class IdentityContext:
    """Families of an h-normal Cartan connection plus covariant derivatives.

    ``derivative_connection`` (optional) supplies the connection used for
    every covariant derivative while torsion, curvature and the explicit
    coefficients keep coming from ``D``.  That mismatch is how faults are
    planted: a consistent change of a Cartan connection is again Cartan,
    and the identities would still hold.
    """

    def __init__(self, D, derivative_connection=None):
        D = cartan_source(D)
        self.hn = D
        self.chart = D.chart
        self.m, self.n = D.chart.m, D.chart.n
        self.full = D.completed
        dc = derivative_connection
        if isinstance(dc, HNormalConnection):
            dc = dc.completed
        if dc is not None and dc.N != D.N:
            raise ValueError("derivative connection must share the nonlinear connection")
        self.deriv_conn = dc if dc is not None else self.full
        self.faulty = dc is not None
        self.engine = self.deriv_conn.engine
        self.torsion = torsion_closed_form(self.full)
        self.curvature = curvature_closed_form(self.full, self.torsion)
        self._t = {}
        self._d = {}
        for k, v in self.torsion.families().items():
            self._t[k] = v
        for k, v in self.curvature.families().items():
            self._t[k] = v
        for k in V_COLUMN:
            self._t[k] = self.curvature.v_column(k)
        m, n = self.m, self.n
        Cd = arrays.zeros((n, n, m * n))
        for l in range(n):
            for i in range(n):
                for c in range(m):
                    for k in range(n):
                        Cd[l, i, c * n + k] = D.C[l, i, k, c]
        self._t["C"] = DTensor(self.chart, (S_UP, S_DN, V_DN), Cd)
        P = arrays.zeros((m, n))
        for a in range(m):
            for i in range(n):
                P[a, i] = self.chart.P[a][i]
        self.p = P
        self.kinds = chart_kinds(self.chart)

    def register(self, name, tensor):
        self._t[name] = tensor
        for key in [k for k in self._d if k[0] == name]:
            del self._d[key]

    def tensor(self, name):
        return self._t[name]

    def __getitem__(self, name):
        return self._t[name].comps

    def d(self, name, dirs):
        """Components after successive covariant derivatives, e.g. ``d("S", "V")``."""
        key = (name, dirs)
        r = self._d.get(key)
        if r is None:
            base = self._t[name] if len(dirs) == 1 else self._dt(name, dirs[:-1])
            r = self._d[key] = self.engine.derivative(base, dirs[-1])
        return r.comps

    def _dt(self, name, dirs):
        self.d(name, dirs)
        return self._d[(name, dirs)]

    def vsplit(self, a, axes):
        """Reshape flattened vertical axes into (m, n) pairs."""
        shape = []
        for ax, s in enumerate(a.shape):
            shape.extend((self.m, self.n) if ax in axes else (s,))
        return a.reshape(shape)

    def labeler(self, classes, split=()):
        """0-based index -> reported 1-based tuple.

        ``classes`` gives one of ``T``, ``S``, ``V`` per array axis; a
        ``V`` axis reports an (a, i) pair.  ``split`` marks axes that come
        as separate (a, i) array axes and are reported as one pair.
        """
        n = self.n

        def lab(idx):
            out = []
            k = 0
            for pos, c in enumerate(classes):
                if pos in split:
                    out.append((idx[k] + 1, idx[k + 1] + 1))
                    k += 2
                    continue
                v = idx[k]
                k += 1
                out.append((v // n + 1, v % n + 1) if c == "V" else v + 1)
            return tuple(out)

        return lab
