"""Torsion and curvature d-tensors of h-normal N-linear connections.

Family names and slot layouts (vertical pairs are written contravariant
pair first; ``V^`` is ^(f)_(r), ``V_`` is ^(j)_(b)):

torsion
    ``T_aj``  T^r_aj                      [S^, T_, S_]
    ``T_ij``  T^r_ij                      [S^, S_, S_]
    ``P_ib``  P^r(j)_i(b)                 [S^, S_, V_]
    ``Pv_a``  P^(f)(j)_(r)a(b)            [V^, T_, V_]
    ``Pv_i``  P^(f)(j)_(r)i(b)            [V^, S_, V_]
    ``R_ab``  R^(f)_(r)ab                 [V^, T_, T_]
    ``R_aj``  R^(f)_(r)aj                 [V^, T_, S_]
    ``R_ij``  R^(f)_(r)ij                 [V^, S_, S_]
    ``S``     S^(f)(i)(j)_(r)(a)(b)       [V^, V_, V_]

curvature
    ``chi``    chi^d_abc                  [T^, T_, T_, T_]
    ``R_ibc``  R^l_ibc                    [S^, S_, T_, T_]
    ``R_ibk``  R^l_ibk                    [S^, S_, T_, S_]
    ``P_ibc``  P^l(k)_ib(c)               [S^, S_, T_, V_]
    ``R_ijk``  R^l_ijk                    [S^, S_, S_, S_]
    ``P_ijc``  P^l(k)_ij(c)               [S^, S_, S_, V_]
    ``S_ibc``  S^l(j)(k)_i(b)(c)          [S^, S_, V_, V_]

The vertical-column curvature views ``Rv_bc``, ``Rv_bk``, ``Pv_bc``,
``Rv_jk``, ``Pv_jc`` and ``Sv`` carry a leading [V^, V_] pair followed by
the slots of the matching family.
"""

from dataclasses import dataclass, field, fields

import numpy as np

from . import arrays
from .connections import HNormalConnection, NLinearConnection
from .dtensor import S_DN, S_UP, T_DN, T_UP, V_DN, V_UP, DTensor
from .symbolic import ZERO, diff, sum_products

__all__ = [
    "TorsionComponents",
    "CurvatureComponents",
    "NotHNormalError",
    "torsion_closed_form",
    "curvature_closed_form",
    "torsion_from_definition",
    "curvature_from_definition",
    "TORSION_SIGNATURES",
    "CURVATURE_SIGNATURES",
]

TORSION_SIGNATURES = {
    "T_aj": (S_UP, T_DN, S_DN),
    "T_ij": (S_UP, S_DN, S_DN),
    "P_ib": (S_UP, S_DN, V_DN),
    "Pv_a": (V_UP, T_DN, V_DN),
    "Pv_i": (V_UP, S_DN, V_DN),
    "R_ab": (V_UP, T_DN, T_DN),
    "R_aj": (V_UP, T_DN, S_DN),
    "R_ij": (V_UP, S_DN, S_DN),
    "S": (V_UP, V_DN, V_DN),
}

CURVATURE_SIGNATURES = {
    "chi": (T_UP, T_DN, T_DN, T_DN),
    "R_ibc": (S_UP, S_DN, T_DN, T_DN),
    "R_ibk": (S_UP, S_DN, T_DN, S_DN),
    "P_ibc": (S_UP, S_DN, T_DN, V_DN),
    "R_ijk": (S_UP, S_DN, S_DN, S_DN),
    "P_ijc": (S_UP, S_DN, S_DN, V_DN),
    "S_ibc": (S_UP, S_DN, V_DN, V_DN),
}

# v-column view name -> h_M-column family it is built from
V_COLUMN = {
    "Rv_bc": "R_ibc",
    "Rv_bk": "R_ibk",
    "Pv_bc": "P_ibc",
    "Rv_jk": "R_ijk",
    "Pv_jc": "P_ijc",
    "Sv": "S_ibc",
}


class NotHNormalError(ValueError):
    """Closed forms need a connection completed from h-normal data."""


@dataclass
class TorsionComponents:
    T_aj: DTensor
    T_ij: DTensor
    P_ib: DTensor
    Pv_a: DTensor
    Pv_i: DTensor
    R_ab: DTensor
    R_aj: DTensor
    R_ij: DTensor
    S: DTensor
    # structural blocks that vanish for h-normal connections, when computed
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def families(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "extra"}

    def nonzero_families(self):
        return [k for k, v in self.families().items() if not v.is_zero()]

    def differences(self, other):
        """Names of families that differ symbolically from ``other``."""
        mine, theirs = self.families(), other.families()
        return [k for k in mine if mine[k] != theirs[k]]


@dataclass
class CurvatureComponents:
    chi: DTensor
    R_ibc: DTensor
    R_ibk: DTensor
    P_ibc: DTensor
    R_ijk: DTensor
    P_ijc: DTensor
    S_ibc: DTensor
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def families(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "extra"}

    def nonzero_families(self):
        return [k for k, v in self.families().items() if not v.is_zero()]

    def differences(self, other):
        mine, theirs = self.families(), other.families()
        return [k for k in mine if mine[k] != theirs[k]]

    def v_column(self, name):
        """A v-column curvature view such as ``Rv_bc`` (see module docs)."""
        return v_column_view(self, name)


def v_column_view(curv, name):
    fam = getattr(curv, V_COLUMN[name])
    ch = fam.chart
    m, n = ch.m, ch.n
    mn = m * n
    sig = (V_UP, V_DN) + fam.signature[2:]
    rest = fam.shape[2:]
    out = arrays.zeros((mn, mn) + rest)
    for d in range(m):
        for l in range(n):
            for i in range(n):
                for idx in arrays.indices(rest):
                    v = fam.comps[(i, l) + idx]
                    if v:
                        out[(d * n + l, d * n + i) + idx] = v
    if name == "Rv_bc":
        # R^(d)(i)_(l)(a)bc = -delta^i_l chi^d_abc + delta^d_a R^i_lbc
        for d in range(m):
            for a in range(m):
                for l in range(n):
                    for b in range(m):
                        for c in range(m):
                            x = curv.chi.comps[d, a, b, c]
                            if x:
                                k = (d * n + l, a * n + l, b, c)
                                out[k] = out[k] - x
    return DTensor(ch, sig, out)


def _hnormal_source(D):
    if isinstance(D, HNormalConnection):
        return D, D.completed
    if isinstance(D, NLinearConnection) and D.source is not None:
        return D.source, D
    raise NotHNormalError("closed forms require a connection completed from h-normal data")


def torsion_closed_form(D):
    """The nine torsion families from the h-normal closed-form expressions."""
    hn, full = _hnormal_source(D)
    ch = hn.chart
    N = hn.N
    m, n = ch.m, ch.n
    mn = m * n
    eng = full.engine

    T_aj = arrays.zeros((n, m, n))
    for r in range(n):
        for a in range(m):
            for j in range(n):
                T_aj[r, a, j] = -hn.A[r, j, a]
    T_ij = arrays.zeros((n, n, n))
    for r in range(n):
        for i in range(n):
            for j in range(n):
                T_ij[r, i, j] = hn.H[r, i, j] - hn.H[r, j, i]
    P_ib = arrays.zeros((n, n, mn))
    for r in range(n):
        for i in range(n):
            for b in range(m):
                for j in range(n):
                    P_ib[r, i, b * n + j] = hn.C[r, i, j, b]

    dN1 = {}
    dN2 = {}
    for f in range(m):
        for r in range(n):
            for a in range(m):
                dN1[f, r, a] = eng.frame(N.N1[f, r, a])
            for i in range(n):
                dN2[f, r, i] = eng.frame(N.N2[f, r, i])

    Pv_a = arrays.zeros((mn, m, mn))
    Pv_i = arrays.zeros((mn, n, mn))
    R_ab = arrays.zeros((mn, m, m))
    R_aj = arrays.zeros((mn, m, n))
    R_ij = arrays.zeros((mn, n, n))
    for f in range(m):
        for r in range(n):
            F = f * n + r
            for a in range(m):
                dt, dx, dp = dN1[f, r, a]
                for b in range(m):
                    for j in range(n):
                        v = dp[b * n + j]
                        if f == b:
                            v = v + hn.A[j, r, a]
                        if r == j:
                            v = v - hn.chi[f, b, a]
                        Pv_a[F, a, b * n + j] = v
                    R_ab[F, a, b] = dt[b] - dN1[f, r, b][0][a]
                for j in range(n):
                    R_aj[F, a, j] = dx[j] - dN2[f, r, j][0][a]
            for i in range(n):
                dt, dx, dp = dN2[f, r, i]
                for b in range(m):
                    for j in range(n):
                        v = dp[b * n + j]
                        if f == b:
                            v = v + hn.H[j, r, i]
                        Pv_i[F, i, b * n + j] = v
                for j in range(n):
                    R_ij[F, i, j] = dx[j] - dN2[f, r, j][1][i]
    S = arrays.zeros((mn, mn, mn))
    for f in range(m):
        for r in range(n):
            for a in range(m):
                for i in range(n):
                    for b in range(m):
                        for j in range(n):
                            v = ZERO
                            if f == a:
                                v = v - hn.C[i, r, j, b]
                            if f == b:
                                v = v + hn.C[j, r, i, a]
                            S[f * n + r, a * n + i, b * n + j] = v

    def t(name, comps):
        return DTensor(ch, TORSION_SIGNATURES[name], comps)

    return TorsionComponents(
        T_aj=t("T_aj", T_aj),
        T_ij=t("T_ij", T_ij),
        P_ib=t("P_ib", P_ib),
        Pv_a=t("Pv_a", Pv_a),
        Pv_i=t("Pv_i", Pv_i),
        R_ab=t("R_ab", R_ab),
        R_aj=t("R_aj", R_aj),
        R_ij=t("R_ij", R_ij),
        S=t("S", S),
    )


def curvature_closed_form(D, torsion=None):
    """The seven curvature families from the h-normal closed-form expressions."""
    hn, full = _hnormal_source(D)
    ch = hn.chart
    m, n = ch.m, ch.n
    mn = m * n
    eng = full.engine
    tor = torsion if torsion is not None else torsion_closed_form(full)
    chi, A, H, C = hn.chi, hn.A, hn.H, hn.C
    R_ab, R_aj, R_ij = tor.R_ab.comps, tor.R_aj.comps, tor.R_ij.comps
    Pv_a, Pv_i = tor.Pv_a.comps, tor.Pv_i.comps

    # C as a d-tensor C^l(k)_i(c) with slots [S^, S_, V_]
    Cd = np.empty((n, n, mn), dtype=object)
    for l in range(n):
        for i in range(n):
            for c in range(m):
                for k in range(n):
                    Cd[l, i, c * n + k] = C[l, i, k, c]
    Ct = DTensor(ch, (S_UP, S_DN, V_DN), Cd)
    C_t = eng.derivative(Ct, "T").comps
    C_s = eng.derivative(Ct, "S").comps

    fr_chi = {k: eng.frame(chi[k]) for k in arrays.indices(chi.shape)}
    fr_A = {k: eng.frame(A[k]) for k in arrays.indices(A.shape)}
    fr_H = {k: eng.frame(H[k]) for k in arrays.indices(H.shape)}
    fr_C = {k: eng.frame(Cd[k]) for k in arrays.indices(Cd.shape)}

    def cR(l, i, Rfam, idx):
        # C^l(r)_i(f) R^(f)_(r)..
        return [(1, Cd[l, i, F], Rfam[(F,) + idx]) for F in range(mn) if Cd[l, i, F]]

    chi4 = arrays.zeros((m, m, m, m))
    for d in range(m):
        for a in range(m):
            for b in range(m):
                for c in range(m):
                    terms = [(-1, fr_chi[d, a, c][0][b], None)]
                    for f in range(m):
                        terms.append((1, chi[f, a, b], chi[d, f, c]))
                        terms.append((-1, chi[f, a, c], chi[d, f, b]))
                    chi4[d, a, b, c] = sum_products(terms, fr_chi[d, a, b][0][c])

    R_ibc = arrays.zeros((n, n, m, m))
    R_ibk = arrays.zeros((n, n, m, n))
    P_ibc = arrays.zeros((n, n, m, mn))
    R_ijk = arrays.zeros((n, n, n, n))
    P_ijc = arrays.zeros((n, n, n, mn))
    S_ibc = arrays.zeros((n, n, mn, mn))
    for l in range(n):
        for i in range(n):
            for b in range(m):
                for c in range(m):
                    terms = [(-1, fr_A[l, i, c][0][b], None)]
                    for r in range(n):
                        terms.append((1, A[r, i, b], A[l, r, c]))
                        terms.append((-1, A[r, i, c], A[l, r, b]))
                    terms += cR(l, i, R_ab, (b, c))
                    R_ibc[l, i, b, c] = sum_products(terms, fr_A[l, i, b][0][c])
                for k in range(n):
                    terms = [(-1, fr_H[l, i, k][0][b], None)]
                    for r in range(n):
                        terms.append((1, A[r, i, b], H[l, r, k]))
                        terms.append((-1, H[r, i, k], A[l, r, b]))
                    terms += cR(l, i, R_aj, (b, k))
                    R_ibk[l, i, b, k] = sum_products(terms, fr_A[l, i, b][1][k])
                for K in range(mn):
                    terms = [(-1, C_t[l, i, K, b], None)]
                    terms += [(1, Cd[l, i, F], Pv_a[F, b, K]) for F in range(mn) if Cd[l, i, F]]
                    P_ibc[l, i, b, K] = sum_products(terms, fr_A[l, i, b][2][K])
            for j in range(n):
                for k in range(n):
                    terms = [(-1, fr_H[l, i, k][1][j], None)]
                    for r in range(n):
                        terms.append((1, H[r, i, j], H[l, r, k]))
                        terms.append((-1, H[r, i, k], H[l, r, j]))
                    terms += cR(l, i, R_ij, (j, k))
                    R_ijk[l, i, j, k] = sum_products(terms, fr_H[l, i, j][1][k])
                for K in range(mn):
                    terms = [(-1, C_s[l, i, K, j], None)]
                    terms += [(1, Cd[l, i, F], Pv_i[F, j, K]) for F in range(mn) if Cd[l, i, F]]
                    P_ijc[l, i, j, K] = sum_products(terms, fr_H[l, i, j][2][K])
            for B in range(mn):
                for K in range(mn):
                    terms = [(-1, fr_C[l, i, K][2][B], None)]
                    for r in range(n):
                        terms.append((1, Cd[r, i, B], Cd[l, r, K]))
                        terms.append((-1, Cd[r, i, K], Cd[l, r, B]))
                    S_ibc[l, i, B, K] = sum_products(terms, fr_C[l, i, B][2][K])

    def t(name, comps):
        return DTensor(ch, CURVATURE_SIGNATURES[name], comps)

    return CurvatureComponents(
        chi=t("chi", chi4),
        R_ibc=t("R_ibc", R_ibc),
        R_ibk=t("R_ibk", R_ibk),
        P_ibc=t("P_ibc", P_ibc),
        R_ijk=t("R_ijk", R_ijk),
        P_ijc=t("P_ijc", P_ijc),
        S_ibc=t("S_ibc", S_ibc),
    )


def torsion_from_definition(conn):
    """Torsion families read off the adapted-frame definition (independent oracle)."""
    from .frame import torsion_from_definition as impl

    return impl(conn)


def curvature_from_definition(conn):
    """Curvature families read off the adapted-frame definition (independent oracle)."""
    from .frame import curvature_from_definition as impl

    return impl(conn)
