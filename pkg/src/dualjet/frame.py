"""Full adapted-frame description of an N-linear connection.

The adapted frame is indexed by one flat range of length
``D = m + n + m*n``: temporal ``0..m-1``, spatial ``m..m+n-1`` and
vertical ``m+n+(a*n+i)``.  Frame fields are written as coefficient vectors
over the coordinate basis (same flat layout), and every derivative here is
taken directly from those coefficients, so nothing is shared with the
closed-form code paths.

Conventions::

    D_{Y_C} Y_B = Gamma^F_BC Y_F
    [Y_B, Y_C] = R^F_BC Y_F
    Tor^F_BC   = Gamma^F_BC - Gamma^F_CB - R^F_CB
    Curv^G_ABC = Y_C(Gamma^G_AB) - Y_B(Gamma^G_AC)
                 + Gamma^F_AB Gamma^G_FC - Gamma^F_AC Gamma^G_FB
                 - R^F_CB Gamma^G_AF
"""

from functools import cached_property

import numpy as np

from . import arrays
from .connections import HNormalConnection
from .symbolic import ONE, ZERO, diff, sum_products
from .torsion_curvature import (
    CURVATURE_SIGNATURES,
    TORSION_SIGNATURES,
    CurvatureComponents,
    TorsionComponents,
)
from .dtensor import DTensor

__all__ = [
    "Frame",
    "torsion_from_definition",
    "curvature_from_definition",
    "assemble_torsion",
    "assemble_curvature",
    "torsion_family_slices",
    "curvature_family_slices",
]


class Frame:
    """Index bookkeeping plus frame fields, brackets and Gamma for one connection."""

    def __init__(self, conn):
        if isinstance(conn, HNormalConnection):
            conn = conn.completed
        self.conn = conn
        self.chart = ch = conn.chart
        self.m, self.n = ch.m, ch.n
        self.D = self.m + self.n + self.m * self.n
        self.coords = list(ch.T) + list(ch.X) + [p for row in ch.P for p in row]

    # flat frame positions
    def T(self, a):
        return a

    def S(self, i):
        return self.m + i

    def V(self, a, i):
        return self.m + self.n + a * self.n + i

    def cls(self, F):
        if F < self.m:
            return "T"
        if F < self.m + self.n:
            return "S"
        return "V"

    def range(self, c):
        m, n = self.m, self.n
        return {"T": range(0, m), "S": range(m, m + n), "V": range(m + n, self.D)}[c]

    def local(self, F):
        """Index of ``F`` inside its class (vertical pairs flattened)."""
        c = self.cls(F)
        return F - self.range(c).start

    @cached_property
    def fields(self):
        """Coordinate coefficients of Y_B as a (D, D) array, row B."""
        m, n, D = self.m, self.n, self.D
        N = self.conn.N
        Y = arrays.zeros((D, D))
        for F in range(D):
            Y[F, F] = ONE
        for a in range(m):
            for b in range(m):
                for j in range(n):
                    Y[self.T(a), self.V(b, j)] = -N.N1[b, j, a]
        for i in range(n):
            for b in range(m):
                for j in range(n):
                    Y[self.S(i), self.V(b, j)] = -N.N2[b, j, i]
        return Y

    def apply(self, B, e):
        """Y_B(e)."""
        if not e:
            return ZERO
        terms = []
        row = self.fields[B]
        for mu in range(self.D):
            c = row[mu]
            if c:
                d = diff(e, self.coords[mu])
                if d:
                    terms.append((1, c, d))
        return sum_products(terms)

    @cached_property
    def bracket(self):
        """R^F_BC with [Y_B, Y_C] = R^F_BC Y_F, as a (D, D, D) array [F, B, C]."""
        D = self.D
        Y = self.fields
        R = arrays.zeros((D, D, D))
        for B in range(D):
            for C in range(D):
                if B == C:
                    continue
                for mu in range(D):
                    v = self.apply(B, Y[C, mu]) - self.apply(C, Y[B, mu])
                    if v:
                        R[mu, B, C] = v
        # the t and x components of every frame field are constant, so the
        # bracket is vertical and its coordinate and frame components agree
        return R

    @cached_property
    def gamma(self):
        """Gamma^F_BC as a (D, D, D) array [F, B, C]."""
        D = self.D
        G = arrays.zeros((D, D, D))
        fb = self.conn.frame_blocks
        for d in ("T", "S", "V"):
            for k in ("T", "S", "V"):
                blk = fb[d][k]
                sign = -1 if k == "V" else 1
                rk, rd = self.range(k), self.range(d)
                for idx, v in arrays.nonzero_items(blk):
                    u, f, g = idx
                    G[rk[u], rk[f], rd[g]] = v if sign > 0 else -v
        return G

    @cached_property
    def torsion(self):
        D = self.D
        G, R = self.gamma, self.bracket
        T = arrays.zeros((D, D, D))
        for F in range(D):
            for B in range(D):
                for C in range(D):
                    T[F, B, C] = G[F, B, C] - G[F, C, B] - R[F, C, B]
        return T

    @cached_property
    def curvature(self):
        D = self.D
        G, R = self.gamma, self.bracket
        K = arrays.zeros((D, D, D, D))
        nzG = {}
        for F in range(D):
            for B in range(D):
                for C in range(D):
                    if G[F, B, C]:
                        nzG.setdefault((B, C), []).append(F)
        for Gi in range(D):
            for A in range(D):
                for B in range(D):
                    for C in range(D):
                        if B == C:
                            continue
                        terms = [(-1, self.apply(B, G[Gi, A, C]), None)]
                        for F in nzG.get((A, B), ()):
                            terms.append((1, G[F, A, B], G[Gi, F, C]))
                        for F in nzG.get((A, C), ()):
                            terms.append((-1, G[F, A, C], G[Gi, F, B]))
                        for F in range(D):
                            if R[F, C, B] and G[Gi, A, F]:
                                terms.append((-1, R[F, C, B], G[Gi, A, F]))
                        K[Gi, A, B, C] = sum_products(terms, self.apply(C, G[Gi, A, B]))
        return K


# ---------------------------------------------------------------------------
# Family <-> full frame slices

# family -> (sign, class of each frame slot [F, B, C] or [G, A, B, C])
_TORSION_SLICES = {
    "T_aj": (1, "STS"),
    "T_ij": (1, "SSS"),
    "P_ib": (1, "SSV"),
    "Pv_a": (1, "VTV"),
    "Pv_i": (1, "VSV"),
    "R_ab": (1, "VTT"),
    "R_aj": (1, "VTS"),
    "R_ij": (1, "VSS"),
    "S": (1, "VVV"),
}

_CURVATURE_SLICES = {
    "chi": (1, "TTTT"),
    "R_ibc": (1, "SSTT"),
    "R_ibk": (1, "SSTS"),
    "P_ibc": (1, "SSTV"),
    "R_ijk": (1, "SSSS"),
    "P_ijc": (1, "SSSV"),
    "S_ibc": (1, "SSVV"),
}


def torsion_family_slices():
    return dict(_TORSION_SLICES)


def curvature_family_slices():
    return dict(_CURVATURE_SLICES)


def _extract(frame, full, classes):
    ranges = [frame.range(c) for c in classes]
    shape = tuple(len(r) for r in ranges)
    out = arrays.zeros(shape)
    for idx in arrays.indices(shape):
        out[idx] = full[tuple(r[k] for r, k in zip(ranges, idx))]
    return out


def _place(frame, full, classes, comps, sign=1):
    ranges = [frame.range(c) for c in classes]
    for idx, v in arrays.nonzero_items(comps):
        full[tuple(r[k] for r, k in zip(ranges, idx))] = v if sign > 0 else -v


def _all_class_tuples(k):
    import itertools

    return ["".join(t) for t in itertools.product("TSV", repeat=k)]


def torsion_from_definition(conn):
    """Torsion families read off the full-frame torsion.

    ``extra["unexpected"]`` lists (classes, 0-based index, Expr) for nonzero
    frame entries outside the nine families and their antisymmetric
    partners; it is empty for h-normal connections.
    """
    fr = Frame(conn)
    full = fr.torsion
    fams = {}
    for name, (sign, cl) in _TORSION_SLICES.items():
        comps = _extract(fr, full, cl)
        fams[name] = DTensor(fr.chart, TORSION_SIGNATURES[name], comps if sign > 0 else -comps)
    covered = set()
    for _, cl in _TORSION_SLICES.values():
        covered.add(cl)
        covered.add(cl[0] + cl[2] + cl[1])
    unexpected = []
    for cl in _all_class_tuples(3):
        if cl in covered:
            continue
        for idx, v in arrays.nonzero_items(_extract(fr, full, cl)):
            unexpected.append((cl, idx, v))
    # antisymmetry of the listed families
    for cl in {c for _, c in _TORSION_SLICES.values()}:
        sw = cl[0] + cl[2] + cl[1]
        a = _extract(fr, full, cl)
        b = _extract(fr, full, sw)
        if not arrays.equal(a, -np.swapaxes(b, 1, 2)):
            unexpected.append((cl, "antisymmetry", None))
    return TorsionComponents(**fams, extra={"frame": fr, "full": full, "unexpected": unexpected})


def curvature_from_definition(conn):
    """Curvature families read off the full-frame curvature.

    ``extra["violations"]`` lists blocks that break the h-normal structure:
    nonzero mixed-class entries, nonzero temporal entries away from the
    all-temporal block, or vertical entries that differ from the
    combination of the temporal and spatial ones.
    """
    fr = Frame(conn)
    full = fr.curvature
    m, n = fr.m, fr.n
    fams = {}
    for name, (sign, cl) in _CURVATURE_SLICES.items():
        comps = _extract(fr, full, cl)
        fams[name] = DTensor(fr.chart, CURVATURE_SIGNATURES[name], comps if sign > 0 else -comps)
    violations = []
    for cl in _all_class_tuples(4):
        g, a, b, c = cl
        block = _extract(fr, full, cl)
        if g != a or (g == "T" and cl != "TTTT"):
            if not arrays.all_zero(block):
                violations.append((cl, "nonzero"))
            continue
        if g == "V":
            # Curv^(d,l)_(a,i)BC = delta^i_l Curv^d_aBC - delta^d_a Curv^i_lBC
            hs = _extract(fr, full, "SS" + b + c)
            ht = _extract(fr, full, "TT" + b + c)
            rest = block.shape[2:]
            ok = True
            for d in range(m):
                for l in range(n):
                    for a_ in range(m):
                        for i in range(n):
                            for idx in arrays.indices(rest):
                                want = ZERO
                                if i == l:
                                    want = want + ht[(d, a_) + idx]
                                if d == a_:
                                    want = want - hs[(i, l) + idx]
                                if block[(d * n + l, a_ * n + i) + idx] != want:
                                    ok = False
            if not ok:
                violations.append((cl, "v-column"))
    return CurvatureComponents(**fams, extra={"frame": fr, "full": full, "violations": violations})


def _families(obj):
    return obj.families() if hasattr(obj, "families") else obj


def assemble_torsion(frame, tor):
    """Full-frame torsion array from the nine families (zero elsewhere).

    ``tor`` is a :class:`TorsionComponents` or a name -> DTensor mapping.
    """
    D = frame.D
    full = arrays.zeros((D, D, D))
    fams = _families(tor)
    for name, (sign, cl) in _TORSION_SLICES.items():
        comps = fams[name].comps
        _place(frame, full, cl, comps, sign)
        _place(frame, full, cl[0] + cl[2] + cl[1], np.swapaxes(comps, 1, 2), -sign)
    return full


def assemble_curvature(frame, curv):
    """Full-frame curvature array from the seven families and the v-column."""
    D = frame.D
    m, n = frame.m, frame.n
    full = arrays.zeros((D, D, D, D))
    fams = _families(curv)
    for name, (sign, cl) in _CURVATURE_SLICES.items():
        comps = fams[name].comps
        _place(frame, full, cl, comps, sign)
        _place(frame, full, cl[:2] + cl[3] + cl[2], np.swapaxes(comps, 2, 3), -sign)
    for bc in _all_class_tuples(2):
        hs = _extract(frame, full, "SS" + bc)
        ht = _extract(frame, full, "TT" + bc)
        rest = hs.shape[2:]
        rb, rc = frame.range(bc[0]), frame.range(bc[1])
        for d in range(m):
            for l in range(n):
                for a in range(m):
                    for i in range(n):
                        for idx in arrays.indices(rest):
                            v = ZERO
                            if i == l:
                                v = v + ht[(d, a) + idx]
                            if d == a:
                                v = v - hs[(i, l) + idx]
                            if v:
                                full[frame.V(d, l), frame.V(a, i), rb[idx[0]], rc[idx[1]]] = v
    return full
