"""Generic commutation and Bianchi formulas over the full adapted frame.

These work for any nine-block connection and serve as the oracle for the
specialized suites::

    Ricci:    X^A_:B:C - X^A_:C:B = X^F Curv^A_FBC - X^A_:F Tor^F_BC
    first:    cyc_{A,B,C} { Curv^F_ABC - Tor^F_AB:C - Tor^G_AB Tor^F_CG } = 0
    second:   cyc_{A,B,C} { Curv^F_DAB:C + Tor^G_AB Curv^F_DCG } = 0

Each specialized Bianchi identity equals a signed slice of one of the two
generic families (:data:`BIANCHI_MAPPING`); ids 1-17 come from the first
and 18-30 from the second.
"""

import numpy as np

from .. import arrays
from ..connections import HNormalConnection
from ..frame import Frame, assemble_curvature, assemble_torsion
from ..torsion_curvature import CURVATURE_SIGNATURES, TORSION_SIGNATURES
from ..symbolic import sum_products
from .bianchi import BIANCHI_CLASSES, bianchi_terms
from .context import E, DVectorField, IdentityContext
from .report import build_report

__all__ = [
    "GenericContext",
    "generic_bianchi_residuals",
    "generic_ricci_residuals",
    "bianchi_mapping_check",
    "BIANCHI_MAPPING",
    "mapping_signs",
    "scramble_families",
]

# id -> (generic family, sign) with  specialized = sign * generic slice.
# Read off contexts with scrambled families and a mismatched derivative
# connection, where both sides are nonzero; tests recompute them.
_SIGNS = {
    1: 1, 2: -1, 3: -1, 4: -1, 5: -1, 6: 1, 7: -1, 8: -1, 9: -1, 10: 1,
    11: 1, 12: 1, 13: 1, 14: -1, 15: -1, 16: -1, 17: -1,
    18: 1, 19: 1, 20: 1, 21: 1, 22: -1, 23: 1, 24: 1, 25: -1, 26: -1, 27: -1,
    28: 1, 29: 1, 30: 1,
}
BIANCHI_MAPPING = {k: (1 if k <= 17 else 2, s) for k, s in _SIGNS.items()}


class GenericContext:
    """Full-frame torsion and curvature of ``conn``.

    Covariant derivatives use ``derivative_connection`` when given (the
    same planted mismatch as :class:`IdentityContext`).  ``torsion`` and
    ``curvature`` override the full-frame arrays computed from ``conn``.
    """

    def __init__(self, conn, derivative_connection=None, torsion=None, curvature=None):
        if isinstance(conn, HNormalConnection):
            conn = conn.completed
        dc = derivative_connection
        if isinstance(dc, HNormalConnection):
            dc = dc.completed
        self.frame = Frame(conn)
        self.dframe = Frame(dc) if dc is not None else self.frame
        self.D = self.frame.D
        self.torsion = self.frame.torsion if torsion is None else torsion
        self.curvature = self.frame.curvature if curvature is None else curvature
        G = self.dframe.gamma
        D = self.D
        self._up = {}
        self._dn = {}
        for F in range(D):
            for C in range(D):
                self._up[F, C] = [(H, G[F, H, C]) for H in range(D) if G[F, H, C]]
                self._dn[F, C] = [(H, G[H, F, C]) for H in range(D) if G[H, F, C]]
        self._cache = {}

    def derivative(self, arr, nup):
        """Covariant derivative of a full-frame array whose first ``nup`` slots are upper."""
        D = self.D
        out = np.empty(arr.shape + (D,), dtype=object)
        r = arr.ndim
        for idx in np.ndindex(*arr.shape):
            for C in range(D):
                terms = []
                for pos in range(r):
                    up = pos < nup
                    pairs = (self._up if up else self._dn)[idx[pos], C]
                    if not pairs:
                        continue
                    j = list(idx)
                    for H, g in pairs:
                        j[pos] = H
                        x = arr[tuple(j)]
                        if x:
                            terms.append((1 if up else -1, g, x))
                out[idx + (C,)] = sum_products(terms, self.dframe.apply(C, arr[idx]))
        return out

    def d_torsion(self):
        if "dT" not in self._cache:
            self._cache["dT"] = self.derivative(self.torsion, 1)
        return self._cache["dT"]

    def d_curvature(self):
        if "dR" not in self._cache:
            self._cache["dR"] = self.derivative(self.curvature, 1)
        return self._cache["dR"]

    def first_terms(self):
        """Term arrays [F, A, B, C] of the first generic identity."""
        T, R, dT = self.torsion, self.curvature, self.d_torsion()
        o = "FABC"
        out = []
        for A, B, C in (("A", "B", "C"), ("B", "C", "A"), ("C", "A", "B")):
            out += [
                E(o, R, f"F{A}{B}{C}"),
                -E(o, dT, f"F{A}{B}{C}"),
                -E(o, T, f"G{A}{B}", T, f"F{C}G"),
            ]
        return out

    def second_terms(self):
        """Term arrays [F, D, A, B, C] of the second generic identity."""
        T, R, dR = self.torsion, self.curvature, self.d_curvature()
        o = "FDABC"
        out = []
        for A, B, C in (("A", "B", "C"), ("B", "C", "A"), ("C", "A", "B")):
            out += [E(o, dR, f"FD{A}{B}{C}"), E(o, T, f"G{A}{B}", R, f"FD{C}G")]
        return out

    def label(self, idx):
        fr = self.frame
        out = []
        for F in idx:
            c = fr.cls(F)
            k = fr.local(F)
            out.append((c, (k // fr.n + 1, k % fr.n + 1) if c == "V" else k + 1))
        return tuple(out)

    def slice(self, arr, classes):
        """Sub-array of a full-frame array over the given class pattern."""
        ranges = [self.frame.range(c) for c in classes]
        return arr[np.ix_(*ranges)]


def generic_bianchi_residuals(conn, mode="symbolic", tol=1e-9, sampling=None, derivative_connection=None):
    """Both generic Bianchi families over all frame indices (ids ``"G1"``, ``"G2"``)."""
    g = conn if isinstance(conn, GenericContext) else GenericContext(conn, derivative_connection)
    ids = {"G1": (g.label, g.first_terms(), []), "G2": (g.label, g.second_terms(), [])}
    from .context import chart_kinds

    return build_report("generic-bianchi", ids, mode, tol, sampling, kinds=chart_kinds(g.frame.chart))


def generic_ricci_residuals(conn, X, mode="symbolic", tol=1e-9, sampling=None, derivative_connection=None):
    """The generic commutation formula for the d-vector field ``X`` (id ``"ricci"``)."""
    g = conn if isinstance(conn, GenericContext) else GenericContext(conn, derivative_connection)
    if not isinstance(X, DVectorField):
        X = DVectorField(g.frame.chart, *X)
    x = X.frame_components()
    d1 = g.derivative(x, 1)
    d2 = g.derivative(d1, 1)
    o = "ABC"
    terms = [d2, -E(o, d2, "ACB")]
    rhs = [E(o, x, "F", g.curvature, "AFBC"), -E(o, d1, "AF", g.torsion, "FBC")]
    from .context import chart_kinds

    return build_report("generic-ricci", {"ricci": (g.label, terms, rhs)}, mode, tol, sampling,
                        kinds=chart_kinds(g.frame.chart))


def _total(terms, shape):
    out = arrays.zeros(shape)
    for idx in np.ndindex(*shape):
        out[idx] = sum_products([(1, t[idx], None) for t in terms if t[idx]])
    return out


def _paired(ctx, reading12):
    gen = GenericContext(
        ctx.full,
        ctx.deriv_conn if ctx.faulty else None,
        torsion=assemble_torsion(Frame(ctx.full), {k: ctx.tensor(k) for k in TORSION_SIGNATURES}),
        curvature=assemble_curvature(Frame(ctx.full), {k: ctx.tensor(k) for k in CURVATURE_SIGNATURES}),
    )
    spec = bianchi_terms(ctx, reading12)
    t1, t2 = gen.first_terms(), gen.second_terms()
    fams = {1: _total(t1, t1[0].shape), 2: _total(t2, t2[0].shape)}
    for k, (_, lhs, rhs) in spec.items():
        arrs = lhs + [-a for a in rhs]
        yield k, _total(arrs, arrs[0].shape), gen.slice(fams[BIANCHI_MAPPING[k][0]], BIANCHI_CLASSES[k])


def bianchi_mapping_check(ctx, reading12="full"):
    """Compare each specialized residual with its signed generic slice.

    The generic side is assembled from the families held by ``ctx`` and
    differentiated with ``ctx``'s derivative connection, so a context
    whose families or derivatives were tampered with gives a nontrivial
    comparison.  Returns ``{id: (equal, specialized_nonzero)}``.
    """
    out = {}
    for k, s_res, g_res in _paired(ctx, reading12):
        sign = BIANCHI_MAPPING[k][1]
        out[k] = (arrays.equal(s_res, g_res if sign > 0 else -g_res), not arrays.all_zero(s_res))
    return out


def mapping_signs(ctx, reading12="full"):
    """Recover the sign table from scratch: id -> +1, -1, 0 (both zero) or None (no match)."""
    out = {}
    for k, s_res, g_res in _paired(ctx, reading12):
        if arrays.all_zero(s_res) and arrays.all_zero(g_res):
            out[k] = 0
        elif arrays.equal(s_res, g_res):
            out[k] = 1
        elif arrays.equal(s_res, -g_res):
            out[k] = -1
        else:
            out[k] = None
    return out


def scramble_families(ctx, seed=0, density=0.3):
    """Add seeded polynomial noise to every torsion and curvature family of ``ctx``.

    Antisymmetric pairs of same-class slots stay antisymmetric, T_ij stays
    zero and the C array tracks the P_ib torsion, so the structure the
    specialized identities rely on is kept while their values change.
    """
    import random

    from ..connections import random_polynomial
    from ..dtensor import DTensor
    from ..torsion_curvature import CurvatureComponents, V_COLUMN, v_column_view

    rng = random.Random(seed)
    ch = ctx.chart
    coords = list(ch.T) + list(ch.X) + [p for row in ch.P for p in row]
    antisym = {"T_ij", "R_ab", "R_ij", "S", "chi", "R_ibc", "R_ijk", "S_ibc"}
    fams = {}
    for name in list(TORSION_SIGNATURES) + list(CURVATURE_SIGNATURES):
        if name == "T_ij":
            continue
        t = ctx.tensor(name)
        c = t.comps.copy()
        for idx in np.ndindex(*c.shape):
            if rng.random() < density:
                dlt = random_polynomial(rng, coords, 1, 2)
                c[idx] = c[idx] + dlt
                if name in antisym:
                    sw = idx[:-2] + (idx[-1], idx[-2])
                    c[sw] = c[sw] - dlt
        fams[name] = DTensor(ch, t.signature, c)
    for name, t in fams.items():
        ctx.register(name, t)
    ctx.register("C", fams["P_ib"])
    curv = CurvatureComponents(**{k: fams[k] for k in CURVATURE_SIGNATURES})
    for k in V_COLUMN:
        ctx.register(k, v_column_view(curv, k))
    return ctx
