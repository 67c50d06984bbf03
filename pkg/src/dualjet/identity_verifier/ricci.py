"""Ricci identities of a Cartan-type h-normal connection and the deflection identities.

Ids 1-6 act on the temporal components X^a, 7-12 on the spatial X^i and
13-18 on the vertical X^(a)_(i); within each group the derivative pairs
run (/b,/c), (/b,|k), (|j,|k), (/b,|(c,k)), (|j,|(c,k)), (|(b,j),|(c,k)).

In the vertical group the terms carrying the h_M curvature and chi enter
as ``-X^(a)_(r) R^r_i.. + X^(f)_(i) chi^a_f..``, which is what the generic
commutation formula gives with the v-column curvature.  ``reading="printed"``
flips both signs, the form that appears in print; it fails already for the
Berwald connection of the round sphere.
"""

from dataclasses import dataclass

from .. import arrays
from ..symbolic import ZERO
from ..dtensor import T_DN, S_DN, V_DN, V_UP, DTensor
from .context import E, DVectorField, IdentityContext, cartan_source
from .report import build_report

__all__ = [
    "DeflectionTensors",
    "deflection_tensors",
    "deflection_oracle",
    "ricci_residuals",
    "deflection_identity_residuals",
    "ricci_terms",
    "deflection_terms",
    "READINGS",
]

READINGS = ("corrected", "printed")


def _ctx(D, derivative_connection=None):
    if isinstance(D, IdentityContext):
        return D
    return IdentityContext(D, derivative_connection)


def _vsign(reading):
    if reading not in READINGS:
        raise ValueError(f"reading must be one of {READINGS}")
    return 1 if reading == "corrected" else -1


def ricci_terms(ctx, X, reading="corrected"):
    """``{id: (labels, lhs_terms, rhs_terms)}`` for the 18 Ricci identities."""
    if not isinstance(X, DVectorField):
        X = DVectorField(ctx.chart, *X)
    eng = ctx.engine
    m, n = ctx.m, ctx.n
    chi, Rab, Raj, Rij = ctx["chi"], ctx["R_ab"], ctx["R_aj"], ctx["R_ij"]
    Taj, Pva, Pvi, S, Cd = ctx["T_aj"], ctx["Pv_a"], ctx["Pv_i"], ctx["S"], ctx["C"]
    Ribc, Ribk, Pibc, Rijk, Pijc, Sibc = (ctx[k] for k in ("R_ibc", "R_ibk", "P_ibc", "R_ijk", "P_ijc", "S_ibc"))

    def derivs(T):
        one = {d: eng.derivative(T, d) for d in "TSV"}
        two = {d + e: eng.derivative(one[d], e).comps for d in "TSV" for e in "TSV"}
        return T.comps, {d: v.comps for d, v in one.items()}, two

    out = {}
    # temporal components
    x, d1, d2 = derivs(X.t)
    lab = ctx.labeler
    out[1] = (lab("TTT"), [d2["TT"], -E("abc", d2["TT"], "acb")],
              [E("abc", x, "f", chi, "afbc"), -E("abc", d1["V"], "aF", Rab, "Fbc")])
    out[2] = (lab("TTS"), [d2["TS"], -E("abk", d2["ST"], "akb")],
              [-E("abk", d1["S"], "ar", Taj, "rbk"), -E("abk", d1["V"], "aF", Raj, "Fbk")])
    out[3] = (lab("TSS"), [d2["SS"], -E("ajk", d2["SS"], "akj")], [-E("ajk", d1["V"], "aF", Rij, "Fjk")])
    out[4] = (lab("TTV"), [d2["TV"], -E("abK", d2["VT"], "aKb")], [-E("abK", d1["V"], "aF", Pva, "FbK")])
    out[5] = (lab("TSV"), [d2["SV"], -E("ajK", d2["VS"], "aKj")],
              [-E("ajK", d1["S"], "ar", Cd, "rjK"), -E("ajK", d1["V"], "aF", Pvi, "FjK")])
    out[6] = (lab("TVV"), [d2["VV"], -E("aBK", d2["VV"], "aKB")], [-E("aBK", d1["V"], "aF", S, "FBK")])
    # spatial components
    x, d1, d2 = derivs(X.s)
    out[7] = (lab("STT"), [d2["TT"], -E("ibc", d2["TT"], "icb")],
              [E("ibc", x, "r", Ribc, "irbc"), -E("ibc", d1["V"], "iF", Rab, "Fbc")])
    out[8] = (lab("STS"), [d2["TS"], -E("ibk", d2["ST"], "ikb")],
              [E("ibk", x, "r", Ribk, "irbk"), -E("ibk", d1["S"], "ir", Taj, "rbk"),
               -E("ibk", d1["V"], "iF", Raj, "Fbk")])
    out[9] = (lab("SSS"), [d2["SS"], -E("ijk", d2["SS"], "ikj")],
              [E("ijk", x, "r", Rijk, "irjk"), -E("ijk", d1["V"], "iF", Rij, "Fjk")])
    out[10] = (lab("STV"), [d2["TV"], -E("ibK", d2["VT"], "iKb")],
               [E("ibK", x, "r", Pibc, "irbK"), -E("ibK", d1["V"], "iF", Pva, "FbK")])
    out[11] = (lab("SSV"), [d2["SV"], -E("ijK", d2["VS"], "iKj")],
               [E("ijK", x, "r", Pijc, "irjK"), -E("ijK", d1["S"], "ir", Cd, "rjK"),
                -E("ijK", d1["V"], "iF", Pvi, "FjK")])
    out[12] = (lab("SVV"), [d2["VV"], -E("iBK", d2["VV"], "iKB")],
               [E("iBK", x, "r", Sibc, "irBK"), -E("iBK", d1["V"], "iF", S, "FBK")])
    # vertical components, worked on with the pair split as (a, i)
    x, d1, d2 = derivs(X.v)
    s = _vsign(reading)
    x2 = x.reshape(m, n)
    v1 = {k: ctx.vsplit(v, (0,)) for k, v in d1.items()}
    v2 = {k: ctx.vsplit(v, (0,)) for k, v in d2.items()}
    labv = lambda cl: lab("V" + cl, split=(0,))
    out[13] = (labv("TT"), [v2["TT"], -E("aibc", v2["TT"], "aicb")],
               [-s * E("aibc", x2, "ar", Ribc, "ribc"), s * E("aibc", x2, "fi", chi, "afbc"),
                -E("aibc", v1["V"], "aiF", Rab, "Fbc")])
    out[14] = (labv("TS"), [v2["TS"], -E("aibk", v2["ST"], "aikb")],
               [-s * E("aibk", x2, "ar", Ribk, "ribk"), -E("aibk", v1["S"], "air", Taj, "rbk"),
                -E("aibk", v1["V"], "aiF", Raj, "Fbk")])
    out[15] = (labv("SS"), [v2["SS"], -E("aijk", v2["SS"], "aikj")],
               [-s * E("aijk", x2, "ar", Rijk, "rijk"), -E("aijk", v1["V"], "aiF", Rij, "Fjk")])
    out[16] = (labv("TV"), [v2["TV"], -E("aibK", v2["VT"], "aiKb")],
               [-s * E("aibK", x2, "ar", Pibc, "ribK"), -E("aibK", v1["V"], "aiF", Pva, "FbK")])
    out[17] = (labv("SV"), [v2["SV"], -E("aijK", v2["VS"], "aiKj")],
               [-s * E("aijK", x2, "ar", Pijc, "rijK"), -E("aijK", v1["S"], "air", Cd, "rjK"),
                -E("aijK", v1["V"], "aiF", Pvi, "FjK")])
    out[18] = (labv("VV"), [v2["VV"], -E("aiBK", v2["VV"], "aiKB")],
               [-s * E("aiBK", x2, "ar", Sibc, "riBK"), -E("aiBK", v1["V"], "aiF", S, "FBK")])
    return out


def ricci_residuals(D, X, mode="symbolic", tol=1e-9, sampling=None, reading="corrected", derivative_connection=None):
    """Residuals LHS - RHS of the 18 Ricci identities for the d-vector field ``X``."""
    ctx = _ctx(D, derivative_connection)
    rep = build_report("ricci", ricci_terms(ctx, X, reading), mode, tol, sampling, kinds=ctx.kinds)
    rep.notes["reading"] = reading
    return rep


# ---------------------------------------------------------------------------
# Deflection d-tensors


@dataclass
class DeflectionTensors:
    """Delta^(a)_(i)b [V^, T_], Delta^(a)_(i)j [V^, S_] and theta^(a)(j)_(i)(b) [V^, V_]."""

    delta_t: DTensor
    delta_s: DTensor
    theta: DTensor

    def split(self):
        """The three arrays with the vertical pairs unflattened: (m,n,m), (m,n,n), (m,n,m,n)."""
        ch = self.delta_t.chart
        m, n = ch.m, ch.n
        return (
            self.delta_t.comps.reshape(m, n, m),
            self.delta_s.comps.reshape(m, n, n),
            self.theta.comps.reshape(m, n, m, n),
        )

    def __eq__(self, other):
        return (
            isinstance(other, DeflectionTensors)
            and self.delta_t == other.delta_t
            and self.delta_s == other.delta_s
            and self.theta == other.theta
        )

    __hash__ = None


def deflection_tensors(D):
    """Closed-form deflection d-tensors of a Cartan-type h-normal connection."""
    hn = D.hn if isinstance(D, IdentityContext) else cartan_source(D)
    ch = hn.chart
    m, n = ch.m, ch.n
    N = hn.N
    P = ch.P
    dt = arrays.zeros((m * n, m))
    ds = arrays.zeros((m * n, n))
    th = arrays.zeros((m * n, m * n))
    for a in range(m):
        for i in range(n):
            A_ = a * n + i
            for b in range(m):
                v = -N.N1[a, i, b]
                for r in range(n):
                    v = v - hn.A[r, i, b] * P[a][r]
                for f in range(m):
                    v = v + hn.chi[a, f, b] * P[f][i]
                dt[A_, b] = v
            for j in range(n):
                v = -N.N2[a, i, j]
                for r in range(n):
                    v = v - hn.H[r, i, j] * P[a][r]
                ds[A_, j] = v
            for b in range(m):
                for j in range(n):
                    v = ZERO
                    if a == b and i == j:
                        v = v + 1
                    for r in range(n):
                        v = v - hn.C[r, i, j, b] * P[a][r]
                    th[A_, b * n + j] = v
    return DeflectionTensors(
        DTensor(ch, (V_UP, T_DN), dt),
        DTensor(ch, (V_UP, S_DN), ds),
        DTensor(ch, (V_UP, V_DN), th),
    )


def deflection_oracle(D):
    """Deflection d-tensors as covariant derivatives of the p-components."""
    ctx = _ctx(D)
    X = DTensor(ctx.chart, (V_UP,), ctx.p.reshape(-1))
    eng = ctx.engine
    return DeflectionTensors(eng.derivative(X, "T"), eng.derivative(X, "S"), eng.derivative(X, "V"))


def deflection_terms(ctx, reading="corrected"):
    """``{id: (labels, lhs_terms, rhs_terms)}`` for the six deflection identities."""
    s = _vsign(reading)
    eng = ctx.engine
    # the deflection tensors are derivatives too, so a planted fault reaches them
    defl = deflection_oracle(ctx) if ctx.faulty else deflection_tensors(ctx)
    p = ctx.p
    chi, Rab, Raj, Rij = ctx["chi"], ctx["R_ab"], ctx["R_aj"], ctx["R_ij"]
    Taj, Pva, Pvi, S, Cd = ctx["T_aj"], ctx["Pv_a"], ctx["Pv_i"], ctx["S"], ctx["C"]
    Ribc, Ribk, Pibc, Rijk, Pijc, Sibc = (ctx[k] for k in ("R_ibc", "R_ibk", "P_ibc", "R_ijk", "P_ijc", "S_ibc"))

    def dv(T, d):
        return ctx.vsplit(eng.derivative(T, d).comps, (0,))

    D1, D2, th = (ctx.vsplit(t.comps, (0,)) for t in (defl.delta_t, defl.delta_s, defl.theta))
    D1T, D1S, D1V = (dv(defl.delta_t, d) for d in "TSV")
    D2S, D2V = dv(defl.delta_s, "S"), dv(defl.delta_s, "V")
    D2T = dv(defl.delta_s, "T")
    thT, thS, thV = (dv(defl.theta, d) for d in "TSV")
    lab = lambda cl: ctx.labeler("V" + cl, split=(0,))
    out = {}
    out[1] = (lab("TT"), [D1T, -E("aibc", D1T, "aicb")],
              [-s * E("aibc", p, "ar", Ribc, "ribc"), s * E("aibc", p, "fi", chi, "afbc"),
               -E("aibc", th, "aiF", Rab, "Fbc")])
    out[2] = (lab("TS"), [D1S, -E("aibk", D2T, "aikb")],
              [-s * E("aibk", p, "ar", Ribk, "ribk"), -E("aibk", D2, "air", Taj, "rbk"),
               -E("aibk", th, "aiF", Raj, "Fbk")])
    out[3] = (lab("SS"), [D2S, -E("aijk", D2S, "aikj")],
              [-s * E("aijk", p, "ar", Rijk, "rijk"), -E("aijk", th, "aiF", Rij, "Fjk")])
    out[4] = (lab("TV"), [D1V, -E("aibK", thT, "aiKb")],
              [-s * E("aibK", p, "ar", Pibc, "ribK"), -E("aibK", th, "aiF", Pva, "FbK")])
    out[5] = (lab("SV"), [D2V, -E("aijK", thS, "aiKj")],
              [-s * E("aijK", p, "ar", Pijc, "rijK"), -E("aijK", D2, "air", Cd, "rjK"),
               -E("aijK", th, "aiF", Pvi, "FjK")])
    out[6] = (lab("VV"), [thV, -E("aiBK", thV, "aiKB")],
              [-s * E("aiBK", p, "ar", Sibc, "riBK"), -E("aiBK", th, "aiF", S, "FBK")])
    return out


def deflection_identity_residuals(D, mode="symbolic", tol=1e-9, sampling=None, reading="corrected", derivative_connection=None):
    """Residuals of the six deflection d-tensor identities."""
    ctx = _ctx(D, derivative_connection)
    rep = build_report("deflection", deflection_terms(ctx, reading), mode, tol, sampling, kinds=ctx.kinds)
    rep.notes["reading"] = reading
    return rep
