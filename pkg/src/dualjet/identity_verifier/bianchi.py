"""The thirty Bianchi identities of a Cartan-type h-normal connection.

Each template returns its free indices in the order used by the matching
generic residual slice (see :mod:`.generic`): ``F, A, B, C`` for ids 1-17
and ``F, D, A, B, C`` for ids 18-30.  Letters: temporal ``a..f``,
spatial ``i, j, k, l, p, r``, vertical pairs as single capitals.
"""

from .context import E, IdentityContext, alt, cyc
from .report import build_report

__all__ = ["bianchi_terms", "bianchi_residuals", "BIANCHI_CLASSES", "IDENTITY_12_READINGS"]

# free-index classes per identity, in output order
BIANCHI_CLASSES = {
    1: "TTTT", 2: "STTS", 3: "STSS", 4: "SSSS",
    5: "VTTT", 6: "VTTS", 7: "VTSS", 8: "VSSS",
    9: "STSV", 10: "SSSV",
    11: "VTTV", 12: "VTSV", 13: "VSSV",
    14: "SSVV", 15: "VTVV", 16: "VSVV", 17: "VVVV",
    18: "TTTTT", 19: "TTTTS", 20: "TTTTV",
    21: "SSTTT", 22: "SSTTS", 23: "SSTSS", 24: "SSSSS",
    25: "SSTTV", 26: "SSTSV", 27: "SSSSV",
    28: "SSTVV", 29: "SSSVV", 30: "SSVVV",
}

# identity 12 closes with "- T^r_ak P^(d)(p)_(l)r(e)"; "short" drops it
IDENTITY_12_READINGS = ("full", "short")


def bianchi_terms(ctx, reading12="full"):
    """``{id: (labels, lhs_terms, rhs_terms)}`` for the thirty identities."""
    if reading12 not in IDENTITY_12_READINGS:
        raise ValueError(f"reading12 must be one of {IDENTITY_12_READINGS}")
    g = ctx.__getitem__
    d = ctx.d
    chi, Taj, Cd = g("chi"), g("T_aj"), g("C")
    Rab, Raj, Rij, Pva, Pvi, S = g("R_ab"), g("R_aj"), g("R_ij"), g("Pv_a"), g("Pv_i"), g("S")
    Ribc, Ribk, Pibc, Rijk, Pijc, Sibc = g("R_ibc"), g("R_ibk"), g("P_ibc"), g("R_ijk"), g("P_ijc"), g("S_ibc")
    Rv_bc, Rv_bk, Rv_jk, Pv_bc, Pv_jc, Sv = g("Rv_bc"), g("Rv_bk"), g("Rv_jk"), g("Pv_bc"), g("Pv_jc"), g("Sv")
    T = {}

    # first set
    o = "dabc"
    T[1] = (cyc(lambda a, b, c: [E(o, chi, f"d{a}{b}{c}")], "a", "b", "c"), [])
    o = "labk"
    T[2] = (
        alt(lambda a, b: [E(o, Taj, f"l{a}r", Taj, f"r{b}k"), -E(o, d("T_aj", "T"), f"l{a}k{b}")], "a", "b"),
        [E(o, Ribc, "lkab"), -E(o, Cd, "lkF", Rab, "Fab")],
    )
    o = "lajk"
    T[3] = (
        alt(lambda j, k: [E(o, Cd, f"l{k}F", Raj, f"Fa{j}"), E(o, Ribk, f"l{j}a{k}"),
                          E(o, d("T_aj", "S"), f"la{j}{k}")], "j", "k"),
        [],
    )
    o = "lijk"
    T[4] = (cyc(lambda i, j, k: [E(o, Cd, f"l{k}F", Rij, f"F{i}{j}"), -E(o, Rijk, f"l{i}{j}{k}")], "i", "j", "k"), [])

    # second set
    o = "Dabc"
    T[5] = (cyc(lambda a, b, c: [E(o, d("R_ab", "T"), f"D{a}{b}{c}"), E(o, Pva, f"D{c}F", Rab, f"F{a}{b}")],
                "a", "b", "c"), [])
    o = "Dabk"
    T[6] = (
        alt(lambda a, b: [E(o, d("R_aj", "T"), f"D{a}k{b}"), E(o, Pva, f"D{b}F", Raj, f"F{a}k"),
                          E(o, Raj, f"D{b}r", Taj, f"r{a}k")], "a", "b"),
        [E(o, d("R_ab", "S"), "Dabk"), E(o, Pvi, "DkF", Rab, "Fab")],
    )
    o = "Dajk"
    T[7] = (
        alt(lambda j, k: [E(o, d("R_aj", "S"), f"Da{j}{k}"), E(o, Pvi, f"D{k}F", Raj, f"Fa{j}"),
                          E(o, Rij, f"D{k}r", Taj, f"ra{j}")], "j", "k"),
        [-E(o, d("R_ij", "T"), "Djka"), -E(o, Pva, "DaF", Rij, "Fjk")],
    )
    o = "Dijk"
    T[8] = (cyc(lambda i, j, k: [E(o, d("R_ij", "S"), f"D{i}{j}{k}"), E(o, Pvi, f"D{k}F", Rij, f"F{i}{j}")],
                "i", "j", "k"), [])

    # third set
    o = "lakE"
    T[9] = (
        [E(o, d("T_aj", "V"), "lakE"), -E(o, Cd, "lrE", Taj, "rak"), E(o, Pibc, "lkaE"),
         E(o, d("C", "T"), "lkEa"), -E(o, Cd, "lkF", Pva, "FaE"), E(o, Cd, "rkE", Taj, "lar")],
        [],
    )
    o = "ljkE"
    T[10] = (
        alt(lambda j, k: [E(o, d("C", "S"), f"l{j}E{k}"), E(o, Cd, f"l{k}F", Pvi, f"F{j}E"),
                          E(o, Pijc, f"l{j}{k}E")], "j", "k"),
        [],
    )

    # fourth set
    o = "DabE"
    T[11] = (
        alt(lambda a, b: [E(o, d("Pv_a", "T"), f"D{a}E{b}"), E(o, Pva, f"D{b}F", Pva, f"F{a}E")], "a", "b"),
        [E(o, d("R_ab", "V"), "DabE"), E(o, Rv_bc, "DEab"), E(o, S, "DEF", Rab, "Fab")],
    )
    o = "DakE"
    rhs12 = [E(o, d("R_aj", "V"), "DakE"), E(o, Rv_bk, "DEak"), E(o, S, "DEF", Raj, "Fak"),
             E(o, Raj, "Dar", Cd, "rkE")]
    if reading12 == "full":
        rhs12.append(-E(o, Taj, "rak", Pvi, "DrE"))
    T[12] = (
        [E(o, d("Pv_a", "S"), "DaEk"), -E(o, d("Pv_i", "T"), "DkEa"),
         E(o, Pvi, "DkF", Pva, "FaE"), -E(o, Pva, "DaF", Pvi, "FkE")],
        rhs12,
    )
    o = "DjkE"
    T[13] = (
        alt(lambda j, k: [E(o, d("Pv_i", "S"), f"D{j}E{k}"), E(o, Pvi, f"D{k}F", Pvi, f"F{j}E"),
                          E(o, Rij, f"D{k}r", Cd, f"r{j}E")], "j", "k"),
        [E(o, d("R_ij", "V"), "DjkE"), E(o, Rv_jk, "DEjk"), E(o, S, "DEF", Rij, "Fjk")],
    )

    # fifth set
    o = "liBK"
    T[14] = (
        alt(lambda B, K: [E(o, d("C", "V"), f"li{B}{K}"), E(o, Cd, f"ri{K}", Cd, f"lr{B}")], "B", "K"),
        [E(o, Sibc, "liBK"), -E(o, Cd, "liF", S, "FBK")],
    )

    # sixth set
    o = "DaBK"
    T[15] = (
        alt(lambda B, K: [E(o, d("Pv_a", "V"), f"Da{B}{K}"), E(o, Pva, f"Fa{B}", S, f"D{K}F"),
                          -E(o, Pv_bc, f"D{B}a{K}")], "B", "K"),
        [-E(o, d("S", "T"), "DBKa"), -E(o, S, "FBK", Pva, "DaF")],
    )
    o = "DiBK"
    T[16] = (
        alt(lambda B, K: [E(o, d("Pv_i", "V"), f"Di{B}{K}"), E(o, Pvi, f"Fi{B}", S, f"D{K}F"),
                          -E(o, Pv_jc, f"D{B}i{K}"), -E(o, Cd, f"ri{B}", Pvi, f"Dr{K}")], "B", "K"),
        [-E(o, d("S", "S"), "DBKi"), -E(o, S, "FBK", Pvi, "DiF")],
    )

    # seventh set
    o = "DABC"
    T[17] = (cyc(lambda A, B, C: [E(o, d("S", "V"), f"D{A}{B}{C}"), E(o, S, f"F{A}{B}", S, f"D{C}F"),
                                  E(o, Sv, f"D{A}{B}{C}")], "A", "B", "C"), [])

    # eighth set
    o = "deabc"
    T[18] = (cyc(lambda a, b, c: [E(o, d("chi", "T"), f"de{a}{b}{c}")], "a", "b", "c"), [])
    T[19] = ([d("chi", "S")], [])
    T[20] = ([d("chi", "V")], [])
    o = "lpabc"
    T[21] = (cyc(lambda a, b, c: [E(o, d("R_ibc", "T"), f"lp{a}{b}{c}"), E(o, Rab, f"F{a}{b}", Pibc, f"lp{c}F")],
                 "a", "b", "c"), [])
    o = "lpabk"
    T[22] = (
        alt(lambda a, b: [E(o, d("R_ibk", "T"), f"lp{a}k{b}"), E(o, Raj, f"F{a}k", Pibc, f"lp{b}F"),
                          E(o, Taj, f"r{a}k", Ribk, f"lp{b}r")], "a", "b"),
        [E(o, d("R_ibc", "S"), "lpabk"), E(o, Rab, "Fab", Pijc, "lpkF")],
    )
    o = "lpajk"
    T[23] = (
        alt(lambda j, k: [E(o, d("R_ibk", "S"), f"lpa{j}{k}"), E(o, Raj, f"Fa{j}", Pijc, f"lp{k}F"),
                          E(o, Taj, f"ra{j}", Rijk, f"lp{k}r")], "j", "k"),
        [-E(o, d("R_ijk", "T"), "lpjka"), -E(o, Rij, "Fjk", Pibc, "lpaF")],
    )
    o = "lpijk"
    T[24] = (cyc(lambda i, j, k: [E(o, d("R_ijk", "S"), f"lp{i}{j}{k}"), E(o, Rij, f"F{i}{j}", Pijc, f"lp{k}F")],
                 "i", "j", "k"), [])

    # ninth set
    o = "liabE"
    T[25] = (
        alt(lambda a, b: [E(o, d("P_ibc", "T"), f"li{a}E{b}"), E(o, Pva, f"F{a}E", Pibc, f"li{b}F")], "a", "b"),
        [E(o, d("R_ibc", "V"), "liabE"), E(o, Rab, "Fab", Sibc, "liEF")],
    )
    o = "liakE"
    T[26] = (
        [E(o, d("P_ibc", "S"), "liaEk"), -E(o, d("P_ijc", "T"), "likEa"),
         E(o, Pva, "FaE", Pijc, "likF"), -E(o, Pvi, "FkE", Pibc, "liaF")],
        [E(o, d("R_ibk", "V"), "liakE"), E(o, Raj, "Fak", Sibc, "liEF"), E(o, Cd, "rkE", Ribk, "liar"),
         -E(o, Taj, "rak", Pijc, "lirE")],
    )
    o = "lijkE"
    T[27] = (
        alt(lambda j, k: [E(o, d("P_ijc", "S"), f"li{j}E{k}"), E(o, Pvi, f"F{j}E", Pijc, f"li{k}F"),
                          E(o, Cd, f"r{j}E", Rijk, f"li{k}r")], "j", "k"),
        [E(o, d("R_ijk", "V"), "lijkE"), E(o, Rij, "Fjk", Sibc, "liEF")],
    )

    # tenth set
    o = "lpaBK"
    T[28] = (
        alt(lambda B, K: [E(o, d("P_ibc", "V"), f"lpa{B}{K}"), E(o, Pva, f"Fa{B}", Sibc, f"lp{K}F")], "B", "K"),
        [-E(o, d("S_ibc", "T"), "lpBKa"), -E(o, S, "FBK", Pibc, "lpaF")],
    )
    o = "lpiBK"
    T[29] = (
        alt(lambda B, K: [E(o, d("P_ijc", "V"), f"lpi{B}{K}"), E(o, Pvi, f"Fi{B}", Sibc, f"lp{K}F"),
                          -E(o, Cd, f"ri{B}", Pijc, f"lpr{K}")], "B", "K"),
        [-E(o, d("S_ibc", "S"), "lpBKi"), -E(o, S, "FBK", Pijc, "lpiF")],
    )

    # eleventh set
    o = "lpABC"
    T[30] = (cyc(lambda A, B, C: [E(o, d("S_ibc", "V"), f"lp{A}{B}{C}"), E(o, S, f"F{A}{B}", Sibc, f"lp{C}F")],
                 "A", "B", "C"), [])

    return {k: (ctx.labeler(BIANCHI_CLASSES[k]), lhs, rhs) for k, (lhs, rhs) in T.items()}


def bianchi_residuals(D, mode="symbolic", tol=1e-9, sampling=None, reading12="full", derivative_connection=None):
    """Residuals LHS - RHS of the thirty Bianchi identities."""
    ctx = D if isinstance(D, IdentityContext) else IdentityContext(D, derivative_connection)
    rep = build_report("bianchi", bianchi_terms(ctx, reading12), mode, tol, sampling, kinds=ctx.kinds)
    rep.notes["identity_12"] = reading12
    return rep
