"""Machine-readable, plain-text and LaTeX renderings of a run."""

import json
import math
import re
from datetime import datetime, timezone

from .config import config_digest

__all__ = ["report_dict", "report_json", "text_summary", "latex_report", "component_latex", "coordinate_latex", "FAMILY_SYMBOLS"]

FAMILY_SYMBOLS = {
    "T_aj": "T", "T_ij": "T", "P_ib": "P", "Pv_a": "P", "Pv_i": "P",
    "R_ab": "R", "R_aj": "R", "R_ij": "R", "S": "S",
    "chi": r"\chi", "R_ibc": "R", "R_ibk": "R", "P_ibc": "P", "R_ijk": "R", "P_ijc": "P", "S_ibc": "S",
}


def _num(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return float(x)


def report_dict(result, timestamp=None):
    """The JSON report as a dict.  Only ``timestamp`` varies between identical runs."""
    cfg = result.config
    checks = []
    for c in result.checks:
        d = {
            "name": c.name,
            "status": c.status,
            "instances_total": c.instances_total,
            "instances_failed": c.instances_failed,
            "max_numeric_residual": _num(c.max_numeric_residual),
        }
        if c.identities:
            d["identities"] = [dict(i, max_numeric_residual=_num(i["max_numeric_residual"])) for i in c.identities]
            d["failing_identities"] = list(c.failing_identities)
            d["domain_failures"] = list(c.domain_failures)
        if c.details:
            d["details"] = c.details
        checks.append(d)
    ts = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    return {
        "config_digest": config_digest(cfg),
        "seed": cfg.seed,
        "mode": cfg.mode,
        "tol": cfg.tol,
        "samples": cfg.samples,
        "connection": cfg.connection,
        "fault": None if cfg.fault is None else {"block": cfg.fault[0], "index": list(cfg.fault[1]),
                                                 "delta": cfg.fault_delta},
        "passed": result.passed,
        "checks": checks,
        # wall-clock data lives under one key so reports diff cleanly
        "timestamp": {"utc": ts, "seconds": {c.name: round(c.seconds, 6) for c in result.checks}},
    }


def report_json(result, timestamp=None):
    return json.dumps(report_dict(result, timestamp), indent=2, sort_keys=False) + "\n"


def text_summary(result):
    cfg = result.config
    lines = [
        f"dualjet run  config {config_digest(cfg)[:12]}  connection {cfg.connection}"
        f"  mode {cfg.mode}  tol {cfg.tol:g}  seed {cfg.seed}",
    ]
    if cfg.fault is not None:
        lines.append(f"planted fault: {cfg.fault[0]}{list(cfg.fault[1])} += {cfg.fault_delta}")
    for c in result.checks:
        status = c.status.upper() if c.status != "pass" else "pass"
        row = f"  {c.name:<20}{status:<7}{c.instances_total - c.instances_failed:>6}/{c.instances_total:<6}"
        if c.identities:
            ok = sum(1 for i in c.identities if not i["failed"])
            row += f" identities {ok}/{len(c.identities)}"
        if c.max_numeric_residual is not None and c.identities:
            row += f" max residual {c.max_numeric_residual:.3g}"
        if c.failing_identities:
            row += "  failing ids " + ", ".join(str(i) for i in c.failing_identities)
        if "error" in c.details:
            row += "  " + c.details["error"]
        if c.domain_failures:
            row += f"  domain failures {len(c.domain_failures)}"
        lines.append(row.rstrip())
    lines.append(f"overall: {'pass' if result.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def component_latex(name, tensor, idx):
    """Decorated-index name of one component, e.g. ``R^{(1)}_{(2)12}``.

    ``idx`` is the 1-based index from :meth:`DTensor.nonzero`; a vertical
    slot contributes ``(a)`` and ``(i)`` on opposite levels.
    """
    sup, sub = [], []
    for slot, k in zip(tensor.signature, idx):
        if slot.cls == "V":
            a, i = k
            if slot.contra:
                sup.append(f"({a})")
                sub.append(f"({i})")
            else:
                sup.append(f"({i})")
                sub.append(f"({a})")
        else:
            (sup if slot.contra else sub).append(str(k))
    return f"{FAMILY_SYMBOLS.get(name, name)}^{{{''.join(sup)}}}_{{{''.join(sub)}}}"


_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa", "lambda", "mu",
    "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon", "phi", "chi", "psi", "omega",
}


def coordinate_latex(chart):
    """Symbol name -> LaTeX for the coordinates of ``chart``."""
    table = {}

    def plain(nm, letter):
        m = re.fullmatch(letter + r"(\d+)", nm)
        if m:
            return f"{letter}^{{{m.group(1)}}}"
        base = nm.rstrip("0123456789")
        if base in _GREEK:
            digits = nm[len(base):]
            return "\\" + base + (f"^{{{digits}}}" if digits else "")
        return r"\mathrm{" + nm.replace("_", r"\_") + "}"

    for nm in chart.t_names:
        table[nm] = plain(nm, "t")
    for nm in chart.x_names:
        table[nm] = plain(nm, "x")
    for a, row in enumerate(chart.p_names, 1):
        for i, nm in enumerate(row, 1):
            table[nm] = f"{chart.momentum_prefix}^{{{a}}}_{{{i}}}"
    return lambda nm: table.get(nm, nm)


def _family_block(title, comps, names=None):
    out = [rf"\subsection*{{{title}}}"]
    any_ = False
    for name, t in comps.families().items():
        items = list(t.nonzero())
        if not items:
            continue
        any_ = True
        label = name.replace("_", "\\_")
        out.append(rf"\paragraph{{\texttt{{{label}}}}}")
        out.append(r"\begin{align*}")
        rows = [f"{component_latex(name, t, idx)} &= {e.latex(names)}" for idx, e in items]
        out.append(" \\\\\n".join(rows))
        out.append(r"\end{align*}")
    if not any_:
        out.append("All families vanish.")
    return out


def latex_report(result):
    """A standalone LaTeX document with nonzero families and the check table."""
    from ..torsion_curvature import curvature_closed_form, torsion_closed_form

    cfg = result.config
    tor, cur = result.torsion, result.curvature
    if tor is None and result.geometry is not None:
        tor = torsion_closed_form(result.geometry.connection)
    if cur is None and result.geometry is not None:
        cur = curvature_closed_form(result.geometry.connection, tor)
    out = [
        r"\documentclass{article}",
        r"\usepackage{amsmath}",
        r"\begin{document}",
        r"\section*{Verification report}",
        rf"Connection: \texttt{{{cfg.connection}}}, $m={cfg.m}$, $n={cfg.n}$, mode \texttt{{{cfg.mode}}}.",
        "",
        r"\begin{tabular}{llrr}",
        r"check & status & instances & failed \\ \hline",
    ]
    for c in result.checks:
        out.append(rf"\texttt{{{c.name}}} & {c.status} & {c.instances_total} & {c.instances_failed} \\")
    out.append(r"\end{tabular}")
    for c in result.checks:
        if c.failing_identities:
            ids = ", ".join(str(i) for i in c.failing_identities)
            out.append("")
            out.append(rf"Failing \texttt{{{c.name}}} identities: {ids}.")
    names = coordinate_latex(cfg.chart())
    if tor is not None:
        out += _family_block("Torsion", tor, names)
    if cur is not None:
        out += _family_block("Curvature", cur, names)
    out.append(r"\end{document}")
    return "\n".join(out) + "\n"
