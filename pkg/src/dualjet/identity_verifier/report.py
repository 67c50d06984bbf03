"""Verification records and the symbolic/numeric mode ladder."""

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from ..symbolic import Expr, evaluate_points, sum_products

__all__ = ["Instance", "VerificationReport", "SamplingConfig", "numeric_verify", "build_report", "apply_mode", "MODES"]

MODES = ("symbolic", "numeric", "both")


@dataclass
class Instance:
    """One identity at one free-index tuple.

    ``terms`` are the signed summands of LHS - RHS; ``residual`` is their
    canonical sum.  Numeric fields stay None until sampled.
    """

    identity: object
    index: tuple
    residual: Expr
    terms: tuple = ()
    max_abs_numeric: float = None
    normalized: float = None
    samples_used: int = 0
    domain_failure: bool = False
    passed: bool = None

    @property
    def symbolic_zero(self):
        return not self.residual

    def sort_key(self):
        ident = self.identity
        return (0, ident, "") if isinstance(ident, int) else (1, 0, str(ident)), _index_key(self.index)


def _index_key(idx):
    return tuple(k if isinstance(k, tuple) else (k,) for k in idx)


@dataclass
class VerificationReport:
    suite: str
    instances: list
    mode: str = "symbolic"
    tol: float = 1e-9
    seed: int = None
    samples: int = 0
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.instances = sorted(self.instances, key=Instance.sort_key)

    @property
    def passed(self):
        return all(i.passed for i in self.instances)

    @property
    def failed(self):
        return [i for i in self.instances if not i.passed]

    def identities(self):
        out = []
        for i in self.instances:
            if i.identity not in out:
                out.append(i.identity)
        return out

    def by_identity(self):
        """identity -> (instances, failed, max normalized residual)."""
        out = {}
        for inst in self.instances:
            n, f, mx = out.get(inst.identity, (0, 0, 0.0))
            v = inst.normalized if inst.normalized is not None else (0.0 if inst.symbolic_zero else float("inf"))
            out[inst.identity] = (n + 1, f + (not inst.passed), max(mx, v))
        return out

    def failing_identities(self):
        return [k for k, (_, f, _) in self.by_identity().items() if f]

    def symbolic_zero_count(self):
        return sum(i.symbolic_zero for i in self.instances)

    def all_symbolic_zero(self):
        return all(i.symbolic_zero for i in self.instances)

    def max_numeric(self):
        vals = [i.normalized for i in self.instances if i.normalized is not None]
        return max(vals) if vals else 0.0


def build_report(suite, identities, mode="symbolic", tol=1e-9, sampling=None, notes=None, kinds=None):
    """Instances from ``{id: (labels, lhs_terms, rhs_terms)}`` then the mode ladder.

    ``labels(idx)`` turns a 0-based array index into the reported tuple.
    """
    instances = []
    for ident, (labels, lhs, rhs) in identities.items():
        arrs = [(1, a) for a in lhs] + [(-1, a) for a in rhs]
        if not arrs:
            continue
        shape = arrs[0][1].shape
        for idx in np.ndindex(*shape):
            terms = []
            for sign, a in arrs:
                v = a[idx]
                if v:
                    terms.append(v if sign > 0 else -v)
            res = sum_products([(1, t, None) for t in terms])
            instances.append(Instance(ident, labels(idx), res, tuple(terms)))
    rep = VerificationReport(suite, instances, mode=mode, tol=tol, notes=dict(notes or {}))
    return apply_mode(rep, mode, tol, sampling, kinds)


def apply_mode(rep, mode, tol=1e-9, sampling=None, kinds=None):
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    rep.mode = mode
    rep.tol = tol
    if mode == "symbolic":
        for i in rep.instances:
            i.passed = i.symbolic_zero
            if i.symbolic_zero:
                i.max_abs_numeric = i.normalized = 0.0
        return rep
    cfg = sampling or SamplingConfig(tol=tol)
    if cfg.tol != tol:
        cfg = replace(cfg, tol=tol)
    return numeric_verify(rep, cfg, all_instances=(mode == "numeric"), kinds=kinds)


@dataclass(frozen=True)
class SamplingConfig:
    samples: int = 100
    tol: float = 1e-9
    seed: int = 0
    t_range: tuple = (0.2, 1.2)
    x_range: tuple = (0.2, 1.2)
    p_range: tuple = (-1.0, 1.0)
    max_retries: int = 10

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


def _names_of(exprs):
    names = set()
    for e in exprs:
        names |= e.free_symbols
    return sorted(names)


def _range_for(name, cfg, kinds):
    k = kinds.get(name)
    if k is None:
        k = "t" if name.startswith("t") else "p" if name.startswith("p") else "x"
    return {"t": cfg.t_range, "x": cfg.x_range, "p": cfg.p_range}[k]


def _instance_rng(cfg, inst):
    key = f"{cfg.seed}|{inst.identity}|{inst.index}".encode()
    return np.random.default_rng(int.from_bytes(hashlib.sha256(key).digest()[:8], "little"))


def numeric_verify(report, cfg=None, all_instances=False, kinds=None):
    """Sample residuals at random points.

    Instances whose residual is canonically zero are recorded with value
    0 unless ``all_instances`` is set, in which case every instance is
    evaluated term by term without relying on symbolic cancellation.  The
    score is ``|sum| / (1 + max |term|)``, maximized over points.  Points
    where some term leaves its domain are redrawn, at most
    ``cfg.max_retries`` times.  ``kinds`` optionally maps symbol names to
    ``"t"``, ``"x"`` or ``"p"``; by default the first letter decides.
    """
    cfg = cfg or SamplingConfig(tol=report.tol)
    kinds = kinds or {}
    report.samples = cfg.samples
    report.seed = cfg.seed
    report.tol = cfg.tol
    for inst in report.instances:
        if inst.symbolic_zero and not all_instances:
            inst.max_abs_numeric = inst.normalized = 0.0
            inst.samples_used = 0
            inst.passed = True
            continue
        terms = list(inst.terms) if inst.terms else [inst.residual]
        if not inst.terms and not inst.residual:
            terms = []
        names = _names_of(terms)
        rng = _instance_rng(cfg, inst)

        def draw(k):
            return {nm: rng.uniform(*_range_for(nm, cfg, kinds), size=k) for nm in names}

        pts = draw(cfg.samples)
        good_total = np.zeros(0)
        good_norm = np.zeros(0)
        need = cfg.samples
        retries = 0
        while True:
            if terms:
                vals = np.array(evaluate_points(terms, pts)) if names else np.array(
                    [np.full(need, float(t.constant_value())) for t in terms]
                )
            else:
                vals = np.zeros((1, need))
            ok = np.all(np.isfinite(vals), axis=0)
            total = np.abs(vals.sum(axis=0))
            scale = 1.0 + np.abs(vals).max(axis=0)
            good_total = np.concatenate([good_total, total[ok]])
            good_norm = np.concatenate([good_norm, (total / scale)[ok]])
            need = int((~ok).sum())
            if need == 0 or retries >= cfg.max_retries:
                break
            retries += 1
            pts = draw(need)
        inst.samples_used = len(good_total)
        inst.domain_failure = need > 0
        inst.max_abs_numeric = float(good_total.max()) if len(good_total) else float("nan")
        inst.normalized = float(good_norm.max()) if len(good_norm) else float("nan")
        inst.passed = (not inst.domain_failure) and inst.normalized < cfg.tol
    return report
