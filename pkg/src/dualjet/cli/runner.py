"""Build the geometry a config describes and run the selected checks."""

import random
import time
from dataclasses import dataclass, field

from .. import arrays
from ..chart import DegenerateMetricError, NonlinearConnection, SpatialMetric, TemporalMetric
from ..chart import canonical_nonlinear_connection, christoffel_spatial, christoffel_temporal
from ..connections import HNormalConnection, NotCartanError, berwald_connection, random_cartan, random_polynomial
from ..connections import verify_normalization
from ..identity_verifier import (
    DVectorField,
    IdentityContext,
    SamplingConfig,
    bianchi_residuals,
    deflection_identity_residuals,
    ricci_residuals,
)
from ..symbolic import parse_expr
from ..torsion_curvature import (
    NotHNormalError,
    curvature_closed_form,
    curvature_from_definition,
    torsion_closed_form,
    torsion_from_definition,
)
from .config import ConfigError

__all__ = ["Geometry", "CheckResult", "RunResult", "build_geometry", "ricci_fields", "run"]


@dataclass
class Geometry:
    chart: object
    h: object
    phi: object
    connection: HNormalConnection
    derivative_connection: HNormalConnection = None


@dataclass
class CheckResult:
    name: str
    status: str  # "pass", "fail" or "error"
    instances_total: int = 0
    instances_failed: int = 0
    max_numeric_residual: float = 0.0
    identities: list = field(default_factory=list)  # [{id, instances, failed, max_numeric_residual}]
    failing_identities: list = field(default_factory=list)
    domain_failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self):
        return self.status == "pass"


@dataclass
class RunResult:
    config: object
    checks: list
    geometry: Geometry = None
    torsion: object = None
    curvature: object = None

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def exit_status(self):
        return 0 if self.passed else 1


def _matrix(entries, size, chart):
    M = [[parse_expr("0")] * size for _ in range(size)]
    for a, b, text in entries:
        e = parse_expr(text, chart)
        M[a - 1][b - 1] = M[b - 1][a - 1] = e
    return M


def build_geometry(cfg):
    """Chart, metrics and the h-normal connection of ``cfg`` (ConfigError on bad data)."""
    chart = cfg.chart()
    try:
        h = TemporalMetric(chart, _matrix(cfg.h, cfg.m, chart))
    except (DegenerateMetricError, ValueError) as exc:
        raise ConfigError(f"temporal metric h: {exc}", field="h") from None
    try:
        phi = SpatialMetric(chart, _matrix(cfg.phi, cfg.n, chart))
    except (DegenerateMetricError, ValueError) as exc:
        raise ConfigError(f"spatial metric phi: {exc}", field="phi") from None
    if cfg.connection == "berwald":
        D = berwald_connection(h, phi, chart)
    elif cfg.connection == "random-cartan":
        D = random_cartan(chart, seed=cfg.seed_connection, degree=cfg.degree, density=cfg.density, h=h,
                          N=_canonical_n(h, phi, chart) if cfg.canonical_n else None)
    else:
        m, n = cfg.m, cfg.n
        arrs = {
            "A": arrays.zeros((n, n, m)),
            "H": arrays.zeros((n, n, n)),
            "C": arrays.zeros((n, n, n, m)),
            "N1": arrays.zeros((m, n, m)),
            "N2": arrays.zeros((m, n, n)),
        }
        for name, idx, text in cfg.blocks:
            arrs[name][tuple(k - 1 for k in idx)] = parse_expr(text, chart)
        if any(name in ("N1", "N2") for name, _, _ in cfg.blocks):
            N = NonlinearConnection(chart, arrs["N1"], arrs["N2"])
        else:
            N = _canonical_n(h, phi, chart)
        D = HNormalConnection(h, N, A=arrs["A"], H=arrs["H"], C=arrs["C"])
    dc = None
    if cfg.fault is not None:
        dc = D.perturbed(cfg.fault[0], cfg.fault[1], parse_expr(cfg.fault_delta, chart))
    return Geometry(chart, h, phi, D, dc)


def _canonical_n(h, phi, chart):
    return canonical_nonlinear_connection(christoffel_temporal(h), christoffel_spatial(phi), chart)


def ricci_fields(chart, count, seed=0):
    """``count`` seeded polynomial d-vector fields with every component block populated."""
    rng = random.Random(f"ricci-fields|{seed}")
    coords = list(chart.T) + list(chart.X) + [p for row in chart.P for p in row]
    out = []
    for _ in range(count):
        parts = []
        for size in (chart.m, chart.n, chart.m * chart.n):
            comps = [random_polynomial(rng, coords, 2, 2) if rng.random() < 0.7 else parse_expr("0")
                     for _ in range(size)]
            if all(not c for c in comps):
                comps[rng.randrange(size)] = random_polynomial(rng, coords, 2, 2)
            parts.append(comps)
        out.append(DVectorField(chart, *parts))
    return out


def _summarize(result, reports):
    """Fold verification reports into ``result`` (ids are merged across reports)."""
    agg = {}
    for rep in reports:
        for inst in rep.instances:
            n, f, mx = agg.get(inst.identity, (0, 0, 0.0))
            v = inst.normalized
            if v is None:
                v = 0.0 if inst.symbolic_zero else None
            mx = None if (mx is None or v is None) else max(mx, v)
            agg[inst.identity] = (n + 1, f + (not inst.passed), mx)
            if inst.domain_failure:
                result.domain_failures.append({"identity": inst.identity, "index": _jsonable(inst.index)})
    result.identities = [
        {"id": k, "instances": n, "failed": f, "max_numeric_residual": mx} for k, (n, f, mx) in agg.items()
    ]
    result.instances_total = sum(n for n, _, _ in agg.values())
    result.instances_failed = sum(f for _, f, _ in agg.values())
    result.failing_identities = [k for k, (_, f, _) in agg.items() if f]
    vals = [mx for _, _, mx in agg.values()]
    result.max_numeric_residual = None if any(v is None for v in vals) else max(vals, default=0.0)
    result.status = "pass" if result.instances_failed == 0 else "fail"


def _jsonable(idx):
    return [list(k) if isinstance(k, tuple) else k for k in idx]


def _count(fams):
    return sum(t.comps.size for t in fams.values())


class _Runner:
    def __init__(self, cfg, geometry=None):
        self.cfg = cfg
        self.geo = geometry or build_geometry(cfg)
        self.D = self.geo.connection
        self.sampling = SamplingConfig(samples=cfg.samples, tol=cfg.tol, seed=cfg.seed)
        self._cache = {}
        self._ctx = None

    def cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def torsion(self):
        return self.cached("torsion", lambda: torsion_closed_form(self.D))

    def curvature(self):
        return self.cached("curvature", lambda: curvature_closed_form(self.D, self.torsion()))

    def torsion_def(self):
        return self.cached("torsion_def", lambda: torsion_from_definition(self.D.completed))

    def curvature_def(self):
        return self.cached("curvature_def", lambda: curvature_from_definition(self.D.completed))

    def ctx(self):
        if self._ctx is None:
            self._ctx = IdentityContext(self.D, self.geo.derivative_connection)
        return self._ctx

    # -- checks ---------------------------------------------------------
    def check_normalization(self, r):
        res = verify_normalization(self.D)
        total = sum(getattr(res, k).comps.size for k in ("hT", "hM", "v"))
        bad = res.nonzero_components()
        r.instances_total = total
        r.instances_failed = len(bad)
        r.status = "pass" if res.passed else "fail"
        r.details["nonzero"] = [f"{k}{list(idx)}" for k, idx, _ in bad[:20]]

    def check_oracle(self, r):
        tc, cc = self.torsion(), self.curvature()
        td, cd = self.torsion_def(), self.curvature_def()
        failed = 0
        diffs = []
        for closed, defn in ((tc, td), (cc, cd)):
            a, b = closed.families(), defn.families()
            for name in a:
                for idx in arrays.indices(a[name].comps.shape):
                    if a[name].comps[idx] != b[name].comps[idx]:
                        failed += 1
                        if len(diffs) < 20:
                            diffs.append(f"{name}{list(a[name].external_index(idx))}")
        r.instances_total = _count(tc.families()) + _count(cc.families())
        r.instances_failed = failed
        r.status = "pass" if failed == 0 else "fail"
        r.details["differences"] = diffs

    def check_torsion(self, r):
        tc = self.torsion()
        bad = self.torsion_def().extra.get("unexpected", [])
        r.instances_total = _count(tc.families())
        r.instances_failed = len(bad)
        r.status = "pass" if not bad else "fail"
        r.details["nonzero_families"] = tc.nonzero_families()

    def check_curvature(self, r):
        cc = self.curvature()
        bad = self.curvature_def().extra.get("violations", [])
        r.instances_total = _count(cc.families())
        r.instances_failed = len(bad)
        r.status = "pass" if not bad else "fail"
        r.details["nonzero_families"] = cc.nonzero_families()

    def _suite_kw(self):
        return dict(mode=self.cfg.mode, tol=self.cfg.tol, sampling=self.sampling)

    def check_ricci(self, r):
        reps = [
            ricci_residuals(self.ctx(), X, reading=self.cfg.ricci_reading, **self._suite_kw())
            for X in ricci_fields(self.geo.chart, self.cfg.fields, self.cfg.seed)
        ]
        _summarize(r, reps)
        r.details["fields"] = self.cfg.fields

    def check_deflection(self, r):
        _summarize(r, [deflection_identity_residuals(self.ctx(), reading=self.cfg.ricci_reading, **self._suite_kw())])

    def check_bianchi(self, r):
        rep = bianchi_residuals(self.ctx(), reading12=self.cfg.identity12, **self._suite_kw())
        _summarize(r, [rep])
        r.details["symbolic_zeros"] = rep.symbolic_zero_count()


_DISPATCH = {
    "normalization": "check_normalization",
    "oracle-equivalence": "check_oracle",
    "torsion": "check_torsion",
    "curvature": "check_curvature",
    "ricci": "check_ricci",
    "deflection": "check_deflection",
    "bianchi": "check_bianchi",
}


def run(cfg, geometry=None, log=None):
    """Execute ``cfg.checks`` in dependency order; never raises for a failing check."""
    runner = _Runner(cfg, geometry)
    results = []
    for name in cfg.checks:
        r = CheckResult(name, "error")
        t0 = time.perf_counter()
        try:
            getattr(runner, _DISPATCH[name])(r)
        except (NotCartanError, NotHNormalError, ArithmeticError) as exc:
            r.status = "error"
            r.details["error"] = f"{type(exc).__name__}: {exc}"
        r.seconds = time.perf_counter() - t0
        if log:
            log(r)
        results.append(r)
    torsion = runner._cache.get("torsion")
    curvature = runner._cache.get("curvature")
    return RunResult(cfg, results, runner.geo, torsion, curvature)
