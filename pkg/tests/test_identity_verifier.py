import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sphere_connection
from dualjet.chart import JetChart, NonlinearConnection
from dualjet.connections import NotCartanError, random_cartan
from dualjet.identity_verifier import (
    BIANCHI_CLASSES,
    BIANCHI_MAPPING,
    DVectorField,
    IdentityContext,
    SamplingConfig,
    bianchi_mapping_check,
    bianchi_residuals,
    deflection_identity_residuals,
    deflection_oracle,
    deflection_tensors,
    generic_bianchi_residuals,
    generic_ricci_residuals,
    liouville_field,
    ricci_residuals,
    scramble_families,
)
from dualjet.identity_verifier.report import build_report
from dualjet.symbolic import sqrt


def fields(ch):
    """Three d-vector fields with every block populated somewhere."""
    t, x, p = ch.T, ch.X, [q for row in ch.P for q in row]
    mn = ch.m * ch.n
    return [
        DVectorField(ch, [x[0] * t[0]] + [1] * (ch.m - 1), [p[0]] + [t[-1]] * (ch.n - 1), [x[-1]] * mn),
        DVectorField(ch, [1] * ch.m, [x[0] ** 2] * ch.n, [p[k] * t[0] for k in range(mn)]),
        liouville_field(ch),
    ]


def test_sphere_suites_vanish_symbolically(sphere):
    for X in fields(sphere.chart):
        rep = ricci_residuals(sphere, X)
        assert rep.identities() == list(range(1, 19))
        assert rep.all_symbolic_zero()
    rep = deflection_identity_residuals(sphere)
    assert rep.identities() == list(range(1, 7)) and rep.all_symbolic_zero()
    rep = bianchi_residuals(sphere)
    assert rep.identities() == list(range(1, 31)) and rep.all_symbolic_zero()


@given(st.integers(0, 10**6), st.sampled_from([(1, 2), (2, 1), (2, 2)]))
@settings(max_examples=6)
def test_random_cartan_suites_vanish(seed, dims):
    D = random_cartan(JetChart(*dims), seed=seed)
    ctx = IdentityContext(D)
    assert bianchi_residuals(ctx).all_symbolic_zero()
    assert deflection_identity_residuals(ctx).all_symbolic_zero()
    assert ricci_residuals(ctx, fields(D.chart)[0]).all_symbolic_zero()


def test_numeric_mode_on_random_cartan(cartan22):
    rep = bianchi_residuals(cartan22, mode="numeric", sampling=SamplingConfig(samples=100))
    assert rep.passed
    assert rep.samples == 100
    assert all(i.samples_used == 100 for i in rep.instances)
    assert rep.max_numeric() < 1e-9


def test_printed_readings_fail(cartan22):
    X = fields(cartan22.chart)[0]
    assert ricci_residuals(cartan22, X, reading="printed").failing_identities() != []
    assert ricci_residuals(cartan22, X).passed
    assert deflection_identity_residuals(cartan22, reading="printed").failing_identities() != []


def test_identity_12_short_reading_fails(cartan22):
    rep = bianchi_residuals(cartan22, reading12="short")
    assert rep.failing_identities() == [12]


def test_bad_readings(cartan22):
    with pytest.raises(ValueError):
        bianchi_residuals(cartan22, reading12="long")
    with pytest.raises(ValueError):
        ricci_residuals(cartan22, fields(cartan22.chart)[0], reading="other")
    with pytest.raises(ValueError):
        deflection_identity_residuals(cartan22, mode="exact")


def test_labels_follow_classes(cartan22):
    rep = bianchi_residuals(cartan22)
    for inst in rep.instances:
        cls = BIANCHI_CLASSES[inst.identity]
        assert len(inst.index) == len(cls)
        for c, k in zip(cls, inst.index):
            assert isinstance(k, tuple) == (c == "V")


def test_deflection_closed_form_matches_oracle(sphere2, cartan22):
    assert deflection_tensors(sphere2) == deflection_oracle(sphere2)
    assert deflection_tensors(cartan22) == deflection_oracle(cartan22)


def test_non_cartan_is_rejected():
    hn = random_cartan(JetChart(1, 2), seed=3).perturbed("H", (1, 1, 2), 1)
    with pytest.raises(NotCartanError):
        bianchi_residuals(hn)
    with pytest.raises(NotCartanError):
        IdentityContext(hn.completed.perturbed("A_tt", (1, 1, 1)))


def test_derivative_connection_must_share_n(sphere):
    other = NonlinearConnection.zero(sphere.chart)
    bad = random_cartan(sphere.chart, seed=0, N=other)
    with pytest.raises(ValueError):
        IdentityContext(sphere, bad)


def test_fault_is_detected(sphere):
    faulty = sphere.perturbed("A", (1, 2, 1), 1)
    failing = bianchi_residuals(sphere, derivative_connection=faulty).failing_identities()
    assert failing and set(failing) <= {7, 23}
    faulty = sphere.perturbed("H", (1, 2, 2), 1)
    rep = ricci_residuals(sphere, fields(sphere.chart)[0], derivative_connection=faulty)
    assert not rep.passed
    assert not deflection_identity_residuals(sphere, derivative_connection=faulty).passed


def test_h_fault_needs_a_curved_temporal_factor(sphere):
    # on the m = 1 sphere every Bianchi slot an H fault could reach cancels
    faulty = sphere.perturbed("H", (1, 2, 2), 1)
    assert bianchi_residuals(sphere, derivative_connection=faulty).passed
    D = sphere_connection(2, "sphere")
    faulty = D.perturbed("H", (1, 2, 2), 1)
    assert 6 in bianchi_residuals(D, derivative_connection=faulty).failing_identities()


@pytest.mark.parametrize("fixture", ["sphere", "cartan22"])
def test_generic_identities(fixture, request):
    D = request.getfixturevalue(fixture).completed
    assert generic_bianchi_residuals(D).all_symbolic_zero()
    for X in fields(D.chart)[:2]:
        assert generic_ricci_residuals(D, X).all_symbolic_zero()


def test_generic_identities_hold_for_any_connection(sphere):
    # no h-normal or Cartan structure is needed by the generic form
    ch = sphere.chart
    D = sphere.completed.perturbed("H_tt", (1, 1, 2), ch.x(1)).perturbed("C_vv", (1, 1, 1, 2, 1, 1), ch.p(1, 2))
    assert generic_bianchi_residuals(D).all_symbolic_zero()
    assert generic_ricci_residuals(D, fields(ch)[1]).all_symbolic_zero()


def test_mapping_on_true_families(cartan22):
    res = bianchi_mapping_check(IdentityContext(cartan22))
    assert all(eq for eq, _ in res.values())
    assert {v[0] for v in BIANCHI_MAPPING.values()} == {1, 2}


def test_mapping_on_scrambled_families():
    # every id must meet a nonzero residual on at least one chart
    nontrivial = set()
    for dims in [(2, 2), (3, 1), (1, 3)]:
        ctx = scramble_families(IdentityContext(random_cartan(JetChart(*dims), seed=2)), seed=5)
        res = bianchi_mapping_check(ctx)
        assert all(eq for eq, _ in res.values()), [k for k, (eq, _) in res.items() if not eq]
        nontrivial |= {k for k, (_, nz) in res.items() if nz}
    assert nontrivial == set(range(1, 31))


def test_mapping_under_derivative_fault():
    D = random_cartan(JetChart(2, 2), seed=2)
    ctx = scramble_families(IdentityContext(D, D.completed.perturbed("A_vv", (1, 2, 2, 1, 1), 1)), seed=5)
    res = bianchi_mapping_check(ctx)
    assert all(eq for eq, _ in res.values())


# -- report machinery -----------------------------------------------------


def _toy(exprs, mode, **kw):
    import numpy as np

    arr = np.array(exprs, dtype=object)
    return build_report("toy", {1: (lambda idx: idx, [arr], [])}, mode, **kw)


def test_symbolic_mode_flags_nonzero():
    ch = JetChart(1, 1)
    rep = _toy([ch.x(1) - ch.x(1), ch.x(1)], "symbolic")
    assert [i.passed for i in rep.instances] == [True, False]
    assert rep.symbolic_zero_count() == 1


def test_domain_failure_is_reported():
    ch = JetChart(1, 1)
    rep = _toy([sqrt(-1 - ch.p(1, 1) ** 2)], "numeric", sampling=SamplingConfig(samples=5, max_retries=2))
    (inst,) = rep.instances
    assert inst.domain_failure and not inst.passed
    assert inst.samples_used == 0
    assert math.isnan(inst.normalized)


def test_partial_domain_is_redrawn():
    ch = JetChart(1, 1)
    # sqrt(p) is defined for half of p in [-1, 1]; redraws fill the sample
    rep = _toy([sqrt(ch.p(1, 1)) - sqrt(ch.p(1, 1))], "numeric", sampling=SamplingConfig(samples=20, max_retries=50))
    (inst,) = rep.instances
    assert inst.passed and inst.samples_used == 20 and not inst.domain_failure


def test_numeric_mode_is_term_wise():
    ch = JetChart(1, 1)
    x = ch.x(1)
    # the residual is canonically zero but numeric mode evaluates its terms
    rep = _toy([x - x], "numeric")
    assert rep.instances[0].passed
    rep = _toy([x], "both")
    assert not rep.passed and rep.instances[0].normalized > 0


def test_sampling_is_deterministic(cartan22):
    kw = dict(mode="numeric", sampling=SamplingConfig(samples=10, seed=4))
    a = deflection_identity_residuals(cartan22, **kw)
    b = deflection_identity_residuals(cartan22, **kw)
    assert [i.normalized for i in a.instances] == [i.normalized for i in b.instances]


def test_sampling_config_validation():
    with pytest.raises(ValueError):
        SamplingConfig(samples=0)
    with pytest.raises(ValueError):
        SamplingConfig(tol=0)
