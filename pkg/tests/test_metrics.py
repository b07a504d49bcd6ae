import math

import numpy as np
import pytest

from qpriors import models
from qpriors.errors import DomainError, SingularStateError
from qpriors.metrics import closed, degeneracy
from qpriors.metrics.hubner import bures_distance, fidelity, hubner_metric
from qpriors.metrics.tensor import MetricTensor

N_ORACLE = 25


def _oracle(fam, sampler, ref, rng, n=N_ORACLE):
    worst = 0.0
    for _ in range(n):
        a = sampler(rng)
        worst = max(worst, hubner_metric(fam, a).relative_deviation(ref(a)))
    return worst


def test_bloch_oracle(rng):
    ref = lambda a: closed.bures_bloch_closed(models.BlochPoint(*a))  # noqa: E731
    assert _oracle(models.BLOCH, degeneracy.sample_bloch, ref, rng) < 1e-5


def test_escort_q1_oracle(rng):
    ref = lambda a: closed.bures_extended_closed(models.EscortPoint.of(*a))  # noqa: E731
    assert _oracle(models.ESCORT, lambda g: (1.0,) + degeneracy.sample_bloch(g), ref, rng) < 1e-5


def test_escort_oracle(rng):
    ref = lambda a: closed.bures_extended_closed(models.EscortPoint.of(*a))  # noqa: E731
    assert _oracle(models.ESCORT, degeneracy.sample_escort, ref, rng) < 1e-5


def test_spin1_oracle(rng):
    ref = lambda a: closed.spin1_bures_closed(models.SpinOneFamilyPoint(*a))  # noqa: E731
    assert _oracle(models.SPIN1, degeneracy.sample_spin1, ref, rng) < 1e-5


def test_richardson_at_least_as_accurate():
    a = (0.7, 1.1, 2.2)
    ref = closed.bures_bloch_closed(models.BlochPoint(*a))
    d_c = hubner_metric(models.BLOCH, a).relative_deviation(ref)
    d_r = hubner_metric(models.BLOCH, a, method="richardson").relative_deviation(ref)
    assert d_r < 1e-8 and d_c < 1e-6


def test_pure_state_rejected():
    with pytest.raises(DomainError):
        hubner_metric(models.BLOCH, (1.0, 0.5, 0.5))
    with pytest.raises(SingularStateError):
        hubner_metric(models.BLOCH, (1 - 1e-11, 0.5, 0.5))


def test_metric_psd(rng):
    for _ in range(20):
        a = degeneracy.sample_escort(rng)
        g = hubner_metric(models.ESCORT, a)
        assert np.linalg.eigvalsh(g.g).min() > -1e-9 * g.scale ** 0.25
        a3 = degeneracy.sample_bloch(rng)
        assert np.all(np.linalg.eigvalsh(closed.bures_bloch_closed(models.BlochPoint(*a3)).g) > 0)


def test_extended_bures_is_null():
    rep = degeneracy.degeneracy_scan(
        lambda *a: closed.bures_extended_closed(models.EscortPoint.of(*a)),
        lambda g: degeneracy.sample_escort(g, (0.5, 500.0), 0.999),
        300,
    )
    assert rep.degenerate


def test_truncated_extended_bures_is_not_null():
    g = closed.bures_extended_closed(models.EscortPoint.of(2.0, 0.5, 1.0, 1.0), truncated=True)
    assert g.det_ratio > 1e-6
    v = closed.bures_trunc_volume(2.0, 0.5, 1.0)
    assert math.sqrt(g.det) == pytest.approx(float(v), rel=1e-10)


def test_spin1_escort_is_null():
    rep = degeneracy.degeneracy_scan(
        lambda *a: hubner_metric(models.SPIN1_ESCORT, a), degeneracy.sample_spin1_escort, 30, tol=1e-7
    )
    assert rep.degenerate


def test_aberaj_null_and_sigma_reading():
    rep = degeneracy.degeneracy_scan(
        lambda b, s: closed.aberaj_metric_q1(models.AbeRajPoint(b, s)), degeneracy.sample_aberaj, 100
    )
    assert rep.degenerate
    p = models.AbeRajPoint(0.3, 5.0)
    sub = closed.aberaj_metric_q1(p).sub(("b_q", "sigma_q2")).det
    assert sub == pytest.approx(closed.aberaj_volume_candidates(p)["sigma_q2"], rel=1e-10)


def test_bloch_positive_control():
    rep = degeneracy.degeneracy_scan(
        lambda *a: closed.bures_bloch_closed(models.BlochPoint(*a)), degeneracy.sample_bloch, 50
    )
    assert not rep.degenerate


def test_q_antiderivative_stable_form():
    for r in (0.05, 0.4, 0.9):
        a = closed.bures_trunc_antiderivative
        direct = a(500.0, r) - a(0.5, r)
        assert float(closed.bures_trunc_q_integral(0.5, 500.0, r)) == pytest.approx(direct, rel=1e-7)
    # small r: the stable form keeps full relative precision
    small = float(closed.bures_trunc_q_integral(0.5, 500.0, 1e-4))
    assert small > 0 and np.isfinite(small)


def test_f_functions_monotone():
    t = np.linspace(0.01, 0.99, 200)
    for f in (closed.f_b(t), closed.f_f(t), closed.f_bures_q(t, 2.0), closed.f_f_q(t, 0.5), closed.f_f_q(t, 2.0)):
        assert np.all(np.diff(f) > 0)


def test_f_f_q_limit():
    t = np.linspace(0.001, 0.999, 300)
    assert np.allclose(closed.f_f_q(t, 1.0), closed.f_f(t), rtol=1e-12)
    for eps in (1e-3, 1e-5, 1e-7):
        dev = np.max(np.abs(closed.f_f_q(t, 1 + eps) / closed.f_f(t) - 1))
        assert dev < 10 * eps
    assert float(closed.f_f(np.array(0.999999))) == pytest.approx(3.0, rel=1e-5)


def test_f_f_q_matches_fisher_block():
    from qpriors.metrics.fisher import husimi_block

    r = np.array([0.001, 0.1, 0.5, 0.9])
    t = (1 - r) / (1 + r)
    for q in (0.5, 3.0, 10.0):
        ref = 1 / ((1 + r) * husimi_block(q, r)[3])
        assert np.allclose(closed.f_f_q(t, q), ref, rtol=1e-8)


def test_f_eval_dispatch():
    assert closed.f_eval("f_B", 0.5) == pytest.approx(closed.f_b(0.5))
    with pytest.raises(Exception):
        closed.f_eval("f_F_q", 0.5)


def test_tangential_matches_f():
    # dn^2 coefficient is ((1+r) f(W))^-1, up to the 1/4 of the Bures normalization
    for r in (0.1, 0.6, 0.95):
        w = (1 - r) / (1 + r)
        g = closed.bures_bloch_closed(models.BlochPoint(r, 1.0, 1.0))
        assert g[("theta1", "theta1")] / r**2 == pytest.approx(1 / (4 * (1 + r) * closed.f_b(w)), rel=1e-12)


def test_fidelity_and_distance():
    a = models.bloch_rho(models.BlochPoint(0.3, 0.2, 0.1))
    b = models.bloch_rho(models.BlochPoint(0.5, 1.2, 2.1))
    assert fidelity(a, a) == pytest.approx(1.0)
    assert 0 < fidelity(a, b) < 1
    assert bures_distance(a, a) == pytest.approx(0.0, abs=1e-7)


def test_tensor_validation():
    with pytest.raises(Exception):
        MetricTensor(("r", "theta1"), np.array([[1.0, 2.0], [0.0, 1.0]]))
