"""Restricted isometry constants: exactness, invariances, certificates."""

import json

import numpy as np
import pytest

from sparselab.ensembles import EnsembleSpec, sample_matrix
from sparselab.errors import BudgetExceededError
from sparselab.ric import (
    CT_THRESHOLD,
    CertStatus,
    ct_certificate,
    exact_ric,
    iter_supports,
    matrix_checksum,
    randomized_ric,
    ric_proposition_experiment,
    support_count,
)


def test_identity_has_zero_constant():
    for s in (1, 2, 3):
        assert exact_ric(np.eye(5), s).delta == 0.0


def test_diagonal_worked_example():
    # diag(1, 1/2): the order-1 constant is 1 - (1/2)^2 = 3/4 because
    # the definition is in squared norms
    r = exact_ric(np.diag([1.0, 0.5]), 1)
    assert r.delta == pytest.approx(0.75, abs=1e-15)
    assert r.worst_support == (1,)
    assert r.method == "exhaustive"
    assert not r.lower_bound


def test_delta_monotone_in_order():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((10, 12)) / np.sqrt(10)
    deltas = [exact_ric(a, s).delta for s in range(1, 6)]
    assert all(d1 <= d2 + 1e-12 for d1, d2 in zip(deltas, deltas[1:]))


def test_column_permutation_invariance():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((8, 10)) / np.sqrt(8)
    perm = rng.permutation(10)
    for s in (1, 2, 3):
        assert exact_ric(a, s).delta == pytest.approx(
            exact_ric(a[:, perm], s).delta, abs=1e-12
        )


def test_worst_support_attains_delta():
    rng = np.random.default_rng(13)
    a = rng.standard_normal((9, 11)) / np.sqrt(9)
    r = exact_ric(a, 3)
    g = a[:, list(r.worst_support)].T @ a[:, list(r.worst_support)]
    w = np.linalg.eigvalsh(g)
    assert max(w[-1] - 1.0, 1.0 - w[0]) == pytest.approx(r.delta, abs=1e-12)


def test_randomized_is_lower_bound_and_covers_small_cases():
    rng = np.random.default_rng(21)
    a = rng.standard_normal((8, 9)) / np.sqrt(8)
    exact = exact_ric(a, 2)
    rand = randomized_ric(a, 2, trials=3000, seed=0)
    assert rand.lower_bound
    assert rand.delta <= exact.delta + 1e-15
    # 3000 uniform draws over C(9,2) = 36 supports miss nothing
    assert rand.delta == pytest.approx(exact.delta, abs=1e-15)


def test_budget_guard():
    a = np.eye(40)
    with pytest.raises(BudgetExceededError):
        exact_ric(a, 10, budget=1000)


def test_support_enumeration_order():
    sup = list(iter_supports(4, 2))
    assert sup == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    assert support_count(4, 2) == 6


def test_report_json_and_checksum():
    a = np.diag([1.0, 0.5])
    r = exact_ric(a, 1)
    doc = json.loads(r.to_json())
    assert doc["delta_s"] == 0.75
    assert doc["worst_support"] == [1]
    assert doc["method"] == "exhaustive"
    assert doc["matrix_checksum"] == matrix_checksum(a)
    assert doc["matrix_checksum"] != matrix_checksum(np.diag([1.0, 0.51]))
    assert matrix_checksum(np.zeros((1, 4))) != matrix_checksum(np.zeros((4, 1)))


def test_ct_certificate_statuses():
    # orthonormal columns: all constants zero, certified
    cert = ct_certificate(np.eye(8), 2)
    assert cert.status == CertStatus.CERTIFIED
    assert cert.order == 4
    assert cert.threshold == pytest.approx(CT_THRESHOLD)
    # duplicated column makes delta_2 = 1 > threshold: refuted
    a = np.eye(6)
    a[:, 5] = a[:, 0]
    cert2 = ct_certificate(a, 1)
    assert cert2.status == CertStatus.REFUTED
    # over budget with a randomized bound below threshold: unknown
    cert3 = ct_certificate(np.eye(30), 10, budget=10, randomized_trials=50, seed=0)
    assert cert3.status == CertStatus.UNKNOWN
    assert cert3.report.lower_bound


def test_ct_certificate_validation():
    with pytest.raises(ValueError):
        ct_certificate(np.eye(4), 3)  # 2s > cols


def test_proposition_experiment_counts():
    res = ric_proposition_experiment(12, 16, 2, 0.9, trials=8, seed=1)
    assert res.deltas.shape == (8,)
    assert res.successes == int(np.sum(res.deltas <= 0.9))
    assert res.fraction == res.successes / 8
    assert 0.0 <= res.wilson_low <= res.fraction <= res.wilson_high <= 1.0


def test_proposition_experiment_row_scaling_matters():
    # scaled Gaussian Gram concentrates near identity as rows grow; the
    # constants at 4x rows must typically be smaller
    lean = ric_proposition_experiment(8, 16, 2, 0.5, trials=6, seed=3)
    rich = ric_proposition_experiment(64, 16, 2, 0.5, trials=6, seed=3)
    assert np.median(rich.deltas) < np.median(lean.deltas)


def test_exact_ric_validation():
    with pytest.raises(ValueError):
        exact_ric(np.eye(4), 0)
    with pytest.raises(ValueError):
        exact_ric(np.eye(4), 5)
