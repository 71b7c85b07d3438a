"""Spectral kernels against their independent oracles."""

import numpy as np
import pytest

from sparselab.errors import RankDeficiencyError
from sparselab.linalg import (
    condition_ratio,
    distance_to_colspan,
    jacobi_singular_values,
    largest_singular_value,
    normalize_support,
    restricted_min_sv,
    singular_values,
    smallest_singular_value,
    unit_normal,
)


def test_singular_values_descending_and_known_case():
    sv = singular_values(np.diag([1.0, 3.0, 2.0]))
    assert np.allclose(sv, [3.0, 2.0, 1.0])


@pytest.mark.parametrize("shape", [(5, 5), (9, 4), (4, 9), (12, 12), (30, 7)])
def test_jacobi_oracle_agrees_with_lapack(shape):
    # two independent SVD routes must coincide on generic matrices
    rng = np.random.default_rng(shape[0] * 100 + shape[1])
    a = rng.standard_normal(shape)
    fast = singular_values(a)
    slow = jacobi_singular_values(a)
    assert fast.shape == slow.shape
    assert np.max(np.abs(fast - slow)) < 1e-10 * max(1.0, fast[0])


def test_jacobi_oracle_on_graded_matrix():
    # graded singular values exercise the rotation ordering
    a = np.diag([1e3, 1.0, 1e-3]) @ np.linalg.qr(np.random.default_rng(3).standard_normal((3, 3)))[0]
    fast = singular_values(a)
    slow = jacobi_singular_values(a)
    assert np.max(np.abs(fast - slow) / fast) < 1e-10


def test_singular_value_product_is_determinant_not_condition():
    # tiny determinant with order-one singular values: conditioning and
    # volume are different questions
    a = np.diag([1.0, 1.0, 1e-12])
    sv = singular_values(a)
    assert np.prod(sv) == pytest.approx(abs(np.linalg.det(a)), rel=1e-9)
    assert condition_ratio(a) == pytest.approx(1e12, rel=1e-6)
    assert condition_ratio(np.eye(3)) == 1.0
    assert condition_ratio(np.zeros((2, 2)) + np.diag([1.0, 0.0])) == np.inf


def test_smallest_largest_helpers():
    a = np.diag([4.0, 0.5])
    assert smallest_singular_value(a) == 0.5
    assert largest_singular_value(a) == 4.0


def test_matrix_validation():
    with pytest.raises(ValueError):
        singular_values(np.ones(3))
    with pytest.raises(ValueError):
        singular_values(np.array([[np.nan, 1.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        singular_values(np.empty((0, 3)))


def test_normalize_support():
    assert normalize_support([3, 1], 5) == (1, 3)
    with pytest.raises(ValueError):
        normalize_support([], 5)
    with pytest.raises(ValueError):
        normalize_support([1, 1], 5)
    with pytest.raises(ValueError):
        normalize_support([5], 5)
    with pytest.raises(ValueError):
        normalize_support([-1], 5)


def test_restricted_min_sv_identity_and_submatrix():
    assert restricted_min_sv(np.eye(4), [0, 2]) == pytest.approx(1.0)
    rng = np.random.default_rng(7)
    a = rng.standard_normal((8, 6))
    t = (1, 3, 4)
    direct = smallest_singular_value(a[:, list(t)])
    assert restricted_min_sv(a, t) == pytest.approx(direct, abs=1e-12)
    with pytest.raises(ValueError):
        restricted_min_sv(np.eye(3), [0, 1, 2, 2])
    with pytest.raises(ValueError):
        restricted_min_sv(rng.standard_normal((2, 6)), [0, 1, 2])  # wider than tall


def test_distance_to_colspan_known_cases():
    b = np.eye(4)[:, :2]  # span of e1, e2
    assert distance_to_colspan(np.array([0.0, 0.0, 1.0, 0.0]), b) == pytest.approx(1.0)
    assert distance_to_colspan(np.array([1.0, 2.0, 0.0, 0.0]), b) == pytest.approx(0.0, abs=1e-12)
    v = np.array([1.0, 1.0, 3.0, 4.0])
    assert distance_to_colspan(v, b) == pytest.approx(5.0)


def test_distance_to_colspan_oracle_via_lstsq():
    rng = np.random.default_rng(17)
    for _ in range(20):
        b = rng.standard_normal((10, 6))
        v = rng.standard_normal(10)
        res = v - b @ np.linalg.lstsq(b, v, rcond=None)[0]
        assert distance_to_colspan(v, b) == pytest.approx(
            float(np.linalg.norm(res)), abs=1e-9
        )


def test_unit_normal_properties():
    rng = np.random.default_rng(23)
    for _ in range(20):
        b = rng.standard_normal((9, 8))
        a = unit_normal(b)
        assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(b.T @ a)) < 1e-10
        # deterministic sign: leading significant coordinate positive
        lead = np.argmax(np.abs(a) > 1e-12 * np.max(np.abs(a)))
        assert a[lead] > 0.0
        assert np.array_equal(a, unit_normal(b))


def test_unit_normal_shape_and_rank_errors():
    with pytest.raises(ValueError):
        unit_normal(np.eye(4))
    b = np.zeros((4, 3))
    b[:, 0] = [1.0, 0.0, 0.0, 0.0]
    b[:, 1] = [2.0, 0.0, 0.0, 0.0]
    b[:, 2] = [0.0, 1.0, 0.0, 0.0]
    with pytest.raises(RankDeficiencyError):
        unit_normal(b)


def test_unit_normal_matches_known_hyperplane():
    # span of e1, e2 in R^3: the normal is +-e3, sign fixed to +
    b = np.eye(3)[:, :2]
    assert np.allclose(unit_normal(b), [0.0, 0.0, 1.0])
