"""Tests for the matrix types, validation, and Gershgorin machinery."""

import math

import numpy as np
import pytest

from graphmetric.core import (GershgorinScalars, GraphMetricRejection,
                              SymmetricMatrix, alignment_scalars,
                              definition_violations, edge_weight,
                              gershgorin_left_ends, is_connected, mahalanobis,
                              pairwise_mahalanobis, scaled_left_ends,
                              validate_graph_metric)
from graphmetric.eigen import smallest_eigenpair_dense
from graphmetric.synthetic import random_graph_metric

EX_MATRIX = SymmetricMatrix([[2.0, -2.0, -1.0],
                             [-2.0, 5.0, -2.0],
                             [-1.0, -2.0, 4.0]])


class TestSymmetricMatrix:
    def test_symmetry_exact_by_construction(self):
        a = np.array([[1.0, 0.3], [0.3 + 1e-12, 2.0]])
        m = SymmetricMatrix(a)
        assert m.entries[0, 1] == m.entries[1, 0]

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="not symmetric"):
            SymmetricMatrix([[0.0, 1.0], [2.0, 0.0]])

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            SymmetricMatrix(np.zeros((2, 3)))

    def test_entries_read_only(self):
        m = SymmetricMatrix(np.eye(2))
        with pytest.raises(ValueError):
            m.entries[0, 0] = 5.0

    def test_with_diagonal(self):
        m = EX_MATRIX.with_diagonal(np.array([7.0, 8.0, 9.0]))
        assert m.diagonal().tolist() == [7.0, 8.0, 9.0]
        assert m.entries[0, 1] == -2.0

    def test_with_offdiag_column(self):
        m = EX_MATRIX.with_offdiag_column(1, np.array([-0.5, -0.25]))
        assert m.entries[0, 1] == m.entries[1, 0] == -0.5
        assert m.entries[2, 1] == m.entries[1, 2] == -0.25
        assert m.entries[1, 1] == 5.0


class TestValidation:
    def test_worked_example_accepted(self):
        g = validate_graph_metric(EX_MATRIX)
        # reference smallest eigenvalue for this matrix: 0.1078
        assert g.certificate.lambda_min == pytest.approx(0.1078, abs=1e-3)
        dense = smallest_eigenpair_dense(EX_MATRIX)
        assert g.certificate.lambda_min == pytest.approx(dense.value, abs=1e-12)

    def test_identity_rejected_disconnected(self):
        with pytest.raises(GraphMetricRejection) as exc:
            validate_graph_metric(SymmetricMatrix(np.eye(3)))
        assert any("disconnected" in r for r in exc.value.reasons)

    def test_indefinite_rejected(self):
        # eigenvalues 1 +- 2 by hand: lambda_min = -1
        with pytest.raises(GraphMetricRejection) as exc:
            validate_graph_metric(SymmetricMatrix([[1.0, -2.0], [-2.0, 1.0]]))
        assert any("non-PD" in r for r in exc.value.reasons)

    def test_positive_offdiagonal_rejected(self):
        reasons = definition_violations(
            SymmetricMatrix([[2.0, 0.5], [0.5, 2.0]]))
        assert any("positive off-diagonal" in r for r in reasons)

    def test_nonpositive_diagonal_rejected(self):
        reasons = definition_violations(
            SymmetricMatrix([[0.0, -1.0], [-1.0, 2.0]]))
        assert any("non-positive diagonal" in r for r in reasons)

    def test_all_violations_reported_together(self):
        m = SymmetricMatrix([[-1.0, 0.0, 0.5],
                             [0.0, 1.0, 0.0],
                             [0.5, 0.0, 1.0]])
        reasons = definition_violations(m)
        joined = " ".join(reasons)
        for expected in ("non-positive diagonal", "positive off-diagonal",
                         "disconnected", "non-PD"):
            assert expected in joined

    def test_certificate_eigvec_positive_unit(self):
        g = validate_graph_metric(EX_MATRIX)
        v = g.certificate.eigvec
        assert np.all(v > 0)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


class TestGershgorin:
    def test_worked_example_left_ends(self):
        # disc left-ends for this matrix are {-1, 1, 1}
        assert gershgorin_left_ends(EX_MATRIX).tolist() == [-1.0, 1.0, 1.0]

    def test_identity_left_ends(self):
        assert gershgorin_left_ends(
            SymmetricMatrix(np.eye(3))).tolist() == [1.0, 1.0, 1.0]

    def test_hand_2x2(self):
        m = SymmetricMatrix([[5.0, -3.0], [-3.0, 2.0]])
        assert gershgorin_left_ends(m).tolist() == [2.0, -1.0]

    def test_unit_scalars_match_plain(self):
        s = GershgorinScalars(np.ones(3))
        assert np.array_equal(scaled_left_ends(EX_MATRIX, s),
                              gershgorin_left_ends(EX_MATRIX))
        assert scaled_left_ends(EX_MATRIX, s).tolist() == [-1.0, 1.0, 1.0]

    def test_alignment_from_unit_eigvec_reciprocals(self):
        # s_k = 1/v_k for the unit-norm eigenvector aligns all left-ends
        g = validate_graph_metric(EX_MATRIX)
        s = alignment_scalars(g)
        expected = 1.0 / g.certificate.eigvec
        assert np.allclose(s.values, expected, rtol=0, atol=0)
        # printed to 4 digits these are (1.3314, 2.0467, 2.2523)
        assert np.allclose(s.values, [1.3314, 2.0467, 2.2523], atol=5e-4)
        ends = scaled_left_ends(EX_MATRIX, s)
        lam = g.certificate.lambda_min
        assert np.max(np.abs(ends - lam)) < 1e-8
        assert lam == pytest.approx(0.1078, abs=1e-3)

    def test_symmetric_2x2_uniform_eigvec(self):
        a, b = 3.0, 1.0
        g = validate_graph_metric(SymmetricMatrix([[a, -b], [-b, a]]))
        s = alignment_scalars(g)
        assert s.values[0] == pytest.approx(s.values[1], rel=1e-12)
        ends = scaled_left_ends(g.matrix, s)
        assert np.allclose(ends, a - b, atol=1e-10)

    def test_alignment_random_10x10_vs_dense(self):
        rng = np.random.default_rng(7)
        g = random_graph_metric(rng, 10)
        lam = smallest_eigenpair_dense(g.matrix).value
        ends = scaled_left_ends(g.matrix, alignment_scalars(g))
        assert np.max(np.abs(ends - lam)) < 1e-8 * max(1.0, lam)

    def test_alignment_rejects_nonpositive_eigvec(self):
        from graphmetric.core import Certificate, GraphMetric
        bad = GraphMetric(matrix=EX_MATRIX,
                          certificate=Certificate(
                              lambda_min=0.1,
                              eigvec=np.array([0.5, -0.5, 0.7])))
        with pytest.raises(ValueError, match="non-positive"):
            alignment_scalars(bad)

    def test_scalars_must_be_positive(self):
        with pytest.raises(ValueError):
            GershgorinScalars(np.array([1.0, 0.0]))

    def test_scaling_invariance_power_of_two_bitwise(self):
        rng = np.random.default_rng(3)
        g = random_graph_metric(rng, 6)
        s = GershgorinScalars(rng.uniform(0.5, 2.0, size=6))
        base = scaled_left_ends(g.matrix, s)
        scaled = scaled_left_ends(g.matrix, GershgorinScalars(8.0 * s.values))
        assert np.array_equal(base, scaled)

    def test_scaling_invariance_general(self):
        rng = np.random.default_rng(4)
        g = random_graph_metric(rng, 6)
        s = GershgorinScalars(rng.uniform(0.5, 2.0, size=6))
        base = scaled_left_ends(g.matrix, s)
        scaled = scaled_left_ends(g.matrix, GershgorinScalars(3.0 * s.values))
        assert np.max(np.abs(base - scaled)) <= 1e-12

    def test_gct_lower_bound_vs_dense(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            dim = int(rng.integers(2, 15))
            a = rng.normal(size=(dim, dim))
            m = SymmetricMatrix((a + a.T) / 2)
            lam = smallest_eigenpair_dense(m).value
            assert float(np.min(gershgorin_left_ends(m))) <= lam + 1e-10


class TestConnectivity:
    def test_path_connected(self):
        m = SymmetricMatrix([[1.0, -0.1, 0.0],
                             [-0.1, 1.0, -0.1],
                             [0.0, -0.1, 1.0]])
        assert is_connected(m)

    def test_block_diagonal_disconnected(self):
        m = SymmetricMatrix([[1.0, -0.5, 0.0, 0.0],
                             [-0.5, 1.0, 0.0, 0.0],
                             [0.0, 0.0, 1.0, -0.5],
                             [0.0, 0.0, -0.5, 1.0]])
        assert not is_connected(m)

    def test_threshold(self):
        m = SymmetricMatrix([[1.0, -1e-13], [-1e-13, 1.0]])
        assert not is_connected(m)  # below the 1e-12 edge floor


class TestEdgeWeight:
    def test_zero_distance(self):
        assert edge_weight(0.0) == 1.0

    def test_ln2(self):
        assert edge_weight(math.log(2.0)) == pytest.approx(0.5, rel=1e-15)

    def test_large_distance_no_nan(self):
        w = edge_weight(50.0)
        assert w == pytest.approx(math.exp(-50.0), rel=1e-12)
        assert not math.isnan(edge_weight(1e6))
        assert edge_weight(1e6) >= 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            edge_weight(-0.1)


class TestMahalanobis:
    def test_zero_for_equal_points(self):
        f = np.array([1.0, 2.0, 3.0])
        assert mahalanobis(f, f, EX_MATRIX) == 0.0

    def test_identity_is_squared_euclidean(self):
        m = SymmetricMatrix(np.eye(2))
        assert mahalanobis(np.array([3.0, 4.0]), np.zeros(2), m) == 25.0

    def test_worked_example_quadratic_form(self):
        # hand expansion: 2 - 4 + 5 = 3 for difference (1, 1, 0)
        d = mahalanobis(np.array([1.0, 1.0, 0.0]), np.zeros(3), EX_MATRIX)
        assert d == pytest.approx(3.0, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(Exception):
            mahalanobis(np.zeros(2), np.zeros(2), EX_MATRIX)

    def test_symmetry_and_positivity(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            g = random_graph_metric(rng, 4)
            a, b = rng.normal(size=4), rng.normal(size=4)
            assert mahalanobis(a, b, g.matrix) == mahalanobis(b, a, g.matrix)
            assert mahalanobis(a, b, g.matrix) > 0

    def test_pairwise_matches_scalar(self):
        rng = np.random.default_rng(6)
        g = random_graph_metric(rng, 3)
        xs = rng.normal(size=(4, 3))
        ys = rng.normal(size=(5, 3))
        d = pairwise_mahalanobis(xs, ys, g.matrix)
        for i in range(4):
            for j in range(5):
                assert d[i, j] == pytest.approx(
                    mahalanobis(xs[i], ys[j], g.matrix), rel=1e-10, abs=1e-12)


class TestAlignmentProperties:
    def test_alignment_and_positivity_batch(self):
        # smaller batch here; the acceptance suite runs the full 1000
        rng = np.random.default_rng(42)
        for _ in range(100):
            dim = int(rng.integers(2, 31))
            g = random_graph_metric(rng, dim)
            lam = g.certificate.lambda_min
            ends = scaled_left_ends(g.matrix, alignment_scalars(g))
            spread = float(np.max(ends) - np.min(ends))
            assert spread < 1e-8 * max(1.0, lam)
            assert float(np.min(g.certificate.eigvec)) > 1e-10
