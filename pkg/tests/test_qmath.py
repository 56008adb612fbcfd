import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sbslab import qmath


def rand_density(rng, d, rank=None):
    return qmath.random_density_matrix(d, rng, rank)


class TestTraceNorm:
    def test_identity(self):
        assert qmath.trace_norm(np.eye(2)) == pytest.approx(2.0, abs=1e-12)

    def test_diag_plus_minus(self):
        assert qmath.trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0, abs=1e-12)

    def test_matches_independent_svd_oracle(self):
        rng = np.random.default_rng(3)
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        # independent route: singular values from the Hermitian eigenproblem of M^dag M
        sv = np.sqrt(np.maximum(np.linalg.eigvalsh(m.conj().T @ m), 0.0))
        assert abs(qmath.trace_norm(m) - sv.sum()) < 1e-10

    def test_non_square_rejected(self):
        with pytest.raises(ValueError, match="square"):
            qmath.trace_norm(np.ones((2, 3)))

    def test_triangle_inequality(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
            b = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
            assert qmath.trace_norm(a + b) <= qmath.trace_norm(a) + qmath.trace_norm(b) + 1e-9


class TestGeneralizedOverlap:
    def test_equal_states(self):
        rng = np.random.default_rng(0)
        rho = rand_density(rng, 4)
        assert qmath.generalized_overlap(rho, rho) == pytest.approx(1.0, abs=1e-10)

    def test_orthogonal_pure_states(self):
        r1 = np.diag([1.0, 0.0]).astype(complex)
        r2 = np.diag([0.0, 1.0]).astype(complex)
        assert qmath.generalized_overlap(r1, r2) == pytest.approx(0.0, abs=1e-10)

    def test_pure_states_give_amplitude_overlap(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            v1 = rng.normal(size=3) + 1j * rng.normal(size=3)
            v2 = rng.normal(size=3) + 1j * rng.normal(size=3)
            v1 /= np.linalg.norm(v1)
            v2 /= np.linalg.norm(v2)
            b = qmath.generalized_overlap(np.outer(v1, v1.conj()), np.outer(v2, v2.conj()))
            assert abs(b - abs(np.vdot(v1, v2))) < 1e-10

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            r1, r2 = rand_density(rng, 3), rand_density(rng, 3)
            assert abs(
                qmath.generalized_overlap(r1, r2) - qmath.generalized_overlap(r2, r1)
            ) < 1e-10

    def test_multiplicativity_under_tensor_products(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            r1, r2 = rand_density(rng, 2), rand_density(rng, 2)
            s1, s2 = rand_density(rng, 3), rand_density(rng, 3)
            lhs = qmath.generalized_overlap(np.kron(r1, s1), np.kron(r2, s2))
            rhs = qmath.generalized_overlap(r1, r2) * qmath.generalized_overlap(s1, s2)
            assert abs(lhs - rhs) < 1e-9

    def test_unity_iff_trace_close(self):
        rng = np.random.default_rng(13)
        pairs = []
        for _ in range(20):
            r1, r2 = rand_density(rng, 3), rand_density(rng, 3)
            pairs.append((r1, r2))          # generic distinct pair
            pairs.append((r1, r1.copy()))   # identical pair
        eps = 1e-12 * rand_density(rng, 3)
        base = rand_density(rng, 3)
        near = base + (eps + eps.conj().T) / 2
        near = near / np.trace(near).real
        pairs.append((base, near))          # numerically-close pair
        for r1, r2 in pairs:
            b = qmath.generalized_overlap(r1, r2)
            assert 0.0 <= b <= 1.0
            close_b = b >= 1.0 - 1e-8
            close_tr = qmath.trace_norm(r1 - r2) < 1e-8
            assert close_b == close_tr

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            qmath.generalized_overlap(np.eye(2) / 2, np.eye(3) / 3)

    def test_negative_input_rejected(self):
        bad = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(ValueError, match="eigenvalue"):
            qmath.generalized_overlap(bad, np.eye(2) / 2)


class TestPartialTrace:
    def test_product_state_recovers_factor(self):
        rng = np.random.default_rng(2)
        ra, rb = rand_density(rng, 2), rand_density(rng, 3)
        joint = np.kron(ra, rb)
        assert np.max(np.abs(qmath.partial_trace(joint, [2, 3], [0]) - ra)) < 1e-12
        assert np.max(np.abs(qmath.partial_trace(joint, [2, 3], [1]) - rb)) < 1e-12

    def test_maximally_entangled_marginals(self):
        v = np.zeros(4, dtype=complex)
        v[0] = v[3] = 1 / math.sqrt(2)
        rho = np.outer(v, v.conj())
        for keep in (0, 1):
            red = qmath.partial_trace(rho, [2, 2], [keep])
            assert np.max(np.abs(red - np.eye(2) / 2)) < 1e-12

    def test_order_independence(self):
        rng = np.random.default_rng(21)
        rho = rand_density(rng, 24)
        dims = [2, 3, 4]
        a = qmath.partial_trace(qmath.partial_trace(rho, dims, [0, 1]), [2, 3], [0])
        b = qmath.partial_trace(qmath.partial_trace(rho, dims, [0, 2]), [2, 4], [0])
        assert np.max(np.abs(a - b)) < 1e-12

    def test_trace_preserved(self):
        rng = np.random.default_rng(22)
        rho = rand_density(rng, 6)
        red = qmath.partial_trace(rho, [2, 3], [1])
        assert abs(np.trace(red) - 1.0) < 1e-12

    def test_inconsistent_dims(self):
        with pytest.raises(ValueError, match="dims"):
            qmath.partial_trace(np.eye(6) / 6, [2, 2], [0])


class TestEntropies:
    def test_pure_state_zero(self):
        assert qmath.von_neumann_entropy(np.diag([1.0, 0.0])) == pytest.approx(0.0, abs=1e-12)

    def test_maximally_mixed(self):
        for d in (2, 3, 5):
            s = qmath.von_neumann_entropy(np.eye(d) / d)
            assert s == pytest.approx(math.log2(d), abs=1e-10)

    def test_quarter_three_quarter(self):
        # independent scalar evaluation of the binary entropy
        expected = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75))
        s = qmath.von_neumann_entropy(np.diag([0.25, 0.75]))
        assert s == pytest.approx(expected, abs=1e-12)
        assert s == pytest.approx(0.8112781244591328, abs=1e-12)

    def test_too_negative_eigenvalue_rejected(self):
        with pytest.raises(ValueError, match="eigenvalue"):
            qmath.von_neumann_entropy(np.diag([1.1, -0.1]))


class TestMutualInformation:
    def test_product_state(self):
        rng = np.random.default_rng(4)
        joint = np.kron(rand_density(rng, 2), rand_density(rng, 3))
        assert qmath.mutual_information(joint, 2, 3) == pytest.approx(0.0, abs=1e-9)

    def test_bell_pair(self):
        v = np.zeros(4, dtype=complex)
        v[0] = v[3] = 1 / math.sqrt(2)
        assert qmath.mutual_information(np.outer(v, v.conj()), 2, 2) == pytest.approx(
            2.0, abs=1e-10
        )

    def test_classical_correlation(self):
        rho = np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex)
        assert qmath.mutual_information(rho, 2, 2) == pytest.approx(1.0, abs=1e-10)

    def test_bounds_on_random_states(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            rho = rand_density(rng, 6)
            i = qmath.mutual_information(rho, 2, 3)
            s_a = qmath.von_neumann_entropy(qmath.partial_trace(rho, [2, 3], [0]))
            s_b = qmath.von_neumann_entropy(qmath.partial_trace(rho, [2, 3], [1]))
            assert i >= -1e-9
            assert i <= 2 * min(s_a, s_b) + 1e-9

    def test_dims_checked(self):
        with pytest.raises(ValueError, match="dim"):
            qmath.mutual_information(np.eye(6) / 6, 2, 2)


class TestHolevoChi:
    def test_identical_states(self):
        rng = np.random.default_rng(8)
        rho = rand_density(rng, 3)
        assert qmath.holevo_chi([0.3, 0.7], [rho, rho.copy()]) == pytest.approx(0.0, abs=1e-10)

    def test_orthogonal_supports_reach_shannon(self):
        r1 = np.diag([1.0, 0.0]).astype(complex)
        r2 = np.diag([0.0, 1.0]).astype(complex)
        p = [0.2, 0.8]
        assert qmath.holevo_chi(p, [r1, r2]) == pytest.approx(
            qmath.shannon_entropy(p), abs=1e-10
        )

    def test_two_pure_states_closed_form(self):
        theta = 0.7
        v1 = np.array([1.0, 0.0], dtype=complex)
        v2 = np.array([math.cos(theta), math.sin(theta)], dtype=complex)
        chi = qmath.holevo_chi(
            [0.5, 0.5], [np.outer(v1, v1.conj()), np.outer(v2, v2.conj())]
        )
        # eigenvalues of the average of two pure states at overlap cos(theta)
        lam = np.array([(1 + math.cos(theta)) / 2, (1 - math.cos(theta)) / 2])
        expected = float(-np.sum(lam * np.log2(lam)))
        assert chi == pytest.approx(expected, abs=1e-10)

    def test_bounded_by_shannon_entropy(self):
        rng = np.random.default_rng(10)
        for _ in range(25):
            p = rng.dirichlet(np.ones(3))
            states = [rand_density(rng, 3) for _ in range(3)]
            assert qmath.holevo_chi(p, states) <= qmath.shannon_entropy(p) + 1e-9

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="probabilities"):
            qmath.holevo_chi([0.5, 0.5], [np.eye(2) / 2])


class TestDomainTypes:
    def test_density_matrix_accepts_valid_state(self):
        rng = np.random.default_rng(1)
        dm = qmath.DensityMatrix(qmath.random_density_matrix(3, rng))
        assert dm.dim == 3

    def test_density_matrix_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            qmath.DensityMatrix(np.array([[0.5, 0.4], [0.1, 0.5]]))

    def test_density_matrix_rejects_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            qmath.DensityMatrix(np.eye(2))

    def test_density_matrix_rejects_negative(self):
        with pytest.raises(ValueError, match="eigenvalue"):
            qmath.DensityMatrix(np.diag([1.2, -0.2]))

    def test_operator_wraps_non_hermitian(self):
        op = qmath.Operator(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert op.dim == 2
        assert qmath.trace_norm(op) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None, derandomize=True)
@given(seed=st.integers(min_value=0, max_value=10**6))
def test_overlap_stays_in_unit_interval(seed):
    rng = np.random.default_rng(seed)
    r1 = qmath.random_density_matrix(3, rng)
    r2 = qmath.random_density_matrix(3, rng)
    b = qmath.generalized_overlap(r1, r2)
    assert 0.0 <= b <= 1.0


@settings(max_examples=40, deadline=None, derandomize=True)
@given(seed=st.integers(min_value=0, max_value=10**6))
def test_entropy_nonnegative_and_bounded(seed):
    rng = np.random.default_rng(seed)
    rho = qmath.random_density_matrix(4, rng)
    s = qmath.von_neumann_entropy(rho)
    assert -1e-12 <= s <= 2.0 + 1e-9
