import numpy as np
import pytest
from hypothesis import given

from conftest import dm_from_seed, seeds
from qinstr.linalg import (
    SWAP,
    I2,
    LinAlgError,
    X,
    Y,
    Z,
    dag,
    expm_herm,
    herm_eig,
    is_unitary,
    kron,
    partial_trace,
    phase_distance,
    sqrtm_psd,
    trace_norm,
)

P0 = np.diag([1.0, 0.0])
P1 = np.diag([0.0, 1.0])


def _rand_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def _rand_herm(rng, d):
    a = _rand_complex(rng, (d, d))
    return (a + dag(a)) / 2


class TestKron:
    def test_identity(self):
        assert np.array_equal(kron(I2, I2), np.eye(4))

    def test_projectors(self):
        assert np.array_equal(kron(P0, P1), np.diag([0, 1, 0, 0]))

    def test_pauli_product(self):
        assert np.array_equal(kron(Z, Z), np.diag([1, -1, -1, 1]))

    def test_index_rule(self, rng):
        a, b = _rand_complex(rng, (2, 3)), _rand_complex(rng, (3, 2))
        k = kron(a, b)
        for i in range(2):
            for j in range(3):
                for p in range(3):
                    for q in range(2):
                        assert k[i * 3 + p, j * 2 + q] == pytest.approx(a[i, j] * b[p, q], abs=1e-14)

    @given(seeds)
    def test_associative_and_bilinear(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c, d = (_rand_complex(rng, (2, 2)) for _ in range(4))
        s = complex(*rng.normal(size=2))
        assert np.allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-12)
        assert np.allclose(kron(a + s * d, b), kron(a, b) + s * kron(d, b), atol=1e-12)


class TestPartialTrace:
    def test_basis(self):
        assert np.allclose(partial_trace(np.diag([1.0, 0, 0, 0]), 1), P0)

    def test_product(self):
        rho, sigma = dm_from_seed(1), dm_from_seed(2)
        assert np.allclose(partial_trace(kron(rho, sigma), 2), sigma, atol=1e-12)
        assert np.allclose(partial_trace(kron(rho, sigma), 1), rho, atol=1e-12)

    def test_bell_marginal(self):
        v = np.array([1, 0, 0, 1]) / np.sqrt(2)
        assert np.allclose(partial_trace(np.outer(v, v), 2), I2 / 2)

    def test_dimension_error(self):
        with pytest.raises(LinAlgError):
            partial_trace(np.eye(3), 1)
        with pytest.raises(LinAlgError):
            partial_trace(np.eye(4), 3)

    @given(seeds)
    def test_scaled_factor(self, seed):
        rng = np.random.default_rng(seed)
        a, b = _rand_complex(rng, (2, 2)), _rand_complex(rng, (2, 2))
        assert np.allclose(partial_trace(kron(a, b), 1), a * np.trace(b), atol=1e-12)

    @given(seeds)
    def test_swap_trace_identity(self, seed):
        # Tr_2[SWAP (A (x) B)] = B A
        rng = np.random.default_rng(seed)
        a, b = _rand_complex(rng, (2, 2)), _rand_complex(rng, (2, 2))
        assert np.allclose(partial_trace(SWAP @ kron(a, b), 1), b @ a, atol=1e-12)


class TestEig:
    def test_z(self):
        w, _ = herm_eig(Z)
        assert np.allclose(w, [-1, 1])

    def test_x_vectors(self):
        w, v = herm_eig(X)
        assert np.allclose(w, [-1, 1])
        minus = np.array([1, -1]) / np.sqrt(2)
        plus = np.array([1, 1]) / np.sqrt(2)
        assert abs(abs(np.vdot(v[:, 0], minus)) - 1) < 1e-12
        assert abs(abs(np.vdot(v[:, 1], plus)) - 1) < 1e-12

    @given(seeds)
    def test_reconstruction(self, seed):
        h = _rand_herm(np.random.default_rng(seed), 4)
        w, v = herm_eig(h)
        assert np.all(np.diff(w) >= 0)
        assert np.max(np.abs((v * w) @ dag(v) - h)) < 1e-9
        assert is_unitary(v, 1e-9)

    def test_rejects_non_hermitian(self):
        with pytest.raises(LinAlgError):
            herm_eig(np.array([[0, 1], [0, 0]]))


class TestExpm:
    def test_zero(self):
        assert np.allclose(expm_herm(SWAP, 0.0), np.eye(4))

    def test_half_pi(self):
        assert np.allclose(expm_herm(SWAP, np.pi / 2), -1j * SWAP, atol=1e-12)

    def test_pi_over_8(self):
        d = np.pi / 8
        ref = np.cos(d) * np.eye(4) - 1j * np.sin(d) * SWAP
        assert np.max(np.abs(expm_herm(SWAP, d) - ref)) < 1e-12

    @given(seeds)
    def test_unitary(self, seed):
        rng = np.random.default_rng(seed)
        u = expm_herm(_rand_herm(rng, 4), rng.normal())
        assert np.max(np.abs(dag(u) @ u - np.eye(4))) < 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(LinAlgError):
            expm_herm(np.array([[0, 1], [0, 0]]), 1.0)


class TestSqrtAndNorm:
    def test_sqrt_identity(self):
        assert np.allclose(sqrtm_psd(np.eye(2)), np.eye(2))

    @given(seeds)
    def test_sqrt_squares_back(self, seed):
        m = dm_from_seed(seed, 4)
        s = sqrtm_psd(m)
        assert np.max(np.abs(s @ s - m)) < 1e-9

    def test_sqrt_clips_tiny_negative(self):
        m = np.diag([1.0, -5e-11])
        assert np.allclose(sqrtm_psd(m), np.diag([1.0, 0.0]))

    def test_sqrt_rejects_negative(self):
        with pytest.raises(LinAlgError):
            sqrtm_psd(np.diag([1.0, -1e-3]))

    def test_trace_norm_z(self):
        assert trace_norm(Z) == pytest.approx(2.0)

    def test_trace_norm_qme_term(self):
        d = 0.37
        m = np.sin(d) ** 2 * kron(P0, Z)
        assert trace_norm(m) == pytest.approx(2 * np.sin(d) ** 2, abs=1e-14)

    def test_trace_norm_non_hermitian(self):
        assert trace_norm(np.array([[0, 2], [0, 0]])) == pytest.approx(2.0)


def test_phase_distance():
    u = expm_herm(SWAP, 0.3)
    assert phase_distance(u, np.exp(0.7j) * u) < 1e-14
    assert phase_distance(u, np.eye(4)) > 0.1
