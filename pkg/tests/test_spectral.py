import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import linalg

from channels import adjoint, apply, circulant_ensemble, conjugate_by, identity_ensemble, pauli_ensemble, walk_matrix
from errors import DimensionCapError
from linalg_core import haar_unitary
from spectral import (
    METHOD_EXACT,
    METHOD_POWER,
    SpectralEstimate,
    classical_lambda,
    classical_second_singular_value,
    estimate_lambda,
    lambda_diagonal,
    lambda_exact,
    lambda_power,
    restricted_matrix,
    superoperator_matrix,
)

# tight settings for the agreement checks
AGREEMENT = dict(tol=1e-14, max_iter=20000, restarts=3)


class TestKnownChannels:
    def test_pauli(self):
        assert lambda_exact(pauli_ensemble()).lam <= 1e-12
        assert lambda_power(pauli_ensemble()).lam <= 1e-10

    @pytest.mark.parametrize("n", [2, 5])
    def test_identity(self, n):
        assert_allclose(lambda_exact(identity_ensemble(n)).lam, 1, atol=1e-12)
        assert_allclose(lambda_power(identity_ensemble(n)).lam, 1, atol=1e-10)

    @pytest.mark.parametrize("n", [2, 6])
    def test_single_unitary(self, n, ensemble_factory):
        G = ensemble_factory(n, 1, seed=n)
        assert_allclose(lambda_exact(G).lam, 1, atol=1e-12)
        assert_allclose(lambda_power(G).lam, 1, atol=1e-10)

    def test_one_dimensional(self):
        assert lambda_exact(identity_ensemble(1)).lam == 0.0
        assert lambda_power(identity_ensemble(1)).lam == 0.0

    @pytest.mark.parametrize("n", [2, 4, 7])
    def test_two_unitaries_always_reach_one(self, n, ensemble_factory):
        # traceless operators commuting with U_1^dag U_2 are preserved in norm
        G = ensemble_factory(n, 2, seed=3)
        assert_allclose(lambda_exact(G).lam, 1, atol=1e-10)


class TestSuperoperator:
    def test_pauli_is_rank_one(self):
        vec_identity = np.eye(2).reshape(-1)
        assert_allclose(superoperator_matrix(pauli_ensemble()), np.outer(vec_identity, vec_identity) / 2,
                        atol=1e-15)

    def test_restriction_shape(self, ensemble_factory):
        assert restricted_matrix(ensemble_factory(3, 2)).shape == (8, 8)

    @pytest.mark.parametrize("n, d", [(3, 2), (6, 3), (8, 4)])
    def test_top_singular_value_of_restriction(self, n, d, ensemble_factory):
        G = ensemble_factory(n, d, seed=n)
        assert_allclose(lambda_exact(G).lam, linalg.svdvals(restricted_matrix(G))[0], atol=1e-12)

    def test_restriction_norm_matches_superoperator(self, ensemble_factory):
        G = ensemble_factory(3, 3)
        n = G.dim
        vec_identity = np.eye(n).reshape(-1) / np.sqrt(n)
        projector = np.eye(n * n) - np.outer(vec_identity, vec_identity)
        expected = np.linalg.norm(projector @ superoperator_matrix(G) @ projector, 2)
        assert_allclose(lambda_exact(G).lam, expected, atol=1e-12)


class TestEstimators:
    @pytest.mark.parametrize("seed", range(20))
    def test_power_agrees_with_exact(self, seed, ensemble_factory):
        G = ensemble_factory([4, 8, 16][seed % 3], [3, 4][seed % 2], seed)
        exact = lambda_exact(G).lam
        power = lambda_power(G, seed=seed, **AGREEMENT).lam
        assert abs(power - exact) <= 1e-8
        assert power <= exact + 1e-8

    @pytest.mark.parametrize("seed", range(5))
    def test_range(self, seed, ensemble_factory):
        lam = lambda_exact(ensemble_factory(5, 3, seed)).lam
        assert -1e-12 <= lam <= 1 + 1e-10

    def test_conjugation_invariance(self, ensemble_factory):
        G = ensemble_factory(4, 3)
        W = haar_unitary(4, seed=99)
        assert abs(lambda_exact(conjugate_by(G, W)).lam - lambda_exact(G).lam) <= 1e-9

    def test_adjoint_invariance(self, ensemble_factory):
        G = ensemble_factory(5, 4)
        assert abs(lambda_exact(adjoint(G)).lam - lambda_exact(G).lam) <= 1e-9

    def test_power_is_deterministic(self, ensemble_factory):
        G = ensemble_factory(4, 3)
        assert lambda_power(G, seed=5) == lambda_power(G, seed=5)

    def test_power_reports_non_convergence(self, ensemble_factory, caplog):
        with caplog.at_level(logging.WARNING, logger="spectral"):
            estimate = lambda_power(ensemble_factory(4, 3), max_iter=1, restarts=1)
        assert not estimate.converged
        assert estimate.iterations == 1
        assert "did not converge" in caplog.text

    def test_converged_residual_within_tolerance(self, ensemble_factory):
        estimate = lambda_power(ensemble_factory(4, 4), tol=1e-10)
        assert estimate.converged
        assert estimate.residual <= 1e-10

    def test_exact_cap(self, ensemble_factory):
        with pytest.raises(DimensionCapError):
            lambda_exact(ensemble_factory(5, 2), cap=4)

    def test_dispatch(self, ensemble_factory):
        G = ensemble_factory(4, 3)
        assert estimate_lambda(G).method == METHOD_EXACT
        assert estimate_lambda(G, exact_cap=3).method == METHOD_POWER
        assert estimate_lambda(G, method="power", restarts=1).method_tag == "power"
        with pytest.raises(ValueError):
            estimate_lambda(G, method="lanczos")

    def test_estimate_to_dict(self):
        estimate = SpectralEstimate(0.5, METHOD_POWER, 12, 1e-11, 3)
        assert estimate.to_dict() == {"lam": 0.5, "method": METHOD_POWER, "iterations": 12,
                                      "residual": 1e-11, "seed": 3, "converged": True}


class TestClassicalCorrespondence:
    def test_circulant_diagonal_lambda(self):
        G = circulant_ensemble(8, [1, -1, 4])
        W = walk_matrix(G)
        eigenvalues = np.linalg.eigvalsh(W)
        oracle = np.sort(np.abs(eigenvalues))[-2]
        assert abs(lambda_diagonal(G) - oracle) <= 1e-10
        assert abs(classical_second_singular_value(W) - oracle) <= 1e-10
        assert_allclose(oracle, (1 + np.sqrt(2)) / 3, atol=1e-12)

    def test_diagonal_action_is_the_walk(self):
        G = circulant_ensemble(8, [1, -1, 4])
        p = np.random.default_rng(0).random(8)
        assert_allclose(np.diag(apply(G, np.diag(p))), walk_matrix(G) @ p, atol=1e-14)

    def test_full_lambda_dominates_classical(self):
        G = circulant_ensemble(8, [1, -1, 4])
        assert lambda_exact(G).lam >= lambda_diagonal(G) - 1e-12
        assert_allclose(classical_lambda(G), lambda_diagonal(G), atol=1e-10)

    def test_non_symmetric_walk(self):
        W = walk_matrix(circulant_ensemble(5, [1, 2]))
        assert_allclose(classical_second_singular_value(W), np.linalg.svd(W, compute_uv=False)[1], atol=1e-12)

    def test_classical_lambda_of_non_permutations(self):
        assert classical_lambda(pauli_ensemble()) is None
