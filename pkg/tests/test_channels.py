import numpy as np
import pytest
from numpy.testing import assert_allclose

from channels import (
    MaximallyMixed,
    MixedUnitaryEnsemble,
    adjoint,
    apply,
    apply_many,
    circulant_ensemble,
    conjugate_by,
    identity_ensemble,
    pauli_ensemble,
    permutation_matrix,
    square,
    tensor_channels,
    walk_matrix,
)
from errors import DimensionCapError, DimensionMismatchError, NotUnitaryError
from linalg_core import PAULI_X, PAULI_Z, ginibre, haar_unitary, hs_inner, hs_norm, maximally_mixed, random_density
from spectral import lambda_exact, superoperator_matrix


class TestEnsemble:
    def test_shape_and_read_only(self, ensemble_factory):
        G = ensemble_factory(3, 2)
        assert (G.dim, G.degree, len(G)) == (3, 2, 2)
        assert not G.unitaries.flags.writeable
        with pytest.raises(ValueError):
            G.unitaries[0, 0, 0] = 1

    def test_rejects_non_unitary_with_index(self):
        bad = [np.eye(2), np.array([[1, 0.5], [0, 1]])]
        with pytest.raises(NotUnitaryError) as info:
            MixedUnitaryEnsemble.from_list(bad)
        assert info.value.index == 1

    def test_rejects_mixed_dimensions(self):
        with pytest.raises(DimensionMismatchError):
            MixedUnitaryEnsemble(np.ones((2, 3, 2)))

    def test_equality(self, ensemble_factory):
        assert ensemble_factory(2, 3, seed=1) == ensemble_factory(2, 3, seed=1)
        assert ensemble_factory(2, 3, seed=1) != ensemble_factory(2, 3, seed=2)

    def test_maximally_mixed(self):
        state = MaximallyMixed(4)
        assert_allclose(state.matrix(), np.eye(4) / 4)
        assert_allclose(np.trace(state.matrix()), state.trace())
        with pytest.raises(ValueError):
            MaximallyMixed(0)


class TestApply:
    def test_fixes_completely_mixed_state(self, ensemble_factory):
        G = ensemble_factory(5, 3)
        assert hs_norm(apply(G, maximally_mixed(5)) - maximally_mixed(5)) <= 1e-12

    def test_identity_ensemble(self, rng):
        X = ginibre(3, rng)
        assert_allclose(apply(identity_ensemble(3), X), X, atol=1e-15)

    def test_pauli_kills_traceless(self, rng):
        X = ginibre(2, rng)
        X -= np.trace(X) * np.eye(2) / 2
        assert np.abs(apply(pauli_ensemble(), X)).max() <= 1e-14

    def test_matches_superoperator_matrix(self, ensemble_factory, rng):
        G = ensemble_factory(3, 4)
        X = ginibre(3, rng)
        assert_allclose(superoperator_matrix(G) @ X.reshape(-1), apply(G, X).reshape(-1), atol=1e-12)

    def test_apply_many(self, ensemble_factory, rng):
        G = ensemble_factory(3, 2)
        stack = np.stack([ginibre(3, rng) for _ in range(5)])
        assert_allclose(apply_many(G, stack)[3], apply(G, stack[3]), atol=1e-13)

    def test_dimension_mismatch(self, ensemble_factory):
        with pytest.raises(DimensionMismatchError):
            apply(ensemble_factory(3, 2), np.eye(2))

    def test_trace_contractivity_and_positivity(self, ensemble_factory, rng):
        G = ensemble_factory(4, 3)
        for _ in range(10):
            X = ginibre(4, rng)
            Y = apply(G, X)
            assert abs(np.trace(Y) - np.trace(X)) <= 1e-12 * hs_norm(X)
            assert hs_norm(Y) <= hs_norm(X) * (1 + 1e-12)
        out = apply(G, random_density(4, rng))
        assert_allclose(out, out.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(out).min() >= -1e-12


class TestAdjoint:
    def test_inner_product_identity(self, ensemble_factory, rng):
        G = ensemble_factory(3, 2)
        G_dag = adjoint(G)
        for _ in range(10):
            X, Y = ginibre(3, rng), ginibre(3, rng)
            assert abs(hs_inner(apply(G, X), Y) - hs_inner(X, apply(G_dag, Y))) <= 1e-12 * hs_norm(X) * hs_norm(Y)

    def test_involution(self, ensemble_factory):
        G = ensemble_factory(3, 2)
        assert adjoint(adjoint(G)) == G

    def test_identity_is_self_adjoint(self):
        assert adjoint(identity_ensemble(2)).same_kraus(identity_ensemble(2))


class TestSquare:
    def test_degree_and_ordering(self, ensemble_factory):
        G = ensemble_factory(3, 2)
        G2 = square(G)
        assert (G2.dim, G2.degree) == (3, 4)
        U = G.unitaries
        for d1 in range(2):
            for d2 in range(2):
                assert_allclose(G2[d1 * 2 + d2], U[d2] @ U[d1], atol=1e-15)

    def test_composition(self, ensemble_factory, rng):
        G = ensemble_factory(4, 3)
        X = ginibre(4, rng)
        assert_allclose(apply(square(G), X), apply(G, apply(G, X)), atol=1e-12)

    def test_identity_squared(self):
        G2 = square(identity_ensemble(2))
        assert G2.degree == 1
        assert_allclose(G2[0], np.eye(2))

    @pytest.mark.parametrize("seed", range(24))
    def test_lambda_squares(self, seed, ensemble_factory):
        n, d = [4, 8, 16][seed % 3], [2, 4][seed % 2]
        G = ensemble_factory(n, d, seed)
        assert lambda_exact(square(G)).lam <= lambda_exact(G).lam ** 2 + 1e-9


class TestTensor:
    def test_dimensions(self, ensemble_factory):
        G = tensor_channels(ensemble_factory(2, 2, 1), ensemble_factory(3, 2, 2))
        assert (G.dim, G.degree) == (6, 4)

    def test_ordering(self, ensemble_factory):
        G1, G2 = ensemble_factory(2, 2, 1), ensemble_factory(3, 3, 2)
        G = tensor_channels(G1, G2)
        assert_allclose(G[1 * 3 + 2], np.kron(G1[1], G2[2]), atol=1e-15)

    def test_trivial_factor(self, ensemble_factory):
        G = ensemble_factory(3, 2)
        assert tensor_channels(G, identity_ensemble(1)).same_kraus(G)

    def test_product_operators(self, ensemble_factory, rng):
        G1, G2 = ensemble_factory(2, 2, 1), ensemble_factory(3, 2, 2)
        A, B = ginibre(2, rng), ginibre(3, rng)
        assert_allclose(apply(tensor_channels(G1, G2), np.kron(A, B)), np.kron(apply(G1, A), apply(G2, B)),
                        atol=1e-12)

    def test_cap(self, ensemble_factory):
        with pytest.raises(DimensionCapError):
            tensor_channels(ensemble_factory(4, 2), ensemble_factory(4, 2), cap=8)

    @pytest.mark.parametrize("seed", range(20))
    def test_lambda_is_max(self, seed, ensemble_factory):
        n1, n2 = [(2, 3), (3, 4), (4, 4), (2, 8), (3, 3)][seed % 5]
        G1 = ensemble_factory(n1, 4, seed)
        G2 = ensemble_factory(n2, 3, seed + 100)
        lam = lambda_exact(tensor_channels(G1, G2)).lam
        assert abs(lam - max(lambda_exact(G1).lam, lambda_exact(G2).lam)) <= 1e-8


class TestConjugation:
    def test_conjugate_by(self, ensemble_factory, rng):
        G = ensemble_factory(3, 2)
        W = haar_unitary(3, rng)
        X = ginibre(3, rng)
        expected = W @ apply(G, W.conj().T @ X @ W) @ W.conj().T
        assert_allclose(apply(conjugate_by(G, W), X), expected, atol=1e-12)


class TestPermutations:
    def test_permutation_matrix_maps_basis(self):
        P = permutation_matrix([2, 0, 1])
        assert_allclose(P @ np.eye(3)[:, 0], np.eye(3)[:, 2])

    def test_rejects_non_permutation(self):
        with pytest.raises(ValueError):
            permutation_matrix([0, 0, 1])

    def test_circulant_walk_matrix(self):
        G = circulant_ensemble(8, [1, 7, 4])
        W = walk_matrix(G)
        assert_allclose(W.sum(axis=0), 1)
        assert_allclose(W.sum(axis=1), 1)
        assert_allclose(W[1, 0], 1 / 3)
        assert_allclose(W[4, 0], 1 / 3)

    def test_walk_matrix_of_non_permutations(self):
        G = MixedUnitaryEnsemble.from_list([PAULI_X, PAULI_Z])
        assert walk_matrix(G) is None
