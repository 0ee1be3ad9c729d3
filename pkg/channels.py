"""
D-regular mixed-unitary superoperators G(X) = (1/D) sum_d U_d X U_d^dag.

An ensemble is an immutable stack of D unitaries of dimension N. Squaring,
tensoring and the adjoint produce new ensembles with a fixed Kraus ordering so
that serialized results are reproducible.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from errors import DimensionCapError, DimensionMismatchError
from linalg_core import (
    DIMENSION_CAP,
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    UNITARY_TOL,
    as_matrix,
    as_unitary,
    maximally_mixed,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MixedUnitaryEnsemble:
    """A D-regular superoperator given by its Kraus unitaries.

    `unitaries` has shape (degree, dim, dim) and is read-only after
    construction. Weights are always uniform.
    """
    unitaries: np.ndarray
    label: str = ""
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        stack = np.asarray(self.unitaries, dtype=complex)
        if stack.ndim == 2:
            stack = stack[np.newaxis]
        if stack.ndim != 3 or stack.shape[0] < 1 or stack.shape[1] != stack.shape[2]:
            raise DimensionMismatchError(
                f"expected a (degree, dim, dim) stack of square matrices, got shape {stack.shape}"
            )
        if self.validate:
            for index, U in enumerate(stack):
                as_unitary(U, index=index, tol=UNITARY_TOL)
        stack = stack.copy()
        stack.setflags(write=False)
        object.__setattr__(self, "unitaries", stack)

    @classmethod
    def from_list(cls, unitaries: Sequence, label: str = "", validate: bool = True) -> "MixedUnitaryEnsemble":
        return cls(np.stack([np.asarray(U, dtype=complex) for U in unitaries]), label, validate)

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    @property
    def degree(self) -> int:
        return self.unitaries.shape[0]

    def __len__(self) -> int:
        return self.degree

    def __iter__(self):
        return iter(self.unitaries)

    def __getitem__(self, index: int) -> np.ndarray:
        return self.unitaries[index]

    def same_kraus(self, other: "MixedUnitaryEnsemble") -> bool:
        """Entrywise equality of the Kraus stacks (labels ignored)."""
        return self.unitaries.shape == other.unitaries.shape and bool(
            np.array_equal(self.unitaries, other.unitaries)
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, MixedUnitaryEnsemble):
            return NotImplemented
        return self.same_kraus(other) and self.label == other.label

    def __repr__(self) -> str:
        return f"MixedUnitaryEnsemble(dim={self.dim}, degree={self.degree}, label={self.label!r})"


@dataclass(frozen=True)
class MaximallyMixed:
    """The completely mixed state I/dim, the fixed point of every ensemble."""
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")

    def matrix(self) -> np.ndarray:
        return maximally_mixed(self.dim)

    def trace(self) -> float:
        return 1.0


def _tree_sum(terms: np.ndarray) -> np.ndarray:
    """Pairwise reduction over axis 0 in index order."""
    while terms.shape[0] > 1:
        half = terms.shape[0] // 2
        paired = terms[0:2 * half:2] + terms[1:2 * half:2]
        if terms.shape[0] % 2:
            paired = np.concatenate([paired, terms[-1:]])
        terms = paired
    return terms[0]


def _check_operand(G: MixedUnitaryEnsemble, X) -> np.ndarray:
    X = as_matrix(X)
    if X.shape != (G.dim, G.dim):
        raise DimensionMismatchError(
            f"operator of shape {X.shape} does not act on dimension {G.dim}"
        )
    return X


def apply(G: MixedUnitaryEnsemble, X) -> np.ndarray:
    """G(X) = (1/D) sum_d U_d X U_d^dag."""
    X = _check_operand(G, X)
    U = G.unitaries
    terms = U @ X @ U.conj().transpose(0, 2, 1)
    return _tree_sum(terms) / G.degree


def apply_many(G: MixedUnitaryEnsemble, Xs: np.ndarray) -> np.ndarray:
    """apply() over a stack of operators of shape (k, dim, dim)."""
    Xs = np.asarray(Xs, dtype=complex)
    out = np.zeros_like(Xs)
    for U in G.unitaries:
        out += U @ Xs @ U.conj().T
    return out / G.degree


def adjoint(G: MixedUnitaryEnsemble) -> MixedUnitaryEnsemble:
    """Hilbert-Schmidt adjoint: every U_d replaced by U_d^dag."""
    label = G.label[:-1] if G.label.endswith("+") else f"{G.label}+"
    return MixedUnitaryEnsemble(G.unitaries.conj().transpose(0, 2, 1), label, validate=False)


def square(G: MixedUnitaryEnsemble) -> MixedUnitaryEnsemble:
    """G^2 as a degree D^2 ensemble.

    Kraus index d1*D + d2 holds U_{d2} U_{d1} (d1 outer, d2 inner), so that
    apply(square(G), X) == apply(G, apply(G, X)).
    """
    U = G.unitaries
    products = np.einsum("bij,ajk->abik", U, U)
    stack = products.reshape(G.degree * G.degree, G.dim, G.dim)
    return MixedUnitaryEnsemble(stack, f"({G.label})^2", validate=False)


def tensor_channels(G1: MixedUnitaryEnsemble, G2: MixedUnitaryEnsemble,
                    cap: int = DIMENSION_CAP) -> MixedUnitaryEnsemble:
    """G1 (x) G2 with Kraus unitaries U_d (x) V_e, d outer and e inner."""
    dim = G1.dim * G2.dim
    if dim > cap:
        raise DimensionCapError("tensor_channels", dim, cap,
                                "raise --cap or keep the result as a certificate")
    products = np.einsum("dij,ekl->deikjl", G1.unitaries, G2.unitaries)
    stack = products.reshape(G1.degree * G2.degree, dim, dim)
    return MixedUnitaryEnsemble(stack, f"({G1.label})x({G2.label})", validate=False)


def conjugate_by(G: MixedUnitaryEnsemble, W) -> MixedUnitaryEnsemble:
    """The ensemble {W U_d W^dag}."""
    W = as_unitary(W)
    if W.shape[0] != G.dim:
        raise DimensionMismatchError(f"conjugating unitary has dimension {W.shape[0]}, expected {G.dim}")
    return MixedUnitaryEnsemble(W @ G.unitaries @ W.conj().T, f"W({G.label})W+", validate=False)


def identity_ensemble(dim: int) -> MixedUnitaryEnsemble:
    """Degree-1 ensemble {I}."""
    return MixedUnitaryEnsemble(np.eye(dim, dtype=complex)[np.newaxis], f"id{dim}", validate=False)


def pauli_ensemble() -> MixedUnitaryEnsemble:
    """{I, X, Y, Z} on one qubit: the completely depolarizing channel."""
    return MixedUnitaryEnsemble(np.stack([PAULI_I, PAULI_X, PAULI_Y, PAULI_Z]), "pauli", validate=False)


def permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    """P with P|i> = |perm[i]>."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"not a permutation of range({n}): {list(perm)}")
    P = np.zeros((n, n), dtype=complex)
    P[list(perm), np.arange(n)] = 1
    return P


def permutation_ensemble(perms: Sequence[Sequence[int]], label: str = "perm") -> MixedUnitaryEnsemble:
    """Ensemble of permutation matrices: the permutation decomposition of a regular graph."""
    return MixedUnitaryEnsemble(np.stack([permutation_matrix(p) for p in perms]), label, validate=False)


def circulant_ensemble(n: int, shifts: Sequence[int]) -> MixedUnitaryEnsemble:
    """Permutation ensemble of the circulant graph i -> i + s (mod n), one shift per Kraus element.

    Shifts s and -s together give an undirected edge set; a shift equal to n/2
    is an involution and counts once.
    """
    perms: List[List[int]] = [[(i + s) % n for i in range(n)] for s in shifts]
    return permutation_ensemble(perms, label=f"circulant{n}{list(shifts)}")


def walk_matrix(G: MixedUnitaryEnsemble) -> Optional[np.ndarray]:
    """Classical walk matrix (1/D) sum_d P_d when every U_d is a permutation matrix, else None."""
    U = G.unitaries
    is_permutation = (
        np.allclose(U.imag, 0)
        and np.all((np.abs(U.real) < 1e-12) | (np.abs(U.real - 1) < 1e-12))
    )
    if not is_permutation:
        return None
    return U.real.sum(axis=0) / G.degree
