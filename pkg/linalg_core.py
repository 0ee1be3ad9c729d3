"""
Dense complex linear algebra for operators in L(V).

Operators are plain numpy complex128 arrays (row-major). This module holds the
Hilbert-Schmidt geometry, Kronecker products with a materialization cap, the
partial trace over the second tensor factor, Haar sampling and the fixed
orthonormal operator basis used by the spectral estimators.
"""

import logging
from typing import Optional, Union

import numpy as np

from errors import DimensionCapError, DimensionMismatchError, NotUnitaryError

logger = logging.getLogger(__name__)

# Largest number of rows tensor() will materialize
DIMENSION_CAP = 2 ** 16

# Unitarity tolerance, scaled by the dimension
UNITARY_TOL = 1e-10

SeedLike = Union[int, np.random.Generator, None]

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_GATE = np.diag([1, 1j]).astype(complex)
T_GATE = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)


def as_matrix(X) -> np.ndarray:
    """Coerce to a 2-d complex128 array with finite entries."""
    M = np.asarray(X, dtype=complex)
    if M.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d operator, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("operator has non-finite entries")
    return M


def _require_square(X: np.ndarray, what: str = "operator") -> int:
    if X.shape[0] != X.shape[1]:
        raise DimensionMismatchError(f"{what} must be square, got shape {X.shape}")
    return X.shape[0]


def _require_same_shape(X: np.ndarray, Y: np.ndarray) -> None:
    if X.shape != Y.shape:
        raise DimensionMismatchError(f"shape mismatch: {X.shape} vs {Y.shape}")


def hs_inner(X, Y) -> complex:
    """Hilbert-Schmidt inner product <X, Y> = Tr(X Y^dag)."""
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    _require_same_shape(X, Y)
    # vdot conjugates its first argument
    return complex(np.vdot(Y, X))


def hs_norm(X) -> float:
    """Norm induced by hs_inner (the Frobenius norm)."""
    return float(np.linalg.norm(np.asarray(X, dtype=complex)))


def unitarity_deviation(U) -> float:
    """||U^dag U - I||_F."""
    U = np.asarray(U, dtype=complex)
    n = _require_square(U)
    return float(np.linalg.norm(U.conj().T @ U - np.eye(n)))


def unitary_tolerance(n: int, tol: float = UNITARY_TOL) -> float:
    return tol * n


def is_unitary(U, tol: float = UNITARY_TOL) -> bool:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    return unitarity_deviation(U) <= unitary_tolerance(U.shape[0], tol)


def as_unitary(U, index: int = 0, tol: float = UNITARY_TOL) -> np.ndarray:
    """Validate and return U as a read-only complex128 array.

    Args:
        U: candidate matrix
        index: position reported in NotUnitaryError
        tol: per-dimension tolerance

    Returns:
        The validated matrix
    """
    M = np.asarray(U, dtype=complex)
    if M.ndim != 2:
        raise DimensionMismatchError(f"matrix {index}: expected a 2-d operator, got shape {M.shape}")
    n = _require_square(M, f"matrix {index}")
    deviation = unitarity_deviation(M)
    # non-finite entries give a NaN deviation, which must fail
    if not deviation <= unitary_tolerance(n, tol):
        raise NotUnitaryError(index, deviation, unitary_tolerance(n, tol))
    M = M.copy()
    M.setflags(write=False)
    return M


def tensor(A, B, cap: int = DIMENSION_CAP) -> np.ndarray:
    """Kronecker product A (x) B, refusing results with more than `cap` rows."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    rows = A.shape[0] * B.shape[0]
    if rows > cap:
        raise DimensionCapError("tensor", rows, cap, "raise the dimension cap")
    return np.kron(A, B)


def tensor_all(*factors, cap: int = DIMENSION_CAP) -> np.ndarray:
    """Nested left-to-right Kronecker product ((A (x) B) (x) C) ..."""
    if not factors:
        raise ValueError("tensor_all needs at least one factor")
    result = np.asarray(factors[0], dtype=complex)
    for factor in factors[1:]:
        result = tensor(result, factor, cap=cap)
    return result


def check_factorization(X: np.ndarray, dim1: int, dim2: int) -> None:
    if dim1 < 1 or dim2 < 1 or X.shape != (dim1 * dim2, dim1 * dim2):
        raise DimensionMismatchError(
            f"operator of shape {X.shape} does not factor as {dim1} x {dim2}"
        )


def partial_trace_second(X, dim1: int, dim2: int) -> np.ndarray:
    """Trace out the second factor of an operator on C^dim1 (x) C^dim2."""
    X = np.asarray(X, dtype=complex)
    check_factorization(X, dim1, dim2)
    return np.einsum("ajbj->ab", X.reshape(dim1, dim2, dim1, dim2))


def maximally_mixed(dim: int) -> np.ndarray:
    """The completely mixed state I/dim."""
    return np.eye(dim, dtype=complex) / dim


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(n: int, seed: SeedLike = None, m: Optional[int] = None) -> np.ndarray:
    """n x m matrix of i.i.d. standard complex Gaussians."""
    rng = make_rng(seed)
    m = n if m is None else m
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)


def haar_unitary(n: int, seed: SeedLike = None) -> np.ndarray:
    """Haar-random n x n unitary.

    QR of a Ginibre matrix, with Q's columns rephased by R's diagonal so the
    result is uniform on U(n) rather than biased by the QR sign convention.
    """
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    Z = ginibre(n, seed)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    phases = d / np.abs(d)
    return Q * phases[np.newaxis, :]


def random_density(n: int, seed: SeedLike = None) -> np.ndarray:
    """Random full-rank density operator (Wishart, unit trace)."""
    G = ginibre(n, seed)
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def traceless_part(X) -> np.ndarray:
    """X - Tr(X) I/n, the projection onto the operators orthogonal to I."""
    X = np.asarray(X, dtype=complex)
    n = _require_square(X)
    return X - np.trace(X) * np.eye(n) / n


def gell_mann_basis(n: int) -> np.ndarray:
    """Hilbert-Schmidt orthonormal basis of the traceless n x n operators.

    Ordering: for each pair j < k (row-major over the upper triangle) the
    symmetric element (E_jk + E_kj)/sqrt2 then the antisymmetric element
    -i(E_jk - E_kj)/sqrt2; then the n-1 diagonal elements
    (sum_{j<l} E_jj - l E_ll)/sqrt(l(l+1)) for l = 1..n-1.

    Returns:
        Array of shape (n*n - 1, n, n)
    """
    basis = np.zeros((n * n - 1, n, n), dtype=complex)
    rows, cols = np.triu_indices(n, 1)
    pairs = np.arange(len(rows))
    basis[2 * pairs, rows, cols] = 1 / np.sqrt(2)
    basis[2 * pairs, cols, rows] = 1 / np.sqrt(2)
    basis[2 * pairs + 1, rows, cols] = -1j / np.sqrt(2)
    basis[2 * pairs + 1, cols, rows] = 1j / np.sqrt(2)
    offset = 2 * len(rows)
    for l in range(1, n):
        element = basis[offset + l - 1]
        scale = 1 / np.sqrt(l * (l + 1))
        element[np.arange(l), np.arange(l)] = scale
        element[l, l] = -l * scale
    return basis


def gell_mann_coordinates(Y) -> np.ndarray:
    """Coordinates <Y, B_k> of Y (or a stack of operators) in gell_mann_basis order.

    Reads the coordinates straight off the entries instead of forming inner
    products with the full basis. The component along I is dropped.
    """
    Y = np.asarray(Y, dtype=complex)
    single = Y.ndim == 2
    if single:
        Y = Y[np.newaxis]
    n = Y.shape[-1]
    rows, cols = np.triu_indices(n, 1)
    upper = Y[:, rows, cols]
    lower = Y[:, cols, rows]
    coords = np.empty((Y.shape[0], n * n - 1), dtype=complex)
    coords[:, 0:2 * len(rows):2] = (upper + lower) / np.sqrt(2)
    coords[:, 1:2 * len(rows):2] = 1j * (upper - lower) / np.sqrt(2)
    diag = np.einsum("kii->ki", Y)
    prefix = np.cumsum(diag, axis=1)
    levels = np.arange(1, n)
    coords[:, 2 * len(rows):] = (prefix[:, :-1] - levels * diag[:, 1:]) / np.sqrt(levels * (levels + 1))
    return coords[0] if single else coords


def operator_basis(n: int) -> np.ndarray:
    """Orthonormal basis of L(C^n): I/sqrt(n) followed by gell_mann_basis(n)."""
    first = (np.eye(n, dtype=complex) / np.sqrt(n))[np.newaxis]
    if n == 1:
        return first
    return np.concatenate([first, gell_mann_basis(n)])
