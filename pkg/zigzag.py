"""
Zig-Zag product of mixed-unitary ensembles.

Operators on the product space H_{N1} (x) H_{D1} use the basis ordering
|a> (x) |b> -> index a*D1 + b: the expander factor first, the seed factor
second.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from channels import MixedUnitaryEnsemble, adjoint
from errors import DimensionCapError, DimensionMismatchError, RegularityError
from linalg_core import (
    DIMENSION_CAP,
    SeedLike,
    check_factorization,
    gell_mann_basis,
    ginibre,
    make_rng,
    partial_trace_second,
    tensor,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LiftedUnitary:
    """U-dot: applies U_b to the first factor controlled on |b> of the second."""
    matrix: np.ndarray
    block_dim: int
    n_blocks: int

    def block(self, b: int) -> np.ndarray:
        """The U_b acting on the first factor when the second factor is |b>."""
        return self.matrix[b::self.n_blocks, b::self.n_blocks]

    @property
    def dim(self) -> int:
        return self.block_dim * self.n_blocks


def lift(G1: MixedUnitaryEnsemble, cap: int = DIMENSION_CAP) -> LiftedUnitary:
    """<a',b'| U-dot |a,b> = delta_{b'b} (U_b)_{a'a}."""
    N, D = G1.dim, G1.degree
    if N * D > cap:
        raise DimensionCapError("lift", N * D, cap, "raise --cap")
    lifted = np.zeros((N, D, N, D), dtype=complex)
    for b in range(D):
        lifted[:, b, :, b] = G1.unitaries[b]
    matrix = lifted.reshape(N * D, N * D)
    matrix.setflags(write=False)
    return LiftedUnitary(matrix, N, D)


def apply_lifted(G1: MixedUnitaryEnsemble, X, lifted: Optional[LiftedUnitary] = None) -> np.ndarray:
    """G1-dot(X) = U-dot X U-dot^dag."""
    lifted = lift(G1) if lifted is None else lifted
    X = np.asarray(X, dtype=complex)
    if X.shape != (lifted.dim, lifted.dim):
        raise DimensionMismatchError(f"operator of shape {X.shape} does not act on dimension {lifted.dim}")
    return lifted.matrix @ X @ lifted.matrix.conj().T


def apply_second_factor(G2: MixedUnitaryEnsemble, X, dim1: int) -> np.ndarray:
    """(I (x) G2)(X) without forming I (x) V_e."""
    X = np.asarray(X, dtype=complex)
    check_factorization(X, dim1, G2.dim)
    D = G2.dim
    X4 = X.reshape(dim1, D, dim1, D)
    V = G2.unitaries
    Y = np.einsum("kbc,acde,kfe->abdf", V, X4, V.conj())
    return Y.reshape(dim1 * D, dim1 * D) / G2.degree


def _check_regular(G1: MixedUnitaryEnsemble, G2: MixedUnitaryEnsemble) -> None:
    if G2.dim != G1.degree:
        raise RegularityError(
            f"zig-zag needs G1 to be dim(G2)-regular: G1 has degree {G1.degree}, G2 has dimension {G2.dim}"
        )


def zigzag(G1: MixedUnitaryEnsemble, G2: MixedUnitaryEnsemble,
           cap: int = DIMENSION_CAP) -> MixedUnitaryEnsemble:
    """Materialize G1 (z) G2 as a degree D2^2 ensemble on dimension N1*D1.

    Kraus index a*D2 + b holds W_ab = (I (x) V_b) U-dot (I (x) V_a^dag).
    """
    _check_regular(G1, G2)
    lifted = lift(G1, cap=cap)
    identity = np.eye(G1.dim, dtype=complex)
    left = [tensor(identity, V, cap=cap) for V in G2.unitaries]
    right = [tensor(identity, V.conj().T, cap=cap) for V in G2.unitaries]
    kraus = [left[b] @ lifted.matrix @ right[a]
             for a in range(G2.degree) for b in range(G2.degree)]
    logger.debug("zigzag: dim %d, degree %d", lifted.dim, len(kraus))
    return MixedUnitaryEnsemble(np.stack(kraus), f"({G1.label})z({G2.label})", validate=False)


def zigzag_lazy_apply(G1: MixedUnitaryEnsemble, G2: MixedUnitaryEnsemble, X) -> np.ndarray:
    """(I (x) G2) G1-dot (I (x) G2^dag) X, stage by stage."""
    _check_regular(G1, G2)
    Y = apply_second_factor(adjoint(G2), X, G1.dim)
    Y = apply_lifted(G1, Y)
    return apply_second_factor(G2, Y, G1.dim)


def project_parallel(X, dim1: int, dim2: int) -> np.ndarray:
    """Orthogonal projection onto W-par = span{sigma (x) I~}: Tr_2(X) (x) I~."""
    reduced = partial_trace_second(X, dim1, dim2)
    return np.kron(reduced, np.eye(dim2, dtype=complex) / dim2)


def project_perp(X, dim1: int, dim2: int) -> np.ndarray:
    """X - project_parallel(X), the component in W-perp."""
    X = np.asarray(X, dtype=complex)
    return X - project_parallel(X, dim1, dim2)


def wperp_samples(dim1: int, dim2: int, count: int, seed: SeedLike = None,
                  terms: Optional[int] = None) -> np.ndarray:
    """Random elements of W-perp as sums sigma_i (x) tau_i.

    tau_i runs over the traceless Gell-Mann basis of the second factor and
    sigma_i are Ginibre matrices, so the samples span all of W-perp.
    """
    rng = make_rng(seed)
    taus = gell_mann_basis(dim2)
    terms = len(taus) if terms is None else min(terms, len(taus))
    samples = np.empty((count, dim1 * dim2, dim1 * dim2), dtype=complex)
    for k in range(count):
        chosen = rng.choice(len(taus), size=terms, replace=False)
        samples[k] = sum(np.kron(ginibre(dim1, rng), taus[i]) for i in chosen)
    return samples
