"""
Estimators for the expansion parameter lambda-bar: the operator norm of a
superoperator restricted to the traceless operators.

lambda_exact forms the restriction in the Gell-Mann basis and takes its top
singular value. lambda_power never forms it and runs power iteration on
M^dag M with M = P G P, P(X) = X - Tr(X) I~.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np
from scipy import linalg

from channels import MixedUnitaryEnsemble, adjoint, apply, apply_many, walk_matrix
from errors import DimensionCapError
from linalg_core import (
    gell_mann_basis,
    gell_mann_coordinates,
    ginibre,
    hs_norm,
    make_rng,
    traceless_part,
)

logger = logging.getLogger(__name__)

# Largest dimension lambda_exact accepts (superoperator of size EXACT_CAP^2)
EXACT_CAP = 64

POWER_TOL = 1e-10
POWER_MAX_ITER = 10000
POWER_RESTARTS = 3

# Basis elements pushed through the channel at once by lambda_exact
_EXACT_CHUNK = 512

METHOD_EXACT = "exact-svd"
METHOD_POWER = "power-iteration"


@dataclass
class SpectralEstimate:
    """lambda-bar together with how it was obtained."""
    lam: float
    method: str
    iterations: int = 0
    residual: float = 0.0
    seed: Optional[int] = None
    converged: bool = True

    @property
    def method_tag(self) -> str:
        return "exact" if self.method == METHOD_EXACT else "power"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def superoperator_matrix(G: MixedUnitaryEnsemble) -> np.ndarray:
    """N^2 x N^2 matrix of X -> G(X) acting on row-major vec(X)."""
    U = G.unitaries
    return np.einsum("dij,dkl->ikjl", U, U.conj()).reshape(G.dim ** 2, G.dim ** 2) / G.degree


def restricted_matrix(G: MixedUnitaryEnsemble) -> np.ndarray:
    """Matrix of P G P on the traceless subspace, in gell_mann_basis coordinates."""
    basis = gell_mann_basis(G.dim)
    columns = np.empty((len(basis), len(basis)), dtype=complex)
    for start in range(0, len(basis), _EXACT_CHUNK):
        images = apply_many(G, basis[start:start + _EXACT_CHUNK])
        columns[start:start + len(images)] = gell_mann_coordinates(images)
    # rows of `columns` are images of basis elements; transpose to columns
    return columns.T


def lambda_exact(G: MixedUnitaryEnsemble, cap: int = EXACT_CAP) -> SpectralEstimate:
    """lambda-bar as the exact top singular value of the restriction.

    Taken as the square root of the largest eigenvalue of M^dag M.
    """
    if G.dim > cap:
        raise DimensionCapError("lambda_exact", G.dim, cap, "use the power method or raise the exact cap")
    if G.dim == 1:
        return SpectralEstimate(0.0, METHOD_EXACT)
    M = restricted_matrix(G)
    k = M.shape[1]
    (top,) = linalg.eigvalsh(M.conj().T @ M, subset_by_index=[k - 1, k - 1])
    return SpectralEstimate(float(np.sqrt(max(top, 0.0))), METHOD_EXACT)


def _project(X: np.ndarray) -> np.ndarray:
    return traceless_part(X)


def _power_run(G: MixedUnitaryEnsemble, G_dag: MixedUnitaryEnsemble, rng: np.random.Generator,
               tol: float, max_iter: int):
    X = _project(ginibre(G.dim, rng))
    X /= hs_norm(X)
    quotient = np.inf
    change = np.inf
    for iteration in range(1, max_iter + 1):
        MX = _project(apply(G, X))
        new_quotient = hs_norm(MX) ** 2
        Y = _project(apply(G_dag, MX))
        norm = hs_norm(Y)
        change = abs(new_quotient - quotient)
        quotient = new_quotient
        if norm == 0.0 or change <= tol:
            return quotient, iteration, (0.0 if norm == 0.0 else change), True
        X = Y / norm
    return quotient, max_iter, change, False


def lambda_power(G: MixedUnitaryEnsemble, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER,
                 restarts: int = POWER_RESTARTS, seed: Optional[int] = 0) -> SpectralEstimate:
    """lambda-bar by matrix-free power iteration on M^dag M.

    Each restart begins from a Haar-random (Ginibre) operator projected
    traceless. The Rayleigh quotient ||M X||^2 is maximized over restarts.

    Args:
        G: ensemble
        tol: stagnation threshold on the Rayleigh quotient
        max_iter: iteration limit per restart
        restarts: number of independent starts
        seed: seed of the start vectors

    Returns:
        SpectralEstimate; converged is False when no restart met tol
    """
    if G.dim == 1:
        return SpectralEstimate(0.0, METHOD_POWER, seed=seed)
    rng = make_rng(seed)
    G_dag = adjoint(G)
    best = None
    for restart in range(max(1, restarts)):
        quotient, iterations, residual, converged = _power_run(G, G_dag, rng, tol, max_iter)
        logger.debug("power restart %d: quotient %.15f after %d iterations (converged=%s)",
                     restart, quotient, iterations, converged)
        if best is None or quotient > best[0]:
            best = (quotient, iterations, residual, converged)
    quotient, iterations, residual, converged = best
    if not converged:
        logger.warning("power iteration did not converge in %d iterations (residual %.3e)", max_iter, residual)
    return SpectralEstimate(float(np.sqrt(max(quotient, 0.0))), METHOD_POWER, iterations, residual, seed, converged)


def estimate_lambda(G: MixedUnitaryEnsemble, method: Optional[str] = None, exact_cap: int = EXACT_CAP,
                    **power_options) -> SpectralEstimate:
    """lambda_exact when the dimension allows (or method='exact'), lambda_power otherwise."""
    if method is None:
        method = "exact" if G.dim <= exact_cap else "power"
    if method == "exact":
        return lambda_exact(G, cap=exact_cap)
    if method == "power":
        return lambda_power(G, **power_options)
    raise ValueError(f"unknown method {method!r}, expected 'exact' or 'power'")


def lambda_diagonal(G: MixedUnitaryEnsemble) -> float:
    """Norm of G restricted to traceless diagonal operators, with diagonal output.

    For a permutation ensemble this is the classical walk on the diagonal.
    """
    n = G.dim
    if n == 1:
        return 0.0
    basis = gell_mann_basis(n)[n * (n - 1):]
    images = apply_many(G, basis)
    coordinates = gell_mann_coordinates(images)[:, n * (n - 1):]
    return float(linalg.svdvals(coordinates.T)[0])


def classical_second_singular_value(W) -> float:
    """Second singular value of a doubly-stochastic walk matrix.

    Symmetric walks go through an eigendecomposition; the top singular value 1
    belongs to the all-ones vector and is removed.
    """
    W = np.asarray(W, dtype=float)
    if np.allclose(W, W.T):
        values = np.sort(np.abs(linalg.eigvalsh(W)))[::-1]
    else:
        values = linalg.svdvals(W)
    return float(values[1]) if len(values) > 1 else 0.0


def classical_lambda(G: MixedUnitaryEnsemble) -> Optional[float]:
    """classical_second_singular_value of the walk of a permutation ensemble, else None."""
    W = walk_matrix(G)
    return None if W is None else classical_second_singular_value(W)
