"""
Ensemble invariant checker - run the quantum expander checks on a stored ensemble

Checks that every Kraus matrix is unitary, that the channel fixes the completely
mixed state, preserves traces, Hermiticity and positivity, is contractive, that
its adjoint is the Hilbert-Schmidt adjoint, and that lambda lies in [0, 1]
(optionally below a target).
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from channels import MixedUnitaryEnsemble, adjoint, apply
from linalg_core import (
    ginibre,
    hs_inner,
    hs_norm,
    make_rng,
    maximally_mixed,
    random_density,
    unitarity_deviation,
    unitary_tolerance,
)
from spectral import EXACT_CAP, SpectralEstimate, estimate_lambda

logger = logging.getLogger(__name__)

# Tolerances of the invariant suite
UNITAL_TOL = 1e-12
TRACE_TOL = 1e-12
CONTRACTIVE_TOL = 1e-12
PSD_FLOOR = -1e-12
ADJOINT_TOL = 1e-12
LAMBDA_CEILING = 1 + 1e-10


@dataclass
class CheckResult:
    """Outcome of one invariant check."""
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


def check_unitarity(G: MixedUnitaryEnsemble) -> CheckResult:
    deviations = [unitarity_deviation(U) for U in G.unitaries]
    worst = int(np.argmax(deviations))
    tolerance = unitary_tolerance(G.dim)
    failing = [i for i, dev in enumerate(deviations) if not dev <= tolerance]
    detail = f"offending matrices: {failing[:10]}{'...' if len(failing) > 10 else ''}" if failing else ""
    return CheckResult("unitarity", not failing, deviations[worst], tolerance, detail)


def check_unital(G: MixedUnitaryEnsemble) -> CheckResult:
    mixed = maximally_mixed(G.dim)
    error = hs_norm(apply(G, mixed) - mixed)
    return CheckResult("fixes completely mixed state", error <= UNITAL_TOL, error, UNITAL_TOL)


def _worst(values: List[float]) -> float:
    """Largest value; NaN propagates."""
    return float(np.max(values)) if values else 0.0


def check_trace_preserving(G: MixedUnitaryEnsemble, rng: np.random.Generator, samples: int) -> CheckResult:
    errors = []
    for _ in range(samples):
        X = ginibre(G.dim, rng)
        errors.append(abs(np.trace(apply(G, X)) - np.trace(X)) / hs_norm(X))
    worst = _worst(errors)
    return CheckResult("trace preservation", worst <= TRACE_TOL, worst, TRACE_TOL)


def check_contractive(G: MixedUnitaryEnsemble, rng: np.random.Generator, samples: int) -> CheckResult:
    growth = [hs_norm(apply(G, X)) / hs_norm(X) - 1.0 for X in (ginibre(G.dim, rng) for _ in range(samples))]
    worst = _worst(growth)
    return CheckResult("contractivity", worst <= CONTRACTIVE_TOL, worst, CONTRACTIVE_TOL)


def check_positivity(G: MixedUnitaryEnsemble, rng: np.random.Generator) -> CheckResult:
    out = apply(G, random_density(G.dim, rng))
    hermitian_error = hs_norm(out - out.conj().T)
    if not np.all(np.isfinite(out)):
        return CheckResult("hermiticity and positivity", False, float("nan"), PSD_FLOOR, "non-finite output")
    floor = float(np.linalg.eigvalsh((out + out.conj().T) / 2).min())
    passed = hermitian_error <= ADJOINT_TOL and floor >= PSD_FLOOR
    return CheckResult("hermiticity and positivity", passed, floor, PSD_FLOOR,
                       f"hermiticity error {hermitian_error:.2e}")


def check_adjoint(G: MixedUnitaryEnsemble, rng: np.random.Generator, samples: int) -> CheckResult:
    G_dag = adjoint(G)
    gaps = []
    for _ in range(samples):
        X, Y = ginibre(G.dim, rng), ginibre(G.dim, rng)
        gap = abs(hs_inner(apply(G, X), Y) - hs_inner(X, apply(G_dag, Y)))
        gaps.append(gap / (hs_norm(X) * hs_norm(Y)))
    worst = _worst(gaps)
    return CheckResult("adjoint identity", worst <= ADJOINT_TOL, worst, ADJOINT_TOL)


def check_lambda(estimate: SpectralEstimate, max_lambda: Optional[float] = None) -> List[CheckResult]:
    results = [CheckResult("lambda in [0, 1]", -1e-12 <= estimate.lam <= LAMBDA_CEILING, estimate.lam,
                           LAMBDA_CEILING, f"method {estimate.method_tag}")]
    if max_lambda is not None:
        results.append(CheckResult("lambda below target", estimate.lam <= max_lambda, estimate.lam, max_lambda,
                                   f"method {estimate.method_tag}"))
    return results


def verify_ensemble(G: MixedUnitaryEnsemble, seed: Optional[int] = 0, samples: int = 10,
                    method: Optional[str] = None, max_lambda: Optional[float] = None,
                    exact_cap: int = EXACT_CAP, **power_options) -> List[CheckResult]:
    """Run the whole suite. Lambda is skipped when the Kraus matrices are not unitary."""
    rng = make_rng(seed)
    results = [check_unitarity(G)]
    results.append(check_unital(G))
    results.append(check_trace_preserving(G, rng, samples))
    results.append(check_contractive(G, rng, samples))
    results.append(check_positivity(G, rng))
    results.append(check_adjoint(G, rng, samples))
    if results[0].passed:
        estimate = estimate_lambda(G, method=method, exact_cap=exact_cap, **power_options)
        results.extend(check_lambda(estimate, max_lambda))
    else:
        logger.warning("skipping lambda: %s", results[0].detail)
    return results


def generate_report(G: MixedUnitaryEnsemble, results: List[CheckResult], report_path: Optional[Path] = None) -> str:
    """Format the suite as text; also written to report_path when given."""
    lines = ["ENSEMBLE VERIFICATION REPORT", "=" * 50,
             f"Ensemble: {G.label or '<unlabelled>'} (dim {G.dim}, degree {G.degree})", ""]
    for result in results:
        mark = "✅" if result.passed else "🔴"
        lines.append(f"{mark} {result.name:<30} value {result.value:.3e}  threshold {result.threshold:.3e}")
        if result.detail:
            lines.append(f"   {result.detail}")
    failed = [r.name for r in results if not r.passed]
    lines.append("")
    lines.append(f"FAILED: {', '.join(failed)}" if failed else "ALL CHECKS PASSED")
    text = "\n".join(lines) + "\n"
    if report_path is not None:
        Path(report_path).write_text(text, encoding="utf-8")
    return text
