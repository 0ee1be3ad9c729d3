"""
Base expanders, unitary nets and the recursive family G_t.

G_1 = H^2, G_2 = H (x) H and G_t = (G_ceil((t-1)/2) (x) G_floor((t-1)/2))^2 (z) H.
Every member gets an ExpanderCert whose lambda bound is propagated through the
square / tensor / zig-zag rules; Kraus ensembles are only materialized below a
dimension cap.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from channels import MixedUnitaryEnsemble, square, tensor_channels
from errors import DimensionMismatchError, RegularityError, SearchBudgetError
from linalg_core import HADAMARD, S_GATE, T_GATE, SeedLike, as_unitary, haar_unitary, make_rng, tensor_all
from spectral import SpectralEstimate, estimate_lambda, lambda_exact
from zigzag import zigzag

logger = logging.getLogger(__name__)

# Largest dimension build_Gt materializes as a Kraus ensemble
MATERIALIZE_CAP = 4096

# Largest dimension conjugation_distance evaluates exactly
DISTANCE_CAP = 64

# Maximum number of tuples net_search evaluates in exhaustive mode
SEARCH_BUDGET = 100000

NODE_KINDS = ("base", "square", "tensor", "zigzag")


def _toffoli() -> np.ndarray:
    gate = np.eye(8, dtype=complex)
    gate[[6, 7]] = gate[[7, 6]]
    return gate


def _on_qubit(gate: np.ndarray, qubit: int, n_qubits: int = 3) -> np.ndarray:
    factors = [gate if q == qubit else np.eye(2, dtype=complex) for q in range(n_qubits)]
    return tensor_all(*factors)


# name -> ordered {gate label: matrix}
GENERATOR_SETS: Dict[str, Dict[str, np.ndarray]] = {
    "ht": {"H": HADAMARD, "T": T_GATE},
    "hs": {"H": HADAMARD, "S": S_GATE},
    "h-toffoli": {
        "H0": _on_qubit(HADAMARD, 0),
        "H1": _on_qubit(HADAMARD, 1),
        "H2": _on_qubit(HADAMARD, 2),
        "CCX": _toffoli(),
    },
}


@dataclass
class ExpanderCert:
    """Certified (dim, degree, lambda bound) with the composition that produced it."""
    dim: int
    degree: int
    lambda_bound: float
    kind: str = "base"
    children: Tuple["ExpanderCert", ...] = ()
    label: str = ""
    method: str = "cert"

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        if not 0.0 <= self.lambda_bound <= 1.0:
            raise ValueError(f"lambda bound {self.lambda_bound} outside [0, 1]")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "label": self.label,
            "dim": self.dim,
            "degree": self.degree,
            "lambda_bound": self.lambda_bound,
            "method": self.method,
            "children": [child.to_dict() for child in self.children],
        }


def cert_bound(node_kind: str, child_bounds: Sequence[float]) -> float:
    """Spectral bound of a composition from the bounds of its parts.

    square: lambda^2; tensor: max; zigzag: min(1, l1 + l2 + l2^2).
    """
    if any(not 0.0 <= b <= 1.0 for b in child_bounds):
        raise ValueError(f"child bounds must lie in [0, 1], got {list(child_bounds)}")
    if node_kind == "base":
        (lam,) = child_bounds
        return float(lam)
    if node_kind == "square":
        (lam,) = child_bounds
        return lam * lam
    if node_kind == "tensor":
        return max(child_bounds)
    if node_kind == "zigzag":
        lam1, lam2 = child_bounds
        return min(1.0, lam1 + lam2 + lam2 * lam2)
    raise ValueError(f"unknown certificate kind {node_kind!r}")


def base_cert(dim: int, degree: int, lam: float, label: str = "H", method: str = "cert") -> ExpanderCert:
    return ExpanderCert(dim, degree, min(1.0, max(0.0, lam)), "base", (), label, method)


def square_cert(c: ExpanderCert) -> ExpanderCert:
    return ExpanderCert(c.dim, c.degree ** 2, cert_bound("square", [c.lambda_bound]), "square", (c,),
                        f"({c.label})^2")


def tensor_cert(c1: ExpanderCert, c2: ExpanderCert) -> ExpanderCert:
    return ExpanderCert(c1.dim * c2.dim, c1.degree * c2.degree,
                        cert_bound("tensor", [c1.lambda_bound, c2.lambda_bound]), "tensor", (c1, c2),
                        f"{c1.label}x{c2.label}")


def zigzag_cert(c1: ExpanderCert, c2: ExpanderCert) -> ExpanderCert:
    if c2.dim != c1.degree:
        raise RegularityError(f"zig-zag needs dim(G2) = degree(G1), got {c2.dim} and {c1.degree}")
    return ExpanderCert(c1.dim * c1.degree, c2.degree ** 2,
                        cert_bound("zigzag", [c1.lambda_bound, c2.lambda_bound]), "zigzag", (c1, c2),
                        f"{c1.label}z{c2.label}")


def fixed_point_envelope(lam: float) -> float:
    """Least fixed point of x = x^2 + lam + lam^2; bounds every lambda_t of the family."""
    disc = 1.0 - 4.0 * (lam + lam * lam)
    if disc < 0:
        return 1.0
    return (1.0 - math.sqrt(disc)) / 2.0


def random_base(n: int, d: int, seed: SeedLike = None) -> MixedUnitaryEnsemble:
    """d independent Haar unitaries on dimension n."""
    if n < 2 or d < 1:
        raise ValueError(f"random_base needs n >= 2 and d >= 1, got n={n}, d={d}")
    rng = make_rng(seed)
    stack = np.stack([haar_unitary(n, rng) for _ in range(d)])
    tag = seed if isinstance(seed, (int, np.integer)) else "rng"
    return MixedUnitaryEnsemble(stack, f"haar(n={n},d={d},seed={tag})", validate=False)


class ConjugationDistance(NamedTuple):
    value: float
    exact: bool


def _conjugation_matrix(U: np.ndarray) -> np.ndarray:
    return np.kron(U, U.conj())


def phase_aligned_distance(U, V) -> float:
    """min over phi of the spectral norm ||U - e^{i phi} V||.

    The eigenphases of V^dag U are covered by the shortest arc; phi sits at its
    midpoint and the worst eigenphase is half an arc away.
    """
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    phases = np.sort(np.angle(linalg.eigvals(V.conj().T @ U)))
    gaps = np.diff(np.concatenate([phases, [phases[0] + 2 * np.pi]]))
    arc = 2 * np.pi - gaps.max()
    return float(2 * math.sin(arc / 4))


def conjugation_distance(U, V, cap: int = DISTANCE_CAP) -> ConjugationDistance:
    """sup_{||X||=1} ||U X U^dag - V X V^dag||.

    Exact (top singular value of the difference of the two conjugation
    superoperators) up to dimension `cap`; above it the certified upper bound
    2 min_phi ||U - e^{i phi} V|| is returned with exact=False.
    """
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if U.shape != V.shape:
        raise DimensionMismatchError(f"shape mismatch: {U.shape} vs {V.shape}")
    if U.shape[0] > cap:
        logger.warning("conjugation_distance: dimension %d above cap %d, using the phase-aligned bound",
                       U.shape[0], cap)
        return ConjugationDistance(2 * phase_aligned_distance(U, V), False)
    difference = _conjugation_matrix(U) - _conjugation_matrix(V)
    return ConjugationDistance(float(linalg.svdvals(difference)[0]), True)


@dataclass
class UnitaryNet:
    """Finite set of unitaries labelled by generator words."""
    dim: int
    accuracy: float
    members: List[np.ndarray] = field(default_factory=list)
    words: List[str] = field(default_factory=list)
    generator_set: str = ""
    max_word_length: int = 0

    def __len__(self) -> int:
        return len(self.members)

    def word(self, index: int) -> str:
        return self.words[index] or "I"


def _join_word(word: Tuple[str, ...]) -> str:
    return ".".join(word)


def build_net(dim: int, generator_set: Union[str, Dict[str, np.ndarray]], max_word_length: int,
              accuracy: float, cap: int = DISTANCE_CAP) -> UnitaryNet:
    """Breadth-first word net.

    Words of length 0..max_word_length are enumerated by length and then
    lexicographically in generator order; the word g1 g2 ... gL stands for the
    product G_g1 G_g2 ... G_gL. A candidate joins the net only when its
    conjugation distance to every member exceeds accuracy/2.
    """
    if isinstance(generator_set, str):
        if generator_set not in GENERATOR_SETS:
            raise ValueError(f"unknown generator set {generator_set!r}, choose from {sorted(GENERATOR_SETS)}")
        name, gates = generator_set, GENERATOR_SETS[generator_set]
    else:
        name, gates = "custom", generator_set
    if not gates:
        raise ValueError("empty generator set")
    if accuracy <= 0:
        raise ValueError(f"accuracy must be positive, got {accuracy}")
    gates = {label: as_unitary(gate, index=i) for i, (label, gate) in enumerate(gates.items())}
    for label, gate in gates.items():
        if gate.shape[0] != dim:
            raise DimensionMismatchError(f"generator {label} has dimension {gate.shape[0]}, expected {dim}")

    net = UnitaryNet(dim, accuracy, generator_set=name, max_word_length=max_word_length)
    threshold = accuracy / 2
    level: List[Tuple[Tuple[str, ...], np.ndarray]] = [((), np.eye(dim, dtype=complex))]
    for length in range(max_word_length + 1):
        if length > 0:
            level = [(word + (label,), product @ gate)
                     for word, product in level for label, gate in gates.items()]
        for word, product in level:
            if all(conjugation_distance(product, member, cap).value > threshold for member in net.members):
                net.members.append(product)
                net.words.append(_join_word(word))
        logger.debug("build_net: length %d, %d members", length, len(net))
    return net


def nearest_member(U, net: UnitaryNet, cap: int = DISTANCE_CAP) -> Tuple[int, float]:
    """Index of and distance to the closest net member; ties go to the lowest index."""
    if not net.members:
        raise ValueError("empty net")
    distances = [conjugation_distance(U, member, cap).value for member in net.members]
    index = int(np.argmin(distances))
    return index, distances[index]


def discretize(G: MixedUnitaryEnsemble, net: UnitaryNet, cap: int = DISTANCE_CAP) -> MixedUnitaryEnsemble:
    """G' with every U_i replaced by its nearest net member V_{U_i}.

    For traceless X, ||G'(X)|| <= ||G(X)|| + max_i dist(U_i, V_{U_i}) ||X||.
    """
    if not net.members:
        raise ValueError("empty net")
    if net.dim != G.dim:
        raise DimensionMismatchError(f"net dimension {net.dim} does not match ensemble dimension {G.dim}")
    indices = [nearest_member(U, net, cap)[0] for U in G.unitaries]
    words = ",".join(net.word(i) for i in indices)
    return MixedUnitaryEnsemble(np.stack([net.members[i] for i in indices]), f"net[{words}]", validate=False)


def replacement_distance(G: MixedUnitaryEnsemble, net: UnitaryNet, cap: int = DISTANCE_CAP) -> float:
    """max_i dist(U_i, V_{U_i}): the slack discretize adds to lambda."""
    return max(nearest_member(U, net, cap)[1] for U in G.unitaries)


def net_search(n: int, d: int, net: UnitaryNet, mode: str = "exhaustive", samples: int = 1000,
               seed: SeedLike = None, budget: int = SEARCH_BUDGET) -> Tuple[MixedUnitaryEnsemble, SpectralEstimate]:
    """Ordered d-tuple of net members (with repetition) minimizing lambda_exact.

    mode="exhaustive" walks every tuple lexicographically; mode="sample" draws
    `samples` uniform tuples. Ties keep the lexicographically first tuple seen.
    """
    if net.dim != n:
        raise DimensionMismatchError(f"net dimension {net.dim} does not match n={n}")
    if not net.members:
        raise ValueError("empty net")
    if d < 1:
        raise ValueError(f"degree must be positive, got {d}")
    size = len(net)
    if mode == "exhaustive":
        total = size ** d
        if total > budget:
            raise SearchBudgetError(f"{total} tuples exceed the search budget {budget}; use sample mode")
        candidates = itertools.product(range(size), repeat=d)
    elif mode == "sample":
        rng = make_rng(seed)
        drawn = rng.integers(0, size, size=(samples, d))
        candidates = sorted({tuple(int(i) for i in row) for row in drawn})
    else:
        raise ValueError(f"unknown search mode {mode!r}, expected 'exhaustive' or 'sample'")

    best_tuple: Optional[Tuple[int, ...]] = None
    best: Optional[SpectralEstimate] = None
    for count, indices in enumerate(candidates, start=1):
        candidate = MixedUnitaryEnsemble(np.stack([net.members[i] for i in indices]), validate=False)
        estimate = lambda_exact(candidate)
        if best is None or estimate.lam < best.lam:
            best_tuple, best = indices, estimate
        if count % 10000 == 0:
            logger.debug("net_search: %d tuples, best lambda %.6f", count, best.lam)
    words = ",".join(net.word(i) for i in best_tuple)
    ensemble = MixedUnitaryEnsemble(np.stack([net.members[i] for i in best_tuple]), f"net[{words}]",
                                    validate=False)
    return ensemble, best


@dataclass
class FamilyMember:
    """One G_s of the recursive family."""
    t: int
    cert: ExpanderCert
    ensemble: Optional[MixedUnitaryEnsemble] = None


def _base_of(H: Union[MixedUnitaryEnsemble, ExpanderCert], base_lambda: Optional[float],
             power_options: Optional[Dict[str, Any]]) -> Tuple[ExpanderCert, Optional[MixedUnitaryEnsemble]]:
    if isinstance(H, ExpanderCert):
        if base_lambda is not None:
            return base_cert(H.dim, H.degree, base_lambda, H.label or "H"), None
        return H, None
    if base_lambda is not None:
        return base_cert(H.dim, H.degree, base_lambda, H.label or "H"), H
    estimate = estimate_lambda(H, **(power_options or {}))
    return base_cert(H.dim, H.degree, estimate.lam, H.label or "H", estimate.method_tag), H


def build_family(H: Union[MixedUnitaryEnsemble, ExpanderCert], t: int, materialize_cap: int = MATERIALIZE_CAP,
                 base_lambda: Optional[float] = None,
                 power_options: Optional[Dict[str, Any]] = None) -> Dict[int, FamilyMember]:
    """G_1 .. G_t over a (D^8, D, lambda) base H.

    Args:
        H: base ensemble or its certificate
        t: last index to build
        materialize_cap: ensembles are formed only for dimensions up to this
        base_lambda: lambda bound of H; estimated from H when omitted
        power_options: method and power-iteration options for that estimate

    Returns:
        {s: FamilyMember} for s = 1..t
    """
    if t < 1:
        raise ValueError(f"t must be at least 1, got {t}")
    if H.dim != H.degree ** 8:
        raise RegularityError(f"base must have dim = degree^8, got dim {H.dim} and degree {H.degree}")
    h_cert, h_ensemble = _base_of(H, base_lambda, power_options)
    family: Dict[int, FamilyMember] = {}

    def materialize(dim: int, build):
        if h_ensemble is None or dim > materialize_cap:
            return None
        return build()

    for s in range(1, t + 1):
        if s == 1:
            cert = square_cert(h_cert)
            ensemble = materialize(cert.dim, lambda: square(h_ensemble))
        elif s == 2:
            cert = tensor_cert(h_cert, h_cert)
            ensemble = materialize(cert.dim, lambda: tensor_channels(h_ensemble, h_ensemble, cap=materialize_cap))
        else:
            a, b = family[math.ceil((s - 1) / 2)], family[(s - 1) // 2]
            cert = zigzag_cert(square_cert(tensor_cert(a.cert, b.cert)), h_cert)
            ensemble = None
            if a.ensemble is not None and b.ensemble is not None:
                ensemble = materialize(cert.dim, lambda: zigzag(
                    square(tensor_channels(a.ensemble, b.ensemble, cap=materialize_cap)), h_ensemble,
                    cap=materialize_cap))
        cert.label = f"G{s}"
        if ensemble is None and h_ensemble is not None:
            logger.info("G%d: dimension %d above the materialization cap, certificate only", s, cert.dim)
        family[s] = FamilyMember(s, cert, ensemble)
    return family


def build_Gt(H: Union[MixedUnitaryEnsemble, ExpanderCert], t: int, materialize_cap: int = MATERIALIZE_CAP,
             base_lambda: Optional[float] = None,
             power_options: Optional[Dict[str, Any]] = None) -> Tuple[ExpanderCert, Optional[MixedUnitaryEnsemble]]:
    """Certificate and, below the cap, the Kraus ensemble of G_t."""
    member = build_family(H, t, materialize_cap, base_lambda, power_options)[t]
    return member.cert, member.ensemble
