"""Invariance of perfect correlations under changes of the common measurement basis.

``invariance_defect`` measures how far a state is from an invariant perfect
correlation over sampled bases. ``falsify`` builds an explicit counterexample: a
basis where the correlation is not perfect, or two perfect bases whose cycle types
disagree. Only the two-qubit singlet survives it. ``structural_check`` runs the
mixed-state argument for an all-loops correlation stage by stage.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg

from errors import OutOfRange
from services.graph import PerfectCorrelationVerdict, classify
from services.pauli import Certificate, certify_theorem1
from services.pool import ordered_map
from services.qudit import (DensityMatrix, OrthonormalBasis, condition_on, conditional_operator,
                            haar_unitary, in_product_basis, joint_distribution, random_basis,
                            schmidt_basis, stream)

DEFAULT_TOL = 1e-9
STRUCTURE_TOL = 1e-9
FORM_TOL = 1e-10
HAAR_CANDIDATES = 20
SHARED_VECTOR_ATTEMPTS = 5

CERTIFIED = "certified"
FALSIFIED = "falsified"
INCONCLUSIVE = "inconclusive"

# offsets keep the seeded streams of different subroutines apart
_SHARED_STREAM = 1 << 20
_WITNESS_STREAM = 1 << 21


def anchor_bases(d: int) -> List[OrthonormalBasis]:
    """Deterministic bases probed before any random one."""
    anchors = [OrthonormalBasis.computational(d), OrthonormalBasis.fourier(d)]
    if d == 2:
        anchors.append(OrthonormalBasis.from_vectors(
            np.array([[1, 1j], [1, -1j]]) / np.sqrt(2)))
    return anchors


def basis_defect(rho: DensityMatrix, basis: OrthonormalBasis, tol: float = DEFAULT_TOL) -> float:
    return classify(joint_distribution(rho, basis), tol).leakage


# ─────────────────────────────────────────────── invariance defect
@dataclass(frozen=True)
class ProbeConfig:
    n_random_bases: int = 1000
    refine: bool = False
    seed: int = 0
    workers: int = 1
    tol: float = DEFAULT_TOL
    include_anchors: bool = True


@dataclass(frozen=True, eq=False)
class InvarianceDefect:
    value: float
    worst_basis: OrthonormalBasis
    max_leakage: float
    signature_mismatch: bool
    signatures: Tuple[str, ...] = ()
    probes: int = 0
    degenerate_probes: int = 0
    refined: bool = False

    @property
    def consistent(self) -> bool:
        """No probed basis contradicts an invariant perfect correlation."""
        return self.value == 0.0 and not self.signature_mismatch and self.degenerate_probes == 0


def hermitian_generators(d: int) -> np.ndarray:
    """d² Hermitian matrices spanning the Lie algebra of U(d)."""
    gens = []
    for k in range(d):
        g = np.zeros((d, d), dtype=complex)
        g[k, k] = 1
        gens.append(g)
    for k in range(d):
        for l in range(k + 1, d):
            g = np.zeros((d, d), dtype=complex)
            g[k, l] = g[l, k] = 1
            gens.append(g)
            g = np.zeros((d, d), dtype=complex)
            g[k, l], g[l, k] = -1j, 1j
            gens.append(g)
    return np.array(gens)


def refine_basis(rho: DensityMatrix, start: OrthonormalBasis, tol: float = DEFAULT_TOL,
                 step: float = 0.1, min_step: float = 1e-6,
                 max_iterations: int = 200) -> Tuple[OrthonormalBasis, float]:
    """Coordinate ascent of the leakage over bases exp(iH)·start."""
    gens = hermitian_generators(start.local_dim)

    def rotate(params):
        return start.rotated(scipy.linalg.expm(1j * np.einsum("k,kab->ab", params, gens)))

    params = np.zeros(len(gens))
    best = basis_defect(rho, start, tol)
    for _ in range(max_iterations):
        if step < min_step:
            break
        improved = False
        for k in range(len(params)):
            for delta in (step, -step):
                trial = params.copy()
                trial[k] += delta
                value = basis_defect(rho, rotate(trial), tol)
                if value > best:
                    params, best, improved = trial, value, True
                    break
        if not improved:
            step /= 2
    return rotate(params), best


def invariance_defect(rho: DensityMatrix, probe: ProbeConfig = ProbeConfig()) -> InvarianceDefect:
    if probe.n_random_bases < 1:
        raise OutOfRange("n_random_bases must be at least 1", {"n_random_bases": probe.n_random_bases})
    d = rho.local_dim

    def evaluate(index: int) -> Tuple[OrthonormalBasis, PerfectCorrelationVerdict]:
        basis = random_basis(d, stream(probe.seed, index))
        return basis, classify(joint_distribution(rho, basis), probe.tol)

    results = []
    if probe.include_anchors:
        results += [(b, classify(joint_distribution(rho, b), probe.tol)) for b in anchor_bases(d)]
    results += ordered_map(evaluate, range(probe.n_random_bases), probe.workers)

    leakages = np.array([v.leakage for _, v in results])
    worst = int(np.argmax(leakages))
    worst_basis, value = results[worst][0], float(leakages[worst])
    signatures = tuple(sorted({str(v.signature) for _, v in results if v.perfect}))
    degenerate = sum(1 for _, v in results if v.status == "degenerate")

    refined = False
    if probe.refine:
        basis, leak = refine_basis(rho, worst_basis, probe.tol)
        if leak > value:
            worst_basis, value, refined = basis, leak, True
    logging.info(f"Probed {len(results)} bases: max leakage {value:.3e}, signatures {list(signatures)}")
    return InvarianceDefect(value, worst_basis, float(leakages.max()), len(signatures) > 1,
                            signatures, len(results), degenerate, refined)


# ─────────────────────────────────────────────── structural chain for [d]
@dataclass(frozen=True, eq=False)
class DiagonalCorrelatedForm:
    """rho = Σ α_ij |e_i e_i⟩⟨e_j e_j| with α = Σ_k λ_k γ_k γ_k†."""
    basis: OrthonormalBasis
    coefficients: np.ndarray
    spectral_coefficients: np.ndarray
    eigenvalues: np.ndarray

    def reconstruction_error(self) -> float:
        g = self.spectral_coefficients
        rebuilt = (g.T * self.eigenvalues) @ g.conj()
        return float(np.max(np.abs(self.coefficients - rebuilt)))

    def spread(self) -> float:
        values = self.coefficients.ravel()
        return float(np.max(np.abs(values[:, None] - values[None, :])))


@dataclass(frozen=True)
class ProbeViolation:
    i: int
    j: int
    kind: str               # "real" (e_i + e_j)/√2 or "imag" (e_i + i e_j)/√2
    probability: float
    violation: float


@dataclass(frozen=True, eq=False)
class StructuralReport:
    stages_passed: int
    failed_stage: Optional[int]
    off_diagonal_mass: float
    rank: int
    form: Optional[DiagonalCorrelatedForm] = None
    subspace_residual: Optional[float] = None
    coefficient_spread: Optional[float] = None
    probe_violations: Tuple[ProbeViolation, ...] = ()
    pure_distance: Optional[float] = None
    contradiction_with_mixedness: bool = False

    @property
    def passed(self) -> bool:
        return self.stages_passed == 4

    @property
    def max_violation(self) -> float:
        return max((p.violation for p in self.probe_violations), default=0.0)

    @property
    def worst_probe(self) -> Optional[ProbeViolation]:
        if not self.probe_violations:
            return None
        return max(self.probe_violations, key=lambda p: p.violation)


def probe_coordinates(d: int) -> List[Tuple[int, int, str, np.ndarray]]:
    out = []
    for i in range(d):
        for j in range(i + 1, d):
            for kind, phase in (("real", 1.0), ("imag", 1j)):
                m = np.zeros(d, dtype=complex)
                m[i], m[j] = 1 / np.sqrt(2), phase / np.sqrt(2)
                out.append((i, j, kind, m))
    return out


def structural_check(rho: DensityMatrix, basis: OrthonormalBasis) -> StructuralReport:
    d = basis.local_dim
    rank = rho.rank()

    # stage 1: Prob(i, j) = 0 for i != j
    probs = joint_distribution(rho, basis).probs
    off_mass = float(probs.sum() - np.trace(probs))
    if off_mass > STRUCTURE_TOL:
        return StructuralReport(0, 1, off_mass, rank)

    # stage 2: support on span{|e_i e_i⟩} and the coefficient matrix α
    r = in_product_basis(rho, basis)
    diag_idx = np.arange(d) * (d + 1)
    outside = np.ones(r.shape, dtype=bool)
    outside[np.ix_(diag_idx, diag_idx)] = False
    subspace_residual = float(np.max(np.abs(r[outside]), initial=0.0))
    alpha = r[np.ix_(diag_idx, diag_idx)]
    lam, vecs = scipy.linalg.eigh(r)
    keep = lam > 1e-13
    form = DiagonalCorrelatedForm(basis, alpha, vecs[diag_idx][:, keep].T, lam[keep])
    if subspace_residual > STRUCTURE_TOL or form.reconstruction_error() > FORM_TOL:
        return StructuralReport(1, 2, off_mass, rank, form, subspace_residual)

    # stage 3: ⟨m^A|rho|m^A⟩ = c |m̄⟩⟨m̄| for pairwise superpositions; trace pins c to 1/d
    e = basis.as_columns()
    violations = []
    for i, j, kind, m in probe_coordinates(d):
        cond = e.conj().T @ condition_on(rho, e @ m) @ e
        pair = [i, j]
        implied = cond[np.ix_(pair, pair)] / np.outer(m[pair].conj(), m[pair])
        violations.append(ProbeViolation(i, j, kind, float(np.real(np.trace(cond))),
                                          float(np.max(np.abs(implied - 1 / d)))))
    report = dict(off_diagonal_mass=off_mass, rank=rank, form=form,
                  subspace_residual=subspace_residual, coefficient_spread=form.spread(),
                  probe_violations=tuple(violations))
    if max(v.violation for v in violations) > STRUCTURE_TOL:
        return StructuralReport(2, 3, **report)

    # stage 4: the only survivor is the pure state Σ_i |e_i e_i⟩ / √d
    phi = sum(np.kron(e[:, i], e[:, i]) for i in range(d)) / np.sqrt(d)
    pure_distance = rho.distance(np.outer(phi, phi.conj()))
    if pure_distance > STRUCTURE_TOL:
        return StructuralReport(3, 4, pure_distance=pure_distance, **report)
    if rank > 1:
        logging.warning(f"Structural chain passed but rank is {rank}")
    return StructuralReport(4, None, pure_distance=pure_distance,
                            contradiction_with_mixedness=rank > 1, **report)


# ─────────────────────────────────────────────── falsification
@dataclass(frozen=True, eq=False)
class FalsificationWitness:
    kind: str
    basis_1: OrthonormalBasis
    verdict_1: PerfectCorrelationVerdict
    basis_2: Optional[OrthonormalBasis] = None
    verdict_2: Optional[PerfectCorrelationVerdict] = None
    shared_vector_index: Optional[int] = None
    detail: Dict[str, float] = field(default_factory=dict)

    def incompatible(self) -> bool:
        if self.verdict_2 is None:
            return not self.verdict_1.perfect
        if self.verdict_1.perfect != self.verdict_2.perfect:
            return True
        if not self.verdict_1.perfect:
            return True
        return self.verdict_1.signature != self.verdict_2.signature


@dataclass(frozen=True, eq=False)
class InvarianceReport:
    verdict: str
    defect: float
    signature_mismatch: bool
    probes: int
    seed: int
    witness: Optional[FalsificationWitness] = None
    certificate: Optional[Certificate] = None
    structural: Optional[StructuralReport] = None
    probe_leakages: Tuple[float, ...] = ()


class _ProbeLog:
    """Every basis falsify looks at, in order."""

    def __init__(self, rho: DensityMatrix, tol: float):
        self.rho, self.tol = rho, tol
        self.entries: List[Tuple[OrthonormalBasis, PerfectCorrelationVerdict]] = []

    def __call__(self, basis: OrthonormalBasis) -> PerfectCorrelationVerdict:
        verdict = classify(joint_distribution(self.rho, basis), self.tol)
        self.entries.append((basis, verdict))
        return verdict

    def report(self, verdict: str, seed: int, **extra) -> InvarianceReport:
        leakages = tuple(v.leakage for _, v in self.entries)
        signatures = {str(v.signature) for _, v in self.entries if v.perfect}
        return InvarianceReport(verdict, max(leakages, default=0.0), len(signatures) > 1,
                                len(self.entries), seed, probe_leakages=leakages, **extra)


def shared_vector_basis(basis: OrthonormalBasis, keep: int,
                    rng: np.random.Generator) -> OrthonormalBasis:
    """A basis sharing exactly e_keep with ``basis``: the complement is rotated generically."""
    d = basis.local_dim
    rest = np.delete(basis.vectors, keep, axis=0)
    w = haar_unitary(d - 1, rng)
    return OrthonormalBasis.from_vectors(np.vstack([basis.vectors[keep], w.T @ rest]))


def shares_exactly_one(b1: OrthonormalBasis, b2: OrthonormalBasis, tol: float = 1e-10) -> bool:
    ov = b1.overlaps(b2)
    if int(np.sum(ov > 1 - tol)) != 1:
        return False
    # apart from the shared pair, no vector of one basis may coincide with one of the other
    i, j = np.argwhere(ov > 1 - tol)[0]
    rest = np.delete(np.delete(ov, i, axis=0), j, axis=1)
    return bool(np.all(rest < 1 - 1e-6))


def relative_fourier(basis: OrthonormalBasis) -> OrthonormalBasis:
    """f_k = Σ_j ω^{jk} e_j / √d."""
    f = OrthonormalBasis.fourier(basis.local_dim).vectors
    return OrthonormalBasis.from_vectors(f @ basis.vectors)


def two_level_restriction(basis: OrthonormalBasis, i: int = 0, j: int = 1) -> OrthonormalBasis:
    """Rotate span{e_i, e_j} to {(e_i + i e_j)/√2, (e_i − i e_j)/√2}; keep the other vectors."""
    v = np.array(basis.vectors)
    ei, ej = v[i].copy(), v[j].copy()
    v[i], v[j] = (ei + 1j * ej) / np.sqrt(2), (ei - 1j * ej) / np.sqrt(2)
    return OrthonormalBasis.from_vectors(v)


def probe_basis(basis: OrthonormalBasis, worst: ProbeViolation) -> OrthonormalBasis:
    """Basis containing the worst structural probe vector and its orthogonal partner."""
    v = np.array(basis.vectors)
    ei, ej = v[worst.i].copy(), v[worst.j].copy()
    phase = 1.0 if worst.kind == "real" else 1j
    v[worst.i], v[worst.j] = (ei + phase * ej) / np.sqrt(2), (ei - phase * ej) / np.sqrt(2)
    return OrthonormalBasis.from_vectors(v)


def _qubit_witness(log: _ProbeLog, seed: int, budget: int) -> Optional[FalsificationWitness]:
    first_perfect = None
    candidates = anchor_bases(2)
    index = 0
    while len(log.entries) < budget:
        if candidates:
            basis = candidates.pop(0)
        else:
            basis = random_basis(2, stream(seed, _WITNESS_STREAM + index))
            index += 1
        verdict = log(basis)
        if verdict.status == "imperfect":
            return FalsificationWitness("imperfect", basis, verdict)
        if verdict.perfect:
            if first_perfect is None:
                first_perfect = (basis, verdict)
            elif first_perfect[1].signature != verdict.signature:
                return FalsificationWitness("signature-mismatch", *first_perfect, basis, verdict)
    return None


def _shared_vector_witness(rho, log, basis, verdict, seed) -> Optional[FalsificationWitness]:
    perm = verdict.permutation
    keep = next(i for i in range(perm.d) if perm[i] != i)
    target = basis.vectors[perm[keep]]
    collapse = conditional_operator(rho, keep, basis)
    for attempt in range(SHARED_VECTOR_ATTEMPTS):
        b2 = shared_vector_basis(basis, keep, stream(seed, _SHARED_STREAM + attempt))
        if not shares_exactly_one(basis, b2):
            continue
        v2 = log(b2)
        detail = {
            "collapse_probability": float(np.real(np.trace(collapse))),
            "collapse_target_index": perm[keep],
            "max_target_overlap": float(np.max(np.abs(b2.vectors.conj() @ target) ** 2)),
        }
        w = FalsificationWitness("shared-vector", basis, verdict, b2, v2, 0, detail)
        if w.incompatible():
            return w
    return None


def _loops_witness(rho, log, basis, verdict) -> Tuple[Optional[FalsificationWitness], StructuralReport]:
    structural = structural_check(rho, basis)
    if structural.failed_stage == 3:
        b2 = probe_basis(basis, structural.worst_probe)
        w = FalsificationWitness("structural-probe", basis, verdict, b2, log(b2),
                                 detail={"max_violation": structural.max_violation})
        if w.incompatible():
            return w, structural
    for kind, b2 in (("signature-mismatch", relative_fourier(basis)),
                     ("two-level-restriction", two_level_restriction(basis))):
        w = FalsificationWitness(kind, basis, verdict, b2, log(b2))
        if w.incompatible():
            return w, structural
    return None, structural


def _refined(rho: DensityMatrix, witness: FalsificationWitness, tol: float) -> FalsificationWitness:
    if witness.kind != "imperfect":
        return witness
    basis, leakage = refine_basis(rho, witness.basis_1, tol)
    if leakage <= witness.verdict_1.leakage:
        return witness
    verdict = classify(joint_distribution(rho, basis), tol)
    return FalsificationWitness("imperfect", basis, verdict,
                                detail={"unrefined_leakage": witness.verdict_1.leakage})


def falsify(rho: DensityMatrix, seed: int = 0, budget: int = 50, tol: float = DEFAULT_TOL,
            workers: int = 1, refine: bool = False) -> InvarianceReport:
    """Certify the singlet or return a witness against invariant perfect correlation.

    ``refine`` pushes an imperfection witness basis to higher leakage.
    """
    if budget < 1:
        raise OutOfRange("probe budget must be at least 1", {"budget": budget})
    d = rho.local_dim
    log = _ProbeLog(rho, tol)

    if d == 2:
        certificate = certify_theorem1(rho)
        if certificate.certified:
            for basis in anchor_bases(2):
                log(basis)
            logging.info("Singlet certified: invariant type-I correlation")
            return log.report(CERTIFIED, seed, certificate=certificate)
        witness = _qubit_witness(log, seed, budget)
        if witness is None:
            logging.warning(f"No witness within {budget} probes for a non-singlet qubit pair")
            return log.report(INCONCLUSIVE, seed, certificate=certificate)
        if refine:
            witness = _refined(rho, witness, tol)
        return log.report(FALSIFIED, seed, witness=witness, certificate=certificate)

    # candidate bases for a perfect correlation; generic states have none
    candidates = anchor_bases(d)
    schmidt = schmidt_basis(rho)
    if schmidt is not None:
        candidates.append(schmidt)
    n_haar = max(0, min(HAAR_CANDIDATES, budget - len(candidates) - 2))
    haar = ordered_map(lambda k: random_basis(d, stream(seed, k)), range(n_haar), workers)

    first_perfect = None
    for basis in candidates + haar:
        verdict = log(basis)
        if verdict.perfect:
            first_perfect = (basis, verdict)
            break

    witness, structural = None, None
    if first_perfect is not None:
        basis, verdict = first_perfect
        if verdict.signature.all_loops:
            witness, structural = _loops_witness(rho, log, basis, verdict)
        else:
            witness = _shared_vector_witness(rho, log, basis, verdict, seed)

    if witness is None:
        imperfect = [(b, v) for b, v in log.entries if v.status == "imperfect"]
        index = 0
        while not imperfect and len(log.entries) < budget:
            basis = random_basis(d, stream(seed, _WITNESS_STREAM + index))
            index += 1
            if log(basis).status == "imperfect":
                imperfect.append(log.entries[-1])
        if imperfect:
            basis, verdict = min(imperfect, key=lambda bv: bv[1].leakage)
            witness = FalsificationWitness("imperfect", basis, verdict)

    if witness is None:
        logging.warning(f"No witness found for a d={d} state within {len(log.entries)} probes")
        return log.report(INCONCLUSIVE, seed, structural=structural)
    if refine:
        witness = _refined(rho, witness, tol)
    logging.info(f"Falsified d={d} state with a '{witness.kind}' witness after {len(log.entries)} probes")
    return log.report(FALSIFIED, seed, witness=witness, structural=structural)

