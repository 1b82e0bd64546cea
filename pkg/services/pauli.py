"""Two-qubit correlation tensor machinery.

A 2⊗2 state is written as

    rho = ¼ [ I⊗I + (α·σ)⊗I + I⊗(β·σ) + Σ_ij T_ij σ_i⊗σ_j ]

and ``⟨n·σ ⊗ n·σ⟩ = n T nᵀ``. An invariant ±1 correlation forces T = ±I₃ + X with X
antisymmetric; the positivity of the resulting operator then leaves only the singlet.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
import scipy.linalg

from errors import DimensionMismatch, InvalidParameters, NotUnitVector
from services.qudit import DensityMatrix

SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)
SIGMA.setflags(write=False)
I2 = np.eye(2, dtype=complex)

SINGLET_PROJECTOR = np.outer([0, 1, -1, 0], [0, 1, -1, 0]).astype(complex) / 2

STRUCTURAL_TOL = 1e-10
CERTIFICATE_TOL = 1e-9
VIETA_TOL = 1e-8
UNIT_TOL = 1e-9


def levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for perm, sign in zip(itertools.permutations(range(3)), (1, -1, -1, 1, 1, -1)):
        eps[perm] = sign
    return eps


def pauli_algebra_defect() -> float:
    """max |σᵢσⱼ − δᵢⱼI − iεᵢⱼₖσₖ| over all i, j."""
    eps = levi_civita()
    worst = 0.0
    for i in range(3):
        for j in range(3):
            expected = (i == j) * I2 + 1j * np.einsum("k,kab->ab", eps[i, j], SIGMA)
            worst = max(worst, float(np.max(np.abs(SIGMA[i] @ SIGMA[j] - expected))))
    return worst


def n_dot_sigma(n) -> np.ndarray:
    return np.einsum("k,kab->ab", np.asarray(n, dtype=float), SIGMA)


# ─────────────────────────────────────────────── decomposition
@dataclass(frozen=True, eq=False)
class CorrelationTensorDecomposition:
    alpha: np.ndarray
    beta: np.ndarray
    T: np.ndarray

    @property
    def X(self) -> np.ndarray:
        return (self.T - self.T.T) / 2

    def bound_violations(self) -> Dict[str, float]:
        """Amounts by which the physical-state bounds are exceeded (empty if none)."""
        out = {}
        for name, value, bound, tol in (
                ("alpha_norm", np.linalg.norm(self.alpha), 1.0, 1e-9),
                ("beta_norm", np.linalg.norm(self.beta), 1.0, 1e-9),
                ("max_abs_T", np.max(np.abs(self.T)), 1.0, 1e-9),
                ("total_norm", np.dot(self.alpha, self.alpha) + np.dot(self.beta, self.beta)
                 + np.trace(self.T.T @ self.T), 3.0, 1e-8)):
            if value > bound + tol:
                out[name] = float(value - bound)
        return out


def _require_two_qubits(rho: DensityMatrix):
    if not rho.bipartite or rho.local_dim != 2:
        raise DimensionMismatch("decompose requires local_dim 2",
                                {"local_dim": rho.local_dim, "bipartite": rho.bipartite})


def decompose(rho: DensityMatrix) -> CorrelationTensorDecomposition:
    _require_two_qubits(rho)
    t = rho.matrix.reshape(2, 2, 2, 2)
    alpha = np.real(np.einsum("ac,ica->i", rho.reduced("A"), SIGMA))
    beta = np.real(np.einsum("bd,jdb->j", rho.reduced("B"), SIGMA))
    # Tr[rho (A⊗B)] = Σ t[a,b,c,d] A[c,a] B[d,b]
    T = np.real(np.einsum("abcd,ica,jdb->ij", t, SIGMA, SIGMA))
    return CorrelationTensorDecomposition(alpha, beta, T)


def reconstruct(decomp: CorrelationTensorDecomposition) -> np.ndarray:
    a, b, T = (np.asarray(x, dtype=float) for x in (decomp.alpha, decomp.beta, decomp.T))
    m = np.kron(I2, I2) + np.kron(n_dot_sigma(a), I2) + np.kron(I2, n_dot_sigma(b))
    m = m + np.einsum("ij,iac,jbd->abcd", T, SIGMA, SIGMA).reshape(4, 4)
    return m / 4


def correlation_value(decomp: CorrelationTensorDecomposition, n) -> float:
    n = np.asarray(n, dtype=float)
    norm = float(np.linalg.norm(n))
    if n.shape != (3,) or abs(norm - 1.0) > UNIT_TOL:
        raise NotUnitVector(details={"norm": norm})
    return float(n @ decomp.T @ n)


def direct_correlation(rho: DensityMatrix, n) -> float:
    """Tr[rho (n·σ)⊗(n·σ)] straight from the matrix."""
    _require_two_qubits(rho)
    s = n_dot_sigma(n)
    return float(np.real(np.trace(rho.matrix @ np.kron(s, s))))


# ─────────────────────────────────────────────── T = ±I₃ + X
@dataclass(frozen=True, eq=False)
class AntisymmetricSplit:
    sign: int
    X: np.ndarray
    residual: float


def antisymmetric_split(T) -> AntisymmetricSplit:
    T = np.asarray(T, dtype=float)
    sign = -1 if np.trace(T) / 3 < 0 else 1
    X = (T - T.T) / 2
    residual = float(np.linalg.norm(T - sign * np.eye(3) - X))
    return AntisymmetricSplit(sign, X, residual)


def constrained_operator(alpha, beta, X, sign: int) -> np.ndarray:
    """The (not necessarily positive) operator with T = sign·I₃ + X."""
    X = np.asarray(X, dtype=float)
    if X.shape != (3, 3) or np.max(np.abs(X + X.T)) > STRUCTURAL_TOL:
        raise InvalidParameters("X must be a real antisymmetric 3x3 matrix")
    if sign not in (1, -1):
        raise InvalidParameters("sign must be +1 or -1", {"sign": sign})
    return reconstruct(CorrelationTensorDecomposition(
        np.asarray(alpha, dtype=float), np.asarray(beta, dtype=float), sign * np.eye(3) + X))


@dataclass(frozen=True)
class VietaCheck:
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)


def vieta_pair_sum(alpha, beta, X, sign: int) -> VietaCheck:
    """Σ_{i<j} λᵢλⱼ of the constrained operator against −⅛(‖α‖²+‖β‖²+‖X‖²)."""
    eigs = scipy.linalg.eigvalsh(constrained_operator(alpha, beta, X, sign))
    lhs = float(sum(a * b for a, b in itertools.combinations(eigs, 2)))
    X = np.asarray(X, dtype=float)
    rhs = -(np.dot(alpha, alpha) + np.dot(beta, beta) + np.trace(X.T @ X)) / 8
    return VietaCheck(lhs, float(rhs))


# ─────────────────────────────────────────────── certificate
TYPE_I_CERTIFIED = "TypeI-Certified"
NOT_INVARIANT = "NotInvariant"


@dataclass(frozen=True)
class Certificate:
    verdict: str
    reason: Optional[str] = None
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict == TYPE_I_CERTIFIED


def certify_theorem1(rho: DensityMatrix) -> Certificate:
    """Certify a 2⊗2 state by its entrywise distance to the singlet projector.

    A refusal names the first broken link of the invariance argument.
    """
    decomp = decompose(rho)
    split = antisymmetric_split(decomp.T)
    residuals = {
        "split_residual": split.residual,
        "alpha_norm": float(np.linalg.norm(decomp.alpha)),
        "beta_norm": float(np.linalg.norm(decomp.beta)),
        "tensor_distance": float(np.max(np.abs(decomp.T + np.eye(3)))),
        "singlet_distance": float(np.max(np.abs(rho.matrix - SINGLET_PROJECTOR))),
    }

    def refuse(reason):
        logging.debug(f"Singlet certificate refused: {reason}")
        return Certificate(NOT_INVARIANT, reason, residuals)

    if residuals["singlet_distance"] <= CERTIFICATE_TOL:
        return Certificate(TYPE_I_CERTIFIED, None, residuals)
    # refusal reason only
    if split.residual > STRUCTURAL_TOL:
        return refuse(f"correlation tensor is not ±I3 + antisymmetric (residual {split.residual:.3g})")
    if residuals["alpha_norm"] > CERTIFICATE_TOL:
        return refuse("local Bloch vector alpha is nonzero")
    if residuals["beta_norm"] > CERTIFICATE_TOL:
        return refuse("local Bloch vector beta is nonzero")
    if residuals["tensor_distance"] > CERTIFICATE_TOL:
        return refuse("correlation tensor is not -I3")
    return refuse("state differs from the singlet projector")
