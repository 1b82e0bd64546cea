"""Bipartite qudit linear algebra: validated states, measurement bases, Haar sampling,
joint outcome statistics and conditional collapse.

All arrays are numpy complex128. Outcomes and basis vectors are 0-based here; the CLI
converts to 1-based labels for display.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
import scipy.linalg

from errors import (DimensionMismatch, IndexOutOfRange, InvalidParameters, NegativeProbability,
                    NotHermitian, NotPositiveSemidefinite, OutOfRange, TraceNotOne)

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
DEFAULT_PSD_TOL = 1e-9
ORTHONORMAL_TOL = 1e-10
NEGATIVE_PROB_TOL = 1e-12
DIST_SUM_TOL = 1e-9


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for work item ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def derive_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def as_complex_matrix(raw, name: str = "matrix") -> np.ndarray:
    m = np.asarray(raw, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"{name} must be two-dimensional", {"shape": list(m.shape)})
    if not np.all(np.isfinite(m)):
        raise InvalidParameters(f"{name} has non-finite entries")
    return m


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


# ─────────────────────────────────────────────── domain types
@dataclass(frozen=True, eq=False)
class DensityMatrix:
    local_dim: int
    bipartite: bool
    matrix: np.ndarray
    psd_tolerance: float = DEFAULT_PSD_TOL

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def rank(self, tol: float = 1e-9) -> int:
        return int(np.sum(self.eigenvalues() > tol))

    def reduced(self, keep: Literal["A", "B"]) -> np.ndarray:
        if not self.bipartite:
            raise DimensionMismatch("partial trace needs a bipartite state")
        d = self.local_dim
        t = self.matrix.reshape(d, d, d, d)
        return np.einsum("abcb->ac", t) if keep == "A" else np.einsum("abad->bd", t)

    def distance(self, other) -> float:
        """Largest entrywise modulus of the difference."""
        other = other.matrix if isinstance(other, DensityMatrix) else np.asarray(other)
        return float(np.max(np.abs(self.matrix - other)))


@dataclass(frozen=True, eq=False)
class PureState:
    local_dim: int
    amplitudes: np.ndarray

    @classmethod
    def from_amplitudes(cls, amplitudes, local_dim: int) -> "PureState":
        psi = np.asarray(amplitudes, dtype=complex).ravel()
        if psi.size != local_dim ** 2:
            raise DimensionMismatch(f"expected {local_dim ** 2} amplitudes, got {psi.size}")
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > 1e-10:
            raise InvalidParameters("state vector is not normalized", {"norm": float(norm)})
        return cls(local_dim, _frozen(psi))

    def coefficient_matrix(self) -> np.ndarray:
        return self.amplitudes.reshape(self.local_dim, self.local_dim)

    def schmidt(self):
        """(coefficients, basis_A, basis_B) with psi = Σ_k s_k |a_k⟩|b_k⟩."""
        u, s, vh = np.linalg.svd(self.coefficient_matrix())
        return s, u.T, vh

    def projector(self, psd_tolerance: float = DEFAULT_PSD_TOL) -> DensityMatrix:
        return validate_density(np.outer(self.amplitudes, self.amplitudes.conj()),
                                self.local_dim, bipartite=True, psd_tolerance=psd_tolerance)


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Rows of ``vectors`` are the basis vectors e_0 … e_{d-1}."""
    local_dim: int
    vectors: np.ndarray

    @classmethod
    def from_vectors(cls, vectors) -> "OrthonormalBasis":
        v = as_complex_matrix(vectors, "basis")
        d = v.shape[0]
        if v.shape != (d, d):
            raise DimensionMismatch("a basis needs d vectors of length d", {"shape": list(v.shape)})
        gram_err = float(np.max(np.abs(v.conj() @ v.T - np.eye(d))))
        if gram_err > ORTHONORMAL_TOL:
            raise InvalidParameters("basis vectors are not orthonormal", {"max_gram_error": gram_err})
        return cls(d, _frozen(v))

    @classmethod
    def computational(cls, d: int) -> "OrthonormalBasis":
        return cls(d, _frozen(np.eye(d)))

    @classmethod
    def fourier(cls, d: int) -> "OrthonormalBasis":
        """f_k = Σ_j ω^{jk} |j⟩ / √d with ω = e^{2πi/d}."""
        j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
        f = np.exp(2j * np.pi * j * k / d) / np.sqrt(d)
        return cls(d, _frozen(f.T))

    @classmethod
    def from_unitary(cls, u) -> "OrthonormalBasis":
        """Basis made of the columns of ``u``."""
        return cls.from_vectors(np.asarray(u).T)

    def as_columns(self) -> np.ndarray:
        return self.vectors.T

    def rotated(self, u: np.ndarray) -> "OrthonormalBasis":
        return OrthonormalBasis(self.local_dim, _frozen(self.vectors @ np.asarray(u).T))

    def overlaps(self, other: "OrthonormalBasis") -> np.ndarray:
        """|⟨e_i|f_j⟩|² for all i, j."""
        return np.abs(self.vectors.conj() @ other.vectors.T) ** 2


@dataclass(frozen=True, eq=False)
class JointDistribution:
    local_dim: int
    probs: np.ndarray

    def marginal_a(self) -> np.ndarray:
        return self.probs.sum(axis=1)

    def marginal_b(self) -> np.ndarray:
        return self.probs.sum(axis=0)


# ─────────────────────────────────────────────── operations
def validate_density(raw, local_dim: int, bipartite: bool = True,
                     psd_tolerance: float = DEFAULT_PSD_TOL) -> DensityMatrix:
    m = as_complex_matrix(raw, "density matrix")
    n = local_dim ** 2 if bipartite else local_dim
    if local_dim < 1 or m.shape != (n, n):
        raise DimensionMismatch(
            f"expected a {n}x{n} matrix for local_dim {local_dim}",
            {"shape": list(m.shape), "local_dim": local_dim, "bipartite": bipartite})

    herm_err = float(np.max(np.abs(m - m.conj().T)))
    if herm_err > HERMITIAN_TOL:
        raise NotHermitian(details={"max_deviation": herm_err})
    m = (m + m.conj().T) / 2

    trace = float(np.real(np.trace(m)))
    if abs(trace - 1.0) > TRACE_TOL:
        raise TraceNotOne(details={"trace": trace})

    min_eig = float(scipy.linalg.eigvalsh(m)[0])
    if min_eig < -psd_tolerance:
        raise NotPositiveSemidefinite(
            f"Operator is not positive semidefinite (min eigenvalue {min_eig:.6g}).",
            {"min_eigenvalue": min_eig, "psd_tolerance": psd_tolerance})

    return DensityMatrix(local_dim, bipartite, _frozen(m), psd_tolerance)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    if d < 1:
        raise OutOfRange("unitary dimension must be at least 1", {"d": d})
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = scipy.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_basis(d: int, rng: np.random.Generator) -> OrthonormalBasis:
    return OrthonormalBasis(d, _frozen(haar_unitary(d, rng).T))


def random_state(d: int, kind: Literal["pure", "mixed"], rng: np.random.Generator,
                 psd_tolerance: float = DEFAULT_PSD_TOL) -> DensityMatrix:
    if d < 2:
        raise OutOfRange("random states need d >= 2", {"d": d})
    n = d * d
    if kind == "pure":
        psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
    elif kind == "mixed":
        # Haar pure state on (system ⊗ purifier), purifier of dimension d², then trace out.
        big = rng.standard_normal(n * n) + 1j * rng.standard_normal(n * n)
        big /= np.linalg.norm(big)
        m = big.reshape(n, n)
        rho = m @ m.conj().T
    else:
        raise InvalidParameters(f"unknown state kind '{kind}'")
    return validate_density(rho, d, bipartite=True, psd_tolerance=psd_tolerance)


def _check_pair(rho: DensityMatrix, basis: OrthonormalBasis):
    if not rho.bipartite:
        raise DimensionMismatch("a bipartite state is required")
    if rho.local_dim != basis.local_dim:
        raise DimensionMismatch(
            f"state has local_dim {rho.local_dim}, basis has {basis.local_dim}",
            {"state_dim": rho.local_dim, "basis_dim": basis.local_dim})


def in_product_basis(rho: DensityMatrix, basis: OrthonormalBasis) -> np.ndarray:
    """Matrix of rho in the product basis {e_i ⊗ e_j}."""
    _check_pair(rho, basis)
    k = np.kron(basis.as_columns(), basis.as_columns())
    return k.conj().T @ rho.matrix @ k


def joint_distribution(rho: DensityMatrix, basis: OrthonormalBasis) -> JointDistribution:
    d = basis.local_dim
    probs = np.real(np.diag(in_product_basis(rho, basis))).reshape(d, d).copy()
    worst = float(probs.min())
    if worst < -NEGATIVE_PROB_TOL:
        raise NegativeProbability(details={"min_probability": worst})
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > DIST_SUM_TOL:
        raise InvalidParameters("joint distribution does not sum to 1", {"sum": float(total)})
    probs /= total
    probs.setflags(write=False)
    return JointDistribution(d, probs)


def condition_on(rho: DensityMatrix, vector: np.ndarray) -> np.ndarray:
    """⟨v^A|rho|v^A⟩ for an arbitrary vector v of subsystem A."""
    d = rho.local_dim
    t = rho.matrix.reshape(d, d, d, d)
    v = np.asarray(vector, dtype=complex)
    return np.einsum("a,abcd,c->bd", v.conj(), t, v)


def conditional_operator(rho: DensityMatrix, outcome_index: int,
                         basis: OrthonormalBasis) -> np.ndarray:
    _check_pair(rho, basis)
    if not 0 <= outcome_index < basis.local_dim:
        raise IndexOutOfRange(details={"index": outcome_index, "local_dim": basis.local_dim})
    return condition_on(rho, basis.vectors[outcome_index])


def dominant_eigenvector(rho: DensityMatrix) -> np.ndarray:
    _, vecs = scipy.linalg.eigh(rho.matrix)
    return vecs[:, -1]


def schmidt_basis(rho: DensityMatrix) -> Optional[OrthonormalBasis]:
    """Subsystem-A Schmidt basis of the dominant eigenvector of rho."""
    psi = dominant_eigenvector(rho)
    _, basis_a, _ = PureState(rho.local_dim, psi).schmidt()
    try:
        return OrthonormalBasis.from_vectors(basis_a)
    except InvalidParameters:
        logging.debug("Schmidt vectors failed the orthonormality check; skipping candidate")
        return None
