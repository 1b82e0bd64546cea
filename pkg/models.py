"""Wire schemas: everything that is read from or written to a file goes through here."""

import json
import math
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, field_validator, model_validator

from errors import DimensionMismatch
from services.channel import ChannelStats, ScanReport
from services.graph import PerfectCorrelationVerdict
from services.invariance import FalsificationWitness, InvarianceReport, StructuralReport
from services.pauli import Certificate, CorrelationTensorDecomposition
from services.qudit import DensityMatrix, OrthonormalBasis, validate_density


def _rows(a) -> List[List[float]]:
    return [[float(x) for x in row] for row in np.asarray(a)]


# ─────────────────────────────────────────────── inputs
class DensityMatrixFile(BaseModel):
    local_dim: int
    bipartite: bool = True
    re: List[List[float]]
    im: List[List[float]]

    @model_validator(mode="after")
    def _square(self):
        n = self.local_dim ** 2 if self.bipartite else self.local_dim
        for name in ("re", "im"):
            rows = getattr(self, name)
            if len(rows) != n or any(len(r) != n for r in rows):
                raise ValueError(f"'{name}' must be a {n}x{n} array for local_dim {self.local_dim}")
        return self

    def to_density(self, psd_tolerance: float = 1e-9) -> DensityMatrix:
        raw = np.array(self.re) + 1j * np.array(self.im)
        return validate_density(raw, self.local_dim, self.bipartite, psd_tolerance)

    @classmethod
    def from_density(cls, rho: DensityMatrix) -> "DensityMatrixFile":
        return cls(local_dim=rho.local_dim, bipartite=rho.bipartite,
                   re=_rows(rho.matrix.real), im=_rows(rho.matrix.imag))


class BasisFile(BaseModel):
    local_dim: int
    vectors_re: List[List[float]]
    vectors_im: List[List[float]]

    @field_validator("local_dim")
    @classmethod
    def _positive(cls, v):
        if v < 1: raise ValueError("local_dim must be positive")
        return v

    def to_basis(self) -> OrthonormalBasis:
        basis = OrthonormalBasis.from_vectors(np.array(self.vectors_re) + 1j * np.array(self.vectors_im))
        if basis.local_dim != self.local_dim:
            raise DimensionMismatch(f"basis has {basis.local_dim} vectors, local_dim says {self.local_dim}",
                                    {"vectors": basis.local_dim, "local_dim": self.local_dim})
        return basis

    @classmethod
    def from_basis(cls, basis: OrthonormalBasis) -> "BasisFile":
        return cls(local_dim=basis.local_dim, vectors_re=_rows(basis.vectors.real),
                   vectors_im=_rows(basis.vectors.imag))


# ─────────────────────────────────────────────── outputs
class DecompositionOut(BaseModel):
    alpha: List[float]
    beta: List[float]
    T: List[List[float]]

    @classmethod
    def build(cls, decomp: CorrelationTensorDecomposition) -> "DecompositionOut":
        return cls(alpha=[float(x) for x in decomp.alpha], beta=[float(x) for x in decomp.beta],
                   T=_rows(decomp.T))


class CertificateOut(BaseModel):
    verdict: str
    reason: Optional[str] = None
    residuals: Dict[str, float] = {}

    @classmethod
    def build(cls, cert: Certificate) -> "CertificateOut":
        return cls(verdict=cert.verdict, reason=cert.reason, residuals=cert.residuals)


class VerdictOut(BaseModel):
    perfect: bool
    status: str
    permutation: List[int]
    signature: Optional[str] = None
    leakage: float
    edges: Optional[List[List[int]]] = None

    @classmethod
    def build(cls, v: PerfectCorrelationVerdict) -> "VerdictOut":
        # 1-based outcome labels for display
        return cls(perfect=v.perfect, status=v.status,
                   permutation=[j + 1 for j in v.permutation.mapping],
                   signature=str(v.signature) if v.signature is not None else None, leakage=v.leakage,
                   edges=[list(e) for e in v.permutation.edges()] if v.perfect else None)


class WitnessOut(BaseModel):
    kind: str
    basis_1: BasisFile
    verdict_1: VerdictOut
    basis_2: Optional[BasisFile] = None
    verdict_2: Optional[VerdictOut] = None
    shared_vector_index: Optional[int] = None
    detail: Dict[str, float] = {}

    @classmethod
    def build(cls, w: FalsificationWitness) -> "WitnessOut":
        return cls(kind=w.kind, basis_1=BasisFile.from_basis(w.basis_1),
                   verdict_1=VerdictOut.build(w.verdict_1),
                   basis_2=BasisFile.from_basis(w.basis_2) if w.basis_2 is not None else None,
                   verdict_2=VerdictOut.build(w.verdict_2) if w.verdict_2 is not None else None,
                   shared_vector_index=None if w.shared_vector_index is None else w.shared_vector_index + 1,
                   detail=w.detail)


class StructuralOut(BaseModel):
    stages_passed: int
    failed_stage: Optional[int] = None
    off_diagonal_mass: float
    rank: int
    coefficient_spread: Optional[float] = None
    max_violation: float
    pure_distance: Optional[float] = None
    contradiction_with_mixedness: bool

    @classmethod
    def build(cls, s: StructuralReport) -> "StructuralOut":
        return cls(stages_passed=s.stages_passed, failed_stage=s.failed_stage,
                   off_diagonal_mass=s.off_diagonal_mass, rank=s.rank,
                   coefficient_spread=s.coefficient_spread, max_violation=s.max_violation,
                   pure_distance=s.pure_distance,
                   contradiction_with_mixedness=s.contradiction_with_mixedness)


class InvarianceReportOut(BaseModel):
    verdict: str
    defect: float
    signature_mismatch: bool
    witness: Optional[WitnessOut] = None
    certificate: Optional[CertificateOut] = None
    structural: Optional[StructuralOut] = None
    probes: int
    seed: int

    @classmethod
    def build(cls, r: InvarianceReport) -> "InvarianceReportOut":
        return cls(verdict=r.verdict, defect=r.defect, signature_mismatch=r.signature_mismatch,
                   witness=WitnessOut.build(r.witness) if r.witness else None,
                   certificate=CertificateOut.build(r.certificate) if r.certificate else None,
                   structural=StructuralOut.build(r.structural) if r.structural else None,
                   probes=r.probes, seed=r.seed)


class ChannelStatsOut(BaseModel):
    mean: float
    std_error: float
    min: float
    trials: int
    seed: int
    declared_map: List[int]
    noise: str

    @classmethod
    def build(cls, s: ChannelStats, noise: str) -> "ChannelStatsOut":
        return cls(mean=s.mean, std_error=s.std_error, min=s.min, trials=s.trials, seed=s.seed,
                   declared_map=[j + 1 for j in s.declared_map.mapping], noise=noise)


class ScanReportOut(BaseModel):
    dim: int
    count: int
    probes: int
    seed: int
    min_defect: float
    argmin_index: int
    argmin_kind: str
    argmin_signature_mismatch: bool
    argmin_state: DensityMatrixFile
    signature_mismatches: int
    near_singlet: List[int]
    snapped_certified: Optional[bool] = None

    @classmethod
    def build(cls, r: ScanReport) -> "ScanReportOut":
        return cls(dim=r.d, count=r.count, probes=r.probes_per_state, seed=r.seed,
                   min_defect=r.min_defect, argmin_index=r.argmin.index, argmin_kind=r.argmin.kind,
                   argmin_signature_mismatch=r.argmin.signature_mismatch,
                   argmin_state=DensityMatrixFile.from_density(r.argmin.state),
                   signature_mismatches=r.mismatches, near_singlet=r.near_singlet,
                   snapped_certified=r.snapped_certified)


class RunManifest(BaseModel):
    command: str
    argv: List[str]
    seed: Optional[int] = None
    version: str
    input_digests: Dict[str, str] = {}
    timestamp: str


# ─────────────────────────────────────────────── rendering
def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite float {x}")
    return format(x, ".17g")


def _render(value: Any, indent: int, level: int) -> str:
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if isinstance(value, BaseModel):
        value = value.model_dump()
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_render(v, indent, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, BaseModel)) for v in value):
            return "[" + ", ".join(_render(v, indent, level + 1) for v in value) + "]"
        items = [inner + _render(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def render_json(value: Any, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _render(value, indent, 0) + "\n"
