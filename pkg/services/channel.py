"""Collective unitary transmission noise rho ↦ (U⊗U) rho (U⊗U)†.

Both halves of a pair travel through the same line and pick up the same random U.
``simulate`` measures how often the outcome map calibrated before transmission
still holds afterwards.
"""

import logging
from dataclasses import dataclass
from typing import List, Literal, Optional

import numpy as np

from errors import DimensionMismatch, NotUnitary, OutOfRange
from services.graph import OutcomePermutation, classify
from services.invariance import ProbeConfig, invariance_defect
from services.pauli import SINGLET_PROJECTOR, certify_theorem1
from services.pool import ordered_map
from services.qudit import (DensityMatrix, OrthonormalBasis, derive_seed, dominant_eigenvector, haar_unitary,
                            joint_distribution, random_state, stream, validate_density)
from services.states import spin_unitary

UNITARY_TOL = 1e-10
NEAR_SINGLET_TOL = 1e-6

NoiseModel = Literal["haar", "spin"]


def collective_channel(rho: DensityMatrix, u) -> DensityMatrix:
    u = np.asarray(u, dtype=complex)
    d = rho.local_dim
    if not rho.bipartite or u.shape != (d, d):
        raise DimensionMismatch(f"need a {d}x{d} unitary for local_dim {d}",
                                {"unitary_shape": list(u.shape), "local_dim": d})
    err = float(np.max(np.abs(u.conj().T @ u - np.eye(d))))
    if err > UNITARY_TOL:
        raise NotUnitary(details={"max_deviation": err})
    k = np.kron(u, u)
    return validate_density(k @ rho.matrix @ k.conj().T, d, psd_tolerance=rho.psd_tolerance)


@dataclass(frozen=True, eq=False)
class ChannelConfig:
    input_state: DensityMatrix
    trials: int
    measurement_basis: Optional[OrthonormalBasis] = None
    declared_map: Optional[OutcomePermutation] = None
    seed: int = 0
    noise: NoiseModel = "haar"
    workers: int = 1

    def basis(self) -> OrthonormalBasis:
        return self.measurement_basis or OrthonormalBasis.computational(self.input_state.local_dim)


@dataclass(frozen=True, eq=False)
class ChannelStats:
    per_trial_success: np.ndarray
    mean: float
    std_error: float
    min: float
    trials: int
    seed: int
    declared_map: OutcomePermutation


def calibrated_map(rho: DensityMatrix, basis: OrthonormalBasis) -> OutcomePermutation:
    """Best one-to-one map of the noiseless state; what an experimenter would calibrate."""
    return classify(joint_distribution(rho, basis)).permutation


def _noise_unitary(d: int, noise: NoiseModel, rng: np.random.Generator) -> np.ndarray:
    if noise == "haar":
        return haar_unitary(d, rng)
    if noise == "spin":
        return spin_unitary(d, rng)
    raise OutOfRange(f"unknown noise model '{noise}'", {"known": ["haar", "spin"]})


def simulate(config: ChannelConfig) -> ChannelStats:
    if config.trials < 1:
        raise OutOfRange("trials must be at least 1", {"trials": config.trials})
    rho, basis = config.input_state, config.basis()
    if basis.local_dim != rho.local_dim:
        raise DimensionMismatch("measurement basis does not match the state",
                                {"state_dim": rho.local_dim, "basis_dim": basis.local_dim})
    declared = config.declared_map or calibrated_map(rho, basis)
    if declared.d != rho.local_dim:
        raise DimensionMismatch("declared map does not match the state",
                                {"map_size": declared.d, "local_dim": rho.local_dim})
    rows, cols = np.arange(declared.d), list(declared.mapping)

    def trial(t: int) -> float:
        u = _noise_unitary(rho.local_dim, config.noise, stream(config.seed, t))
        probs = joint_distribution(collective_channel(rho, u), basis).probs
        return float(np.clip(probs[rows, cols].sum(), 0.0, 1.0))

    logging.info(f"Simulating {config.trials} {config.noise} trials (seed {config.seed}, map {list(declared.mapping)})")
    success = np.array(ordered_map(trial, range(config.trials), config.workers))
    std_error = float(success.std(ddof=1) / np.sqrt(config.trials)) if config.trials > 1 else 0.0
    return ChannelStats(success, float(success.mean()), std_error, float(success.min()),
                        config.trials, config.seed, declared)


# ─────────────────────────────────────────────── random-state scan
@dataclass(frozen=True, eq=False)
class ScanEntry:
    index: int
    kind: str
    defect: float
    signature_mismatch: bool
    state: DensityMatrix


@dataclass(frozen=True, eq=False)
class ScanReport:
    d: int
    count: int
    probes_per_state: int
    seed: int
    min_defect: float
    argmin: ScanEntry
    mismatches: int
    near_singlet: List[int]
    snapped_certified: Optional[bool] = None


def _snap_to_singlet(state: DensityMatrix) -> DensityMatrix:
    """Projector onto the dominant eigenvector, used to test near-singlet states."""
    psi = dominant_eigenvector(state)
    return validate_density(np.outer(psi, psi.conj()), state.local_dim)


def scan_random_states(d: int, count: int, probes_per_state: int, seed: int = 0,
                       refine: bool = False, workers: int = 1,
                       states: Optional[List[DensityMatrix]] = None) -> ScanReport:
    if d < 2:
        raise OutOfRange("scan needs d >= 2", {"d": d})
    if states is None and count < 1:
        raise OutOfRange("count must be at least 1", {"count": count})
    if states is not None:
        count = len(states)

    def evaluate(i: int) -> ScanEntry:
        if states is not None:
            state, kind = states[i], "given"
        else:
            kind = "pure" if i % 2 == 0 else "mixed"
            state = random_state(d, kind, stream(seed, i))
        defect = invariance_defect(state, ProbeConfig(probes_per_state, refine, derive_seed(seed, i)))
        return ScanEntry(i, kind, defect.value, defect.signature_mismatch, state)

    entries = ordered_map(evaluate, range(count), workers)
    argmin = min(entries, key=lambda e: e.defect)
    near_singlet = []
    snapped = None
    if d == 2:
        near_singlet = [e.index for e in entries if e.state.distance(SINGLET_PROJECTOR) <= NEAR_SINGLET_TOL]
        snapped = certify_theorem1(_snap_to_singlet(argmin.state)).certified
    logging.info(f"Scanned {count} d={d} states: min defect {argmin.defect:.3e} at #{argmin.index}")
    return ScanReport(d, count, probes_per_state, seed, argmin.defect, argmin,
                      sum(e.signature_mismatch for e in entries), near_singlet, snapped)
