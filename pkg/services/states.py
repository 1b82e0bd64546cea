"""Named bipartite states and spin-j machinery.

The spin-j singlet is perfectly anti-correlated (m → −m) in every basis obtained by
rotating |j, m⟩ with the spin-j representation of SU(2); ``spin_basis`` and
``spin_unitary`` produce exactly those rotations.
"""

import logging
from typing import Tuple

import numpy as np
import scipy.linalg

from errors import InvalidParameters, OutOfRange
from services.qudit import (DensityMatrix, OrthonormalBasis, PureState, random_state,
                            stream, validate_density)

MAX_BUILTIN_DIM = 16


def _pure(psi, d: int) -> DensityMatrix:
    return PureState.from_amplitudes(psi, d).projector()


def singlet() -> DensityMatrix:
    return _pure(np.array([0, 1, -1, 0]) / np.sqrt(2), 2)


def phi_plus() -> DensityMatrix:
    return _pure(np.array([1, 0, 0, 1]) / np.sqrt(2), 2)


def phi_minus() -> DensityMatrix:
    return _pure(np.array([1, 0, 0, -1]) / np.sqrt(2), 2)


def max_entangled(d: int) -> DensityMatrix:
    """Σ_i |ii⟩ / √d."""
    return _pure(np.eye(d).ravel() / np.sqrt(d), d)


def product_zero(d: int) -> DensityMatrix:
    psi = np.zeros(d * d)
    psi[0] = 1.0
    return _pure(psi, d)


def classical_mixture(d: int) -> DensityMatrix:
    """(1/d) Σ_i |ii⟩⟨ii|."""
    diag = np.eye(d).ravel() / d
    return validate_density(np.diag(diag), d)


def maximally_mixed(d: int) -> DensityMatrix:
    return validate_density(np.eye(d * d) / (d * d), d)


# ─────────────────────────────────────────────── spin-j
def spin_operators(d: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Jx, Jy, Jz) for spin j = (d-1)/2 in the |j, m⟩ basis ordered m = j … -j."""
    j = (d - 1) / 2
    m = j - np.arange(d)
    jz = np.diag(m).astype(complex)
    # ⟨m+1|J+|m⟩ = sqrt(j(j+1) - m(m+1))
    jp = np.zeros((d, d), dtype=complex)
    for k in range(1, d):
        jp[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    return jx, jy, jz


def spin_rotation(d: int, angle: float, axis) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    jx, jy, jz = spin_operators(d)
    return scipy.linalg.expm(-1j * angle * (axis[0] * jx + axis[1] * jy + axis[2] * jz))


def spin_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Spin-j image of a Haar-random SU(2) element (uniform unit quaternion)."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    angle = 2 * np.arccos(np.clip(q[0], -1.0, 1.0))
    axis = q[1:]
    if np.linalg.norm(axis) < 1e-15:
        return np.eye(d, dtype=complex)
    return spin_rotation(d, angle, axis)


def spin_basis(d: int, rng: np.random.Generator) -> OrthonormalBasis:
    return OrthonormalBasis.from_unitary(spin_unitary(d, rng))


def spin_singlet(d: int) -> DensityMatrix:
    """Σ_m (-1)^{j-m} |m⟩|-m⟩ / √d; for d = 2 this is the two-qubit singlet."""
    psi = np.zeros((d, d))
    for k in range(d):
        psi[k, d - 1 - k] = (-1) ** k
    return _pure(psi.ravel() / np.sqrt(d), d)


# ─────────────────────────────────────────────── name lookup
def _dim(arg: str, name: str) -> int:
    try:
        d = int(arg)
    except (TypeError, ValueError):
        raise InvalidParameters(f"state '{name}' needs an integer dimension, e.g. '{name}:3'")
    if not 2 <= d <= MAX_BUILTIN_DIM:
        raise OutOfRange(f"state dimension must lie in [2, {MAX_BUILTIN_DIM}]", {"d": d})
    return d


def named_state(spec: str, seed: int = 0) -> DensityMatrix:
    """Resolve ``singlet``, ``phi-plus``, ``max-entangled:3``, ``mixed:3`` and friends."""
    name, _, arg = spec.partition(":")
    fixed = {"singlet": singlet, "phi-plus": phi_plus, "phi-minus": phi_minus}
    sized = {"max-entangled": max_entangled, "spin-singlet": spin_singlet,
             "product": product_zero, "classical": classical_mixture,
             "maximally-mixed": maximally_mixed}
    if name in fixed:
        return fixed[name]()
    if name in sized:
        return sized[name](_dim(arg, name))
    if name in ("mixed", "pure"):
        d = _dim(arg, name)
        logging.info(f"Sampling a random {name} state with d={d}, seed={seed}")
        return random_state(d, name, stream(seed))
    raise InvalidParameters(f"unknown state '{spec}'",
                            {"known": sorted([*fixed, *sized, "mixed", "pure"])})
