"""Two-photon state preparation at a partially polarizing beam splitter.

One photon per input arm, each in a linear-polarization state; the beam
splitter transmits H and V with real amplitudes t_H and t_V (power
transmittivities t^2) and reflects with amplitude i*r (r = sqrt(1 - t^2),
symmetric convention).  Post-selecting on one photon per output arm leaves
the polarization map

    M = (T x T) - SWAP (R x R),        T = diag(t_H, t_V), R = diag(r_H, r_V)

which is diagonal whenever r_H = 0: diag(t_H^2, t_H t_V, t_V t_H, t_V^2 - r_V^2).
The defaults t_H = 1, t_V = 1/sqrt(3) give the entangling gate
diag(1, 1/sqrt(3), 1/sqrt(3), -1/3); the input pre-bias angle pi/3 on arm 1
then yields a maximally entangled state at waveplate parameter alpha = pi/6.

Partial wavepacket overlap mu between the photons splits the post-selected
(unnormalized) output into an interfering branch (weight mu) and a
distinguishable branch (weight 1 - mu) in which the two-photon amplitudes
for "both transmitted" and "both reflected" add incoherently.
``bosonic_oracle`` rebuilds the same state from scratch with explicit
creation-operator algebra over 8 optical modes and is the independent check
on ``prepare``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import check_density_matrix

__all__ = ["SourceConfig", "PreparedState", "ppbs_map", "prepare", "bosonic_oracle"]

DEFAULT_ALICE_ANGLE = math.pi / 3
DEFAULT_T_H = 1.0
DEFAULT_T_V = 1.0 / math.sqrt(3.0)

_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
    dtype=float,
)

# Post-selection succeeding with probability below this is treated as never.
_MIN_SUCCESS = 1e-15


@dataclass(frozen=True)
class SourceConfig:
    """Source parameters: input angles, transmittivity amplitudes, photon overlap."""

    alpha: float
    alice_angle: float = DEFAULT_ALICE_ANGLE
    t_h: float = DEFAULT_T_H
    t_v: float = DEFAULT_T_V
    indistinguishability: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.alice_angle)):
            raise ValueError("angles must be finite")
        for name in ("t_h", "t_v"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {val!r}")
        if not 0.0 <= self.indistinguishability <= 1.0:
            raise ValueError(
                f"indistinguishability must lie in [0, 1], got {self.indistinguishability!r}"
            )


@dataclass(frozen=True)
class PreparedState:
    """Normalized post-selected two-qubit state and its success probability."""

    rho: np.ndarray
    success_probability: float

    def __post_init__(self):
        check_density_matrix(self.rho, "prepared state")
        if not 0.0 < self.success_probability <= 1.0:
            raise ValueError(
                f"success probability must lie in (0, 1], got {self.success_probability!r}"
            )


def _reflection(t: float) -> float:
    return math.sqrt(max(1.0 - t * t, 0.0))


def ppbs_map(t_h: float = DEFAULT_T_H, t_v: float = DEFAULT_T_V) -> np.ndarray:
    """Post-selected two-photon polarization amplitude map of the beam splitter.

    Diagonal diag(t_H^2, t_H t_V, t_V t_H, t_V^2 - r_V^2) for a fully
    transmissive H port; the general map carries an extra HV <-> VH coupling
    from the doubly-reflected paths.
    """
    for name, t in (("t_h", t_h), ("t_v", t_v)):
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {t!r}")
    t_mat = np.diag([t_h, t_v])
    r_mat = np.diag([_reflection(t_h), _reflection(t_v)])
    return np.kron(t_mat, t_mat) - _SWAP @ np.kron(r_mat, r_mat)


def _input_amplitudes(config: SourceConfig) -> tuple[np.ndarray, np.ndarray]:
    chi_a = np.array([math.cos(config.alice_angle), math.sin(config.alice_angle)])
    chi_b = np.array([math.cos(2.0 * config.alpha), math.sin(2.0 * config.alpha)])
    return chi_a, chi_b


def prepare(config: SourceConfig) -> PreparedState:
    """Post-selected output state for the given source configuration.

    The interfering and distinguishable branches are blended with weights
    mu and 1 - mu *before* renormalization, so the success probability is
    mu * P_interfering + (1 - mu) * P_distinguishable.
    """
    chi_a, chi_b = _input_amplitudes(config)
    product = np.kron(chi_a, chi_b)
    mu = config.indistinguishability

    psi_int = ppbs_map(config.t_h, config.t_v) @ product

    t_mat = np.diag([config.t_h, config.t_v])
    r_mat = np.diag([_reflection(config.t_h), _reflection(config.t_v)])
    psi_stay = np.kron(t_mat @ chi_a, t_mat @ chi_b)
    psi_swap = -_SWAP @ np.kron(r_mat @ chi_a, r_mat @ chi_b)

    unnormalized = mu * np.outer(psi_int, psi_int) + (1.0 - mu) * (
        np.outer(psi_stay, psi_stay) + np.outer(psi_swap, psi_swap)
    )
    success = float(np.trace(unnormalized).real)
    if success < _MIN_SUCCESS:
        raise ValueError("post-selection never succeeds for this configuration")
    rho = unnormalized.astype(complex) / success
    rho = 0.5 * (rho + rho.conj().T)
    return PreparedState(rho=rho, success_probability=success)


def bosonic_oracle(config: SourceConfig) -> PreparedState:
    """Brute-force reconstruction of prepare() from creation-operator algebra.

    Photons occupy modes (arm, polarization, wavepacket label).  The photon in
    arm 2 carries wavepacket sqrt(mu)|0> + sqrt(1-mu)|1> relative to the arm-1
    photon.  Both single-photon polynomials are pushed through the beam
    splitter, multiplied (bosonic operators commute), and the coefficients of
    one-photon-per-arm monomials are kept.  Tracing out the labels yields the
    polarization state; the squared norm of the kept branch is the success
    probability.
    """
    chi_a, chi_b = _input_amplitudes(config)
    mu = config.indistinguishability
    amp_t = {0: complex(config.t_h), 1: complex(config.t_v)}
    amp_r = {0: 1j * _reflection(config.t_h), 1: 1j * _reflection(config.t_v)}

    def split(mode):
        arm, pol, label = mode
        other = 3 - arm
        return {(arm, pol, label): amp_t[pol], (other, pol, label): amp_r[pol]}

    photon_1 = {(1, pol, 0): complex(chi_a[pol]) for pol in (0, 1)}
    photon_2 = {}
    for pol in (0, 1):
        photon_2[(2, pol, 0)] = chi_b[pol] * math.sqrt(mu)
        photon_2[(2, pol, 1)] = chi_b[pol] * math.sqrt(1.0 - mu)

    out_1 = {}
    for mode, coeff in photon_1.items():
        for new_mode, amp in split(mode).items():
            out_1[new_mode] = out_1.get(new_mode, 0.0) + coeff * amp
    out_2 = {}
    for mode, coeff in photon_2.items():
        for new_mode, amp in split(mode).items():
            out_2[new_mode] = out_2.get(new_mode, 0.0) + coeff * amp

    # Coefficients of a(1,p,l1)+ a(2,q,l2)+ |vac>; modes always distinct, so
    # these are amplitudes of orthonormal Fock states.
    kept = np.zeros((2, 2, 2, 2), dtype=complex)  # [p, l1, q, l2]
    for (arm_1, p, l1), c1 in out_1.items():
        for (arm_2, q, l2), c2 in out_2.items():
            if arm_1 == 1 and arm_2 == 2:
                kept[p, l1, q, l2] += c1 * c2
            elif arm_1 == 2 and arm_2 == 1:
                kept[q, l2, p, l1] += c1 * c2

    success = float(np.sum(np.abs(kept) ** 2))
    if success < _MIN_SUCCESS:
        raise ValueError("post-selection never succeeds for this configuration")
    rho = np.einsum("ajbk,cjdk->abcd", kept, kept.conj()).reshape(4, 4) / success
    rho = 0.5 * (rho + rho.conj().T)
    return PreparedState(rho=rho, success_probability=success)
