"""Steering tests: correlation witness, Reid criterion, Fisher-information criterion.

Each test returns a WitnessReport carrying the measured value, the bound
satisfiable by non-steerable assemblages, optional 1-sigma uncertainties, and
the raw violation verdict (no significance threshold is applied here; callers
decide what to make of value, bound and sigmas).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assemblage import condition, conditional_variance, reid_lhs
from .qcore import (
    AXIS_X,
    AXIS_Y,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    check_bloch,
    check_density_matrix,
    partial_trace,
    pauli,
    tensor,
)

__all__ = ["WitnessReport", "qfi", "s_witness", "reid_check", "yfg_check"]

_QFI_EPS = 1e-12
_SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class WitnessReport:
    """Outcome of one steering test."""

    name: str
    value: float
    bound: float
    sigma_value: float = 0.0
    sigma_bound: float = 0.0
    violated: bool = False

    def __post_init__(self):
        if self.sigma_value < 0.0 or self.sigma_bound < 0.0:
            raise ValueError("uncertainties must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "bound": self.bound,
            "sigma_value": self.sigma_value,
            "sigma_bound": self.sigma_bound,
            "violated": self.violated,
        }


def qfi(rho: np.ndarray, generator) -> float:
    """Quantum Fisher information of a qubit state for evolution exp(i theta G).

    Spectral form: 2 sum_{i,j: l_i + l_j > eps} (l_i - l_j)^2 / (l_i + l_j)
    |<i|G|j>|^2.  Equals 4 Var(G) on pure states.
    """
    m = check_density_matrix(rho)
    if m.shape != (2, 2):
        raise ValueError("qfi expects a one-qubit (2x2) state")
    g = pauli(generator)
    evals, vecs = np.linalg.eigh(m)
    g_eig = vecs.conj().T @ g @ vecs
    total = 0.0
    for i in range(len(evals)):
        for j in range(len(evals)):
            denom = evals[i] + evals[j]
            if denom > _QFI_EPS:
                diff = evals[i] - evals[j]
                total += 2.0 * diff * diff / denom * float(abs(g_eig[i, j]) ** 2)
    return total


def s_witness(rho: np.ndarray, sigma_value: float = 0.0) -> WitnessReport:
    """Correlation witness |<X_A Z_B> + <Z_A X_B> + <Y_A Y_B>| / sqrt(3).

    Non-steerable assemblages obey value <= 1; the quantum maximum is sqrt(3).
    """
    m = check_density_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("s_witness expects a two-qubit (4x4) state")
    total = (
        np.trace(m @ tensor(PAULI_X, PAULI_Z))
        + np.trace(m @ tensor(PAULI_Z, PAULI_X))
        + np.trace(m @ tensor(PAULI_Y, PAULI_Y))
    )
    value = float(abs(total.real)) / _SQRT3
    return WitnessReport(
        name="S",
        value=value,
        bound=1.0,
        sigma_value=sigma_value,
        violated=value > 1.0,
    )


def reid_check(
    rho: np.ndarray, sigma_value: float = 0.0, sigma_bound: float = 0.0
) -> WitnessReport:
    """Reid test: product of inference variances against the commutator bound.

    value = (1 - <Y_A Y_B>)(1 - <Z_A X_B>); bound = <Z_B>^2 on Bob's
    unconditioned reduced state (from |[Y, X]| = 2|Z|).  Steering is flagged
    when the product drops below the bound.
    """
    m = check_density_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("reid_check expects a two-qubit (4x4) state")
    var_y, var_x = reid_lhs(m)
    value = var_y * var_x
    z_b = float(np.trace(partial_trace(m, "bob") @ PAULI_Z).real)
    bound = z_b * z_b
    return WitnessReport(
        name="Reid",
        value=value,
        bound=bound,
        sigma_value=sigma_value,
        sigma_bound=sigma_bound,
        violated=value < bound,
    )


def yfg_check(
    rho: np.ndarray,
    conditioning=AXIS_X,
    generator=AXIS_Y,
    variance_mode: str = "est-closed-form",
    sigma_value: float = 0.0,
    sigma_bound: float = 0.0,
) -> WitnessReport:
    """Fisher-information steering test on a single conditioning setting.

    value = sum_k p(k) F_Q(rho_k, generator), a lower bound to the
    setting-optimized conditional Fisher information; bound = 4 * inference
    variance of the generator axis ('est-closed-form', default) or
    4 * conditional variance under the generator-axis conditioning
    ('conditional').  Violation (value > bound) rules out local hidden state
    models.
    """
    m = check_density_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("yfg_check expects a two-qubit (4x4) state")
    cond = check_bloch(conditioning)
    gen = check_bloch(generator)

    asm = condition(m, cond)
    value = 0.0
    for br in asm.branches:
        if br.degenerate:
            continue
        value += br.probability * qfi(br.state, gen)

    if variance_mode == "est-closed-form":
        var_y, _ = reid_lhs(m)
        bound = 4.0 * var_y
    elif variance_mode == "conditional":
        bound = 4.0 * conditional_variance(m, AXIS_Y, gen)
    else:
        raise ValueError(f"unknown variance mode {variance_mode!r}")

    return WitnessReport(
        name="YFG",
        value=value,
        bound=bound,
        sigma_value=sigma_value,
        sigma_bound=sigma_bound,
        violated=value > bound,
    )
