"""Alice-conditioned ensembles of Bob's states and conditional-variance algebra.

Conditioning a shared two-qubit state on a projective measurement along
Alice's Bloch vector k produces the assemblage: outcome probabilities
p(+/-|k) and Bob's conditioned states.  On top of it sit the estimator
variance, the conditional variance, and the two quantities optimized over
Alice's setting: the minimized conditional variance and the maximized
conditional quantum Fisher information.

The optimizers run a coarse pass over a 1000-point Fibonacci sphere followed
by Nelder-Mead refinement in spherical coordinates; their objectives are
evaluated by the fast kernels (closed forms on the state's Pauli profile),
which the test suite pins against the explicit matrix route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .qcore import (
    ID2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    check_bloch,
    check_density_matrix,
    pauli,
    tensor,
    variance,
)

__all__ = [
    "DEGENERATE_PROB",
    "AssemblageBranch",
    "Assemblage",
    "EstimatorSpec",
    "condition",
    "joint_prob",
    "est_variance",
    "reid_lhs",
    "conditional_variance",
    "optimize_variance",
    "optimize_fisher",
    "fibonacci_sphere",
]

DEGENERATE_PROB = 1e-12

GRID_POINTS = 1000
SIMPLEX_EDGE = 0.1
VALUE_SPREAD_TOL = 1e-10
MAX_REFINE_ITER = 500

OUTCOMES = (1, -1)


@dataclass(frozen=True)
class AssemblageBranch:
    outcome: int
    probability: float
    state: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True)
class Assemblage:
    """Outcome-indexed ensemble {p(k), rho_k} for one Alice setting."""

    setting: np.ndarray
    branches: tuple[AssemblageBranch, ...]

    def branch(self, outcome: int) -> AssemblageBranch:
        for br in self.branches:
            if br.outcome == outcome:
                return br
        raise KeyError(f"no branch with outcome {outcome}")

    def reduced_bob(self) -> np.ndarray:
        """Outcome-averaged Bob state (equals the unconditioned reduced state)."""
        return sum(br.probability * br.state for br in self.branches)


@dataclass(frozen=True)
class EstimatorSpec:
    """Rule assigning Bob's predicted outcome from Alice's outcome k.

    Modes: 'conditional-mean' (mean of Bob's observable in the conditioned
    state), 'linear-identity' (predict k itself), or 'custom' with an explicit
    outcome table.
    """

    mode: str = "conditional-mean"
    table: Mapping[int, float] | None = None

    def __post_init__(self):
        if self.mode not in ("conditional-mean", "linear-identity", "custom"):
            raise ValueError(f"unknown estimator mode {self.mode!r}")
        if self.mode == "custom":
            if self.table is None or any(k not in self.table for k in OUTCOMES):
                raise ValueError("custom estimator requires a table for outcomes +1 and -1")


def _projectors(setting) -> tuple[np.ndarray, np.ndarray]:
    op = pauli(setting)
    return 0.5 * (ID2 + op), 0.5 * (ID2 - op)


def condition(rho: np.ndarray, setting) -> Assemblage:
    """Assemblage from measuring Alice's qubit along `setting`.

    Branches with vanishing probability carry the maximally mixed placeholder
    and are flagged degenerate.
    """
    m = check_density_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("condition expects a two-qubit (4x4) state")
    n = check_bloch(setting)
    branches = []
    for outcome, proj in zip(OUTCOMES, _projectors(n)):
        big = np.kron(proj, ID2)
        sub = (big @ m @ big).reshape(2, 2, 2, 2)
        reduced = np.einsum("abac->bc", sub)
        p = float(np.trace(reduced).real)
        if p < DEGENERATE_PROB:
            branches.append(AssemblageBranch(outcome, max(p, 0.0), 0.5 * ID2.copy(), True))
            continue
        state = reduced / p
        state = 0.5 * (state + state.conj().T)
        branches.append(AssemblageBranch(outcome, p, state, False))
    return Assemblage(setting=n, branches=tuple(branches))


def joint_prob(rho: np.ndarray, k_setting, h_setting) -> np.ndarray:
    """2x2 table p(k, h) for joint outcomes (+1, -1) x (+1, -1)."""
    m = check_density_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("joint_prob expects a two-qubit (4x4) state")
    pk = _projectors(k_setting)
    ph = _projectors(h_setting)
    table = np.empty((2, 2))
    for i, pa in enumerate(pk):
        for j, pb in enumerate(ph):
            table[i, j] = max(float(np.trace(np.kron(pa, pb) @ m).real), 0.0)
    return table


def est_variance(rho: np.ndarray, k_setting, h_setting, estimator: EstimatorSpec | None = None) -> float:
    """Mean squared deviation of Bob's outcome from the value predicted from Alice's.

    sum_{k,h} p(k,h) (pred(k) - h)^2 with pred(k) given by the estimator spec.
    """
    est = estimator or EstimatorSpec()
    table = joint_prob(rho, k_setting, h_setting)
    total = 0.0
    for i, k in enumerate(OUTCOMES):
        pk = table[i].sum()
        if pk < DEGENERATE_PROB:
            continue
        if est.mode == "conditional-mean":
            pred = sum(h * table[i, j] for j, h in enumerate(OUTCOMES)) / pk
        elif est.mode == "linear-identity":
            pred = float(k)
        else:
            pred = float(est.table[k])
        total += sum(table[i, j] * (pred - h) ** 2 for j, h in enumerate(OUTCOMES))
    return total


def reid_lhs(rho: np.ndarray) -> tuple[float, float]:
    """Inference variances (1 - <Y_A Y_B>, 1 - <Z_A X_B>) of the Y/X prediction pair."""
    m = check_density_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("reid_lhs expects a two-qubit (4x4) state")
    corr_yy = float(np.trace(m @ tensor(PAULI_Y, PAULI_Y)).real)
    corr_zx = float(np.trace(m @ tensor(PAULI_Z, PAULI_X)).real)
    return 1.0 - corr_yy, 1.0 - corr_zx


def conditional_variance(rho: np.ndarray, k_setting, h_setting) -> float:
    """sum_k p(k) Var(h | rho_k): Bob's variance averaged over Alice's outcomes."""
    asm = condition(rho, k_setting)
    obs = pauli(h_setting)
    total = 0.0
    for br in asm.branches:
        if br.degenerate:
            continue
        total += br.probability * variance(br.state, obs)
    return total


def fibonacci_sphere(n: int = GRID_POINTS) -> np.ndarray:
    """n near-uniform points on the unit sphere (deterministic ordering)."""
    i = np.arange(n)
    z = 1.0 - 2.0 * (i + 0.5) / n
    radius = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    return np.column_stack((radius * np.cos(phi), radius * np.sin(phi), z))


def _to_spherical(v: np.ndarray) -> np.ndarray:
    return np.array([math.acos(min(max(v[2], -1.0), 1.0)), math.atan2(v[1], v[0])])


def _from_spherical(x) -> np.ndarray:
    polar, azimuth = float(x[0]), float(x[1])
    s = math.sin(polar)
    return np.array([s * math.cos(azimuth), s * math.sin(azimuth), math.cos(polar)])


def _optimize(rho: np.ndarray, target, grid_fn, point_fn, sign: float):
    """Shared grid + Nelder-Mead driver; sign=+1 minimizes, sign=-1 maximizes."""
    m = check_density_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("optimizer expects a two-qubit (4x4) state")
    tgt = check_bloch(target)
    a, b, t = _kernels.pauli_profile(m)

    grid = fibonacci_sphere(GRID_POINTS)
    values = sign * grid_fn(a, b, t, grid, tgt)
    best = int(np.argmin(values))
    x0 = _to_spherical(grid[best])

    def objective(x):
        return sign * point_fn(a, b, t, _from_spherical(x), tgt)

    simplex = np.array([x0, x0 + [SIMPLEX_EDGE, 0.0], x0 + [0.0, SIMPLEX_EDGE]])
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "fatol": VALUE_SPREAD_TOL,
            "xatol": 1e-7,
            "maxiter": MAX_REFINE_ITER,
        },
    )
    if res.fun <= values[best]:
        return sign * float(res.fun), _from_spherical(res.x)
    return sign * float(values[best]), grid[best]


def optimize_variance(rho: np.ndarray, h_setting) -> tuple[float, np.ndarray]:
    """Minimum of conditional_variance over Alice's setting; returns (value, argmin)."""
    return _optimize(rho, h_setting, _kernels.cond_var_grid, _kernels.cond_var_point, 1.0)


def optimize_fisher(rho: np.ndarray, generator) -> tuple[float, np.ndarray]:
    """Maximum conditional quantum Fisher information over Alice's setting.

    The branch Fisher information matches witnesses.qfi; returns (value, argmax).
    """
    return _optimize(rho, generator, _kernels.cond_qfi_grid, _kernels.cond_qfi_point, -1.0)
