"""Exact operator algebra for one- and two-qubit polarization states.

Conventions used throughout the package:

* basis index 0 is horizontal |H>, index 1 is vertical |V>;
* two-qubit kets are ordered Alice (x) Bob with Alice as the slow index,
  i.e. (HH, HV, VH, VV);
* a projective qubit measurement is specified by a unit Bloch vector n,
  realizing the observable n . (X, Y, Z) with outcomes +1 / -1.

All functions are pure and never mutate their arguments.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ID2",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "AXIS_X",
    "AXIS_Y",
    "AXIS_Z",
    "pauli",
    "tensor",
    "partial_trace",
    "expectation",
    "variance",
    "evolve",
    "pure_density",
    "check_density_matrix",
    "check_bloch",
    "purity",
    "trace_distance",
    "fidelity_with_pure",
    "random_bloch",
    "random_pure",
    "random_density",
]

ID2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

AXIS_X = np.array([1.0, 0.0, 0.0])
AXIS_Y = np.array([0.0, 1.0, 0.0])
AXIS_Z = np.array([0.0, 0.0, 1.0])

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10
BLOCH_NORM_TOL = 1e-12


def check_bloch(setting) -> np.ndarray:
    """Validate a measurement setting: real 3-vector of unit Euclidean norm."""
    n = np.asarray(setting, dtype=float).reshape(-1)
    if n.shape != (3,):
        raise ValueError(f"measurement setting must be a 3-vector, got shape {n.shape}")
    if not np.all(np.isfinite(n)):
        raise ValueError("measurement setting contains non-finite components")
    norm = float(np.linalg.norm(n))
    if abs(norm - 1.0) > BLOCH_NORM_TOL:
        raise ValueError(f"measurement setting must have unit norm, got |n| = {norm!r}")
    return n


def pauli(setting) -> np.ndarray:
    """Observable n . sigma for a unit Bloch vector n (Hermitian, traceless, squares to I)."""
    n = check_bloch(setting)
    return n[0] * PAULI_X + n[1] * PAULI_Y + n[2] * PAULI_Z


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product a (x) b with Alice as the left (slow) factor."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise ValueError(f"tensor expects 2x2 factors, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def check_density_matrix(rho, name: str = "rho") -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return a complex copy."""
    m = np.asarray(rho, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
        raise ValueError(f"{name} must be a 2x2 or 4x4 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
        raise ValueError(f"{name} is not Hermitian within {HERMITICITY_TOL}")
    tr = complex(np.trace(m))
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"{name} must have unit trace, got {tr!r}")
    lo = float(np.min(np.linalg.eigvalsh(m)))
    if lo < EIGENVALUE_FLOOR:
        raise ValueError(f"{name} has negative eigenvalue {lo!r}")
    return m


def pure_density(amplitudes) -> np.ndarray:
    """Density matrix |psi><psi| of a normalized amplitude vector (length 2 or 4)."""
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if psi.shape[0] not in (2, 4):
        raise ValueError(f"amplitude vector must have length 2 or 4, got {psi.shape[0]}")
    nrm = float(np.vdot(psi, psi).real)
    if abs(nrm - 1.0) > 1e-12:
        raise ValueError(f"amplitude vector must be normalized, got |psi|^2 = {nrm!r}")
    return np.outer(psi, psi.conj())


def partial_trace(rho: np.ndarray, keep: str) -> np.ndarray:
    """Reduced one-qubit state of a two-qubit state; keep is 'alice' or 'bob'."""
    m = check_density_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("partial_trace expects a two-qubit (4x4) state")
    r = m.reshape(2, 2, 2, 2)
    if keep == "bob":
        return np.einsum("abac->bc", r)
    if keep == "alice":
        return np.einsum("abcb->ac", r)
    raise ValueError(f"keep must be 'alice' or 'bob', got {keep!r}")


def _check_observable(rho: np.ndarray, obs) -> np.ndarray:
    o = np.asarray(obs, dtype=complex)
    if o.shape != rho.shape:
        raise ValueError(f"observable shape {o.shape} does not match state shape {rho.shape}")
    if np.max(np.abs(o - o.conj().T)) > 1e-10:
        raise ValueError("observable is not Hermitian")
    return o


def expectation(rho: np.ndarray, obs) -> float:
    """Tr(rho . obs) for a Hermitian observable; tiny imaginary residue discarded."""
    m = check_density_matrix(rho)
    o = _check_observable(m, obs)
    val = complex(np.trace(m @ o))
    return float(val.real)


def variance(rho: np.ndarray, obs) -> float:
    """<obs^2> - <obs>^2, clamped to be nonnegative."""
    m = check_density_matrix(rho)
    o = _check_observable(m, obs)
    mean = float(np.trace(m @ o).real)
    second = float(np.trace(m @ o @ o).real)
    return max(second - mean * mean, 0.0)


def evolve(rho: np.ndarray, generator, theta: float) -> np.ndarray:
    """Conjugate rho by U = exp(+i theta G) for a Hermitian generator with G^2 = I.

    The sign convention is active rotation by exp(+i theta G); the exponential
    is evaluated exactly as cos(theta) I + i sin(theta) G.
    """
    m = check_density_matrix(rho)
    g = _check_observable(m, generator)
    eye = np.eye(m.shape[0], dtype=complex)
    if np.max(np.abs(g @ g - eye)) > 1e-10:
        raise ValueError("generator must square to the identity")
    u = np.cos(theta) * eye + 1j * np.sin(theta) * g
    return u @ m @ u.conj().T


def purity(rho: np.ndarray) -> float:
    """Tr(rho^2)."""
    m = np.asarray(rho, dtype=complex)
    return float(np.trace(m @ m).real)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """(1/2) ||a - b||_1 for Hermitian matrices."""
    d = np.asarray(a, dtype=complex) - np.asarray(b, dtype=complex)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(d))))


def fidelity_with_pure(rho: np.ndarray, psi) -> float:
    """<psi| rho |psi> for a normalized pure target."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    m = np.asarray(rho, dtype=complex)
    return float(np.vdot(v, m @ v).real)


def random_bloch(rng: np.random.Generator) -> np.ndarray:
    """Uniformly random unit Bloch vector."""
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_pure(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random pure-state amplitude vector."""
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Random full- or fixed-rank density matrix (Ginibre construction)."""
    k = rank or dim
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return 0.5 * (m + m.conj().T)
