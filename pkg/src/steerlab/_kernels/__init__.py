"""Hot numerical kernels for the Bloch-sphere optimizers.

The objective functions minimized/maximized over Alice's measurement setting
reduce to a handful of dot products once the two-qubit state is expressed by
its Pauli profile (Alice Bloch vector a, Bob Bloch vector b, correlation
matrix T).  Those reductions live here in two interchangeable backends:

* ``_core``  - Cython extension (built at install time when a compiler is
  available);
* ``_pure``  - numpy/math fallback with identical semantics.

The compiled backend is selected at import when present; set the environment
variable ``STEERLAB_PURE_PYTHON=1`` to force the fallback.  ``use_backend``
switches at runtime (used by the equivalence tests and the benchmark).
"""

from __future__ import annotations

import os

import numpy as np

from . import _pure

__all__ = [
    "DEGENERATE_EPS",
    "available_backends",
    "backend_name",
    "use_backend",
    "pauli_profile",
    "cond_var_grid",
    "cond_qfi_grid",
    "cond_var_point",
    "cond_qfi_point",
]

# Alice branches with probability below this contribute zero to conditional sums.
DEGENERATE_EPS = 1e-12

_BACKENDS = {"python": _pure}

if not os.environ.get("STEERLAB_PURE_PYTHON"):
    try:
        from . import _core as _compiled

        _BACKENDS["compiled"] = _compiled
    except ImportError:
        pass

_active = _BACKENDS.get("compiled", _pure)


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def backend_name() -> str:
    return next(name for name, mod in _BACKENDS.items() if mod is _active)


def use_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; available: {available_backends()}")
    _active = _BACKENDS[name]


_PAULIS = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def pauli_profile(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pauli expansion of a two-qubit state.

    Returns (a, b, T) with a_m = <sigma_m (x) I>, b_n = <I (x) sigma_n> and
    T_mn = <sigma_m (x) sigma_n>; all real for a Hermitian state.
    """
    r = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    a = np.einsum("mca,abcb->m", _PAULIS, r).real
    b = np.einsum("ndb,abad->n", _PAULIS, r).real
    t = np.einsum("mca,ndb,abcd->mn", _PAULIS, _PAULIS, r).real
    return (
        np.ascontiguousarray(a),
        np.ascontiguousarray(b),
        np.ascontiguousarray(t),
    )


def _clean_vec(v) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(v, dtype=float).reshape(3))


def cond_var_grid(a, b, t, settings, h) -> np.ndarray:
    """Conditional variance of h on Bob, for each Alice setting in `settings` (N x 3)."""
    ks = np.ascontiguousarray(np.asarray(settings, dtype=float).reshape(-1, 3))
    return _active.cond_var_grid(_clean_vec(a), _clean_vec(b), np.ascontiguousarray(t, dtype=float), ks, _clean_vec(h))


def cond_qfi_grid(a, b, t, settings, g) -> np.ndarray:
    """Conditional Fisher information for generator g, for each Alice setting."""
    ks = np.ascontiguousarray(np.asarray(settings, dtype=float).reshape(-1, 3))
    return _active.cond_qfi_grid(_clean_vec(a), _clean_vec(b), np.ascontiguousarray(t, dtype=float), ks, _clean_vec(g))


def cond_var_point(a, b, t, k, h) -> float:
    return _active.cond_var_point(_clean_vec(a), _clean_vec(b), np.ascontiguousarray(t, dtype=float), _clean_vec(k), _clean_vec(h))


def cond_qfi_point(a, b, t, k, g) -> float:
    return _active.cond_qfi_point(_clean_vec(a), _clean_vec(b), np.ascontiguousarray(t, dtype=float), _clean_vec(k), _clean_vec(g))
