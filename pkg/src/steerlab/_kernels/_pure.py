"""Pure-Python/numpy kernel backend.

Semantics shared with the compiled backend:

* Alice projects with Pi(+/-) = (I +/- k.sigma)/2, so the branch
  probabilities are p(+/-) = (1 +/- a.k)/2 and the unnormalized Bob Bloch
  vectors are m(+/-) = (b +/- T^t k)/2 (i.e. p * r_branch).
* branch variance of a unit-Bloch observable h:   p - (h.m)^2 / p
* branch Fisher information for generator g:      4 |g x m|^2 / p
  (the qubit quantum Fisher information is 4 |g x r|^2).
* branches with p below ``DEGENERATE_EPS`` contribute zero.
"""

from __future__ import annotations

import numpy as np

_EPS = 1e-12


def cond_var_grid(a, b, t, ks, h):
    ak = ks @ a
    tk = ks @ t  # row m of T contracts with k_m: (T^t k)_n
    p = 0.5 * np.stack((1.0 + ak, 1.0 - ak))
    m = 0.5 * np.stack((b + tk, b - tk))
    hm = m @ h
    safe = np.where(p > _EPS, p, 1.0)
    term = np.where(p > _EPS, p - hm * hm / safe, 0.0)
    return np.maximum(term, 0.0).sum(axis=0)


def cond_qfi_grid(a, b, t, ks, g):
    ak = ks @ a
    tk = ks @ t
    p = 0.5 * np.stack((1.0 + ak, 1.0 - ak))
    m = 0.5 * np.stack((b + tk, b - tk))
    cross = np.cross(np.broadcast_to(g, m.shape), m)
    num = 4.0 * np.einsum("sij,sij->si", cross, cross)
    safe = np.where(p > _EPS, p, 1.0)
    return np.where(p > _EPS, num / safe, 0.0).sum(axis=0)


def _branches(a, b, t, k):
    ak = a[0] * k[0] + a[1] * k[1] + a[2] * k[2]
    tk = (
        t[0, 0] * k[0] + t[1, 0] * k[1] + t[2, 0] * k[2],
        t[0, 1] * k[0] + t[1, 1] * k[1] + t[2, 1] * k[2],
        t[0, 2] * k[0] + t[1, 2] * k[1] + t[2, 2] * k[2],
    )
    out = []
    for sign in (1.0, -1.0):
        p = 0.5 * (1.0 + sign * ak)
        m = (
            0.5 * (b[0] + sign * tk[0]),
            0.5 * (b[1] + sign * tk[1]),
            0.5 * (b[2] + sign * tk[2]),
        )
        out.append((p, m))
    return out


def cond_var_point(a, b, t, k, h):
    total = 0.0
    for p, m in _branches(a, b, t, k):
        if p <= _EPS:
            continue
        hm = h[0] * m[0] + h[1] * m[1] + h[2] * m[2]
        total += max(p - hm * hm / p, 0.0)
    return total


def cond_qfi_point(a, b, t, k, g):
    total = 0.0
    for p, m in _branches(a, b, t, k):
        if p <= _EPS:
            continue
        cx = g[1] * m[2] - g[2] * m[1]
        cy = g[2] * m[0] - g[0] * m[2]
        cz = g[0] * m[1] - g[1] * m[0]
        total += 4.0 * (cx * cx + cy * cy + cz * cz) / p
    return total
