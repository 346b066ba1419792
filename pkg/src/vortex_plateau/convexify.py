"""Discrete versions of the profile modifications that make ``h`` convex and nonincreasing.

Each transform lowers ``h`` on some columns and restricts ``psi`` to the new,
smaller subgraph.  Along a column the fitted mesh is piecewise linear in
``w2``, so the restriction is exact column by column.
"""

from __future__ import annotations

import numpy as np

from .discretization import FittedMesh, GridFunction, stretch
from .geometry import HalfProfile, second_differences


def _restrict(h: HalfProfile, psi: GridFunction, new_values: np.ndarray) -> tuple[HalfProfile, GridFunction]:
    old = psi.mesh
    if old.n1 != h.n:
        raise ValueError("grid function must live on a mesh with one column per profile node")
    h_new = HalfProfile(h.l, new_values)
    mesh = FittedMesh(old.width, old.n1, old.n2, new_values.copy(), old.s.copy(), old.anti.copy())
    g_old = old.grid(psi.values)
    g_new = g_old.copy()
    w2_old = old.grid(old.vertices[:, 1])
    for i in np.flatnonzero(new_values != h.values):
        w2 = stretch(mesh.s, new_values[i])
        g_new[i] = np.interp(w2, w2_old[i], g_old[i])
    return h_new, GridFunction(mesh, g_new.ravel())


def truncate_profile(h: HalfProfile, psi: GridFunction, t0: int) -> tuple[HalfProfile, GridFunction]:
    """Cap ``h`` at its value at node ``t0`` to the right of ``t0``."""
    if not 0 < t0 < h.n:
        raise IndexError(f"cut node {t0} is not interior (n = {h.n})")
    v = h.values.copy()
    v[t0:] = np.minimum(v[t0:], h.values[t0])
    return _restrict(h, psi, v)


def chord_cut(h: HalfProfile, psi: GridFunction, t1: int, t2: int) -> tuple[HalfProfile, GridFunction]:
    """Replace ``h`` by ``min(h, chord)`` between nodes ``t1 < t2``."""
    if not t1 < t2:
        raise ValueError("chord needs t1 < t2")
    if t1 < 0 or t2 > h.n:
        raise IndexError("chord end outside the profile")
    v = h.values.copy()
    k = np.arange(t1, t2 + 1)
    chord = h.values[t1] + (h.values[t2] - h.values[t1]) * (k - t1) / (t2 - t1)
    v[t1 : t2 + 1] = np.minimum(v[t1 : t2 + 1], chord)
    return _restrict(h, psi, v)


def convexify(h: HalfProfile, psi: GridFunction, max_sweeps: int = 1000) -> tuple[HalfProfile, GridFunction]:
    """Apply chord cuts over all node pairs until nothing changes."""
    for _ in range(max_sweeps):
        changed = False
        for t1 in range(h.n - 1):
            for t2 in range(t1 + 2, h.n + 1):
                k = np.arange(t1, t2 + 1)
                chord = h.values[t1] + (h.values[t2] - h.values[t1]) * (k - t1) / (t2 - t1)
                if np.any(h.values[t1 : t2 + 1] > chord + 1e-14):
                    h, psi = chord_cut(h, psi, t1, t2)
                    changed = True
        if not changed or np.min(second_differences(h.values), initial=0.0) >= -1e-12:
            return h, psi
    raise RuntimeError("convexification did not reach a fixed point")
