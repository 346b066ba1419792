"""Boundary-fitted triangulations of the subgraph and the lifted graph area.

The mesh is a terrain-following grid: column ``i`` sits at ``w1 = t_i`` and
row ``j`` at ``w2 = -1 + (s_j + 1) (h(t_i) + 1) / 2`` for a reference row
coordinate ``s_j`` in ``[-1, 1]``.  Vertex ``(i, j)`` has index
``i * (n2 + 1) + j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .geometry import ConvexProfile, HalfProfile

INTERIOR, LEFT, RIGHT, BOTTOM, GRAPH = 0, 1, 2, 3, 4
TAG_NAMES = {
    INTERIOR: "interior",
    LEFT: "lateral-left",
    RIGHT: "lateral-right",
    BOTTOM: "bottom",
    GRAPH: "graph",
}
DEGENERACY_GAP = 1e-12


class DegenerateDomainError(ValueError):
    """Raised when the profile touches ``w2 = -1`` and the subgraph pinches."""


def reference_rows(n2: int, spacing: str = "cosine") -> np.ndarray:
    """Reference coordinates ``s_0 = -1 < ... < s_n2 = 1``.

    ``cosine`` clusters rows at the bottom edge and at the free boundary,
    where the minimal graph has square-root behaviour.
    """
    j = np.arange(n2 + 1)
    if spacing == "cosine":
        s = -np.cos(np.pi * j / n2)
    elif spacing == "uniform":
        s = -1.0 + 2.0 * j / n2
    else:
        raise ValueError(f"unknown row spacing {spacing!r}")
    # exact antisymmetry s_j = -s_{n2-j}
    s = 0.5 * (s - s[::-1])
    s[0], s[-1] = -1.0, 1.0
    return s


def stretch(s, h):
    """Vertical map of the reference rectangle onto the subgraph."""
    return -1.0 + (np.asarray(s) + 1.0) * (np.asarray(h) + 1.0) / 2.0


def _resample(h, n1: int) -> np.ndarray:
    v = h.values
    if v.size == n1 + 1:
        return v.copy()
    x = np.arange(n1 + 1) * (h.n / n1)
    out = np.interp(x, np.arange(h.n + 1), v)
    if isinstance(h, ConvexProfile):
        out = 0.5 * (out + out[::-1])
    return out


@dataclass
class FittedMesh:
    width: float
    n1: int
    n2: int
    heights: np.ndarray
    s: np.ndarray
    anti: np.ndarray  # per cell column: True -> diagonal (i+1, j)-(i, j+1)
    vertices: np.ndarray = field(init=False)
    triangles: np.ndarray = field(init=False)
    tags: np.ndarray = field(init=False)

    def __post_init__(self):
        n1, n2 = self.n1, self.n2
        t = np.arange(n1 + 1) * (self.width / n1)
        w2 = stretch(self.s[None, :], self.heights[:, None])
        w1 = np.broadcast_to(t[:, None], w2.shape)
        self.vertices = np.column_stack([w1.ravel(), w2.ravel()])

        ii, jj = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
        a = ii * (n2 + 1) + jj
        b = a + (n2 + 1)
        c = b + 1
        d = a + 1
        anti = np.broadcast_to(self.anti[:, None], a.shape)
        t1 = np.where(anti[..., None], np.stack([a, b, d], -1), np.stack([a, b, c], -1))
        t2 = np.where(anti[..., None], np.stack([b, c, d], -1), np.stack([a, c, d], -1))
        self.triangles = np.concatenate([t1.reshape(-1, 3), t2.reshape(-1, 3)])

        tags = np.zeros((n1 + 1, n2 + 1), dtype=np.int8)
        tags[:, 0] = BOTTOM
        tags[:, -1] = GRAPH
        tags[0, :] = LEFT
        tags[-1, :] = RIGHT
        self.tags = tags.ravel()

    @property
    def n_vertices(self) -> int:
        return (self.n1 + 1) * (self.n2 + 1)

    @property
    def columns(self) -> np.ndarray:
        return np.arange(self.n1 + 1) * (self.width / self.n1)

    def index(self, i, j):
        return np.asarray(i) * (self.n2 + 1) + np.asarray(j)

    def grid(self, values: np.ndarray) -> np.ndarray:
        """View nodal values as an ``(n1 + 1, n2 + 1)`` array."""
        return np.asarray(values).reshape(self.n1 + 1, self.n2 + 1)

    def mesh_size(self) -> float:
        e = self.vertices[self.triangles[:, [1, 2, 0]]] - self.vertices[self.triangles]
        return float(np.sqrt(np.max(np.sum(e * e, axis=-1))))

    def planar_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def mirror(self) -> np.ndarray | None:
        """Vertex permutation for ``w1 -> width - w1`` when the mesh is symmetric."""
        h = self.heights
        if not (np.array_equal(h, h[::-1]) and np.array_equal(self.anti, ~self.anti[::-1])):
            return None
        g = np.arange(self.n_vertices).reshape(self.n1 + 1, self.n2 + 1)
        return g[::-1, :].ravel()

    def dirichlet_mask(self) -> np.ndarray:
        return self.tags != INTERIOR

    def dirichlet_values(self) -> np.ndarray:
        """Boundary data: the half circle on lateral edges, zero elsewhere."""
        from .geometry import eval_phi

        vals = np.zeros(self.n_vertices)
        lateral = (self.tags == LEFT) | (self.tags == RIGHT)
        vals[lateral] = eval_phi(self.vertices[lateral, 1])
        return vals

    def compatible_with(self, h) -> bool:
        return np.isclose(self.width, h.width) and np.array_equal(_resample(h, self.n1), self.heights)


@dataclass
class GridFunction:
    mesh: FittedMesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_vertices,):
            raise ValueError(
                f"grid function has {self.values.size} values for {self.mesh.n_vertices} vertices"
            )

    def in_range(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.values >= -tol) and np.all(self.values <= 1.0 + tol))


def build_fitted_mesh(h, n1: int | None = None, n2: int = 32, spacing: str = "cosine") -> FittedMesh:
    """Triangulate the subgraph of ``h`` with ``2 n1 n2`` triangles.

    Diagonals of a :class:`ConvexProfile` mesh flip at the midline so the
    triangulation is mirror-symmetric; a :class:`HalfProfile` mesh uses the
    left-half pattern throughout, so its reflection is the symmetric mesh.
    """
    n1 = h.n if n1 is None else int(n1)
    if n1 < 1 or n2 < 1:
        raise ValueError("mesh needs n1, n2 >= 1")
    heights = _resample(h, n1)
    if np.min(heights) <= -1.0 + DEGENERACY_GAP:
        raise DegenerateDomainError("profile reaches w2 = -1; the subgraph degenerates")
    if isinstance(h, HalfProfile):
        anti = np.zeros(n1, dtype=bool)
    else:
        centers = np.arange(n1) + 0.5
        anti = centers > n1 / 2.0
    return FittedMesh(float(h.width), n1, n2, heights, reference_rows(n2, spacing), anti)


def reflect_mesh(mesh: FittedMesh) -> FittedMesh:
    """Even reflection about the right edge; the result has ``2 n1`` columns."""
    heights = np.concatenate([mesh.heights, mesh.heights[-2::-1]])
    anti = np.concatenate([mesh.anti, ~mesh.anti[::-1]])
    return FittedMesh(2.0 * mesh.width, 2 * mesh.n1, mesh.n2, heights, mesh.s.copy(), anti)


def reflect_values(mesh: FittedMesh, values: np.ndarray) -> np.ndarray:
    g = mesh.grid(values)
    return np.concatenate([g, g[-2::-1]]).ravel()


# ---------------------------------------------------------------- area kernels


def _triangle_geometry(vertices: np.ndarray, triangles: np.ndarray):
    p = vertices[triangles]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    cz = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    # (cx, cy) = G @ (psi0, psi1, psi2)
    g = np.empty((len(triangles), 2, 3))
    g[:, 0, 1] = -e2[:, 1]
    g[:, 0, 2] = e1[:, 1]
    g[:, 1, 1] = e2[:, 0]
    g[:, 1, 2] = -e1[:, 0]
    g[:, :, 0] = -(g[:, :, 1] + g[:, :, 2])
    return cz, g


class AreaOperator:
    """Lifted-triangle area as a function of nodal values on a fixed mesh."""

    def __init__(self, mesh: FittedMesh):
        self.mesh = mesh
        self.tri = mesh.triangles
        self.cz, self.g = _triangle_geometry(mesh.vertices, mesh.triangles)
        n = mesh.n_vertices
        rows = np.repeat(self.tri, 3, axis=1).ravel()
        cols = np.tile(self.tri, (1, 3)).ravel()
        self._pattern = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
        self._pattern.sum_duplicates()
        self._rows, self._cols = rows, cols

    def _cross(self, psi: np.ndarray):
        c = np.einsum("tkl,tl->tk", self.g, psi[self.tri])
        q = np.sqrt(self.cz**2 + np.sum(c * c, axis=1))
        return c, q

    def triangle_areas(self, psi: np.ndarray) -> np.ndarray:
        return 0.5 * self._cross(psi)[1]

    def value(self, psi: np.ndarray) -> float:
        return float(np.sum(self.triangle_areas(psi)))

    def gradient(self, psi: np.ndarray) -> np.ndarray:
        c, q = self._cross(psi)
        local = np.einsum("tkl,tk->tl", self.g, c) / (2.0 * q[:, None])
        return np.bincount(self.tri.ravel(), local.ravel(), minlength=self.mesh.n_vertices)

    def hessian(self, psi: np.ndarray) -> sp.csr_matrix:
        c, q = self._cross(psi)
        u = c / q[:, None]
        m = np.eye(2)[None] - u[:, :, None] * u[:, None, :]
        local = np.einsum("tki,tkl,tlj->tij", self.g, m, self.g) / (2.0 * q[:, None, None])
        n = self.mesh.n_vertices
        return sp.csr_matrix((local.ravel(), (self._rows, self._cols)), shape=(n, n))

    def stiffness(self) -> sp.csr_matrix:
        """P1 Laplacian stiffness (the Hessian at a flat lift)."""
        return self.hessian(np.zeros(self.mesh.n_vertices))


def lift_area(mesh: FittedMesh, psi: GridFunction | np.ndarray) -> float:
    """Sum of the 3-D areas of the triangles lifted by ``(w1, w2) -> (w1, w2, psi)``."""
    values = psi.values if isinstance(psi, GridFunction) else np.asarray(psi, dtype=float)
    if values.shape != (mesh.n_vertices,):
        raise ValueError("grid function size does not match the mesh")
    return AreaOperator(mesh).value(values)


def area_position_gradient(vertices: np.ndarray, triangles: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Derivative of the lifted area with respect to the planar vertex positions."""
    p = np.column_stack([vertices, psi])[triangles]
    n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    n /= np.linalg.norm(n, axis=1)[:, None]
    out = np.zeros((len(vertices), 2))
    for k in range(3):
        edge = p[:, (k + 2) % 3] - p[:, (k + 1) % 3]
        gk = 0.5 * np.cross(n, edge)
        np.add.at(out, triangles[:, k], gk[:, :2])
    return out


def export_obj(path, mesh: FittedMesh, psi: GridFunction | np.ndarray) -> None:
    """Write vertices ``(w1, w2, psi)`` and 1-based triangle faces."""
    values = psi.values if isinstance(psi, GridFunction) else np.asarray(psi)
    lines = [f"v {x:.12g} {y:.12g} {z:.12g}" for (x, y), z in zip(mesh.vertices, values)]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles]
    Path(path).write_text("\n".join(lines) + "\n")
