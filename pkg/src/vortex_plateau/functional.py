"""Discrete free-boundary functionals on fitted meshes.

Both functionals are evaluated in the subgraph form: graph area over the
subgraph, L1 mismatch with the datum on the Dirichlet edges, the trace of
``psi`` along the free boundary, and the half-circle walls above ``h`` at the
lateral edges.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .discretization import (
    FittedMesh,
    GridFunction,
    lift_area,
    reflect_mesh,
    reflect_values,
)
from .geometry import ConvexProfile, HalfProfile, eval_phi, phi_antiderivative


@dataclass(frozen=True)
class FunctionalBreakdown:
    area_term: float
    dirichlet_mismatch: float
    graph_trace: float
    lh_term: float
    total: float

    @classmethod
    def from_terms(cls, area, mismatch, trace, wall) -> "FunctionalBreakdown":
        return cls(float(area), float(mismatch), float(trace), float(wall), float(area + mismatch + trace + wall))

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


class ProfileMismatchError(ValueError):
    pass


def wall_integral(h0: float) -> float:
    """Area of the half-disc wall ``int_{h0}^{1} sqrt(1 - s^2) ds``."""
    return float(phi_antiderivative(1.0) - phi_antiderivative(h0))


def _trapezoid(y: np.ndarray, x: np.ndarray) -> float:
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def _column_mismatch(mesh: FittedMesh, psi: np.ndarray, i: int) -> float:
    g = mesh.grid(psi)[i]
    w2 = mesh.grid(mesh.vertices[:, 1])[i]
    return _trapezoid(np.abs(g - eval_phi(w2)), w2)


def _bottom_mismatch(mesh: FittedMesh, psi: np.ndarray) -> float:
    return _trapezoid(np.abs(mesh.grid(psi)[:, 0]), mesh.columns)


def _graph_trace(mesh: FittedMesh, psi: np.ndarray) -> float:
    top = np.abs(mesh.grid(psi)[:, -1])
    seg = np.hypot(np.diff(mesh.columns), np.diff(mesh.heights))
    return float(np.sum(0.5 * (top[1:] + top[:-1]) * seg))


def _values(psi) -> np.ndarray:
    return psi.values if isinstance(psi, GridFunction) else np.asarray(psi, dtype=float)


def _check(h, mesh: FittedMesh) -> None:
    if not mesh.compatible_with(h):
        raise ProfileMismatchError("mesh is not fitted to this profile")


def eval_F2l(h: ConvexProfile, psi=None, mesh: FittedMesh | None = None) -> FunctionalBreakdown:
    """Doubled-rectangle functional with its four-term breakdown.

    The degenerate profile ``h = -1`` needs neither ``psi`` nor a mesh and
    returns exactly ``pi`` (the two half-disc walls).
    """
    if h.is_degenerate():
        return FunctionalBreakdown.from_terms(0.0, 0.0, 0.0, 2.0 * wall_integral(-1.0))
    if mesh is None:
        if not isinstance(psi, GridFunction):
            raise ProfileMismatchError("a mesh is required for a non-degenerate profile")
        mesh = psi.mesh
    _check(h, mesh)
    v = _values(psi)
    if v.shape != (mesh.n_vertices,):
        raise ProfileMismatchError("grid function does not live on this mesh")
    area = lift_area(mesh, v)
    mismatch = _column_mismatch(mesh, v, 0) + _column_mismatch(mesh, v, mesh.n1) + _bottom_mismatch(mesh, v)
    trace = _graph_trace(mesh, v)
    wall = wall_integral(mesh.heights[0]) + wall_integral(mesh.heights[-1])
    return FunctionalBreakdown.from_terms(area, mismatch, trace, wall)


def eval_Fl(h: HalfProfile, psi=None) -> FunctionalBreakdown:
    """Half-rectangle functional; the edge ``w1 = l`` is free."""
    if np.all(h.values <= -1.0):
        return FunctionalBreakdown.from_terms(0.0, 0.0, 0.0, wall_integral(-1.0))
    if not isinstance(psi, GridFunction):
        raise ProfileMismatchError("eval_Fl needs a grid function on a fitted half mesh")
    mesh = psi.mesh
    _check(h, mesh)
    v = psi.values
    area = lift_area(mesh, v)
    mismatch = _column_mismatch(mesh, v, 0) + _bottom_mismatch(mesh, v)
    trace = _graph_trace(mesh, v)
    wall = wall_integral(mesh.heights[0])
    return FunctionalBreakdown.from_terms(area, mismatch, trace, wall)


def reflect_pair(h: HalfProfile, psi: GridFunction) -> tuple[ConvexProfile, GridFunction]:
    """Even extension of a half pair to the doubled rectangle."""
    mesh2 = reflect_mesh(psi.mesh)
    return h.doubled(), GridFunction(mesh2, reflect_values(psi.mesh, psi.values))


def check_doubling(h: HalfProfile, psi: GridFunction | None = None) -> float:
    """``|2 F_l(h, psi) - F_2l(reflection)|``; zero up to rounding."""
    if np.all(h.values <= -1.0):
        h2 = ConvexProfile(h.l, -np.ones(2 * h.n + 1))
        return abs(2.0 * eval_Fl(h).total - eval_F2l(h2).total)
    if psi is None:
        raise ProfileMismatchError("a non-degenerate profile needs a grid function")
    h2, psi2 = reflect_pair(h, psi)
    return abs(2.0 * eval_Fl(h, psi).total - eval_F2l(h2, psi2, psi2.mesh).total)
