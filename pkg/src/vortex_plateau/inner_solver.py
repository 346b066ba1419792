"""Minimal graphs over a fitted mesh with Dirichlet data on every boundary row.

For a fixed profile the discrete area is strictly convex in the interior
nodal values, so damped Newton with a backtracking line search converges to
the unique discrete minimal graph.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse.linalg as spla

from .discretization import AreaOperator, FittedMesh, GridFunction

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 200


class InnerSolverError(RuntimeError):
    def __init__(self, message: str, residual: float, values: np.ndarray | None = None):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual
        self.values = values


@dataclass
class InnerStats:
    iterations: int = 0
    residual: float = np.inf
    objective: float = np.nan
    newton_steps: int = 0
    gradient_steps: int = 0
    history: list[tuple[int, float, float]] = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "objective", "residual"])
            writer.writerows(self.history)


def harmonic_extension(mesh: FittedMesh, boundary: np.ndarray, op: AreaOperator | None = None) -> np.ndarray:
    op = op or AreaOperator(mesh)
    k = op.stiffness().tocsr()
    free = ~mesh.dirichlet_mask()
    out = boundary.astype(float).copy()
    out[free] = 0.0
    if free.any():
        rhs = -(k[free][:, ~free] @ boundary[~free])
        out[free] = spla.spsolve(k[free][:, free].tocsc(), rhs)
    return out


def _symmetrizer(mesh: FittedMesh, boundary: np.ndarray):
    mirror = mesh.mirror
    if mirror is None or not np.array_equal(boundary, boundary[mirror]):
        return lambda v: v
    # a + b == b + a in IEEE arithmetic, so the average is exactly symmetric
    return lambda v: 0.5 * (v + v[mirror])


def minimize_graph_area(
    mesh: FittedMesh,
    boundary: np.ndarray | None = None,
    initial: np.ndarray | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    op: AreaOperator | None = None,
) -> tuple[np.ndarray, InnerStats]:
    """Return the nodal values of the discrete minimal graph and solver statistics."""
    op = op or AreaOperator(mesh)
    if np.any(mesh.planar_areas() <= 0.0):
        raise InnerSolverError("mesh has non-positive triangles", np.inf)
    boundary = mesh.dirichlet_values() if boundary is None else np.asarray(boundary, dtype=float)
    fixed = mesh.dirichlet_mask()
    free = ~fixed
    sym = _symmetrizer(mesh, boundary)

    if initial is None:
        psi = harmonic_extension(mesh, boundary, op)
    else:
        psi = np.asarray(initial, dtype=float).copy()
        psi[fixed] = boundary[fixed]
    psi = sym(psi)

    stats = InnerStats()
    energy = op.value(psi)
    grad = op.gradient(psi)
    resid = float(np.max(np.abs(grad[free]), initial=0.0))
    stats.history.append((0, energy, resid))
    for it in range(1, max_iter + 1):
        if resid <= tol:
            break
        g = grad[free]
        try:
            hess = op.hessian(psi)[free][:, free].tocsc()
            step = spla.spsolve(hess, -g)
            newton = bool(np.all(np.isfinite(step)) and g @ step < 0.0)
        except (RuntimeError, ValueError):
            newton = False
        if not newton:
            diag = np.abs(op.stiffness().diagonal()[free])
            step = -g / np.maximum(diag, 1e-300)
        slope = float(g @ step)

        alpha, accepted = 1.0, False
        for _ in range(60):
            trial = psi.copy()
            trial[free] += alpha * step
            trial = sym(trial)
            e_trial = op.value(trial)
            if e_trial <= energy + 1e-4 * alpha * slope:
                accepted = True
            elif e_trial - energy <= 1e-14 * (1.0 + abs(energy)):
                # below rounding of the objective: accept only if the residual drops
                g_trial = op.gradient(trial)
                accepted = np.max(np.abs(g_trial[free])) < resid
            if accepted:
                break
            alpha *= 0.5
        if not accepted:
            stats.iterations = it
            stats.residual = resid
            raise InnerSolverError("line search failed", resid, psi)
        if newton:
            stats.newton_steps += 1
        else:
            stats.gradient_steps += 1
        psi, energy = trial, e_trial
        grad = op.gradient(psi)
        resid = float(np.max(np.abs(grad[free]), initial=0.0))
        stats.history.append((it, energy, resid))
        log.debug("newton %d: area %.15f residual %.3e step %.3g", it, energy, resid, alpha)
    stats.iterations = len(stats.history) - 1
    stats.residual = resid
    stats.objective = energy
    if resid > tol:
        raise InnerSolverError(f"no convergence in {max_iter} iterations", resid, psi)
    return psi, stats


def solve_min_graph(
    mesh: FittedMesh,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    boundary: np.ndarray | None = None,
    initial: np.ndarray | None = None,
) -> GridFunction:
    """Discrete minimal graph: half circles on lateral rows, zero on bottom and graph rows."""
    values, _ = minimize_graph_area(mesh, boundary, initial, tol, max_iter)
    return GridFunction(mesh, values)


def residual_msq(mesh: FittedMesh, psi: GridFunction | np.ndarray) -> float:
    """Sup norm over interior vertices of the assembled minimal-surface flux residual."""
    values = psi.values if isinstance(psi, GridFunction) else np.asarray(psi, dtype=float)
    grad = AreaOperator(mesh).gradient(values)
    free = ~mesh.dirichlet_mask()
    return float(np.max(np.abs(grad[free]), initial=0.0))
