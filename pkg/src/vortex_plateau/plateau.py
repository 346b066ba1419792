"""Discrete parametric Plateau solver used to cross-check the graph formulation.

Surfaces are triangulated discs whose boundary loop is pinned to a closed
polyline in 3-space.  Area is lowered by alternating

* a harmonic step: with the boundary fixed, the interior is replaced by the
  harmonic map for the cotangent weights of the current surface (each step
  does not increase area), and
* a boundary step: every non-corner boundary vertex slides along the curve,
  between its neighbours, to the position minimizing the area of its star.

The self-overlapping curve traverses two unit circles and, twice in opposite
directions, the segment joining them.  A quadrilateral disc mesh assigns the
four arcs to the four sides of a structured grid; its initial surface is the
harmonic extension over the rectangle whose sides have the arc lengths.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq

log = logging.getLogger(__name__)

PINCH_QUALITY = 1e-3
CATENOID_DMAX = None  # filled lazily by catenoid_existence_limit()


class CatenoidError(ValueError):
    pass


# ------------------------------------------------------------------- curves


@dataclass
class SpaceCurve:
    """Closed polyline; ``corners`` index the first vertex of each arc."""

    points: np.ndarray
    corners: tuple[int, ...] = (0,)
    orientation: int = 1
    competitor_area: float | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)

    @property
    def closed_points(self) -> np.ndarray:
        return np.vstack([self.points, self.points[:1]])

    @property
    def cumulative(self) -> np.ndarray:
        seg = np.linalg.norm(np.diff(self.closed_points, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self) -> float:
        return float(self.cumulative[-1])

    def at(self, tau: np.ndarray) -> np.ndarray:
        """Points at arc-length parameters ``tau`` (taken modulo the length)."""
        cum = self.cumulative
        pts = self.closed_points
        tau = np.mod(np.asarray(tau, dtype=float), cum[-1])
        k = np.clip(np.searchsorted(cum, tau, side="right") - 1, 0, len(pts) - 2)
        seglen = cum[k + 1] - cum[k]
        f = np.where(seglen > 0, (tau - cum[k]) / np.where(seglen > 0, seglen, 1.0), 0.0)
        return pts[k] + f[:, None] * (pts[k + 1] - pts[k])

    def arc_bounds(self) -> list[tuple[float, float]]:
        cum = self.cumulative
        c = list(self.corners) + [len(self.points)]
        return [(float(cum[a]), float(cum[b])) for a, b in zip(c[:-1], c[1:])]


def build_gamma(l: float, m: int = 64) -> SpaceCurve:
    """Circle at ``w1 = 0``, segment to ``w1 = 2l``, reversed circle, segment back.

    ``m`` points per circle; each segment gets a comparable spacing.
    """
    if m < 8:
        raise ValueError("need at least 8 points per arc")
    if l <= 0:
        raise ValueError("l must be positive")
    th = 2.0 * np.pi * np.arange(m) / m
    ms = max(2, math.ceil(m * 2.0 * l / (2.0 * np.pi)))
    xs = 2.0 * l * np.arange(ms) / ms
    c1 = np.column_stack([np.zeros(m), np.cos(th), np.sin(th)])
    seg = np.column_stack([xs, np.ones(ms), np.zeros(ms)])
    c2 = np.column_stack([np.full(m, 2.0 * l), np.cos(-th), np.sin(-th)])
    back = np.column_stack([2.0 * l - xs, np.ones(ms), np.zeros(ms)])
    pts = np.vstack([c1, seg, c2, back])
    return SpaceCurve(pts, corners=(0, m, m + ms, 2 * m + ms), competitor_area=2.0 * np.pi)


def circle_curve(m: int = 256, radius: float = 1.0) -> SpaceCurve:
    th = 2.0 * np.pi * np.arange(m) / m
    pts = np.column_stack([radius * np.cos(th), radius * np.sin(th), np.zeros(m)])
    return SpaceCurve(pts)


# ------------------------------------------------------------------- meshes


@dataclass
class DiscMesh:
    """Triangulated closed unit disc with its map into 3-space.

    ``boundary`` is the ordered boundary loop and ``tau`` the arc-length
    parameter of each boundary vertex on the spanned curve.
    """

    uv: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    positions: np.ndarray
    tau: np.ndarray
    pinned: np.ndarray  # boundary vertices that never slide (arc corners)
    grid_shape: tuple[int, int] | None = None

    def area(self) -> float:
        return float(np.sum(triangle_areas(self.positions, self.triangles)))

    def export_obj(self, path) -> None:
        lines = [f"v {x:.12g} {y:.12g} {z:.12g}" for x, y, z in self.positions]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in self.triangles]
        Path(path).write_text("\n".join(lines) + "\n")


def triangle_areas(x: np.ndarray, tri: np.ndarray) -> np.ndarray:
    p = x[tri]
    return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)


def triangle_quality(x: np.ndarray, tri: np.ndarray) -> np.ndarray:
    """``4 sqrt(3) A / sum(edge^2)``: 1 for equilateral, 0 for degenerate."""
    p = x[tri]
    e2 = sum(np.sum((p[:, (k + 1) % 3] - p[:, k]) ** 2, axis=1) for k in range(3))
    return 4.0 * math.sqrt(3.0) * triangle_areas(x, tri) / np.maximum(e2, 1e-300)


def _square_to_disc(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    x, y = 2.0 * u - 1.0, 2.0 * v - 1.0
    return np.column_stack([x * np.sqrt(1.0 - y * y / 2.0), y * np.sqrt(1.0 - x * x / 2.0)])


def _grid_triangles(nu: int, nv: int, periodic: bool = False) -> np.ndarray:
    """Cells of a ``(nu + 1) x (nv + 1)`` grid (index ``i * (nv + 1) + j``), diagonals mirrored at ``u = 1/2``."""
    cols = nu + 1
    tris = []
    for i in range(nu):
        i1 = (i + 1) % nu if periodic else i + 1
        for j in range(nv):
            a, b = i * (nv + 1) + j, i1 * (nv + 1) + j
            c, d = b + 1, a + 1
            if i + 0.5 < nu / 2.0:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    del cols
    return np.array(tris, dtype=np.int64)


def quad_disc_mesh(curve: SpaceCurve, nu: int, nv: int) -> DiscMesh:
    """Structured disc for a curve with four arcs (sides: u-, v-, u-reversed, v-reversed)."""
    if len(curve.corners) != 4:
        raise ValueError("quadrilateral mesh needs a curve with four arcs")
    if nu % 2:
        raise ValueError("nu must be even for a mirror-symmetric mesh")
    (a0, a1), (b0, b1), (c0, c1), (d0, d1) = curve.arc_bounds()
    uu, vv = np.meshgrid(np.arange(nu + 1) / nu, np.arange(nv + 1) / nv, indexing="ij")
    n = (nu + 1) * (nv + 1)
    idx = np.arange(n).reshape(nu + 1, nv + 1)
    boundary = np.concatenate([idx[:, 0], idx[-1, 1:], idx[-2::-1, -1], idx[0, -2:0:-1]])
    su, sv = np.arange(nu + 1) / nu, np.arange(nv + 1) / nv
    tau = np.concatenate(
        [
            a0 + (a1 - a0) * su,
            b0 + (b1 - b0) * sv[1:],
            c0 + (c1 - c0) * su[1:],
            d0 + (d1 - d0) * sv[1:-1],
        ]
    )
    pinned = np.zeros(boundary.size, dtype=bool)
    pinned[[0, nu, nu + nv, 2 * nu + nv]] = True

    # harmonic extension over the rectangle with the arc lengths as sides
    lu, lv = (a1 - a0 + c1 - c0) / 2.0, (b1 - b0 + d1 - d0) / 2.0
    rect = np.column_stack([uu.ravel() * lu, vv.ravel() * lv, np.zeros(n)])
    tri = _grid_triangles(nu, nv)
    xb = curve.at(tau)
    positions = np.zeros((n, 3))
    positions[boundary] = xb
    positions = _harmonic(rect, tri, boundary, positions)
    return DiscMesh(_square_to_disc(uu.ravel(), vv.ravel()), tri, boundary, positions, tau, pinned, (nu + 1, nv + 1))


def ring_disc_mesh(curve: SpaceCurve, n_boundary: int, n_rings: int) -> DiscMesh:
    """Concentric-ring disc with ``n_boundary`` boundary vertices placed by arc length."""
    radii = np.arange(n_rings + 1) / n_rings
    counts = [1] + [max(6, round(n_boundary * r)) for r in radii[1:]]
    counts[-1] = n_boundary
    uv, rings, start = [], [], 0
    for r, c in zip(radii, counts):
        th = 2.0 * np.pi * np.arange(c) / c
        uv.append(np.column_stack([r * np.cos(th), r * np.sin(th)]))
        rings.append(np.arange(start, start + c))
        start += c
    uv = np.vstack(uv)
    tri = []
    for inner, outer in zip(rings[:-1], rings[1:]):
        if inner.size == 1:
            for k in range(outer.size):
                tri.append((inner[0], outer[k], outer[(k + 1) % outer.size]))
            continue
        # merge the two angle lists, advancing on the ring whose next vertex comes first
        i = o = 0
        ni, no = inner.size, outer.size
        while i < ni or o < no:
            ai = (i + 1) / ni if i < ni else np.inf
            ao = (o + 1) / no if o < no else np.inf
            if ao <= ai:
                tri.append((inner[i % ni], outer[o % no], outer[(o + 1) % no]))
                o += 1
            else:
                tri.append((inner[i % ni], outer[o % no], inner[(i + 1) % ni]))
                i += 1
    tri = np.array(tri, dtype=np.int64)
    boundary = rings[-1]
    tau = curve.length * np.arange(n_boundary) / n_boundary
    positions = np.zeros((uv.shape[0], 3))
    positions[boundary] = curve.at(tau)
    flat = np.column_stack([uv, np.zeros(uv.shape[0])])
    positions = _harmonic(flat, tri, boundary, positions)
    pinned = np.zeros(n_boundary, dtype=bool)
    pinned[0] = True
    return DiscMesh(uv, tri, boundary, positions, tau, pinned)


# ------------------------------------------------------------ harmonic maps


def cotangent_laplacian(x: np.ndarray, tri: np.ndarray) -> sp.csr_matrix:
    """Symmetric positive semidefinite cotangent Laplacian of the surface ``x``."""
    n = x.shape[0]
    rows, cols, vals = [], [], []
    for k in range(3):
        i, j, o = tri[:, (k + 1) % 3], tri[:, (k + 2) % 3], tri[:, k]
        ei, ej = x[i] - x[o], x[j] - x[o]
        cot = np.sum(ei * ej, axis=1) / np.maximum(np.linalg.norm(np.cross(ei, ej), axis=1), 1e-300)
        w = 0.5 * cot
        rows += [i, j, i, j]
        cols += [j, i, i, j]
        vals += [-w, -w, w, w]
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def _harmonic(domain: np.ndarray, tri: np.ndarray, boundary: np.ndarray, positions: np.ndarray) -> np.ndarray:
    lap = cotangent_laplacian(domain, tri)
    n = domain.shape[0]
    free = np.ones(n, dtype=bool)
    free[boundary] = False
    out = positions.copy()
    rhs = -(lap[free][:, ~free] @ positions[~free])
    solve = spla.factorized(lap[free][:, free].tocsc())
    for c in range(3):
        out[free, c] = solve(np.ascontiguousarray(rhs[:, c]))
    return out


# ------------------------------------------------------------------ solver


@dataclass
class PlateauResult:
    mesh: DiscMesh
    area: float
    degenerate: bool
    pinched: bool
    iterations: int
    history: list[float] = field(default_factory=list)

    def __iter__(self):
        # allows ``mesh, area = solve_plateau(...)``
        return iter((self.mesh, self.area))


def _slide_boundary(mesh: DiscMesh, curve: SpaceCurve, golden_iters: int = 30) -> None:
    """One pass (even then odd loop positions) of 1-D boundary relaxation.

    Each free boundary vertex moves along the curve, between its neighbours,
    to lower the cotangent Dirichlet energy of the current surface.  That
    energy equals the area at the current map and bounds the area of any
    moved map from above, so area cannot increase.  (Minimizing the star
    area itself lets neighbours cluster and cut corners of the curve.)
    """
    nb = mesh.boundary.size
    total = curve.length
    unwrapped = mesh.tau.copy()
    for k in range(1, nb):
        while unwrapped[k] < unwrapped[k - 1]:
            unwrapped[k] += total
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    for parity in (0, 1):
        sel = np.flatnonzero((np.arange(nb) % 2 == parity) & ~mesh.pinned)
        if nb % 2 and parity == 0:
            sel = sel[sel != nb - 1]  # first and last share a parity when nb is odd
        if sel.size == 0:
            continue
        lap = cotangent_laplacian(mesh.positions, mesh.triangles)
        verts = mesh.boundary[sel]
        diag = lap.diagonal()[verts]
        ok = diag > 0
        sel, verts, diag = sel[ok], verts[ok], diag[ok]
        # local energy d |p|^2 - 2 p.b + const is minimized at the weighted neighbour mean
        target = mesh.positions[verts] - (lap[verts] @ mesh.positions) / diag[:, None]

        def dist(t):
            return np.sum((curve.at(t) - target) ** 2, axis=1)

        prev_t = np.where(sel > 0, unwrapped[sel - 1], unwrapped[-1] - total)
        next_t = np.where(sel < nb - 1, unwrapped[(sel + 1) % nb], unwrapped[0] + total)
        a = prev_t + 0.05 * (next_t - prev_t)
        b = next_t - 0.05 * (next_t - prev_t)
        t0 = unwrapped[sel]
        f0 = dist(t0)
        c, d = b - gr * (b - a), a + gr * (b - a)
        fc, fd = dist(c), dist(d)
        for _ in range(golden_iters):
            left = fc < fd
            b = np.where(left, d, b)
            a = np.where(left, a, c)
            d = np.where(left, c, a + gr * (b - a))
            c = np.where(left, b - gr * (b - a), d)
            fd, fc = np.where(left, fc, dist(d)), np.where(left, dist(c), fd)
        t_best = np.where(fc < fd, c, d)
        t_new = np.where(np.minimum(fc, fd) < f0, t_best, t0)
        unwrapped[sel] = t_new
        mesh.positions[verts] = curve.at(t_new)
    mesh.tau = np.mod(unwrapped, total)


def _harmonic_step(mesh: DiscMesh) -> np.ndarray:
    return _harmonic(mesh.positions, mesh.triangles, mesh.boundary, mesh.positions)


def minimize_area(
    mesh: DiscMesh,
    curve: SpaceCurve | None,
    iters: int = 500,
    area_tol: float = 1e-8,
    redistribute_every: int = 5,
    competitor_area: float | None = None,
) -> PlateauResult:
    """Alternating harmonic / boundary-sliding area descent on ``mesh`` (modified in place)."""
    area = mesh.area()
    history = [area]
    pinched = False
    it = 0
    for it in range(1, iters + 1):
        q = triangle_quality(mesh.positions, mesh.triangles)
        if np.min(q) < PINCH_QUALITY:
            pinched = True
            break
        new = _harmonic_step(mesh)
        new_area = float(np.sum(triangle_areas(new, mesh.triangles)))
        damp = 1.0
        while new_area > area and damp > 1e-3:
            damp *= 0.5
            trial = mesh.positions + damp * (new - mesh.positions)
            new_area = float(np.sum(triangle_areas(trial, mesh.triangles)))
            new = trial if new_area <= area else new
        if new_area <= area:
            mesh.positions = new
        if curve is not None and redistribute_every and it % redistribute_every == 0:
            _slide_boundary(mesh, curve)
        area = mesh.area()
        history.append(area)
        # compare over a whole harmonic/boundary cycle
        lag = max(redistribute_every, 1) if curve is not None else 1
        if len(history) > lag and history[-1 - lag] - area < area_tol:
            break
    degenerate = pinched or (competitor_area is not None and area >= competitor_area)
    return PlateauResult(mesh, area, degenerate, pinched, it, history)


def quad_grid_size(curve: SpaceCurve, refine: int) -> tuple[int, int]:
    """Quad grid ``(nu, nv)`` with about ``refine`` boundary vertices and roughly square cells."""
    bounds = curve.arc_bounds()
    lu = (bounds[0][1] - bounds[0][0] + bounds[2][1] - bounds[2][0]) / 2.0
    lv = (bounds[1][1] - bounds[1][0] + bounds[3][1] - bounds[3][0]) / 2.0
    nu = max(8, 2 * round(refine * lu / (2.0 * (lu + lv)) / 2.0))
    nv = max(4, round(nu * lv / lu))
    return nu, nv


def refine_for_triangles(l: float, triangles: int) -> int:
    """Boundary resolution whose quad disc mesh for the two-circle curve has about ``triangles`` triangles."""
    curve = build_gamma(l, 256)
    count = lambda r: 2 * np.prod(quad_grid_size(curve, r))
    return min(range(32, 4097, 2), key=lambda r: (abs(count(r) - triangles), r))


def solve_plateau(curve: SpaceCurve, refine: int = 256, iters: int = 500, area_tol: float = 1e-8) -> PlateauResult:
    """Discrete area-minimizing disc spanning ``curve``.

    ``refine`` is the number of boundary vertices.  Curves with four arcs use
    the quadrilateral mesh (side counts proportional to arc length, roughly
    square cells); others use the ring mesh.  The result is flagged
    degenerate on neck pinch-off or when its area is not below the
    competitor configuration recorded on the curve (two flat discs for the
    self-overlapping curve).
    """
    if len(curve.corners) == 4:
        mesh = quad_disc_mesh(curve, *quad_grid_size(curve, refine))
    else:
        n_rings = max(4, round(refine / (2.0 * np.pi) / 3.0))
        mesh = ring_disc_mesh(curve, refine, n_rings)
    return minimize_area(mesh, curve, iters=iters, area_tol=area_tol, competitor_area=curve.competitor_area)


# -------------------------------------------------------- circle pair / oracle


def catenoid_existence_limit() -> float:
    """Largest separation of two unit circles spanned by a catenoid."""
    x = brentq(lambda x: x * math.tanh(x) - 1.0, 0.5, 2.0)
    return 2.0 * x / math.cosh(x)


def catenoid_oracle(d: float) -> float:
    """Area of the stable catenoid between coaxial unit circles at distance ``d``."""
    if d <= 0:
        return 0.0
    dmax = catenoid_existence_limit()
    if d > dmax:
        raise CatenoidError(f"no catenoid spans unit circles at distance {d} > {dmax:.6f}")
    x = brentq(lambda x: x * math.tanh(x) - 1.0, 0.5, 2.0)
    c_tangent = 1.0 / math.cosh(x)
    f = lambda c: c * math.cosh(d / (2.0 * c)) - 1.0
    c = 1.0 if f(1.0) == 0 else brentq(f, c_tangent * (1 - 1e-12), 1.0, xtol=1e-15)
    return math.pi * c * (d + c * math.sinh(d / c))


def goldschmidt_distance() -> float:
    """Separation at which the catenoid area equals the two-disc area ``2 pi``."""
    return brentq(lambda d: catenoid_oracle(d) - 2.0 * math.pi, 0.5, catenoid_existence_limit())


def cylinder_mesh(d: float, n_theta: int, n_s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Periodic grid on the unit cylinder of length ``d``; returns positions, triangles, boundary."""
    th = 2.0 * np.pi * np.arange(n_theta) / n_theta
    s = d * np.arange(n_s + 1) / n_s
    tt, ss = np.meshgrid(th, s, indexing="ij")
    x = np.column_stack([ss.ravel(), np.cos(tt).ravel(), np.sin(tt).ravel()])
    tri = _grid_triangles(n_theta, n_s, periodic=True)
    idx = np.arange(x.shape[0]).reshape(n_theta, n_s + 1)
    boundary = np.concatenate([idx[:, 0], idx[:, -1]])
    return x, tri, boundary


@dataclass
class CirclePairResult:
    area: float
    degenerate: bool
    pinched: bool
    iterations: int
    positions: np.ndarray
    triangles: np.ndarray


def solve_circle_pair(d: float, n_theta: int = 128, n_s: int | None = None, iters: int = 2000, area_tol: float = 1e-8) -> CirclePairResult:
    """Annulus-type minimal surface between coaxial unit circles, started from the cylinder."""
    n_s = n_s or max(4, round(n_theta * d / (2.0 * np.pi)))
    x, tri, boundary = cylinder_mesh(d, n_theta, n_s)
    area = float(np.sum(triangle_areas(x, tri)))
    pinched, it = False, 0
    free = np.ones(x.shape[0], dtype=bool)
    free[boundary] = False
    for it in range(1, iters + 1):
        if np.min(triangle_quality(x, tri)) < PINCH_QUALITY:
            pinched = True
            break
        lap = cotangent_laplacian(x, tri)
        solve = spla.factorized(lap[free][:, free].tocsc())
        rhs = -(lap[free][:, ~free] @ x[~free])
        new = x.copy()
        for c in range(3):
            new[free, c] = solve(np.ascontiguousarray(rhs[:, c]))
        new_area = float(np.sum(triangle_areas(new, tri)))
        if new_area > area:
            break
        x, prev, area = new, area, new_area
        if prev - area < area_tol:
            break
    degenerate = pinched or area >= 2.0 * np.pi
    return CirclePairResult(area, degenerate, pinched, it, x, tri)


# ------------------------------------------------------------- cross-check


def far_curve(mesh: DiscMesh) -> np.ndarray:
    """Points of a quadrilateral-mesh surface on the ``theta = pi`` column (the free curve side)."""
    if mesh.grid_shape is None:
        raise ValueError("far curve needs a quadrilateral mesh")
    nu1, nv1 = mesh.grid_shape
    return mesh.positions.reshape(nu1, nv1, 3)[(nu1 - 1) // 2]


def mirror_error(mesh: DiscMesh) -> float:
    """Largest distance between the surface and its reflection ``w3 -> -w3``."""
    if mesh.grid_shape is None:
        raise ValueError("mirror map needs a quadrilateral mesh")
    nu1, nv1 = mesh.grid_shape
    x = mesh.positions.reshape(nu1, nv1, 3)
    return float(np.max(np.abs(x[::-1] * np.array([1.0, 1.0, -1.0]) - x)))


@dataclass
class CrossCheck:
    l: float
    half_area_parametric: float
    min_F2l: float
    abs_gap: float
    rel_gap: float
    parametric_degenerate: bool
    graph_degenerate: bool
    triangles: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def compare_with_nonparametric(
    l: float,
    n1: int = 64,
    n2: int = 64,
    refine: int | None = None,
    iters: int = 500,
    cfg=None,
    triangles: int = 10_000,
) -> CrossCheck:
    """Half the parametric area of the surface spanning the curve vs. the graph minimum.

    A degenerate parametric solve counts as the two discs, ``2 pi``.  Without
    ``refine`` the disc mesh is sized to about ``triangles`` triangles.
    """
    from .outer_optimizer import minimize_over_profiles

    if refine is None:
        refine = refine_for_triangles(l, triangles)
    res = solve_plateau(build_gamma(l, max(64, 4 * refine)), refine=refine, iters=iters)
    half = math.pi if res.degenerate else min(res.area, 2.0 * math.pi) / 2.0
    report = minimize_over_profiles(l, n1, n2, cfg)
    gap = half - report.value
    return CrossCheck(
        l=l,
        half_area_parametric=half,
        min_F2l=report.value,
        abs_gap=abs(gap),
        rel_gap=abs(gap) / report.value,
        parametric_degenerate=res.degenerate,
        graph_degenerate=report.degenerate,
        triangles=len(res.mesh.triangles),
    )
