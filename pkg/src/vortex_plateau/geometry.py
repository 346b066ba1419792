"""Rectangles, the lateral boundary datum and convex free-boundary profiles.

Profiles live on uniform nodes.  A :class:`ConvexProfile` covers the doubled
interval ``[0, 2l]`` and a :class:`HalfProfile` covers ``[0, l]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FEAS_TOL = 1e-12


def eval_phi(w2):
    """Half-circle datum ``sqrt(1 - w2^2)`` on ``|w2| <= 1``, zero outside."""
    w2 = np.asarray(w2, dtype=float)
    out = np.sqrt(np.clip(1.0 - w2 * w2, 0.0, None))
    out = np.where(np.abs(w2) <= 1.0, out, 0.0)
    return out if out.ndim else float(out)


def phi_antiderivative(s):
    """Primitive of ``sqrt(1 - s^2)`` on ``[-1, 1]``."""
    s = np.clip(s, -1.0, 1.0)
    return 0.5 * (s * np.sqrt(1.0 - s * s) + np.arcsin(s))


@dataclass(frozen=True)
class ConvexProfile:
    """Free boundary ``h`` on ``[0, 2l]`` sampled at ``t_i = i * 2l / n``."""

    l: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.l <= 0:
            raise ValueError("half length must be positive")
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValueError("profile needs at least two nodes")

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def width(self) -> float:
        return 2.0 * self.l

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) * (self.width / self.n)

    @classmethod
    def constant(cls, l: float, value: float, n: int) -> "ConvexProfile":
        return cls(l, np.full(n + 1, float(value)))

    def is_degenerate(self) -> bool:
        return bool(np.all(self.values <= -1.0))

    def violations(self) -> dict[str, float]:
        v = self.values
        return {
            "range": float(max(np.max(v) - 1.0, -1.0 - np.min(v), 0.0)),
            "symmetry": float(np.max(np.abs(v - v[::-1]))),
            "convexity": float(max(-np.min(second_differences(v), initial=0.0), 0.0)),
        }

    def is_feasible(self, tol: float = FEAS_TOL) -> bool:
        return all(val <= tol for val in self.violations().values())

    def half(self) -> "HalfProfile":
        if self.n % 2:
            raise ValueError("halving needs an even node count")
        return HalfProfile(self.l, self.values[: self.n // 2 + 1].copy())

    def mirrored(self) -> "ConvexProfile":
        return ConvexProfile(self.l, self.values[::-1].copy())

    def to_json(self) -> dict:
        return {"l": float(self.l), "values": [float(x) for x in self.values]}

    @classmethod
    def from_json(cls, data: dict) -> "ConvexProfile":
        return cls(float(data["l"]), np.asarray(data["values"], dtype=float))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2))

    @classmethod
    def load(cls, path) -> "ConvexProfile":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class HalfProfile:
    """Profile on ``[0, l]`` sampled at ``t_i = i * l / n``.

    The convexifying transforms accept arbitrary values in ``[-1, 1]``; the
    class ``H_l`` (convex, nonincreasing, ``h(0) = 1``) is checked by
    :meth:`in_class`.
    """

    l: float
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.l <= 0:
            raise ValueError("half length must be positive")
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValueError("profile needs at least two nodes")

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def width(self) -> float:
        return self.l

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) * (self.l / self.n)

    def in_class(self, tol: float = FEAS_TOL) -> bool:
        v = self.values
        return bool(
            abs(v[0] - 1.0) <= tol
            and np.all(np.diff(v) <= tol)
            and np.all(second_differences(v) >= -tol)
            and np.all(v >= -1.0 - tol)
        )

    def doubled(self) -> ConvexProfile:
        """Even reflection about ``w1 = l``."""
        return ConvexProfile(self.l, np.concatenate([self.values, self.values[-2::-1]]))


def second_differences(v: np.ndarray) -> np.ndarray:
    return v[:-2] - 2.0 * v[1:-1] + v[2:]


def subgraph_measure(h: ConvexProfile | HalfProfile) -> float:
    """Trapezoid area of ``{-1 < w2 < h(w1)}``."""
    v = h.values + 1.0
    dt = h.width / h.n
    return float(dt * (v.sum() - 0.5 * (v[0] + v[-1])))


def _constraint_matrix(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``a`` and bounds ``b`` of ``a . x >= b`` for the feasible set."""
    m = n + 1
    d2 = np.zeros((m - 2, m))
    idx = np.arange(m - 2)
    d2[idx, idx] = 1.0
    d2[idx, idx + 1] = -2.0
    d2[idx, idx + 2] = 1.0
    eye = np.eye(m)
    a = np.vstack([d2, eye, -eye])
    b = np.concatenate([np.zeros(m - 2), -np.ones(m), -np.ones(m)])
    return a, b


def _active_set_projection(y: np.ndarray, a: np.ndarray, b: np.ndarray, max_iter: int) -> np.ndarray:
    """Primal active-set method for ``min |x - y|^2 / 2`` s.t. ``a x >= b``.

    Starts from the feasible point ``x = 0``.  The working set is kept
    linearly independent (a row in its span has zero rate along the step and
    is never added), so multipliers are unique; ties are broken toward the
    smallest constraint index to avoid cycling at degenerate vertices.
    """
    x = np.zeros_like(y)
    work: list[int] = []
    tol = 1e-12 * (1.0 + np.max(np.abs(y)))
    for _ in range(max_iter):
        g = y - x
        if work:
            q, _ = np.linalg.qr(a[work].T)
            p = g - q @ (q.T @ g)
        else:
            p = g
        if np.max(np.abs(p)) <= tol:
            if not work:
                return x
            # x - y = A_W^T lam at a KKT point with lam >= 0
            lam = np.linalg.lstsq(a[work].T, x - y, rcond=None)[0]
            neg = [k for k in np.argsort(work) if lam[k] < -tol]
            if not neg:
                return x
            work.pop(int(neg[0]))
            continue
        ap = a @ p
        slack = np.maximum(a @ x - b, 0.0)
        in_work = np.zeros(len(b), dtype=bool)
        in_work[work] = True
        cand = np.flatnonzero((ap < -tol) & ~in_work)
        alpha, block = 1.0, -1
        if cand.size:
            ratios = slack[cand] / -ap[cand]
            rmin = ratios.min()
            if rmin < 1.0:
                alpha = float(rmin)
                block = int(cand[np.flatnonzero(ratios <= rmin + 1e-15)[0]])
        x = x + alpha * p
        if block >= 0:
            work.append(block)
    raise RuntimeError("profile projection did not converge")


def project_profile(raw, l: float) -> ConvexProfile:
    """Euclidean projection onto symmetric convex profiles with values in ``[-1, 1]``.

    The input is symmetrized first; the nearest feasible point to a vector
    and to its symmetrization coincide because the feasible set is
    mirror-invariant.
    """
    y = np.asarray(raw, dtype=float)
    n = y.size - 1
    if n < 2:
        raise ValueError("projection needs n >= 2")
    y = 0.5 * (y + y[::-1])
    if ConvexProfile(l, y).is_feasible(1e-14):
        return ConvexProfile(l, y)
    a, b = _constraint_matrix(n)
    x = _active_set_projection(y, a, b, max_iter=20 * (n + 1) + 100)
    x = np.clip(0.5 * (x + x[::-1]), -1.0, 1.0)
    return ConvexProfile(l, x)


def enforce_endpoints(h: ConvexProfile) -> ConvexProfile:
    """Raise the end nodes to 1; keeps convexity, range and symmetry."""
    v = h.values.copy()
    v[0] = v[-1] = 1.0
    return ConvexProfile(h.l, v)
