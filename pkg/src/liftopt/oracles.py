"""Brute-force oracles: dense-grid minimization and nearest-member search.

These exist to certify desk-scale answers independently of the solvers:
nothing here touches the projection or solver code paths. Grid search gets
its accuracy from a local refinement pass, not from grid resolution.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError
from .types import CostFunction, LiftedVector

__all__ = [
    "golden_section",
    "grid_oracle",
    "projection_oracle",
    "finite_difference_subgradient_check",
]

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section(fun, lo: float, hi: float, tol: float = 1e-10,
                   max_iter: int = 200):
    """Derivative-free line minimization on [lo, hi]; returns (x, fun(x))."""
    a, b = (lo, hi) if lo <= hi else (hi, lo)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


def _normalize_box(box, dim: int) -> np.ndarray:
    arr = np.asarray(box, dtype=float)
    if arr.shape == (2,):
        arr = np.tile(arr, (dim, 1))
    if arr.shape != (dim, 2) or np.any(arr[:, 0] >= arr[:, 1]):
        raise ValueError(f"box must give (lo, hi) with lo < hi for each of {dim} axes")
    return arr


def _grid_points(box: np.ndarray, n: int):
    axes = [np.linspace(lo, hi, n) for lo, hi in box]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, box.shape[0])
    spacing = (box[:, 1] - box[:, 0]) / (n - 1)
    return pts, spacing


def _eval_many(f: CostFunction, pts: np.ndarray) -> np.ndarray:
    if f.eval_batch is not None:
        return np.asarray(f.eval_batch(pts), dtype=float)
    return np.array([f.eval(row) for row in pts])


def _feasible_mask(predicate, pts: np.ndarray) -> np.ndarray:
    mask = predicate(pts)
    mask = np.asarray(mask)
    if mask.shape != (pts.shape[0],):
        mask = np.array([bool(predicate(row)) for row in pts])
    return mask.astype(bool)


def grid_oracle(f: CostFunction, box, points_per_axis: int, feasible=None):
    """Exhaustive grid minimization with a local refinement pass.

    Parameters
    ----------
    f : CostFunction
    box : array_like
        Per-coordinate (lo, hi) bounds, or one pair broadcast to all axes.
    points_per_axis : int
        Grid resolution (>= 3); kept modest since the grid has
        ``points_per_axis ** N`` points.
    feasible : callable, optional
        Vectorized membership predicate over a (P, N) array. When given,
        only feasible grid points compete and refinement stays feasible.

    Returns
    -------
    (argmin, min_value)
        Best point found and ``f.eval`` recomputed there exactly.

    Raises
    ------
    ValueError
        For N > 4 (grid explosion: use golden_section on a line or a
        random multistart instead) or when no feasible point is in the box.
    """
    if f.dim > 4:
        raise ValueError(
            "grid_oracle is limited to N <= 4; use golden_section along lines "
            "or a random multistart for higher dimensions"
        )
    if points_per_axis < 3:
        raise ValueError("points_per_axis must be >= 3")
    box = _normalize_box(box, f.dim)
    pts, spacing = _grid_points(box, points_per_axis)
    if feasible is not None:
        mask = _feasible_mask(feasible, pts)
        if not mask.any():
            raise ValueError("no feasible point in the box")
        pts = pts[mask]
    vals = _eval_many(f, pts)
    i = int(np.argmin(vals))  # ties resolve to the lowest linear index
    best, best_val = pts[i].copy(), float(vals[i])

    if feasible is None:
        refined = _refine_golden(f, best, spacing, box)
    else:
        refined = _refine_zoom(f, best, spacing, box, feasible)
    refined_val = f.eval(refined)
    if refined_val <= best_val:
        best, best_val = refined, refined_val
    return best, float(f.eval(best))


def _refine_golden(f: CostFunction, x: np.ndarray, spacing: np.ndarray,
                   box: np.ndarray) -> np.ndarray:
    # coordinate-wise golden-section around the best cell, 3 sweeps
    x = x.copy()
    for _ in range(3):
        for i in range(x.size):
            lo = max(box[i, 0], x[i] - spacing[i])
            hi = min(box[i, 1], x[i] + spacing[i])

            def line(t, i=i):
                y = x.copy()
                y[i] = t
                return f.eval(y)

            x[i], _ = golden_section(line, lo, hi, tol=1e-10, max_iter=200)
    return x


def _refine_zoom(f: CostFunction, x: np.ndarray, spacing: np.ndarray,
                 box: np.ndarray, feasible) -> np.ndarray:
    # shrinking local grids keep refinement inside the feasible set
    center = x.copy()
    radius = spacing.copy()
    for _ in range(60):
        axes = [np.linspace(max(box[i, 0], center[i] - radius[i]),
                            min(box[i, 1], center[i] + radius[i]), 5)
                for i in range(center.size)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, center.size)
        pts = np.vstack([pts, center])  # keep the incumbent in play
        mask = _feasible_mask(feasible, pts)
        pts = pts[mask]
        vals = _eval_many(f, pts)
        center = pts[int(np.argmin(vals))].copy()
        radius *= 0.5
    return center


def projection_oracle(p: LiftedVector, set_membership, box,
                      points_per_axis: int) -> LiftedVector:
    """Nearest member of a set to ``p`` by dense search plus zoom refinement.

    ``set_membership`` is a predicate over lifted points, ideally vectorized
    over a (P, N+1) array (a scalar predicate is looped). Used to certify
    epigraph projections and fallback geometry without touching them.
    """
    d = p.dim + 1
    if d > 4:
        raise ValueError("projection_oracle is limited to lifted dimension N+1 <= 4")
    if points_per_axis < 3:
        raise ValueError("points_per_axis must be >= 3")
    box = _normalize_box(box, d)
    target = p.as_array()
    if _feasible_mask(set_membership, target[None, :])[0]:
        return p

    pts, spacing = _grid_points(box, points_per_axis)
    mask = _feasible_mask(set_membership, pts)
    if not mask.any():
        raise ValueError("no member of the set found in the box")
    members = pts[mask]
    dist2 = np.sum((members - target) ** 2, axis=1)
    center = members[int(np.argmin(dist2))].copy()

    radius = spacing.copy()
    for _ in range(60):
        axes = [np.linspace(center[i] - radius[i], center[i] + radius[i], 5)
                for i in range(d)]
        local = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        local = np.vstack([local, center])
        mask = _feasible_mask(set_membership, local)
        local = local[mask]
        dist2 = np.sum((local - target) ** 2, axis=1)
        center = local[int(np.argmin(dist2))].copy()
        radius *= 0.5
    return LiftedVector(center[:-1], center[-1])


def finite_difference_subgradient_check(f: CostFunction, w, step: float = 1e-6) -> float:
    """Max relative error between central differences and ``f.subgradient``.

    Meaningful only away from non-differentiability loci (keep a distance
    of at least ~1e-3 from kinks). The per-component error is normalized by
    ``max(1, |g_i|)``.
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.size != f.dim:
        raise DimensionMismatchError(f"point has dim {w.size}, cost expects {f.dim}")
    g = np.asarray(f.subgradient(w), dtype=float)
    worst = 0.0
    for i in range(w.size):
        e = np.zeros_like(w)
        e[i] = step
        fd = (f.eval(w + e) - f.eval(w - e)) / (2.0 * step)
        worst = max(worst, abs(fd - g[i]) / max(1.0, abs(g[i])))
    return float(worst)
