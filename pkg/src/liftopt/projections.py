"""Orthogonal (and relaxed) projections onto the sets the solvers use.

Level sets and hyperplanes have one-line closed forms. Epigraph projection
is exact and dispatches on cost structure: half-space for affine costs,
second-order cone for Euclidean-norm costs, and otherwise a reduction to a
one-dimensional root-find on the Lagrange multiplier of the graph
constraint. Constraint sets (box, ball, half-space, affine hyperplane) have
the textbook closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq

from .costs import AffineStructure, NormConeStructure
from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    DomainError,
    NumericalError,
    UnsupportedOperationError,
)
from .types import CostFunction, EpigraphSet, LevelSet, LiftedVector
from .types import _lifted_unchecked

__all__ = [
    "Hyperplane",
    "project_level_set",
    "project_hyperplane",
    "supporting_hyperplane_at",
    "project_epigraph",
    "Box",
    "L2Ball",
    "Halfspace",
    "AffineHyperplane",
    "ConstraintSet",
    "make_constraint",
    "project_constraint",
]

DEFAULT_EPIGRAPH_TOL = 1e-8
_INNER_STEP_CAP = 10_000


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """A hyperplane in the lifted space: all q with normal . (q - anchor) = 0."""

    normal: np.ndarray
    anchor: LiftedVector

    def __post_init__(self):
        v = np.array(self.normal, dtype=float, copy=True).reshape(-1)
        if v.size != self.anchor.dim + 1:
            raise DimensionMismatchError(
                f"normal has {v.size} entries, expected {self.anchor.dim + 1}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("hyperplane normal must be finite")
        if not np.any(v != 0.0):
            raise ValueError("hyperplane normal must be nonzero")
        v.flags.writeable = False
        object.__setattr__(self, "normal", v)

    def residual(self, p: LiftedVector) -> float:
        """Signed offset normal . (p - anchor); zero on the plane."""
        return float(self.normal @ (p.as_array() - self.anchor.as_array()))


def project_level_set(p: LiftedVector, s: LevelSet) -> LiftedVector:
    """Clamp the height to at most ``s.alpha``; the base is untouched."""
    if p.height <= s.alpha:
        return p
    return _lifted_unchecked(p.base, s.alpha)


def project_hyperplane(p: LiftedVector, h: Hyperplane, lambda_: float = 1.0) -> LiftedVector:
    """Relaxed orthogonal projection of ``p`` onto the hyperplane ``h``.

    Returns ``p - lambda_ * (v.(p - anchor) / ||v||^2) * v``. With
    ``lambda_ = 1`` the result lies exactly on the plane; values in (0, 2)
    under- or over-shoot along the same normal direction.
    """
    if not (0.0 < lambda_ < 2.0):
        raise ConfigurationError(f"lambda must lie in (0, 2), got {lambda_}")
    v = h.normal
    r = h.residual(p)
    q = p.as_array() - lambda_ * (r / (v @ v)) * v
    return _lifted_unchecked(q[:-1], float(q[-1]))


def supporting_hyperplane_at(f: CostFunction, w) -> Hyperplane:
    """The hyperplane touching the graph of ``f`` at ``w``.

    The anchor is the graph point (w, f(w)) and the normal is
    (subgradient, -1), so for convex ``f`` the whole epigraph lies in the
    nonpositive half-space of the normal.
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    anchor = LiftedVector(w, f.eval(w))
    g = np.asarray(f.subgradient(w), dtype=float).reshape(-1)
    return Hyperplane(np.concatenate([g, [-1.0]]), anchor)


# ---------------------------------------------------------------------------
# epigraph projection


def _prox_fixed_point(f: CostFunction, x: np.ndarray, mu: float, tol: float) -> np.ndarray:
    """Generic prox via damped fixed-point iteration on u = x - mu * g(u).

    Only suitable for costs with a continuous (sub)gradient; library costs
    with kinks supply an exact ``prox`` instead.
    """
    u = x.copy()
    beta = 0.5
    last = np.inf
    for _ in range(_INNER_STEP_CAP):
        target = x - mu * np.asarray(f.subgradient(u), dtype=float)
        step = target - u
        norm = float(np.linalg.norm(step))
        if norm <= tol * max(1.0, float(np.linalg.norm(u))):
            return u + beta * step
        if norm > last:
            beta *= 0.5  # diverging: damp harder
            if beta < 1e-12:
                break
        last = norm
        u = u + beta * step
    raise NumericalError(
        f"fixed-point prox for cost {f.name!r} did not converge within "
        f"{_INNER_STEP_CAP} steps (mu={mu:g})"
    )


def _graph_projection(f: CostFunction, x: np.ndarray, s: float, tol: float,
                      mu_hint: Optional[float]) -> tuple[LiftedVector, float, float]:
    """Project (x, s) lying strictly below the graph of convex ``f``.

    The projection sits on the graph at u = prox_{mu f}(x) for the unique
    multiplier mu >= 0 with f(u(mu)) = s + mu; that scalar equation is
    bracketed (tightly around ``mu_hint`` when one is carried over from the
    previous cycle) and solved with Brent's method. Returns the projected
    point, the multiplier, and f at the projected base.
    """
    memo = {}

    if f.prox is not None:
        def u_of(mu):
            hit = memo.get(mu)
            if hit is None:
                hit = np.asarray(f.prox(x, mu), dtype=float)
                memo.clear()
                memo[mu] = hit
            return hit
    else:
        def u_of(mu):
            hit = memo.get(mu)
            if hit is None:
                hit = _prox_fixed_point(f, x, mu, tol=min(tol, 1e-10))
                memo.clear()
                memo[mu] = hit
            return hit

    def h(mu):
        return f.eval(u_of(mu)) - s - mu

    # Left edge: f(x) may be undefined for domain-restricted costs; fall back
    # to an interior multiplier just above zero.
    lo = 0.0
    try:
        h_lo = f.eval(x) - s
    except DomainError:
        lo = 1e-16
        h_lo = h(lo)
    if h_lo <= 0.0:
        # p is (numerically) already on or inside; snap to the nearest wall.
        u = np.array(u_of(lo), dtype=float)  # own it before freezing
        fu = f.eval(u)
        return _lifted_unchecked(u, max(s, fu)), lo, fu

    # h is strictly decreasing, so any sign change brackets the root.
    hi = max(h_lo, 16.0 * tol)
    if mu_hint is not None and mu_hint > 0.0:
        near = 0.8 * mu_hint
        if h(near) > 0.0:
            lo = near
            hi = 1.25 * mu_hint
        else:
            hi = near
    for _ in range(200):
        if h(hi) < 0.0:
            break
        lo = hi
        hi *= 2.0
    else:
        raise NumericalError(f"could not bracket the epigraph multiplier for {f.name!r}")
    try:
        mu = brentq(h, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (RuntimeError, ValueError) as exc:
        raise NumericalError(f"multiplier solve failed for {f.name!r}: {exc}") from exc
    u = np.array(u_of(mu), dtype=float)  # own it before freezing
    fu = f.eval(u)
    height = max(s + mu, fu)  # keep the result a member despite roundoff
    return _lifted_unchecked(u, height), mu, fu


def _project_epigraph_impl(p: LiftedVector, e: EpigraphSet, tol: float,
                           mu_hint: Optional[float]):
    """Returns (projection, multiplier or None, f(projection base) or None)."""
    cost = e.cost
    if p.dim != cost.dim:
        raise DimensionMismatchError(f"point has dim {p.dim}, cost expects {cost.dim}")
    if not cost.convex:
        raise UnsupportedOperationError(
            "exact epigraph projection needs a convex cost; use the "
            "supporting-hyperplane solvers for non-convex costs"
        )
    if e.contains(p):
        return p, None, None

    structure = cost.structure
    if isinstance(structure, AffineStructure):
        # epigraph {y >= a.w + b} is the half-space v.(w, y) <= -b, v = (a, -1)
        a = structure.coeffs
        r = float(a @ p.base - p.height + structure.offset)
        v = np.concatenate([a, [-1.0]])
        q = p.as_array() - (r / (v @ v)) * v
        return LiftedVector(q[:-1], q[-1]), None, None
    if isinstance(structure, NormConeStructure):
        z = p.base - structure.center
        rad = float(np.linalg.norm(z))
        if rad <= -p.height:
            return LiftedVector(structure.center, 0.0), None, None
        t = 0.5 * (rad + p.height)
        return LiftedVector(structure.center + (t / rad) * z, t), None, None

    return _graph_projection(cost, p.base, p.height, tol, mu_hint)


def project_epigraph(p: LiftedVector, e: EpigraphSet,
                     tol: float = DEFAULT_EPIGRAPH_TOL) -> LiftedVector:
    """Orthogonal projection of ``p`` onto the epigraph of a convex cost.

    Members are returned unchanged. Affine and Euclidean-norm costs use
    closed forms; everything else reduces to a bracketed root-find on the
    graph-constraint multiplier (see :func:`_graph_projection`), accurate to
    ``tol``.

    Raises
    ------
    UnsupportedOperationError
        If the cost is not convex.
    NumericalError
        If the inner solve does not converge within its step cap.
    """
    q, _, _ = _project_epigraph_impl(p, e, tol, None)
    return q


# ---------------------------------------------------------------------------
# constraint sets on the base space


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box {lower <= w <= upper} (componentwise)."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float, copy=True).reshape(-1)
        hi = np.array(self.upper, dtype=float, copy=True).reshape(-1)
        if lo.size != hi.size or lo.size < 1:
            raise ValueError("box bounds must be same-length nonempty vectors")
        if np.any(lo > hi):
            raise ValueError("box is empty: some lower bound exceeds its upper bound")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.size

    def project(self, w):
        return np.clip(np.asarray(w, dtype=float).reshape(-1), self.lower, self.upper)

    def violation(self, w):
        w = np.asarray(w, dtype=float).reshape(-1)
        return float(np.linalg.norm(w - self.project(w)))

    def contains(self, w, tol: float = 0.0) -> bool:
        return self.violation(w) <= tol


@dataclass(frozen=True, eq=False)
class L2Ball:
    """Euclidean ball {||w - center|| <= radius}."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.array(self.center, dtype=float, copy=True).reshape(-1)
        if self.radius <= 0.0:
            raise ValueError(f"ball radius must be > 0, got {self.radius}")
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.size

    def project(self, w):
        d = np.asarray(w, dtype=float).reshape(-1) - self.center
        n = float(np.linalg.norm(d))
        if n <= self.radius:
            return self.center + d
        return self.center + (self.radius / n) * d

    def violation(self, w):
        d = np.asarray(w, dtype=float).reshape(-1) - self.center
        return max(0.0, float(np.linalg.norm(d)) - self.radius)

    def contains(self, w, tol: float = 0.0) -> bool:
        return self.violation(w) <= tol


@dataclass(frozen=True, eq=False)
class Halfspace:
    """Half-space {normal . w <= offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        a = np.array(self.normal, dtype=float, copy=True).reshape(-1)
        if not np.any(a != 0.0):
            raise ValueError("half-space normal must be nonzero")
        a.flags.writeable = False
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return self.normal.size

    def project(self, w):
        w = np.asarray(w, dtype=float).reshape(-1)
        r = float(self.normal @ w - self.offset)
        if r <= 0.0:
            return w.copy()
        return w - (r / (self.normal @ self.normal)) * self.normal

    def violation(self, w):
        w = np.asarray(w, dtype=float).reshape(-1)
        r = float(self.normal @ w - self.offset)
        return max(0.0, r) / float(np.linalg.norm(self.normal))

    def contains(self, w, tol: float = 0.0) -> bool:
        return self.violation(w) <= tol


@dataclass(frozen=True, eq=False)
class AffineHyperplane:
    """Affine set {normal . w = offset} in the base space."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        a = np.array(self.normal, dtype=float, copy=True).reshape(-1)
        if not np.any(a != 0.0):
            raise ValueError("hyperplane normal must be nonzero")
        a.flags.writeable = False
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return self.normal.size

    def project(self, w):
        w = np.asarray(w, dtype=float).reshape(-1)
        r = float(self.normal @ w - self.offset)
        return w - (r / (self.normal @ self.normal)) * self.normal

    def violation(self, w):
        w = np.asarray(w, dtype=float).reshape(-1)
        return abs(float(self.normal @ w - self.offset)) / float(np.linalg.norm(self.normal))

    def contains(self, w, tol: float = 0.0) -> bool:
        return self.violation(w) <= tol


ConstraintSet = Union[Box, L2Ball, Halfspace, AffineHyperplane]

_CONSTRAINT_KINDS = {
    "box": Box,
    "l2_ball": L2Ball,
    "halfspace": Halfspace,
    "affine_hyperplane": AffineHyperplane,
}


def make_constraint(kind: str, **params) -> ConstraintSet:
    """Build a constraint set from its kind name and keyword parameters."""
    try:
        cls = _CONSTRAINT_KINDS[kind]
    except KeyError:
        raise ValueError(
            f"unknown constraint kind {kind!r}; choose from {sorted(_CONSTRAINT_KINDS)}"
        ) from None
    return cls(**params)


def project_constraint(w, c: ConstraintSet) -> np.ndarray:
    """Exact orthogonal projection of a base vector onto a constraint set."""
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.size != c.dim:
        raise DimensionMismatchError(f"vector has dim {w.size}, constraint expects {c.dim}")
    return c.project(w)
