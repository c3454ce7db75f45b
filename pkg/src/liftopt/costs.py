"""Cost function library: l1, squared l2, total variation, filtered
variation, entropic, and signed-power (|.|^p, p < 1) families.

Every factory returns a :class:`~liftopt.types.CostFunction` bundling
evaluation, an explicit subgradient selection, a convexity flag, a known
lower bound, and (where cheap) an exact proximal map used by the epigraph
projection. Subgradients at kinks pick the 0 element, which makes the
supporting hyperplane through such a point horizontal along the flat
directions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw, xlogy

from .errors import DimensionMismatchError, DomainError, SubgradientUnavailableError
from .types import CostFunction

__all__ = [
    "FirFilter",
    "AffineStructure",
    "NormConeStructure",
    "make_l1",
    "make_l2_squared",
    "make_total_variation",
    "make_filtered_variation",
    "make_entropic",
    "make_lp",
    "make_affine",
    "make_l2_norm",
    "with_offset",
    "COST_FAMILIES",
    "build_cost",
]


@dataclass(frozen=True, eq=False)
class FirFilter:
    """A finite impulse response filter given by its taps."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.array(self.taps, dtype=float, copy=True).reshape(-1)
        if taps.size < 1:
            raise ValueError("filter needs at least one tap")
        if not np.all(np.isfinite(taps)):
            raise ValueError("filter taps must be finite")
        if np.all(taps == 0.0):
            raise ValueError("filter needs at least one nonzero tap")
        taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)

    def __len__(self):
        return self.taps.size


@dataclass(frozen=True, eq=False)
class AffineStructure:
    """Marks f(w) = coeffs . w + offset (epigraph is a half-space)."""

    coeffs: np.ndarray
    offset: float


@dataclass(frozen=True, eq=False)
class NormConeStructure:
    """Marks f(w) = ||w - center||_2 (epigraph is a shifted second-order cone)."""

    center: np.ndarray


def _vec(w, dim: int) -> np.ndarray:
    arr = np.asarray(w, dtype=float).reshape(-1)
    if arr.size != dim:
        raise DimensionMismatchError(f"expected a vector of dim {dim}, got {arr.size}")
    return arr


def _mat(points, dim: int) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise DimensionMismatchError(f"expected an array of shape (P, {dim})")
    return arr


def make_l1(dim: int) -> CostFunction:
    """Sum of absolute values. Subgradient is the sign vector, 0 at zeros."""
    if dim < 1:
        raise DimensionMismatchError("dim must be >= 1")

    def eval_(w):
        return float(np.sum(np.abs(_vec(w, dim))))

    def subgradient(w):
        return np.sign(_vec(w, dim))

    def prox(x, mu):
        x = _vec(x, dim)
        return np.sign(x) * np.maximum(np.abs(x) - mu, 0.0)

    def eval_batch(points):
        return np.sum(np.abs(_mat(points, dim)), axis=1)

    return CostFunction(dim=dim, eval=eval_, subgradient=subgradient, convex=True,
                        lower_bound=0.0, name="l1", prox=prox, eval_batch=eval_batch)


def make_l2_squared(dim: int, center) -> CostFunction:
    """Squared Euclidean distance to ``center``; the smooth convex test bowl."""
    c = _vec(center, dim)

    def eval_(w):
        d = _vec(w, dim) - c
        return float(d @ d)

    def subgradient(w):
        return 2.0 * (_vec(w, dim) - c)

    def prox(x, mu):
        # stationarity u - x + 2 mu (u - c) = 0
        return (_vec(x, dim) + 2.0 * mu * c) / (1.0 + 2.0 * mu)

    def eval_batch(points):
        d = _mat(points, dim) - c
        return np.sum(d * d, axis=1)

    return CostFunction(dim=dim, eval=eval_, subgradient=subgradient, convex=True,
                        lower_bound=0.0, name="l2sq", prox=prox, eval_batch=eval_batch)


class _AnalysisL1:
    """f(w) = ||C w||_1 for a fixed matrix C, with its exact proximal map.

    The prox solves min_u step*||C u||_1 + 0.5*||u - x||^2 through the dual
    box-constrained quadratic: min_z 0.5*||x - C^T z||^2 over |z_k| <= step,
    by exact cyclic coordinate descent (each 1-D subproblem is a clipped
    closed form). Sign chatter in a primal fixed-point iteration makes that
    route unreliable at kinks; the dual is smooth and converges cleanly.
    """

    def __init__(self, dim, C):
        self.dim = dim
        self.C = np.asarray(C, dtype=float)
        self.row_sq = np.sum(self.C * self.C, axis=1)

    def eval(self, w):
        return float(np.sum(np.abs(self.C @ _vec(w, self.dim))))

    def eval_batch(self, points):
        return np.sum(np.abs(_mat(points, self.dim) @ self.C.T), axis=1)

    def subgradient(self, w):
        return self.C.T @ np.sign(self.C @ _vec(w, self.dim))

    def prox(self, x, mu, max_sweeps=10_000, tol=1e-14):
        x = _vec(x, self.dim)
        if mu <= 0.0:
            return x.copy()
        C = self.C
        z = np.zeros(C.shape[0])
        r = x.copy()  # residual x - C^T z
        scale = max(1.0, mu)
        for _ in range(max_sweeps):
            biggest = 0.0
            for k in range(C.shape[0]):
                zk = min(max(z[k] + (C[k] @ r) / self.row_sq[k], -mu), mu)
                d = zk - z[k]
                if d != 0.0:
                    r -= d * C[k]
                    z[k] = zk
                    biggest = max(biggest, abs(d))
            if biggest < tol * scale:
                break
        return r


def _difference_matrix(dim: int) -> np.ndarray:
    D = np.zeros((dim - 1, dim))
    for k in range(dim - 1):
        D[k, k] = -1.0
        D[k, k + 1] = 1.0
    return D


def make_total_variation(dim: int) -> CostFunction:
    """Sum of absolute consecutive differences of a 1-D signal.

    Constant signals are the zero set; the subgradient chains signs of the
    differences, choosing 0 at ties.
    """
    if dim < 2:
        raise DimensionMismatchError("total variation needs dim >= 2")
    core = _AnalysisL1(dim, _difference_matrix(dim))
    return CostFunction(dim=dim, eval=core.eval, subgradient=core.subgradient,
                        convex=True, lower_bound=0.0, name="tv",
                        prox=core.prox, eval_batch=core.eval_batch)


def make_filtered_variation(dim: int, filt: FirFilter) -> CostFunction:
    """l1 norm of the valid-mode convolution of the signal with ``filt``.

    With taps [-1, 1] this coincides exactly with total variation; with a
    single-tap identity filter it degenerates to the l1 cost.
    """
    taps = filt.taps
    m = taps.size
    if dim < m:
        raise DimensionMismatchError(
            f"signal dim {dim} is shorter than the filter ({m} taps)"
        )
    # rows are the reversed taps, shifted: (C w)_k = sum_j taps[j] w[k+m-1-j]
    C = np.zeros((dim - m + 1, dim))
    rev = taps[::-1]
    for k in range(dim - m + 1):
        C[k, k:k + m] = rev
    core = _AnalysisL1(dim, C)
    return CostFunction(dim=dim, eval=core.eval, subgradient=core.subgradient,
                        convex=True, lower_bound=0.0, name="fv",
                        prox=core.prox, eval_batch=core.eval_batch)


def _lambert_w_exp(a):
    """W(e^a) for scalar a, stable for any magnitude of a."""
    if a > 700.0:
        la = np.log(a)
        return a - la + la / a  # two-term asymptotic of W(e^a)
    if a < -700.0:
        return np.exp(a)  # W(z) ~ z for z ~ 0
    return float(np.real(lambertw(np.exp(a))))


def _entropy_prox(x, mu, dim):
    # stationarity u + mu*log(u) = x - mu, solved by the Lambert W function:
    # u = mu * W(exp((x - mu)/mu - log mu)); evaluated in log space so large
    # arguments do not overflow.
    x = _vec(x, dim)
    if mu <= 1e-300:
        return np.maximum(x, 0.0)
    log_mu = np.log(mu)
    if dim <= 4:
        return np.array([mu * _lambert_w_exp((xi - mu) / mu - log_mu) for xi in x])
    a = (x - mu) / mu - log_mu
    out = np.empty_like(x)
    hi = a > 700.0
    lo = a < -700.0
    mid = ~(hi | lo)
    if np.any(hi):
        ah = a[hi]
        la = np.log(ah)
        out[hi] = mu * (ah - la + la / ah)
    if np.any(lo):
        out[lo] = mu * np.exp(a[lo])
    if np.any(mid):
        out[mid] = mu * np.real(lambertw(np.exp(a[mid])))
    return out


def make_entropic(dim: int) -> CostFunction:
    """Sum of w_i log w_i over the nonnegative orthant.

    The boundary contribution at w_i = 0 is the limit value 0. Evaluation
    raises :class:`DomainError` for negative components; the subgradient
    additionally raises :class:`SubgradientUnavailableError` on the boundary,
    where no finite supporting slope exists.
    """
    if dim < 1:
        raise DimensionMismatchError("dim must be >= 1")

    def eval_(w):
        w = _vec(w, dim)
        if np.any(w < 0.0):
            raise DomainError("entropic cost needs nonnegative components")
        return float(np.sum(xlogy(w, w)))

    def subgradient(w):
        w = _vec(w, dim)
        if np.any(w < 0.0):
            raise DomainError("entropic cost needs nonnegative components")
        if np.any(w == 0.0):
            raise SubgradientUnavailableError(
                "entropic cost has no finite subgradient at the boundary"
            )
        return 1.0 + np.log(w)

    def eval_batch(points):
        pts = _mat(points, dim)
        if np.any(pts < 0.0):
            raise DomainError("entropic cost needs nonnegative components")
        return np.sum(xlogy(pts, pts), axis=1)

    return CostFunction(dim=dim, eval=eval_, subgradient=subgradient, convex=True,
                        lower_bound=-dim / np.e, name="entropy",
                        prox=lambda x, mu: _entropy_prox(x, mu, dim),
                        eval_batch=eval_batch)


def make_lp(dim: int, p: float, center) -> CostFunction:
    """Sum of |w_i - center_i|^p with 0 < p < 1; non-convex with a cusp minimum.

    The derivative formula is used as a tangential "subgradient", with the
    0 convention at the cusp itself.
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p}")
    c = _vec(center, dim)

    def eval_(w):
        return float(np.sum(np.abs(_vec(w, dim) - c) ** p))

    def subgradient(w):
        d = _vec(w, dim) - c
        out = np.zeros(dim)
        nz = d != 0.0
        out[nz] = p * np.sign(d[nz]) * np.abs(d[nz]) ** (p - 1.0)
        return out

    def eval_batch(points):
        return np.sum(np.abs(_mat(points, dim) - c) ** p, axis=1)

    return CostFunction(dim=dim, eval=eval_, subgradient=subgradient, convex=False,
                        lower_bound=0.0, name="lp", eval_batch=eval_batch)


def make_affine(coeffs, offset: float = 0.0) -> CostFunction:
    """f(w) = coeffs . w + offset; its epigraph is a half-space."""
    a = np.asarray(coeffs, dtype=float).reshape(-1)
    dim = a.size

    def eval_(w):
        return float(a @ _vec(w, dim) + offset)

    def subgradient(w):
        _vec(w, dim)
        return a.copy()

    return CostFunction(dim=dim, eval=eval_, subgradient=subgradient,
                        convex=True, lower_bound=None, name="affine",
                        eval_batch=lambda pts: _mat(pts, dim) @ a + offset,
                        structure=AffineStructure(a, float(offset)))


def make_l2_norm(center) -> CostFunction:
    """f(w) = ||w - center||_2; its epigraph is a shifted second-order cone."""
    c = np.asarray(center, dtype=float).reshape(-1)
    dim = c.size

    def eval_(w):
        return float(np.linalg.norm(_vec(w, dim) - c))

    def subgradient(w):
        d = _vec(w, dim) - c
        n = np.linalg.norm(d)
        return d / n if n > 0.0 else np.zeros(dim)

    def prox(x, mu):
        d = _vec(x, dim) - c
        n = np.linalg.norm(d)
        if n <= mu:
            return c.copy()
        return c + (1.0 - mu / n) * d

    return CostFunction(dim=dim, eval=eval_, subgradient=subgradient, convex=True,
                        lower_bound=0.0, name="l2norm", prox=prox,
                        eval_batch=lambda pts: np.linalg.norm(_mat(pts, dim) - c, axis=1),
                        structure=NormConeStructure(c))


def with_offset(cost: CostFunction, constant: float) -> CostFunction:
    """The cost shifted by an additive constant (subgradient and prox unchanged)."""
    constant = float(constant)
    if constant == 0.0:
        return cost
    structure = cost.structure
    if isinstance(structure, AffineStructure):
        structure = AffineStructure(structure.coeffs, structure.offset + constant)
    elif structure is not None:
        structure = None  # closed forms below assume an unshifted graph

    return CostFunction(
        dim=cost.dim,
        eval=lambda w: cost.eval(w) + constant,
        subgradient=cost.subgradient,
        convex=cost.convex,
        lower_bound=None if cost.lower_bound is None else cost.lower_bound + constant,
        name=f"{cost.name}+{constant:g}",
        prox=cost.prox,
        eval_batch=(None if cost.eval_batch is None
                    else lambda pts: cost.eval_batch(pts) + constant),
        structure=structure,
    )


COST_FAMILIES = ("l1", "l2sq", "tv", "fv", "entropy", "lp")


def build_cost(kind: str, dim: int, center=None, taps=None, p=None,
               offset: float = 0.0) -> CostFunction:
    """Construct a cost family by its string name (the CLI surface).

    ``center`` defaults to the origin where relevant; ``taps`` is required
    for "fv" and ``p`` for "lp"; ``offset`` adds a constant to any family.
    """
    if kind == "l1":
        cost = make_l1(dim)
    elif kind == "l2sq":
        cost = make_l2_squared(dim, np.zeros(dim) if center is None else center)
    elif kind == "tv":
        cost = make_total_variation(dim)
    elif kind == "fv":
        if taps is None:
            raise ValueError("filtered variation needs filter taps")
        cost = make_filtered_variation(dim, FirFilter(taps))
    elif kind == "entropy":
        cost = make_entropic(dim)
    elif kind == "lp":
        if p is None:
            raise ValueError("lp cost needs the exponent p")
        cost = make_lp(dim, p, np.zeros(dim) if center is None else center)
    else:
        raise ValueError(f"unknown cost family {kind!r}; choose from {COST_FAMILIES}")
    return with_offset(cost, offset)
