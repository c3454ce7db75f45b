"""Core domain types: lifted vectors, cost functions, sets, solver config.

The solvers work in a lifted space one dimension above the decision space:
a point pairs a base vector ``w`` in R^N with a scalar ``height`` carrying
cost units. Two sets drive everything: the region on or above a cost
function's graph (its epigraph) and the half-space of heights at or below a
floor value ``alpha`` (a level set).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError, DomainError

__all__ = [
    "LiftedVector",
    "CostFunction",
    "LevelSet",
    "EpigraphSet",
    "SolverConfig",
    "SolveResult",
    "IterationRecord",
    "Termination",
    "LEVEL_SET",
    "EPIGRAPH",
    "HYPERPLANE",
    "constraint_label",
    "membership",
]

# Which-set labels used in iteration traces.
LEVEL_SET = "level_set"
EPIGRAPH = "epigraph"
HYPERPLANE = "hyperplane"


def constraint_label(k: int) -> str:
    """Trace label for the k-th constraint set (0-based)."""
    return f"constraint_{k}"


class Termination(str, enum.Enum):
    """Why a solver stopped."""

    CONVERGED = "converged"
    ITERATION_CAP = "iteration_cap"
    STALLED_LIMIT_CYCLE = "stalled_limit_cycle"
    DOMAIN_ERROR = "domain_error"

    def __str__(self) -> str:  # log- and CSV-friendly
        return self.value


def _as_base_vector(x) -> np.ndarray:
    arr = np.array(x, dtype=float, copy=True).reshape(-1)
    if arr.size < 1:
        raise DimensionMismatchError("base vector must have dimension >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("base vector has non-finite components")
    arr.flags.writeable = False
    return arr


def _lifted_unchecked(base: np.ndarray, height: float) -> "LiftedVector":
    # Internal fast constructor for hot loops: ``base`` must be a float64
    # array the caller owns (it is frozen in place, not copied) with finite
    # entries from already-validated arithmetic.
    if base.flags.writeable:
        base.flags.writeable = False
    lv = object.__new__(LiftedVector)
    object.__setattr__(lv, "base", base)
    object.__setattr__(lv, "height", height)
    return lv


@dataclass(frozen=True, eq=False)
class LiftedVector:
    """A point in the lifted space: base vector plus a scalar height.

    The height carries the same units as cost values. Both parts are
    validated to be finite at construction so NaN/Inf handling stays local.
    """

    base: np.ndarray
    height: float

    def __post_init__(self):
        object.__setattr__(self, "base", _as_base_vector(self.base))
        h = float(self.height)
        if not np.isfinite(h):
            raise ValueError("height is non-finite")
        object.__setattr__(self, "height", h)

    @property
    def dim(self) -> int:
        """Dimension N of the base vector (the lifted point lives in R^{N+1})."""
        return self.base.size

    def as_array(self) -> np.ndarray:
        """The point as a flat length-(N+1) array: base components then height."""
        return np.concatenate([self.base, [self.height]])

    @staticmethod
    def from_array(arr) -> "LiftedVector":
        arr = np.asarray(arr, dtype=float).reshape(-1)
        if arr.size < 2:
            raise DimensionMismatchError("lifted array needs at least 2 entries")
        return LiftedVector(arr[:-1], float(arr[-1]))

    def __repr__(self):
        return f"LiftedVector(base={self.base.tolist()}, height={self.height})"


@dataclass(frozen=True, eq=False)
class CostFunction:
    """An evaluable cost f: R^N -> R with subgradient access.

    Parameters
    ----------
    dim : int
        Dimension N of the decision space.
    eval : callable
        Maps a length-N array to a finite float. Must be pure: evaluation is
        the package's concurrency contract, so no hidden mutable state.
    subgradient : callable
        Maps a length-N array to a length-N array. At non-differentiable
        points a valid selection is returned where one exists; raises
        :class:`SubgradientUnavailableError` where none does.
    convex : bool
        Whether ``eval`` is convex. Gates the exact epigraph projection.
    lower_bound : float, optional
        A known value <= inf f, used as the default level-set floor.
    name : str
        Short identifier used in problem files and printouts.
    prox : callable, optional
        ``prox(x, step) -> argmin_u step*f(u) + 0.5*||u - x||^2``. Supplied
        for costs with a cheap exact answer; enables the fast path of the
        generic epigraph projection.
    eval_batch : callable, optional
        Vectorized evaluation over a (P, N) array, returning length P. Used
        by the brute-force oracles; must agree with ``eval`` row-wise.
    structure : object, optional
        Marker describing special shape (affine, norm cone) that unlocks a
        closed-form epigraph projection.
    """

    dim: int
    eval: Callable[[np.ndarray], float]
    subgradient: Callable[[np.ndarray], np.ndarray]
    convex: bool
    lower_bound: Optional[float] = None
    name: str = "cost"
    prox: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    eval_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None
    structure: Optional[object] = None

    def __post_init__(self):
        if int(self.dim) < 1:
            raise DimensionMismatchError("cost dimension must be >= 1")
        object.__setattr__(self, "dim", int(self.dim))

    def __call__(self, w) -> float:
        return self.eval(w)


@dataclass(frozen=True)
class LevelSet:
    """Half-space of lifted points whose height is at most ``alpha``."""

    alpha: float

    def __post_init__(self):
        if not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        object.__setattr__(self, "alpha", float(self.alpha))

    def contains(self, p: LiftedVector) -> bool:
        """Exact membership test: height <= alpha (closed set)."""
        return p.height <= self.alpha


@dataclass(frozen=True, eq=False)
class EpigraphSet:
    """Lifted points on or above the graph of a cost function."""

    cost: CostFunction

    def contains(self, p: LiftedVector) -> bool:
        """Exact membership test: height >= f(base); out-of-domain bases are not members."""
        if p.dim != self.cost.dim:
            raise DimensionMismatchError(
                f"point has dim {p.dim}, epigraph expects {self.cost.dim}"
            )
        try:
            return p.height >= self.cost.eval(p.base)
        except DomainError:
            return False


def membership(s: Union[LevelSet, EpigraphSet], p: LiftedVector) -> bool:
    """Whether ``p`` belongs to the set, under exact (tolerance-0) comparison."""
    return s.contains(p)


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by all solvers.

    Parameters
    ----------
    lambda_ : float
        Relaxation of hyperplane projections, in (0, 2); 1 is orthogonal.
    step_tolerance : float
        Stop when the base vector moves less than this over one full cycle.
    max_iterations : int
        Work budget. Traces hold at most ``2*max_iterations + 2`` records;
        solvers stop with ``iteration_cap`` when the budget runs out. (An
        alternating-projection cycle records 2 points, a hyperplane cycle 3,
        and fallback bounces 1 each.)
    alpha : float, optional
        Level-set floor. Defaults to the cost's ``lower_bound`` when that is
        set, else 0. Any iterate observed with f below ``alpha`` raises
        :class:`ConfigurationError`, since the floor must under-estimate f.
    alpha_growth : float
        Additive per-stalled-cycle enlargement of ``alpha`` in constrained
        mode; 0 disables.
    fallback_max_bounces : int
        Cap on the two-hyperplane inner loop.
    """

    lambda_: float = 1.0
    step_tolerance: float = 1e-6
    max_iterations: int = 10_000
    alpha: Optional[float] = None
    alpha_growth: float = 0.0
    fallback_max_bounces: int = 32

    def __post_init__(self):
        if not (0.0 < self.lambda_ < 2.0):
            raise ConfigurationError(f"lambda must lie in (0, 2), got {self.lambda_}")
        if not (self.step_tolerance > 0.0):
            raise ConfigurationError("step_tolerance must be > 0")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if self.alpha is not None and not np.isfinite(self.alpha):
            raise ConfigurationError("alpha must be finite when given")
        if self.alpha_growth < 0.0:
            raise ConfigurationError("alpha_growth must be >= 0")
        if self.fallback_max_bounces < 1:
            raise ConfigurationError("fallback_max_bounces must be >= 1")

    def resolve_alpha(self, cost: CostFunction) -> float:
        """The level-set floor for ``cost``: explicit alpha, else lower_bound, else 0."""
        if self.alpha is not None:
            return float(self.alpha)
        if cost.lower_bound is not None:
            return float(cost.lower_bound)
        return 0.0


@dataclass(frozen=True)
class IterationRecord:
    """One projected point in an iteration trace."""

    index: int
    point: LiftedVector
    which_set: str
    cost_value: float
    note: Optional[str] = None


@dataclass
class SolveResult:
    """Outcome of a solve: minimizer, its cost, why we stopped, full trace."""

    minimizer: np.ndarray
    min_value: float
    termination: Termination
    trace: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        """Number of recorded trace points."""
        return len(self.trace)
