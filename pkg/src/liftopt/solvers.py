"""Minimization by alternating projections in the lifted space.

Two solver families:

* :func:`solve_pocs_epigraph` alternates exact orthogonal projections
  between the level set {height <= alpha} and the epigraph of a convex
  cost. The iterates settle into the oscillation between the two nearest
  points of the sets, whose shared base vector is the minimizer.

* :func:`solve_supporting_hyperplane` replaces the (possibly expensive)
  epigraph projection with a projection onto the supporting hyperplane at
  the current graph point, built from one subgradient. A descent check
  guards each cycle; on failure the iterate bounces between the last two
  supporting hyperplanes until it finds a better point.

:func:`solve_constrained` interleaves projections onto extra constraint
sets, optionally enlarging the level-set floor when cycles stall, and
:func:`solve_nonconvex` runs the hyperplane schedule with tangential
(non-supporting) planes, which experimentally still lands in cusp-shaped
minima when the relaxation is kept small.

All solvers are deterministic: identical inputs produce bit-identical
traces.
"""

from __future__ import annotations

from collections import deque
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DimensionMismatchError,
    DomainError,
    NumericalError,
    SubgradientUnavailableError,
    UnsupportedOperationError,
)
from .projections import (
    DEFAULT_EPIGRAPH_TOL,
    ConstraintSet,
    Hyperplane,
    _project_epigraph_impl,
    project_constraint,
    project_hyperplane,
    project_level_set,
)
from .types import (
    EPIGRAPH,
    HYPERPLANE,
    LEVEL_SET,
    CostFunction,
    EpigraphSet,
    IterationRecord,
    LevelSet,
    LiftedVector,
    SolveResult,
    SolverConfig,
    Termination,
    constraint_label,
    _lifted_unchecked,
)

__all__ = [
    "solve_pocs_epigraph",
    "solve_supporting_hyperplane",
    "fallback_two_hyperplanes",
    "solve_constrained",
    "solve_nonconvex",
]

# Cycles with no strictly lower graph height before the non-convex schedule
# declares itself stalled.
_NONCONVEX_STALL_CYCLES = 10
_FEASIBILITY_TOL = 1e-9


def _dist(a: np.ndarray, b: np.ndarray) -> float:
    d = a - b
    return float(np.sqrt(d @ d))


class _TraceBuilder:
    """Append-only trace with the 2*max_iterations + 2 record budget."""

    def __init__(self, max_iterations: int):
        self.records: list[IterationRecord] = []
        self.budget = 2 * max_iterations + 2

    def room(self, n: int = 1) -> bool:
        return len(self.records) + n <= self.budget

    def add(self, point: LiftedVector, which_set: str, cost_value: float,
            note: Optional[str] = None) -> None:
        self.records.append(IterationRecord(
            index=len(self.records), point=point, which_set=which_set,
            cost_value=float(cost_value), note=note,
        ))


def _start_vector(f: CostFunction, w0) -> np.ndarray:
    w = np.asarray(w0, dtype=float).reshape(-1)
    if w.size != f.dim:
        raise DimensionMismatchError(f"start has dim {w.size}, cost expects {f.dim}")
    return w.copy()


def _check_floor(value: float, alpha: float) -> None:
    # tiny slack so exact minima do not trip the check through roundoff
    if value < alpha - 1e-9 * max(1.0, abs(alpha)):
        raise ConfigurationError(
            f"observed cost {value:.6g} below the level-set floor alpha={alpha:.6g}; "
            "alpha must under-estimate the minimum"
        )


def solve_pocs_epigraph(f: CostFunction, w0, cfg: SolverConfig) -> SolveResult:
    """Minimize a convex cost by alternating level-set/epigraph projections.

    Starting from the graph point of ``w0``, each cycle clamps the height to
    the floor ``alpha`` and projects back onto the epigraph. Terminates when
    the base vector moves less than ``cfg.step_tolerance`` over a cycle, or
    when the record budget runs out.

    Parameters
    ----------
    f : CostFunction
        Must be convex (the exact epigraph projection needs it) with
        ``f >= alpha`` everywhere; the floor assumption is checked on every
        iterate and a violation raises :class:`ConfigurationError`.
    w0 : array_like
        Start vector of dimension ``f.dim``.
    cfg : SolverConfig

    Returns
    -------
    SolveResult
        ``minimizer`` is the base of the last epigraph-side iterate and
        ``min_value`` is recomputed as ``f(minimizer)`` at exit.
    """
    if not f.convex:
        raise UnsupportedOperationError(
            "solve_pocs_epigraph needs a convex cost; use solve_nonconvex instead"
        )
    alpha = cfg.resolve_alpha(f)
    w = _start_vector(f, w0)
    fw = f.eval(w)
    _check_floor(fw, alpha)

    trace = _TraceBuilder(cfg.max_iterations)
    level = LevelSet(alpha)
    epi = EpigraphSet(f)
    p = LiftedVector(w, fw)
    termination = Termination.ITERATION_CAP
    mu_hint = None

    while trace.room(2):
        p_level = project_level_set(p, level)
        trace.add(p_level, LEVEL_SET, fw)
        try:
            q, mu, f_new = _project_epigraph_impl(p_level, epi, DEFAULT_EPIGRAPH_TOL, mu_hint)
        except NumericalError as exc:
            exc.trace = trace.records
            raise
        if mu is not None:
            mu_hint = mu
        try:
            if f_new is None:
                f_new = f.eval(q.base)
        except DomainError:
            termination = Termination.DOMAIN_ERROR
            break
        _check_floor(f_new, alpha)
        trace.add(q, EPIGRAPH, f_new)
        move = float(np.linalg.norm(q.base - w))
        w, fw, p = q.base, f_new, q
        if move < cfg.step_tolerance:
            termination = Termination.CONVERGED
            break

    return SolveResult(minimizer=np.array(w), min_value=f.eval(w),
                       termination=termination, trace=trace.records)


def _plane_at(f: CostFunction, anchor: LiftedVector) -> tuple[Hyperplane, Optional[str]]:
    """Supporting/tangential plane at a graph point; horizontal where no
    finite subgradient exists."""
    try:
        g = np.asarray(f.subgradient(anchor.base), dtype=float).reshape(-1)
        note = None
    except SubgradientUnavailableError:
        g = np.zeros(anchor.dim)
        note = "flat_plane"
    return Hyperplane(np.concatenate([g, [-1.0]]), anchor), note


def _two_plane_bounce(f: CostFunction, anchor_prev: LiftedVector,
                      anchor_bad: LiftedVector, cfg: SolverConfig):
    """Alternate projections onto the planes at the two anchors.

    Returns ``(point, events, improved)`` where ``point`` is a graph point,
    ``events`` collects the intermediate projections for the trace, and
    ``improved`` says whether the exit cost is strictly below the cost at
    ``anchor_prev``.
    """
    target = f.eval(anchor_prev.base)
    plane_prev, _ = _plane_at(f, anchor_prev)
    plane_bad, _ = _plane_at(f, anchor_bad)
    cur = anchor_bad
    best = LiftedVector(anchor_bad.base, f.eval(anchor_bad.base))
    events = []
    for b in range(cfg.fallback_max_bounces):
        plane = plane_prev if b % 2 == 0 else plane_bad
        nxt = project_hyperplane(cur, plane, cfg.lambda_)
        fu = f.eval(nxt.base)
        moved = bool(np.any(nxt.as_array() != cur.as_array()))
        cur = nxt
        events.append([nxt, fu, "fallback"])
        if fu < best.height:
            best = LiftedVector(nxt.base, fu)
        if fu < target:
            return best, events, True
        if not moved and b % 2 == 1:
            break  # both planes leave the point fixed; nothing more to find
    if events:
        events[-1][2] = "fallback_exhausted"
    return best, events, False


def fallback_two_hyperplanes(f: CostFunction, anchor_prev: LiftedVector,
                             anchor_bad: LiftedVector, cfg: SolverConfig) -> LiftedVector:
    """Recover descent by bouncing between two supporting hyperplanes.

    Used when a hyperplane cycle produced ``f(anchor_bad) > f(anchor_prev)``:
    the current point is projected alternately onto the planes supporting
    the graph at the two anchors until its drop-and-lift onto the graph
    costs strictly less than ``f(anchor_prev)``, or the bounce cap is hit,
    in which case the best graph point seen is returned.
    """
    point, _, _ = _two_plane_bounce(f, anchor_prev, anchor_bad, cfg)
    return point


def _hyperplane_engine(f: CostFunction, w0, cfg: SolverConfig, *,
                       nonconvex: bool,
                       constraints: Optional[Sequence[ConstraintSet]] = None) -> SolveResult:
    alpha = cfg.resolve_alpha(f)
    w = _start_vector(f, w0)
    fw = f.eval(w)
    _check_floor(fw, alpha)

    trace = _TraceBuilder(cfg.max_iterations)
    p = LiftedVector(w, fw)
    w = p.base  # frozen copy shared with the trace
    best_w, best_f = w, fw
    f_prev_cycle = fw
    cycle_ends: deque = deque(maxlen=4)
    stall = 0
    best_height = fw
    termination = Termination.ITERATION_CAP
    out_of_room = False

    while trace.room(3):
        try:
            # (i) drop the running point to the level set
            p_level = _lifted_unchecked(w, min(p.height, alpha))
            trace.add(p_level, LEVEL_SET, fw)
            # (ii) lift the base back onto the graph
            lift = _lifted_unchecked(w, fw)
            trace.add(lift, EPIGRAPH, fw)
            # (iii)+(iv) supporting plane at the graph point from one
            # subgradient, then the relaxed projection of the level-set point
            # onto it. Inlined from project_hyperplane: with normal (g, -1)
            # the residual at the level point is f(w) - height.
            try:
                g = np.asarray(f.subgradient(w), dtype=float).reshape(-1)
                note = None
            except SubgradientUnavailableError:
                g = np.zeros(w.size)
                note = "flat_plane"
            scale = cfg.lambda_ * (fw - p_level.height) / (float(g @ g) + 1.0)
            w_new = w - scale * g
            point_new = _lifted_unchecked(w_new, p_level.height + scale)
            f_new = f.eval(w_new)
            trace.add(point_new, HYPERPLANE, f_new, note)

            # descent check against the previous cycle's graph cost
            if f_new >= f_prev_cycle:
                bounced, events, improved = _two_plane_bounce(
                    f, lift, LiftedVector(w_new, f_new), cfg)
                for pt, fv, nt in events:
                    if not trace.room(1):
                        out_of_room = True
                        break
                    trace.add(pt, HYPERPLANE, fv, nt)
                if out_of_room:
                    break
                if improved or nonconvex:
                    w_new, f_new, point_new = bounced.base, bounced.height, bounced
                else:
                    # convex schedule with an exhausted fallback: the two sets
                    # admit no further descent step, stop at the best point
                    termination = Termination.STALLED_LIMIT_CYCLE
                    break

            # constrained mode: push the base through each constraint set
            if constraints is not None:
                wc = w_new
                height = point_new.height
                for k, cset in enumerate(constraints):
                    wc = project_constraint(wc, cset)
                    f_new = f.eval(wc)
                    if not trace.room(1):
                        out_of_room = True
                        break
                    trace.add(_lifted_unchecked(wc, height), constraint_label(k), f_new)
                if out_of_room:
                    break
                w_new = wc
                point_new = _lifted_unchecked(wc, height)
        except DomainError:
            termination = Termination.DOMAIN_ERROR
            break

        _check_floor(f_new, alpha)

        # enlarge the floor when a constrained cycle made no progress
        if constraints is not None and cfg.alpha_growth > 0.0 and f_new >= f_prev_cycle:
            alpha += cfg.alpha_growth

        d = w_new - w
        move = float(np.sqrt(d @ d))
        w, fw, p = point_new.base, f_new, point_new
        f_prev_cycle = f_new
        if f_new < best_f:
            best_w, best_f = w, f_new
        cycle_ends.append(w)

        if move < cfg.step_tolerance:
            termination = Termination.CONVERGED
            break
        if len(cycle_ends) == 4:
            b1, b2, b3, b4 = cycle_ends
            tol = cfg.step_tolerance
            if (_dist(b4, b2) <= tol and _dist(b3, b1) <= tol
                    and _dist(b4, b3) > tol):
                termination = Termination.STALLED_LIMIT_CYCLE
                break
        if nonconvex:
            if fw < best_height:
                best_height = fw
                stall = 0
            else:
                stall += 1
                if stall >= _NONCONVEX_STALL_CYCLES:
                    termination = Termination.STALLED_LIMIT_CYCLE
                    break

    minimizer = best_w
    if constraints is not None:
        minimizer = _feasibility_polish(minimizer, constraints)
    return SolveResult(minimizer=np.array(minimizer), min_value=f.eval(minimizer),
                       termination=termination, trace=trace.records)


def _feasibility_polish(w: np.ndarray, constraints: Sequence[ConstraintSet]) -> np.ndarray:
    """Cyclic projections until every constraint is met to a tight tolerance."""
    w = np.array(w, dtype=float)
    for _ in range(10_000):
        if max(c.violation(w) for c in constraints) <= _FEASIBILITY_TOL:
            break
        for c in constraints:
            w = project_constraint(w, c)
    return w


def solve_supporting_hyperplane(f: CostFunction, w0, cfg: SolverConfig) -> SolveResult:
    """Minimize via relaxed projections onto supporting hyperplanes.

    Each cycle drops the point to the level set, lifts it onto the graph,
    builds the supporting hyperplane there from one subgradient, and
    projects the level-set point onto that plane with relaxation
    ``cfg.lambda_``. If a cycle fails to decrease the cost, the two-plane
    fallback (:func:`fallback_two_hyperplanes`) searches the last two
    supporting planes for a better point. Stops on the step tolerance over
    a full cycle, a detected two-point limit cycle, or the record budget.

    The returned ``minimizer`` is the best graph point recorded, with
    ``min_value`` recomputed at exit.
    """
    return _hyperplane_engine(f, w0, cfg, nonconvex=False)


def solve_constrained(f: CostFunction, constraints: Sequence[ConstraintSet],
                      w0, cfg: SolverConfig) -> SolveResult:
    """Supporting-hyperplane cycles interleaved with constraint projections.

    After each hyperplane cycle the base vector is projected through the
    constraint sets in order. Cycles that fail to decrease the cost enlarge
    the level-set floor by ``cfg.alpha_growth`` (0 disables). The returned
    minimizer is polished to lie in every constraint set.
    """
    constraints = list(constraints)
    if not constraints:
        raise ConfigurationError("solve_constrained needs at least one constraint set")
    for c in constraints:
        if c.dim != f.dim:
            raise DimensionMismatchError(
                f"constraint expects dim {c.dim}, cost has dim {f.dim}")
    return _hyperplane_engine(f, w0, cfg, nonconvex=False, constraints=constraints)


def solve_nonconvex(f: CostFunction, w0, cfg: SolverConfig) -> SolveResult:
    """The hyperplane schedule with tangential planes for non-convex costs.

    Identical to :func:`solve_supporting_hyperplane` except that the planes
    are not assumed to support the graph: a failed fallback episode keeps
    exploring from its best bounce point instead of stopping, and the run
    also terminates once the graph height has not improved for
    10 consecutive cycles. No global-optimality guarantee; small
    relaxations (``cfg.lambda_`` well below 1) damp the overshoot around
    cusp minima.
    """
    return _hyperplane_engine(f, w0, cfg, nonconvex=True)
