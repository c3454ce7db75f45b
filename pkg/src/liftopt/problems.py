"""Problem spec files: a flat INI format describing cost, solver and config.

Grammar (see README for the full reference)::

    [problem]                 required: name, solver
    name = quadratic-1d
    solver = epigraph         ; epigraph | hyperplane | constrained | nonconvex

    [cost]                    required: kind, dim
    kind = l2sq               ; l1 | l2sq | tv | fv | entropy | lp
    dim = 1
    center = 3                ; optional, space-separated floats
    taps = -1 1               ; fv only
    p = 0.5                   ; lp only
    offset = 1                ; optional additive constant

    [init]                    required: point
    point = 0

    [config]                  optional, defaults from SolverConfig
    lambda = 1.0
    step_tolerance = 1e-6
    max_iterations = 20000
    alpha = 0
    alpha_growth = 0
    fallback_max_bounces = 32

    [constraints]             constrained solver only; one set per key
    c1 = box 0 1              ; lower... upper...     (dim values each)
    c2 = l2_ball 3 0 1        ; center... radius
    c3 = halfspace -1 -1 -2   ; normal... offset      (normal . w <= offset)
    c4 = affine_hyperplane 1 1 2  ; normal... offset  (normal . w = offset)

    [oracle]                  optional; enables pass/fail comparisons
    box = -10 10              ; one lo/hi pair, or 2*dim values for per-axis
    points_per_axis = 1001
    tolerance = 1e-4
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .costs import COST_FAMILIES, build_cost
from .errors import SpecFileError
from .oracles import grid_oracle
from .projections import AffineHyperplane, Box, ConstraintSet, Halfspace, L2Ball
from .solvers import (
    solve_constrained,
    solve_nonconvex,
    solve_pocs_epigraph,
    solve_supporting_hyperplane,
)
from .types import CostFunction, SolveResult, SolverConfig

__all__ = ["OracleSpec", "ProblemSpec", "parse_problem_file", "solve_problem",
           "oracle_minimum"]

SOLVER_NAMES = ("epigraph", "hyperplane", "constrained", "nonconvex")


@dataclass(frozen=True)
class OracleSpec:
    box: np.ndarray  # (dim, 2)
    points_per_axis: int
    tolerance: float


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    solver: str
    cost_kind: str
    dim: int
    initial_point: np.ndarray
    config: SolverConfig
    center: Optional[np.ndarray] = None
    taps: Optional[np.ndarray] = None
    p: Optional[float] = None
    offset: float = 0.0
    constraints: list = field(default_factory=list)
    oracle: Optional[OracleSpec] = None


def _floats(text: str, where: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split()], dtype=float)
    except ValueError as exc:
        raise SpecFileError(f"{where}: expected space-separated numbers, got {text!r}") from exc


def _parse_constraint(key: str, value: str, dim: int) -> ConstraintSet:
    where = f"[constraints] {key}"
    parts = value.split()
    if not parts:
        raise SpecFileError(f"{where}: empty constraint")
    kind, nums = parts[0], _floats(" ".join(parts[1:]), where)
    try:
        if kind == "box":
            if nums.size != 2 * dim:
                raise SpecFileError(f"{where}: box needs {2 * dim} numbers (lower then upper)")
            return Box(nums[:dim], nums[dim:])
        if kind == "l2_ball":
            if nums.size != dim + 1:
                raise SpecFileError(f"{where}: l2_ball needs {dim} center values plus a radius")
            return L2Ball(nums[:dim], nums[dim])
        if kind == "halfspace":
            if nums.size != dim + 1:
                raise SpecFileError(f"{where}: halfspace needs {dim} normal values plus an offset")
            return Halfspace(nums[:dim], nums[dim])
        if kind == "affine_hyperplane":
            if nums.size != dim + 1:
                raise SpecFileError(f"{where}: affine_hyperplane needs {dim} normal values plus an offset")
            return AffineHyperplane(nums[:dim], nums[dim])
    except ValueError as exc:
        raise SpecFileError(f"{where}: {exc}") from exc
    raise SpecFileError(f"{where}: unknown constraint kind {kind!r}")


def parse_problem_file(path) -> ProblemSpec:
    """Read and validate a problem spec file; errors name section and field."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        read = cp.read(path)
    except configparser.Error as exc:
        raise SpecFileError(f"{path}: {exc}") from exc
    if not read:
        raise SpecFileError(f"{path}: file not found or unreadable")

    def need(section, key):
        if not cp.has_option(section, key):
            raise SpecFileError(f"{path}: missing [{section}] {key}")
        return cp.get(section, key).strip()

    name = need("problem", "name")
    solver = need("problem", "solver")
    if solver not in SOLVER_NAMES:
        raise SpecFileError(f"{path}: [problem] solver must be one of {SOLVER_NAMES}")

    kind = need("cost", "kind")
    if kind not in COST_FAMILIES:
        raise SpecFileError(f"{path}: [cost] kind must be one of {COST_FAMILIES}")
    try:
        dim = cp.getint("cost", "dim")
    except (configparser.Error, ValueError) as exc:
        raise SpecFileError(f"{path}: [cost] dim: {exc}") from exc

    def opt_floats(section, key):
        if cp.has_option(section, key):
            return _floats(cp.get(section, key), f"[{section}] {key}")
        return None

    def opt_float(section, key, default=None):
        if cp.has_option(section, key):
            try:
                return cp.getfloat(section, key)
            except ValueError as exc:
                raise SpecFileError(f"{path}: [{section}] {key}: {exc}") from exc
        return default

    center = opt_floats("cost", "center")
    taps = opt_floats("cost", "taps")
    p = opt_float("cost", "p")
    offset = opt_float("cost", "offset", 0.0)

    point = _floats(need("init", "point"), "[init] point")
    if point.size != dim:
        raise SpecFileError(f"{path}: [init] point has {point.size} values, cost dim is {dim}")

    cfg_kwargs = {}
    if cp.has_section("config"):
        mapping = {
            "lambda": ("lambda_", float),
            "step_tolerance": ("step_tolerance", float),
            "max_iterations": ("max_iterations", int),
            "alpha": ("alpha", float),
            "alpha_growth": ("alpha_growth", float),
            "fallback_max_bounces": ("fallback_max_bounces", int),
        }
        for key in cp.options("config"):
            if key not in mapping:
                raise SpecFileError(f"{path}: [config] unknown key {key!r}")
            attr, conv = mapping[key]
            try:
                cfg_kwargs[attr] = conv(cp.get("config", key))
            except ValueError as exc:
                raise SpecFileError(f"{path}: [config] {key}: {exc}") from exc
    try:
        config = SolverConfig(**cfg_kwargs)
    except ValueError as exc:
        raise SpecFileError(f"{path}: [config]: {exc}") from exc

    constraints = []
    if cp.has_section("constraints"):
        for key in cp.options("constraints"):
            constraints.append(_parse_constraint(key, cp.get("constraints", key), dim))
    if solver == "constrained" and not constraints:
        raise SpecFileError(f"{path}: constrained solver needs a [constraints] section")

    oracle = None
    if cp.has_section("oracle"):
        nums = _floats(need("oracle", "box"), "[oracle] box")
        if nums.size == 2:
            box = np.tile(nums, (dim, 1))
        elif nums.size == 2 * dim:
            box = nums.reshape(dim, 2)
        else:
            raise SpecFileError(f"{path}: [oracle] box needs 2 or {2 * dim} numbers")
        ppa = int(opt_float("oracle", "points_per_axis", 101))
        tol = opt_float("oracle", "tolerance", 1e-4)
        oracle = OracleSpec(box=box, points_per_axis=ppa, tolerance=tol)

    return ProblemSpec(name=name, solver=solver, cost_kind=kind, dim=dim,
                       initial_point=point, config=config, center=center,
                       taps=taps, p=p, offset=offset, constraints=constraints,
                       oracle=oracle)


def build_problem_cost(spec: ProblemSpec) -> CostFunction:
    try:
        return build_cost(spec.cost_kind, spec.dim, center=spec.center,
                          taps=spec.taps, p=spec.p, offset=spec.offset)
    except ValueError as exc:
        raise SpecFileError(f"[cost]: {exc}") from exc


def solve_problem(spec: ProblemSpec, cost: Optional[CostFunction] = None) -> SolveResult:
    """Run the spec's solver on its problem."""
    cost = build_problem_cost(spec) if cost is None else cost
    if spec.solver == "epigraph":
        return solve_pocs_epigraph(cost, spec.initial_point, spec.config)
    if spec.solver == "hyperplane":
        return solve_supporting_hyperplane(cost, spec.initial_point, spec.config)
    if spec.solver == "constrained":
        return solve_constrained(cost, spec.constraints, spec.initial_point, spec.config)
    return solve_nonconvex(cost, spec.initial_point, spec.config)


def _batch_contains(c: ConstraintSet, pts: np.ndarray) -> np.ndarray:
    tol = 1e-12
    if isinstance(c, Box):
        return np.all((pts >= c.lower - tol) & (pts <= c.upper + tol), axis=1)
    if isinstance(c, L2Ball):
        return np.linalg.norm(pts - c.center, axis=1) <= c.radius + tol
    if isinstance(c, Halfspace):
        return pts @ c.normal <= c.offset + tol * np.linalg.norm(c.normal)
    if isinstance(c, AffineHyperplane):
        return np.abs(pts @ c.normal - c.offset) <= tol * np.linalg.norm(c.normal)
    raise TypeError(f"unknown constraint type {type(c)!r}")


def oracle_minimum(spec: ProblemSpec, cost: Optional[CostFunction] = None):
    """The spec's declared brute-force oracle: (argmin, min_value)."""
    if spec.oracle is None:
        raise SpecFileError(f"problem {spec.name!r} declares no [oracle] section")
    cost = build_problem_cost(spec) if cost is None else cost
    feasible = None
    if spec.constraints:
        sets = list(spec.constraints)

        def feasible(pts, _sets=sets):
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            mask = np.ones(pts.shape[0], dtype=bool)
            for c in _sets:
                mask &= _batch_contains(c, pts)
            return mask

    return grid_oracle(cost, spec.oracle.box, spec.oracle.points_per_axis,
                       feasible=feasible)
