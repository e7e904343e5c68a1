"""Incremental waypoint planner: outer loop over the Cartesian path, inner
tracking loop per waypoint.

Each waypoint is reached by the SafeTrack loop: while the tool-point residual
exceeds the equality threshold or the configuration is in collision, build
the collision half-space at the current reference, linearize the contact
equality there, solve the QP that stays closest (in the weighted norm) to the
current reference, and move the reference to its solution. The QP objective
is anchored at the current reference rather than the previous waypoint;
anchoring at the previous waypoint can pin the iterate against the
constraint set and stall the loop.

Cartesian steps larger than ``step_max`` are split into intermediate targets
before tracking, and a waypoint whose inner loop fails to converge is retried
through recursive bisection of the step (bounded depth) before the planner
gives up loudly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cfs import convexify_collision
from .equality import linearize_task
from .geometry import CapsuleSet, Scene, scene_distance
from .kinematics import NUM_JOINTS, RobotChain, body_point_position, joint_config, tool_tip
from .qp import STATUS_OPTIMAL, QpProblem, QpSettings, solve

STATUS_CONVERGED = "CONVERGED"
STATUS_NON_CONVERGED = "NON_CONVERGED"


@dataclass(frozen=True)
class PlannerParams:
    """Weights, thresholds and limits consumed by the tracking loops."""

    q_diag: np.ndarray
    joint_lower: np.ndarray
    joint_upper: np.ndarray
    xi: float = 1e-4
    max_inner: int = 50
    step_max: float = 0.05
    per_capsule_rows: bool = False
    rounds: int = 1
    bisect_depth: int = 3
    margin: float = 0.0
    qp_settings: QpSettings = field(default_factory=QpSettings)

    def __post_init__(self) -> None:
        q_diag = np.array(self.q_diag, dtype=float).reshape(-1)
        lower = np.array(self.joint_lower, dtype=float).reshape(-1)
        upper = np.array(self.joint_upper, dtype=float).reshape(-1)
        if q_diag.shape != (NUM_JOINTS,) or np.any(q_diag <= 0):
            raise ValueError("q_diag must be 6 positive weights")
        if lower.shape != (NUM_JOINTS,) or upper.shape != (NUM_JOINTS,):
            raise ValueError("joint limits must be 6-vectors")
        if np.any(lower > upper):
            raise ValueError("joint_lower exceeds joint_upper")
        if not self.xi > 0:
            raise ValueError("xi must be positive")
        if self.max_inner < 1:
            raise ValueError("max_inner must be >= 1")
        if not self.step_max > 0:
            raise ValueError("step_max must be positive")
        if self.rounds < 1 or self.bisect_depth < 0:
            raise ValueError("rounds must be >= 1 and bisect_depth >= 0")
        for arr in (q_diag, lower, upper):
            arr.flags.writeable = False
        object.__setattr__(self, "q_diag", q_diag)
        object.__setattr__(self, "joint_lower", lower)
        object.__setattr__(self, "joint_upper", upper)


@dataclass(frozen=True)
class SafeTrackResult:
    q: np.ndarray
    status: str
    inner_iterations: int
    tcp_error: float
    min_distance: float

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED


@dataclass(frozen=True)
class Trajectory:
    """Planned joint states with per-step diagnostics."""

    states: np.ndarray  # (T, 6)
    tcp_error: np.ndarray  # (T,)
    min_distance: np.ndarray  # (T,)
    inner_iterations: np.ndarray  # (T,) int
    solve_time: np.ndarray  # (T,) seconds

    def __post_init__(self) -> None:
        T = self.states.shape[0]
        for name in ("tcp_error", "min_distance", "inner_iterations", "solve_time"):
            if getattr(self, name).shape != (T,):
                raise ValueError(f"diagnostic {name} length mismatch")

    def __len__(self) -> int:
        return self.states.shape[0]


class NonConvergedError(RuntimeError):
    """Raised when a waypoint cannot be reached after bisection retries."""

    def __init__(self, waypoint_index: int, tcp_error: float, min_distance: float):
        self.waypoint_index = waypoint_index
        self.tcp_error = tcp_error
        self.min_distance = min_distance
        super().__init__(
            f"waypoint {waypoint_index} did not converge "
            f"(tcp_error={tcp_error:.3e}, min_distance={min_distance:.3e})"
        )


def safetrack(
    q_pre,
    c_next,
    chain: RobotChain,
    capsules: CapsuleSet,
    scene: Scene,
    params: PlannerParams,
) -> SafeTrackResult:
    """Track one Cartesian target from q_pre; returns the best iterate found.

    Convergence means the tool-point residual is at or below xi and the scene
    distance is non-negative. Zero QP solves happen when q_pre already
    satisfies both.
    """
    tool = tool_tip(chain)
    c_next = np.asarray(c_next, dtype=float)
    x_ref = joint_config(q_pre)
    c_ref = body_point_position(x_ref, chain, tool)
    witness = scene_distance(x_ref, chain, capsules, scene)
    residual = float(np.linalg.norm(c_next - c_ref))
    best = (x_ref, residual, witness.value)

    iterations = 0
    while (residual > params.xi or witness.value < 0.0) and iterations < params.max_inner:
        rows = convexify_collision(
            x_ref, chain, capsules, scene,
            per_capsule_rows=params.per_capsule_rows, margin=params.margin,
        )
        eq = linearize_task(x_ref, c_ref, c_next, chain, tool)
        problem = QpProblem.from_reference(
            params.q_diag, x_ref, eq=eq, ineq=tuple(rows),
            lower=params.joint_lower, upper=params.joint_upper,
        )
        sol = solve(problem, params.qp_settings)
        iterations += 1
        if sol.status != STATUS_OPTIMAL:
            break
        if float(np.max(np.abs(sol.x - x_ref))) < 1e-15:
            break  # stalled: QP returned the reference itself
        x_ref = sol.x
        c_ref = body_point_position(x_ref, chain, tool)
        witness = scene_distance(x_ref, chain, capsules, scene)
        residual = float(np.linalg.norm(c_next - c_ref))
        better_feasible = witness.value >= 0.0 and (best[2] < 0.0 or residual < best[1])
        rescued = witness.value > best[2] and best[2] < 0.0
        if better_feasible or rescued:
            best = (x_ref, residual, witness.value)

    if residual <= params.xi and witness.value >= 0.0:
        return SafeTrackResult(x_ref, STATUS_CONVERGED, iterations, residual, witness.value)
    q_best, res_best, dist_best = best
    return SafeTrackResult(q_best, STATUS_NON_CONVERGED, iterations, res_best, dist_best)


def _advance(
    q_from: np.ndarray,
    target: np.ndarray,
    chain: RobotChain,
    capsules: CapsuleSet,
    scene: Scene,
    params: PlannerParams,
    depth: int,
):
    """Reach target from q_from, splitting long steps and bisecting on failure."""
    tool = tool_tip(chain)
    c_from = body_point_position(q_from, chain, tool)
    gap = float(np.linalg.norm(target - c_from))
    if gap > params.step_max:
        pieces = math.ceil(gap / params.step_max)
        q, total = q_from, 0
        for i in range(1, pieces + 1):
            sub_target = c_from + (i / pieces) * (target - c_from)
            q, iters = _advance(q, sub_target, chain, capsules, scene, params, depth)
            total += iters
        return q, total

    result = safetrack(q_from, target, chain, capsules, scene, params)
    if result.converged:
        return result.q, result.inner_iterations
    if depth < params.bisect_depth:
        mid = 0.5 * (c_from + target)
        q_mid, it1 = _advance(q_from, mid, chain, capsules, scene, params, depth + 1)
        q_end, it2 = _advance(q_mid, target, chain, capsules, scene, params, depth + 1)
        return q_end, result.inner_iterations + it1 + it2
    raise NonConvergedError(-1, result.tcp_error, result.min_distance)


def plan(
    weld_path,
    q_init,
    chain: RobotChain,
    capsules: CapsuleSet,
    scene: Scene,
    params: PlannerParams,
) -> Trajectory:
    """Plan the full trajectory over the Cartesian waypoint sequence.

    States chain from waypoint to waypoint; every emitted state satisfies the
    tracking threshold, a positive scene distance and the joint limits.
    """
    path = np.asarray(weld_path, dtype=float)
    if path.ndim != 2 or path.shape[1] != 3 or path.shape[0] == 0:
        raise ValueError("weld_path must be a non-empty (T, 3) array")
    q0 = joint_config(q_init)
    if np.any(q0 < params.joint_lower - 1e-12) or np.any(q0 > params.joint_upper + 1e-12):
        raise ValueError("q_init violates the joint limits")
    tool = tool_tip(chain)

    T = path.shape[0]
    states = np.zeros((T, NUM_JOINTS))
    tcp_error = np.zeros(T)
    min_distance = np.zeros(T)
    inner_iterations = np.zeros(T, dtype=int)
    solve_time = np.zeros(T)

    warm: np.ndarray | None = None
    for _ in range(params.rounds):
        q = q0
        for t in range(T):
            start = time.perf_counter()
            q_start = warm[t] if warm is not None else q
            try:
                q, iters = _advance(q_start, path[t], chain, capsules, scene, params, depth=0)
            except NonConvergedError as err:
                raise NonConvergedError(t, err.tcp_error, err.min_distance) from None
            solve_time[t] = time.perf_counter() - start
            states[t] = q
            tcp_error[t] = float(np.linalg.norm(path[t] - body_point_position(q, chain, tool)))
            min_distance[t] = scene_distance(q, chain, capsules, scene).value
            inner_iterations[t] = iters
        warm = states.copy()

    return Trajectory(
        states=states,
        tcp_error=tcp_error,
        min_distance=min_distance,
        inner_iterations=inner_iterations,
        solve_time=solve_time,
    )


def verify_trajectory(traj: Trajectory, params: PlannerParams) -> list[str]:
    """Per-step check of the acceptance invariant; returns violation messages."""
    problems = []
    for t in range(len(traj)):
        if traj.tcp_error[t] > params.xi:
            problems.append(f"step {t}: tcp_error {traj.tcp_error[t]:.3e} > xi {params.xi:.3e}")
        if not traj.min_distance[t] > 0.0:
            problems.append(f"step {t}: min_distance {traj.min_distance[t]:.3e} not positive")
        state = traj.states[t]
        if np.any(state < params.joint_lower - 1e-12) or np.any(state > params.joint_upper + 1e-12):
            problems.append(f"step {t}: joint limits violated")
    return problems
