"""Min-max-distance multi-robot planning on the hex roadmap.

Robots are fully distinguishable and move synchronously: at every step
each robot stays put or crosses one edge, no two robots may occupy a
vertex together, and no pair may swap across an edge (rotations along
longer cycles are legal).  The objective minimizes the maximum number of
moves any single robot makes, with total moves as the secondary objective.

Two solvers are provided:

* plan_min_max_dist -- iterative deepening on the bottleneck bound with an
  A* search over the joint space (heuristic: max over robots of the
  single-robot BFS distance to goal).  Exact.
* brute_force_plan -- heuristic-free breadth-first enumeration of the
  joint space, layered by the bottleneck bound.  Slower, used as the
  verification oracle.
"""

from __future__ import annotations

import heapq
import json
import math
from collections import deque
from dataclasses import dataclass

from .hexgrid import HexGrid
from .paths import TimedPath, Waypoint


class InfeasibleError(ValueError):
    pass


class OverPackedError(ValueError):
    pass


class InstanceTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class MultiRobotProblem:
    grid: HexGrid
    starts: tuple[int, ...]
    goals: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.starts) != len(self.goals):
            raise ValueError("starts and goals must have equal length")
        if len(set(self.starts)) != len(self.starts):
            raise ValueError("starts must be pairwise distinct")
        if len(set(self.goals)) != len(self.goals):
            raise ValueError("goals must be pairwise distinct")
        n = len(self.grid.vertices)
        for v in (*self.starts, *self.goals):
            if not 0 <= v < n:
                raise ValueError(f"vertex index {v} out of range")

    @property
    def n_robots(self) -> int:
        return len(self.starts)


@dataclass(frozen=True)
class JointPlan:
    """Synchronized vertex schedule: steps[k][i] is robot i's vertex at step k."""

    steps: tuple[tuple[int, ...], ...]
    max_moves: int

    def robot_path(self, i: int) -> tuple[int, ...]:
        return tuple(step[i] for step in self.steps)


def validate_plan(problem: MultiRobotProblem, plan: JointPlan) -> None:
    """Independent structural check of every JointPlan invariant.

    Raises ValueError on the first violation; used by tests against both
    solvers.
    """
    steps = plan.steps
    if not steps:
        raise ValueError("empty plan")
    if steps[0] != problem.starts:
        raise ValueError("plan does not start at starts")
    if steps[-1] != problem.goals:
        raise ValueError("plan does not end at goals")
    grid = problem.grid
    moves = [0] * problem.n_robots
    for step in steps:
        if len(set(step)) != len(step):
            raise ValueError("meet collision: duplicate vertex in a step")
    for prev, curr in zip(steps, steps[1:]):
        for i, (a, b) in enumerate(zip(prev, curr)):
            if a != b:
                if b not in grid.edges[a]:
                    raise ValueError(f"robot {i} jumps {a}->{b} (not an edge)")
                moves[i] += 1
        for i in range(len(prev)):
            for j in range(i + 1, len(prev)):
                if prev[i] == curr[j] and prev[j] == curr[i] and prev[i] != prev[j]:
                    raise ValueError(f"head-on swap between robots {i} and {j}")
    if max(moves) != plan.max_moves:
        raise ValueError(f"max_moves {plan.max_moves} != recomputed {max(moves)}")


def _bfs_distances(grid: HexGrid, source: int) -> list[float]:
    dist = [math.inf] * len(grid.vertices)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in grid.edges[v]:
            if dist[w] == math.inf:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def _joint_successors(grid, config, n):
    """All collision-free joint moves from `config`, excluding all-stay.

    Per robot the options are stay-first then neighbors in ascending vertex
    order, and robots are expanded in index order, so enumeration order is
    the lexicographic tie-break.
    """
    options = [(config[i],) + grid.edges[config[i]] for i in range(n)]

    def rec(i, chosen):
        if i == n:
            if tuple(chosen) != config:
                yield tuple(chosen)
            return
        for v in options[i]:
            if v in chosen:
                continue
            ok = True
            for j in range(i):
                # head-on swap with an already-placed robot
                if chosen[j] == config[i] and v == config[j] and v != config[i]:
                    ok = False
                    break
            if ok:
                chosen.append(v)
                yield from rec(i + 1, chosen)
                chosen.pop()

    yield from rec(0, [])


def plan_min_max_dist(problem: MultiRobotProblem) -> JointPlan:
    """Exact bottleneck-optimal joint plan via iterative deepening A*.

    For each candidate bound B (starting at the max single-robot shortest
    path) an A* over (positions, per-robot moves) searches for a plan where
    every robot makes at most B moves, minimizing total moves; the first
    feasible B is the optimal max_moves.
    """
    grid = problem.grid
    n = problem.n_robots
    if n >= len(grid.vertices):
        raise OverPackedError("as many robots as vertices")
    goal_dist = [_bfs_distances(grid, g) for g in problem.goals]
    lower = 0
    for i, s in enumerate(problem.starts):
        d = goal_dist[i][s]
        if math.isinf(d):
            raise InfeasibleError(f"goal of robot {i} unreachable from its start")
        lower = max(lower, int(d))
    bound_cap = len(grid.vertices) * n

    for bound in range(lower, bound_cap + 1):
        plan = _bounded_astar(problem, goal_dist, bound)
        if plan is not None:
            return plan
    raise InfeasibleError(f"no plan within bound {bound_cap}")


def _bounded_astar(problem, goal_dist, bound):
    grid = problem.grid
    n = problem.n_robots
    start_state = (problem.starts, (0,) * n)
    h0 = sum(int(goal_dist[i][problem.starts[i]]) for i in range(n))
    # priority: f = g_total + h_sum; FIFO counter keeps expansion stable so
    # the lexicographic successor order decides remaining ties
    heap = [(h0, 0, 0, start_state)]
    best_g = {start_state: 0}
    parent = {start_state: None}
    counter = 0
    while heap:
        f, _, g, state = heapq.heappop(heap)
        if g > best_g.get(state, math.inf):
            continue
        config, moves = state
        if config == problem.goals:
            return _reconstruct(parent, state, n)
        for succ in _joint_successors(grid, config, n):
            new_moves = list(moves)
            ok = True
            delta = 0
            for i, (a, b) in enumerate(zip(config, succ)):
                if a != b:
                    new_moves[i] += 1
                    delta += 1
                remaining = goal_dist[i][b]
                if new_moves[i] + remaining > bound:
                    ok = False
                    break
            if not ok:
                continue
            new_state = (succ, tuple(new_moves))
            new_g = g + delta
            if new_g < best_g.get(new_state, math.inf):
                best_g[new_state] = new_g
                parent[new_state] = state
                h = sum(int(goal_dist[i][succ[i]]) for i in range(n))
                counter += 1
                heapq.heappush(heap, (new_g + h, counter, new_g, new_state))
    return None


def _reconstruct(parent, state, n):
    steps = []
    while state is not None:
        steps.append(state[0])
        state = parent[state]
    steps.reverse()
    max_moves = 0
    for i in range(n):
        max_moves = max(
            max_moves, sum(1 for a, b in zip(steps, steps[1:]) if a[i] != b[i])
        )
    return JointPlan(steps=tuple(steps), max_moves=max_moves)


BRUTE_FORCE_MAX_ROBOTS = 3
BRUTE_FORCE_MAX_VERTICES = 19


def brute_force_plan(problem: MultiRobotProblem, successor_cache=None) -> JointPlan:
    """Verification oracle: heuristic-free BFS layered by the bottleneck bound.

    For B = 0, 1, 2, ... a plain breadth-first search enumerates every
    reachable (positions, moves) state with all move counts <= B; the first
    B at which the goals are reached is optimal by construction.  Guarded
    to <= 3 robots and <= 19 vertices.

    Joint successors depend on the configuration alone; `successor_cache`
    (a plain dict) may be passed in to share that work across calls that
    reuse the same grid and robot count.
    """
    grid = problem.grid
    n = problem.n_robots
    if n > BRUTE_FORCE_MAX_ROBOTS or len(grid.vertices) > BRUTE_FORCE_MAX_VERTICES:
        raise InstanceTooLargeError("oracle guard: <= 3 robots and <= 19 vertices")
    bound_cap = len(grid.vertices) * n
    if successor_cache is None:
        successor_cache = {}
    # every bound below the max single-robot shortest path provably fails,
    # so the layered search may start there without changing the result
    lower = 0
    for i, (s, g) in enumerate(zip(problem.starts, problem.goals)):
        d = _bfs_distances(grid, g)[s]
        if math.isinf(d):
            raise InfeasibleError(f"goal of robot {i} unreachable from its start")
        lower = max(lower, int(d))
    for bound in range(lower, bound_cap + 1):
        plan = _bounded_bfs(problem, bound, successor_cache)
        if plan is not None:
            return plan
    raise InfeasibleError(f"no plan within bound {bound_cap}")


# bit widths for the packed BFS state: 5 bits per vertex index (<= 19
# vertices) and 8 bits per move counter (bound_cap <= 3 * 19 = 57)
_VBITS = 5
_MBITS = 8


def _pack_config(config):
    packed = 0
    for i, v in enumerate(config):
        packed |= v << (_VBITS * i)
    return packed


def _unpack_config(packed, n):
    mask = (1 << _VBITS) - 1
    return tuple((packed >> (_VBITS * i)) & mask for i in range(n))


def _bounded_bfs(problem, bound, successor_cache):
    """One BFS layer of the oracle, over states packed into single ints.

    A state is config_bits << (n * _MBITS) | moves_bits; successors are
    cached per packed config as (packed successor, packed move increment,
    shifts of the counters that increment).
    """
    grid = problem.grid
    n = problem.n_robots
    mshift = n * _MBITS
    mmask = (1 << _MBITS) - 1
    goals_bits = _pack_config(problem.goals)
    start_state = _pack_config(problem.starts) << mshift
    parent = {start_state: None}
    queue = deque([start_state])
    while queue:
        state = queue.popleft()
        config_bits = state >> mshift
        if config_bits == goals_bits:
            return _reconstruct_packed(parent, state, n, mshift)
        successors = successor_cache.get((n, config_bits))
        if successors is None:
            config = _unpack_config(config_bits, n)
            successors = tuple(
                (
                    _pack_config(succ) << mshift,
                    sum(1 << (_MBITS * i) for i in range(n) if succ[i] != config[i]),
                    tuple(_MBITS * i for i in range(n) if succ[i] != config[i]),
                )
                for succ in _joint_successors(grid, config, n)
            )
            successor_cache[(n, config_bits)] = successors
        moves = state & ((1 << mshift) - 1)
        for succ_bits, inc, shifts in successors:
            for shift in shifts:
                if ((moves >> shift) & mmask) >= bound:
                    break
            else:
                new_state = succ_bits | (moves + inc)
                if new_state not in parent:
                    parent[new_state] = state
                    queue.append(new_state)
    return None


def _reconstruct_packed(parent, state, n, mshift):
    steps = []
    while state is not None:
        steps.append(_unpack_config(state >> mshift, n))
        state = parent[state]
    steps.reverse()
    max_moves = 0
    for i in range(n):
        max_moves = max(
            max_moves, sum(1 for a, b in zip(steps, steps[1:]) if a[i] != b[i])
        )
    return JointPlan(steps=tuple(steps), max_moves=max_moves)


def plan_to_timed_paths(
    plan: JointPlan, grid: HexGrid, nominal_speed: float
) -> list[TimedPath]:
    """Expand a joint plan into per-robot timed paths with a common
    timestamp grid: step k happens at k * (edge_length / nominal_speed).

    Stay steps become schedule holds (repeated coordinates with advancing
    timestamps), keeping all robots synchronized."""
    if nominal_speed <= 0.0:
        raise ValueError("nominal_speed must be positive")
    step_dt = grid.edge_length_e / nominal_speed
    paths = []
    n = len(plan.steps[0])
    for i in range(n):
        wps = []
        for k, step in enumerate(plan.steps):
            x, y = grid.vertices[step[i]]
            wps.append(Waypoint(x, y, k * step_dt))
        if len(wps) == 1:
            # single-step plan (start == goal): hold in place for one step
            wps.append(Waypoint(wps[0].x, wps[0].y, step_dt))
        paths.append(TimedPath(wps))
    return paths


def problem_to_ndjson(problem: MultiRobotProblem) -> str:
    """Serialize problem grid + endpoints as NDJSON for record/replay."""
    lines = [
        json.dumps(
            {
                "kind": "grid",
                "edge_length_e": problem.grid.edge_length_e,
                "vertices": [[x, y] for x, y in problem.grid.vertices],
                "edges": [list(nbrs) for nbrs in problem.grid.edges],
            },
            separators=(",", ":"),
        ),
        json.dumps(
            {"kind": "endpoints", "starts": list(problem.starts), "goals": list(problem.goals)},
            separators=(",", ":"),
        ),
    ]
    return "\n".join(lines) + "\n"


def plan_to_ndjson(plan: JointPlan) -> str:
    lines = [json.dumps({"kind": "plan", "max_moves": plan.max_moves}, separators=(",", ":"))]
    for k, step in enumerate(plan.steps):
        lines.append(json.dumps({"kind": "step", "k": k, "vertices": list(step)}, separators=(",", ":")))
    return "\n".join(lines) + "\n"
