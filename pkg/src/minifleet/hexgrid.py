"""Hexagonal-connectivity roadmap over the workspace.

The roadmap is a regular triangular lattice: interior vertices have six
neighbors at a uniform edge length e derived from the vehicle footprint
(e = clearance_factor * body_radius).  The lattice is cropped to the
workspace rectangle with a wall margin of one body radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .vehicle import Pose2D, VehicleParams

EDGE_REL_TOL = 1e-9


class WorkspaceTooSmallError(ValueError):
    pass


class SnapError(ValueError):
    pass


@dataclass(frozen=True)
class HexGrid:
    """Vertex coordinates plus adjacency; every edge has length edge_length_e."""

    vertices: tuple[tuple[float, float], ...]
    edges: tuple[tuple[int, ...], ...]
    edge_length_e: float

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.edges[v]

    def __len__(self) -> int:
        return len(self.vertices)


def build_hex_grid(
    workspace: tuple[float, float],
    params: VehicleParams,
    clearance_factor: float = 3.0,
) -> HexGrid:
    """Crop a triangular lattice with edge e = clearance_factor*body_radius
    into the workspace rectangle, keeping a body_radius margin from walls.

    Rows are spaced e*sqrt(3)/2 apart with odd rows offset by e/2.  Raises
    WorkspaceTooSmallError if fewer than 2 vertices fit.
    """
    width, height = workspace
    if width <= 0.0 or height <= 0.0:
        raise ValueError("workspace must have positive area")
    if clearance_factor < 2.0:
        raise ValueError("clearance_factor must be >= 2")
    e = clearance_factor * params.body_radius
    margin = params.body_radius
    x_lo, x_hi = margin, width - margin
    y_lo, y_hi = margin, height - margin

    row_pitch = e * math.sqrt(3.0) / 2.0
    vertices: list[tuple[float, float]] = []
    index: dict[tuple[int, int], int] = {}
    row = 0
    while True:
        y = y_lo + row * row_pitch
        if y > y_hi + EDGE_REL_TOL:
            break
        x_off = (row % 2) * e / 2.0
        col = 0
        while True:
            x = x_lo + x_off + col * e
            if x > x_hi + EDGE_REL_TOL:
                break
            index[(row, col)] = len(vertices)
            vertices.append((x, y))
            col += 1
        row += 1
    if len(vertices) < 2:
        raise WorkspaceTooSmallError(
            f"workspace {width}x{height} m too small for edge length {e} m"
        )

    adjacency: list[list[int]] = [[] for _ in vertices]
    for (row, col), i in index.items():
        if (row % 2) == 0:
            below = ((row + 1, col - 1), (row + 1, col))
        else:
            below = ((row + 1, col), (row + 1, col + 1))
        for key in ((row, col + 1),) + below:
            j = index.get(key)
            if j is not None:
                adjacency[i].append(j)
                adjacency[j].append(i)
    return HexGrid(
        vertices=tuple(vertices),
        edges=tuple(tuple(sorted(nbrs)) for nbrs in adjacency),
        edge_length_e=e,
    )


def snap_to_grid(grid: HexGrid, poses: list[Pose2D]) -> list[int]:
    """Bind live vehicle poses to distinct grid vertices.

    Vehicles claim their nearest free vertex in increasing order of that
    distance (ties by vehicle id).  Raises SnapError when two poses sit
    closer together than half an edge length, which makes the assignment
    ill-posed.
    """
    for i, a in enumerate(poses):
        for b in poses[i + 1 :]:
            if math.hypot(a.x - b.x, a.y - b.y) < grid.edge_length_e / 2.0:
                raise SnapError("two poses closer than edge_length_e/2")
    if len(poses) > len(grid.vertices):
        raise SnapError("more poses than grid vertices")

    # each vehicle's vertices sorted by distance (vertex index breaks ties)
    ranked = [
        sorted(
            range(len(grid.vertices)),
            key=lambda v, p=pose: (math.hypot(grid.vertices[v][0] - p.x, grid.vertices[v][1] - p.y), v),
        )
        for pose in poses
    ]
    assignment: list[int | None] = [None] * len(poses)
    taken: set[int] = set()
    cursor = [0] * len(poses)
    while any(a is None for a in assignment):
        # among unassigned vehicles, the one whose nearest free vertex is
        # closest claims it first
        best = None
        for vid, a in enumerate(assignment):
            if a is not None:
                continue
            while ranked[vid][cursor[vid]] in taken:
                cursor[vid] += 1
            v = ranked[vid][cursor[vid]]
            d = math.hypot(
                grid.vertices[v][0] - poses[vid].x, grid.vertices[v][1] - poses[vid].y
            )
            if best is None or (d, vid) < best[:2]:
                best = (d, vid, v)
        _, vid, v = best
        assignment[vid] = v
        taken.add(v)
    return assignment  # type: ignore[return-value]
