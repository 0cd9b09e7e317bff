"""Uniform hexahedral meshes of axis-aligned cubic boxes.

The solver works on a cubic box split into n x n x n congruent cells.
Everything is enumerated lexicographically so that degree-of-freedom
numbering, face ordering and assembly are reproducible run to run:

* elements: grid coordinates (ix, iy, iz), index ix*n^2 + iy*n + iz
* vertices: grid coordinates on the (n+1)^3 lattice, same ordering
* interior faces: grouped by normal axis (x, y, z), within an axis by
  the grid position of the lower-indexed element; the stored normal is
  the outward normal of that lower-indexed element (the "owner")
* boundary faces: after all interior faces, grouped by axis, min side
  before max side, lexicographic within a side; normal points out of
  the domain

Only cubic boxes are accepted: the plane-wave basis and the penalty
scaling assume a single mesh size h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Box",
    "Element",
    "Face",
    "Mesh",
    "build_uniform_mesh",
    "mesh_vertices",
]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by its two extreme corners."""

    min_corner: np.ndarray
    max_corner: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min_corner, dtype=float).copy()
        hi = np.asarray(self.max_corner, dtype=float).copy()
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValueError("box corners must be 3-vectors")
        if not np.all(hi > lo):
            raise ValueError(
                "degenerate box: max_corner must exceed min_corner in every axis"
            )
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)

    @property
    def extent(self) -> np.ndarray:
        return self.max_corner - self.min_corner

    def is_cubic(self, rtol: float = 1e-12) -> bool:
        e = self.extent
        return float(np.ptp(e)) <= rtol * float(np.max(e))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask for points inside the closed box."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((pts >= self.min_corner) & (pts <= self.max_corner), axis=1)


@dataclass(frozen=True)
class Element:
    index: int
    grid: tuple  # (ix, iy, iz)
    bounds: Box

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.bounds.min_corner + self.bounds.max_corner)


@dataclass(frozen=True)
class Face:
    """A mesh face.

    Interior faces carry the owner's outward normal (owner = the
    adjacent element with the smaller index); the neighbor sees the
    reversed normal.  Boundary faces have neighbor None and the domain's
    outward normal.  ``lo``/``hi`` bound the face rectangle; they agree
    in the ``axis`` component.
    """

    id: int
    kind: str  # "interior" or "boundary"
    owner: int
    neighbor: int | None
    axis: int  # normal axis, 0..2
    normal: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    @property
    def area(self) -> float:
        span = self.hi - self.lo
        t1, t2 = [a for a in range(3) if a != self.axis]
        return float(span[t1] * span[t2])

    @property
    def corners(self) -> np.ndarray:
        """The four corners in cyclic order."""
        t1, t2 = [a for a in range(3) if a != self.axis]
        c = np.tile(self.lo, (4, 1))
        c[1, t1] = self.hi[t1]
        c[2, t1] = self.hi[t1]
        c[2, t2] = self.hi[t2]
        c[3, t2] = self.hi[t2]
        return c


@dataclass(frozen=True)
class Mesh:
    box: Box
    n: int
    h: float
    elements: list
    interior_faces: list
    boundary_faces: list
    vertices: np.ndarray

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def faces(self) -> list:
        return self.interior_faces + self.boundary_faces

    def element_at(self, ix: int, iy: int, iz: int) -> int:
        n = self.n
        return (ix * n + iy) * n + iz

    def containing_elements(self, points: np.ndarray) -> np.ndarray:
        """Element index for each point, clamping to the domain.

        Points on an interior grid plane are attributed to the element
        on the upper side (floor convention), except at the top of the
        domain where clamping keeps them inside.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        rel = (pts - self.box.min_corner) / self.h
        cells = np.clip(np.floor(rel).astype(int), 0, self.n - 1)
        n = self.n
        return (cells[:, 0] * n + cells[:, 1]) * n + cells[:, 2]


def build_uniform_mesh(box: Box, n: int) -> Mesh:
    """Split a cubic box into an n x n x n hexahedral mesh."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"subdivision count must be a positive integer, got {n!r}")
    if not box.is_cubic():
        raise ValueError(
            f"only cubic boxes are supported, got extents {box.extent.tolist()}"
        )
    n = int(n)
    h = float(box.extent[0]) / n
    lo = box.min_corner

    # Grid planes per axis; endpoints are reproduced exactly.
    grid = np.array([np.linspace(lo[a], box.max_corner[a], n + 1) for a in range(3)])

    elements = []
    for ix in range(n):
        for iy in range(n):
            for iz in range(n):
                bounds = Box(
                    (grid[0, ix], grid[1, iy], grid[2, iz]),
                    (grid[0, ix + 1], grid[1, iy + 1], grid[2, iz + 1]),
                )
                elements.append(
                    Element(index=len(elements), grid=(ix, iy, iz), bounds=bounds)
                )

    def _eid(gx, gy, gz):
        return (gx * n + gy) * n + gz

    axes = np.eye(3)
    interior = []
    fid = 0
    for axis in range(3):
        t1, t2 = [a for a in range(3) if a != axis]
        for ia in range(n - 1):
            for i1 in range(n):
                for i2 in range(n):
                    g = [0, 0, 0]
                    g[axis], g[t1], g[t2] = ia, i1, i2
                    owner = _eid(*g)
                    g[axis] = ia + 1
                    nb = _eid(*g)
                    flo = np.empty(3)
                    fhi = np.empty(3)
                    flo[axis] = fhi[axis] = grid[axis, ia + 1]
                    flo[t1], fhi[t1] = grid[t1, i1], grid[t1, i1 + 1]
                    flo[t2], fhi[t2] = grid[t2, i2], grid[t2, i2 + 1]
                    interior.append(
                        Face(
                            id=fid,
                            kind="interior",
                            owner=owner,
                            neighbor=nb,
                            axis=axis,
                            normal=axes[axis].copy(),
                            lo=flo,
                            hi=fhi,
                        )
                    )
                    fid += 1

    boundary = []
    for axis in range(3):
        t1, t2 = [a for a in range(3) if a != axis]
        for side in (0, 1):
            ia = 0 if side == 0 else n - 1
            plane = grid[axis, 0] if side == 0 else grid[axis, n]
            sign = -1.0 if side == 0 else 1.0
            for i1 in range(n):
                for i2 in range(n):
                    g = [0, 0, 0]
                    g[axis], g[t1], g[t2] = ia, i1, i2
                    flo = np.empty(3)
                    fhi = np.empty(3)
                    flo[axis] = fhi[axis] = plane
                    flo[t1], fhi[t1] = grid[t1, i1], grid[t1, i1 + 1]
                    flo[t2], fhi[t2] = grid[t2, i2], grid[t2, i2 + 1]
                    boundary.append(
                        Face(
                            id=fid,
                            kind="boundary",
                            owner=_eid(*g),
                            neighbor=None,
                            axis=axis,
                            normal=sign * axes[axis],
                            lo=flo,
                            hi=fhi,
                        )
                    )
                    fid += 1

    m = n + 1
    vx, vy, vz = np.meshgrid(grid[0], grid[1], grid[2], indexing="ij")
    vertices = np.stack([vx.ravel(), vy.ravel(), vz.ravel()], axis=1)
    vertices.flags.writeable = False
    assert vertices.shape == (m**3, 3)

    return Mesh(
        box=box,
        n=n,
        h=h,
        elements=elements,
        interior_faces=interior,
        boundary_faces=boundary,
        vertices=vertices,
    )


def mesh_vertices(mesh: Mesh) -> np.ndarray:
    """All mesh vertices, lexicographic in (ix, iy, iz), shape (n+1)^3 x 3."""
    return mesh.vertices
