"""Periodic staggered grid and the solid / fluid / exterior decomposition.

The computational box is the flat torus [-L, L)^d with ``n`` cells per axis.
Storage locations follow a Yee-type staggering:

* cell scalars live at cell centers ``x_i = -L + (i + 1/2) h``;
* component ``a`` of a face vector lives at the center shifted by ``+h/2``
  along axis ``a``;
* an edge quantity for the axis pair ``(a, b)`` lives at the center shifted by
  ``+h/2`` along both ``a`` and ``b`` (in 2-D the single pair is a cell corner).

All arrays are indexed ``[i, j(, k)]`` with ``i`` running along ``x``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np


class GeometryError(ValueError):
    """Invalid grid or shape parameters."""


class Region(enum.IntEnum):
    EXT = 0
    FLUID = 1
    INT = 2


@dataclass(frozen=True)
class Grid:
    d: int
    L: float
    n: int
    h: float = field(init=False)

    def __post_init__(self):
        if self.d not in (2, 3):
            raise GeometryError(f"dimension must be 2 or 3, got {self.d}")
        if not self.L > 0:
            raise GeometryError(f"half-period L must be positive, got {self.L}")
        if self.n < 8:
            raise GeometryError(f"need at least 8 cells per axis, got {self.n}")
        if self.n % 2:
            raise GeometryError(f"odd resolution n={self.n} breaks staggering symmetry")
        object.__setattr__(self, "h", 2.0 * self.L / self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def pairs(self) -> list[tuple[int, int]]:
        """Axis pairs labelling edge components (one corner pair in 2-D)."""
        return list(combinations(range(self.d), 2))

    @property
    def cell_volume(self) -> float:
        return self.h ** self.d

    @property
    def n_cells(self) -> int:
        return self.n ** self.d

    @property
    def n_faces(self) -> int:
        return self.d * self.n ** self.d

    def wrap(self, index):
        return np.mod(index, self.n)

    def axis_coords(self, shift: float = 0.0) -> np.ndarray:
        """1-D coordinates ``-L + (i + 1/2 + shift) h``."""
        return -self.L + (np.arange(self.n) + 0.5 + shift) * self.h

    def coords(self, shifts=None) -> tuple[np.ndarray, ...]:
        """Broadcast coordinate arrays for a location shifted by ``shifts`` cells."""
        if shifts is None:
            shifts = (0.0,) * self.d
        axes = [self.axis_coords(s) for s in shifts]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def cell_centers(self) -> tuple[np.ndarray, ...]:
        return self.coords()

    def face_centers(self, a: int) -> tuple[np.ndarray, ...]:
        return self.coords(tuple(0.5 if k == a else 0.0 for k in range(self.d)))

    def edge_centers(self, a: int, b: int) -> tuple[np.ndarray, ...]:
        return self.coords(tuple(0.5 if k in (a, b) else 0.0 for k in range(self.d)))

    def zeros_cell(self) -> np.ndarray:
        return np.zeros(self.shape)

    def zeros_face(self) -> np.ndarray:
        return np.zeros((self.d,) + self.shape)

    def zeros_edge(self) -> np.ndarray:
        return np.zeros((len(self.pairs),) + self.shape)


def build_grid(d: int, L: float, n: int) -> Grid:
    return Grid(d=d, L=float(L), n=int(n))


@dataclass(frozen=True)
class BoundarySamples:
    """Quadrature points on a circle / sphere with outward unit normals."""

    points: np.ndarray   # (N, d)
    normals: np.ndarray  # (N, d)
    weights: np.ndarray  # (N,) arc-length or area weights
    radius: float

    def __len__(self):
        return len(self.weights)


def _sphere_samples(d: int, radius: float, h: float) -> BoundarySamples:
    if d == 2:
        count = max(8, math.ceil(2.0 * math.pi * radius / h))
        theta = 2.0 * math.pi * np.arange(count) / count
        normals = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        weights = np.full(count, 2.0 * math.pi * radius / count)
    else:
        # Fibonacci lattice: quasi-uniform, equal-area weights.
        count = max(32, math.ceil(4.0 * math.pi * radius ** 2 / h ** 2))
        k = np.arange(count) + 0.5
        z = 1.0 - 2.0 * k / count
        phi = math.pi * (1.0 + math.sqrt(5.0)) * k
        rxy = np.sqrt(1.0 - z * z)
        normals = np.stack([rxy * np.cos(phi), rxy * np.sin(phi), z], axis=1)
        weights = np.full(count, 4.0 * math.pi * radius ** 2 / count)
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return BoundarySamples(points=radius * normals, normals=normals, weights=weights, radius=radius)


@dataclass(frozen=True)
class RegionMap:
    """Cell labels and analytic signed distances for concentric balls.

    ``dist_outer = r - R_outer`` is positive in the exterior; ``dist_inner =
    r - R_inner`` is negative inside the immersed solid (``+inf`` when the
    solid is disabled).
    """

    grid: Grid
    R_outer: float
    R_inner: float
    labels: np.ndarray
    dist_outer: np.ndarray
    dist_inner: np.ndarray
    outer_samples: BoundarySamples
    inner_samples: BoundarySamples | None

    @property
    def has_inner(self) -> bool:
        return self.R_inner > 0.0

    def mask(self, region: Region) -> np.ndarray:
        return self.labels == region

    def solid_plateau(self, margin: float) -> np.ndarray:
        """Cells of Ω_int ∪ Ω_ext at least ``margin`` away from both interfaces."""
        return self.int_plateau(margin) | self.ext_plateau(margin)

    def int_plateau(self, margin: float) -> np.ndarray:
        return self.dist_inner < -margin

    def ext_plateau(self, margin: float) -> np.ndarray:
        return self.dist_outer > margin

    def fluid_plateau(self, margin: float) -> np.ndarray:
        return (self.dist_inner > margin) & (self.dist_outer < -margin)

    def volume(self, region: Region) -> float:
        return float(np.count_nonzero(self.mask(region))) * self.grid.cell_volume


def classify_regions(grid: Grid, R_outer: float, R_inner: float = 0.0) -> RegionMap:
    """Label cells by center position against concentric balls at the origin."""
    if not R_outer < grid.L:
        raise GeometryError(f"R_outer={R_outer} must be < L={grid.L} (fluid domain must sit inside the box)")
    if not 0.0 <= R_inner < R_outer:
        raise GeometryError(f"need 0 <= R_inner < R_outer, got R_inner={R_inner}, R_outer={R_outer}")

    r = np.sqrt(sum(x * x for x in grid.cell_centers()))
    dist_outer = r - R_outer
    dist_inner = r - R_inner if R_inner > 0.0 else np.full(grid.shape, np.inf)

    labels = np.full(grid.shape, Region.EXT, dtype=np.int8)
    labels[dist_outer < 0.0] = Region.FLUID
    labels[dist_inner < 0.0] = Region.INT

    # cells on the periodic seam (first/last index along any axis) must be exterior
    seam = np.zeros(grid.shape, dtype=bool)
    for a in range(grid.d):
        idx = [slice(None)] * grid.d
        idx[a] = 0
        seam[tuple(idx)] = True
        idx[a] = -1
        seam[tuple(idx)] = True
    if np.any(labels[seam] != Region.EXT):
        raise GeometryError("fluid domain touches the periodic seam; reduce R_outer")

    outer = _sphere_samples(grid.d, R_outer, grid.h)
    inner = _sphere_samples(grid.d, R_inner, grid.h) if R_inner > 0.0 else None
    return RegionMap(
        grid=grid,
        R_outer=float(R_outer),
        R_inner=float(R_inner),
        labels=labels,
        dist_outer=dist_outer,
        dist_inner=dist_inner,
        outer_samples=outer,
        inner_samples=inner,
    )


def mollifier(s, w: float):
    """C¹ smoothstep across the band ``[-w/2, w/2]``: 0 below, 1 above."""
    if not w > 0:
        raise GeometryError(f"transition width must be positive, got {w}")
    t = np.clip((np.asarray(s, dtype=float) + 0.5 * w) / w, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)
