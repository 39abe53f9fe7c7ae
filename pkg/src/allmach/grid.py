"""Uniform Cartesian grid geometry and ghost-cell boundary handling.

Scalar fields live on ghost-padded arrays of shape ``(nx + 2*ghost,
ny + 2*ghost)`` with axis 0 along x and axis 1 along y.  The ghost depth is
fixed to 2: interface reconstruction at a physical boundary needs a limited
slope in the first ghost cell, which in turn needs one further neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PERIODIC = "periodic"
OUTFLOW = "outflow"

GHOST_DEPTH = 2


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a uniform 2-D cell grid plus per-axis boundary kinds."""

    nx: int
    ny: int
    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    bc_x: str = PERIODIC
    bc_y: str = PERIODIC
    ghost: int = GHOST_DEPTH
    dx: float = field(init=False)
    dy: float = field(init=False)

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError("grid needs at least 3 cells per axis")
        if self.x_hi <= self.x_lo or self.y_hi <= self.y_lo:
            raise ValueError("domain bounds must be increasing")
        for bc in (self.bc_x, self.bc_y):
            if bc not in (PERIODIC, OUTFLOW):
                raise ValueError(f"unknown boundary kind {bc!r}")
        if self.ghost != GHOST_DEPTH:
            raise ValueError("ghost depth is fixed to 2")
        object.__setattr__(self, "dx", (self.x_hi - self.x_lo) / self.nx)
        object.__setattr__(self, "dy", (self.y_hi - self.y_lo) / self.ny)

    @property
    def shape(self) -> tuple[int, int]:
        """Padded array shape."""
        g = self.ghost
        return (self.nx + 2 * g, self.ny + 2 * g)

    @property
    def interior(self) -> tuple[slice, slice]:
        """Slice pair selecting the interior of a padded array."""
        g = self.ghost
        return (slice(g, g + self.nx), slice(g, g + self.ny))

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Interior cell-center coordinates as (nx, ny) meshes."""
        x = self.x_lo + (np.arange(self.nx) + 0.5) * self.dx
        y = self.y_lo + (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y, indexing="ij")


def fill_ghost_array(a: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Fill the ghost layers of one padded scalar array in place.

    Periodic axes copy wrapped interior values; outflow axes extrapolate the
    nearest interior cell at zeroth order.  Filling x then y makes corner
    ghosts consistent with both axes.  Idempotent.
    """
    g = grid.ghost
    if grid.bc_x == PERIODIC:
        a[:g, :] = a[-2 * g:-g, :]
        a[-g:, :] = a[g:2 * g, :]
    else:
        a[:g, :] = a[g:g + 1, :]
        a[-g:, :] = a[-g - 1:-g, :]
    if grid.bc_y == PERIODIC:
        a[:, :g] = a[:, -2 * g:-g]
        a[:, -g:] = a[:, g:2 * g]
    else:
        a[:, :g] = a[:, g:g + 1]
        a[:, -g:] = a[:, -g - 1:-g]
    return a


def fill_ghosts(fld, grid: GridSpec):
    """Fill the ghost layers of every component of a field, in place.

    Accepts anything exposing ``components()`` (PrimitiveField,
    ConservativeField) and returns it for chaining.
    """
    for a in fld.components():
        fill_ghost_array(a, grid)
    return fld
