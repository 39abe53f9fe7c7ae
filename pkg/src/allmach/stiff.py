"""Linear stiff (acoustic) operator, discretized with central differences.

The stiff part couples the pressure gradient, scaled by the reference
1/(eps^2 * rho_max), to the velocity divergence, scaled by gamma * p_min.
Its semi-implicit evaluation mixes two time levels: the scalar coefficients
come from one stage, the differentiated fields from another.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec
from .nonstiff import SplitScalars
from .state import PrimitiveField, SolverConfig


@dataclass(frozen=True)
class StiffScalars:
    """Coefficients of the stiff operator, frozen at one stage."""

    inv_eps2_rhomax: float
    gamma_pmin: float

    @classmethod
    def from_split(cls, scalars: SplitScalars, cfg: SolverConfig) -> "StiffScalars":
        return cls(
            inv_eps2_rhomax=1.0 / (cfg.epsilon**2 * scalars.rho_max),
            gamma_pmin=cfg.gamma * scalars.p_min,
        )


def central_gradient(p: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Second-order central gradient of a padded scalar field (interior)."""
    g, nx, ny = grid.ghost, grid.nx, grid.ny
    px = (p[g + 1:g + nx + 1, g:g + ny] - p[g - 1:g + nx - 1, g:g + ny]) / (2.0 * grid.dx)
    py = (p[g:g + nx, g + 1:g + ny + 1] - p[g:g + nx, g - 1:g + ny - 1]) / (2.0 * grid.dy)
    return px, py


def discrete_divergence(u: np.ndarray, v: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Central-difference divergence of a padded vector field (interior)."""
    g, nx, ny = grid.ghost, grid.nx, grid.ny
    return (
        (u[g + 1:g + nx + 1, g:g + ny] - u[g - 1:g + nx - 1, g:g + ny]) / (2.0 * grid.dx)
        + (v[g:g + nx, g + 1:g + ny + 1] - v[g:g + nx, g - 1:g + ny - 1]) / (2.0 * grid.dy)
    )


def assemble_stiff(coeffs: StiffScalars, Vf: PrimitiveField, grid: GridSpec) -> np.ndarray:
    """Stiff operator with coefficients from one stage applied to the fields
    of another, shape (4, nx, ny).

    The argument order matters: ``coeffs`` carries the (older) stage whose
    extrema freeze the linearization, ``Vf`` the stage being differentiated.
    """
    px, py = central_gradient(Vf.p, grid)
    div = discrete_divergence(Vf.u, Vf.v, grid)
    return np.stack((
        np.zeros_like(px),
        coeffs.inv_eps2_rhomax * px,
        coeffs.inv_eps2_rhomax * py,
        coeffs.gamma_pmin * div,
    ))
