"""Shifted-Laplacian (Helmholtz-type) pressure systems and their solver.

Each semi-implicit stage turns the pressure update into a linear system

    (I - sigma * Lap_h) p = rhs,

with the compact 5-point Laplacian and sigma = dt^2 * gamma * p_min /
(eps^2 * rho_max).  The operator is symmetric positive definite for
sigma >= 0 and stays so for the slightly negative sigma that can occur at
large Mach numbers as long as |sigma| * lambda_max(-Lap_h) < 1; the solver
verifies that bound instead of requiring sigma > 0.

The constant mode is handled exactly: with periodic or mirrored (outflow)
ghosts the Laplacian annihilates constants, so the mean of the solution
equals the mean of the right-hand side.  The conjugate-gradient iteration
therefore runs on the mean-free deviation, which keeps the solve accurate at
very small Mach numbers where the physical pressure fluctuation sits many
orders of magnitude below the background value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence
from .grid import OUTFLOW, GridSpec, fill_ghost_array
from .state import PrimitiveField, SolverConfig
from .stiff import discrete_divergence

U_COMP, V_COMP, P_COMP = 1, 2, 3


@dataclass
class HelmholtzSystem:
    """One assembled pressure system; boundary kind comes from the grid."""

    sigma: float
    rhs: np.ndarray  # interior, (nx, ny)
    grid: GridSpec


def compact_laplacian(p: np.ndarray, grid: GridSpec) -> np.ndarray:
    """5-point Laplacian of a padded scalar field, on interior cells."""
    g, nx, ny = grid.ghost, grid.nx, grid.ny
    c = p[g:g + nx, g:g + ny]
    return (
        (p[g - 1:g + nx - 1, g:g + ny] - 2.0 * c + p[g + 1:g + nx + 1, g:g + ny]) / grid.dx**2
        + (p[g:g + nx, g - 1:g + ny - 1] - 2.0 * c + p[g:g + nx, g + 1:g + ny + 1]) / grid.dy**2
    )


def operator_divergence(op: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Discrete divergence of the velocity components of an operator field.

    Operator fields are interior-only, so the components are extended into
    the ghost layers by the grid's boundary rule first (exact wrap for
    periodic, zeroth-order extrapolation for outflow).
    """
    core = grid.interior
    u = grid.zeros()
    v = grid.zeros()
    u[core] = op[U_COMP]
    v[core] = op[V_COMP]
    fill_ghost_array(u, grid)
    fill_ghost_array(v, grid)
    return discrete_divergence(u, v, grid)


def predictor_pressure_system(
    Vn: PrimitiveField,
    Rn: np.ndarray,
    scalars_n,
    dt: float,
    cfg: SolverConfig,
    grid: GridSpec,
) -> HelmholtzSystem:
    """Pressure system of the first (predictor) stage.

    Obtained by taking the discrete divergence of the semi-implicit velocity
    update and substituting it into the pressure update, which eliminates the
    new-time velocity.
    """
    gp = cfg.gamma * scalars_n.p_min
    sigma = dt**2 * gp / (cfg.epsilon**2 * scalars_n.rho_max)
    core = grid.interior
    rhs = (
        Vn.p[core]
        - dt * Rn[P_COMP]
        - dt * gp * discrete_divergence(Vn.u, Vn.v, grid)
        + dt**2 * gp * operator_divergence(Rn, grid)
    )
    return HelmholtzSystem(sigma, rhs, grid)


def corrector_pressure_system(
    Vn: PrimitiveField,
    Rn: np.ndarray,
    Rs: np.ndarray,
    Lnn: np.ndarray,
    Lss: np.ndarray,
    scalars_s,
    dt: float,
    cfg: SolverConfig,
    grid: GridSpec,
) -> HelmholtzSystem:
    """Pressure system of the second (corrector) stage.

    ``Rn``/``Rs`` are the explicit operators of the old and predictor stages;
    ``Lnn``/``Lss`` the stiff operators with matched coefficient and field
    stages.  The shift coefficient uses the predictor-stage extrema.

    Every right-hand-side sign follows from eliminating the new-time velocity
    between the corrector's velocity and pressure updates; in particular the
    stiff-bracket divergence term enters with a plus, since both updates
    subtract that bracket.
    """
    gp = cfg.gamma * scalars_s.p_min
    sigma = dt**2 * gp / (cfg.epsilon**2 * scalars_s.rho_max)
    core = grid.interior
    rhs = (
        Vn.p[core]
        - 0.5 * dt * (Rn[P_COMP] + Rs[P_COMP])
        - 0.5 * dt * (Lnn[P_COMP] - Lss[P_COMP])
        - dt * gp * discrete_divergence(Vn.u, Vn.v, grid)
        + 0.5 * dt**2 * gp * operator_divergence(Rn + Rs, grid)
        + 0.5 * dt**2 * gp * operator_divergence(Lnn - Lss, grid)
    )
    return HelmholtzSystem(sigma, rhs, grid)


def _laplacian_max_eigenvalue(grid: GridSpec) -> float:
    return 4.0 / grid.dx**2 + 4.0 / grid.dy**2


def _jacobi_diagonal(sigma: float, grid: GridSpec) -> np.ndarray:
    d = np.full((grid.nx, grid.ny), 1.0 + 2.0 * sigma * (1.0 / grid.dx**2 + 1.0 / grid.dy**2))
    # Mirrored ghosts drop one off-diagonal neighbor at outflow boundaries.
    if grid.bc_x == OUTFLOW:
        d[0, :] -= sigma / grid.dx**2
        d[-1, :] -= sigma / grid.dx**2
    if grid.bc_y == OUTFLOW:
        d[:, 0] -= sigma / grid.dy**2
        d[:, -1] -= sigma / grid.dy**2
    return d


def solve_helmholtz(
    sys: HelmholtzSystem,
    guess: np.ndarray | None,
    tol: float,
    max_iter: int,
    jacobi: bool = False,
) -> tuple[np.ndarray, int, float]:
    """Solve (I - sigma*Lap_h) q = rhs by conjugate gradients.

    Returns (solution, iterations, residual) with residual <= tol*||rhs||_2,
    measured in the 2-norm over interior cells; raises NoConvergence
    otherwise.  ``guess`` warm-starts the iteration.
    """
    grid = sys.grid
    sigma = sys.sigma
    if sigma < 0.0 and 1.0 + sigma * _laplacian_max_eigenvalue(grid) <= 1e-8:
        raise NoConvergence(0, np.inf, "shifted operator lost positive definiteness (dt too large?)")

    rhs_norm = float(np.linalg.norm(sys.rhs))
    mean = float(sys.rhs.mean())
    if rhs_norm == 0.0:
        return np.zeros_like(sys.rhs), 0, 0.0
    target = tol * rhs_norm

    work = grid.zeros()
    core = grid.interior

    def apply_op(d: np.ndarray) -> np.ndarray:
        work[core] = d
        fill_ghost_array(work, grid)
        return d - sigma * compact_laplacian(work, grid)

    b = sys.rhs - mean
    if guess is not None:
        x = guess - float(guess.mean())
    else:
        x = np.zeros_like(b)
    r = b - apply_op(x)
    inv_diag = 1.0 / _jacobi_diagonal(sigma, grid) if jacobi else None

    res = float(np.linalg.norm(r))
    it = 0
    if res > target:
        z = r * inv_diag if jacobi else r
        p = z.copy()
        rz = float((r * z).sum())
        while it < max_iter:
            ap = apply_op(p)
            alpha = rz / float((p * ap).sum())
            x += alpha * p
            r -= alpha * ap
            it += 1
            res = float(np.linalg.norm(r))
            if res <= target or it % 64 == 0:
                # Guard against recurrence drift before accepting.
                r = b - apply_op(x)
                res = float(np.linalg.norm(r))
                if res <= target:
                    break
            z = r * inv_diag if jacobi else r
            rz_new = float((r * z).sum())
            p = z + (rz_new / rz) * p
            rz = rz_new
        if res > target:
            raise NoConvergence(it, res / rhs_norm)

    x -= x.mean()  # remove round-off drift; the exact deviation is mean-free
    return x + mean, it, res
