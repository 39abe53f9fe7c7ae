"""Delimited-text snapshot serialization.

One file per snapshot: ``key = value`` header lines, a column legend, then
one row per interior cell in k-major order (k slowest, j fastest).  All
floats are written with 17 significant digits so that parse/re-serialize
round trips are byte identical.
"""

from __future__ import annotations

import numpy as np

from .benchmarks import local_mach, vorticity
from .grid import GridSpec
from .integrator import DualState
from .state import SolverConfig

COLUMNS = "j k x y rho u v p rho_cons mx my E mach vorticity"

_F = "%.17g"


def _fmt(value) -> str:
    if isinstance(value, float):
        return _F % value
    return str(value)


def snapshot_rows(state: DualState, grid: GridSpec, cfg: SolverConfig) -> np.ndarray:
    """Cell table in file order, shape (nx*ny, 14)."""
    core = grid.interior
    X, Y = grid.cell_centers()
    nx, ny = grid.nx, grid.ny

    def flat(a: np.ndarray) -> np.ndarray:
        return a.T.ravel()  # k-major

    cols = [
        np.tile(np.arange(nx), ny),
        np.repeat(np.arange(ny), nx),
        flat(X),
        flat(Y),
    ]
    cols += [flat(a[core]) for a in state.V.components()]
    cols += [flat(a[core]) for a in state.U.components()]
    cols.append(flat(local_mach(state.V, cfg.gamma, grid)))
    cols.append(flat(vorticity(state.V, grid)))
    return np.column_stack(cols)


def snapshot_header(state: DualState, grid: GridSpec, cfg: SolverConfig) -> dict:
    header = {
        "time": float(state.t),
        "eps": float(cfg.epsilon),
        "gamma": float(cfg.gamma),
        "nx": grid.nx,
        "ny": grid.ny,
        "x_lo": float(grid.x_lo),
        "x_hi": float(grid.x_hi),
        "y_lo": float(grid.y_lo),
        "y_hi": float(grid.y_hi),
        "bc_x": grid.bc_x,
        "bc_y": grid.bc_y,
    }
    if cfg.dt_override is not None:
        header["dt_override"] = "%d:%s" % (cfg.dt_override[0], _F % cfg.dt_override[1])
    return header


def write_snapshot_data(header: dict, rows: np.ndarray, path) -> None:
    with open(path, "w") as f:
        for key, value in header.items():
            f.write(f"# {key} = {_fmt(value)}\n")
        f.write(f"# columns: {COLUMNS}\n")
        for row in rows:
            f.write("%d %d " % (int(row[0]), int(row[1])))
            f.write(" ".join(_F % x for x in row[2:]))
            f.write("\n")


def snapshot_write(state: DualState, grid: GridSpec, cfg: SolverConfig, path) -> None:
    """Serialize one state (both solution copies plus diagnostics)."""
    write_snapshot_data(snapshot_header(state, grid, cfg), snapshot_rows(state, grid, cfg), path)


def snapshot_read(path) -> tuple[dict, np.ndarray]:
    """Parse a snapshot back into (header, row table)."""
    header: dict = {}
    data = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("columns:"):
                    continue
                key, _, raw = body.partition("=")
                key = key.strip()
                raw = raw.strip()
                if key in ("nx", "ny"):
                    header[key] = int(raw)
                elif key in ("bc_x", "bc_y", "dt_override"):
                    header[key] = raw
                else:
                    header[key] = float(raw)
            elif line:
                data.append([float(tok) for tok in line.split()])
    return header, np.asarray(data)
