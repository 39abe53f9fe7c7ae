import numpy as np
import pytest

from allmach.errors import NonPhysicalState
from allmach.grid import GridSpec, fill_ghost_array, fill_ghosts
from allmach.state import (
    ConservativeField,
    PrimitiveField,
    SolverConfig,
    cons_to_prim,
    prim_to_cons,
)


def uniform_primitive(grid, rho, u, v, p):
    V = PrimitiveField.zeros(grid)
    V.rho[:] = rho
    V.u[:] = u
    V.v[:] = v
    V.p[:] = p
    return V


@pytest.fixture
def grid():
    return GridSpec(4, 4, 0.0, 1.0, 0.0, 1.0)


class TestTransforms:
    def test_energy_with_kinetic_term(self, grid):
        # straight-line equation of state: p/(gamma-1) + eps^2/2 rho (u^2+v^2)
        cfg = SolverConfig(epsilon=0.1, gamma=2.0)
        expected_E = 1.0 / (2.0 - 1.0) + 0.5 * 0.1**2 * 1.0 * (1.0 + 1.0)
        assert expected_E == 1.01
        U = prim_to_cons(uniform_primitive(grid, 1.0, 1.0, 1.0, 1.0), cfg)
        assert np.allclose(U.E, expected_E, rtol=0, atol=1e-15)
        assert np.allclose(U.mx, 1.0) and np.allclose(U.my, 1.0)

    def test_static_state(self, grid):
        cfg = SolverConfig(epsilon=0.7, gamma=1.4)
        U = prim_to_cons(uniform_primitive(grid, 1.0, 0.0, 0.0, 1.0), cfg)
        assert np.allclose(U.E, 2.5)

    def test_explosion_ambient_state(self, grid):
        cfg = SolverConfig(epsilon=1.0, gamma=1.4)
        U = prim_to_cons(uniform_primitive(grid, 0.125, 0.0, 0.0, 0.1), cfg)
        assert np.allclose(U.E, 0.25)

    def test_inverse_of_known_state(self, grid):
        cfg = SolverConfig(epsilon=0.1, gamma=2.0)
        U = ConservativeField.zeros(grid)
        U.rho[:] = 1.0
        U.mx[:] = 1.0
        U.my[:] = 1.0
        U.E[:] = 1.01
        V = cons_to_prim(U, grid, cfg)
        for a, want in zip(V.components(), (1.0, 1.0, 1.0, 1.0)):
            assert np.allclose(a, want, rtol=1e-14)

    def test_zero_velocity_inverse(self, grid):
        cfg = SolverConfig(epsilon=0.3, gamma=1.4)
        U = ConservativeField.zeros(grid)
        U.rho[:] = 1.0
        U.E[:] = 2.5
        V = cons_to_prim(U, grid, cfg)
        assert np.allclose(V.p, 1.0)
        assert np.allclose(V.u, 0.0)

    def test_negative_energy_rejected(self, grid):
        cfg = SolverConfig(epsilon=1.0, gamma=1.4)
        U = ConservativeField.zeros(grid)
        U.rho[:] = 1.0
        U.E[:] = -1.0
        with pytest.raises(NonPhysicalState):
            cons_to_prim(U, grid, cfg)

    def test_negative_density_rejected(self, grid):
        cfg = SolverConfig(epsilon=1.0, gamma=1.4)
        U = ConservativeField.zeros(grid)
        U.rho[:] = -0.5
        U.E[:] = 1.0
        with pytest.raises(NonPhysicalState):
            cons_to_prim(U, grid, cfg)

    @pytest.mark.parametrize("eps", [1.0, 1e-2, 1e-6])
    def test_round_trip(self, eps):
        grid = GridSpec(8, 6, -1.0, 1.0, 0.0, 3.0)
        rng = np.random.default_rng(7)
        V = PrimitiveField(
            rho=0.5 + rng.random(grid.shape),
            u=rng.standard_normal(grid.shape),
            v=rng.standard_normal(grid.shape),
            p=0.5 + rng.random(grid.shape),
        )
        cfg = SolverConfig(epsilon=eps, gamma=1.4)
        W = cons_to_prim(prim_to_cons(V, cfg), grid, cfg)
        for a, b in zip(V.components(), W.components()):
            assert np.allclose(a, b, rtol=1e-13)

    def test_energy_continuous_in_mach_number(self, grid):
        # E -> p/(gamma-1) as eps -> 0
        V = uniform_primitive(grid, 1.3, 0.7, -0.4, 2.1)
        cfg = SolverConfig(epsilon=1e-8, gamma=1.4)
        U = prim_to_cons(V, cfg)
        assert np.allclose(U.E, 2.1 / 0.4, rtol=1e-12)


class TestGhostFilling:
    def test_periodic_wrap_indices(self):
        grid = GridSpec(4, 4, 0.0, 1.0, 0.0, 1.0)
        a = grid.zeros()
        g = grid.ghost
        a[g:g + 4, :] = np.arange(4.0)[:, None]  # f(x_j) = j
        fill_ghost_array(a, grid)
        assert list(a[:g, g]) == [2.0, 3.0]
        assert list(a[-g:, g]) == [0.0, 1.0]

    def test_outflow_constant_everywhere(self):
        grid = GridSpec(4, 4, 0.0, 1.0, 0.0, 1.0, bc_x="outflow", bc_y="outflow")
        a = grid.zeros()
        a[grid.interior] = 3.5
        fill_ghost_array(a, grid)
        assert np.all(a == 3.5)

    def test_idempotent(self):
        for bc in ("periodic", "outflow"):
            grid = GridSpec(5, 4, 0.0, 1.0, 0.0, 1.0, bc_x=bc, bc_y=bc)
            rng = np.random.default_rng(3)
            a = grid.zeros()
            a[grid.interior] = rng.random((5, 4))
            once = fill_ghost_array(a.copy(), grid)
            twice = fill_ghost_array(once.copy(), grid)
            assert np.array_equal(once, twice)

    def test_field_level_fill(self):
        grid = GridSpec(4, 4, 0.0, 1.0, 0.0, 1.0)
        V = PrimitiveField.zeros(grid)
        V.rho[grid.interior] = 1.0
        V.p[grid.interior] = 2.0
        fill_ghosts(V, grid)
        assert np.all(V.rho == 1.0) and np.all(V.p == 2.0)


class TestConfig:
    def test_defaults_match_reference_setup(self):
        cfg = SolverConfig(epsilon=0.5)
        assert cfg.theta == 1.3
        assert cfg.delta == 1e-15
        assert (cfg.eps0, cfg.eps1, cfg.alpha) == (0.15, 0.4, 14.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"epsilon": 0.0},
            {"epsilon": 1.5},
            {"epsilon": 0.5, "theta": 2.5},
            {"epsilon": 0.5, "delta": 0.0},
            {"epsilon": 0.5, "eps0": 0.5, "eps1": 0.4},
            {"epsilon": 0.5, "order": 3},
        ],
    )
    def test_invalid_config_rejected(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)

    def test_elliptic_iteration_cap_scales_with_grid(self):
        cfg = SolverConfig(epsilon=0.5)
        assert cfg.max_iter_for(GridSpec(64, 32, 0.0, 1.0, 0.0, 1.0)) == 960
        assert SolverConfig(epsilon=0.5, elliptic_max_iter=5).max_iter_for(
            GridSpec(64, 32, 0.0, 1.0, 0.0, 1.0)
        ) == 5


class TestValidation:
    def test_negative_pressure_detected(self, grid):
        V = uniform_primitive(grid, 1.0, 0.0, 0.0, 1.0)
        V.p[grid.ghost + 1, grid.ghost + 1] = -0.1
        with pytest.raises(NonPhysicalState):
            V.validate(grid)

    def test_ghost_values_not_validated(self, grid):
        V = uniform_primitive(grid, 1.0, 0.0, 0.0, 1.0)
        V.rho[0, 0] = -1.0  # ghost corner: ignored
        V.validate(grid)

    def test_nan_detected(self, grid):
        V = uniform_primitive(grid, 1.0, 0.0, 0.0, 1.0)
        V.u[grid.ghost, grid.ghost] = np.nan
        with pytest.raises(NonPhysicalState):
            V.validate(grid)
