"""
Nonlinear solver tests.

Validates:
  - parameter validation and the frozen state container
  - consistent initial data: shear and two-mode constructions, file input,
    rejection of mean-carrying / out-of-band / floor-violating displacements
  - right-hand-side oracles: equilibrium, pure-shear forcing, linearized rhs
  - exact viscous decay of a single shear mode (linear integrator path)
  - CFL guard, density-floor guard, dt validation
  - mean density and Hermitian symmetry preserved by stepping
  - state dumps: write-by-run, reload, mismatch errors
"""

import json

import numpy as np
import pytest

from frozenflux.config import parse_config
from frozenflux.solver import (
    FIELD_NAMES,
    FloorError,
    MhdState,
    Params,
    StabilityError,
    cfl_limit,
    ic_from_files,
    ic_shear,
    ic_two_mode,
    linear_rhs,
    load_state,
    make_consistent_ic,
    rhs,
    run,
    step,
)
from frozenflux.spectral import (
    KIND_PHYSICAL,
    Grid,
    hermitian_error,
    to_spectral,
    write_field_dump,
)


@pytest.fixture
def grid():
    return Grid(32)


@pytest.fixture
def params():
    return Params()


class TestParams:
    def test_defaults(self, params):
        assert params.mu == 1.0
        assert params.lam == -1.0
        assert params.mu + params.lam == 0.0

    def test_rejects_bad_viscosity(self):
        with pytest.raises(ValueError, match="mu must be positive"):
            Params(mu=0.0)
        with pytest.raises(ValueError, match="mu \\+ lambda"):
            Params(mu=1.0, lam=-1.5)

    def test_rejects_bad_floor_and_cfl(self):
        with pytest.raises(ValueError, match="rho_floor"):
            Params(rho_floor=1.5)
        with pytest.raises(ValueError, match="cfl"):
            Params(cfl=0.0)

    def test_rejects_unknown_dealias(self):
        with pytest.raises(ValueError, match="dealias"):
            Params(dealias="three_quarters")


class TestStateContainer:
    def test_shape_guard(self, grid):
        with pytest.raises(ValueError, match="shape"):
            MhdState(grid=grid, t=0.0, coeffs=np.zeros((8, 32, 32), dtype=complex))

    def test_field_accessors(self, grid, params):
        st = ic_shear(grid, 1e-3, params)
        assert st.b.coeffs.shape == (32, 32)
        assert len(st.u) == 2 and len(st.H) == 2 and len(st.A_pert) == 4
        phys = st.physical()
        assert set(phys) == set(FIELD_NAMES)


class TestConsistentIC:
    def test_shear_fields(self, grid, params):
        eps = 1e-3
        st = ic_shear(grid, eps, params)
        phys = st.physical()
        c1 = np.cos(grid.kappa0 * grid.x1)
        # d = (0, eps sin x1): only A21 = eps cos x1 is excited, det = 1
        assert np.max(np.abs(phys["A21"] - eps * c1)) < 1e-15
        assert np.max(np.abs(phys["b"])) < 1e-15
        assert np.max(np.abs(phys["H2"] + eps * c1)) < 1e-15
        for nm in ("u1", "u2", "H1", "A11", "A12", "A22"):
            assert np.max(np.abs(phys[nm])) < 1e-15

    def test_two_mode_fields(self, grid, params):
        eps = 1e-2
        st = ic_two_mode(grid, eps, params)
        phys = st.physical()
        want = eps * (np.sin(grid.kappa0 * grid.x2) + 0.5 * np.sin(2 * grid.kappa0 * grid.x2))
        assert np.max(np.abs(phys["u1"] - want)) < 1e-14
        for nm in ("b", "u2", "H1", "H2", "A11", "A12", "A21", "A22"):
            assert np.max(np.abs(phys[nm])) < 1e-15

    def test_density_identity_exact(self, grid, params):
        """b must equal det(I + script A) - 1 pointwise."""
        zero = grid.zeros_physical()
        d1 = 0.05 * np.sin(grid.kappa0 * grid.x2) + zero
        d2 = 0.05 * np.cos(grid.kappa0 * (grid.x1 + grid.x2)) + zero
        d2 -= d2.mean()
        st = make_consistent_ic(grid, (d1, d2), (grid.zeros_physical(),) * 2, params)
        p = st.physical()
        det = (1 + p["A11"]) * (1 + p["A22"]) - p["A12"] * p["A21"]
        assert np.max(np.abs(p["b"] - (det - 1))) < 1e-14
        assert abs(st.coeffs[0][0, 0]) < 1e-16  # density perturbation is mean-free

    def test_rejects_mean_displacement(self, grid, params):
        d = np.full((32, 32), 0.1)
        with pytest.raises(ValueError, match="mean-zero"):
            make_consistent_ic(grid, (d, d), (grid.zeros_physical(),) * 2, params)

    def test_rejects_out_of_band_displacement(self, grid, params):
        # mode 12 on n = 32 sits outside the two-thirds band (cap at 10)
        d = 1e-3 * np.sin(12 * grid.kappa0 * grid.x1) + grid.zeros_physical()
        with pytest.raises(ValueError, match="beyond the dealias band"):
            make_consistent_ic(grid, (d, grid.zeros_physical()), (grid.zeros_physical(),) * 2, params)

    def test_rejects_floor_violation(self, grid, params):
        d = 0.9 * np.sin(grid.kappa0 * grid.x1) + grid.zeros_physical()
        with pytest.raises(ValueError, match="too strong"):
            make_consistent_ic(grid, (d, grid.zeros_physical()), (grid.zeros_physical(),) * 2, params)

    def test_from_files_matches_builtin(self, grid, params, tmp_path):
        eps = 1e-3
        d2 = eps * np.sin(grid.kappa0 * grid.x1) + grid.zeros_physical()
        path = tmp_path / "d2.fflx"
        write_field_dump(path, grid, d2, KIND_PHYSICAL)
        st = ic_from_files(grid, {"d2": str(path)}, params)
        ref = ic_shear(grid, eps, params)
        assert np.max(np.abs(st.coeffs - ref.coeffs)) < 1e-16

    def test_from_files_grid_mismatch(self, params, tmp_path):
        small = Grid(16)
        path = tmp_path / "d2.fflx"
        write_field_dump(path, small, small.zeros_physical(), KIND_PHYSICAL)
        with pytest.raises(ValueError, match="does not match"):
            ic_from_files(Grid(32), {"d2": str(path)}, params)


class TestTendencies:
    def test_equilibrium_is_steady(self, grid, params):
        st = MhdState(grid=grid, t=0.0, coeffs=np.zeros((9, 32, 32), dtype=complex))
        assert np.max(np.abs(rhs(st, params))) == 0.0

    def test_pure_shear_velocity_forcing(self, grid, params):
        """u = (sin x2, 0) on the background: du/dt = -mu u (Laplacian only),
        with no feedback into b, u2, or H."""
        u1 = np.sin(grid.kappa0 * grid.x2) + grid.zeros_physical()
        st = make_consistent_ic(
            grid, (grid.zeros_physical(),) * 2, (u1, grid.zeros_physical()), params
        )
        dy = rhs(st, params)
        want = to_spectral(grid, -u1)
        assert np.max(np.abs(dy[1] - want)) < 1e-13
        for slot in (0, 2, 3, 4):
            assert np.max(np.abs(dy[slot])) < 1e-14

    def test_linear_rhs_matches_full_at_tiny_amplitude(self, grid, params):
        st = ic_shear(grid, 1e-9, params)
        full = rhs(st, params)
        lin = linear_rhs(st, params)
        assert np.max(np.abs(full - lin)) < 1e-17

    def test_floor_error(self, grid, params):
        y = np.zeros((9, 32, 32), dtype=complex)
        y[0][0, 0] = -0.95  # mean density 0.05, below the 0.1 floor
        st = MhdState(grid=grid, t=0.0, coeffs=y)
        with pytest.raises(FloorError, match="below floor"):
            rhs(st, params)


class TestStepping:
    def test_dt_must_be_positive(self, grid, params):
        st = ic_shear(grid, 1e-3, params)
        with pytest.raises(ValueError, match="dt must be positive"):
            step(st, 0.0, params)

    def test_cfl_guard(self, grid, params):
        st = ic_two_mode(grid, 0.5, params)
        bound = cfl_limit(st, params)
        assert 0 < bound < 1
        with pytest.raises(StabilityError, match="CFL"):
            step(st, 2.0 * bound, params)
        step(st, 0.5 * bound, params)  # comfortably inside: no error

    def test_cfl_guard_skipped_in_linear_mode(self, grid):
        p = Params(nonlinear=False)
        st = ic_two_mode(grid, 0.5, p)
        step(st, 1.0, p)  # far over the nonlinear bound, fine for linear flow

    def test_viscous_decay_exact(self, grid):
        """Linear path: u = (sin x2, 0) decays as exp(-t) under the
        integrating factor, independent of dt."""
        p = Params(nonlinear=False)
        u1 = np.sin(grid.kappa0 * grid.x2) + grid.zeros_physical()
        st = make_consistent_ic(grid, (grid.zeros_physical(),) * 2, (u1, grid.zeros_physical()), p)
        for _ in range(100):
            st = step(st, 1e-2, p)
        got = st.physical()["u1"]
        assert np.max(np.abs(got - np.exp(-1.0) * u1)) < 1e-13
        assert abs(st.t - 1.0) < 1e-12

    def test_step_preserves_symmetry_and_mean(self, grid, params):
        st = ic_shear(grid, 1e-2, params)
        for _ in range(5):
            st = step(st, 1e-3, params)
        assert hermitian_error(st.coeffs[0]) == 0.0
        assert hermitian_error(st.coeffs[1]) == 0.0
        assert abs(st.coeffs[0][0, 0]) < 1e-20  # mean density stays pinned (product roundoff only)

    def test_nontrivial_dynamics(self, grid, params):
        """The shear IC actually moves: magnetic tension feeds u2."""
        st = ic_shear(grid, 1e-2, params)
        for _ in range(20):
            st = step(st, 1e-3, params)
        assert np.max(np.abs(st.coeffs[1])) > 0
        assert not np.allclose(st.coeffs, ic_shear(grid, 1e-2, params).coeffs)


class TestRunAndDumps:
    def make_config(self, tmp_path, extra=""):
        text = (
            "[grid]\nn = 16\n[ic]\ntype = \"shear\"\nepsilon = 1e-3\n"
            "[run]\nt_final = 0.02\nledger_every = 1\n" + extra
        )
        return parse_config(text)

    def test_run_writes_artifacts(self, tmp_path):
        cfg = self.make_config(tmp_path, extra="dump_every = 100\n")
        out = tmp_path / "out"
        ledger = run(cfg, out_dir=out)
        assert (out / "ledger.csv").exists()
        assert (out / "manifest.json").exists()
        assert (out / "fields" / "step000000" / "meta.json").exists()
        lines = (out / "ledger.csv").read_text().strip().split("\n")
        assert len(lines) == 1 + len(ledger.rows)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["grid"]["n"] == 16

    def test_run_zero_horizon(self, tmp_path):
        cfg = parse_config("[grid]\nn = 16\n[run]\nt_final = 0.0\n")
        ledger = run(cfg, out_dir=tmp_path / "o")
        assert len(ledger.rows) == 1
        assert ledger.rows[0][0] == 0.0

    def test_dump_reload_roundtrip(self, tmp_path):
        cfg = self.make_config(tmp_path, extra="dump_every = 1000\n")
        out = tmp_path / "out"
        run(cfg, out_dir=out)
        st = load_state(out / "fields" / "step000000")
        ref = ic_shear(Grid(16), 1e-3, Params())
        assert st.t == 0.0
        assert np.max(np.abs(st.coeffs - ref.coeffs)) < 1e-15

    def test_load_state_rejects_non_dump(self, tmp_path):
        with pytest.raises(ValueError, match="not a state dump"):
            load_state(tmp_path)
