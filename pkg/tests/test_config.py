"""
Run-configuration parsing: TOML schema, defaults, validation errors, and
the tolerance table handed to the identity checks.
"""

import pytest

from frozenflux.config import ConfigError, RunConfig, load_config, parse_config

MINIMAL = """
[grid]
n = 32
"""

FULL = """
[grid]
n = 64
length = 3.141592653589793

[params]
mu = 0.5
lambda = -0.25
rho_floor = 0.2
cfl = 0.3
dealias = "half"
nonlinear = false

[ic]
type = "two_mode"
epsilon = 0.01
seed = 7

[run]
t_final = 2.5
dump_every = 10
ledger_every = 5
output_dir = "results"
"""


class TestDefaults:
    def test_minimal(self):
        cfg = parse_config(MINIMAL)
        assert cfg.n == 32
        assert cfg.length == pytest.approx(2 * 3.141592653589793)
        assert cfg.params.mu == 1.0
        assert cfg.params.lam == -1.0
        assert cfg.params.rho_floor == 0.1
        assert cfg.params.dealias == "two_thirds"
        assert cfg.params.nonlinear is True
        assert cfg.ic_type == "shear"
        assert cfg.epsilon == 1e-3
        assert cfg.seed == 0
        assert cfg.t_final == 1.0
        assert cfg.dump_every == 0
        assert cfg.ledger_every == 1
        assert cfg.output_dir == "out"

    def test_full_override(self):
        cfg = parse_config(FULL)
        assert cfg.n == 64
        assert cfg.length == pytest.approx(3.141592653589793)
        assert cfg.params.mu == 0.5
        assert cfg.params.lam == -0.25
        assert cfg.params.dealias == "half"
        assert cfg.params.nonlinear is False
        assert cfg.ic_type == "two_mode"
        assert cfg.epsilon == 0.01
        assert cfg.seed == 7
        assert cfg.t_final == 2.5
        assert cfg.dump_every == 10
        assert cfg.ledger_every == 5
        assert cfg.output_dir == "results"

    def test_raw_text_retained(self):
        cfg = parse_config(FULL)
        assert cfg.raw_text == FULL

    def test_frozen(self):
        cfg = parse_config(MINIMAL)
        with pytest.raises(Exception):
            cfg.n = 64


class TestValidation:
    def test_bad_toml(self):
        with pytest.raises(ConfigError, match="invalid TOML"):
            parse_config("[grid\nn = 32")

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match=r"unknown section \[grids\]"):
            parse_config("[grids]\nn = 32")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match=r"unknown key 'size' in section \[grid\]"):
            parse_config("[grid]\nn = 32\nsize = 4")

    def test_missing_n(self):
        with pytest.raises(ConfigError, match="missing required key 'n'"):
            parse_config("[grid]\nlength = 1.0")

    def test_float_n_rejected(self):
        with pytest.raises(ConfigError, match="grid.n must be an integer"):
            parse_config("[grid]\nn = 32.0")

    def test_non_power_of_two(self):
        with pytest.raises(ConfigError, match=r"bad \[grid\]"):
            parse_config("[grid]\nn = 48")

    def test_bad_params_forwarded(self):
        with pytest.raises(ConfigError, match=r"bad \[params\]"):
            parse_config("[grid]\nn = 32\n[params]\nmu = -1.0")

    def test_bad_ic_type(self):
        with pytest.raises(ConfigError, match="ic.type must be"):
            parse_config("[grid]\nn = 32\n[ic]\ntype = \"vortex\"")

    def test_file_ic_needs_paths(self):
        with pytest.raises(ConfigError, match="non-empty ic.paths"):
            parse_config("[grid]\nn = 32\n[ic]\ntype = \"file\"")

    def test_negative_t_final(self):
        with pytest.raises(ConfigError, match="t_final must be"):
            parse_config("[grid]\nn = 32\n[run]\nt_final = -1.0")

    def test_negative_cadence(self):
        with pytest.raises(ConfigError, match="must be >= 0"):
            parse_config("[grid]\nn = 32\n[run]\nledger_every = -2")

    def test_bad_tol_scale(self):
        with pytest.raises(ConfigError, match="tol-scale must be positive"):
            parse_config(MINIMAL, tol_scale=0.0)

    def test_section_must_be_table(self):
        with pytest.raises(ConfigError, match=r"section \[grid\] must be a table"):
            parse_config("grid = 3")


class TestDerived:
    def test_tolerances_scale(self):
        cfg = parse_config(MINIMAL, tol_scale=10.0)
        tol = cfg.tolerances()
        assert tol["identity"] == pytest.approx(1e-5)
        assert tol["div_H"] == pytest.approx(1e-7)
        assert tol["mean_b"] == pytest.approx(1e-11)

    def test_as_dict_round_trip_keys(self):
        d = parse_config(FULL).as_dict()
        assert d["grid"]["n"] == 64
        assert d["params"]["lambda"] == -0.25
        assert d["ic"]["type"] == "two_mode"
        assert d["run"]["output_dir"] == "results"

    def test_load_config(self, tmp_path):
        p = tmp_path / "run.toml"
        p.write_text(MINIMAL)
        cfg = load_config(p)
        assert isinstance(cfg, RunConfig)
        assert cfg.n == 32

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read config"):
            load_config(tmp_path / "nope.toml")
