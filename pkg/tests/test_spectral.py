"""
Tests for the torus grid and transform layer.

Validates:
- grid construction and validation
- FFT normalization (coefficient convention) and round trips
- Hermitian symmetry helpers
- dealias masks at the exact band edges
- derivative / Laplacian-power multipliers and their zero-mode rule
- Plancherel and sup norms
- the binary field-dump format, header included
"""

import struct

import numpy as np
import pytest

from frozenflux.spectral import (
    DEALIAS_RULES,
    FFLX_MAGIC,
    Grid,
    KIND_PHYSICAL,
    KIND_SPECTRAL,
    SpectralField,
    deriv_x1,
    deriv_x2,
    hermitian_error,
    hermitian_reflect,
    hermitian_symmetrize,
    l2_norm,
    lam_inv_curl,
    lam_inv_div,
    lam_power,
    laplacian,
    linf_norm,
    read_field_dump,
    to_physical,
    to_spectral,
    transform,
    write_field_dump,
)


class TestGrid:
    def test_basic_construction(self):
        g = Grid(64)
        assert g.n == 64
        assert np.isclose(g.length, 2 * np.pi)
        assert np.isclose(g.kappa0, 1.0)
        assert g.x.shape == (64,)
        assert g.x1.shape == (64, 1)
        assert g.x2.shape == (1, 64)

    def test_mode_numbering(self):
        g = Grid(16)
        assert g.modes[0] == 0
        assert g.modes[8] == 8
        assert g.modes[9] == -7
        assert g.modes[-1] == -1

    def test_custom_length_scales_wavenumbers(self):
        g = Grid(32, length=np.pi)
        assert np.isclose(g.kappa0, 2.0)
        assert np.isclose(g.k1[1, 0], 2.0)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError, match="power of two"):
            Grid(48)

    def test_rejects_small_grid(self):
        with pytest.raises(ValueError, match="power of two"):
            Grid(8)

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError, match="length"):
            Grid(32, length=0.0)


class TestTransforms:
    def test_cosine_coefficients(self):
        """cos(x1) has coefficients exactly 1/2 at modes (+-1, 0)."""
        g = Grid(64)
        c = to_spectral(g, np.cos(g.x1) + 0.0 * g.x2)
        assert abs(c[1, 0] - 0.5) < 1e-14
        assert abs(c[-1, 0] - 0.5) < 1e-14
        c[1, 0] = 0.0
        c[-1, 0] = 0.0
        assert np.max(np.abs(c)) < 1e-14

    def test_round_trip(self):
        g = Grid(32)
        rng = np.random.default_rng(11)
        f = rng.standard_normal((32, 32))
        assert np.max(np.abs(to_physical(g, to_spectral(g, f)) - f)) < 1e-12

    def test_transform_dispatcher(self):
        g = Grid(16)
        f = np.sin(g.x2) + 0.0 * g.x1
        c = transform(g, f, "forward")
        back = transform(g, c, "inverse")
        assert np.allclose(back, f)
        with pytest.raises(ValueError, match="direction"):
            transform(g, f, "sideways")

    def test_shape_validation(self):
        g = Grid(16)
        with pytest.raises(ValueError):
            to_spectral(g, np.zeros((8, 8)))


class TestHermitian:
    def test_real_field_is_symmetric(self):
        g = Grid(32)
        rng = np.random.default_rng(3)
        c = to_spectral(g, rng.standard_normal((32, 32)))
        assert hermitian_error(c) < 1e-14

    def test_reflect_is_involutive(self):
        rng = np.random.default_rng(4)
        c = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        assert np.allclose(hermitian_reflect(hermitian_reflect(c)), c)

    def test_symmetrize_produces_real_field(self):
        g = Grid(16)
        rng = np.random.default_rng(5)
        c = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        sym = hermitian_symmetrize(c)
        phys = to_physical(g, sym, real=False)
        assert np.max(np.abs(phys.imag)) < 1e-12


class TestDealias:
    def test_two_thirds_band_edge(self):
        """n=64: keep |m| <= 21, drop |m| >= 22 (cutoff 64/3 is not an integer)."""
        g = Grid(64)
        mask = g.dealias_mask("two_thirds")
        assert mask[21, 0]
        assert not mask[22, 0]
        assert mask[0, 21]
        assert not mask[0, 22]
        assert mask[21, 21]

    def test_half_band_edge(self):
        g = Grid(64)
        mask = g.dealias_mask("half")
        assert mask[16, 0]
        assert not mask[17, 0]

    def test_rules_table(self):
        assert set(DEALIAS_RULES) == {"two_thirds", "half"}
        with pytest.raises(ValueError, match="dealias"):
            Grid(32).dealias_mask("three_quarters")


class TestMultipliers:
    def test_first_derivatives(self):
        g = Grid(64)
        c = to_spectral(g, np.sin(g.x1) + 0.0 * g.x2)
        d = to_physical(g, deriv_x1(g, c))
        assert np.max(np.abs(d - np.cos(g.x1) - 0.0 * g.x2)) < 1e-12
        c2 = to_spectral(g, np.sin(3 * g.x2) + 0.0 * g.x1)
        d2 = to_physical(g, deriv_x2(g, c2))
        assert np.max(np.abs(d2 - 3 * np.cos(3 * g.x2) - 0.0 * g.x1)) < 1e-11

    def test_laplacian_eigenvalue(self):
        g = Grid(32)
        c = to_spectral(g, np.cos(2 * g.x1) + 0.0 * g.x2)
        assert np.allclose(to_physical(g, laplacian(g, c)), -4 * np.cos(2 * g.x1) + 0.0 * g.x2)

    def test_lam_power_zero_mode_rule(self):
        """Negative powers kill the mean instead of dividing by zero."""
        g = Grid(32)
        c = to_spectral(g, 2.0 + np.cos(g.x1) + 0.0 * g.x2)
        out = lam_power(g, c, -1.0)
        assert out[0, 0] == 0.0
        assert abs(out[1, 0] - 0.5) < 1e-14  # |xi| = 1 on that mode

    def test_lam_power_identity(self):
        g = Grid(32)
        rng = np.random.default_rng(8)
        c = to_spectral(g, rng.standard_normal((32, 32)))
        assert np.allclose(lam_power(g, c, 0.0), c)

    def test_lam_inv_div_on_gradient(self):
        """Lambda^-1 div grad f = -Lambda f."""
        g = Grid(64)
        c = to_spectral(g, np.cos(g.x1) + 0.0 * g.x2)
        u1, u2 = deriv_x1(g, c), deriv_x2(g, c)
        d = lam_inv_div(g, u1, u2)
        assert np.allclose(d, -lam_power(g, c, 1.0))

    def test_lam_inv_curl_of_gradient_vanishes(self):
        g = Grid(32)
        c = to_spectral(g, np.cos(g.x1 + 2 * g.x2))
        w = lam_inv_curl(g, deriv_x1(g, c), deriv_x2(g, c))
        assert np.max(np.abs(w)) < 1e-14


class TestNorms:
    def test_plancherel_on_cosine(self):
        """||cos x1||_L2 over the 2-pi torus is pi sqrt(2)."""
        g = Grid(64)
        c = to_spectral(g, np.cos(g.x1) + 0.0 * g.x2)
        assert abs(l2_norm(g, c) - np.pi * np.sqrt(2.0)) < 1e-12

    def test_plancherel_matches_quadrature(self):
        g = Grid(32)
        rng = np.random.default_rng(21)
        f = rng.standard_normal((32, 32))
        f -= f.mean()
        quad = np.sqrt(np.sum(f**2) * (g.length / g.n) ** 2)
        assert np.isclose(l2_norm(g, to_spectral(g, f)), quad, rtol=1e-12)

    def test_linf(self):
        g = Grid(32)
        f = np.sin(g.x1) + 0.0 * g.x2
        assert abs(linf_norm(g, to_spectral(g, f)) - np.max(np.abs(np.sin(g.x)))) < 1e-12


class TestSpectralField:
    def test_round_trip_and_copy(self):
        g = Grid(16)
        rng = np.random.default_rng(2)
        f = rng.standard_normal((16, 16))
        fld = SpectralField.from_physical(g, f)
        assert np.allclose(fld.physical(), f)
        dup = fld.copy()
        dup.coeffs[0, 0] = 99.0
        assert fld.coeffs[0, 0] != 99.0

    def test_shape_check(self):
        with pytest.raises(ValueError, match="shape"):
            SpectralField(Grid(16), np.zeros((4, 4), dtype=complex))


class TestFieldDump:
    def test_header_layout(self, tmp_path):
        """Magic, u32 n, f64 length, u8 kind — little endian, 18 bytes."""
        g = Grid(16, length=2 * np.pi)
        path = tmp_path / "f.fflx"
        write_field_dump(path, g, np.zeros((16, 16)), KIND_PHYSICAL)
        raw = path.read_bytes()
        magic, n, length, kind = struct.unpack("<5sIdB", raw[:18])
        assert magic == FFLX_MAGIC
        assert n == 16
        assert np.isclose(length, 2 * np.pi)
        assert kind == KIND_PHYSICAL
        assert len(raw) == 18 + 16 * 16 * 8

    def test_physical_round_trip(self, tmp_path):
        g = Grid(32, length=3.5)
        rng = np.random.default_rng(7)
        f = rng.standard_normal((32, 32))
        path = tmp_path / "p.fflx"
        write_field_dump(path, g, f, KIND_PHYSICAL)
        g2, kind, back = read_field_dump(path)
        assert (g2.n, g2.length) == (32, 3.5)
        assert kind == KIND_PHYSICAL
        assert np.array_equal(back, f)

    def test_spectral_round_trip(self, tmp_path):
        g = Grid(16)
        rng = np.random.default_rng(9)
        c = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        path = tmp_path / "s.fflx"
        write_field_dump(path, g, c, KIND_SPECTRAL)
        _, kind, back = read_field_dump(path)
        assert kind == KIND_SPECTRAL
        assert np.array_equal(back, c)

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "bad.fflx"
        path.write_bytes(b"NOTIT" + b"\x00" * 32)
        with pytest.raises(ValueError, match="magic"):
            read_field_dump(path)

    def test_rejects_truncated_payload(self, tmp_path):
        g = Grid(16)
        path = tmp_path / "t.fflx"
        write_field_dump(path, g, np.zeros((16, 16)), KIND_PHYSICAL)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValueError):
            read_field_dump(path)
