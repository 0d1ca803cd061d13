"""Discrete torus grid, Fourier transforms, multipliers, derivatives, dealiasing.

Everything lives on the square torus [0, length)^2 sampled on an n-by-n grid
(n a power of two).  Physical arrays are real float64 with axis 0 <-> x1 and
axis 1 <-> x2 (C order).  Spectral arrays are complex128 over the integer
wavenumber lattice {-n/2+1, ..., n/2}^2 scaled by 2*pi/length, stored in FFT
layout (index i carries mode i for i <= n/2, i - n otherwise).

Normalization (fixed, relied on by the binary dump format): the forward
transform divides by n^2, so coefficients are the plain Fourier-series
coefficients of the field (constant 1.0 -> coefficient 1.0 at xi = 0); the
inverse transform is the unweighted series sum.  Under this pairing

    ||f||_{L^2([0,length)^2)}^2 = length^2 * sum_xi |f_hat(xi)|^2.

Zero-mode rule: negative powers of Lambda = (-Laplace)^{1/2} and the
Lambda^{-1} div / Lambda^{-1} curl potentials set the xi = 0 output
coefficient to 0; all perturbation fields are mean-zero by construction.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Grid",
    "SpectralField",
    "to_spectral",
    "to_physical",
    "hermitian_reflect",
    "hermitian_symmetrize",
    "hermitian_error",
    "transform",
    "apply_multiplier",
    "deriv_x1",
    "deriv_x2",
    "laplacian",
    "lam_power",
    "lam_inv_div",
    "lam_inv_curl",
    "derivative",
    "dealias",
    "dealias_coeffs",
    "l2_norm",
    "linf_norm",
    "write_field_dump",
    "read_field_dump",
    "KIND_PHYSICAL",
    "KIND_SPECTRAL",
]

FFLX_MAGIC = b"FFLX1"
KIND_PHYSICAL = 0
KIND_SPECTRAL = 1

#: dealiasing rules: name -> fraction of the Nyquist wavenumber kept
DEALIAS_RULES = {"two_thirds": 2.0 / 3.0, "half": 0.5}


@dataclass(frozen=True)
class Grid:
    """Uniform n-by-n sampling of the torus [0, length)^2.

    Parameters
    ----------
    n : int
        Points per axis; power of two, at least 16.
    length : float
        Domain period (default 2*pi, which makes the wavenumber lattice the
        integer lattice).

    Derived arrays (set once, treated as immutable):

    - ``x``      : (n,) physical coordinates along one axis
    - ``x1, x2`` : broadcastable coordinate arrays, shapes (n,1) and (1,n)
    - ``modes``  : (n,) integer mode numbers in FFT layout, in {-n/2+1..n/2}
    - ``k1, k2`` : broadcastable wavenumber arrays (modes * 2*pi/length)
    - ``k_sq``   : (n,n) |xi|^2
    - ``k_abs``  : (n,n) |xi|
    """

    n: int
    length: float = 2.0 * np.pi

    x: np.ndarray = field(init=False, repr=False, compare=False)
    x1: np.ndarray = field(init=False, repr=False, compare=False)
    x2: np.ndarray = field(init=False, repr=False, compare=False)
    modes: np.ndarray = field(init=False, repr=False, compare=False)
    k1: np.ndarray = field(init=False, repr=False, compare=False)
    k2: np.ndarray = field(init=False, repr=False, compare=False)
    k_sq: np.ndarray = field(init=False, repr=False, compare=False)
    k_abs: np.ndarray = field(init=False, repr=False, compare=False)
    kappa0: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = self.n
        if n < 16 or (n & (n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 16, got {n}")
        if not (self.length > 0.0):
            raise ValueError(f"domain length must be positive, got {self.length}")
        kappa0 = 2.0 * np.pi / self.length
        idx = np.arange(n)
        modes = np.where(idx <= n // 2, idx, idx - n)
        k = kappa0 * modes.astype(float)
        x = self.length * idx.astype(float) / n
        object.__setattr__(self, "kappa0", kappa0)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "x1", x[:, None])
        object.__setattr__(self, "x2", x[None, :])
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "k1", k[:, None])
        object.__setattr__(self, "k2", k[None, :])
        object.__setattr__(self, "k_sq", self.k1**2 + self.k2**2)
        object.__setattr__(self, "k_abs", np.sqrt(self.k_sq))

    def zeros_spectral(self) -> np.ndarray:
        return np.zeros((self.n, self.n), dtype=np.complex128)

    def zeros_physical(self) -> np.ndarray:
        return np.zeros((self.n, self.n), dtype=np.float64)

    def dealias_mask(self, rule: str = "two_thirds") -> np.ndarray:
        """Boolean keep-mask zeroing max(|xi1|,|xi2|) > rule * (n/2) * kappa0."""
        try:
            frac = DEALIAS_RULES[rule]
        except KeyError:
            raise ValueError(f"unknown dealias rule {rule!r}") from None
        cutoff = frac * (self.n / 2) * self.kappa0
        return (np.abs(self.k1) <= cutoff) & (np.abs(self.k2) <= cutoff)


def to_spectral(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Forward transform of a real physical array; divides by n^2."""
    if values.shape != (grid.n, grid.n):
        raise ValueError(f"physical array shape {values.shape} does not match grid n={grid.n}")
    return np.fft.fft2(values) / grid.n**2


def to_physical(grid: Grid, coeffs: np.ndarray, real: bool = True) -> np.ndarray:
    """Inverse transform (plain series sum).  real=True drops the imaginary part."""
    if coeffs.shape != (grid.n, grid.n):
        raise ValueError(f"spectral array shape {coeffs.shape} does not match grid n={grid.n}")
    out = np.fft.ifft2(coeffs) * grid.n**2
    return out.real.copy() if real else out


def hermitian_reflect(coeffs: np.ndarray) -> np.ndarray:
    """conj(coeffs(-xi)) in FFT layout; equals coeffs itself iff the field is real."""
    return np.conj(np.roll(coeffs[::-1, ::-1], shift=(1, 1), axis=(0, 1)))


def hermitian_symmetrize(coeffs: np.ndarray) -> np.ndarray:
    return 0.5 * (coeffs + hermitian_reflect(coeffs))


def hermitian_error(coeffs: np.ndarray) -> float:
    """Max deviation from the real-field symmetry coeffs(-xi) = conj(coeffs(xi))."""
    return float(np.max(np.abs(coeffs - hermitian_reflect(coeffs))))


@dataclass(frozen=True)
class SpectralField:
    """A field on the torus held by its Fourier coefficients.

    Real physical fields keep the Hermitian symmetry
    coeffs(-xi) = conj(coeffs(xi)); operations built from real symbols
    preserve it.  Diagnostic fields built from odd symbols (the
    diagonalized variables) are legitimately non-Hermitian and carry
    ``real=False``.
    """

    grid: Grid
    coeffs: np.ndarray
    real: bool = True

    def __post_init__(self) -> None:
        if self.coeffs.shape != (self.grid.n, self.grid.n):
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid n={self.grid.n}"
            )

    @classmethod
    def from_physical(cls, grid: Grid, values: np.ndarray) -> "SpectralField":
        return cls(grid, to_spectral(grid, np.asarray(values, dtype=float)))

    def physical(self) -> np.ndarray:
        return to_physical(self.grid, self.coeffs, real=self.real)

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy(), self.real)


def transform(grid: Grid, data: np.ndarray, direction: str) -> np.ndarray:
    """Spec-level entry point: direction 'forward' (physical -> coeffs) or 'inverse'."""
    if direction == "forward":
        return to_spectral(grid, data)
    if direction == "inverse":
        return to_physical(grid, data)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def apply_multiplier(f: SpectralField, m: np.ndarray) -> SpectralField:
    """Apply a scalar Fourier multiplier given as an array over the lattice."""
    m = np.asarray(m)
    if not np.all(np.isfinite(m)):
        raise ValueError("multiplier is non-finite on the lattice")
    real_out = f.real and bool(np.isrealobj(m))
    return SpectralField(f.grid, m * f.coeffs, real=real_out)


# ---------------------------------------------------------------------------
# derivatives / fractional Laplacian powers (raw-coefficient versions)
# ---------------------------------------------------------------------------


def deriv_x1(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    return (1j * grid.k1) * coeffs


def deriv_x2(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    return (1j * grid.k2) * coeffs


def laplacian(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    return -grid.k_sq * coeffs


def lam_power(grid: Grid, coeffs: np.ndarray, s: float) -> np.ndarray:
    """Lambda^s = |xi|^s multiplier; for s < 0 the xi = 0 output is set to 0."""
    if s >= 0:
        mult = grid.k_abs**s
        if s == 0:
            return coeffs.copy()
        mult[0, 0] = 0.0 if s > 0 else 1.0
    else:
        with np.errstate(divide="ignore"):
            mult = np.where(grid.k_abs > 0, grid.k_abs, 1.0) ** s
        mult[0, 0] = 0.0
    return mult * coeffs


def lam_inv_div(grid: Grid, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """d = Lambda^{-1} div u, i.e. hat d = (i xi1 hat u1 + i xi2 hat u2)/|xi|."""
    safe = np.where(grid.k_abs > 0, grid.k_abs, 1.0)
    out = (1j * grid.k1 * u1 + 1j * grid.k2 * u2) / safe
    out[0, 0] = 0.0
    return out


def lam_inv_curl(grid: Grid, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """omega = Lambda^{-1} curl u with curl u = d_{x2} u1 - d_{x1} u2."""
    safe = np.where(grid.k_abs > 0, grid.k_abs, 1.0)
    out = (1j * grid.k2 * u1 - 1j * grid.k1 * u2) / safe
    out[0, 0] = 0.0
    return out


def derivative(f, which: str, s: float | None = None):
    """Spec-level dispatcher.

    which in {'dx1', 'dx2', 'lam'} takes a single SpectralField;
    which in {'lam_inv_div', 'lam_inv_curl'} takes a pair (u1, u2) of
    SpectralFields and returns a scalar SpectralField.
    """
    if which in ("lam_inv_div", "lam_inv_curl"):
        u1, u2 = f
        op = lam_inv_div if which == "lam_inv_div" else lam_inv_curl
        return SpectralField(u1.grid, op(u1.grid, u1.coeffs, u2.coeffs), real=u1.real and u2.real)
    if which == "dx1":
        return SpectralField(f.grid, deriv_x1(f.grid, f.coeffs), real=f.real)
    if which == "dx2":
        return SpectralField(f.grid, deriv_x2(f.grid, f.coeffs), real=f.real)
    if which == "lam":
        if s is None:
            raise ValueError("which='lam' requires the exponent s")
        return SpectralField(f.grid, lam_power(f.grid, f.coeffs, s), real=f.real)
    raise ValueError(f"unknown derivative kind {which!r}")


def dealias_coeffs(grid: Grid, coeffs: np.ndarray, rule: str = "two_thirds") -> np.ndarray:
    return coeffs * grid.dealias_mask(rule)


def dealias(f: SpectralField, rule: str = "two_thirds") -> SpectralField:
    return SpectralField(f.grid, dealias_coeffs(f.grid, f.coeffs, rule), real=f.real)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def l2_norm(grid: Grid, coeffs: np.ndarray) -> float:
    """Physical L^2 norm via Plancherel: length * sqrt(sum |coeffs|^2)."""
    return float(grid.length * np.sqrt(np.sum(np.abs(coeffs) ** 2)))


def linf_norm(grid: Grid, coeffs: np.ndarray) -> float:
    """Sup norm of the physical-space field (modulus for non-Hermitian data)."""
    return float(np.max(np.abs(to_physical(grid, coeffs, real=False))))


# ---------------------------------------------------------------------------
# binary field dumps
# ---------------------------------------------------------------------------
#
# Layout (little-endian): magic "FFLX1" (5 bytes), u32 n, f64 length, u8 kind
# (0 = physical real f64 row-major, 1 = spectral complex interleaved f64),
# then the payload.

_HEADER = struct.Struct("<5sIdB")


def write_field_dump(path, grid: Grid, data: np.ndarray, kind: int) -> None:
    if kind == KIND_PHYSICAL:
        payload = np.ascontiguousarray(data, dtype="<f8")
    elif kind == KIND_SPECTRAL:
        payload = np.ascontiguousarray(data, dtype="<c16")
    else:
        raise ValueError(f"unknown dump kind {kind}")
    if payload.shape != (grid.n, grid.n):
        raise ValueError(f"payload shape {payload.shape} does not match grid n={grid.n}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FFLX_MAGIC, grid.n, grid.length, kind))
        fh.write(payload.tobytes())


def read_field_dump(path):
    """Returns (grid, kind, array); array dtype matches the stored kind."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"truncated field dump: {path}")
    magic, n, length, kind = _HEADER.unpack_from(raw)
    if magic != FFLX_MAGIC:
        raise ValueError(f"bad magic {magic!r} in field dump: {path}")
    grid = Grid(n, length)
    body = raw[_HEADER.size:]
    if kind == KIND_PHYSICAL:
        expected = n * n * 8
        dtype = "<f8"
    elif kind == KIND_SPECTRAL:
        expected = n * n * 16
        dtype = "<c16"
    else:
        raise ValueError(f"unknown dump kind {kind} in {path}")
    if len(body) != expected:
        raise ValueError(f"payload size {len(body)} != expected {expected} in {path}")
    arr = np.frombuffer(body, dtype=dtype).reshape(n, n).copy()
    return grid, kind, arr
