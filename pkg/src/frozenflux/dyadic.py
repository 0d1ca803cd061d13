"""Smooth dyadic cutoffs and the hybrid Littlewood-Paley block decomposition.

The low-pass profile chi is built from the standard bump seed
g(s) = exp(-1/s) (s > 0):

    chi(t) = g(6/5 - t) / (g(6/5 - t) + g(t - 1))

so chi is exactly 1 for t <= 1, exactly 0 for t >= 6/5, and smooth in
between.  The annulus profile is psi(s) = chi(s/2) - chi(s), supported in
[1, 12/5].  Isotropic blocks Delta_q use psi(2^{-q}|xi|); anisotropic
blocks Delta^1_k use the same profile on |xi1| only, with the lowest k
replaced by a catch-all low-pass chi(2^{-(k_min+1)}|xi1|) that absorbs
the |xi1| < 2^{k_min+1} modes, xi1 = 0 included, so the sum over k
telescopes to the identity exactly.

On a fixed grid only finitely many shells are active; the ranges are
chosen so the partition of unity is exact on every lattice point (the
extreme chi factors are always evaluated outside their transition zone),
reconstructing the mean-zero projection of any field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import Grid, SpectralField

__all__ = [
    "bump_seed",
    "chi",
    "psi",
    "BlockIndex",
    "BlockRanges",
    "LittlewoodPaley",
    "get_lp",
    "dyadic_block",
]


def bump_seed(s):
    """g(s) = exp(-1/s) for s > 0, zero otherwise (vectorized)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0.0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def chi(t):
    """Smooth low-pass profile: 1 for t <= 1, 0 for t >= 6/5."""
    t = np.asarray(t, dtype=float)
    a = bump_seed(6.0 / 5.0 - t)
    b = bump_seed(t - 1.0)
    # denominator never vanishes: a > 0 for t < 6/5, b > 0 for t > 1
    return a / (a + b)


def psi(s):
    """Annulus profile chi(s/2) - chi(s); nonnegative, supported in [1, 12/5]."""
    return chi(np.asarray(s, dtype=float) / 2.0) - chi(s)


@dataclass(frozen=True, order=True)
class BlockIndex:
    """Key of one hybrid block: isotropic scale q, anisotropic xi1-scale k."""

    q: int
    k: int

    def could_be_empty(self) -> bool:
        """True when |xi1| <= |xi| forces the block to vanish (2^k > 4 * 2^q)."""
        return self.k > self.q + 2


@dataclass(frozen=True)
class BlockRanges:
    """Active shell ranges for a grid; k = k_min is the catch-all bucket."""

    q_min: int
    q_max: int
    k_min: int
    k_max: int

    @property
    def q_range(self) -> range:
        return range(self.q_min, self.q_max + 1)

    @property
    def k_range(self) -> range:
        return range(self.k_min, self.k_max + 1)

    def indices(self):
        """All (q, k) block keys in the deterministic order: ascending q, then k."""
        return [BlockIndex(q, k) for q in self.q_range for k in self.k_range]

    @classmethod
    def for_grid(cls, grid: Grid) -> "BlockRanges":
        kappa0 = grid.kappa0
        nyq = (grid.n / 2) * kappa0
        # Two shells below the lowest nonzero |xi| = kappa0 guarantee the
        # low-end chi factor sits past its transition zone (argument >= 1.2).
        q_min = math.floor(math.log2(kappa0)) - 2
        # Top shell must have chi(2^{-(q_max+1)}|xi|) = 1 at |xi| = sqrt(2)*nyq.
        q_max = math.ceil(math.log2(math.sqrt(2.0) * nyq)) - 1
        # Catch-all must equal 1 only on the xi1 = 0 line:
        # chi(2^{-(k_min+1)} kappa0) = 0 needs 2^{-(k_min+1)} kappa0 >= 6/5.
        k_min = math.floor(math.log2(kappa0 * 5.0 / 6.0)) - 1
        k_max = math.ceil(math.log2(nyq)) - 1
        return cls(q_min=q_min, q_max=q_max, k_min=k_min, k_max=k_max)


class LittlewoodPaley:
    """Precomputed block multipliers for one grid.

    ``iso(q)`` is the isotropic shell multiplier, ``aniso(k)`` the
    anisotropic one (catch-all at k = k_min), ``hybrid(q, k)`` their
    product.  Both one-parameter families sum to 1 exactly on the lattice
    (to the mean-zero projection, for the isotropic family).
    """

    def __init__(self, grid: Grid, ranges: BlockRanges | None = None):
        self.grid = grid
        self.ranges = ranges if ranges is not None else BlockRanges.for_grid(grid)
        self._iso = {}
        self._aniso = {}
        abs_xi = grid.k_abs
        abs_xi1 = np.abs(np.broadcast_to(grid.k1, (grid.n, grid.n)))
        for q in self.ranges.q_range:
            self._iso[q] = psi(abs_xi / 2.0**q)
        for k in self.ranges.k_range:
            if k == self.ranges.k_min:
                self._aniso[k] = chi(abs_xi1 / 2.0 ** (k + 1))
            else:
                self._aniso[k] = psi(abs_xi1 / 2.0**k)

    def iso(self, q: int) -> np.ndarray:
        try:
            return self._iso[q]
        except KeyError:
            raise ValueError(
                f"isotropic shell q={q} outside active range "
                f"[{self.ranges.q_min}, {self.ranges.q_max}]"
            ) from None

    def aniso(self, k: int) -> np.ndarray:
        try:
            return self._aniso[k]
        except KeyError:
            raise ValueError(
                f"anisotropic shell k={k} outside active range "
                f"[{self.ranges.k_min}, {self.ranges.k_max}]"
            ) from None

    def hybrid(self, q: int, k: int) -> np.ndarray:
        return self.iso(q) * self.aniso(k)

    def partition_residual(self) -> float:
        """Max lattice deviation of the hybrid sum from the mean-zero projection.

        Sum_{q,k} psi_q psi^1_k equals 1 at every nonzero lattice frequency
        and 0 at xi = 0 (psi(0) = 0): the decomposition reconstructs exactly
        the mean-zero part of any field.
        """
        total = np.zeros((self.grid.n, self.grid.n))
        for q in self.ranges.q_range:
            for k in self.ranges.k_range:
                total += self.hybrid(q, k)
        target = np.ones_like(total)
        target[0, 0] = 0.0
        return float(np.max(np.abs(total - target)))


_LP_CACHE: dict = {}


def get_lp(grid: Grid) -> LittlewoodPaley:
    """Per-grid cache; the multipliers are pure functions of (n, length)."""
    key = (grid.n, grid.length)
    lp = _LP_CACHE.get(key)
    if lp is None:
        lp = _LP_CACHE[key] = LittlewoodPaley(grid)
    return lp


def dyadic_block(f: SpectralField, q: int | None = None, k: int | None = None) -> SpectralField:
    """Apply Delta_q, Delta^1_k, or the hybrid Delta_q Delta^1_k to a field.

    Passing None for q or k omits that factor.  The multipliers are real
    and even, so Hermitian inputs stay Hermitian.
    """
    lp = get_lp(f.grid)
    if q is not None and k is not None:
        m = lp.hybrid(q, k)
    elif q is not None:
        m = lp.iso(q)
    elif k is not None:
        m = lp.aniso(k)
    else:
        raise ValueError("dyadic_block needs at least one of q, k")
    return SpectralField(f.grid, m * f.coeffs, real=f.real)
