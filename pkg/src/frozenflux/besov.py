"""Hybrid Besov norms from dyadic block spectra, plus the product-law harness.

A block spectrum maps each hybrid block (q, k) to the L^2 norm of the
projected field; for a vector or matrix field the components are combined
in l^2 before taking the norm, so the spectrum of u = (u1, u2) is the
spectrum of |u|.  Three weighted-sum norms are built on top:

    hatB^s      sum_{q,k} 2^{qs} * entry(q,k)
    tildeB^{s,t}  2^{qs} on blocks with k+1 >= 2q, else 2^{(2q-k)t}
    checkB^s    sum_{q,k} 2^{(2q-k)s} * entry(q,k)

All sums run in a fixed order (ascending q, then ascending k) so values
are bit-reproducible.  Because every block multiplier vanishes at xi = 0,
the norms only ever see the mean-zero part of a field.

The empirical harness draws band-limited random fields (i.i.d. complex
Gaussian coefficients on 1 <= |xi|/kappa0 <= n/4, Hermitian-symmetrized,
mean-zeroed), multiplies them pointwise in physical space with two-thirds
dealiasing, and reports min/median/max of the product-law ratio.  The
paper-style inequalities hide constants, so tests assert stability of the
ratio across the sample set rather than absolute bounds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dyadic import BlockIndex, BlockRanges, get_lp
from .spectral import (
    Grid,
    SpectralField,
    dealias_coeffs,
    hermitian_symmetrize,
    linf_norm,
    to_physical,
    to_spectral,
)

__all__ = [
    "BlockSpectrum",
    "NormReport",
    "RatioStats",
    "block_spectrum",
    "norm_hatB",
    "norm_tildeB",
    "norm_checkB",
    "norm_hatB_cap",
    "norm_report",
    "random_field",
    "spectral_product",
    "product_law_ratio",
]


@dataclass(frozen=True)
class BlockSpectrum:
    """Per-block L^2 norms of one (possibly multi-component) field."""

    ranges: BlockRanges
    entries: dict  # BlockIndex -> float, complete over ranges.indices()

    def entry(self, q: int, k: int) -> float:
        return self.entries[BlockIndex(q, k)]

    def sum_of_squares(self) -> float:
        """Sum entry^2; reproduces ||f||_{L^2}^2 up to shell overlap (~2%)."""
        return float(sum(v * v for v in self.entries.values()))

    def to_csv(self) -> str:
        lines = ["q,k,value"]
        for idx in self.ranges.indices():
            lines.append(f"{idx.q},{idx.k},{self.entries[idx]:.17g}")
        return "\n".join(lines) + "\n"


def _coeff_list(f):
    """Normalize input to (grid, [coeff arrays]); accepts field(s) of one grid."""
    if isinstance(f, SpectralField):
        return f.grid, [f.coeffs]
    fields = list(f)
    if not fields:
        raise ValueError("block_spectrum needs at least one field component")
    grid = fields[0].grid
    for g in fields[1:]:
        if g.grid is not grid and (g.grid.n, g.grid.length) != (grid.n, grid.length):
            raise ValueError("all components must share one grid")
    return grid, [g.coeffs for g in fields]


def block_spectrum(f) -> BlockSpectrum:
    """Hybrid block spectrum of a field or of a tuple of components (l^2)."""
    grid, coeff_arrays = _coeff_list(f)
    lp = get_lp(grid)
    power = np.zeros((grid.n, grid.n))
    for c in coeff_arrays:
        power += np.abs(c) ** 2
    entries = {}
    for q in lp.ranges.q_range:
        iso = lp.iso(q)
        iso_power = iso * iso * power
        for k in lp.ranges.k_range:
            an = lp.aniso(k)
            val = float(np.sum(an * an * iso_power))
            entries[BlockIndex(q, k)] = grid.length * np.sqrt(val)
    return BlockSpectrum(ranges=lp.ranges, entries=entries)


def norm_hatB(spec: BlockSpectrum, s: float) -> float:
    total = 0.0
    for idx in spec.ranges.indices():
        total += 2.0 ** (idx.q * s) * spec.entries[idx]
    return total


def norm_tildeB(spec: BlockSpectrum, s: float, t: float) -> float:
    total = 0.0
    for idx in spec.ranges.indices():
        if idx.k + 1 >= 2 * idx.q:
            total += 2.0 ** (idx.q * s) * spec.entries[idx]
        else:
            total += 2.0 ** ((2 * idx.q - idx.k) * t) * spec.entries[idx]
    return total


def norm_checkB(spec: BlockSpectrum, s: float) -> float:
    total = 0.0
    for idx in spec.ranges.indices():
        total += 2.0 ** ((2 * idx.q - idx.k) * s) * spec.entries[idx]
    return total


def norm_hatB_cap(spec: BlockSpectrum, s1: float = 0.0, s2: float = 1.0) -> float:
    """Intersection-space norm: max of the two hatB norms."""
    return max(norm_hatB(spec, s1), norm_hatB(spec, s2))


@dataclass(frozen=True)
class NormReport:
    """Bundle of norms of one field, serializable to JSON.

    hatB maps s -> value, tildeB maps (s, t) -> value, checkB maps
    s -> value; linf is the physical sup norm.
    """

    hatB: dict
    tildeB: dict
    checkB: dict
    linf: float

    def __post_init__(self):
        for v in (*self.hatB.values(), *self.tildeB.values(), *self.checkB.values(), self.linf):
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"norm value {v} is not finite and nonnegative")

    def to_json(self) -> str:
        payload = {
            "hatB": {f"{s:g}": v for s, v in self.hatB.items()},
            "tildeB": {f"{s:g},{t:g}": v for (s, t), v in self.tildeB.items()},
            "checkB": {f"{s:g}": v for s, v in self.checkB.items()},
            "linf": self.linf,
        }
        return json.dumps(payload, sort_keys=True)


def norm_report(
    f,
    hat_orders=(0.0, 1.0, 2.0),
    tilde_orders=((0.0, 1.0),),
    check_orders=(1.0,),
) -> NormReport:
    grid, coeff_arrays = _coeff_list(f)
    spec = block_spectrum(f)
    sup = 0.0
    for c in coeff_arrays:
        sup = max(sup, linf_norm(grid, c))
    return NormReport(
        hatB={s: norm_hatB(spec, s) for s in hat_orders},
        tildeB={(s, t): norm_tildeB(spec, s, t) for (s, t) in tilde_orders},
        checkB={s: norm_checkB(spec, s) for s in check_orders},
        linf=sup,
    )


# ---------------------------------------------------------------------------
# random-field ensemble and product laws
# ---------------------------------------------------------------------------


def random_field(grid: Grid, rng) -> SpectralField:
    """Band-limited random real field: i.i.d. complex Gaussian coefficients on
    1 <= |xi|/kappa0 <= n/4, Hermitian-symmetrized, mean removed."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    n = grid.n
    c = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    band = (grid.k_abs >= grid.kappa0) & (grid.k_abs <= grid.kappa0 * n / 4.0)
    c = hermitian_symmetrize(c * band)
    c[0, 0] = 0.0
    return SpectralField(grid, c)


def spectral_product(f: SpectralField, g: SpectralField, rule: str = "two_thirds") -> SpectralField:
    """Pointwise product computed in physical space, then dealiased."""
    prod = to_physical(f.grid, f.coeffs) * to_physical(g.grid, g.coeffs)
    return SpectralField(f.grid, dealias_coeffs(f.grid, to_spectral(f.grid, prod), rule))


class RatioStats(NamedTuple):
    min: float
    median: float
    max: float

    @classmethod
    def of(cls, values) -> "RatioStats":
        arr = np.asarray(values, dtype=float)
        return cls(float(arr.min()), float(np.median(arr)), float(arr.max()))


def product_law_ratio(
    sample_count: int,
    s: float,
    t: float,
    rng_seed: int,
    grid: Grid | None = None,
    law: str = "hat",
) -> RatioStats:
    """Empirical product-law ratios over a seeded random-field sample.

    law = "hat":   ||fg||_{hatB^{s+t-1}} / (||f||_{hatB^s} ||g||_{hatB^t});
                   requires s, t <= 1 and s + t > 0.
    law = "tilde": ||fg||_{tildeB^{0,1}} / (||f||_{tildeB^{0,1}} ||g||_{hatB^1}).
    law = "check": ||fg||_{checkB^1} / (||f||_{hatB^1} ||g||_{checkB^1}).

    Degenerate samples (zero denominator) are discarded and redrawn.
    """
    if law == "hat" and not (s <= 1.0 and t <= 1.0 and s + t > 0.0):
        raise ValueError(f"product law requires s, t <= 1 and s + t > 0, got s={s}, t={t}")
    if law not in ("hat", "tilde", "check"):
        raise ValueError(f"unknown product law {law!r}")
    if grid is None:
        grid = Grid(64)
    rng = np.random.default_rng(rng_seed)
    ratios = []
    while len(ratios) < sample_count:
        f = random_field(grid, rng)
        g = random_field(grid, rng)
        sf, sg = block_spectrum(f), block_spectrum(g)
        sp = block_spectrum(spectral_product(f, g))
        if law == "hat":
            den = norm_hatB(sf, s) * norm_hatB(sg, t)
            num = norm_hatB(sp, s + t - 1.0)
        elif law == "tilde":
            den = norm_tildeB(sf, 0.0, 1.0) * norm_hatB(sg, 1.0)
            num = norm_tildeB(sp, 0.0, 1.0)
        else:
            den = norm_hatB(sf, 1.0) * norm_checkB(sg, 1.0)
            num = norm_checkB(sp, 1.0)
        if den == 0.0:
            continue
        ratios.append(num / den)
    return RatioStats.of(ratios)
