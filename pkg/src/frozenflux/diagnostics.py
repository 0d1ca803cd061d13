"""Monitored quantities derived from a solver state.

Three groups live here:

* pointwise/algebraic residuals — the frozen-flux law, the mass-Jacobian
  relation, the component and trace identities, div H, and the mean of b.
  All are sup norms over the physical grid.
* diagonalized variables — the Helmholtz pair (d, omega), the field
  script-H = P(D) applied to the first-order combination of (b, H), its
  lambda_-/+^(-1/2) weightings, and the per-block energies f_{q,k}.  The
  projector P has an odd symbol, so these carry anti-Hermitian spectra;
  norms only see moduli.
* the run ledger — per-snapshot Besov norms and residuals, running
  suprema, trapezoidal dissipation integrals, and the functional

      X(t) = sup ||A'||_{hatB^1} + sup ||u||_{hatB^0}
           + sup ||lam_-^{-1/2} scrH_1||_{tildeB^{0,1}}
           + sup ||lam_+^{-1/2} scrH_2||_{hatB^0 cap hatB^1}
           + int ||u||_{hatB^2} dt + sqrt(int ||b||^2_{hatB^1} dt)
           + sqrt(int ||H||^2_{hatB^1} dt).

X is folded row by row with a fixed operation order, so replaying a dumped
CSV reproduces it bit-exactly.

The weighted field lam_-^{-1/2} scrH_1 is evaluated through a single fused
multiplier (the 1/|xi_1| of the weight cancels the xi_1 prefactor of
scrH_1); on the line xi_1 = 0 the fused symbol has a sign discontinuity and
is set to 0, consistent with sign(0) = 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import besov
from .dyadic import get_lp
from .spectral import (
    Grid,
    SpectralField,
    l2_norm,
    lam_inv_curl,
    lam_inv_div,
    to_physical,
)

__all__ = [
    "helmholtz_split",
    "reconstruct_velocity",
    "compute_script_H",
    "diag_velocity",
    "ResidualRecord",
    "residuals",
    "LinearizedVars",
    "linearized_vars",
    "energy_fqk",
    "RunLedger",
    "LEDGER_COLUMNS",
    "compute_X",
    "accumulate_dissipation",
    "lemma_ratios",
    "ledger_checksum",
    "content_hash",
    "write_manifest",
]


# ---------------------------------------------------------------------------
# Helmholtz variables
# ---------------------------------------------------------------------------


def helmholtz_split(u) -> tuple[SpectralField, SpectralField]:
    """(d, omega) = (Lambda^-1 div u, Lambda^-1 curl u) for a velocity pair."""
    u1, u2 = u
    g = u1.grid
    d = lam_inv_div(g, u1.coeffs, u2.coeffs)
    w = lam_inv_curl(g, u1.coeffs, u2.coeffs)
    return SpectralField(g, d), SpectralField(g, w)


def reconstruct_velocity(d: SpectralField, omega: SpectralField):
    """Invert the split: u = -Lambda^-1 grad d - Lambda^-1 grad^perp omega,
    grad^perp = (d_x2, -d_x1).  Exact for mean-zero velocities."""
    g = d.grid
    safe = np.where(g.k_abs > 0, g.k_abs, 1.0)
    u1 = (-1j * g.k1 * d.coeffs - 1j * g.k2 * omega.coeffs) / safe
    u2 = (-1j * g.k2 * d.coeffs + 1j * g.k1 * omega.coeffs) / safe
    u1[0, 0] = 0.0
    u2[0, 0] = 0.0
    return SpectralField(g, u1), SpectralField(g, u2)


# ---------------------------------------------------------------------------
# diagonalized variables
# ---------------------------------------------------------------------------

_PROJ_CACHE: dict = {}


def _projector_arrays(grid: Grid):
    """Entries (P11, P12, P22) of the diagonalizer P(xi) over the lattice.

    Off the line xi2 = 0: P = [[-xi2, xi1 c], [xi1 c, xi2]]/N with
    c = |xi2|/(|xi| + |xi2|), N = sqrt(xi2^2 + xi1^2 c^2).  On the line
    (xi1 != 0) the limit is [[-1, s], [s, 1]]/sqrt(2), s = sign(xi1).
    Zero at the origin.
    """
    key = (grid.n, grid.length)
    got = _PROJ_CACHE.get(key)
    if got is not None:
        return got
    k1, k2, rad = grid.k1, grid.k2, grid.k_abs
    ax2 = np.abs(k2)
    general = ax2 > 0
    axis = (ax2 == 0) & (np.abs(k1) > 0)
    denom = np.where(rad + ax2 > 0, rad + ax2, 1.0)
    c = ax2 / denom
    nrm = np.sqrt(k2 * k2 + k1 * k1 * c * c)
    nrm = np.where(nrm > 0, nrm, 1.0)
    sg = np.sign(k1)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    P11 = np.where(general, -k2 / nrm, np.where(axis, -inv_sqrt2, 0.0))
    P12 = np.where(general, k1 * c / nrm, np.where(axis, sg * inv_sqrt2, 0.0))
    P22 = np.where(general, k2 / nrm, np.where(axis, inv_sqrt2, 0.0))
    _PROJ_CACHE[key] = (P11, P12, P22)
    return P11, P12, P22


def _conjugate_coeffs(state):
    """Spectrum of the first-order combination h = (d_x1 b,
    d_x2 b + d_x2 H1 - d_x1 H2) feeding the diagonalizer."""
    g = state.grid
    b, H1, H2 = state.coeffs[0], state.coeffs[3], state.coeffs[4]
    h1 = 1j * g.k1 * b
    h2 = 1j * (g.k2 * b + g.k2 * H1 - g.k1 * H2)
    return h1, h2


def diag_velocity(state):
    """P(D) u: branch-minus and branch-plus velocity components."""
    g = state.grid
    P11, P12, P22 = _projector_arrays(g)
    u1, u2 = state.coeffs[1], state.coeffs[2]
    vm = P11 * u1 + P12 * u2
    vp = P12 * u1 + P22 * u2
    return SpectralField(g, vm, real=False), SpectralField(g, vp, real=False)


def compute_script_H(state):
    """(scrH1, scrH2, lam_-^{-1/2} scrH1, lam_+^{-1/2} scrH2).

    The first weighting is fused (see module docstring); the second is a
    plain multiplier since lam_+ >= |xi|^2 > 0 away from the origin.
    """
    g = state.grid
    k1, k2, rad = g.k1, g.k2, g.k_abs
    P11, P12, P22 = _projector_arrays(g)
    h1, h2 = _conjugate_coeffs(state)
    sH1 = P11 * h1 + P12 * h2
    sH2 = P12 * h1 + P22 * h2

    b, H1, H2 = state.coeffs[0], state.coeffs[3], state.coeffs[4]
    ax1, ax2 = np.abs(k1), np.abs(k2)
    general = ax2 > 0
    axis = (ax2 == 0) & (ax1 > 0)
    denom = np.where(rad + ax2 > 0, rad + ax2, 1.0)
    c = ax2 / denom
    nrm = np.sqrt(k2 * k2 + k1 * k1 * c * c)
    nrm = np.where(nrm > 0, nrm, 1.0)
    sg = np.sign(k1)
    safe_rad = np.where(rad > 0, rad, 1.0)
    # fused lam_-^{-1/2} scrH1: i sign(xi1) sqrt((|xi|+|xi2|)/|xi|)
    #   [ (c-1) xi2 b + c xi2 H1 - c xi1 H2 ] / N
    fused = (
        1j
        * sg
        * np.sqrt(denom / safe_rad)
        * ((c - 1.0) * k2 * b + c * k2 * H1 - c * k1 * H2)
        / nrm
    )
    on_axis = -1j * sg * (b + sg * H2) / np.sqrt(2.0)
    w1 = np.where(general, fused, np.where(axis, on_axis, 0.0))

    lam_plus = rad * (rad + ax2)
    w2 = np.where(rad > 0, sH2 / np.sqrt(np.where(lam_plus > 0, lam_plus, 1.0)), 0.0)
    return (
        SpectralField(g, sH1, real=False),
        SpectralField(g, sH2, real=False),
        SpectralField(g, w1, real=False),
        SpectralField(g, w2, real=False),
    )


# ---------------------------------------------------------------------------
# identity residuals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResidualRecord:
    frozen_law: float
    mass_jac: float
    components: float
    trace: float
    div_H: float
    mean_b: float

    def as_dict(self) -> dict:
        return {
            "frozen_law": self.frozen_law,
            "mass_jac": self.mass_jac,
            "components": self.components,
            "trace": self.trace,
            "div_H": self.div_H,
            "mean_b": self.mean_b,
        }

    def max_identity(self) -> float:
        return max(self.frozen_law, self.mass_jac, self.components, self.trace)


def residuals(state) -> ResidualRecord:
    """Sup-norm residuals of the algebraic structure carried by the flow.

    frozen_law : || (I + A') (B / rho) - h0 ||_inf  (frozen-flux law)
    mass_jac   : || rho - det(I + A') ||_inf
    components : max of || H1 - A'_22 ||_inf, || H2 + A'_21 ||_inf
    trace      : || b - (tr A' + det A') ||_inf
    div_H      : || div H ||_inf (spectral divergence)
    mean_b     : | mean of b |
    """
    g = state.grid
    p = state.physical()
    rho = 1.0 + p["b"]
    B1, B2 = 1.0 + p["H1"], p["H2"]
    A11, A12 = 1.0 + p["A11"], p["A12"]
    A21, A22 = p["A21"], 1.0 + p["A22"]
    fr1 = (A11 * B1 + A12 * B2) / rho - 1.0
    fr2 = (A21 * B1 + A22 * B2) / rho
    frozen = max(float(np.max(np.abs(fr1))), float(np.max(np.abs(fr2))))
    det_full = A11 * A22 - A12 * A21
    mass = float(np.max(np.abs(rho - det_full)))
    comp = max(
        float(np.max(np.abs(p["H1"] - p["A22"]))),
        float(np.max(np.abs(p["H2"] + p["A21"]))),
    )
    det_pert = p["A11"] * p["A22"] - p["A12"] * p["A21"]
    trace = float(np.max(np.abs(p["b"] - (p["A11"] + p["A22"] + det_pert))))
    divH = 1j * g.k1 * state.coeffs[3] + 1j * g.k2 * state.coeffs[4]
    div_res = float(np.max(np.abs(to_physical(g, divH, real=False))))
    mean_b = float(np.abs(state.coeffs[0][0, 0]))
    return ResidualRecord(frozen, mass, comp, trace, div_res, mean_b)


# ---------------------------------------------------------------------------
# per-block energies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearizedVars:
    """Diagonalized spectral variables feeding the block energies."""

    grid: Grid
    v_minus: np.ndarray
    v_plus: np.ndarray
    sH1: np.ndarray
    sH2: np.ndarray
    w1: np.ndarray
    w2: np.ndarray


def linearized_vars(state) -> LinearizedVars:
    vm, vp = diag_velocity(state)
    sH1, sH2, w1, w2 = compute_script_H(state)
    return LinearizedVars(
        grid=state.grid,
        v_minus=vm.coeffs,
        v_plus=vp.coeffs,
        sH1=sH1.coeffs,
        sH2=sH2.coeffs,
        w1=w1.coeffs,
        w2=w2.coeffs,
    )


def _inner(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    """Plancherel inner product (a | b) = length^2 Re sum a conj(b)."""
    return float(grid.length**2 * np.real(np.sum(a * np.conj(b))))


def energy_fqk(linvars: LinearizedVars, q: int, k: int, branch: str, iota: float = 0.1) -> float:
    """Block energy f_{q,k} of the requested branch.

    Branch minus pairs the minus velocity component with scrH1: for blocks
    with k + 1 >= 2q,
        f^2 = ||D v||^2 + ||lam_-^{-1/2} D scrH1||^2
              + iota 2^{2q-2k+1} (D v | D scrH1),
    otherwise
        f^2 = 2 ||Lam^{-2} lam_-(D) D v||^2 + ||D scrH1||^2
              + 2 (Lam^{-2} lam_-(D) D v | D scrH1).
    Branch plus pairs the plus component with scrH2, switching at q <= 1:
        f^2 = ||D w||^2 + ||lam_+^{-1/2} D scrH2||^2 + 2 iota (D w | D scrH2)
    for q <= 1, else the Lam^{-2} lam_+(D) analogue.  D is the hybrid block
    filter.  Returns sqrt(f^2); a genuinely negative f^2 (iota too large)
    raises rather than clamps.
    """
    if branch not in ("minus", "plus"):
        raise ValueError(f"branch must be 'minus' or 'plus', got {branch!r}")
    if not iota >= 0:
        raise ValueError(f"iota must be nonnegative, got {iota}")
    g = linvars.grid
    lp = get_lp(g)
    filt = lp.hybrid(q, k)
    rad, ax2 = g.k_abs, np.abs(g.k2)
    safe_rad = np.where(rad > 0, rad, 1.0)

    if branch == "minus":
        v = filt * linvars.v_minus
        sH = filt * linvars.sH1
        if k + 1 >= 2 * q:
            wgt = filt * linvars.w1
            f2 = (
                l2_norm(g, v) ** 2
                + l2_norm(g, wgt) ** 2
                + iota * 2.0 ** (2 * q - 2 * k + 1) * _inner(g, v, sH)
            )
        else:
            lam = g.k1**2 * rad / np.where(rad + ax2 > 0, rad + ax2, 1.0)
            a = (lam / safe_rad**2) * v
            f2 = l2_norm(g, a) ** 2 * 2.0 + l2_norm(g, sH) ** 2 + 2.0 * _inner(g, a, sH)
    else:
        v = filt * linvars.v_plus
        sH = filt * linvars.sH2
        if q <= 1:
            wgt = filt * linvars.w2
            f2 = (
                l2_norm(g, v) ** 2
                + l2_norm(g, wgt) ** 2
                + 2.0 * iota * _inner(g, v, sH)
            )
        else:
            lam = rad * (rad + ax2)
            a = (lam / safe_rad**2) * v
            f2 = l2_norm(g, a) ** 2 * 2.0 + l2_norm(g, sH) ** 2 + 2.0 * _inner(g, a, sH)

    scale = l2_norm(g, v) ** 2 + l2_norm(g, sH) ** 2
    if f2 < 0:
        if abs(f2) > 1e-12 * max(scale, 1e-300):
            raise ArithmeticError(
                f"indefinite block energy at (q={q}, k={k}, {branch}): f^2 = {f2:.6g}"
            )
        f2 = 0.0
    return float(np.sqrt(f2))


# ---------------------------------------------------------------------------
# the run ledger and X(t)
# ---------------------------------------------------------------------------

LEDGER_COLUMNS = (
    "t",
    "norm_A_hatB1",
    "norm_u_hatB0",
    "norm_u_hatB2",
    "norm_wH1_tildeB01",
    "norm_wH2_hatB0",
    "norm_wH2_hatB1",
    "norm_b_hatB0",
    "norm_b_hatB1",
    "norm_H_hatB0",
    "norm_H_hatB1",
    "res_frozen_law",
    "res_mass_jac",
    "res_components",
    "res_trace",
    "res_div_H",
    "res_mean_b",
    "sup_A_hatB1",
    "sup_u_hatB0",
    "sup_wH1_tildeB01",
    "sup_wH2_cap",
    "int_u_hatB2",
    "int_b_sq_hatB1",
    "int_H_sq_hatB1",
    "X",
)

_COL = {name: i for i, name in enumerate(LEDGER_COLUMNS)}


def _measure(state) -> list[float]:
    """t + the ten norm columns + the six residual columns for one snapshot."""
    g = state.grid
    spec_A = besov.block_spectrum(state.A_pert)
    spec_u = besov.block_spectrum(state.u)
    spec_b = besov.block_spectrum(state.b)
    spec_H = besov.block_spectrum(state.H)
    _, _, w1, w2 = compute_script_H(state)
    spec_w1 = besov.block_spectrum(w1)
    spec_w2 = besov.block_spectrum(w2)
    res = residuals(state)
    return [
        state.t,
        besov.norm_hatB(spec_A, 1.0),
        besov.norm_hatB(spec_u, 0.0),
        besov.norm_hatB(spec_u, 2.0),
        besov.norm_tildeB(spec_w1, 0.0, 1.0),
        besov.norm_hatB(spec_w2, 0.0),
        besov.norm_hatB(spec_w2, 1.0),
        besov.norm_hatB(spec_b, 0.0),
        besov.norm_hatB(spec_b, 1.0),
        besov.norm_hatB(spec_H, 0.0),
        besov.norm_hatB(spec_H, 1.0),
        res.frozen_law,
        res.mass_jac,
        res.components,
        res.trace,
        res.div_H,
        res.mean_b,
    ]


def _fold_step(prev_acc, prev_row, row):
    """Advance (sups, integrals, X) by one ledger row.

    prev_acc is None for the first row.  The operation order here is the
    single source of truth: the online ledger and any replay from CSV both
    call this function, which is what makes X bit-reproducible.
    """
    c = _COL
    w2cap = max(row[c["norm_wH2_hatB0"]], row[c["norm_wH2_hatB1"]])
    if prev_acc is None:
        sups = [
            row[c["norm_A_hatB1"]],
            row[c["norm_u_hatB0"]],
            row[c["norm_wH1_tildeB01"]],
            w2cap,
        ]
        ints = [0.0, 0.0, 0.0]
    else:
        sups_prev, ints_prev = prev_acc
        sups = [
            max(sups_prev[0], row[c["norm_A_hatB1"]]),
            max(sups_prev[1], row[c["norm_u_hatB0"]]),
            max(sups_prev[2], row[c["norm_wH1_tildeB01"]]),
            max(sups_prev[3], w2cap),
        ]
        half_dt = 0.5 * (row[c["t"]] - prev_row[c["t"]])
        ints = [
            ints_prev[0] + half_dt * (prev_row[c["norm_u_hatB2"]] + row[c["norm_u_hatB2"]]),
            ints_prev[1]
            + half_dt * (prev_row[c["norm_b_hatB1"]] ** 2 + row[c["norm_b_hatB1"]] ** 2),
            ints_prev[2]
            + half_dt * (prev_row[c["norm_H_hatB1"]] ** 2 + row[c["norm_H_hatB1"]] ** 2),
        ]
    x_val = (
        sups[0]
        + sups[1]
        + sups[2]
        + sups[3]
        + ints[0]
        + np.sqrt(ints[1])
        + np.sqrt(ints[2])
    )
    return (sups, ints), float(x_val)


@dataclass
class RunLedger:
    """Accumulating time series of norms, residuals, and X ingredients."""

    rows: list = field(default_factory=list)

    @classmethod
    def for_state(cls, state) -> "RunLedger":
        return cls()

    def header(self) -> str:
        return ",".join(LEDGER_COLUMNS)

    def append(self, state) -> str:
        """Measure the state, fold the accumulators, return the CSV line."""
        base = _measure(state)
        prev_row = self.rows[-1] if self.rows else None
        prev_acc = None
        if prev_row is not None:
            c = _COL
            prev_acc = (
                [
                    prev_row[c["sup_A_hatB1"]],
                    prev_row[c["sup_u_hatB0"]],
                    prev_row[c["sup_wH1_tildeB01"]],
                    prev_row[c["sup_wH2_cap"]],
                ],
                [
                    prev_row[c["int_u_hatB2"]],
                    prev_row[c["int_b_sq_hatB1"]],
                    prev_row[c["int_H_sq_hatB1"]],
                ],
            )
        (sups, ints), x_val = _fold_step(prev_acc, prev_row, base + [0.0] * 8)
        full = base + sups + ints + [x_val]
        self.rows.append(full)
        return ",".join("%.17g" % v for v in full)

    # -- read access ---------------------------------------------------

    def column(self, name: str) -> np.ndarray:
        if name not in _COL:
            raise KeyError(f"no ledger column {name!r}")
        return np.array([r[_COL[name]] for r in self.rows])

    def last(self, name: str) -> float:
        if not self.rows:
            raise ValueError("empty ledger")
        return self.rows[-1][_COL[name]]

    @classmethod
    def from_csv(cls, path) -> "RunLedger":
        with open(path) as fh:
            header = fh.readline().strip()
            if header != ",".join(LEDGER_COLUMNS):
                raise ValueError(f"ledger header mismatch in {path}")
            rows = []
            for line in fh:
                line = line.strip()
                if line:
                    rows.append([float(tok) for tok in line.split(",")])
        for r in rows:
            if len(r) != len(LEDGER_COLUMNS):
                raise ValueError(f"malformed ledger row in {path}")
        return cls(rows=rows)


def compute_X(ledger: RunLedger) -> float:
    """X at the final ledger time, refolded from the measured columns.

    Replaying gives the same floats as the online accumulation, so this
    equals the stored X column bit-for-bit.
    """
    if not ledger.rows:
        raise ValueError("empty ledger")
    acc = None
    prev = None
    x_val = 0.0
    for row in ledger.rows:
        acc, x_val = _fold_step(acc, prev, row)
        prev = row
    return x_val


def accumulate_dissipation(ledger: RunLedger):
    """Refold and return the three dissipation integrals
    (int ||u||_{hatB2} dt, int ||b||^2_{hatB1} dt, int ||H||^2_{hatB1} dt)."""
    if not ledger.rows:
        raise ValueError("empty ledger")
    acc = None
    prev = None
    for row in ledger.rows:
        acc, _ = _fold_step(acc, prev, row)
        prev = row
    return tuple(acc[1])


def lemma_ratios(ledger: RunLedger) -> np.ndarray:
    """Per-row ratio (||b||_{B0^B1} + ||H||_{B0^B1}) /
    (||w1||_{tildeB01} + ||w2||_{B0^B1}) — the comparability of the plain
    and diagonalized amplitudes that underwrites the energy functional."""
    c = _COL
    out = []
    for row in ledger.rows:
        num = max(row[c["norm_b_hatB0"]], row[c["norm_b_hatB1"]]) + max(
            row[c["norm_H_hatB0"]], row[c["norm_H_hatB1"]]
        )
        den = row[c["norm_wH1_tildeB01"]] + max(
            row[c["norm_wH2_hatB0"]], row[c["norm_wH2_hatB1"]]
        )
        if den > 0:
            out.append(num / den)
    return np.array(out)


def ledger_checksum(ledger: RunLedger) -> str:
    """SHA-256 over the ledger values as little-endian float64, row-major.

    The CSV stores doubles as %.17g, which round-trips exactly, so a ledger
    re-read from disk hashes to the same digest as the in-memory one.  This
    is the cross-validation handle for external plotting tools.
    """
    import hashlib
    import struct

    h = hashlib.sha256()
    for row in ledger.rows:
        h.update(struct.pack("<%dd" % len(row), *row))
    return h.hexdigest()


# ---------------------------------------------------------------------------
# run manifest
# ---------------------------------------------------------------------------


def content_hash(text: str) -> str:
    """Git-style blob hash of a text: sha1 over 'blob <len>\\0<content>'."""
    import hashlib

    data = text.encode()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def write_manifest(path, config) -> None:
    doc = {
        "config": config.as_dict(),
        "config_sha1": content_hash(config.raw_text),
        "tolerances": config.tolerances(),
        "ledger_columns": list(LEDGER_COLUMNS),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
