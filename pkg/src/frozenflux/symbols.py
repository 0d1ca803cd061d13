"""Linear-symbol laboratory (viscosity normalization mu = 1, lambda = -1).

Per frequency xi != 0 the second-order form of the linearized system has the
wave operator eta^2 + |xi|^2 eta + lambda_j = 0 on each of the two branches
j in {-, +}, where lambda_-, lambda_+ are the eigenvalues of -Q(xi), the
slow/fast magneto-acoustic speeds.  The branch is overdamped (two real
nonpositive roots) when |xi|^4 > 4 lambda_j, underdamped (complex pair)
when <, critical at equality.

The diagonalizer P(xi) is symmetric, orthonormal, involutive; its first
column pairs with lambda_-, the second with lambda_+.  The off-diagonal
coefficient c = 1/2 + r(xi) is evaluated by the closed form
r = -x / (2 (1 + sqrt(1-x))^2), x = xi1^2/|xi|^2, which sums the defining
binomial series; the truncated series itself is kept as a cross-check and
is compared against the closed form whenever the requested term count can
reach 1e-12 truncation error (near x = 1 it converges too slowly and the
closed form is the only path).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "OVERDAMPED",
    "UNDERDAMPED",
    "CRITICAL",
    "symbol_Q",
    "eigen_lambda",
    "r_closed",
    "r_series",
    "projector_P",
    "characteristic_roots",
    "classify_mode",
    "SymbolSample",
    "sample_symbol",
    "linear_matrix",
    "hconj_symbol",
    "diagonalized_pair",
    "LinearModeResult",
    "evolve_linear_mode",
    "sweep_rows",
    "SWEEP_HEADER",
    "REGIME_CODE",
    "sweep_checksum",
    "format_sweep_csv",
]

OVERDAMPED = "overdamped"
UNDERDAMPED = "underdamped"
CRITICAL = "critical"

#: absolute slack band on |xi|^4 - 4*lambda for the critical classification
CRITICAL_BAND = 1e-12


def _split_xi(xi):
    x1, x2 = float(xi[0]), float(xi[1])
    if x1 == 0.0 and x2 == 0.0:
        raise ValueError("xi must be nonzero")
    return x1, x2


def symbol_Q(xi) -> np.ndarray:
    x1, x2 = _split_xi(xi)
    s2 = x1 * x1 + x2 * x2
    return np.array([[-x1 * x1, -x1 * x2], [-x1 * x2, -s2 - x2 * x2]])


def eigen_lambda(xi):
    """(lambda_-, lambda_+) of -Q(xi) in cancellation-free product form:
    lambda_-+ = |xi|(|xi| -+ |xi2|), with |xi| - |xi2| = xi1^2/(|xi|+|xi2|)."""
    x1, x2 = _split_xi(xi)
    rad = np.hypot(x1, x2)
    lam_minus = rad * x1 * x1 / (rad + abs(x2))
    lam_plus = rad * (rad + abs(x2))
    return lam_minus, lam_plus


def r_closed(x: float) -> float:
    """Sum of the binomial series for r at argument x = xi1^2/|xi|^2."""
    return -x / (2.0 * (1.0 + np.sqrt(1.0 - x)) ** 2)


def r_series(x: float, terms: int = 32):
    """Partial series sum over n = 2..terms, plus a bound on the dropped tail.

    Term n is C(1/2, n) (-1)^n x^{n-1}; the coefficients follow
    a_2 = -1/8, a_{n+1} = a_n (n - 1/2)/(n + 1), all negative from n = 2 on,
    so the dropped tail is bounded by |a_{terms+1}| x^{terms} / (1 - x).
    """
    a = -0.125
    total = a * x
    power = x
    for n in range(2, terms):
        a *= (n - 0.5) / (n + 1.0)
        power *= x
        total += a * power
    a_next = a * (terms - 0.5) / (terms + 1.0)
    tail = abs(a_next) * power * x / max(1.0 - x, 1e-300)
    return total, tail


def projector_P(xi, series_terms: int = 32) -> np.ndarray:
    """Symmetric orthonormal diagonalizer of -Q(xi); columns <-> (lambda_-, lambda_+).

    On the xi2 = 0 axis the display is 0/0; the xi2 -> 0+ directional limit
    (1/sqrt 2) [[-1, sgn xi1], [sgn xi1, 1]] is returned there.
    """
    if series_terms < 8:
        raise ValueError(f"series_terms must be >= 8, got {series_terms}")
    x1, x2 = _split_xi(xi)
    if x2 == 0.0:
        sg = 1.0 if x1 > 0 else -1.0
        inv = 1.0 / np.sqrt(2.0)
        return np.array([[-inv, sg * inv], [sg * inv, inv]])
    rad = np.hypot(x1, x2)
    # c = 1/2 + r sums to s/(1+s) with s = |xi2|/|xi|; this form is exact in
    # the small-xi2 regime where 1/2 + r and x = xi1^2/|xi|^2 both cancel
    c = abs(x2) / (rad + abs(x2))
    x = x1 * x1 / (rad * rad)
    if x <= 0.99:
        # series cross-check (the diagonalizer is defined through the series);
        # enforced only where the requested truncation can reach tolerance
        r_trunc, tail = r_series(x, series_terms)
        if tail <= 1e-13 and abs(r_trunc - r_closed(x)) > 1e-12:
            raise ArithmeticError(
                f"series/closed-form disagreement {abs(r_trunc - r_closed(x)):.3e} at x={x}"
            )
    nrm = np.sqrt(x2 * x2 + x1 * x1 * c * c)
    return np.array([[-x2, x1 * c], [x1 * c, x2]]) / nrm


def characteristic_roots(xi) -> np.ndarray:
    """Four roots of eta^2 + |xi|^2 eta + lambda_j = 0, branch - first;
    within each branch the +sqrt root precedes the -sqrt root."""
    x1, x2 = _split_xi(xi)
    s2 = x1 * x1 + x2 * x2
    out = np.empty(4, dtype=complex)
    for j, lam in enumerate(eigen_lambda(xi)):
        sq = np.sqrt(complex(s2 * s2 - 4.0 * lam))
        out[2 * j] = 0.5 * (-s2 + sq)
        out[2 * j + 1] = 0.5 * (-s2 - sq)
    return out


def _classify(disc: float) -> str:
    if abs(disc) <= CRITICAL_BAND:
        return CRITICAL
    return OVERDAMPED if disc > 0 else UNDERDAMPED


def classify_mode(xi):
    x1, x2 = _split_xi(xi)
    s4 = (x1 * x1 + x2 * x2) ** 2
    lam_minus, lam_plus = eigen_lambda(xi)
    return _classify(s4 - 4.0 * lam_minus), _classify(s4 - 4.0 * lam_plus)


@dataclass(frozen=True)
class SymbolSample:
    """Everything the lab knows about one frequency."""

    xi: tuple
    Q: np.ndarray
    lambda_minus: float
    lambda_plus: float
    P: np.ndarray
    roots: np.ndarray
    regime_minus: str
    regime_plus: str


def sample_symbol(xi, series_terms: int = 32) -> SymbolSample:
    x1, x2 = _split_xi(xi)
    lam_minus, lam_plus = eigen_lambda(xi)
    rm, rp = classify_mode(xi)
    return SymbolSample(
        xi=(x1, x2),
        Q=symbol_Q(xi),
        lambda_minus=lam_minus,
        lambda_plus=lam_plus,
        P=projector_P(xi, series_terms),
        roots=characteristic_roots(xi),
        regime_minus=rm,
        regime_plus=rp,
    )


# ---------------------------------------------------------------------------
# per-mode linear evolution
# ---------------------------------------------------------------------------


def linear_matrix(xi) -> np.ndarray:
    """Generator M of yhat' = M yhat for y = (b, u1, u2, H1, H2), mu=1, lambda=-1.

    From the linearized system: b' = -i xi.u; u' = -|xi|^2 u + i xi1 H - i xi (b + H1);
    H' = -h0 (i xi.u) + i xi1 u with background h0 = (1, 0).  Note xi.H is
    exactly conserved: (xi.H)' = xi1(-i xi2 u2) + xi2(i xi1 u2) = 0.
    """
    x1, x2 = _split_xi(xi)
    s2 = x1 * x1 + x2 * x2
    i = 1j
    return np.array(
        [
            [0, -i * x1, -i * x2, 0, 0],
            [-i * x1, -s2, 0, 0, 0],
            [-i * x2, 0, -s2, -i * x2, i * x1],
            [0, 0, -i * x2, 0, 0],
            [0, 0, i * x1, 0, 0],
        ],
        dtype=complex,
    )


def hconj_symbol(xi, b, H1, H2):
    """The driving field grad(b + H1) - d_x1 H at one mode:
    (i xi1 b, i(xi2 b + xi2 H1 - xi1 H2))."""
    x1, x2 = _split_xi(xi)
    return np.array([1j * x1 * b, 1j * (x2 * b + x2 * H1 - x1 * H2)])


def diagonalized_pair(xi, y, series_terms: int = 32):
    """(v, h) = (P uhat, P hhat) for a 5-component mode state y."""
    P = projector_P(xi, series_terms)
    u = np.asarray(y[1:3], dtype=complex)
    h = hconj_symbol(xi, y[0], y[3], y[4])
    return P @ u, P @ h


class LinearModeResult(NamedTuple):
    state: np.ndarray
    decay_rate: float
    constraint_residual: float


def evolve_linear_mode(xi, y0, T: float, dt: float) -> LinearModeResult:
    """Integrate one Fourier mode of the linearized system with classical RK4.

    y0 = (b, u1, u2, H1, H2) complex; requires xi . H(0) = 0 and
    dt <= 0.1 / max(1, |xi|^2).  Returns the state at T, the least-squares
    decay rate of log ||y(t)|| over [T/2, T], and the worst xi . H residual
    seen along the trajectory (also enforced at 1e-10 x data scale).
    """
    x1, x2 = _split_xi(xi)
    y = np.asarray(y0, dtype=complex).copy()
    if y.shape != (5,):
        raise ValueError(f"y0 must have 5 complex components, got shape {y.shape}")
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    scale = max(1.0, float(np.max(np.abs(y))))
    cons0 = abs(x1 * y[3] + x2 * y[4])
    if cons0 > 1e-10 * scale:
        raise ValueError(f"initial data violates xi . H = 0 (residual {cons0:.3e})")
    s2 = x1 * x1 + x2 * x2
    dt_max = 0.1 / max(1.0, s2)
    if dt > dt_max * (1.0 + 1e-9):
        raise ValueError(f"dt too large: {dt} > 0.1/max(1,|xi|^2) = {dt_max}")

    M = linear_matrix(xi)
    times = [0.0]
    norms = [float(np.linalg.norm(y))]
    worst = cons0
    t = 0.0
    while t < T - 1e-12 * max(1.0, T):
        h = min(dt, T - t)
        k1 = M @ y
        k2 = M @ (y + 0.5 * h * k1)
        k3 = M @ (y + 0.5 * h * k2)
        k4 = M @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        res = abs(x1 * y[3] + x2 * y[4])
        worst = max(worst, res)
        if res > 1e-10 * scale:
            raise ArithmeticError(f"xi . H drifted to {res:.3e} at t={t}")
        times.append(t)
        norms.append(float(np.linalg.norm(y)))

    ts = np.array(times)
    ns = np.array(norms)
    fit = (ts >= 0.5 * T - 1e-12) & (ns > 0.0)
    if fit.sum() >= 2 and norms[0] > 0.0:
        rate = float(np.polyfit(ts[fit], np.log(ns[fit]), 1)[0])
    else:
        rate = 0.0
    return LinearModeResult(state=y, decay_rate=rate, constraint_residual=worst)


# ---------------------------------------------------------------------------
# frequency sweep (the regime-map CSV)
# ---------------------------------------------------------------------------

SWEEP_HEADER = (
    "xi1,xi2,lambda_minus,lambda_plus,"
    "re_root_1,re_root_2,re_root_3,re_root_4,"
    "im_root_1,im_root_2,im_root_3,im_root_4,"
    "regime_minus,regime_plus"
)


def sweep_rows(rmax: int = 8, angles: int = 90):
    """Rows for the regime CSV: radii 1..rmax x angles 0..angles-1 degrees."""
    if rmax < 1 or angles < 1:
        raise ValueError(f"need rmax >= 1 and angles >= 1, got {rmax}, {angles}")
    rows = []
    for r in range(1, rmax + 1):
        for a in range(angles):
            th = np.deg2rad(a)
            xi = (r * np.cos(th), r * np.sin(th))
            lam_minus, lam_plus = eigen_lambda(xi)
            roots = characteristic_roots(xi)
            rm, rp = classify_mode(xi)
            rows.append(
                (xi[0], xi[1], lam_minus, lam_plus)
                + tuple(roots.real)
                + tuple(roots.imag)
                + (rm, rp)
            )
    return rows


REGIME_CODE = {OVERDAMPED: 0.0, UNDERDAMPED: 1.0, CRITICAL: 2.0}


def sweep_checksum(rows) -> str:
    """SHA-256 over the sweep's numeric content.

    Every column of every row is encoded as a little-endian float64 in CSV
    order, with the two regime strings mapped through REGIME_CODE
    (overdamped 0, underdamped 1, critical 2).  Downstream consumers of the
    regime CSV recompute this from the parsed text; %.17g formatting makes
    the round trip exact.
    """
    import hashlib
    import struct as _struct

    h = hashlib.sha256()
    for row in rows:
        vals = [REGIME_CODE[v] if isinstance(v, str) else float(v) for v in row]
        h.update(_struct.pack("<%dd" % len(vals), *vals))
    return h.hexdigest()


def format_sweep_csv(rows) -> str:
    """The regime CSV text: header plus %.17g-formatted rows."""
    lines = [SWEEP_HEADER]
    for row in rows:
        lines.append(
            ",".join(v if isinstance(v, str) else "%.17g" % v for v in row)
        )
    return "\n".join(lines) + "\n"
