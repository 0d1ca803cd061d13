"""CSV schemas of the simulator artifacts, declared here verbatim.

Two files are consumed:

* ledger.csv — one row per logged time, 25 float columns (norms, identity
  residuals, running suprema, dissipation integrals, and the functional X);
* regimes.csv — the linear-mode sweep over a polar frequency grid, 12 float
  columns plus the two damping-regime labels.

Readers refuse any file whose header row is not byte-identical to the
documented schema; that is the whole interface contract with the producer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEDGER_HEADER = (
    "t,norm_A_hatB1,norm_u_hatB0,norm_u_hatB2,norm_wH1_tildeB01,"
    "norm_wH2_hatB0,norm_wH2_hatB1,norm_b_hatB0,norm_b_hatB1,"
    "norm_H_hatB0,norm_H_hatB1,res_frozen_law,res_mass_jac,res_components,"
    "res_trace,res_div_H,res_mean_b,sup_A_hatB1,sup_u_hatB0,"
    "sup_wH1_tildeB01,sup_wH2_cap,int_u_hatB2,int_b_sq_hatB1,"
    "int_H_sq_hatB1,X"
)

REGIME_HEADER = (
    "xi1,xi2,lambda_minus,lambda_plus,"
    "re_root_1,re_root_2,re_root_3,re_root_4,"
    "im_root_1,im_root_2,im_root_3,im_root_4,"
    "regime_minus,regime_plus"
)

REGIMES = ("overdamped", "underdamped", "critical")


class SchemaError(ValueError):
    """The file does not match the documented artifact schema."""


@dataclass
class LedgerTable:
    columns: tuple
    rows: np.ndarray  # (nrows, 25) float64

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]


@dataclass
class RegimeTable:
    columns: tuple  # numeric column names, in CSV order
    rows: np.ndarray  # (nrows, 12) float64
    regime_minus: list
    regime_plus: list

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]


def _read_lines(path, expected_header: str):
    try:
        with open(path) as fh:
            header = fh.readline().rstrip("\n")
            body = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    if header != expected_header:
        raise SchemaError(f"{path}: header does not match the documented schema")
    return body


def read_ledger(path) -> LedgerTable:
    names = tuple(LEDGER_HEADER.split(","))
    body = _read_lines(path, LEDGER_HEADER)
    rows = []
    for i, line in enumerate(body):
        toks = line.split(",")
        if len(toks) != len(names):
            raise SchemaError(f"{path}: row {i + 1} has {len(toks)} fields, need {len(names)}")
        try:
            rows.append([float(t) for t in toks])
        except ValueError:
            raise SchemaError(f"{path}: row {i + 1} has a non-numeric field") from None
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(names)))
    return LedgerTable(columns=names, rows=data)


def read_regimes(path) -> RegimeTable:
    names = tuple(REGIME_HEADER.split(","))
    numeric = names[:-2]
    body = _read_lines(path, REGIME_HEADER)
    rows, reg_m, reg_p = [], [], []
    for i, line in enumerate(body):
        toks = line.split(",")
        if len(toks) != len(names):
            raise SchemaError(f"{path}: row {i + 1} has {len(toks)} fields, need {len(names)}")
        try:
            rows.append([float(t) for t in toks[:-2]])
        except ValueError:
            raise SchemaError(f"{path}: row {i + 1} has a non-numeric field") from None
        for tok in toks[-2:]:
            if tok not in REGIMES:
                raise SchemaError(f"{path}: row {i + 1} has unknown regime {tok!r}")
        reg_m.append(toks[-2])
        reg_p.append(toks[-1])
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(numeric)))
    return RegimeTable(columns=numeric, rows=data, regime_minus=reg_m, regime_plus=reg_p)
