"""Checksums for cross-validating plotted data against the producer.

The contract (shared with the simulator CLI): SHA-256 over the table values
as little-endian IEEE-754 float64, row-major, in CSV column order, with the
regime labels mapped overdamped -> 0, underdamped -> 1, critical -> 2.
This module recomputes the digest from the CSV alone — parity with the
`checksum=` line printed by the producer shows the plotted arrays are the
ones the simulation wrote.
"""

from __future__ import annotations

import hashlib
import struct

from .schema import LedgerTable, RegimeTable

REGIME_CODE = {"overdamped": 0.0, "underdamped": 1.0, "critical": 2.0}


def _digest_rows(rows) -> str:
    h = hashlib.sha256()
    for row in rows:
        h.update(struct.pack("<%dd" % len(row), *row))
    return h.hexdigest()


def ledger_checksum(table: LedgerTable) -> str:
    return _digest_rows(table.rows.tolist())


def regime_checksum(table: RegimeTable) -> str:
    rows = []
    for i in range(table.rows.shape[0]):
        rows.append(
            list(table.rows[i])
            + [REGIME_CODE[table.regime_minus[i]], REGIME_CODE[table.regime_plus[i]]]
        )
    return _digest_rows(rows)
