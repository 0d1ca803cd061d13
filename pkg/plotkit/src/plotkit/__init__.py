"""Figure rendering for the simulator's CSV artifacts.

plotkit never computes physics: every plotted number is read from a ledger
or regime-sweep CSV, validated against the documented schema, and hashed so
the rendered data can be cross-checked against the checksum printed by the
producing CLI.
"""

from .checksum import ledger_checksum, regime_checksum
from .figures import FigureSpec, regimes_at, render
from .schema import (
    LEDGER_HEADER,
    REGIME_HEADER,
    LedgerTable,
    RegimeTable,
    SchemaError,
    read_ledger,
    read_regimes,
)

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "render",
    "regimes_at",
    "LedgerTable",
    "RegimeTable",
    "SchemaError",
    "read_ledger",
    "read_regimes",
    "ledger_checksum",
    "regime_checksum",
    "LEDGER_HEADER",
    "REGIME_HEADER",
]
