"""frozenflux: pseudospectral tools for 2D compressible MHD with a frozen-in field.

Submodules:

    spectral     torus grid, transforms, multipliers, field dumps
    dyadic       isotropic/one-dimensional dyadic block filters
    besov        block spectra, hybrid norms, product-law harness
    symbols      linearized symbols: eigenvalues, diagonalizer, roots
    solver       nonlinear evolution, consistent initial data, runs
    diagnostics  residuals, diagonalized fields, block energies, ledger
    config       TOML run configuration
    cli          command-line front end

Top-level names are re-exported lazily so that the command-line entry
point can configure threading before numerical libraries load.
"""

__version__ = "0.1.0"

_EXPORTS = {
    "Grid": "spectral",
    "SpectralField": "spectral",
    "Params": "solver",
    "MhdState": "solver",
    "RunLedger": "diagnostics",
    "RunConfig": "config",
    "load_config": "config",
}

__all__ = ["__version__", *_EXPORTS]


def __getattr__(name):
    if name in _EXPORTS:
        import importlib

        module = importlib.import_module(f".{_EXPORTS[name]}", __name__)
        return getattr(module, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
