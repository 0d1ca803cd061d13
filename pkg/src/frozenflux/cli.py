"""Command-line front end.

Subcommands:

    run              integrate a configured run; write ledger/manifest/dumps
    analyze-linear   sweep the linearized symbols over a polar frequency
                     grid and write the regime CSV (prints checksum=...)
    check-identities load a state dump and print its identity residuals
    norms            load a field dump and print its norm report as JSON
    selftest         exercise cheap known-answer examples of every module

Exit codes: 0 success, 1 a check failed, 2 configuration/usage error,
3 runtime failure (density floor, CFL violation, numerical guard).

Output is deterministic: no timestamps, fixed float formatting, fixed key
order.  Errors go to stderr as a single `error=...` line.
"""

from __future__ import annotations

import argparse
import os
import sys

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frozenflux", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--threads", type=int, default=None, help="worker threads (0 = auto)")
        p.add_argument("--tol-scale", type=float, default=1.0, help="residual tolerance multiplier")

    p_run = sub.add_parser("run", help="integrate a configured run")
    p_run.add_argument("--config", required=True, help="TOML run configuration")
    p_run.add_argument("--out", default=None, help="override [run].output_dir")
    p_run.add_argument("--seed", type=int, default=None, help="override [ic].seed")
    common(p_run)

    p_lin = sub.add_parser("analyze-linear", help="regime sweep of the linearized symbols")
    p_lin.add_argument("--rmax", type=int, default=8, help="largest radius (integers from 1)")
    p_lin.add_argument("--angles", type=int, default=90, help="angle count (degrees from 0)")
    p_lin.add_argument("--out", default=None, help="directory for regimes.csv (default stdout only)")
    common(p_lin)

    p_chk = sub.add_parser("check-identities", help="residuals of a dumped state")
    p_chk.add_argument("--state", required=True, help="state dump directory")
    common(p_chk)

    p_nrm = sub.add_parser("norms", help="norm report of a field dump")
    p_nrm.add_argument("--field", required=True, action="append",
                       help="field dump path (repeat for a multi-component field)")
    common(p_nrm)

    p_self = sub.add_parser("selftest", help="cheap known-answer checks of every module")
    common(p_self)
    return ap


def _apply_threads(threads):
    if threads is None:
        threads = os.environ.get("FROZENFLUX_THREADS")
        if threads is None:
            return
        try:
            threads = int(threads)
        except ValueError:
            raise SystemExit(_fail(f"FROZENFLUX_THREADS must be an integer, got {threads!r}", 2))
    if threads < 0:
        raise SystemExit(_fail(f"--threads must be >= 0, got {threads}", 2))
    if threads > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)


def _fail(msg: str, code: int) -> int:
    sys.stderr.write(f"error={msg}\n")
    return code


def _cmd_run(args) -> int:
    from . import config as config_mod
    from . import diagnostics, solver

    cfg = config_mod.load_config(args.config, tol_scale=args.tol_scale)
    if args.seed is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=args.seed)
    ledger = solver.run(cfg, out_dir=args.out)
    tol = cfg.tolerances()
    final = {name: ledger.last(name) for name in diagnostics.LEDGER_COLUMNS}
    checks = [
        ("res_frozen_law", tol["identity"]),
        ("res_mass_jac", tol["identity"]),
        ("res_components", tol["identity"]),
        ("res_trace", tol["identity"]),
        ("res_div_H", tol["div_H"]),
        ("res_mean_b", tol["mean_b"]),
    ]
    ok = True
    print("t_final=%.17g" % final["t"])
    print("X=%.17g" % final["X"])
    for name, bound in checks:
        passed = final[name] <= bound
        ok = ok and passed
        print("%s=%.17g limit=%.17g %s" % (name, final[name], bound, "ok" if passed else "FAIL"))
    print("checksum=%s" % diagnostics.ledger_checksum(ledger))
    return 0 if ok else 1


def _cmd_analyze_linear(args) -> int:
    from . import symbols

    if args.rmax < 1 or args.angles < 1:
        return _fail(f"need --rmax >= 1 and --angles >= 1, got {args.rmax}, {args.angles}", 2)
    rows = symbols.sweep_rows(rmax=args.rmax, angles=args.angles)
    text = symbols.format_sweep_csv(rows)
    if args.out is not None:
        outdir = args.out
        os.makedirs(outdir, exist_ok=True)
        path = os.path.join(outdir, "regimes.csv")
        with open(path, "w") as fh:
            fh.write(text)
        print("rows=%d" % len(rows))
        print("csv=%s" % path)
    else:
        sys.stdout.write(text)
    print("checksum=%s" % symbols.sweep_checksum(rows))
    return 0


def _cmd_check_identities(args) -> int:
    from . import diagnostics, solver

    state = solver.load_state(args.state)
    rec = diagnostics.residuals(state)
    tol_identity = 1e-6 * args.tol_scale
    tol_div = 1e-8 * args.tol_scale
    tol_mean = 1e-12 * args.tol_scale
    bounds = {
        "frozen_law": tol_identity,
        "mass_jac": tol_identity,
        "components": tol_identity,
        "trace": tol_identity,
        "div_H": tol_div,
        "mean_b": tol_mean,
    }
    ok = True
    print("t=%.17g" % state.t)
    for name, value in rec.as_dict().items():
        passed = value <= bounds[name]
        ok = ok and passed
        print("res_%s=%.17g limit=%.17g %s" % (name, value, bounds[name], "ok" if passed else "FAIL"))
    return 0 if ok else 1


def _cmd_norms(args) -> int:
    from . import besov, solver  # noqa: F401  (solver pulls spectral deps)
    from .spectral import Grid, KIND_PHYSICAL, SpectralField, read_field_dump, to_spectral

    fields = []
    grid = None
    for path in args.field:
        fgrid, kind, arr = read_field_dump(path)
        if grid is None:
            grid = fgrid
        elif (fgrid.n, fgrid.length) != (grid.n, grid.length):
            return _fail("field dumps disagree on the grid", 2)
        coeffs = to_spectral(fgrid, arr) if kind == KIND_PHYSICAL else arr
        fields.append(SpectralField(fgrid, coeffs))
    report = besov.norm_report(fields if len(fields) > 1 else fields[0])
    print(report.to_json())
    return 0


def _selftest_cases():
    """(name, callable) pairs; each raises AssertionError on failure."""

    def spectral_case():
        import numpy as np
        from .spectral import Grid, hermitian_error, to_physical, to_spectral

        g = Grid(32)
        f = np.cos(g.kappa0 * g.x1) + 0.0 * g.x2
        c = to_spectral(g, f)
        assert abs(c[1, 0] - 0.5) < 1e-14 and abs(c[-1, 0] - 0.5) < 1e-14
        assert np.max(np.abs(to_physical(g, c) - f)) < 1e-13
        assert hermitian_error(c) < 1e-15
        try:
            Grid(20)
        except ValueError:
            pass
        else:
            raise AssertionError("Grid(20) accepted")

    def dyadic_case():
        from .dyadic import BlockRanges, chi, get_lp, psi
        from .spectral import Grid

        assert chi(1.0) == 1.0 and chi(1.2) == 0.0
        assert psi(1.5) == 1.0 and psi(4.0) == 0.0
        g = Grid(32)
        assert get_lp(g).partition_residual() < 1e-12
        r = BlockRanges.for_grid(g)
        assert r.q_min <= 0 <= r.q_max

    def besov_case():
        from . import besov
        from .spectral import Grid

        g = Grid(32)
        f = besov.random_field(g, 5)
        assert abs(f.coeffs[0, 0]) == 0.0
        spec = besov.block_spectrum(f)
        assert besov.norm_hatB(spec, 0.0) > 0
        rep = besov.norm_report(f)
        assert "hatB" in rep.to_json()

    def symbols_case():
        import numpy as np

        from .symbols import classify_mode, eigen_lambda, projector_P

        P = projector_P((0.0, 1.0))
        assert np.allclose(P, [[-1, 0], [0, 1]])
        lm, lp = eigen_lambda((1.0, 0.0))
        assert abs(lm - 1) < 1e-14 and abs(lp - 1) < 1e-14
        assert classify_mode((2.0, 0.0)) == ("critical", "critical")

    def solver_case():
        import numpy as np

        from . import diagnostics
        from .solver import MhdState, Params, ic_shear, step
        from .spectral import Grid

        g = Grid(32)
        p = Params()
        eq = MhdState(grid=g, t=0.0, coeffs=np.zeros((9, 32, 32), dtype=complex))
        moved = step(eq, 1e-3, p)
        assert np.max(np.abs(moved.coeffs)) == 0.0
        rec = diagnostics.residuals(ic_shear(g, 1e-3, p))
        assert max(rec.as_dict().values()) < 1e-12

    def diagnostics_case():
        import numpy as np

        from . import diagnostics
        from .solver import MhdState
        from .spectral import Grid

        g = Grid(32)
        eq = MhdState(grid=g, t=0.0, coeffs=np.zeros((9, 32, 32), dtype=complex))
        led = diagnostics.RunLedger.for_state(eq)
        led.append(eq)
        assert diagnostics.compute_X(led) == 0.0
        lv = diagnostics.linearized_vars(eq)
        assert diagnostics.energy_fqk(lv, 0, 0, "minus", iota=0.1) == 0.0

    def config_case():
        from .config import ConfigError, parse_config

        cfg = parse_config("[grid]\nn = 32\n")
        assert cfg.n == 32 and cfg.params.mu == 1.0
        try:
            parse_config("[grid]\nn = 32\nnn = 4\n")
        except ConfigError:
            pass
        else:
            raise AssertionError("unknown key accepted")

    return [
        ("spectral", spectral_case),
        ("dyadic", dyadic_case),
        ("besov", besov_case),
        ("symbols", symbols_case),
        ("solver", solver_case),
        ("diagnostics", diagnostics_case),
        ("config", config_case),
    ]


def _cmd_selftest(args) -> int:
    ok = True
    for name, case in _selftest_cases():
        try:
            case()
        except Exception as exc:  # noqa: BLE001 — report, don't crash the suite
            ok = False
            print("selftest module=%s FAIL (%s)" % (name, exc))
        else:
            print("selftest module=%s ok" % name)
    return 0 if ok else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _apply_threads(args.threads)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "analyze-linear":
            return _cmd_analyze_linear(args)
        if args.command == "check-identities":
            return _cmd_check_identities(args)
        if args.command == "norms":
            return _cmd_norms(args)
        if args.command == "selftest":
            return _cmd_selftest(args)
        return _fail(f"unknown command {args.command!r}", 2)
    except SystemExit:
        raise
    except Exception as exc:
        from .config import ConfigError

        if isinstance(exc, ConfigError):
            return _fail(str(exc), 2)
        if isinstance(exc, (ValueError, KeyError, FileNotFoundError)):
            return _fail(str(exc), 2)
        # FloorError, StabilityError, ArithmeticError, OSError: runtime class
        return _fail(str(exc), 3)


if __name__ == "__main__":
    sys.exit(main())
