"""Command-line front end.

    darboux1d spectrum|transform|diagnose|reproduce --config FILE --out DIR
              [--tol-ode X] [--grid N]

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 acceptance-check failure inside reproduce.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import build_potential, load_config
from .errors import ConfigError, Darboux1dError
from .output import (
    potential_rows,
    provenance_meta,
    wave_rows,
    write_provenance,
    write_table,
    write_text,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CHECKS = 4


def _parser():
    p = argparse.ArgumentParser(
        prog="darboux1d",
        description="Darboux transformations, Dirichlet spectra and Jordan-chain "
                    "diagnostics for 1-D Schrodinger operators",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, doc in [
        ("spectrum", "locate Dirichlet eigenvalues in a window or rectangle"),
        ("transform", "apply a chain of transformations and write the potentials"),
        ("diagnose", "Jordan-chain diagnosis at a level or over a rectangle"),
        ("reproduce", "run a named end-to-end scenario"),
    ]:
        q = sub.add_parser(name, help=doc)
        q.add_argument("--config", required=True, help="TOML run configuration")
        q.add_argument("--out", required=True, help="output directory")
        q.add_argument("--tol-ode", type=float, default=None,
                       help="override ode_rtol (ode_atol scales along)")
        q.add_argument("--grid", type=int, default=None,
                       help="override the number of grid nodes")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.grid is not None:
            from .grid import Interval

            cfg.interval = Interval(cfg.interval.a, cfg.interval.b, args.grid)
            cfg.resolved["interval"]["n_nodes"] = args.grid
        if args.tol_ode is not None:
            cfg.tolerances["ode_rtol"] = args.tol_ode
            cfg.tolerances["ode_atol"] = args.tol_ode * 1e-2
            cfg.resolved["tolerances"] = cfg.tolerances
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        if cfg.task["type"] != args.command:
            raise ConfigError(
                f"task.type = {cfg.task['type']!r} does not match the "
                f"'{args.command}' command"
            )
        write_provenance(out_dir, cfg)
        handler = {
            "spectrum": cmd_spectrum,
            "transform": cmd_transform,
            "diagnose": cmd_diagnose,
            "reproduce": cmd_reproduce,
        }[args.command]
        return handler(cfg, out_dir)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Darboux1dError as err:
        print(f"numeric failure [{args.command}]: {err}", file=sys.stderr)
        return EXIT_NUMERIC


def cmd_spectrum(cfg, out_dir: Path) -> int:
    from .spectral import find_complex_spectrum, find_real_spectrum

    V = build_potential(cfg.potential, cfg.interval, cfg.tolerances)
    rtol, atol = cfg.tolerances["ode_rtol"], cfg.tolerances["ode_atol"]
    want_ef = cfg.task["eigenfunctions"]
    if "rect" in cfg.task:
        report = find_complex_spectrum(V, cfg.task["rect"], rtol=rtol, atol=atol,
                                       with_eigenfunctions=want_ef)
        window_desc = f"rect={cfg.task['rect']}"
    else:
        report = find_real_spectrum(V, cfg.task["e_min"], cfg.task["e_max"],
                                    scan_step=cfg.tolerances["scan_step"],
                                    rtol=rtol, atol=atol, with_eigenfunctions=True)
        window_desc = f"window=[{cfg.task['e_min']}, {cfg.task['e_max']}]"

    rows = []
    for lv in report.levels:
        nodes = lv.n_interior_nodes if lv.n_interior_nodes is not None else -1
        rows.append((lv.E.real, lv.E.imag, lv.algebraic_multiplicity, lv.abs_D, nodes))
    write_table(
        out_dir / "spectrum.csv", "spectrum table",
        provenance_meta(cfg, {"search": window_desc, "levels_found": len(rows)}),
        ["re_E", "im_E", "multiplicity", "abs_D", "interior_nodes"], rows,
    )
    if want_ef:
        for k, lv in enumerate(report.levels):
            if lv.eigenfunction is None:
                continue
            cols, wrows = wave_rows(lv.eigenfunction)
            write_table(out_dir / f"eigenfunction_{k}.csv",
                        f"eigenfunction at E = {lv.E}",
                        provenance_meta(cfg), cols, wrows)
    return EXIT_OK


def cmd_transform(cfg, out_dir: Path) -> int:
    from .darboux import verify_intertwining

    if cfg.potential["kind"] != "chain":
        raise ConfigError("transform task needs potential.kind = 'chain'")
    V = build_potential(cfg.potential, cfg.interval, cfg.tolerances)
    results = V.extras["chain_results"]

    summary = []
    for i, res in enumerate(results):
        cols, rows = potential_rows(res.potential)
        write_table(out_dir / f"potential_{i}.csv",
                    f"derived potential, step {i}",
                    provenance_meta(cfg, {"step": i,
                                          "alpha1": res.alpha1, "alpha2": res.alpha2}),
                    cols, rows)
        wr = [(x, w.real, w.imag) for x, w in zip(res.potential.interval.nodes,
                                                  res.wronskian)]
        write_table(out_dir / f"wronskian_{i}.csv",
                    f"transformation Wronskian, step {i}",
                    provenance_meta(cfg, {"step": i}), ["x", "re_W", "im_W"], wr)
        a1, a2 = complex(res.alpha1), complex(res.alpha2)
        probes = _intertwining_probes(a1, a2)
        it = verify_intertwining(res, probes)
        summary.append(
            f"step {i}: alpha1 = {a1}, alpha2 = {a2}, nodeless = {res.nodeless}, "
            f"singular_left = {res.potential.singular_left is not None}, "
            f"singular_right = {res.potential.singular_right is not None}, "
            f"max intertwining residual = {it['max_residual']:.3e} "
            f"at probes {probes}"
        )
    write_text(out_dir / "transform_summary.txt", "transformation summary",
               provenance_meta(cfg), "\n".join(summary))
    return EXIT_OK


def _intertwining_probes(a1, a2):
    cands = [0.7, 2.8, 3.3, 5.9, 5.0 + 0.5j, 7.3]
    out = []
    for c in cands:
        if abs(c - a1) > 0.3 and abs(c - a2) > 0.3:
            out.append(c)
        if len(out) == 5:
            break
    return out


def cmd_diagnose(cfg, out_dir: Path) -> int:
    from .jordan import diagnose_level, is_diagonalizable

    V = build_potential(cfg.potential, cfg.interval, cfg.tolerances)
    if "level" in cfg.task:
        reports = [diagnose_level(V, cfg.task["level"])]
        verdict = None
    else:
        ok, reports = is_diagonalizable(V, cfg.task["rect"])
        verdict = ok

    body = []
    if verdict is not None:
        body.append(f"diagonalizable over rect: {verdict}")
    for r in reports:
        body.append(
            f"level E = {r.E:.15g}: algebraic multiplicity {r.algebraic_multiplicity}, "
            f"geometric {r.geometric_multiplicity}"
        )
        for j, cr in enumerate(r.chain_residuals, start=1):
            body.append(f"  chain residual |(h-E) chi_{j} - chi_{j-1}|: {cr:.3e}")
        body.append(f"  nilpotency residual: {r.nilpotency_residual:.3e}")
        for j, (ba, bb) in enumerate(r.boundary_residuals):
            body.append(f"  member {j} boundary values |at a|, |at b|: {ba:.3e}, {bb:.3e}")
    write_text(out_dir / "jordan_report.txt", "Jordan-chain diagnosis",
               provenance_meta(cfg), "\n".join(body))

    for r in reports:
        tag = f"{r.E.real:.6f}"
        for j, member in enumerate(r.chain):
            cols, rows = wave_rows(member)
            write_table(out_dir / f"chain_E{tag}_member{j}.csv",
                        f"chain member {j} at E = {r.E}",
                        provenance_meta(cfg), cols, rows)
    return EXIT_OK


def cmd_reproduce(cfg, out_dir: Path) -> int:
    from .examples import reproduce_scenario

    params = {k: v for k, v in cfg.task.items() if k in ("B", "kappa")}
    report = reproduce_scenario(cfg.task["scenario"], cfg.interval, **params)

    write_text(out_dir / "scenario_report.txt",
               f"scenario {report.name}",
               provenance_meta(cfg, {"params": report.params}),
               report.table())
    rows = [
        ("PASS" if c.passed else "FAIL", c.name, c.observed, c.required)
        for c in report.checks
    ]
    write_table(out_dir / "scenario_checks.csv", "scenario check table",
                provenance_meta(cfg, {"scenario": report.name}),
                ["status", "check", "observed", "required"], rows)

    pot = report.artifacts.get("potential")
    if pot is not None:
        cols, prows = potential_rows(pot)
        write_table(out_dir / "scenario_potential.csv", "scenario derived potential",
                    provenance_meta(cfg), cols, prows)
    print(report.table())
    return EXIT_OK if report.all_passed else EXIT_CHECKS


if __name__ == "__main__":
    sys.exit(main())
