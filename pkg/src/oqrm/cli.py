"""Command-line driver: ``oqrm relax|quench|freeze-out|fit|validate``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, io
from .config import RunConfig, parse_config
from .errors import ConfigError, OqrmError
from .model import with_coupling
from .protocols import QuenchConfig, RelaxationConfig, evaluate_at_freeze_out, run_quench, run_relaxation

logger = logging.getLogger("oqrm")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class NumericalFailure(OqrmError):
    pass


# -- helpers ---------------------------------------------------------------------

def load_run_config(path, engine=None) -> RunConfig:
    try:
        doc = io.read_json(path) if path else {}
    except io.ParseError as exc:
        raise ConfigError(f"config file {exc}") from None
    if engine is not None:
        doc = {**doc, "engine": engine}
    return parse_config(doc)


def _output_dir(cfg: RunConfig, out, command) -> Path:
    if out:
        d = Path(out)
    elif cfg.output_dir:
        d = Path(cfg.output_dir)
    else:
        d = io.default_output_root() / command
    d.mkdir(parents=True, exist_ok=True)
    return d


def _map(fn, items, workers):
    if workers and workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def relax_name(g) -> str:
    return f"relax_g{g:.4f}.csv"


def quench_name(t_q) -> str:
    return f"quench_tq{t_q:.6g}.csv"


# -- relax -----------------------------------------------------------------------

def _relax_point(args):
    cfg, g, outdir = args
    r = cfg.relax
    rc = RelaxationConfig(with_coupling(cfg.model, g), cfg.bath, t_max=r.t_max, dt=r.dt,
                          sample_stride=r.sample_stride, engine=cfg.engine, numerics=cfg.numerics)
    series = run_relaxation(rc)
    io.write_columns(Path(outdir) / relax_name(g), io.RELAX_COLUMNS, series.times, series.values)
    return g, series


def cmd_relax(cfg: RunConfig, outdir: Path, workers: int = 1) -> dict:
    manifest = io.new_manifest(cfg.to_dict(), "relax")
    mpath = outdir / "manifest.json"
    io.write_json(mpath, manifest)
    results = _map(_relax_point, [(cfg, g, str(outdir)) for g in cfg.relax.g], workers)
    taus = []
    for g, series in results:
        entry = {"file": relax_name(g), "diagnostics": series.metadata}
        try:
            fit = analysis.relaxation_time(series, cfg.relax.fit_start)
            entry["stretched_fit"] = fit.__dict__
            taus.append((g, fit.tau))
        except OqrmError as exc:
            entry["stretched_fit_error"] = str(exc)
        manifest["runs"][f"g={g:.4f}"] = entry
    io.write_csv(outdir / "tau.csv", io.TAU_COLUMNS, taus)
    io.finish_manifest(mpath, manifest)
    return manifest


# -- freeze-out / quench --------------------------------------------------------------

def freeze_out_table(cfg: RunConfig):
    fit = cfg.bkt_fit()
    rows = []
    for t_q in cfg.quench.t_q:
        fo = analysis.freeze_out_bkt(fit, cfg.quench.g_f, t_q)
        rows.append((t_q, fo.t_f, fo.g_at_freeze, fo.ramp_time(cfg.quench.g_f, t_q), fo.residual))
    return fit, rows


def cmd_freeze_out(cfg: RunConfig, outdir: Path) -> dict:
    manifest = io.new_manifest(cfg.to_dict(), "freeze-out")
    mpath = outdir / "manifest.json"
    io.write_json(mpath, manifest)
    fit, rows = freeze_out_table(cfg)
    io.write_csv(outdir / "freeze_out.csv", io.FREEZE_COLUMNS, rows)
    manifest["runs"]["bkt"] = fit.__dict__
    io.finish_manifest(mpath, manifest)
    return manifest


def _quench_point(args):
    cfg, t_q, ramp_time, outdir = args
    q = cfg.quench
    qc = QuenchConfig(with_coupling(cfg.model, 0.0), cfg.bath, g_f=q.g_f, t_q=t_q, dt=q.dt,
                      n_samples=q.n_samples, extra_times=(ramp_time,), engine=cfg.engine, numerics=cfg.numerics)
    rec = run_quench(qc)
    io.write_columns(Path(outdir) / quench_name(t_q), io.QUENCH_COLUMNS, rec.times, rec.coupling, rec.energy,
                     rec.gs_energy, rec.e_r, rec.p_exc)
    return t_q, rec


def cmd_quench(cfg: RunConfig, outdir: Path, workers: int = 1) -> dict:
    fit, table = freeze_out_table(cfg)
    for t_q, t_f, g_fr, ramp, _ in table:
        if not 0.0 < ramp <= t_q:
            raise NumericalFailure(f"freeze-out for t_q={t_q} falls outside the ramp (ramp time {ramp:.4g})")
    manifest = io.new_manifest(cfg.to_dict(), "quench")
    mpath = outdir / "manifest.json"
    io.write_json(mpath, manifest)
    items = [(cfg, t_q, ramp, str(outdir)) for t_q, _, _, ramp, _ in table]
    results = _map(_quench_point, items, workers)
    summary = []
    for (t_q, t_f, g_fr, ramp, resid), (_, rec) in zip(table, results):
        sample = evaluate_at_freeze_out(rec, ramp)
        summary.append((t_q, t_f, sample.e_exc, sample.p_exc))
        manifest["runs"][f"t_q={t_q:.6g}"] = {
            "file": quench_name(t_q), "t_f": t_f, "g_at_freeze": g_fr, "ramp_time": ramp,
            "freeze_out_residual": resid, "evaluation": sample.metadata,
            "flagged_samples": rec.flagged, "diagnostics": rec.metadata,
        }
    io.write_csv(outdir / "summary.csv", io.SUMMARY_COLUMNS, summary)
    manifest["runs"]["bkt"] = fit.__dict__
    io.finish_manifest(mpath, manifest)
    return manifest


# -- fit ----------------------------------------------------------------------------

def cmd_fit(kind: str, inputs, window_start=0.0, window_end=None, column="e_exc", pin_gc=None,
            abscissa="t_f") -> dict:
    report = {"kind": kind, "inputs": [str(p) for p in inputs]}
    if kind == "stretched":
        results = []
        for path in inputs:
            data = io.read_csv(path, io.RELAX_COLUMNS)
            series = _Series(data["t"], data["sigma_z_norm"])
            if window_end is None:
                fit = analysis.relaxation_time(series, window_start)
            else:
                first = float(np.min(series.times[series.times > 0], initial=np.inf))
                fit = analysis.fit_stretched(series, (max(window_start, first), window_end))
            results.append({"file": str(path), "parameters": {"amplitude": fit.amplitude, "tau": fit.tau,
                                                               "beta": fit.beta},
                            "residual": fit.residual, "window": list(fit.fit_window), "n_points": fit.n_points})
        report["results"] = results
        return report
    if kind == "bkt":
        pts = []
        for path in inputs:
            data = io.read_csv(path, io.TAU_COLUMNS)
            pts.extend(zip(data["g"], data["tau"]))
        fit = analysis.fit_bkt(pts, g_c=pin_gc)
        report.update(parameters={"A": fit.A, "B": fit.B, "g_c": fit.g_c}, residual=fit.residual,
                      pinned_g_c=fit.pinned_g_c, n_points=len(pts),
                      window={"g_min": float(min(p[0] for p in pts)), "g_max": float(max(p[0] for p in pts))},
                      g_c_equilibrium=analysis.G_C_EQUILIBRIUM)
        return report
    if kind == "powerlaw":
        pts = []
        for path in inputs:
            data = io.read_csv(path)
            if abscissa not in data or column not in data:
                raise ConfigError(f"{path}: needs columns {abscissa} and {column}")
            pts.extend(zip(data[abscissa], data[column]))
        fit = analysis.fit_powerlaw(pts)
        report.update(parameters={"mu": fit.mu, "amplitude": fit.amplitude}, mu_stderr=fit.mu_stderr,
                      residual=fit.residual, column=column, abscissa=abscissa, n_points=fit.n_points,
                      window={f"{abscissa}_min": float(min(p[0] for p in pts)),
                              f"{abscissa}_max": float(max(p[0] for p in pts))})
        return report
    raise ConfigError(f"fit kind must be stretched, bkt or powerlaw, got {kind!r}")


class _Series:
    def __init__(self, times, values):
        self.times = np.asarray(times)
        self.values = np.asarray(values)


# -- validate -----------------------------------------------------------------------------

def cmd_validate(outdir: Path, seed: int = 7, t_max: float = 10.0) -> dict:
    from .validation import equivalence_suite

    cases = equivalence_suite(seed=seed, t_max=t_max)
    report = {"cases": [c.as_dict() for c in cases], "passed": all(c.passed for c in cases)}
    io.write_json(outdir / "validate.json", report)
    return report


# -- entry point ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oqrm", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, engine=True):
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--out", help="output directory (default: config output_dir or $OQRM_OUTPUT_ROOT)")
        if engine:
            sp.add_argument("--engine", choices=("mps", "ed"))
            sp.add_argument("--workers", type=int, default=1)

    common(sub.add_parser("relax", help="relaxation sweep over g"))
    common(sub.add_parser("quench", help="linear quenches over t_Q, evaluated at freeze-out"))
    common(sub.add_parser("freeze-out", help="BKT freeze-out times for each t_Q"), engine=False)

    fp = sub.add_parser("fit", help="fit a model curve to CSV data")
    fp.add_argument("kind", choices=("stretched", "bkt", "powerlaw"))
    fp.add_argument("inputs", nargs="+")
    fp.add_argument("--out", help="report path (default: stdout)")
    fp.add_argument("--window-start", type=float, default=0.0)
    fp.add_argument("--window-end", type=float)
    fp.add_argument("--column", default="e_exc", choices=("e_exc", "p_exc"))
    fp.add_argument("--pin-gc", type=float)
    fp.add_argument("--abscissa", default="t_f", choices=("t_f", "t_q"),
                    help="power-law variable (t_f is not a pure power of t_q)")

    vp = sub.add_parser("validate", help="ED-vs-MPS equivalence suite")
    vp.add_argument("--out", help="output directory")
    vp.add_argument("--seed", type=int, default=7)
    vp.add_argument("--t-max", type=float, default=10.0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "fit":
            report = cmd_fit(args.kind, args.inputs, args.window_start, args.window_end, args.column, args.pin_gc,
                             args.abscissa)
            if args.out:
                io.write_json(args.out, report)
            else:
                import json
                print(json.dumps(io._jsonable(report), indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "validate":
            outdir = Path(args.out) if args.out else io.default_output_root() / "validate"
            outdir.mkdir(parents=True, exist_ok=True)
            report = cmd_validate(outdir, args.seed, args.t_max)
            return EXIT_OK if report["passed"] else EXIT_NUMERIC
        cfg = load_run_config(args.config, getattr(args, "engine", None))
        cfg = replace(cfg, protocol=args.command)
        from .config import validate
        validate(cfg)
        outdir = _output_dir(cfg, args.out, args.command)
        if args.command == "relax":
            cmd_relax(cfg, outdir, args.workers)
        elif args.command == "quench":
            cmd_quench(cfg, outdir, args.workers)
        else:
            cmd_freeze_out(cfg, outdir)
        return EXIT_OK
    except io.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OqrmError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
