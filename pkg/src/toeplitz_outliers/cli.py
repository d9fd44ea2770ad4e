"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 acceptance-check failure (detcheck).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import experiments as ex
from .errors import ConfigError, ToeplitzError
from .noise import NoiseSource

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4
DETCHECK_TOL = 1e-9


def _window(text: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad window {text!r}") from None
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("window needs re0,re1,im0,im1")
    return vals


def _disk(text: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad disk {text!r}") from None
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("disk needs re,im,radius")
    return vals


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config; flags given explicitly override it")
    p.add_argument("--symbol")
    p.add_argument("--n", type=int, nargs="+", dest="N")
    p.add_argument("--gamma", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dist")
    p.add_argument("--eps", type=float)
    p.add_argument("--wind", type=int, nargs="+")
    p.add_argument("--trunc-l", type=int, dest="L")
    p.add_argument("--window", type=_window, action="append", dest="windows")
    p.add_argument("--disk", type=_disk, action="append", dest="disks")
    p.add_argument("--out")
    p.add_argument("--eig-backend", choices=("lapack", "qr"), dest="eig_backend")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toeplitz-outliers",
                                     description="Outliers of noisy banded Toeplitz matrices "
                                                 "and their limiting random fields.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "eigenvalue outliers of T_N(a) + N^-g E_N"),
                        ("field", "zeros of the truncated limiting field"),
                        ("detcheck", "check sum_k P_k = det(T + N^-g E) at small N"),
                        ("specradius", "spectral radius quantiles of N^-1/2 E_N"),
                        ("concentration", "Levy concentration of the field at a point")):
        _add_common(sub.add_parser(name, help=help_))
    p = sub.choices["detcheck"]
    p.add_argument("--z", type=complex, default=0.3 + 0.1j)
    p = sub.choices["concentration"]
    p.add_argument("--z", type=complex, required=True)
    p.add_argument("--levy-eps", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    p = sub.add_parser("compare", help="compare two saved point samples by window counts")
    _add_common(p)
    p.add_argument("sample_a")
    p.add_argument("sample_b")
    p = sub.add_parser("plot", help="SVG of saved points with the symbol curve")
    _add_common(p)
    p.add_argument("points", nargs="+")
    return parser


def make_config(args) -> ex.ExperimentConfig:
    base = {}
    if args.config:
        base = ex.ExperimentConfig.load(args.config).to_dict()
    for key in ("symbol", "N", "gamma", "trials", "seed", "dist", "eps", "wind", "L",
                "windows", "disks", "out", "eig_backend"):
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    return ex.ExperimentConfig.from_dict(base)


def _emit(obj):
    json.dump(obj, sys.stdout, indent=1, sort_keys=True, default=str)
    sys.stdout.write("\n")


def cmd_simulate(cfg, args) -> int:
    root = ex.output_root(cfg.out)
    result = {}
    for N in cfg.N:
        samples, rows, summary = ex.run_outlier_experiment(cfg, N)
        ex.save_csv(rows, root / f"eigen_N{N}.csv")
        ex.save_samples(samples, root / f"outliers_N{N}.json")
        ex.save_json({"config": cfg.to_dict(), "summary": summary}, root / f"summary_N{N}.json")
        result[N] = {k: summary[k] for k in ("clean_trials", "mean_outliers", "trials")}
        if summary["failed"]:
            _emit(result)
            return EXIT_NUMERIC
    _emit(result)
    return EXIT_OK


def cmd_field(cfg, args) -> int:
    root = ex.output_root(cfg.out)
    winds = cfg.wind or []
    if not winds:
        raise ConfigError("--wind is required for field runs")
    result = {}
    for w in winds:
        samples, summary = ex.run_field_zero_experiment(cfg, w)
        ex.save_samples(samples, root / f"zeros_wind{w}_L{cfg.L}.json")
        ex.save_json({"config": cfg.to_dict(), "summary": summary}, root / f"field_wind{w}_L{cfg.L}.json")
        result[w] = {"mean_window_counts": summary["mean_window_counts"],
                     "mean_disk_counts": summary["mean_disk_counts"]}
    _emit(result)
    return EXIT_OK


def cmd_compare(cfg, args) -> int:
    a = ex.load_samples(args.sample_a)
    b = ex.load_samples(args.sample_b)
    report = ex.compare_point_processes(a, b, cfg.windows, cfg.disks, cfg.alpha)
    ex.save_json(report, ex.output_root(cfg.out) / "compare.json")
    _emit(report)
    return EXIT_OK


def cmd_detcheck(cfg, args) -> int:
    worst = 0.0
    reports = []
    for N in cfg.N:
        if N > 8:
            raise ConfigError("detcheck uses the direct sum and needs N <= 8")
        for t in range(cfg.trials):
            src = NoiseSource(cfg.seed, cfg.dist).trial(t)
            rep = ex.detcheck(cfg.sym, N, args.z, cfg.gamma, src)
            reports.append(rep)
            worst = max(worst, rep["rel_error"])
    _emit({"worst_rel_error": worst, "cases": len(reports), "tolerance": DETCHECK_TOL})
    return EXIT_OK if worst < DETCHECK_TOL else EXIT_CHECK


def cmd_specradius(cfg, args) -> int:
    table = ex.run_spectral_radius(cfg.N, cfg.trials, cfg.seed, cfg.dist, cfg.eig_backend)
    ex.save_json(table, ex.output_root(cfg.out) / "specradius.json")
    _emit(table)
    return EXIT_OK


def cmd_concentration(cfg, args) -> int:
    if not cfg.wind:
        raise ConfigError("--wind is required")
    seeds = [ex.derive_jitter_seed(cfg.seed, t) for t in range(cfg.trials)]
    vals = ex.field_samples(cfg.sym, cfg.wind[0], cfg.L, args.z, seeds, cfg.dist)
    table = ex.estimate_levy_concentration(vals, args.levy_eps)
    _emit(table)
    return EXIT_OK


def cmd_plot(cfg, args) -> int:
    pts = []
    for path in args.points:
        for smp in ex.load_samples(path):
            pts.extend(smp.points)
    legend = {"N": ",".join(map(str, cfg.N)), "gamma": cfg.gamma, "seed": cfg.seed}
    svg = ex.emit_plot(np.array(pts, dtype=complex), cfg.sym, legend)
    path = ex.output_root(cfg.out) / "plot.svg"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg)
    _emit({"svg": str(path), "points": len(pts)})
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "field": cmd_field, "compare": cmd_compare,
            "detcheck": cmd_detcheck, "specradius": cmd_specradius,
            "concentration": cmd_concentration, "plot": cmd_plot}


def _glue_negative(argv):
    """Turn `--window -1,...` into `--window=-1,...` so argparse does not read
    the value as an option."""
    out, it = [], iter(argv)
    for a in it:
        if a in ("--window", "--disk", "--z"):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_negative(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = make_config(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ToeplitzError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
