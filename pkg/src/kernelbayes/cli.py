"""Command-line front end: seeded sweeps and diagnostics with CSV output.

Subcommands: ``sweep-prior`` (one (sigma, epsilon, delta) cell), ``sweep-grid``
(the full parameter cross product), ``diagnose <name>``, and ``version``.
Values resolve as CLI flag > config file > built-in default; the config file
is flat ``key = value`` text with ``#`` comments. Every CSV gets a ``.meta``
sidecar in the same flat format recording seed, version, pseudoinverse
tolerance, and RNG family.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .diagnostics import (
    ConstantTarget,
    KernelSectionTarget,
    TrialReport,
    gram_nonsingularity_trial,
    prior_independence_gap,
    rkhs_norm_divergence_probe,
    weights_nonzero_trial,
)
from .embedding import PriorMixture
from .experiments import (
    DEFAULT_MASTER_SEED,
    RNG_FAMILY,
    ExperimentSpec,
    SweepResult,
    generate_training_sample,
    run_grid_sweep,
    run_prior_sweep,
)
from .numerics import default_pinv_rtol

__all__ = ["RunConfig", "parse_config", "emit_csv", "emit_plot_data", "main"]

OUTDIR_ENV_VAR = "KERNELBAYES_OUTDIR"

SWEEP_CSV_COLUMNS = (
    "classifier",
    "prior_c1",
    "test_x",
    "test_y",
    "sigma",
    "epsilon",
    "delta",
    "mean_post_c1",
    "sem",
    "n_replicates",
    "n_errors",
)

_PAPER_GRID = "1e-1,1e-3,1e-5,1e-7,1e-9,1e-11,1e-13,1e-15"


def _parse_float(raw: str) -> float:
    return float(raw)


def _parse_int(raw: str) -> int:
    return int(raw)


def _parse_float_list(raw: str) -> tuple[float, ...]:
    values = tuple(float(tok) for tok in raw.split(",") if tok.strip())
    if not values:
        raise ValueError("empty list")
    return values


def _parse_points(raw: str) -> tuple[tuple[float, ...], ...]:
    points = []
    for chunk in raw.split(";"):
        if not chunk.strip():
            continue
        points.append(tuple(float(tok) for tok in chunk.split(",")))
    if not points:
        raise ValueError("empty point list")
    if len({len(p) for p in points}) != 1:
        raise ValueError("points must share one dimension")
    return tuple(points)


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_str(raw: str) -> str:
    return raw


# key -> (converter, default, help); shared across sweep subcommands
_SWEEP_COMMON = {
    "seed": (_parse_int, DEFAULT_MASTER_SEED, "master seed for replicate streams"),
    "replicates": (_parse_int, 100, "number of training replicates"),
    "n_per_class": (_parse_int, 50, "training points per class"),
    "priors": (_parse_float_list, _parse_float_list("0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"),
               "comma-separated class-0 prior probabilities"),
    "test_points": (_parse_points, _parse_points("0.5,0.5;0.6,0.4;0.7,0.3"),
                    "semicolon-separated test points, e.g. '0.5,0.5;0.6,0.4'"),
    "pinv_rtol": (_parse_float, None, "relative singular-value cutoff for KBR2"),
}

_COMMAND_KEYS: dict[str, dict] = {
    "sweep-prior": {
        **_SWEEP_COMMON,
        "sigma": (_parse_float, 0.1, "Gaussian kernel bandwidth"),
        "epsilon": (_parse_float, 1e-7, "prior-weight ridge parameter"),
        "delta": (_parse_float, 1e-7, "posterior-operator ridge parameter"),
        "plots": (_parse_bool, False, "also render one chart image per cell"),
    },
    "sweep-grid": {
        **_SWEEP_COMMON,
        "sigma_grid": (_parse_float_list, _parse_float_list("0.01,0.1,1,10,100"),
                       "comma-separated bandwidth grid"),
        "epsilon_grid": (_parse_float_list, _parse_float_list(_PAPER_GRID),
                         "comma-separated epsilon grid"),
        "delta_grid": (_parse_float_list, _parse_float_list(_PAPER_GRID),
                       "comma-separated delta grid"),
    },
    "prior-independence": {
        "seed": (_parse_int, DEFAULT_MASTER_SEED, "seed for the training replicate"),
        "n_per_class": (_parse_int, 50, "training points per class"),
        "sigma": (_parse_float, 0.1, "Gaussian kernel bandwidth"),
        "epsilon": (_parse_float, 1e-7, "prior-weight ridge parameter"),
        "delta": (_parse_float, 1e-7, "posterior-operator ridge parameter"),
        "prior_a": (_parse_float, 0.1, "class-0 probability of the first prior"),
        "prior_b": (_parse_float, 0.9, "class-0 probability of the second prior"),
        "test_point": (lambda raw: _parse_points(raw)[0], (0.5, 0.5),
                       "conditioning point, e.g. '0.5,0.5'"),
    },
    "gram-nonsingular": {
        "seed": (_parse_int, DEFAULT_MASTER_SEED, "seed for trial streams"),
        "n": (_parse_int, 10, "points per trial"),
        "d": (_parse_int, 2, "point dimension"),
        "sigma": (_parse_float, 1.0, "Gaussian kernel bandwidth"),
        "trials": (_parse_int, 500, "number of trials"),
    },
    "weights-nonzero": {
        "seed": (_parse_int, DEFAULT_MASTER_SEED, "seed for trial streams"),
        "n": (_parse_int, 10, "points per trial"),
        "d": (_parse_int, 2, "point dimension"),
        "sigma": (_parse_float, 1.0, "Gaussian kernel bandwidth"),
        "epsilon": (_parse_float, 1e-3, "prior-weight ridge parameter"),
        "trials": (_parse_int, 200, "number of trials"),
    },
    "divergence-probe": {
        "seed": (_parse_int, DEFAULT_MASTER_SEED, "seed for the sample draw"),
        "n": (_parse_int, 200, "sample size"),
        "sigma0": (_parse_float, 1.0, "data scale (standard deviation)"),
        "sigma": (_parse_float, 1.0, "Gaussian kernel bandwidth"),
        "target": (_parse_str, "constant", "'constant' or 'section'"),
        "value": (_parse_float, 1.0, "constant target value"),
        "center": (_parse_float, 0.0, "kernel-section center"),
        "epsilon_grid": (_parse_float_list, _parse_float_list("1e-2,1e-4,1e-6"),
                         "strictly decreasing ridge grid"),
    },
    "version": {},
}

_DIAGNOSTICS = ("prior-independence", "gram-nonsingular", "weights-nonzero", "divergence-probe")


@dataclass(frozen=True)
class RunConfig:
    """Fully merged invocation: command, optional diagnostic, typed options."""

    command: str
    diagnostic: str | None
    outdir: str
    options: dict


def _add_option_flags(parser: argparse.ArgumentParser, keys: dict) -> None:
    for key, (_conv, default, help_text) in keys.items():
        flag = "--" + key.replace("_", "-")
        if key == "plots":
            parser.add_argument(flag, action=argparse.BooleanOptionalAction,
                                default=None, help=help_text)
        else:
            parser.add_argument(flag, type=str, default=None, metavar="V",
                                help=f"{help_text} (default: {default})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kernelbayes",
        description="Seeded kernel-Bayes sweeps and diagnostics with CSV output.",
    )
    parser.add_argument("--config", type=str, default=None,
                        help="flat key=value config file; CLI flags win")
    parser.add_argument("--outdir", type=str, default=None,
                        help=f"output directory (default: ${OUTDIR_ENV_VAR} or ./results)")
    sub = parser.add_subparsers(dest="command")

    sp = sub.add_parser("sweep-prior", help="one (sigma, epsilon, delta) cell over priors and test points")
    _add_option_flags(sp, _COMMAND_KEYS["sweep-prior"])

    sg = sub.add_parser("sweep-grid", help="cross product of sigma/epsilon/delta grids")
    _add_option_flags(sg, _COMMAND_KEYS["sweep-grid"])

    diag = sub.add_parser("diagnose", help="run one diagnostic")
    dsub = diag.add_subparsers(dest="diagnostic")
    for name in _DIAGNOSTICS:
        dp = dsub.add_parser(name)
        _add_option_flags(dp, _COMMAND_KEYS[name])

    sub.add_parser("version", help="print the package version")
    return parser


def _read_config_file(path: str, parser: argparse.ArgumentParser) -> dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        parser.error(f"cannot read config file {path}: {exc}")
    values: dict[str, str] = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            parser.error(f"{path}:{lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        values[key.strip()] = raw.strip()
    return values


def parse_config(argv) -> RunConfig:
    """Resolve an argument list into a RunConfig.

    Precedence: CLI flags, then config-file values, then defaults. Unknown
    config keys and malformed values are usage errors naming the offender.
    Defaults reproduce the shipped two-class protocol (n = 100, 100
    replicates, priors 0.1..0.9, sigma = 0.1, epsilon = delta = 1e-7).
    """
    parser = build_parser()
    ns = parser.parse_args(list(argv))
    command = ns.command or "sweep-prior"
    diagnostic = getattr(ns, "diagnostic", None)
    if command == "diagnose" and diagnostic is None:
        parser.error("diagnose requires one of: " + ", ".join(_DIAGNOSTICS))
    keys = _COMMAND_KEYS[diagnostic if command == "diagnose" else command]

    file_values = _read_config_file(ns.config, parser) if ns.config else {}
    known = set(keys) | {"outdir"}
    for key in file_values:
        if key not in known:
            parser.error(f"unknown config key {key!r} for command {command}")

    options = {}
    for key, (conv, default, _help) in keys.items():
        cli_raw = getattr(ns, key, None)
        try:
            if cli_raw is not None:
                options[key] = conv(cli_raw) if isinstance(cli_raw, str) else cli_raw
            elif key in file_values:
                options[key] = conv(file_values[key])
            else:
                options[key] = default
        except ValueError as exc:
            parser.error(f"invalid value for {key!r}: {exc}")

    outdir = ns.outdir or file_values.get("outdir") or os.environ.get(OUTDIR_ENV_VAR) or "results"
    return RunConfig(command=command, diagnostic=diagnostic, outdir=outdir, options=options)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc


def _write_metadata(path: str, metadata: dict[str, str]) -> None:
    lines = [f"{key} = {value}" for key, value in metadata.items()]
    _atomic_write(path + ".meta", "\n".join(lines) + "\n")


def emit_csv(result, path: str, metadata: dict[str, str] | None = None) -> None:
    """Write a result as CSV plus a flat key=value .meta sidecar.

    Accepts a SweepResult (fixed column schema), a TrialReport, or a
    divergence-probe series (list of (epsilon, norm) pairs, written with a
    commented header documenting the operator discretization). Floats carry
    17 significant digits so rows round-trip exactly.
    """
    meta = {"package": "kernelbayes", "version": __version__, "rng_family": RNG_FAMILY}
    if metadata:
        meta.update(metadata)

    if isinstance(result, SweepResult):
        lines = [",".join(SWEEP_CSV_COLUMNS)]
        for row in result.rows:
            lines.append(",".join(_fmt(getattr(row, col)) for col in SWEEP_CSV_COLUMNS))
        meta.update(result.metadata)
    elif isinstance(result, TrialReport):
        lines = ["trials,passes,pass_fraction,stat_min,stat_median,seed"]
        lines.append(",".join(_fmt(v) for v in (
            result.trials, result.passes, result.pass_fraction,
            result.stat_min, result.stat_median, result.seed,
        )))
    elif isinstance(result, list):
        lines = [
            "# RKHS norm of the ridge solution alpha = ((1/n) G + eps I)^-1 (v/n),",
            "# reported as sqrt(alpha' G alpha); (1/n) G + eps I is the standard",
            "# empirical discretization of the regularized covariance operator.",
            "# Growth without bound as eps shrinks signals a target outside the",
            "# operator range; conclusions are trends, not limits.",
            "epsilon,rkhs_norm",
        ]
        for eps, norm in result:
            lines.append(f"{_fmt(float(eps))},{_fmt(float(norm))}")
    else:
        raise TypeError(f"cannot emit {type(result).__name__} as CSV")

    _atomic_write(path, "\n".join(lines) + "\n")
    _write_metadata(path, meta)


def emit_plot_data(result: SweepResult, outdir: str, render: bool = False) -> list[str]:
    """Write one plot-ready table per (test point, sigma, epsilon, delta) cell.

    Each table has a prior column and, per classifier, mean / mean-SEM /
    mean+SEM columns. With ``render=True`` a single SVG chart per cell is
    drawn next to its table (requires matplotlib).
    """
    if not result.rows:
        raise ValueError("cannot emit plot data for an empty sweep result")
    os.makedirs(outdir, exist_ok=True)

    cells: dict[tuple, dict] = {}
    for row in result.rows:
        cell_key = (row.test_x, row.test_y, row.sigma, row.epsilon, row.delta)
        series = cells.setdefault(cell_key, {})
        series.setdefault(row.classifier, {})[row.prior_c1] = (row.mean_post_c1, row.sem)

    written = []
    for cell_key, series in cells.items():
        test_x, test_y, sigma, epsilon, delta = cell_key
        classifiers = [c for c in ("BR", "BR_th", "KBR1", "KBR2") if c in series]
        priors = sorted({p for s in series.values() for p in s})
        header = ["prior_c1"]
        for c in classifiers:
            prefix = c.lower()
            header += [f"{prefix}_mean", f"{prefix}_lower", f"{prefix}_upper"]
        lines = [",".join(header)]
        for p in priors:
            fields = [_fmt(p)]
            for c in classifiers:
                mean, row_sem = series[c][p]
                fields += [_fmt(mean), _fmt(mean - row_sem), _fmt(mean + row_sem)]
            lines.append(",".join(fields))

        stem = (
            f"cell_sigma{sigma:g}_eps{epsilon:g}_delta{delta:g}"
            f"_y{test_x:g}_{test_y:g}"
        )
        path = os.path.join(outdir, stem + ".csv")
        _atomic_write(path, "\n".join(lines) + "\n")
        written.append(path)
        if render:
            _render_cell_chart(series, classifiers, priors, cell_key,
                               os.path.join(outdir, stem + ".svg"))
    return written


def _render_cell_chart(series, classifiers, priors, cell_key, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    test_x, test_y, sigma, epsilon, delta = cell_key
    fig, ax = plt.subplots(figsize=(5, 4))
    for c in classifiers:
        means = np.array([series[c][p][0] for p in priors])
        sems = np.array([series[c][p][1] for p in priors])
        ax.errorbar(priors, means, yerr=sems, marker="o", capsize=2, label=c)
    ax.set_xlabel("prior probability of class 0")
    ax.set_ylabel("mean posterior of class 0")
    ax.set_title(f"y=({test_x:g},{test_y:g}), sigma={sigma:g}, eps={epsilon:g}, delta={delta:g}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _spec_from_options(options: dict, grid: bool) -> ExperimentSpec:
    kwargs = dict(
        n_per_class=options["n_per_class"],
        replicates=options["replicates"],
        priors=options["priors"],
        test_points=options["test_points"],
        master_seed=options["seed"],
    )
    if grid:
        kwargs.update(
            sigma_grid=options["sigma_grid"],
            epsilon_grid=options["epsilon_grid"],
            delta_grid=options["delta_grid"],
        )
    return ExperimentSpec(**kwargs)


def _hard_failed(result: SweepResult) -> bool:
    return any(row.n_errors == row.n_replicates for row in result.rows)


def _cmd_sweep_prior(cfg: RunConfig) -> int:
    options = cfg.options
    spec = _spec_from_options(options, grid=False)
    result = run_prior_sweep(spec, options["sigma"], options["epsilon"],
                             options["delta"], options["pinv_rtol"])
    os.makedirs(cfg.outdir, exist_ok=True)
    csv_path = os.path.join(cfg.outdir, "sweep_prior.csv")
    emit_csv(result, csv_path, metadata={
        "sigma": _fmt(options["sigma"]),
        "epsilon": _fmt(options["epsilon"]),
        "delta": _fmt(options["delta"]),
    })
    emit_plot_data(result, os.path.join(cfg.outdir, "cells"), render=options["plots"])
    print(f"wrote {csv_path} ({len(result.rows)} rows)")
    if _hard_failed(result):
        print("error: at least one cell failed on every replicate", file=sys.stderr)
        return 1
    return 0


def _cmd_sweep_grid(cfg: RunConfig) -> int:
    options = cfg.options
    spec = _spec_from_options(options, grid=True)
    result = run_grid_sweep(spec, pinv_rtol=options["pinv_rtol"])
    os.makedirs(cfg.outdir, exist_ok=True)
    csv_path = os.path.join(cfg.outdir, "sweep_grid.csv")
    emit_csv(result, csv_path)
    print(f"wrote {csv_path} ({len(result.rows)} rows)")
    if _hard_failed(result):
        print("error: at least one cell failed on every replicate", file=sys.stderr)
        return 1
    return 0


def _cmd_diagnose(cfg: RunConfig) -> int:
    options = cfg.options
    os.makedirs(cfg.outdir, exist_ok=True)
    name = cfg.diagnostic
    csv_path = os.path.join(cfg.outdir, f"diagnose_{name.replace('-', '_')}.csv")

    if name == "prior-independence":
        spec = ExperimentSpec(n_per_class=options["n_per_class"], replicates=1,
                              master_seed=options["seed"])
        sample = generate_training_sample(spec, 0)
        gap = prior_independence_gap(
            sample,
            (options["prior_a"], 1.0 - options["prior_a"]),
            (options["prior_b"], 1.0 - options["prior_b"]),
            np.asarray(options["test_point"], dtype=float),
            options["sigma"], options["epsilon"], options["delta"],
        )
        lines = ["prior_a,prior_b,sigma,epsilon,delta,gap",
                 ",".join(_fmt(v) for v in (
                     options["prior_a"], options["prior_b"], options["sigma"],
                     options["epsilon"], options["delta"], gap))]
        _atomic_write(csv_path, "\n".join(lines) + "\n")
        _write_metadata(csv_path, {"package": "kernelbayes", "version": __version__,
                                   "seed": str(options["seed"])})
        print(f"wrote {csv_path} (gap = {gap:.3e})")
        return 0

    if name == "gram-nonsingular":
        report = gram_nonsingularity_trial(options["n"], options["d"], options["sigma"],
                                           options["trials"], options["seed"])
    elif name == "weights-nonzero":
        d = options["d"]
        prior = PriorMixture(weights=np.array([0.5, 0.5]),
                             atoms=np.array([np.full(d, 0.5), np.full(d, -0.5)]))
        report = weights_nonzero_trial(options["n"], d, options["sigma"],
                                       options["epsilon"], prior,
                                       options["trials"], options["seed"])
    elif name == "divergence-probe":
        if options["target"] == "constant":
            target = ConstantTarget(options["value"])
        elif options["target"] == "section":
            target = KernelSectionTarget(options["center"])
        else:
            print(f"error: unknown target {options['target']!r}", file=sys.stderr)
            return 2
        series = rkhs_norm_divergence_probe(options["n"], options["sigma0"],
                                            options["sigma"], target,
                                            options["epsilon_grid"], options["seed"])
        emit_csv(series, csv_path, metadata={"seed": str(options["seed"]),
                                             "target": options["target"]})
        print(f"wrote {csv_path}")
        return 0
    else:
        raise AssertionError(f"unhandled diagnostic {name!r}")

    emit_csv(report, csv_path, metadata={"seed": str(options["seed"])})
    print(f"wrote {csv_path} (pass fraction = {report.pass_fraction:.4f})")
    return 0


def main(argv=None) -> int:
    cfg = parse_config(sys.argv[1:] if argv is None else argv)
    if cfg.command == "version":
        print(f"kernelbayes {__version__}")
        return 0
    if cfg.command == "sweep-prior":
        return _cmd_sweep_prior(cfg)
    if cfg.command == "sweep-grid":
        return _cmd_sweep_grid(cfg)
    if cfg.command == "diagnose":
        return _cmd_diagnose(cfg)
    raise AssertionError(f"unhandled command {cfg.command!r}")


if __name__ == "__main__":
    sys.exit(main())
