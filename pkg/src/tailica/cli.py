"""Command-line interface.

Subcommands: ingest, synth, fit, transform, entropy, tailcov, scatter,
eval.  Every flag can also be supplied through a ``key=value`` config
file (``--config``); explicit command-line values win over the config,
which wins over built-in defaults.  Each run writes a manifest with every
effective parameter, so rerunning from the manifest reproduces the
outputs byte for byte.  Exit codes: 0 success, 1 usage error, 2 data
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import __version__
from .entropy import EntropyEstimatorConfig, estimate_entropy
from .errors import DataError, NumericalError
from .evaluate import (
    SyntheticMarketSpec,
    generate_market,
    histogram_to_csv,
    report_to_dict,
    run_experiment_artifacts,
    scatter_moment_entropy,
    scatter_to_csv,
)
from .ica import transform as unmix_transform
from .ica import unmixing_from_csv, unmixing_to_csv
from .panel import center, ingest_csv, read_wide_csv, write_wide_csv
from .tailcov import tail_covariance, tail_covariance_to_csv
from .whiten import apply_whitening, whitening_from_csv, whitening_to_csv


class UsageError(Exception):
    """Bad flags, bad config keys or invalid parameter values."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse from calling sys.exit(2)
        raise UsageError(message)


@dataclass(frozen=True)
class Opt:
    """One CLI option: flag spelling, value kind and its real default."""

    flag: str
    kind: str  # int | float | str | bool | int_list | window
    default: object = None
    help: str = ""
    required: bool = False

    @property
    def dest(self) -> str:
        return self.flag.lstrip("-").replace("-", "_")


def _parse_bool(text: str) -> bool:
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _parse_int_list(text: str) -> list:
    try:
        return [int(part) for part in str(text).split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _parse_window(text: str):
    if str(text).strip().lower() == "auto":
        return None
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"expected an integer or 'auto', got {text!r}") from None


_CONVERTERS = {
    "int": int,
    "float": float,
    "str": str,
    "bool": _parse_bool,
    "int_list": _parse_int_list,
    "window": _parse_window,
}

_MARKET_DEFAULTS = SyntheticMarketSpec()

_MARKET_OPTS = [
    Opt("--assets", "int", _MARKET_DEFAULTS.n_assets, "number of assets"),
    Opt("--samples", "int", _MARKET_DEFAULTS.m_samples, "number of daily observations"),
    Opt("--nu-min", "float", _MARKET_DEFAULTS.nu_range[0], "smallest idiosyncratic Student-t degrees of freedom"),
    Opt("--nu-max", "float", _MARKET_DEFAULTS.nu_range[1], "largest idiosyncratic Student-t degrees of freedom"),
    Opt("--nu-factor", "float", _MARKET_DEFAULTS.nu_factor, "factor Student-t degrees of freedom"),
    Opt("--loading-min", "float", _MARKET_DEFAULTS.loading_range[0], "smallest factor loading"),
    Opt("--loading-max", "float", _MARKET_DEFAULTS.loading_range[1], "largest factor loading"),
    Opt("--vol-min", "float", _MARKET_DEFAULTS.vol_range[0], "smallest per-asset volatility (percent)"),
    Opt("--vol-max", "float", _MARKET_DEFAULTS.vol_range[1], "largest per-asset volatility (percent)"),
    Opt("--tremor-prob", "float", _MARKET_DEFAULTS.tremor_prob, "daily probability of a fixed-size factor shock"),
    Opt("--tremor-scale", "float", _MARKET_DEFAULTS.tremor_scale, "size of factor tremor days"),
    Opt("--crash-prob", "float", _MARKET_DEFAULTS.crash_prob, "daily crash probability inside the crash regime"),
    Opt("--crash-scale", "float", _MARKET_DEFAULTS.crash_scale, "factor amplification on crash days"),
    Opt("--crash-start", "float", _MARKET_DEFAULTS.crash_start, "fraction of the sample where the crash regime starts"),
    Opt("--start-date", "str", _MARKET_DEFAULTS.start_date, "first row date (ISO)"),
]

_PIPELINE_OPTS = [
    Opt("--d", "int", None, "number of whitened dimensions to keep", required=True),
    Opt("--k", "int_list", [2], "contrast order(s); repeatable or comma-separated"),
    Opt("--seed", "int", 0, "random seed for the solver initialization"),
    Opt("--tol", "float", 1e-8, "solver convergence tolerance"),
    Opt("--max-iter", "int", 1000, "solver iteration cap"),
    Opt("--eig-floor", "float", 1e-10, "relative eigenvalue floor for whitening"),
    Opt("--standardize", "bool", False, "scale columns to unit variance before PCA"),
    Opt("--entropy-method", "str", "correa", "entropy estimator: vasicek, ebrahimi or correa"),
    Opt("--entropy-window", "window", None, "spacing window; 'auto' means floor(sqrt(m))"),
]

_INPUT_OPTS = [
    Opt("--input", "str", None, "input CSV path", required=True),
    Opt("--format", "str", "auto", "input layout: auto, long or wide"),
    Opt("--fill-missing", "bool", True, "fill absent (date,symbol) cells with 0.0 (long format)"),
]

_COMMANDS = {
    "ingest": _INPUT_OPTS
    + [Opt("--out", "str", None, "output wide-format CSV path", required=True)],
    "synth": _MARKET_OPTS
    + [
        Opt("--seed", "int", 0, "market generation seed"),
        Opt("--out", "str", None, "output wide-format CSV path", required=True),
    ],
    "fit": _INPUT_OPTS
    + _PIPELINE_OPTS
    + [
        Opt("--boundary", "str", None, "bucket boundary date (ISO)", required=True),
        Opt("--out", "str", None, "output directory", required=True),
    ],
    "transform": [
        Opt("--input", "str", None, "wide-format panel CSV", required=True),
        Opt("--whitening", "str", None, "whitening transform CSV", required=True),
        Opt("--unmixing", "str", None, "unmixing matrix CSV (optional: whiten only)"),
        Opt("--out", "str", None, "output wide-format CSV path", required=True),
    ],
    "entropy": _INPUT_OPTS
    + [
        Opt("--method", "str", "correa", "entropy estimator"),
        Opt("--window", "window", None, "spacing window; 'auto' means floor(sqrt(m))"),
        Opt("--out", "str", None, "output CSV path (stdout when omitted)"),
    ],
    "tailcov": _INPUT_OPTS
    + [
        Opt("--k", "int", 1, "tail covariance order"),
        Opt("--center", "bool", True, "center columns before computing"),
        Opt("--out", "str", None, "output CSV path (stdout when omitted)"),
    ],
    "scatter": _INPUT_OPTS
    + [
        Opt("--bucket-label", "str", "all", "label stored with each record"),
        Opt("--method", "str", "correa", "entropy estimator"),
        Opt("--window", "window", None, "spacing window; 'auto' means floor(sqrt(m))"),
        Opt("--out", "str", None, "output CSV path", required=True),
    ],
    "eval": _MARKET_OPTS
    + [
        Opt("--d", "int", 30, opt.help)
        if opt.flag == "--d"
        else (Opt("--k", "int_list", [2, 10], opt.help) if opt.flag == "--k" else opt)
        for opt in _PIPELINE_OPTS
    ]
    + [
        Opt("--market-seed", "int", 0, "market generation seed"),
        Opt("--boundary", "str", None, "bucket boundary date (ISO); default: sample midpoint"),
        Opt("--out", "str", None, "output directory", required=True),
    ],
}

_HELP = {
    "ingest": "read a long- or wide-format CSV and write a clean wide panel",
    "synth": "generate a synthetic fat-tailed market panel",
    "fit": "split at a boundary date, whiten, fit unmixings and write tail reports",
    "transform": "apply a saved whitening (and optionally an unmixing) to a panel",
    "entropy": "estimate differential entropy per column",
    "tailcov": "compute an order-k tail covariance matrix",
    "scatter": "write per-symbol (root moment, entropy) records",
    "eval": "synthesize the default market and run the full experiment",
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="tailica", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"tailica {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    for name, opts in _COMMANDS.items():
        sub = subparsers.add_parser(name, help=_HELP[name], description=_HELP[name])
        sub.add_argument("--config", help="key=value file supplying defaults for any flag")
        for opt in opts:
            default_note = "" if opt.default is None else f" (default: {opt.default})"
            if opt.kind == "bool":
                sub.add_argument(
                    opt.flag,
                    dest=opt.dest,
                    action=argparse.BooleanOptionalAction,
                    default=None,
                    help=opt.help + default_note,
                )
            elif opt.kind == "int_list":
                sub.add_argument(
                    opt.flag,
                    dest=opt.dest,
                    action="append",
                    type=_parse_int_list,
                    default=None,
                    help=opt.help + f" (default: {','.join(map(str, opt.default))})",
                )
            else:
                sub.add_argument(
                    opt.flag,
                    dest=opt.dest,
                    type=str,
                    default=None,
                    help=opt.help + default_note,
                )
    return parser


def _load_config(path: str) -> dict:
    values = {}
    try:
        with open(path) as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
                key, value = line.split("=", 1)
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    return values


def _effective_params(args, opts) -> dict:
    config = _load_config(args.config) if args.config else {}
    known = {opt.dest for opt in opts}
    unknown = set(config) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    params = {}
    for opt in opts:
        cli_value = getattr(args, opt.dest)
        if cli_value is not None:
            value = cli_value
            if opt.kind == "int_list":
                # repeated flags each parse a comma list; flatten them
                value = [item for chunk in cli_value for item in chunk]
            elif opt.kind != "bool":
                try:
                    value = _CONVERTERS[opt.kind](cli_value)
                except (ValueError, TypeError):
                    raise UsageError(f"bad value for {opt.flag}: {cli_value!r}") from None
        elif opt.dest in config:
            value = _CONVERTERS[opt.kind](config[opt.dest])
        else:
            value = opt.default
            if value is None and opt.required:
                raise UsageError(f"{opt.flag} is required (flag or config)")
        params[opt.dest] = value
    return params


def _write_text(path: str, text: str) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(text)


def _write_manifest(path: str, command: str, params: dict) -> None:
    manifest = {
        "command": command,
        "package_version": __version__,
        "parameters": {key: value for key, value in params.items() if key != "out"},
    }
    _write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_panel(path: str, layout: str = "auto", fill_missing: bool = True):
    if layout not in ("auto", "long", "wide"):
        raise UsageError(f"--format must be auto, long or wide, got {layout!r}")
    if layout == "long":
        return ingest_csv(path, fill_missing)
    if layout == "wide":
        return read_wide_csv(path)
    with open(path) as handle:
        header = handle.readline()
    cells = [cell.strip().lower() for cell in header.strip().split(",")]
    if cells == ["date", "symbol", "return"]:
        return ingest_csv(path, fill_missing)
    return read_wide_csv(path)


def _market_spec(params: dict, seed_key: str) -> SyntheticMarketSpec:
    return SyntheticMarketSpec(
        n_assets=params["assets"],
        m_samples=params["samples"],
        nu_range=(params["nu_min"], params["nu_max"]),
        nu_factor=params["nu_factor"],
        loading_range=(params["loading_min"], params["loading_max"]),
        vol_range=(params["vol_min"], params["vol_max"]),
        tremor_prob=params["tremor_prob"],
        tremor_scale=params["tremor_scale"],
        crash_prob=params["crash_prob"],
        crash_scale=params["crash_scale"],
        crash_start=params["crash_start"],
        start_date=params["start_date"],
        seed=params[seed_key],
    )


def _run_pipeline(panel, params: dict, out_dir: str) -> None:
    entropy_config = EntropyEstimatorConfig(params["entropy_method"], params["entropy_window"])
    artifacts = run_experiment_artifacts(
        panel,
        params["boundary"],
        params["d"],
        params["k"],
        entropy_config,
        seed=params["seed"],
        tol=params["tol"],
        max_iter=params["max_iter"],
        eig_floor=params["eig_floor"],
        standardize=params["standardize"],
    )
    _write_text(os.path.join(out_dir, "whitening.csv"), whitening_to_csv(artifacts.whitening))
    diagnostics = {}
    for k, unmixing in artifacts.unmixings.items():
        _write_text(os.path.join(out_dir, f"W_k{k}.csv"), unmixing_to_csv(unmixing))
        diagnostics[str(k)] = {
            "iterations": unmixing.iterations,
            "converged": unmixing.converged,
            "kkt_off_diagonal_max": artifacts.kkt[k].off_diagonal_max,
            "kkt_orthonormality_max": artifacts.kkt[k].orthonormality_max,
            "identity_off_diagonal_max": artifacts.identity_kkt[k].off_diagonal_max,
        }
    for report in artifacts.reports:
        stem = f"k{report.k}_{report.bucket}"
        _write_text(
            os.path.join(out_dir, f"report_{stem}.json"),
            json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n",
        )
        _write_text(
            os.path.join(out_dir, f"hist_{stem}.csv"),
            histogram_to_csv(report.bin_edges, report.counts),
        )
        _write_text(
            os.path.join(out_dir, f"hist_portfolio_{stem}.csv"),
            histogram_to_csv(report.portfolio_bin_edges, report.portfolio_counts),
        )
    _write_text(os.path.join(out_dir, "scatter_in.csv"), scatter_to_csv(artifacts.scatter_in))
    _write_text(os.path.join(out_dir, "scatter_out.csv"), scatter_to_csv(artifacts.scatter_out))
    _write_text(
        os.path.join(out_dir, "diagnostics.json"),
        json.dumps(diagnostics, indent=2, sort_keys=True) + "\n",
    )


def _cmd_ingest(params: dict) -> None:
    panel = _load_panel(params["input"], params["format"], params["fill_missing"])
    write_wide_csv(panel, params["out"])
    _write_manifest(params["out"] + ".manifest.json", "ingest", params)


def _cmd_synth(params: dict) -> None:
    panel = generate_market(_market_spec(params, "seed"))
    write_wide_csv(panel, params["out"])
    _write_manifest(params["out"] + ".manifest.json", "synth", params)


def _cmd_fit(params: dict) -> None:
    panel = _load_panel(params["input"], params["format"], params["fill_missing"])
    os.makedirs(params["out"], exist_ok=True)
    _run_pipeline(panel, params, params["out"])
    _write_manifest(os.path.join(params["out"], "manifest.json"), "fit", params)


def _cmd_transform(params: dict) -> None:
    panel = read_wide_csv(params["input"])
    with open(params["whitening"]) as handle:
        transform_w = whitening_from_csv(handle.read())
    result = apply_whitening(transform_w, panel)
    if params["unmixing"]:
        with open(params["unmixing"]) as handle:
            unmixing = unmixing_from_csv(handle.read())
        result = unmix_transform(unmixing, result)
    write_wide_csv(result, params["out"])
    _write_manifest(params["out"] + ".manifest.json", "transform", params)


def _cmd_entropy(params: dict) -> None:
    panel = _load_panel(params["input"], params["format"], params["fill_missing"])
    config = EntropyEstimatorConfig(params["method"], params["window"])
    lines = ["symbol,entropy,method,window_n,m"]
    for j, cid in enumerate(panel.column_ids):
        estimate = estimate_entropy(panel.data[:, j], config)
        lines.append(
            f"{cid},{estimate.value!r},{estimate.method},{estimate.window_n},{estimate.m}"
        )
    text = "\n".join(lines) + "\n"
    if params["out"]:
        _write_text(params["out"], text)
        _write_manifest(params["out"] + ".manifest.json", "entropy", params)
    else:
        sys.stdout.write(text)


def _cmd_tailcov(params: dict) -> None:
    panel = _load_panel(params["input"], params["format"], params["fill_missing"])
    if params["center"]:
        panel = center(panel)
    matrix = tail_covariance(panel, params["k"], check_centered=params["center"])
    text = tail_covariance_to_csv(matrix)
    if params["out"]:
        _write_text(params["out"], text)
        _write_manifest(params["out"] + ".manifest.json", "tailcov", params)
    else:
        sys.stdout.write(text)


def _cmd_scatter(params: dict) -> None:
    panel = _load_panel(params["input"], params["format"], params["fill_missing"])
    config = EntropyEstimatorConfig(params["method"], params["window"])
    records = scatter_moment_entropy(panel, params["bucket_label"], config)
    _write_text(params["out"], scatter_to_csv(records))
    _write_manifest(params["out"] + ".manifest.json", "scatter", params)


def _cmd_eval(params: dict) -> None:
    spec = _market_spec(params, "market_seed")
    panel = generate_market(spec)
    if params["boundary"] is None:
        params = dict(params, boundary=panel.row_ids[panel.m // 2])
    os.makedirs(params["out"], exist_ok=True)
    write_wide_csv(panel, os.path.join(params["out"], "market.csv"))
    _run_pipeline(panel, params, params["out"])
    _write_manifest(os.path.join(params["out"], "manifest.json"), "eval", params)


_RUNNERS = {
    "ingest": _cmd_ingest,
    "synth": _cmd_synth,
    "fit": _cmd_fit,
    "transform": _cmd_transform,
    "entropy": _cmd_entropy,
    "tailcov": _cmd_tailcov,
    "scatter": _cmd_scatter,
    "eval": _cmd_eval,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        params = _effective_params(args, _COMMANDS[args.command])
        _RUNNERS[args.command](params)
        return 0
    except SystemExit as exc:  # argparse --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"tailica: usage error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"tailica: usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"tailica: data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"tailica: numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
