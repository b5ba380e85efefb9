"""Command-line front end for the certification pipeline.

Subcommands: ``mub`` (construct a basis pair and its figures of merit),
``simulate`` (run the interferometer Monte Carlo or emit ideal expected
counts), ``certify`` (turn counts or a bare ASP into a certificate),
``figure-data`` (plot-ready per-state CSVs), and ``replay`` (re-run a
command from its manifest).

Exit codes: 0 success, 2 bad arguments, 3 config validation failure,
4 malformed or unusable data.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .certify import full_certificate, min_asp_for_nontrivial_eta, report_table
from .counts import CountsTable, read_counts_csv, write_counts_csv
from .errors import (
    ConfigError,
    CountsFormatError,
    EmptyCell,
    MubCertError,
)
from .mub import (
    CONSTRUCTION_FOURIER,
    CONSTRUCTION_HADAMARD_D4,
    MubPair,
    fourier_mub_pair,
    hadamard_mub_pair_d4,
    is_mutually_unbiased,
    max_sqrt_overlap,
    mub_pair_to_dict,
    norm_sum,
    overlap_entropy,
)
from .photonics import (
    InterferometerConfig,
    PhaseNoiseConfig,
    calibrate_drift_sigma,
    ideal_expected_counts,
    mean_fringe_visibility,
    simulate_counts,
)
from .qrac import AspEstimate, estimate_asp, quantum_optimum

EXIT_OK = 0
EXIT_ARGS = 2
EXIT_CONFIG = 3
EXIT_DATA = 4


@dataclass
class RunManifest:
    """Provenance record accompanying every primary output file."""

    command: list
    tool_version: str
    seed: int | None
    config: dict | None
    inputs: list
    outputs: list
    started_utc: str
    finished_utc: str = ""
    extra: dict = field(default_factory=dict)

    def write(self, primary_output) -> Path:
        self.finished_utc = _utc_now()
        path = Path(str(primary_output) + ".manifest.json")
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")
        return path


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _fresh_seed() -> int:
    return int.from_bytes(os.urandom(8), "big")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = [args.subcommand] + list(argv if argv is not None else sys.argv[1:])[1:]
    try:
        return args.func(args, command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CountsFormatError, EmptyCell) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (MubCertError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mubcert",
        description="Simulate and certify the unbiased-basis random access code.",
    )
    parser.add_argument("--version", action="version", version=f"mubcert {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("mub", help="construct a basis pair and report its metrics")
    p.add_argument("--construction", required=True,
                   choices=[CONSTRUCTION_HADAMARD_D4, CONSTRUCTION_FOURIER])
    p.add_argument("--d", type=int, default=None, help="dimension (fourier only)")
    p.add_argument("--out", default="mub.json")
    p.set_defaults(func=cmd_mub)

    p = sub.add_parser("simulate", help="run the interferometer Monte Carlo")
    p.add_argument("--config", default=None, help="interferometer config JSON")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: OS entropy, recorded in the manifest)")
    p.add_argument("--rounds", type=int, default=None,
                   help="pulses to simulate (ideal mode: total count mass); "
                        "default rep_rate * integration_time")
    p.add_argument("--ideal", action="store_true",
                   help="bypass source/detector/noise models and emit exact "
                        "expected counts")
    p.add_argument("--visibility-target", type=float, default=None,
                   help="calibrate the drift sigma to this mean fringe visibility")
    p.add_argument("--out", default="counts.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="compute the certificate from counts or an ASP")
    p.add_argument("--counts", default=None, help="counts CSV path")
    p.add_argument("--asp", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--out", default="certificate.json")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("figure-data", help="emit plot-ready per-state CSVs")
    p.add_argument("--counts", required=True)
    p.add_argument("--out-prefix", default="figure")
    p.set_defaults(func=cmd_figure_data)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def cmd_mub(args, command) -> int:
    started = _utc_now()
    if args.construction == CONSTRUCTION_HADAMARD_D4:
        if args.d not in (None, 4):
            print("error: the hadamard-d4 construction is four-dimensional",
                  file=sys.stderr)
            return EXIT_ARGS
        pair = hadamard_mub_pair_d4()
    else:
        if args.d is None or args.d < 2:
            print("error: --d must be an integer >= 2 for the fourier construction",
                  file=sys.stderr)
            return EXIT_ARGS
        pair = fourier_mub_pair(args.d)

    doc = mub_pair_to_dict(pair)
    doc["metrics"] = _pair_metrics(pair)
    out = Path(args.out)
    out.write_text(json.dumps(doc, indent=2) + "\n")
    RunManifest(
        command=command, tool_version=__version__, seed=None, config=None,
        inputs=[], outputs=[str(out)], started_utc=started,
    ).write(out)
    print(f"wrote {out}")
    for key, value in doc["metrics"].items():
        print(f"  {key}: {value}")
    return EXIT_OK


def _pair_metrics(pair: MubPair) -> dict:
    return {
        "mutually_unbiased": bool(is_mutually_unbiased(pair, tol=1e-9)),
        "overlap_entropy_bits": overlap_entropy(pair),
        "norm_sum_first": norm_sum(pair.first),
        "norm_sum_second": norm_sum(pair.second),
        "max_sqrt_overlap": max_sqrt_overlap(pair),
    }


def cmd_simulate(args, command) -> int:
    started = _utc_now()
    if args.ideal and args.visibility_target is not None:
        print("error: --ideal and --visibility-target are mutually exclusive",
              file=sys.stderr)
        return EXIT_ARGS
    if args.config is not None:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        config = InterferometerConfig.from_dict(doc)
    else:
        config = InterferometerConfig()
    config.validate()

    seed = args.seed if args.seed is not None else _fresh_seed()
    extra = {}

    if args.visibility_target is not None:
        if config.phase_noise.model == "none":
            config.phase_noise = PhaseNoiseConfig(model="gaussian_drift")
        sigma = calibrate_drift_sigma(config, args.visibility_target, seed=seed)
        config.phase_noise = PhaseNoiseConfig(config.phase_noise.model, sigma)
        extra["calibrated_sigma"] = sigma
        extra["calibrated_mean_visibility"] = mean_fringe_visibility(config, seed=seed)

    if args.ideal:
        rounds = args.rounds if args.rounds is not None else 60000
        table = ideal_expected_counts(rounds)
        table.seed = seed
        table.config = config.to_dict()
        extra["mode"] = "ideal"
    else:
        table = simulate_counts(config, rounds=args.rounds, seed=seed)
        extra["mode"] = "monte-carlo"
    extra["total_detections"] = table.total()

    out = Path(args.out)
    write_counts_csv(table, out)
    RunManifest(
        command=command, tool_version=__version__, seed=seed,
        config=config.to_dict(), inputs=[args.config] if args.config else [],
        outputs=[str(out)], started_utc=started, extra=extra,
    ).write(out)
    print(f"wrote {out} ({table.total()} detections)")
    return EXIT_OK


def cmd_certify(args, command) -> int:
    started = _utc_now()
    inputs = []
    if args.counts is not None:
        if args.asp is not None or args.sigma is not None:
            print("error: give either --counts or --asp/--sigma, not both",
                  file=sys.stderr)
            return EXIT_ARGS
        table = read_counts_csv(args.counts)
        inputs.append(args.counts)
        est = estimate_asp(table)
        d = table.dim
        if args.d is not None and args.d != d:
            print(f"error: counts table is {d}-dimensional, got --d {args.d}",
                  file=sys.stderr)
            return EXIT_ARGS
    else:
        if args.asp is None or args.sigma is None or args.d is None:
            print("error: --asp, --sigma and --d are required without --counts",
                  file=sys.stderr)
            return EXIT_ARGS
        est = AspEstimate(value=args.asp, sigma=args.sigma)
        d = args.d

    if not 0.5 < est.value <= 1.0:
        print(f"data error: ASP {est.value} outside (1/2, 1]", file=sys.stderr)
        return EXIT_DATA
    if est.sigma < 0.0:
        print("data error: sigma must be nonnegative", file=sys.stderr)
        return EXIT_DATA

    report = full_certificate(est, d)
    out = Path(args.out)
    out.write_text(report.to_json() + "\n")
    table_out = out.with_suffix(".txt")
    table_text = report_table(report)
    table_out.write_text(table_text + "\n")
    RunManifest(
        command=command, tool_version=__version__, seed=None, config=None,
        inputs=inputs, outputs=[str(out), str(table_out)], started_utc=started,
    ).write(out)
    print(table_text)
    print(f"wrote {out} and {table_out}")
    return EXIT_OK


def cmd_figure_data(args, command) -> int:
    started = _utc_now()
    table = read_counts_csv(args.counts)
    est = estimate_asp(table)
    d = table.dim

    totals = table.setting_totals().astype(float)
    prob_path = Path(f"{args.out_prefix}_outcome_probabilities.csv")
    outcome_cols = ",".join(f"p{b + 1}" for b in range(d))
    lines = [f"i,j,y,{outcome_cols}"]
    for i in range(d):
        for j in range(d):
            for y in range(2):
                probs = table.cells[i, j, y] / totals[i, j, y]
                row = ",".join(repr(float(p)) for p in probs)
                lines.append(f"{i + 1},{j + 1},{y + 1},{row}")
    prob_path.write_text("\n".join(lines) + "\n")

    asp_path = Path(f"{args.out_prefix}_state_asp.csv")
    optimal = float(quantum_optimum(d))
    red_line = float(min_asp_for_nontrivial_eta(d))
    lines = ["i,j,asp_y1,asp_y2,optimal_asp,min_selftest_asp"]
    for i in range(d):
        for j in range(d):
            lines.append(
                f"{i + 1},{j + 1},"
                f"{float(est.per_input[i, j, 0])!r},{float(est.per_input[i, j, 1])!r},"
                f"{optimal!r},{red_line!r}"
            )
    asp_path.write_text("\n".join(lines) + "\n")

    RunManifest(
        command=command, tool_version=__version__, seed=None, config=None,
        inputs=[args.counts], outputs=[str(prob_path), str(asp_path)],
        started_utc=started,
    ).write(asp_path)
    print(f"wrote {prob_path} and {asp_path}")
    return EXIT_OK


def cmd_replay(args, command) -> int:
    try:
        doc = json.loads(Path(args.manifest).read_text())
        argv = [str(a) for a in doc["command"]]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"data error: cannot replay {args.manifest}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
