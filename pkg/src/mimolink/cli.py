"""Command-line front end.

Two subcommands mirror the two experiment kinds:

    mimolink capacity-cdf --evm-db=-16 --snr-db 0,4,8 --rates 8,16 --out t.csv
    mimolink fer-sweep --detector ml --whitening on --snr-db 12,16,20

Flags may also come from a flat `key = value` file via --config; explicit
flags win over file values. Exit codes: 0 success, 1 configuration
error, 2 numerical failure.
"""

import argparse
import sys

from .harness import (
    ConfigError,
    build_config,
    fer_rows_to_csv_text,
    parse_config_file,
    run_capacity_cdf,
    run_fer_sweep,
)
from .linalg import NotPositiveDefiniteError, RankDeficientError

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage problems as ConfigError
    (exit code 1) instead of calling sys.exit(2)."""

    def error(self, message):
        raise ConfigError(message)


def _add_common(sub):
    sub.add_argument("--mt", dest="mt", help="transmit antennas (default 4)")
    sub.add_argument("--mr", dest="mr", help="receive antennas (default 4)")
    sub.add_argument(
        "--evm-db", dest="evm-db", help="transmitter impairment level in dB; -inf for ideal"
    )
    sub.add_argument(
        "--snr-db", dest="snr-db", help="comma-separated SNR grid in dB"
    )
    sub.add_argument("--seed", dest="seed", help="master seed (default 1)")
    sub.add_argument("--config", dest="config", help="flat key = value config file")
    sub.add_argument("--out", dest="out", help="output CSV path (default stdout)")


def build_parser():
    parser = _Parser(prog="mimolink", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", metavar="{capacity-cdf,fer-sweep}")

    cdf = subs.add_parser(
        "capacity-cdf", help="Monte Carlo outage probability table"
    )
    _add_common(cdf)
    cdf.add_argument("--rates", dest="rates", help="comma-separated rates in bpcu")
    cdf.add_argument("--trials", dest="trials", help="channel draws (default 10000)")

    fer = subs.add_parser("fer-sweep", help="coded frame-error-rate sweep")
    _add_common(fer)
    fer.add_argument(
        "--detector", dest="detector", choices=["zf", "mmse", "ml", "app"]
    )
    fer.add_argument("--whitening", dest="whitening", choices=["on", "off"])
    fer.add_argument("--frames", dest="frames", help="frame cap per SNR point")
    fer.add_argument(
        "--min-frame-errors",
        dest="min-frame-errors",
        help="early-stop error count per SNR point (default 100)",
    )
    return parser


def _merge_value_flags(argv):
    """Join `--flag -value` into `--flag=-value` so negative numbers and
    -inf survive argparse's option detection."""
    value_flags = {"--evm-db", "--snr-db", "--rates"}
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (
            tok in value_flags
            and i + 1 < len(argv)
            and argv[i + 1].startswith("-")
            and not argv[i + 1].startswith("--")
        ):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = vars(parser.parse_args(_merge_value_flags(list(argv))))
        command = args.pop("command")
        if command is None:
            raise ConfigError("choose a subcommand: capacity-cdf or fer-sweep")
        config_path = args.pop("config")
        file_values = parse_config_file(config_path) if config_path else None
        kind = command.replace("-", "_")
        config = build_config(kind, file_values=file_values, cli_values=args)
    except ConfigError as exc:
        print(f"mimolink: configuration error: {exc}", file=sys.stderr)
        return 1

    try:
        if config.kind == "capacity_cdf":
            csv_text = run_capacity_cdf(config).to_csv_text()
        else:
            csv_text = fer_rows_to_csv_text(run_fer_sweep(config))
    except (
        RankDeficientError,
        NotPositiveDefiniteError,
        FloatingPointError,
        ArithmeticError,
        RuntimeError,
        ValueError,
    ) as exc:
        print(f"mimolink: numerical failure: {exc}", file=sys.stderr)
        return 2

    if config.out:
        with open(config.out, "w", newline="") as f:
            f.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
