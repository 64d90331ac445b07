"""Command-line front end: one binary, one flag grammar, six experiments."""

from __future__ import annotations

import argparse
import sys

from .demos import (
    DemoConfig,
    render_dj_report,
    run_classic,
    run_dj,
    run_gamma,
    run_grover,
    run_nmr,
    run_simple,
)

# the spectrum experiment mirrors its source listing, which ran at 280 bits
_PREC_DEFAULTS = {"nmr": 280}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpcmat",
        description="Multiprecision matrix and quantum-circuit demo runner.",
    )
    parser.add_argument(
        "--prec",
        type=int,
        default=None,
        metavar="BITS",
        help="significand length in bits (default: 256; nmr defaults to 280)",
    )
    parser.add_argument(
        "--out",
        default=".",
        metavar="DIR",
        help="directory for output data files (default: current directory)",
    )
    parser.add_argument(
        "--digits",
        type=int,
        default=8,
        metavar="N",
        help="significant decimal digits per printed value (default: 8)",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        metavar="U64",
        help="seed for any randomized step (all demos are deterministic anyway)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "classic",
        help="sweep an ill-conditioned 2x2 solve over a precision range (--prec unused)",
    )
    p.add_argument("--prec-min", type=int, default=32, metavar="BITS")
    p.add_argument("--prec-max", type=int, default=256, metavar="BITS")

    p = sub.add_parser("nmr", help="two-spin thermal FID spectrum data file")
    p.add_argument(
        "--temperature", default="300", metavar="K", help="temperature in kelvin"
    )

    p = sub.add_parser("dj", help="balanced-function single-query circuit report")
    p.add_argument(
        "--bundles", type=int, default=7, metavar="K", help="4-bit input bundles"
    )
    p.add_argument(
        "--m-trunc",
        type=int,
        default=0,
        metavar="M",
        help="bond-rank cap, 0 keeps everything",
    )

    p = sub.add_parser("grover", help="two-qubit search success-probability transcript")
    p.add_argument("--iterations", type=int, default=8, metavar="N")

    sub.add_parser("simple", help="three-qubit walk-through in bra-ket notation")

    p = sub.add_parser("gamma", help="evaluate the gamma function at a complex point")
    p.add_argument("z", help="complex literal, e.g. '0.5' or '1+2i'")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = DemoConfig(
            precision=args.prec or _PREC_DEFAULTS.get(args.command, 256),
            output_dir=args.out,
            output_digits=args.digits,
            seed=args.seed,
        )
        if args.command == "classic":
            if args.prec_min > args.prec_max:
                parser.error("--prec-min must not exceed --prec-max")
            for path in run_classic(config, args.prec_min, args.prec_max):
                print(f"wrote {path}")
        elif args.command == "nmr":
            print(f"wrote {run_nmr(config, args.temperature)}")
        elif args.command == "dj":
            report = run_dj(config, args.bundles, args.m_trunc)
            print(render_dj_report(report, config.output_digits))
        elif args.command == "grover":
            print(run_grover(config, args.iterations))
        elif args.command == "simple":
            print(run_simple(config))
        elif args.command == "gamma":
            print(run_gamma(config, args.z))
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
