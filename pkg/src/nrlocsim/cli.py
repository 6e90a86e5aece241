"""Command-line entry point: one subcommand per application case.

Precedence: built-in defaults < config file < ``--set`` overrides < dedicated
flags (--seed, --snr, --drops, --workers).  Exit codes: 0 success, 2 config
error, 3 runtime case error.
"""

from __future__ import annotations

import argparse
import sys

from .cases import CASES, CaseError, case_spec, run_case, tx_grid
from .config import ConfigError, SimConfig, apply_assignments, config_from_dict, config_to_dict, load_config
from .io import summary_rows, write_outputs, write_waveform
from .waveform import ofdm_modulate

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _snr_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid SNR list {text!r}") from None


def build_config(args) -> SimConfig:
    cfg = load_config(args.config) if args.config else SimConfig().resolved()
    cfg = apply_assignments(cfg, args.set)
    system = {}
    if args.seed is not None:
        system["master_seed"] = args.seed
    if args.snr is not None:
        system["snr_db"] = args.snr
    if args.drops is not None:
        system["drops"] = args.drops
    if args.workers is not None:
        system["workers"] = args.workers
    if system:
        data = config_to_dict(cfg)
        data["system"].update(system)
        cfg = config_from_dict(data)
    return cfg


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file (sections system, carrier, signal, channel, hi, abf)")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--snr", type=_snr_list, help="SNR list in dB, e.g. '-10,0,10'")
    p.add_argument("--drops", type=int, help="drops per SNR point")
    p.add_argument("--out", help="output directory (tables, config copy, manifest)")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--only-drop", type=int, help="replay a single drop index")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="config override, e.g. hi.to.enabled=true (repeatable)")
    p.add_argument("--emit-pathsets", action="store_true", help="write pathsets.csv")
    p.add_argument("--emit-beams", action="store_true", help="write beams.csv (beam RSRP reports)")
    p.add_argument("--no-cdf", action="store_true", help="skip cdf.csv")
    p.add_argument("--dump-waveform", action="store_true",
                   help="write the transmitted baseband waveform (tx_waveform.bin/.json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nrlocsim", description="5G NR positioning link-level simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for case in CASES:
        _common(sub.add_parser(case, help=f"run the {case} case"))
    run = sub.add_parser("run", help="run the case given by --case")
    run.add_argument("--case", required=True, choices=CASES)
    _common(run)
    return parser


def _print_summary(result) -> None:
    print("variant\tsnr_db\tn\tfailures\tmean\trmse\trms")
    for v, snr, n, fail, mean, rmse, rms in summary_rows(result):
        print(f"{v}\t{snr:g}\t{n}\t{fail}\t{mean:.4g}\t{rmse:.4g}\t{rms:.4g}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    case = args.case if args.command == "run" else args.command
    try:
        cfg = build_config(args)
        spec = case_spec(cfg, case, out_dir=args.out, emit_pathsets=args.emit_pathsets,
                         emit_beam_reports=args.emit_beams, emit_cdf=not args.no_cdf,
                         only_drop=args.only_drop)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_case(cfg, spec)
        if args.out:
            write_outputs(args.out, cfg, result, emit_cdf=spec.emit_cdf)
            if args.dump_waveform:
                write_waveform(f"{args.out}/tx_waveform", ofdm_modulate(tx_grid(cfg), cfg.carrier))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (CaseError, ValueError, RuntimeError, OSError) as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    _print_summary(result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
