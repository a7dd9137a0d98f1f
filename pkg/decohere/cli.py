"""Command-line front end.

Subcommands::

    decohere process  in.wav out.wav --method scal [--noise] [params]
    decohere analyze  stereo.wav --csv gamma.csv --json bands.json
    decohere simulate config.json|--preset NAME --out-dir DIR
    decohere compare  config.json|--preset NAME --out-dir DIR
    decohere response --method scal --alpha 0.4 --beta 0.43 --order 10 --csv response.csv

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 divergence.
The default master seed comes from ``DECOHERE_SEED`` when set.
"""

import argparse
import asyncio
import logging
import os
import sys
from typing import List, Optional

from .analysis import band_summary, stereo_coherence
from .config.manager import ConfigManager
from .core.errors import ConfigurationError, DecohereError
from .dsp.chain import METHODS, DecorrelatorConfig, process_channels
from .dsp.decorrelators import (
    AllpassBaselineConfig,
    ScalConfig,
    SmoothedAbsConfig,
    frequency_response_table,
    general_allpass_coefficients,
    scal_coefficients,
)
from .dsp.psynoise import NoiseInjectorConfig
from .dsp.windows import WindowSpec
from .io.reports import dumps_report, write_csv, write_json
from .io.wavfile import WavFile, read_wav, write_wav
from .sim.aecsim import run_comparison

logger = logging.getLogger("decohere.cli")

SEED_ENV = "DECOHERE_SEED"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{SEED_ENV} must be an integer, got '{raw}'")


def decorrelator_from_args(args: argparse.Namespace) -> DecorrelatorConfig:
    window = WindowSpec(length=args.window)
    cfg = DecorrelatorConfig(
        method=args.method,
        noise=args.noise,
        seed=args.seed,
        scal=ScalConfig(
            beta=args.beta, n_min=args.nmin, n_max=args.nmax, r_max=args.rmax,
            epsilon=args.epsilon, mode=args.filter_mode, window=window, seed=args.seed,
        ),
        comb_order=args.comb_order,
        allpass=AllpassBaselineConfig(alpha_min=args.alpha_min, seed=args.seed),
        smoothed_abs=SmoothedAbsConfig(alpha_abs=args.alpha_abs),
        noise_cfg=NoiseInjectorConfig(
            window=window,
            threshold_offset_db=args.noise_offset_db,
            lowband_emphasis_db=args.noise_emphasis_db,
            highband_rolloff_db=args.noise_rolloff_db,
            seed=args.seed,
        ),
    )
    cfg.validate()
    return cfg


def cmd_process(args: argparse.Namespace) -> int:
    cfg = decorrelator_from_args(args)
    wav = read_wav(args.input)
    if wav.channels not in (1, 2):
        raise ConfigurationError(f"Input must have 1 or 2 channels, got {wav.channels}")
    output = process_channels(cfg, wav.buffer)
    write_wav(args.output, WavFile(output, args.bit_depth or wav.bit_depth))
    print(f"{args.output}: {output.n_frames} frames, {output.n_channels} ch, method '{cfg.label}'")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    wav = read_wav(args.input)
    if wav.channels != 2:
        raise ConfigurationError(f"analyze needs a stereo file, got {wav.channels} channel(s)")
    spectrum = stereo_coherence(wav.buffer, args.fft_size, args.blocks)
    summary = {
        "input": str(args.input),
        "fft_size": spectrum.fft_size,
        "n_blocks_averaged": spectrum.n_blocks_averaged,
        "sample_rate": spectrum.sample_rate,
        "bands": band_summary(spectrum),
    }
    if args.csv:
        write_csv(args.csv, spectrum.to_frame())
    if args.json:
        write_json(args.json, summary)
    else:
        sys.stdout.write(dumps_report(summary))
    return 0


def _load_document(args: argparse.Namespace):
    manager = ConfigManager()
    if args.preset:
        document = manager.create_config_from_template(args.preset)
    elif args.config:
        document = manager.load_simulation_config(args.config)
    else:
        raise ConfigurationError("Give a configuration file or --preset")
    if args.seed is not None:
        document = document.model_copy(update={"seed": args.seed})
    return manager, document


def cmd_simulate(args: argparse.Namespace) -> int:
    manager, document = _load_document(args)
    suite, material = manager.build_suite(document)
    report = asyncio.run(run_comparison(
        suite, material, out_dir=args.out_dir, max_concurrency=args.jobs, progress=args.progress,
        dump_dir=args.dump_wav,
    ))
    if not args.out_dir:
        sys.stdout.write(dumps_report(report))
    for row in report["results"]:
        final = row["final_misalignment_db"]
        shown = "n/a" if final is None else f"{final:.2f} dB"
        print(f"{row['variant']} / {row['source']}: final misalignment {shown}", file=sys.stderr)
    return 0


def cmd_response(args: argparse.Namespace) -> int:
    if args.method == "general":
        if not args.coefficients:
            raise ConfigurationError("--coefficients is required for the general allpass")
        b, a = general_allpass_coefficients(args.coefficients, args.filter_mode)
    else:
        beta = 0.0 if args.method == "comb_allpass" else args.beta
        b, a = scal_coefficients(args.alpha, beta, args.order, args.filter_mode)
    table = frequency_response_table(b, a, args.points)
    if args.csv:
        write_csv(args.csv, table)
    else:
        table.to_csv(sys.stdout, index=False, float_format="%.10g")
    return 0


def _add_decorrelator_arguments(parser: argparse.ArgumentParser) -> None:
    scal = ScalConfig()
    parser.add_argument("--method", choices=METHODS, default="scal")
    parser.add_argument("--noise", action="store_true", help="add psychoacoustically masked noise")
    parser.add_argument("--beta", type=float, default=scal.beta)
    parser.add_argument("--nmin", type=int, default=scal.n_min)
    parser.add_argument("--nmax", type=int, default=scal.n_max)
    parser.add_argument("--rmax", type=float, default=scal.r_max)
    parser.add_argument("--epsilon", type=float, default=scal.epsilon)
    parser.add_argument("--filter-mode", choices=("flat", "literal"), default="flat")
    parser.add_argument("--window", type=int, default=WindowSpec().length, help="WOLA window length")
    parser.add_argument("--comb-order", type=int, default=7)
    parser.add_argument("--alpha-min", type=float, default=AllpassBaselineConfig().alpha_min)
    parser.add_argument("--alpha-abs", type=float, default=SmoothedAbsConfig().alpha_abs)
    noise = NoiseInjectorConfig()
    parser.add_argument("--noise-offset-db", type=float, default=noise.threshold_offset_db)
    parser.add_argument("--noise-emphasis-db", type=float, default=noise.lowband_emphasis_db)
    parser.add_argument("--noise-rolloff-db", type=float, default=noise.highband_rolloff_db)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decohere", description="Stereo channel decorrelation toolkit")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    subparsers = parser.add_subparsers(dest="command", required=True)

    process = subparsers.add_parser("process", help="decorrelate a mono or stereo WAV file")
    process.add_argument("input")
    process.add_argument("output")
    process.add_argument("--seed", type=int, default=None)
    process.add_argument("--bit-depth", choices=("pcm16", "float32"), default=None,
                         help="output encoding (default: same as input)")
    _add_decorrelator_arguments(process)
    process.set_defaults(handler=cmd_process)

    analyze = subparsers.add_parser("analyze", help="inter-channel coherence of a stereo WAV file")
    analyze.add_argument("input")
    analyze.add_argument("--fft-size", type=int, default=4096)
    analyze.add_argument("--blocks", type=int, default=None, help="blocks to average (default: all)")
    analyze.add_argument("--csv", help="per-bin coherence output")
    analyze.add_argument("--json", help="band summary output (default: stdout)")
    analyze.set_defaults(handler=cmd_analyze)

    for name, help_text in (("simulate", "run an echo-cancellation simulation"),
                            ("compare", "run a decorrelator comparison suite")):
        sim = subparsers.add_parser(name, help=help_text)
        sim.add_argument("config", nargs="?", help="JSON or YAML simulation document")
        sim.add_argument("--preset", choices=ConfigManager().list_templates())
        sim.add_argument("--out-dir", help="directory for report.json and CSV traces")
        sim.add_argument("--seed", type=int, default=None)
        sim.add_argument("--jobs", type=int, default=None, help="simulations computing at once")
        sim.add_argument("--progress", action="store_true")
        sim.add_argument("--dump-wav", metavar="DIR", help="write far, decorrelated and mic signals per run as WAV")
        sim.set_defaults(handler=cmd_simulate)

    response = subparsers.add_parser("response", help="frequency response of an allpass section")
    response.add_argument("--method", choices=("scal", "comb_allpass", "general"), default="scal")
    response.add_argument("--alpha", type=float, default=0.4)
    response.add_argument("--beta", type=float, default=ScalConfig().beta)
    response.add_argument("--order", type=int, default=10)
    response.add_argument("--coefficients", type=float, nargs="+", help="a_1..a_N for the general allpass")
    response.add_argument("--filter-mode", choices=("flat", "literal"), default="flat")
    response.add_argument("--points", type=int, default=4096)
    response.add_argument("--csv")
    response.set_defaults(handler=cmd_response)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s")

    try:
        if args.command == "process" and args.seed is None:
            args = argparse.Namespace(**{**vars(args), "seed": default_seed()})
        if args.command in ("simulate", "compare") and args.seed is None and SEED_ENV in os.environ:
            args = argparse.Namespace(**{**vars(args), "seed": default_seed()})
        return args.handler(args)
    except DecohereError as exc:
        print(f"decohere: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
