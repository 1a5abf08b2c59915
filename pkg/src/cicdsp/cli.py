"""Command-line front end: design, analyze, simulate, report.

Scalar results go to stdout as JSON; curves and sample streams go to CSV
files.  Exit codes: 0 success, 1 runtime or verification failure, 2 usage
error.  All randomized modes take ``--seed`` and default to a fixed seed,
so identical invocations produce byte-identical output.

``CICDSP_THREADS`` caps worker parallelism; the current implementation is
sequential, so any cap is honored trivially.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import analysis, bitarith, chain as chain_mod, sdm as sdm_mod
from .cic import CicConfig, max_growth, register_msb_index, register_width
from .fir import FitError


def worker_count() -> int:
    """Parallelism cap from CICDSP_THREADS (>=1); informational for now."""
    try:
        return max(1, int(os.environ.get("CICDSP_THREADS", "1")))
    except ValueError:
        return 1


def _emit(obj: dict) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 1


def _add_cic_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=5, help="filter order (stages)")
    p.add_argument("--r", type=int, default=16, help="decimation ratio")
    p.add_argument("--m", type=int, default=1, help="differential delay")
    p.add_argument("--bin", type=int, default=5, dest="b_in",
                   help="input word width in bits")


def _cic_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> CicConfig:
    if args.n < 1:
        parser.error("n must be >= 1")
    if args.r < 1:
        parser.error("r must be >= 1")
    if args.m < 1:
        parser.error("m must be >= 1")
    if args.b_in < 1:
        parser.error("bin must be >= 1")
    try:
        return CicConfig(args.n, args.r, args.m, args.b_in)
    except ValueError as e:
        parser.error(str(e))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_design(args, parser) -> int:
    cfg = _cic_config(args, parser)
    full = register_width(cfg)
    b_out = args.bout if args.bout is not None else full
    if not 2 <= b_out <= full:
        parser.error(f"bout must be in 2..{full}")
    widths = analysis.prune_stage_widths(cfg, b_out)
    budget = analysis.truncation_budget(cfg, analysis.widths_to_discards(cfg, widths))
    gain, gain_db = max_growth(cfg)
    _emit({
        "msb_index": register_msb_index(cfg),
        "register_width": full,
        "g_max": gain,
        "g_max_db": gain_db,
        "stage_widths": widths,
        "noise_budget": budget.as_dict(),
    })
    return 0


def cmd_response(args, parser) -> int:
    if args.points < 16:
        parser.error("points must be >= 16")
    fs = args.fs
    if args.filter == "cic":
        cfg = _cic_config(args, parser)
        grid = np.linspace(0.0, fs / 2, args.points)
        low = fs / cfg.r
        p = analysis.cic_power_response_exact(cfg, grid / low, normalized=True)
        with np.errstate(divide="ignore"):
            mag = np.maximum(10 * np.log10(p), analysis.DB_FLOOR)
        curve = analysis.ResponseCurve(grid, mag, np.zeros_like(grid), fs)
    else:
        cfg_chain = chain_mod.default_chain(input_rate=fs)
        if args.filter == "chain":
            grid = np.linspace(0.0, fs / 2, args.points)
            curve = chain_mod.overall_response(cfg_chain, grid)
        else:
            index = {"hb1": 1, "droop": 2, "hb2": 3}[args.filter]
            stage = cfg_chain.stages[index]
            grid = np.linspace(0.0, stage.filt.input_rate / 2, args.points)
            curve = analysis.fir_response(stage.filt, grid)
    curve.to_csv(args.out)
    print(f"wrote {args.points} points to {args.out}", file=sys.stderr)
    return 0


def cmd_simulate(args, parser) -> int:
    try:
        cfg = chain_mod.ChainConfig.from_json(args.config)
    except FileNotFoundError:
        return _fail(f"config not found: {args.config}")
    except (ValueError, KeyError) as e:
        return _fail(f"bad chain config {args.config}: {e}")
    try:
        stream = chain_mod.load_csv(args.infile)
    except FileNotFoundError:
        return _fail(f"input not found: {args.infile}")
    except ValueError as e:
        return _fail(str(e))
    try:
        out, taps = chain_mod.run_chain(cfg, stream)
    except ValueError as e:
        return _fail(str(e))
    chain_mod.save_csv(out, args.out)
    if args.taps_dir:
        os.makedirs(args.taps_dir, exist_ok=True)
        for i, t in enumerate(taps):
            chain_mod.save_csv(t, os.path.join(args.taps_dir, f"stage{i}.csv"))
    summary = {
        "input_rate_hz": cfg.input_rate,
        "output_rate_hz": out.rate,
        "stage_rates_hz": cfg.stage_rates(),
        "samples_in": len(stream),
        "samples_out": len(out),
        "audio_band_hz": cfg.audio_band,
        "snr_db": None,
    }
    trim = chain_mod.startup_length(cfg)
    steady = out.samples[trim:]
    if len(steady) >= 2048:
        spec = np.abs(np.fft.rfft(steady * np.hanning(len(steady))))
        peak = int(np.argmax(spec[1:]) + 1)
        freq = peak * out.rate / len(steady)
        band = min(cfg.audio_band, out.rate / 2)
        try:
            summary["snr_db"] = analysis.measure_snr(steady, freq, out.rate, band)
            summary["signal_freq_hz"] = freq
        except ValueError:
            pass
    _emit(summary)
    return 0


def cmd_sdm(args, parser) -> int:
    if args.order not in (1, 2, 3):
        parser.error("order must be 1, 2 or 3")
    if not 1 <= args.bits <= 8:
        parser.error("bits must be in 1..8")
    if args.amp > args.full_scale:
        parser.error("amp must not exceed the full scale")
    if args.len < 16:
        parser.error("len must be >= 16")
    cfg = sdm_mod.SdmConfig(args.order, args.bits, args.full_scale, args.fs)
    t = np.arange(args.len)
    x = args.amp * np.sin(2 * np.pi * args.freq / args.fs * t)
    try:
        codes, errors = sdm_mod.run_sdm(cfg, x)
    except sdm_mod.InstabilityError as e:
        return _fail(str(e))
    chain_mod.save_csv(chain_mod.SignalStream(np.array(codes), args.fs), args.out)
    summary = {
        "order": args.order,
        "bits": args.bits,
        "osr": sdm_mod.osr(args.fs, args.band),
        "clip_count": sdm_mod.clip_count(codes, errors, cfg),
        "snr_db": None,
    }
    recon = np.array(codes) * cfg.step
    if len(recon) >= 2048:
        try:
            summary["snr_db"] = analysis.measure_snr(recon, args.freq, args.fs,
                                                     args.band)
        except ValueError:
            pass
    _emit(summary)
    return 0


def cmd_noise_budget(args, parser) -> int:
    cfg = _cic_config(args, parser)
    full = register_width(cfg)
    if args.discards is not None:
        try:
            discards = [int(x) for x in args.discards.split(",")]
        except ValueError:
            parser.error("discards must be a comma-separated list of integers")
        try:
            budget = analysis.truncation_budget(cfg, discards)
        except ValueError as e:
            parser.error(str(e))
        widths = None
    else:
        b_out = args.bout if args.bout is not None else full
        if not 2 <= b_out <= full:
            parser.error(f"bout must be in 2..{full}")
        widths = analysis.prune_stage_widths(cfg, b_out)
        budget = analysis.truncation_budget(
            cfg, analysis.widths_to_discards(cfg, widths))
    out = budget.as_dict()
    out["register_width"] = full
    if widths is not None:
        out["stage_widths"] = widths
    _emit(out)
    return 0


def cmd_adders(args, parser) -> int:
    if args.width < 1:
        parser.error("width must be >= 1")
    if args.mode == "exhaustive" and args.width > 12 and args.kind not in (
            "ha", "pfa", "spfa"):
        parser.error("exhaustive mode is limited to width <= 12")
    if args.trials < 1:
        parser.error("trials must be >= 1")
    report = bitarith.check_equivalence(args.kind, args.width, args.mode,
                                        trials=args.trials, seed=args.seed)
    _emit(report)
    if report["mismatches"]:
        print(f"error: {report['mismatches']} mismatches against integer "
              "arithmetic", file=sys.stderr)
        return 1
    return 0


def cmd_chain(args, parser) -> int:
    cfg = chain_mod.default_chain(input_rate=args.fs)
    d = cfg.to_dict()
    d["stage_rates_hz"] = cfg.stage_rates()
    d["total_decimation"] = cfg.total_decimation
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(cfg.to_dict(), fh, indent=2)
            fh.write("\n")
        print(f"wrote chain config to {args.out}", file=sys.stderr)
    _emit(d)
    return 0


def cmd_snr(args, parser) -> int:
    try:
        stream = chain_mod.load_csv(args.infile)
    except FileNotFoundError:
        return _fail(f"input not found: {args.infile}")
    except ValueError as e:
        return _fail(str(e))
    band = args.band if args.band is not None else stream.rate / 2
    try:
        snr = analysis.measure_snr(stream.samples, args.freq, stream.rate, band)
    except ValueError as e:
        return _fail(str(e))
    _emit({
        "snr_db": snr,
        "rate_hz": stream.rate,
        "samples": len(stream),
        "signal_freq_hz": args.freq,
        "band_hz": band,
    })
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cicdsp",
        description="Fixed-point multirate decimation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="size a CIC datapath and price its pruning")
    _add_cic_flags(p)
    p.add_argument("--bout", type=int, default=None, help="output width in bits")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("response", help="write a frequency response CSV")
    p.add_argument("--filter", choices=["cic", "hb1", "hb2", "droop", "chain"],
                   default="cic")
    p.add_argument("--points", type=int, default=1024)
    p.add_argument("--fs", type=float, default=6_144_000.0,
                   help="input sample rate in Hz")
    p.add_argument("--out", default="response.csv")
    _add_cic_flags(p)
    p.set_defaults(func=cmd_response)

    p = sub.add_parser("simulate", help="run a chain config over a CSV stream")
    p.add_argument("--config", required=True, help="chain config JSON")
    p.add_argument("--in", required=True, dest="infile", help="input CSV")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--taps-dir", default=None,
                   help="directory for per-stage intermediate streams")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sdm", help="run a sigma-delta modulator on a sine")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--bits", type=int, default=5)
    p.add_argument("--fs", type=float, default=6_144_000.0)
    p.add_argument("--freq", type=float, default=1000.0)
    p.add_argument("--amp", type=float, default=0.5)
    p.add_argument("--full-scale", type=float, default=1.0, dest="full_scale")
    p.add_argument("--len", type=int, default=1 << 16)
    p.add_argument("--band", type=float, default=24_000.0)
    p.add_argument("--out", default="sdm_codes.csv")
    p.set_defaults(func=cmd_sdm)

    p = sub.add_parser("noise-budget", help="truncation noise budget JSON")
    _add_cic_flags(p)
    p.add_argument("--bout", type=int, default=None)
    p.add_argument("--discards", default=None,
                   help="comma-separated per-stage discarded-bit counts")
    p.set_defaults(func=cmd_noise_budget)

    p = sub.add_parser("adders", help="gate-level adder equivalence report")
    p.add_argument("--kind", choices=list(bitarith.ADDER_KINDS), required=True)
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--mode", choices=["exhaustive", "random"], default="exhaustive")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_adders)

    p = sub.add_parser("chain", help="emit the canonical chain config JSON")
    p.add_argument("--fs", type=float, default=6_144_000.0)
    p.add_argument("--out", default=None, help="also write the config here")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("snr", help="measure the SNR of a CSV stream")
    p.add_argument("--in", required=True, dest="infile")
    p.add_argument("--freq", type=float, required=True, help="tone frequency Hz")
    p.add_argument("--band", type=float, default=None,
                   help="noise band edge Hz (default: Nyquist)")
    p.set_defaults(func=cmd_snr)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except FitError as e:
        return _fail(str(e))
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    sys.exit(main())
