"""The full multi-stage decimation pipeline and its signal I/O.

A chain is an ordered list of stages (one bit-exact CIC, then real-valued
FIR stages) with strict rate bookkeeping: every stage's input rate must be
the previous stage's output rate.  The canonical audio chain decimates
6.144 MHz by 128 down to 48 kHz:

    CIC /16 -> half-band /2 -> droop FIR /2 -> half-band /2

Startup transients are emitted, not trimmed, so output length is a pure
function of input length.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import fir as fir_mod
from .analysis import ResponseCurve, cic_power_response_exact, fir_response
from .cic import CicConfig, decimate_array, max_growth
from .fir import FirFilter, HalfBandSpec, design_droop_compensator, design_halfband

DEFAULT_INPUT_RATE = 6_144_000.0
DEFAULT_AUDIO_BAND = 24_000.0


@dataclass(frozen=True)
class SignalStream:
    samples: np.ndarray
    rate: float

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples)
        object.__setattr__(self, "samples", arr)
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if arr.dtype.kind == "f" and not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class CicStage:
    cfg: CicConfig
    kind: str = "cic"

    @property
    def decimation(self) -> int:
        return self.cfg.r


@dataclass(frozen=True)
class FirStage:
    filt: FirFilter
    kind: str = "fir"  # "halfband" | "droop" | "fir"

    @property
    def decimation(self) -> int:
        return self.filt.decimation


@dataclass(frozen=True)
class ChainConfig:
    stages: tuple
    input_rate: float = DEFAULT_INPUT_RATE
    audio_band: float = DEFAULT_AUDIO_BAND

    def __post_init__(self) -> None:
        if self.input_rate <= 0:
            raise ValueError("input_rate must be positive")
        if not 0 < self.audio_band <= self.input_rate / 2:
            raise ValueError("audio_band must be in (0, input_rate/2]")
        rate = self.input_rate
        for i, st in enumerate(self.stages):
            if isinstance(st, FirStage):
                if not math.isclose(st.filt.input_rate, rate, rel_tol=1e-9):
                    raise ValueError(
                        f"stage {i} expects input rate {st.filt.input_rate}, "
                        f"chain provides {rate}"
                    )
            rate /= st.decimation

    @property
    def total_decimation(self) -> int:
        total = 1
        for st in self.stages:
            total *= st.decimation
        return total

    @property
    def output_rate(self) -> float:
        return self.input_rate / self.total_decimation

    def stage_rates(self) -> list:
        """Input rate of each stage, then the final output rate."""
        rates = [self.input_rate]
        for st in self.stages:
            rates.append(rates[-1] / st.decimation)
        return rates

    # -- JSON serialization ------------------------------------------------

    def to_dict(self) -> dict:
        stages = []
        for st in self.stages:
            if isinstance(st, CicStage):
                stages.append({
                    "type": "cic",
                    "n": st.cfg.n, "r": st.cfg.r, "m": st.cfg.m,
                    "b_in": st.cfg.b_in,
                })
            else:
                stages.append({
                    "type": st.kind,
                    "taps": list(st.filt.taps),
                    "decimation": st.filt.decimation,
                })
        return {
            "input_rate_hz": self.input_rate,
            "audio_band_hz": self.audio_band,
            "stages": stages,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChainConfig":
        rate = float(d["input_rate_hz"])
        stages = []
        cur = rate
        for sd in d["stages"]:
            kind = sd["type"]
            if kind == "cic":
                cfg = CicConfig(int(sd["n"]), int(sd["r"]), int(sd.get("m", 1)),
                                int(sd["b_in"]))
                stages.append(CicStage(cfg))
                cur /= cfg.r
            elif kind in ("halfband", "droop", "fir"):
                filt = FirFilter(tuple(sd["taps"]), cur, int(sd.get("decimation", 1)))
                stages.append(FirStage(filt, kind))
                cur /= filt.decimation
            else:
                raise ValueError(f"unknown stage type {kind!r}")
        return cls(tuple(stages), input_rate=rate,
                   audio_band=float(d.get("audio_band_hz", DEFAULT_AUDIO_BAND)))

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "ChainConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def default_chain(input_rate: float = DEFAULT_INPUT_RATE,
                  audio_band: float = DEFAULT_AUDIO_BAND) -> ChainConfig:
    """The canonical 128x audio chain for a 5-bit modulator front end.

    Band edges scale with ``input_rate``: half-band one passes 32 kHz at a
    384 kHz rate, the order-14 droop corrector passes 32 kHz and stops at
    70 kHz, half-band two passes 21.77 kHz at a 96 kHz rate.
    """
    scale = input_rate / DEFAULT_INPUT_RATE
    cic_cfg = CicConfig(n=5, r=16, m=1, b_in=5)
    r1 = input_rate / 16
    hb1 = design_halfband(HalfBandSpec(order=8, input_rate=r1,
                                       f_pass=32_000.0 * scale))
    r2 = r1 / 2
    droop = design_droop_compensator(14, cic_cfg, r2, 32_000.0 * scale,
                                     f_stop=70_000.0 * scale)
    r3 = r2 / 2
    hb2 = design_halfband(HalfBandSpec(order=80, input_rate=r3,
                                       f_pass=21_770.0 * scale))
    return ChainConfig(
        stages=(CicStage(cic_cfg), FirStage(hb1, "halfband"),
                FirStage(droop, "droop"), FirStage(hb2, "halfband")),
        input_rate=input_rate, audio_band=audio_band,
    )


def startup_length(cfg: ChainConfig) -> int:
    """Output samples until every stage's memory is full of real signal.

    Each stage's transient (its tap count, or the CIC's impulse length)
    expressed at the final output rate, summed and rounded up; consumers
    that want steady-state statistics should drop this many samples.
    """
    total = 0.0
    rate = cfg.input_rate
    for st in cfg.stages:
        if isinstance(st, CicStage):
            length = (st.cfg.r * st.cfg.m - 1) * st.cfg.n + 1
        else:
            length = len(st.filt.taps)
        total += length / (rate / cfg.output_rate)
        rate /= st.decimation
    return math.ceil(total) + 1


def run_chain(cfg: ChainConfig, stream: SignalStream) -> tuple:
    """Drive every stage in order; returns (output, per-stage outputs).

    The CIC stage consumes integer codes bit-exactly and its output is
    rescaled by the exact DC gain ``1/(RM)**N`` (an exact dyadic division)
    before the double-precision FIR stages.
    """
    if not math.isclose(stream.rate, cfg.input_rate, rel_tol=1e-9):
        raise ValueError(f"stream rate {stream.rate} != chain input rate "
                         f"{cfg.input_rate}")
    if len(stream) == 0:
        raise ValueError("empty input stream")
    samples = stream.samples
    rate = cfg.input_rate
    taps_out = []
    for st in cfg.stages:
        rate /= st.decimation
        if isinstance(st, CicStage):
            ints = np.asarray(samples)
            if ints.dtype.kind == "f":
                rounded = np.rint(ints)
                if not np.allclose(ints, rounded, atol=1e-9):
                    raise ValueError("CIC stage requires integer-valued samples")
                ints = rounded.astype(np.int64)
            out = decimate_array(st.cfg, ints)
            gain, _ = max_growth(st.cfg)
            samples = np.asarray(out, dtype=float) / gain
        else:
            samples = fir_mod.apply_fir(st.filt, samples)
        taps_out.append(SignalStream(samples, rate))
    return SignalStream(samples, rate), taps_out


def overall_response(cfg: ChainConfig, grid_hz) -> ResponseCurve:
    """Cascade magnitude response on an absolute-Hz grid, 0 dB at DC.

    Each stage is evaluated at the grid frequency as seen at that stage's
    input rate (responses are periodic, so frequencies beyond a stage's
    Nyquist wrap exactly as the decimated signal folds).
    """
    grid = np.asarray(grid_hz, dtype=float)
    if np.any(grid < 0) or np.any(grid > cfg.input_rate / 2):
        raise ValueError("grid must lie within [0, input_rate/2]")
    total_db = np.zeros_like(grid)
    rate = cfg.input_rate
    for st in cfg.stages:
        if isinstance(st, CicStage):
            low = rate / st.cfg.r
            p = cic_power_response_exact(st.cfg, grid / low, normalized=True)
            with np.errstate(divide="ignore"):
                total_db += np.maximum(10 * np.log10(p), 2 * len(cfg.stages) * -400.0)
        else:
            curve = fir_response(st.filt, grid)
            dc = abs(sum(st.filt.taps))
            total_db += curve.magnitude_db - 20 * np.log10(dc)
        rate /= st.decimation
    total_db = np.maximum(total_db, -400.0)
    return ResponseCurve(grid, total_db, np.zeros_like(grid), cfg.input_rate)


# ---------------------------------------------------------------------------
# CSV signal I/O
# ---------------------------------------------------------------------------

def save_csv(stream: SignalStream, path) -> None:
    """``index,value`` rows under a ``# rate_hz=`` header; floats use
    shortest round-trip formatting so save/load is exact."""
    with open(path, "w") as fh:
        fh.write(f"# rate_hz={float(stream.rate)!r}\n")
        for i, v in enumerate(stream.samples):
            if isinstance(v, (int, np.integer)):
                fh.write(f"{i},{int(v)}\n")
            else:
                fh.write(f"{i},{float(v)!r}\n")


def load_csv(path) -> SignalStream:
    rate = None
    samples = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "rate_hz=" in line:
                    try:
                        rate = float(line.split("rate_hz=", 1)[1])
                    except ValueError as e:
                        raise ValueError(f"{path}:{lineno}: bad rate header") from e
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'index,value'")
            try:
                samples.append(float(parts[1]))
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: bad value {parts[1]!r}") from e
    if rate is None:
        raise ValueError(f"{path}: missing '# rate_hz=' header")
    if not samples:
        raise ValueError(f"{path}: empty stream")
    return SignalStream(np.array(samples), rate)
