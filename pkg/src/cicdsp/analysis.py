"""Frequency-domain and truncation-noise analysis for the decimation chain.

Frequency conventions: the closed-form CIC responses take ``f`` relative to
the filter's low (output) rate, matching the usual Hogenauer plots; FIR
responses take absolute Hz against the filter's own input rate.  Exact
response nulls are clamped to -400 dB so curves serialize cleanly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cic import CicConfig, impulse_coefficients, register_width
from .fir import FirFilter

DB_FLOOR = -400.0

# Minimum 4-term Blackman-Harris; for a coherent tone all leakage lands
# within +/-3 bins, which is why the SNR estimator claims exactly that many.
_BH4 = (0.35875, 0.48829, 0.14128, 0.01168)
_SIGNAL_BINS = 3


@dataclass(frozen=True)
class ResponseCurve:
    freqs: np.ndarray
    magnitude_db: np.ndarray
    phase_rad: np.ndarray
    reference_rate: float

    def __post_init__(self) -> None:
        f = np.asarray(self.freqs, dtype=float)
        m = np.asarray(self.magnitude_db, dtype=float)
        p = np.asarray(self.phase_rad, dtype=float)
        if not (len(f) == len(m) == len(p)):
            raise ValueError("freqs, magnitude and phase must share a length")
        if np.any(np.diff(f) <= 0):
            raise ValueError("freqs must be strictly increasing")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "magnitude_db", np.maximum(m, DB_FLOOR))
        object.__setattr__(self, "phase_rad", p)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# rate_hz={float(self.reference_rate)!r}\n")
            fh.write("freq_hz,magnitude_db,phase_rad\n")
            for f, m, p in zip(self.freqs, self.magnitude_db, self.phase_rad):
                fh.write(f"{float(f)!r},{float(m)!r},{float(p)!r}\n")

    @classmethod
    def from_csv(cls, path) -> "ResponseCurve":
        rate = None
        rows = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    if "rate_hz=" in line:
                        rate = float(line.split("rate_hz=")[1])
                    continue
                if line.startswith("freq_hz"):
                    continue
                parts = line.split(",")
                if len(parts) != 3:
                    raise ValueError(f"{path}:{lineno}: expected 3 columns")
                rows.append(tuple(float(x) for x in parts))
        if rate is None:
            raise ValueError(f"{path}: missing '# rate_hz=' header")
        if not rows:
            raise ValueError(f"{path}: empty curve")
        f, m, p = (np.array(col) for col in zip(*rows))
        return cls(f, m, p, rate)


def _power_db(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.maximum(10.0 * np.log10(p), DB_FLOOR)


def cic_power_response_exact(cfg: CicConfig, f, normalized: bool = False):
    """Closed-form power response ``[sin(pi M f)/sin(pi f / R)]**2N``.

    ``f`` is relative to the low rate.  The removable singularities at
    multiples of R (including DC) evaluate to the full DC power
    ``(RM)**2N``; ``normalized=True`` divides that out.
    """
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr < 0):
        raise ValueError("f must be non-negative")
    num = np.sin(np.pi * cfg.m * f_arr)
    den = np.sin(np.pi * f_arr / cfg.r)
    dc = float(cfg.r * cfg.m) ** (2 * cfg.n)
    singular = np.abs(den) < 1e-12
    ratio = np.where(singular, 1.0, num / np.where(singular, 1.0, den))
    p = np.where(singular, dc, ratio ** (2 * cfg.n))
    if normalized:
        p = p / dc
    return p if np.ndim(f) else float(p)


def cic_power_response_approx(cfg: CicConfig, f):
    """Sinc approximation ``[RM sin(pi M f)/(pi M f)]**2N``, valid on
    ``0 <= f <= 1/M``; within 1 dB of the exact form for R >= 10, N <= 7."""
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr < 0) or np.any(f_arr > 1.0 / cfg.m):
        raise ValueError("approximation holds only for 0 <= f <= 1/M")
    x = np.pi * cfg.m * f_arr
    zero = x == 0
    ratio = np.where(zero, 1.0, np.sin(x) / np.where(zero, 1.0, x))
    p = (cfg.r * cfg.m * ratio) ** (2 * cfg.n)
    return p if np.ndim(f) else float(p)


def stage_response(kind: str, k: int, omega: float) -> tuple:
    """Power and phase of one integrator or comb stage at ``omega`` rad/sample.

    The integrator pole sits at DC; at omega = 0 the power is reported as
    ``inf`` (phase ``nan``) rather than raising.
    """
    if kind == "integrator":
        if omega == 0:
            return math.inf, math.nan
        power = 1.0 / (2.0 * (1.0 - math.cos(omega)))
        phase = -math.atan2(math.sin(omega), 1.0 - math.cos(omega))
        return power, phase
    if kind == "comb":
        if k < 1:
            raise ValueError("comb delay k must be >= 1")
        return 2.0 * (1.0 - math.cos(k * omega)), -k * omega / 2.0
    raise ValueError("kind must be 'integrator' or 'comb'")


def fir_response(f: FirFilter, grid_hz) -> ResponseCurve:
    """Evaluate ``H(e^{j 2 pi F / rate})`` over a grid of absolute Hz."""
    grid = np.asarray(grid_hz, dtype=float)
    t = np.asarray(f.taps)
    k = np.arange(len(t))
    z = np.exp(-2j * np.pi * np.outer(grid / f.input_rate, k))
    h = z @ t
    mag = np.abs(h)
    with np.errstate(divide="ignore"):
        mag_db = np.maximum(20.0 * np.log10(mag), DB_FLOOR)
    return ResponseCurve(grid, mag_db, np.angle(h), f.input_rate)


def measure_snr(xs: Sequence, signal_freq: float, rate: float, band: float) -> float:
    """Windowed-DFT SNR: tone power in the +/-3 bins around ``signal_freq``
    over the remaining energy below ``band``.

    Uses a periodic 4-term Blackman-Harris window, so a coherent tone leaks
    nothing outside its 7 signal bins.  Bins 0..3 (the window's DC skirt)
    are excluded from the noise sum.
    """
    x = np.asarray(xs, dtype=float)
    n = len(x)
    if n < 2048:
        raise ValueError("need at least 2048 samples for an SNR estimate")
    if not 0 < signal_freq < band or band > rate / 2:
        raise ValueError("require 0 < signal_freq < band <= rate/2")
    t = np.arange(n)
    w = (_BH4[0]
         - _BH4[1] * np.cos(2 * np.pi * t / n)
         + _BH4[2] * np.cos(4 * np.pi * t / n)
         - _BH4[3] * np.cos(6 * np.pi * t / n))
    spec = np.abs(np.fft.rfft(x * w)) ** 2
    k0 = round(signal_freq * n / rate)
    kb = min(int(band * n / rate), len(spec) - 1)
    if k0 - _SIGNAL_BINS <= _SIGNAL_BINS or k0 + _SIGNAL_BINS > kb:
        raise ValueError("signal bins collide with the DC skirt or band edge")
    sig = spec[k0 - _SIGNAL_BINS: k0 + _SIGNAL_BINS + 1].sum()
    noise_mask = np.zeros(len(spec), dtype=bool)
    noise_mask[_SIGNAL_BINS + 1: kb + 1] = True
    noise_mask[k0 - _SIGNAL_BINS: k0 + _SIGNAL_BINS + 1] = False
    noise = spec[noise_mask].sum()
    if noise == 0:
        return math.inf
    return 10.0 * math.log10(sig / noise)


# ---------------------------------------------------------------------------
# Hogenauer truncation-noise model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StageNoise:
    stage: int           # 1..2N+1
    discard_bits: int    # LSB index of this stage's truncation (0 = none)
    quantum: float       # error step E
    mean: float          # E/2
    variance: float      # E^2/12
    dc_gain: float       # mean propagation factor D
    power_gain: float    # variance propagation factor F^2


@dataclass(frozen=True)
class NoiseBudget:
    stages: tuple
    mean_total: float
    variance_total: float

    def as_dict(self) -> dict:
        return {
            "stages": [
                {
                    "stage": s.stage,
                    "discard_bits": s.discard_bits,
                    "quantum": s.quantum,
                    "mean": s.mean,
                    "variance": s.variance,
                    "dc_gain": s.dc_gain,
                    "power_gain": s.power_gain,
                }
                for s in self.stages
            ],
            "mean_total": self.mean_total,
            "variance_total": self.variance_total,
        }


def hj_coefficients(cfg: CicConfig, j: int) -> list:
    """Impulse response from the input of stage ``j`` to the filter output.

    Stages 1..N (integrators) see the remaining integrators plus all N combs;
    at the input rate that path collapses to
    ``(1 - z^-1)**(j-1) * (sum_{k<RM} z^-k)**N``.  Stages N+1..2N (combs) see
    ``(1 - z^-M)**(2N+1-j)`` at the output rate, and the output register sees
    a bare unit tap.  All responses are exact integers.
    """
    n = cfg.n
    if not 1 <= j <= 2 * n + 1:
        raise ValueError(f"stage index must be in 1..{2 * n + 1}")
    if j == 2 * n + 1:
        return [1]
    if j <= n:
        taps = impulse_coefficients(cfg)
        for _ in range(j - 1):
            taps = _diff(taps, 1)
        return taps
    power = 2 * n + 1 - j
    taps = [1]
    for _ in range(power):
        taps = _diff(taps, cfg.m)
    return taps


def _diff(taps: list, lag: int) -> list:
    out = list(taps) + [0] * lag
    for i in range(len(taps)):
        out[i + lag] -= taps[i]
    return out


def _power_gains(cfg: CicConfig) -> list:
    return [float(sum(t * t for t in hj_coefficients(cfg, j)))
            for j in range(1, 2 * cfg.n + 2)]


def truncation_budget(cfg: CicConfig, discards: Sequence) -> NoiseBudget:
    """Mean and variance the listed truncations add to the filter output.

    ``discards[j-1]`` is stage j's truncation expressed as the LSB index of
    its register relative to full precision, i.e. the total number of bits
    gone at that point; pass 0 for stages that discard nothing new (the
    usual case for combs that inherit the width of the last integrator,
    which inject no error of their own).  Each nonzero entry is an
    independent uniform error source of quantum ``2**b`` whose mean
    propagates with the stage's DC gain and whose variance with the summed
    squared impulse response to the output.
    """
    n = cfg.n
    discards = [int(b) for b in discards]
    if len(discards) != 2 * n + 1:
        raise ValueError(f"discards must have {2 * n + 1} entries")
    if any(b < 0 for b in discards):
        raise ValueError("discards must be non-negative")
    full = register_width(cfg)
    if any(full - b < 2 for b in discards):
        raise ValueError("discard exceeds the stage width")
    gains = _power_gains(cfg)
    dc = float(cfg.r * cfg.m) ** cfg.n
    stages = []
    mean_total = 0.0
    var_total = 0.0
    for j, b in enumerate(discards, start=1):
        quantum = 0.0 if b == 0 else float(2 ** b)
        mean = quantum / 2.0
        var = quantum * quantum / 12.0
        if j == 1:
            d = dc
        elif j == 2 * n + 1:
            d = 1.0
        else:
            d = 0.0
        f2 = gains[j - 1]
        stages.append(StageNoise(j, b, quantum, mean, var, d, f2))
        mean_total += mean * d
        var_total += var * f2
    return NoiseBudget(tuple(stages), mean_total, var_total)


def widths_to_discards(cfg: CicConfig, widths: Sequence) -> list:
    """Map a non-increasing width list to budget inputs: stages that shrink
    get their cumulative discarded-bit count, the rest get 0."""
    full = register_width(cfg)
    out = []
    prev = full
    for w in widths:
        out.append(full - w if w < prev else 0)
        prev = w
    return out


def prune_stage_widths(cfg: CicConfig, b_out: int,
                       budget: float | None = None) -> list:
    """Greedy register pruning: shrink stages one bit at a time, always the
    cheapest in added output noise, while the total stays within budget.

    The default budget scales the unavoidable output-requantization variance
    ``4**(W - b_out)/12`` by the filter's DC gain over its decimation ratio,
    which keeps the added noise on the order of the input quantization noise
    as seen at the output; a zero-bit output truncation therefore allows no
    pruning at all.  The first stage is never pruned and widths are kept
    non-increasing down to ``b_out``.
    """
    full = register_width(cfg)
    if not 2 <= b_out <= full:
        raise ValueError(f"b_out must be in 2..{full}")
    n2 = 2 * cfg.n + 1
    widths = [full] * (n2 - 1) + [b_out]
    if b_out == full:
        return widths
    if budget is None:
        dropped = full - b_out
        budget = (4.0 ** dropped / 12.0) * (cfg.r * cfg.m) ** cfg.n / cfg.r
    gains = _power_gains(cfg)

    def total_noise(ws: list) -> float:
        tot = 0.0
        prev = full
        for j in range(1, n2 + 1):
            w = ws[j - 1]
            if w < prev:
                tot += gains[j - 1] * 4.0 ** (full - w) / 12.0
            prev = w
        return tot

    while True:
        best = None
        best_noise = None
        for j in range(2, n2):  # stage 1 pinned at full, output pinned at b_out
            w = widths[j - 1]
            floor = max(widths[j], 2)
            if w - 1 < floor:
                continue
            cand = widths.copy()
            cand[j - 1] = w - 1
            noise = total_noise(cand)
            if noise <= budget and (best_noise is None or noise < best_noise):
                best, best_noise = cand, noise
        if best is None:
            return widths
        widths = best
