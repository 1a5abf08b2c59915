"""Linear-phase FIR machinery: half-band design, polyphase decimate-by-2,
and the inverse-sinc droop compensator for the CIC passband.

Half-bands are windowed-sinc designs with the cutoff pinned at a quarter of
the input rate, which makes every second tap around the center exactly zero
by construction (the zeros are written as literal 0.0, not tiny floats) and
the center exactly 0.5.  The droop compensator is a symmetric zero-phase
least-squares fit to the reciprocal of the normalized CIC magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cic import CicConfig


class FitError(RuntimeError):
    """A compensator fit missed its flatness target (order too low)."""


@dataclass(frozen=True)
class FirFilter:
    """Symmetric tap list with rate metadata."""

    taps: tuple
    input_rate: float
    decimation: int = 1

    def __post_init__(self) -> None:
        taps = tuple(float(t) for t in self.taps)
        object.__setattr__(self, "taps", taps)
        if not taps:
            raise ValueError("taps must be non-empty")
        if any(not math.isfinite(t) for t in taps):
            raise ValueError("taps must be finite")
        if any(a != b for a, b in zip(taps, reversed(taps))):
            raise ValueError("taps must be symmetric (linear phase)")
        if self.input_rate <= 0:
            raise ValueError("input_rate must be positive")
        if self.decimation < 1:
            raise ValueError("decimation must be >= 1")


@dataclass(frozen=True)
class HalfBandSpec:
    order: int            # tap count is order + 1
    input_rate: float
    f_pass: float

    def __post_init__(self) -> None:
        if self.order < 2 or self.order % 2:
            raise ValueError("order must be even and >= 2")
        if self.input_rate <= 0:
            raise ValueError("input_rate must be positive")
        if not 0 < self.f_pass < self.input_rate / 4:
            raise ValueError("f_pass must lie below a quarter of the input rate")

    @property
    def f_stop(self) -> float:
        """Stopband edge forced symmetric about a quarter of the rate."""
        return self.input_rate / 2 - self.f_pass


def _kaiser_beta(atten_db: float) -> float:
    if atten_db > 50:
        return 0.1102 * (atten_db - 8.7)
    if atten_db >= 21:
        return 0.5842 * (atten_db - 21) ** 0.4 + 0.07886 * (atten_db - 21)
    return 0.0


def design_halfband(spec: HalfBandSpec) -> FirFilter:
    """Kaiser-windowed half-band low-pass decimating by two.

    The window beta is picked from the attenuation the requested order can
    actually deliver across the spec's transition band, so longer filters
    automatically get deeper stopbands.  Wing taps are rescaled so the tap
    sum is exactly the 0 dB DC gain.
    """
    taps_n = spec.order + 1
    c = spec.order // 2
    trans = spec.f_stop - spec.f_pass
    atten = 2.285 * (2 * math.pi * trans / spec.input_rate) * spec.order + 7.95
    beta = _kaiser_beta(min(max(atten, 21.0), 120.0))
    window = np.kaiser(taps_n, beta)

    taps = [0.0] * taps_n
    taps[c] = 0.5
    for k in range(1, c + 1, 2):  # only odd offsets are nonzero
        ideal = math.sin(math.pi * k / 2) / (math.pi * k)
        taps[c + k] = taps[c - k] = ideal * window[c + k]
    wing_sum = sum(taps) - 0.5
    scale = 0.5 / wing_sum
    for k in range(1, c + 1, 2):
        taps[c + k] = taps[c - k] = taps[c + k] * scale
    return FirFilter(tuple(taps), spec.input_rate, decimation=2)


def is_halfband(f: FirFilter) -> bool:
    """Structural test: odd tap count, exact 0.5 center, zeros at every
    even nonzero offset from the center."""
    t = f.taps
    if len(t) % 2 == 0:
        return False
    c = len(t) // 2
    if t[c] != 0.5:
        return False
    return all(t[c + k] == 0.0 and t[c - k] == 0.0
               for k in range(2, c + 1, 2))


def apply_fir(f: FirFilter, xs: Sequence) -> np.ndarray:
    """Direct-form causal convolution, then keep every ``decimation``-th
    sample starting at index 0.  Output length is ceil(len/decimation)."""
    x = np.asarray(xs, dtype=float)
    y = np.convolve(x, np.asarray(f.taps))[: len(x)]
    return y[:: f.decimation]


def apply_decim2_polyphase(f: FirFilter, xs: Sequence) -> tuple:
    """Half-band decimate-by-2 exploiting the zero taps and symmetry.

    Returns (output, multiply_count).  Only the center tap and the unique
    wing coefficients are multiplied; symmetric wing samples are summed
    first, so the count comes to (1 + wings/2) per output sample instead of
    one per tap.
    """
    if f.decimation != 2:
        raise ValueError("filter must decimate by 2")
    if not is_halfband(f):
        raise ValueError("filter is not half-band")
    x = np.asarray(xs, dtype=float)
    t = f.taps
    c = len(t) // 2
    n_out = (len(x) + 1) // 2
    pad = np.concatenate([np.zeros(len(t) - 1), x])

    def window_at(shift: int) -> np.ndarray:
        # pad index of x[2k - c + shift] for k = 0..n_out-1
        start = len(t) - 1 - c + shift
        return pad[start: start + 2 * n_out: 2]

    y = 0.5 * window_at(0)
    wing_offsets = [k for k in range(1, c + 1, 2) if t[c + k] != 0.0]
    for k in wing_offsets:
        y = y + t[c + k] * (window_at(k) + window_at(-k))
    multiply_count = n_out * (1 + len(wing_offsets))
    return y, multiply_count


def _zero_phase_response(taps: Sequence, omega: np.ndarray) -> np.ndarray:
    """Real amplitude of a symmetric FIR (phase term removed)."""
    t = np.asarray(taps, dtype=float)
    c = (len(t) - 1) / 2.0
    k = np.arange(len(t))
    return np.cos(np.outer(omega, k - c)) @ t


def design_droop_compensator(order: int, cic_cfg: CicConfig, input_rate: float,
                             f_pass: float, cic_output_rate: float | None = None,
                             f_stop: float | None = None,
                             grid_points: int = 512,
                             flatness_db: float = 0.05) -> FirFilter:
    """Symmetric FIR whose passband magnitude approximates the reciprocal of
    the CIC droop, decimating by two.

    The fit is a discrete least squares of a zero-phase cosine expansion over
    ``grid_points`` frequencies in [0, f_pass] targeting the inverse droop;
    taps are normalized to exact unit DC gain afterwards.  Passing ``f_stop``
    appends a second block of grid points from there to the input Nyquist
    targeting zero, turning the corrector into a genuine low-pass that also
    rejects the band its own decimation folds onto the passband (the full
    chain uses this).

    ``cic_output_rate`` locates the CIC droop on the absolute frequency axis
    and defaults to twice ``input_rate`` (one halve-rate stage between the
    CIC and this filter).  Raises :class:`FitError` if the combined response
    deviates from flat by more than ``flatness_db`` anywhere in [0, f_pass].
    """
    from .analysis import cic_power_response_exact

    if order < 2 or order % 2:
        raise ValueError("order must be even and >= 2")
    if not 0 < f_pass < input_rate / 4:
        raise ValueError("f_pass must lie below a quarter of the input rate")
    low_rate = 2.0 * input_rate if cic_output_rate is None else float(cic_output_rate)

    freqs = np.linspace(0.0, f_pass, grid_points)
    p_norm = cic_power_response_exact(cic_cfg, freqs / low_rate, normalized=True)
    target = 1.0 / np.sqrt(p_norm)
    if f_stop is None:
        fit_freqs, fit_target = freqs, target
    else:
        if not f_pass < f_stop <= input_rate / 2:
            raise ValueError("need f_pass < f_stop <= input_rate/2")
        stop_freqs = np.linspace(f_stop, input_rate / 2, grid_points // 2)
        fit_freqs = np.concatenate([freqs, stop_freqs])
        fit_target = np.concatenate([target, np.zeros_like(stop_freqs)])

    omega = 2 * np.pi * fit_freqs / input_rate
    half = order // 2
    cols = [np.ones_like(omega)] + [2 * np.cos(m * omega) for m in range(1, half + 1)]
    design = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(design, fit_target, rcond=None)

    taps = np.zeros(order + 1)
    c = half
    taps[c] = coef[0]
    for m in range(1, half + 1):
        taps[c + m] = taps[c - m] = coef[m]
    taps /= taps.sum()

    pass_omega = 2 * np.pi * freqs / input_rate
    combined_db = 10 * np.log10(p_norm) + 20 * np.log10(
        np.abs(_zero_phase_response(taps, pass_omega)))
    worst = float(np.max(np.abs(combined_db)))
    if worst > flatness_db:
        raise FitError(
            f"combined response deviates {worst:.4f} dB from flat "
            f"(> {flatness_db} dB); raise the order"
        )
    return FirFilter(tuple(taps), input_rate, decimation=2)


def save_taps(f: FirFilter, path) -> None:
    """One coefficient per line, full round-trip precision."""
    with open(path, "w") as fh:
        for t in f.taps:
            fh.write(f"{t!r}\n")


def load_taps(path, input_rate: float, decimation: int = 1) -> FirFilter:
    with open(path) as fh:
        taps = [float(line) for line in fh if line.strip()]
    return FirFilter(tuple(taps), input_rate, decimation)
