"""Behavioral sigma-delta modulators and quantization-noise formulas.

The modulator is a real-valued model of the analog front end: a cascade of
unity-coefficient integrators around a midtread multi-bit quantizer.  The
first integrator delays its input, the rest do not; with the quantizer error
``e[n]`` recorded per sample the loop satisfies, exactly,

    order 1:  y[n] = x[n-1] + e[n] - e[n-1]
    order 2:  y[n] = x[n-1] + e[n] - 2 e[n-1] + e[n-2]
    order 3:  y[n] = x[n-1] + e[n] - 3 e[n-1] + 3 e[n-2] - e[n-3]

i.e. the quantization noise is shaped by ``(1 - z^-1)**order`` while the
signal only picks up one sample of delay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

INSTABILITY_FACTOR = 1e3  # |integrator| beyond this many full scales aborts


class InstabilityError(RuntimeError):
    """A modulator integrator diverged (bounded input cannot do this for
    orders 1-2; order 3 can overload if driven too hard)."""


@dataclass(frozen=True)
class SdmConfig:
    order: int
    quantizer_bits: int
    full_scale: float = 1.0
    sample_rate: float = 1.0

    def __post_init__(self) -> None:
        if self.order not in (1, 2, 3):
            raise ValueError("order must be 1, 2 or 3")
        if not 1 <= self.quantizer_bits <= 8:
            raise ValueError("quantizer_bits must be in 1..8")
        if self.full_scale <= 0:
            raise ValueError("full_scale must be positive")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def step(self) -> float:
        """Quantizer step: 2*full_scale spread over 2**bits - 1 levels."""
        return 2.0 * self.full_scale / ((1 << self.quantizer_bits) - 1)

    @property
    def max_code(self) -> int:
        return (1 << self.quantizer_bits - 1) - 1


@dataclass
class SdmState:
    integrators: list = field(default_factory=list)
    last_feedback: float = 0.0

    @classmethod
    def initial(cls, cfg: SdmConfig) -> "SdmState":
        return cls(integrators=[0.0] * cfg.order, last_feedback=0.0)


def quantize(v: float, cfg: SdmConfig) -> tuple:
    """Midtread uniform quantization: (code, reconstructed, error).

    Code 0 exists, so quantizing 0 returns exactly 0.  Inputs beyond
    ``full_scale`` clip silently to the end codes; unclipped error magnitude
    never exceeds step/2.
    """
    step = cfg.step
    code = math.floor(v / step + 0.5)
    mc = cfg.max_code
    if code > mc:
        code = mc
    elif code < -mc:
        code = -mc
    recon = code * step
    return code, recon, recon - v


def run_sdm(cfg: SdmConfig, xs: Iterable, state: SdmState | None = None) -> tuple:
    """Drive the modulator over ``xs``; returns (codes, errors).

    ``errors[n]`` is the quantizer error e[n] = reconstructed - quantizer
    input, the exact sequence appearing in the shaping identities above.
    Raises :class:`InstabilityError` if any integrator exceeds
    ``INSTABILITY_FACTOR * full_scale``.
    """
    if state is None:
        state = SdmState.initial(cfg)
    if len(state.integrators) != cfg.order:
        raise ValueError("state does not match modulator order")
    u = state.integrators
    step_limit = INSTABILITY_FACTOR * cfg.full_scale
    codes = []
    errors = []
    for n, x in enumerate(xs):
        code, y, e = quantize(u[-1], cfg)
        codes.append(code)
        errors.append(e)
        u[0] += x - y
        for k in range(1, cfg.order):
            u[k] += u[k - 1] - y
        if abs(u[-1]) > step_limit:
            raise InstabilityError(
                f"integrator magnitude {u[-1]:.3g} exceeds "
                f"{step_limit:.3g} at sample {n}"
            )
        state.last_feedback = y
    return codes, errors


def reconstruct(codes: Sequence, cfg: SdmConfig):
    """Map a code stream back to real amplitudes (code * step)."""
    step = cfg.step
    return [c * step for c in codes]


def clip_count(codes: Sequence, errors: Sequence, cfg: SdmConfig) -> int:
    """Samples where the quantizer saturated (error beyond half a step)."""
    half = cfg.step / 2 * (1 + 1e-12)
    return sum(1 for e in errors if abs(e) > half)


def snr_quantizer_db(bits: int) -> float:
    """Ideal full-scale-sine SNR of a plain B-bit quantizer."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    return 6.02 * bits + 1.76


def osr(sample_rate: float, bandwidth: float) -> float:
    """Oversampling ratio: sample rate over the Nyquist rate of the band."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    if sample_rate < 2 * bandwidth:
        raise ValueError("sample rate below Nyquist for this bandwidth")
    return sample_rate / (2.0 * bandwidth)


def inband_noise_power(e_sq: float, osr_ratio: float) -> float:
    """In-band share of white quantization noise under oversampling alone."""
    if osr_ratio < 1:
        raise ValueError("osr must be >= 1")
    return e_sq / osr_ratio


def noise_density(e_rms: float, sample_rate: float) -> float:
    """One-sided spectral density of white noise of rms ``e_rms`` sampled at
    ``sample_rate``; integrates back to e_rms**2 over [0, fs/2]."""
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    return e_rms * math.sqrt(2.0 / sample_rate)
