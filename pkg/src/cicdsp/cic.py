"""Hogenauer cascaded integrator-comb decimation and interpolation.

The decimator runs N integrators at the input rate, keeps one sample in R,
then runs N differentiators (combs) at the low rate.  All registers wrap
modulo their configured width; as long as every stage is at least
``register_width`` bits wide the wrapping is harmless and the output is
bit-identical to unbounded-integer arithmetic.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .fixword import MAX_WIDTH, FixedWord


@dataclass(frozen=True)
class CicConfig:
    """Filter order ``n``, decimation ratio ``r``, differential delay ``m``,
    input width ``b_in``, and optional per-stage register widths.

    ``stage_widths``, when given, lists 2n+1 widths: the n integrators, the
    n combs, and the output register.  They must be non-increasing and start
    at the full ``register_width``.
    """

    n: int
    r: int
    m: int = 1
    b_in: int = 16
    stage_widths: tuple | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 1 <= self.b_in <= MAX_WIDTH:
            raise ValueError(f"b_in must be in 1..{MAX_WIDTH}")
        if self.stage_widths is not None:
            widths = tuple(int(w) for w in self.stage_widths)
            object.__setattr__(self, "stage_widths", widths)
            if len(widths) != 2 * self.n + 1:
                raise ValueError(f"stage_widths must have {2 * self.n + 1} entries")
            full = register_width(self)
            if widths[0] != full:
                raise ValueError(f"first stage width must be {full}")
            if any(w2 > w1 for w1, w2 in zip(widths, widths[1:])):
                raise ValueError("stage widths must be non-increasing")
            if any(not 2 <= w <= MAX_WIDTH for w in widths):
                raise ValueError(f"stage widths must be in 2..{MAX_WIDTH}")

    def widths(self) -> tuple:
        """Stage widths in effect (all equal to register_width when unset)."""
        if self.stage_widths is not None:
            return self.stage_widths
        return (register_width(self),) * (2 * self.n + 1)


def max_growth(cfg: CicConfig) -> tuple:
    """Worst-case internal magnitude gain ``(RM)**N`` and its value in dB."""
    gain = (cfg.r * cfg.m) ** cfg.n
    return gain, 20.0 * math.log10(gain)


def register_msb_index(cfg: CicConfig) -> int:
    """Index of the most significant bit any stage can reach.

    Equals ``ceil(N*log2(RM) + B_in - 1)``; the log term is evaluated as the
    exact ceiling of ``log2((RM)**N)`` so no float rounding can creep in.
    """
    growth = (cfg.r * cfg.m) ** cfg.n
    return (growth - 1).bit_length() + cfg.b_in - 1


def register_width(cfg: CicConfig) -> int:
    """Register width that never loses data: MSB index + 1 (bits count from 0)."""
    return register_msb_index(cfg) + 1


def recommend_order(modulator_order: int) -> int:
    """CIC order needed behind a noise-shaping modulator of the given order."""
    if modulator_order < 1:
        raise ValueError("modulator order must be >= 1")
    return modulator_order + 1


def impulse_coefficients(cfg: CicConfig) -> list:
    """Integer taps of the equivalent FIR: the N-fold self-convolution of
    RM ones.  All taps are positive and the list is palindromic."""
    ones = [1] * (cfg.r * cfg.m)
    taps = [1]
    for _ in range(cfg.n):
        taps = _convolve_int(taps, ones)
    return taps


def _convolve_int(a: Sequence[int], b: Sequence[int]) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def downsample(xs: Sequence, r: int, phase: int = 0) -> list:
    """Keep ``xs[phase], xs[phase+r], ...``."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if not 0 <= phase < r:
        raise ValueError(f"phase must be in 0..{r - 1}")
    return list(xs[phase::r])


def upsample(xs: Sequence, r: int) -> list:
    """Insert r-1 zeros after every sample."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if r == 1:
        return list(xs)
    out = []
    for x in xs:
        out.append(x)
        out.extend([0] * (r - 1))
    return out


class CicDecimator:
    """Streaming bit-exact decimator; single-owner mutable state.

    ``push`` consumes one input sample and returns one output word every R
    inputs (None otherwise).  With ``pipelined=True`` the integrators use the
    relocated-feedback-register scheme (each stage's output lags one input
    clock) and one register follows each comb subtractor; the output stream
    then equals the plain decimator's delayed by :attr:`latency` output
    samples.
    """

    def __init__(self, cfg: CicConfig, pipelined: bool = False):
        self.cfg = cfg
        self.pipelined = pipelined
        w = cfg.widths()
        self._iw = w[: cfg.n]
        self._cw = w[cfg.n: 2 * cfg.n]
        self._ow = w[2 * cfg.n]
        self._integ = [FixedWord(0, wi) for wi in self._iw]
        self._combs = [deque([FixedWord(0, wc)] * cfg.m, maxlen=cfg.m)
                       for wc in self._cw]
        self._comb_regs = [FixedWord(0, wc) for wc in self._cw] if pipelined else None
        self._count = 0
        # with pipelined integrators the value reaching the downsampler lags
        # n input clocks, so the kept phase shifts by n
        self._keep_offset = cfg.n % cfg.r if pipelined else 0

    @property
    def latency(self) -> int:
        """Delay versus the non-pipelined decimator, in output samples."""
        if not self.pipelined:
            return 0
        return self.cfg.n + self.cfg.n // self.cfg.r

    def push(self, x) -> FixedWord | None:
        cfg = self.cfg
        if isinstance(x, FixedWord):
            if x.width != cfg.b_in:
                raise ValueError(f"input width {x.width} != b_in {cfg.b_in}")
            word = x
        else:
            v = int(x)
            lo, hi = -(1 << cfg.b_in - 1), (1 << cfg.b_in - 1) - 1
            if not lo <= v <= hi:
                raise ValueError(f"sample {v} does not fit in {cfg.b_in} bits")
            word = FixedWord(v, cfg.b_in)

        v = word.resize(self._iw[0])
        for i in range(cfg.n):
            if i > 0:
                v = v.truncate_lsb(v.width - self._iw[i])
            if self.pipelined:
                out = self._integ[i]          # register moved after the adder
                self._integ[i] = self._integ[i].wrap_add(v)
                v = out
            else:
                self._integ[i] = self._integ[i].wrap_add(v)
                v = self._integ[i]

        keep = self._count % cfg.r == self._keep_offset
        self._count += 1
        if not keep:
            return None

        for i in range(cfg.n):
            v = v.truncate_lsb(v.width - self._cw[i])
            delayed = self._combs[i][0]
            self._combs[i].append(v)
            y = v.wrap_sub(delayed)
            if self.pipelined:
                out = self._comb_regs[i]
                self._comb_regs[i] = y
                y = out
            v = y
        return v.truncate_lsb(v.width - self._ow)

    def process(self, xs: Iterable) -> list:
        out = []
        for x in xs:
            y = self.push(x)
            if y is not None:
                out.append(y)
        return out


def decimate(cfg: CicConfig, xs: Iterable, pipelined: bool = False) -> list:
    """Run a fresh decimator over ``xs`` and return the output words."""
    return CicDecimator(cfg, pipelined=pipelined).process(xs)


def decimate_ints(cfg: CicConfig, xs: Sequence) -> list:
    """Reference decimator over unbounded Python integers (no wrapping)."""
    n, r, m = cfg.n, cfg.r, cfg.m
    integ = [0] * n
    combs = [deque([0] * m, maxlen=m) for _ in range(n)]
    out = []
    for count, x in enumerate(xs):
        v = int(x)
        for i in range(n):
            integ[i] += v
            v = integ[i]
        if count % r == 0:
            for i in range(n):
                delayed = combs[i][0]
                combs[i].append(v)
                v = v - delayed
            out.append(v)
    return out


def decimate_array(cfg: CicConfig, xs: np.ndarray) -> np.ndarray:
    """Vectorized equivalent of :func:`decimate` for long signals.

    Each integrator is a cumulative sum wrapped into its stage width, each
    comb a lagged difference at the low rate; results are bit-identical to
    the streaming decimator.  Falls back to object (big-int) arithmetic when
    an int64 cumulative sum could overflow.
    """
    xs = np.asarray(xs)
    widths = cfg.widths()
    n = cfg.n
    # headroom: |values| < 2^(w-1), summed len(xs) times
    top = widths[0] - 1 + int(np.ceil(np.log2(max(len(xs), 2))))
    dtype = np.int64 if top <= 62 else object
    v = xs.astype(dtype) if dtype is np.int64 else np.array([int(x) for x in xs],
                                                            dtype=object)
    if np.any(v > (1 << cfg.b_in - 1) - 1) or np.any(v < -(1 << cfg.b_in - 1)):
        raise ValueError(f"samples do not fit in {cfg.b_in} bits")
    prev_w = widths[0]
    for i in range(n):
        v = v >> (prev_w - widths[i]) if i > 0 else v
        v = _wrap_array(np.cumsum(v), widths[i])
        prev_w = widths[i]
    v = v[:: cfg.r]
    for i in range(n):
        w = widths[n + i]
        v = v >> (prev_w - w)
        lag = np.zeros(len(v), dtype=v.dtype)
        if len(v) > cfg.m:
            lag[cfg.m:] = v[: -cfg.m]
        v = _wrap_array(v - lag, w)
        prev_w = w
    v = v >> (prev_w - widths[2 * n])
    return v


def _wrap_array(v: np.ndarray, width: int) -> np.ndarray:
    half = 1 << (width - 1)
    if v.dtype == object:
        return np.array([((int(x) + half) % (1 << width)) - half for x in v],
                        dtype=object)
    return ((v + half) & ((1 << width) - 1)) - half


def decimate_nonrecursive(cfg: CicConfig, xs: Sequence) -> list:
    """Comb-only decimator: S stages of ``(1+z^-1)**N`` then keep-every-2nd,
    for R = 2**S.  Output matches :func:`decimate` sample for sample."""
    if cfg.m != 1:
        raise ValueError("non-recursive form requires m == 1")
    s = cfg.r.bit_length() - 1
    if 1 << s != cfg.r or s < 1:
        raise ValueError("non-recursive form requires r to be a power of 2, >= 2")
    binom = [math.comb(cfg.n, k) for k in range(cfg.n + 1)]
    v = [int(x) for x in xs]
    for _ in range(s):
        acc = [0] * len(v)
        for k, coeff in enumerate(binom):
            for idx in range(k, len(v)):
                acc[idx] += coeff * v[idx - k]
        v = acc[::2]
    return v


class CicInterpolator:
    """Streaming interpolator: N combs at the low rate, zero-stuffing by R,
    N integrators at the high rate.  Emits R outputs per input."""

    def __init__(self, cfg: CicConfig):
        self.cfg = cfg
        self._combs = [deque([0] * cfg.m, maxlen=cfg.m) for _ in range(cfg.n)]
        self._integ = [0] * cfg.n

    def push(self, x) -> list:
        v = int(x)
        for i in range(self.cfg.n):
            delayed = self._combs[i][0]
            self._combs[i].append(v)
            v = v - delayed
        out = []
        for k in range(self.cfg.r):
            u = v if k == 0 else 0
            for i in range(self.cfg.n):
                self._integ[i] += u
                u = self._integ[i]
            out.append(u)
        return out

    def process(self, xs: Iterable) -> list:
        out = []
        for x in xs:
            out.extend(self.push(x))
        return out


def interpolate(cfg: CicConfig, xs: Iterable) -> list:
    return CicInterpolator(cfg).process(xs)
