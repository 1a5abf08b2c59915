"""Two's-complement fixed-width integer words with wrapping arithmetic.

All bit-exact datapath simulation in this package runs on :class:`FixedWord`
values: an integer confined to a fixed bit width, wrapping modulo ``2**width``
on every operation, never saturating.  Values are kept in the signed range
``[-2**(width-1), 2**(width-1) - 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_WIDTH = 64


def _wrap(value: int, width: int) -> int:
    """Reduce an arbitrary integer into the signed range of ``width`` bits."""
    v = value & ((1 << width) - 1)
    if v >= 1 << (width - 1):
        v -= 1 << width
    return v


def _check_width(width: int) -> None:
    if not isinstance(width, int) or not 1 <= width <= MAX_WIDTH:
        raise ValueError(f"width must be an integer in 1..{MAX_WIDTH}, got {width!r}")


@dataclass(frozen=True)
class FixedWord:
    """A signed integer stored in exactly ``width`` bits.

    The constructor is strict: ``value`` must already lie in range.  Use
    :meth:`from_integer` to wrap an arbitrary integer into range.
    """

    value: int
    width: int

    def __post_init__(self) -> None:
        _check_width(self.width)
        lo = -(1 << self.width - 1)
        hi = (1 << self.width - 1) - 1
        if not lo <= self.value <= hi:
            raise ValueError(
                f"value {self.value} outside [{lo}, {hi}] for width {self.width}"
            )

    @classmethod
    def from_integer(cls, v: int, width: int) -> "FixedWord":
        """Build a word from any integer, reducing it modulo ``2**width``."""
        _check_width(width)
        return cls(_wrap(v, width), width)

    @property
    def unsigned(self) -> int:
        """The raw bit pattern as a non-negative integer."""
        return self.value & ((1 << self.width) - 1)

    def bits(self) -> str:
        return format(self.unsigned, f"0{self.width}b")

    def _require_same_width(self, other: "FixedWord") -> None:
        if self.width != other.width:
            raise ValueError(f"width mismatch: {self.width} vs {other.width}")

    def wrap_add(self, other: "FixedWord") -> "FixedWord":
        """Sum modulo ``2**width``; overflow wraps, it is never an error."""
        self._require_same_width(other)
        return FixedWord(_wrap(self.value + other.value, self.width), self.width)

    def wrap_sub(self, other: "FixedWord") -> "FixedWord":
        """Difference modulo ``2**width``."""
        self._require_same_width(other)
        return FixedWord(_wrap(self.value - other.value, self.width), self.width)

    def truncate_lsb(self, discard: int) -> "FixedWord":
        """Drop ``discard`` low bits, keeping the high ``width - discard``.

        This is an arithmetic right shift (floor division by ``2**discard``),
        matching hardware that simply leaves LSB wires unconnected.  The
        discarded remainder is ``value mod 2**discard``, always in
        ``[0, 2**discard)``.
        """
        if not 0 <= discard < self.width:
            raise ValueError(
                f"cannot discard {discard} bits from a {self.width}-bit word"
            )
        if discard == 0:
            return self
        return FixedWord(self.value >> discard, self.width - discard)

    def resize(self, new_width: int) -> "FixedWord":
        """Sign-extend when widening; keep the low bits when narrowing."""
        _check_width(new_width)
        if new_width >= self.width:
            return FixedWord(self.value, new_width)
        return FixedWord(_wrap(self.value, new_width), new_width)

    def __add__(self, other: "FixedWord") -> "FixedWord":
        return self.wrap_add(other)

    def __sub__(self, other: "FixedWord") -> "FixedWord":
        return self.wrap_sub(other)

    def __int__(self) -> int:
        return self.value
