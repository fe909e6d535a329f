"""Floating-point precision handling for m/z inputs.

Two emulation flavors share one type. Input-only mode quantizes the m/z
value through the target format (IEEE 754 round-to-nearest-even, which
is what numpy's astype does) and runs all arithmetic at binary64; this
is the default because the input quantization dominates downstream
error. Full emulation additionally rounds every primitive operation of
the embedding arithmetic to the target format by carrying numpy arrays
of that dtype through the computation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, NumericsError

_DTYPES = {16: np.float16, 32: np.float32, 64: np.float64}


@dataclass(frozen=True)
class PrecisionMode:
    """Target format (16/32/64 bits) and emulation sub-mode."""

    bits: int = 64
    full_emulation: bool = False

    def __post_init__(self):
        if self.bits not in _DTYPES:
            raise ConfigError(f"precision bits must be one of 16/32/64, got {self.bits}")

    @property
    def dtype(self):
        return _DTYPES[self.bits]

    @classmethod
    def from_string(cls, text: str) -> "PrecisionMode":
        """Parse '16', '32', '64', optionally suffixed ':full' for full emulation."""
        body, _, sub = text.partition(":")
        try:
            bits = int(body)
        except ValueError:
            raise ConfigError(f"bad precision {text!r}") from None
        if sub not in ("", "full", "input"):
            raise ConfigError(f"bad precision sub-mode {sub!r} in {text!r}")
        return cls(bits=bits, full_emulation=(sub == "full"))

    def __str__(self):
        return f"binary{self.bits}" + ("-full" if self.full_emulation else "")


BINARY16 = PrecisionMode(16)
BINARY32 = PrecisionMode(32)
BINARY64 = PrecisionMode(64)


def cast_mz(mz, mode: PrecisionMode):
    """Quantize m/z through the target format, returning binary64 values.

    Accepts a scalar or an array; the shape is preserved. Values finite
    in binary64 but overflowing the target format raise NumericsError
    (unreachable for valid m/z below 2000 Da).
    """
    arr = np.asarray(mz, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NumericsError("m/z values must be finite")
    with np.errstate(over="ignore"):
        cast = arr.astype(mode.dtype).astype(np.float64)
    if not np.all(np.isfinite(cast)):
        raise NumericsError(
            f"m/z overflows {mode}: max |value| {np.max(np.abs(arr))}"
        )
    return cast if arr.shape else float(cast)
