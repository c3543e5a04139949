"""Floating values with a detached integer base-2 exponent.

Products of many small probabilities (``p**d`` raised over ``M`` rows, or
``M!`` times such terms) leave the double range long before they stop being
meaningful, so values are kept as ``sign * mantissa * 2**exponent`` with the
mantissa in ``[1, 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering

# beyond this exponent gap the smaller addend is below double resolution
_ALIGN_LIMIT = 64


@total_ordering
@dataclass(frozen=True)
class ScaledReal:
    sign: int
    mantissa: float
    exponent: int

    def __post_init__(self):
        if self.sign == 0:
            if self.mantissa != 0.0:
                raise ValueError("zero must have a zero mantissa")
        elif self.sign not in (-1, 1) or not 1.0 <= self.mantissa < 2.0:
            raise ValueError(f"unnormalised ScaledReal({self.sign}, {self.mantissa}, {self.exponent})")

    # -- construction ------------------------------------------------------

    @classmethod
    def zero(cls) -> "ScaledReal":
        return cls(0, 0.0, 0)

    @classmethod
    def one(cls) -> "ScaledReal":
        return cls(1, 1.0, 0)

    @classmethod
    def from_float(cls, x: float, exponent: int = 0) -> "ScaledReal":
        """``x * 2**exponent`` as a normalised value."""
        if x == 0.0:
            return cls.zero()
        if not math.isfinite(x):
            raise ValueError(f"cannot scale non-finite value {x}")
        f, e = math.frexp(abs(x))
        return cls(1 if x > 0 else -1, 2.0 * f, e - 1 + exponent)

    @classmethod
    def from_int(cls, k: int) -> "ScaledReal":
        if k == 0:
            return cls.zero()
        shift = max(abs(k).bit_length() - 60, 0)
        return cls.from_float(float(k >> shift if k > 0 else -((-k) >> shift)), shift)

    @classmethod
    def from_log2(cls, log2_value: float) -> "ScaledReal":
        e = math.floor(log2_value)
        return cls.from_float(2.0 ** (log2_value - e), e)

    @classmethod
    def coerce(cls, x) -> "ScaledReal":
        if isinstance(x, ScaledReal):
            return x
        if isinstance(x, int):
            return cls.from_int(x)
        return cls.from_float(float(x))

    # -- arithmetic --------------------------------------------------------

    def __mul__(self, other) -> "ScaledReal":
        other = ScaledReal.coerce(other)
        if self.sign == 0 or other.sign == 0:
            return ScaledReal.zero()
        return ScaledReal.from_float(
            self.sign * other.sign * self.mantissa * other.mantissa, self.exponent + other.exponent
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ScaledReal":
        other = ScaledReal.coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("ScaledReal division by zero")
        if self.sign == 0:
            return self
        return ScaledReal.from_float(
            self.sign * other.sign * self.mantissa / other.mantissa, self.exponent - other.exponent
        )

    def __add__(self, other) -> "ScaledReal":
        other = ScaledReal.coerce(other)
        if other.sign == 0:
            return self
        if self.sign == 0:
            return other
        big, small = (self, other) if self.exponent >= other.exponent else (other, self)
        gap = big.exponent - small.exponent
        if gap > _ALIGN_LIMIT:
            return big
        total = big.sign * big.mantissa + small.sign * math.ldexp(small.mantissa, -gap)
        return ScaledReal.from_float(total, big.exponent)

    __radd__ = __add__

    def __neg__(self) -> "ScaledReal":
        return ScaledReal(-self.sign, self.mantissa, self.exponent)

    def __sub__(self, other) -> "ScaledReal":
        return self + (-ScaledReal.coerce(other))

    def __rsub__(self, other) -> "ScaledReal":
        return ScaledReal.coerce(other) - self

    def __pow__(self, k: int) -> "ScaledReal":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = ScaledReal.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def ldexp(self, k: int) -> "ScaledReal":
        if self.sign == 0:
            return self
        return ScaledReal(self.sign, self.mantissa, self.exponent + k)

    # -- conversion / comparison --------------------------------------------

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.ldexp(self.mantissa, self.exponent)
        except OverflowError:
            return self.sign * math.inf

    def log2(self) -> float:
        if self.sign <= 0:
            raise ValueError("log2 of a non-positive value")
        return self.exponent + math.log2(self.mantissa)

    def __lt__(self, other) -> bool:
        other = ScaledReal.coerce(other)
        return (self - other).sign < 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, (ScaledReal, int, float)):
            return NotImplemented
        other = ScaledReal.coerce(other)
        return (self.sign, self.mantissa, self.exponent) == (other.sign, other.mantissa, other.exponent)

    def __hash__(self):
        return hash((self.sign, self.mantissa, self.exponent))

    def isclose(self, other, rel_tol: float = 1e-12, abs_tol: float = 0.0) -> bool:
        other = ScaledReal.coerce(other)
        diff = self - other
        if diff.sign == 0:
            return True
        if abs_tol and abs(float(diff)) <= abs_tol:
            return True
        scale = max(self.abs(), other.abs())
        if scale.sign == 0:
            return False
        return (diff.abs() / scale).exponent < -60 or float(diff.abs() / scale) <= rel_tol

    def abs(self) -> "ScaledReal":
        return ScaledReal(abs(self.sign), self.mantissa, self.exponent) if self.sign else self

    def __repr__(self) -> str:
        if self.sign == 0:
            return "ScaledReal(0)"
        return f"ScaledReal({self.sign * self.mantissa!r} * 2**{self.exponent})"

    def to_json(self) -> dict:
        return {
            "value": float(self),
            "log2": self.log2() if self.sign > 0 else None,
        }
