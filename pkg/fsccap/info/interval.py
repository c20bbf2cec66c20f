"""
Real intervals with directed rounding.

Every lower endpoint is computed in a gmpy2 context rounding toward minus
infinity and every upper endpoint in a context rounding toward plus infinity, so
the exact value of the represented quantity always lies in [lo, hi]. Contexts are
thread-local in gmpy2 and the precision is an explicit argument, so there is no
global precision state.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Tuple

import gmpy2

from fsccap.utils import config_helper

MPFR = type(gmpy2.mpfr(0))


def down(precision: int):
    """Return a context rounding toward minus infinity."""
    return gmpy2.context(precision=precision, round=gmpy2.RoundDown)


def up(precision: int):
    """Return a context rounding toward plus infinity."""
    return gmpy2.context(precision=precision, round=gmpy2.RoundUp)


def to_lower(value, precision: int) -> MPFR:
    """Round a value down to a `precision`-bit float."""
    with down(precision):
        return gmpy2.mpfr(value)


def to_upper(value, precision: int) -> MPFR:
    """Round a value up to a `precision`-bit float."""
    with up(precision):
        return gmpy2.mpfr(value)


def format_lower(value, digits: int = 15) -> str:
    """Format a lower endpoint with decimal rounding toward minus infinity."""
    if not isinstance(value, MPFR):
        value = to_lower(value, config_helper.PRECISION_BITS)
    return format(value, f".{digits}Df")


def format_upper(value, digits: int = 15) -> str:
    """Format an upper endpoint with decimal rounding toward plus infinity."""
    if not isinstance(value, MPFR):
        value = to_upper(value, config_helper.PRECISION_BITS)
    return format(value, f".{digits}Uf")


@lru_cache(maxsize=1 << 16)
def log2_enclosure(value, precision: int) -> Tuple[MPFR, MPFR]:
    """
    Enclose log2 of a positive rational.

    Parameters
    ----------
    value : mpq
        a positive rational
    precision : int
        working precision in bits

    Returns
    -------
    (lo, hi) : tuple of mpfr
        lo <= log2(value) <= hi

    """
    with down(precision):
        lo = gmpy2.log2(gmpy2.mpfr(value))
    with up(precision):
        hi = gmpy2.log2(gmpy2.mpfr(value))
    return lo, hi


@dataclass(frozen=True)
class RealInterval:
    """
    Directed-rounded enclosure [lo, hi] of a real quantity.

    Parameters
    ----------
    lo : mpfr
        lower endpoint, rounded down
    hi : mpfr
        upper endpoint, rounded up
    precision : int
        working precision in bits

    """

    lo: MPFR
    hi: MPFR
    precision: int = 64

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints are reversed: [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, value, precision: Optional[int] = None) -> "RealInterval":
        """Enclose an exact value (rational, integer or float)."""
        precision = config_helper.PRECISION_BITS if precision is None else precision
        return cls(to_lower(value, precision), to_upper(value, precision), precision)

    @classmethod
    def from_bounds(cls, lo, hi, precision: Optional[int] = None) -> "RealInterval":
        """Build an interval from exact bounds, rounding outward."""
        precision = config_helper.PRECISION_BITS if precision is None else precision
        return cls(to_lower(lo, precision), to_upper(hi, precision), precision)

    @classmethod
    def log2(cls, value, precision: Optional[int] = None) -> "RealInterval":
        """Enclose log2 of a positive rational."""
        precision = config_helper.PRECISION_BITS if precision is None else precision
        lo, hi = log2_enclosure(gmpy2.mpq(value), precision)
        return cls(lo, hi, precision)

    def _coerce(self, other) -> "RealInterval":
        if isinstance(other, RealInterval):
            return other
        return RealInterval.exact(other, self.precision)

    def __add__(self, other) -> "RealInterval":
        other = self._coerce(other)
        with down(self.precision):
            lo = self.lo + other.lo
        with up(self.precision):
            hi = self.hi + other.hi
        return RealInterval(lo, hi, self.precision)

    __radd__ = __add__

    def __sub__(self, other) -> "RealInterval":
        other = self._coerce(other)
        with down(self.precision):
            lo = self.lo - other.hi
        with up(self.precision):
            hi = self.hi - other.lo
        return RealInterval(lo, hi, self.precision)

    def __rsub__(self, other) -> "RealInterval":
        return self._coerce(other) - self

    def __neg__(self) -> "RealInterval":
        with down(self.precision):
            lo = -self.hi
        with up(self.precision):
            hi = -self.lo
        return RealInterval(lo, hi, self.precision)

    def scale(self, factor) -> "RealInterval":
        """Multiply by an exact rational factor."""
        factor = gmpy2.mpq(factor)
        if factor < 0:
            return (-self).scale(-factor)
        factor_lo = to_lower(factor, self.precision)
        factor_hi = to_upper(factor, self.precision)
        # the endpoint sign picks which end of the factor enclosure is outward
        with down(self.precision):
            lo = self.lo * (factor_lo if self.lo >= 0 else factor_hi)
        with up(self.precision):
            hi = self.hi * (factor_hi if self.hi >= 0 else factor_lo)
        return RealInterval(lo, hi, self.precision)

    def __truediv__(self, divisor) -> "RealInterval":
        return self.scale(1 / gmpy2.mpq(divisor))

    @property
    def width(self) -> MPFR:
        """Width of the interval, rounded up."""
        with up(self.precision):
            return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        """Midpoint as a float, for display."""
        return float((self.lo + self.hi) / 2)

    def contains(self, value) -> bool:
        """Check whether an exact value lies in the interval."""
        if isinstance(value, RealInterval):
            return self.lo <= value.lo and value.hi <= self.hi
        if isinstance(value, float):
            value = gmpy2.mpfr(value, 53)
        return self.lo <= value <= self.hi

    def clamp(self, floor=None, cap=None) -> "RealInterval":
        """Clamp both endpoints to [floor, cap]."""
        lo, hi = self.lo, self.hi
        if floor is not None:
            floor = to_lower(floor, self.precision)
            lo, hi = max(lo, floor), max(hi, floor)
        if cap is not None:
            cap = to_upper(cap, self.precision)
            lo, hi = min(lo, cap), min(hi, cap)
        return RealInterval(lo, hi, self.precision)

    def to_dict(self) -> dict:
        """Serialize with outward decimal rounding."""
        return {
            "lo": format_lower(self.lo),
            "hi": format_upper(self.hi),
            "precision": self.precision,
        }

    def __repr__(self):
        return f"[{format_lower(self.lo)}, {format_upper(self.hi)}]"


def interval_max(intervals: Iterable[RealInterval]) -> RealInterval:
    """Enclose the maximum of the enclosed values."""
    intervals = list(intervals)
    return RealInterval(
        max(iv.lo for iv in intervals),
        max(iv.hi for iv in intervals),
        intervals[0].precision,
    )


def interval_min(intervals: Iterable[RealInterval]) -> RealInterval:
    """Enclose the minimum of the enclosed values."""
    intervals = list(intervals)
    return RealInterval(
        min(iv.lo for iv in intervals),
        min(iv.hi for iv in intervals),
        intervals[0].precision,
    )
