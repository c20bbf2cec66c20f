"""
Effective limits of monotone bracketing sequences.

Given a nondecreasing sequence lo(M) and a nonincreasing sequence hi(M) that
bracket a limit, the limit is known to N bits as soon as hi(M) - lo(M) drops below
2^-(N+2). The comparison is exact on rationals so it never stops too early.
"""

from dataclasses import dataclass
from typing import Callable

import gmpy2

from fsccap.channel.fsc import MPQ, format_rational, parse_rational
from fsccap.info.interval import MPFR
from fsccap.utils import custom_logger
from fsccap.utils.exceptions import MonotonicityViolationError, ParamRangeError

logger = custom_logger.setup_logging(__name__)


@dataclass(frozen=True)
class LimitResult:
    """
    Outcome of a limit extraction.

    Parameters
    ----------
    status : str
        "converged" when the bracket pinched below the threshold, "partial" when
        the stage budget ran out first
    lo, hi : mpq
        the last bracket
    stage : int
        the last stage that was evaluated
    gap : mpq
        hi - lo at that stage

    """

    status: str
    lo: MPQ
    hi: MPQ
    stage: int
    gap: MPQ

    @property
    def converged(self) -> bool:
        """Whether the bracket reached the requested width."""
        return self.status == "converged"

    def to_dict(self) -> dict:
        """Serialize with "a/b" strings."""
        return {
            "status": self.status,
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "stage": self.stage,
            "gap": format_rational(self.gap),
        }


def _exact(value) -> MPQ:
    if isinstance(value, (MPFR, float)):
        return gmpy2.mpq(value)
    return parse_rational(value)


def effective_limit(
    lo_seq: Callable[[int], object],
    hi_seq: Callable[[int], object],
    N: int,
    budget: int,
) -> LimitResult:
    """
    Extract a limit to N bits from a monotone bracketing pair.

    Parameters
    ----------
    lo_seq : callable
        stage M -> lower bound, nondecreasing in M
    hi_seq : callable
        stage M -> upper bound, nonincreasing in M
    N : int
        target bits, the returned bracket has width < 2^-N when converged
    budget : int
        largest stage to evaluate

    Returns
    -------
    result : LimitResult
        the converged bracket or the partial bracket at the budget

    """
    if N < 0 or budget < 0:
        raise ParamRangeError(f"N and budget must be nonnegative, got {N} and {budget}")
    threshold = gmpy2.mpq(1, 2 ** (N + 2))

    prev_lo, prev_hi = None, None
    for stage in range(budget + 1):
        lo, hi = _exact(lo_seq(stage)), _exact(hi_seq(stage))
        if lo > hi:
            raise MonotonicityViolationError(
                f"bounds crossed at stage {stage}: {float(lo)} > {float(hi)}"
            )
        if prev_lo is not None and lo < prev_lo:
            raise MonotonicityViolationError(f"lower sequence decreased at stage {stage}")
        if prev_hi is not None and hi > prev_hi:
            raise MonotonicityViolationError(f"upper sequence increased at stage {stage}")
        gap = hi - lo
        logger.debug(f"stage {stage}: gap {float(gap):.3e}")
        if gap < threshold:
            logger.info(f"bracket pinched below 2^-{N + 2} at stage {stage}")
            return LimitResult("converged", lo, hi, stage, gap)
        prev_lo, prev_hi = lo, hi

    logger.warning(f"stage budget {budget} exhausted with gap {float(gap):.6f}")
    return LimitResult("partial", lo, hi, budget, gap)
