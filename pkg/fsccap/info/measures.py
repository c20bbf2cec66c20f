"""
Information measures over exact rational distributions.

Distributions are exact (gmpy2.mpq) and every measure is returned as a
RealInterval enclosing the exact value. Sums run in index order, so results are
reproducible across runs and thread counts. 0 * log 0 is taken as 0.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import gmpy2
import numpy as np

from fsccap.channel.fsc import MPQ, format_rational, parse_rational
from fsccap.info.interval import RealInterval, down, log2_enclosure, up
from fsccap.utils import config_helper, custom_logger
from fsccap.utils.exceptions import (
    NotADistributionError,
    ParamRangeError,
    ShapeMismatchError,
)

logger = custom_logger.setup_logging(__name__)


def _precision(precision: Optional[int]) -> int:
    return config_helper.PRECISION_BITS if precision is None else int(precision)


def as_distribution(values: Sequence, name: str = "distribution") -> Tuple[MPQ, ...]:
    """
    Check that values form an exact probability vector.

    Parameters
    ----------
    values : sequence
        exact rationals
    name : str
        name used in error messages

    Returns
    -------
    dist : tuple of mpq
        the validated distribution

    """
    dist = tuple(parse_rational(v) for v in values)
    if not dist:
        raise NotADistributionError(f"{name} is empty")
    negative = [i for i, v in enumerate(dist) if v < 0]
    if negative:
        raise NotADistributionError(
            f"{name} has a negative entry at index {negative[0]}"
        )
    total = sum(dist, gmpy2.mpq(0))
    if total != 1:
        raise NotADistributionError(
            f"{name} sums to {format_rational(total)} instead of 1"
        )
    return dist


def check_stochastic(w: np.ndarray) -> np.ndarray:
    """Check that every row of a channel matrix is a distribution."""
    w = np.asarray(w, dtype=object)
    if w.ndim != 2:  # noqa: PLR2004
        raise ShapeMismatchError(f"channel matrix must be 2-d, got shape {w.shape}")
    for x in range(w.shape[0]):
        as_distribution(w[x], name=f"channel row {x}")
    return w


@dataclass(frozen=True)
class InputDistribution:
    """
    Exact distribution over input blocks X^n.

    Parameters
    ----------
    n : int
        block length
    weights : tuple of mpq
        probability of every input block, indexed by the block code

    """

    n: int
    weights: Tuple[MPQ, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ParamRangeError(f"block length must be at least 1, got {self.n}")
        object.__setattr__(self, "weights", as_distribution(self.weights, "input"))

    @property
    def size(self) -> int:
        """Number of input blocks."""
        return len(self.weights)

    @classmethod
    def uniform(cls, size: int, n: int = 1) -> "InputDistribution":
        """Return the uniform distribution over `size` input blocks."""
        return cls(n=n, weights=tuple([gmpy2.mpq(1, size)] * size))

    @classmethod
    def from_floats(
        cls, values, n: int = 1, positivity_bits: Optional[int] = None
    ) -> "InputDistribution":
        """
        Rationalize a float distribution with full support.

        Every weight is floored to a multiple of 2^-bits and one unit is added to
        every entry before normalizing, so the result is strictly positive and its
        denominators stay small.

        Parameters
        ----------
        values : array-like
            nonnegative floats, need not be normalized
        n : int
            block length
        positivity_bits : int, optional
            resolution in bits, defaults to the configured value

        Returns
        -------
        px : InputDistribution
            exact distribution close to `values`

        """
        bits = positivity_bits
        if bits is None:
            bits = config_helper.POSITIVITY_BITS
        values = np.clip(np.asarray(values, dtype=float), 0.0, None)
        total = values.sum()
        if not np.isfinite(total) or total <= 0:
            raise NotADistributionError("float weights must have a positive finite sum")
        counts = [int(c) + 1 for c in np.floor(values / total * 2.0**bits)]
        denominator = sum(counts)
        return cls(n=n, weights=tuple(gmpy2.mpq(c, denominator) for c in counts))

    def as_array(self) -> np.ndarray:
        """Return the weights as an object array."""
        return np.array(self.weights, dtype=object)

    def as_floats(self) -> np.ndarray:
        """Return the weights as floats."""
        return np.array([float(w) for w in self.weights])

    def to_dict(self) -> dict:
        """Serialize with "a/b" strings."""
        return {"n": self.n, "weights": [format_rational(w) for w in self.weights]}


def _neg_plogp(prob: MPQ, precision: int) -> Tuple:
    lo_log, hi_log = log2_enclosure(prob, precision)
    term = (-RealInterval(lo_log, hi_log, precision)).scale(prob)
    return term.lo, term.hi


def _sum_terms(terms, precision: int) -> RealInterval:
    lo = gmpy2.mpfr(0)
    hi = gmpy2.mpfr(0)
    for term_lo, term_hi in terms:
        with down(precision):
            lo = lo + term_lo
        with up(precision):
            hi = hi + term_hi
    return RealInterval(lo, hi, precision)


def entropy(dist: Sequence, precision: Optional[int] = None) -> RealInterval:
    """
    Enclose the entropy -sum p log2 p of an exact distribution.

    Parameters
    ----------
    dist : sequence
        exact rationals summing to one
    precision : int, optional
        working precision in bits

    Returns
    -------
    h : RealInterval
        enclosure of the entropy in bits

    """
    precision = _precision(precision)
    dist = as_distribution(dist)
    return _sum_terms(
        (_neg_plogp(p, precision) for p in dist if p > 0), precision
    ).clamp(floor=0)


def binary_entropy(x, precision: Optional[int] = None) -> RealInterval:
    """Enclose the binary entropy H2(x) = H((x, 1 - x))."""
    x = parse_rational(x)
    if not 0 <= x <= 1:
        raise ParamRangeError(f"binary entropy needs 0 <= x <= 1, got {x}")
    return entropy((x, 1 - x), precision=precision)


def relative_entropy(
    dist: Sequence, reference: Sequence, precision: Optional[int] = None
) -> RealInterval:
    """
    Enclose the divergence D(dist || reference) in bits.

    An entry with positive mass in `dist` and zero mass in `reference` makes the
    divergence infinite, which is returned as the interval [inf, inf].

    Parameters
    ----------
    dist : sequence
        exact distribution
    reference : sequence
        exact distribution of the same length
    precision : int, optional
        working precision in bits

    Returns
    -------
    d : RealInterval
        enclosure of the divergence

    """
    precision = _precision(precision)
    dist = as_distribution(dist)
    reference = as_distribution(reference, "reference")
    if len(dist) != len(reference):
        raise ShapeMismatchError(
            f"distributions have lengths {len(dist)} and {len(reference)}"
        )

    terms = []
    for p, r in zip(dist, reference):
        if p == 0:
            continue
        if r == 0:
            return RealInterval(gmpy2.inf(), gmpy2.inf(), precision)
        if p == r:
            continue
        log_ratio = RealInterval.log2(p, precision) - RealInterval.log2(r, precision)
        term = log_ratio.scale(p)
        terms.append((term.lo, term.hi))
    return _sum_terms(terms, precision).clamp(floor=0)


def _check_pair(px, w) -> Tuple[Tuple[MPQ, ...], np.ndarray]:
    if isinstance(px, InputDistribution):
        weights = px.weights
    else:
        weights = as_distribution(px, "input")
    w = check_stochastic(w)
    if len(weights) != w.shape[0]:
        raise ShapeMismatchError(
            f"input distribution has {len(weights)} entries but the channel has "
            f"{w.shape[0]} rows"
        )
    return weights, w


def output_distribution(px, w: np.ndarray) -> Tuple[MPQ, ...]:
    """Compute the exact output law r(y) = sum_x px(x) w(y|x)."""
    weights, w = _check_pair(px, w)
    return tuple(np.array(weights, dtype=object) @ w)


def conditional_entropy(
    px, w: np.ndarray, precision: Optional[int] = None
) -> RealInterval:
    """Enclose H(Y|X) = sum_x px(x) H(w(.|x))."""
    precision = _precision(precision)
    weights, w = _check_pair(px, w)
    total = RealInterval.exact(0, precision)
    for x, weight in enumerate(weights):
        if weight > 0:
            total = total + entropy(w[x], precision).scale(weight)
    return total


def mutual_information(
    px, w: np.ndarray, precision: Optional[int] = None
) -> RealInterval:
    """
    Enclose the mutual information I(X;Y) = H(Y) - H(Y|X) in bits.

    The output law is computed exactly before its entropy is taken.

    Parameters
    ----------
    px : InputDistribution or sequence
        exact input distribution
    w : np.ndarray
        exact channel matrix with rows indexed by the input
    precision : int, optional
        working precision in bits

    Returns
    -------
    mi : RealInterval
        enclosure of the mutual information

    """
    precision = _precision(precision)
    weights, w = _check_pair(px, w)
    output = tuple(np.array(weights, dtype=object) @ w)
    return entropy(output, precision) - conditional_entropy(weights, w, precision)
