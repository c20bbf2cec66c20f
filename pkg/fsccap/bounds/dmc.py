"""
Capacity of discrete memoryless channels.

The Blahut-Arimoto iteration runs in floats. Its final input distribution is then
rationalized and certified exactly:
    - lower: the mutual information at that input, a value that is attained
    - upper: the dual bound max_x D(W_x || r) for the induced output law r, which
      upper-bounds the capacity for any output law r
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import rel_entr

from fsccap.channel.fsc import MPQ
from fsccap.info.interval import RealInterval, interval_max
from fsccap.info.measures import (
    InputDistribution,
    as_distribution,
    check_stochastic,
    mutual_information,
    output_distribution,
    relative_entropy,
)
from fsccap.utils import config_helper, custom_logger
from fsccap.utils.exceptions import NonconvergenceError, ParamRangeError

logger = custom_logger.setup_logging(__name__)

LN2 = np.log(2.0)


@dataclass
class DmcCapacity:
    """
    Certified capacity bracket of a discrete memoryless channel.

    Parameters
    ----------
    lower : RealInterval
        mutual information at `px`
    upper : RealInterval
        dual bound at `output`
    px : InputDistribution
        the certified input distribution
    output : tuple of mpq
        the output law induced by `px`, the dual witness
    iterations : int
        Blahut-Arimoto iterations used
    history : list of float
        primal mutual information per iteration
    converged : bool
        whether the duality gap reached the tolerance

    """

    lower: RealInterval
    upper: RealInterval
    px: InputDistribution
    output: Tuple[MPQ, ...]
    iterations: int
    history: List[float] = field(default_factory=list)
    converged: bool = True

    def __iter__(self):
        yield self.lower
        yield self.upper
        yield self.px


def divergences(w: np.ndarray, r: np.ndarray) -> np.ndarray:
    """
    Return D(W_x || r) in bits for every row x of a float channel matrix.

    Only outputs with r(y) > 0 are summed. Rows that reach an output outside the
    support of r have zero input weight, so their value is finite but drops the
    infinite part and only serves as a search direction.
    """
    support = r > 0
    return rel_entr(w[:, support], r[None, support]).sum(axis=1) / LN2


def mutual_information_float(px: np.ndarray, w: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Float mutual information and its row divergences.

    Returns
    -------
    mi : float
        I(X;Y) in bits
    d : np.ndarray
        D(W_x || r) in bits, the supergradient of the mutual information up to
        a constant

    """
    r = px @ w
    d = divergences(w, r)
    return float(px @ d), d


def blahut_arimoto(
    w: np.ndarray, tol: float, max_iter: int
) -> Tuple[np.ndarray, int, List[float], bool]:
    """
    Run the Blahut-Arimoto iteration in floats.

    Parameters
    ----------
    w : np.ndarray
        float channel matrix with rows indexed by the input
    tol : float
        stop when max_x D(W_x || r) - I <= tol
    max_iter : int
        iteration budget

    Returns
    -------
    px : np.ndarray
        final input distribution
    iterations : int
        iterations used
    history : list of float
        mutual information per iteration
    converged : bool
        whether the duality gap reached `tol`

    """
    size = w.shape[0]
    px = np.full(size, 1.0 / size)
    history = []
    for iteration in range(1, max_iter + 1):
        mi, d = mutual_information_float(px, w)
        history.append(mi)
        if d.max() - mi <= tol:
            return px, iteration, history, True
        px = px * np.exp2(d - d.max())
        px = np.maximum(px, np.finfo(float).tiny)
        px = px / px.sum()
    return px, max_iter, history, False


def dual_upper_bound(
    w: np.ndarray, output: Tuple, precision: Optional[int] = None
) -> Tuple[RealInterval, int]:
    """
    Enclose max_x D(W_x || output), an upper bound of the capacity.

    Parameters
    ----------
    w : np.ndarray
        exact channel matrix
    output : sequence
        any exact output distribution
    precision : int, optional
        working precision in bits

    Returns
    -------
    bound : RealInterval
        enclosure of the dual bound
    x_star : int
        the maximizing row, lowest index on ties

    """
    output = as_distribution(output, "output")
    values = [relative_entropy(row, output, precision) for row in w]
    x_star = max(range(len(values)), key=lambda x: (values[x].hi, -x))
    return interval_max(values), x_star


def dmc_capacity(
    w: np.ndarray,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    precision: Optional[int] = None,
    n: int = 1,
) -> DmcCapacity:
    """
    Certify the capacity of a discrete memoryless channel.

    Parameters
    ----------
    w : np.ndarray
        exact channel matrix with rows indexed by the input
    tol : float, optional
        duality gap tolerance in bits
    max_iter : int, optional
        Blahut-Arimoto iteration budget
    precision : int, optional
        working precision in bits
    n : int
        block length the rows of `w` stand for, stored on the input distribution

    Returns
    -------
    result : DmcCapacity
        lower and upper enclosures with their witnesses

    Raises
    ------
    NonconvergenceError
        when the budget runs out, carrying the sound best-so-far result

    """
    tol = config_helper.TOL if tol is None else float(tol)
    max_iter = config_helper.BA_MAX_ITER if max_iter is None else int(max_iter)
    if tol <= 0:
        raise ParamRangeError(f"tol must be positive, got {tol}")
    w = check_stochastic(w)

    px_float, iterations, history, converged = blahut_arimoto(
        w.astype(float), tol, max_iter
    )
    px = InputDistribution.from_floats(px_float, n=n)
    output = output_distribution(px, w)
    lower = mutual_information(px, w, precision)
    upper, _ = dual_upper_bound(w, output, precision)
    result = DmcCapacity(
        lower=lower,
        upper=upper,
        px=px,
        output=output,
        iterations=iterations,
        history=history,
        converged=converged,
    )
    logger.debug(
        f"blahut-arimoto on {w.shape[0]}x{w.shape[1]} finished after "
        f"{iterations} iterations: {lower} <= C <= {upper}"
    )
    if not converged:
        logger.warning(
            f"blahut-arimoto did not reach tol={tol} within {max_iter} iterations"
        )
        raise NonconvergenceError(max_iter, result)
    return result
