"""
Named channel families.

The binary constructions are
    - p: state 0 is noiseless, state 1 is a binary symmetric channel BSC(eps)
    - q_hat: both states are absorbing, independent of the input
    - q_lambda: stay with probability 1 - lambda, switch with probability lambda
    - q_k: q_lambda with lambda = 1 / (k + 1)

For larger alphabets the families are padded with zero probabilities so the
binary behavior is preserved: outputs y >= 2 and states s >= 2 are never reached
from the binary part. Padded rows still need to be distributions, so
    - p rows of padded inputs or padded states put mass 1 on y = 0
    - q rows of padded inputs copy the rows of x = 0 (input independence is kept)
    - q rows of padded states move to state 0
"""

from typing import Optional

import gmpy2
import numpy as np

from fsccap.channel.fsc import FscParams, make_fsc, parse_rational
from fsccap.utils import custom_logger
from fsccap.utils.exceptions import ParamRangeError

logger = custom_logger.setup_logging(__name__)

FAMILIES = ["p-qhat", "p-qlambda", "p-qk", "bsc"]


def _zeros(shape) -> np.ndarray:
    array = np.empty(shape, dtype=object)
    array.ravel()[:] = [gmpy2.mpq(0)] * array.size
    return array


def _check_alphabets(nx: int, ny: int, ns: int) -> None:
    if min(nx, ny, ns) < 2:  # noqa: PLR2004
        raise ParamRangeError(f"alphabet sizes must be at least 2, got {(nx, ny, ns)}")


def bsc_matrix(eps) -> np.ndarray:
    """Return the binary symmetric channel matrix with rows indexed by x."""
    eps = parse_rational(eps)
    if not 0 <= eps <= 1:
        raise ParamRangeError(f"crossover probability {eps} outside [0, 1]")
    return np.array([[1 - eps, eps], [eps, 1 - eps]], dtype=object)


def family_p(eps, nx: int = 2, ny: int = 2, ns: int = 2) -> np.ndarray:
    """
    Return the output tensor p: noiseless in state 0, BSC(eps) in state 1.

    Parameters
    ----------
    eps : rational
        crossover probability of the noisy state, 0 < eps < 1/2
    nx, ny, ns : int
        alphabet sizes, padded beyond the binary construction

    Returns
    -------
    p : np.ndarray
        object array indexed (y, x, s_prev)

    """
    eps = parse_rational(eps)
    if not 0 < eps < gmpy2.mpq(1, 2):
        raise ParamRangeError(f"eps must satisfy 0 < eps < 1/2, got {eps}")
    _check_alphabets(nx, ny, ns)
    p = _zeros((ny, nx, ns))
    for x in range(nx):
        for s in range(ns):
            if x < 2 and s == 0:  # noqa: PLR2004
                p[x, x, s] = gmpy2.mpq(1)
            elif x < 2 and s == 1:  # noqa: PLR2004
                p[x, x, s] = 1 - eps
                p[1 - x, x, s] = eps
            else:
                p[0, x, s] = gmpy2.mpq(1)
    return p


def family_bsc(eps, nx: int = 2, ny: int = 2, ns: int = 2) -> np.ndarray:
    """Return an output tensor that is BSC(eps) in every state."""
    _check_alphabets(nx, ny, ns)
    matrix = bsc_matrix(eps)
    p = _zeros((ny, nx, ns))
    for x in range(nx):
        for s in range(ns):
            if x < 2:  # noqa: PLR2004
                p[0:2, x, s] = matrix[x]
            else:
                p[0, x, s] = gmpy2.mpq(1)
    return p


def _two_state_transition(lam, nx: int, ns: int) -> np.ndarray:
    q = _zeros((ns, nx, ns))
    for x in range(nx):
        for s in range(ns):
            if s < 2:  # noqa: PLR2004
                q[s, x, s] = 1 - lam
                q[1 - s, x, s] = q[1 - s, x, s] + lam
            else:
                q[0, x, s] = gmpy2.mpq(1)
    return q


def family_qhat(nx: int = 2, ns: int = 2) -> np.ndarray:
    """Return the absorbing state tensor q_hat, independent of the input."""
    _check_alphabets(nx, 2, ns)
    return _two_state_transition(gmpy2.mpq(0), nx, ns)


def family_qlambda(lam, nx: int = 2, ns: int = 2) -> np.ndarray:
    """
    Return the state tensor q_lambda.

    Parameters
    ----------
    lam : rational
        switching probability, 0 <= lam <= 1/2; lam = 0 gives q_hat
    nx, ns : int
        alphabet sizes

    Returns
    -------
    q : np.ndarray
        object array indexed (s_next, x, s_prev)

    """
    lam = parse_rational(lam)
    if not 0 <= lam <= gmpy2.mpq(1, 2):
        raise ParamRangeError(f"lambda must satisfy 0 <= lambda <= 1/2, got {lam}")
    _check_alphabets(nx, 2, ns)
    return _two_state_transition(lam, nx, ns)


def family_qk(k: int, nx: int = 2, ns: int = 2) -> np.ndarray:
    """Return the state tensor q_k, which switches with probability 1/(k+1)."""
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise ParamRangeError(f"k must be a positive integer, got {k}")
    return family_qlambda(gmpy2.mpq(1, int(k) + 1), nx=nx, ns=ns)


def build_family(
    name: str,
    eps=None,
    lam=None,
    k: Optional[int] = None,
    nx: int = 2,
    ny: int = 2,
    ns: int = 2,
) -> FscParams:
    """
    Build a named family channel.

    Parameters
    ----------
    name : str
        one of
        - p-qhat: {p(eps), q_hat}
        - p-qlambda: {p(eps), q_lambda(lam)}
        - p-qk: {p(eps), q_k(k)}
        - bsc: BSC(eps) in every state with q_lambda(1/2) transitions
    eps, lam : rational, optional
        family parameters
    k : int, optional
        family parameter of p-qk
    nx, ny, ns : int
        alphabet sizes

    Returns
    -------
    fsc : FscParams
        the validated channel

    """
    if name not in FAMILIES:
        raise ParamRangeError(f"family must be one of {FAMILIES} and not `{name}`")
    if eps is None:
        raise ParamRangeError(f"family {name} needs eps")

    if name == "bsc":
        p = family_bsc(eps, nx=nx, ny=ny, ns=ns)
        q = family_qlambda(gmpy2.mpq(1, 2), nx=nx, ns=ns)
    else:
        p = family_p(eps, nx=nx, ny=ny, ns=ns)
        if name == "p-qhat":
            q = family_qhat(nx=nx, ns=ns)
        elif name == "p-qlambda":
            if lam is None:
                raise ParamRangeError("family p-qlambda needs lambda")
            q = family_qlambda(lam, nx=nx, ns=ns)
        else:
            if k is None:
                raise ParamRangeError("family p-qk needs k")
            q = family_qk(k, nx=nx, ns=ns)
    return make_fsc(nx, ny, ns, p, q)


def random_channel(
    rng: np.random.Generator,
    nx: int = 2,
    ny: int = 2,
    ns: int = 2,
    denominator: int = 8,
) -> FscParams:
    """
    Draw a random channel whose entries are multiples of 1/denominator.

    Parameters
    ----------
    rng : np.random.Generator
        the random generator
    nx, ny, ns : int
        alphabet sizes
    denominator : int
        common denominator of all entries

    Returns
    -------
    fsc : FscParams
        the validated channel

    """

    def rows(size, count):
        counts = rng.multinomial(denominator, [1 / size] * size, size=count)
        return [[gmpy2.mpq(int(c), denominator) for c in row] for row in counts]

    p = _zeros((ny, nx, ns))
    q = _zeros((ns, nx, ns))
    for x in range(nx):
        for s, (p_row, q_row) in enumerate(zip(rows(ny, ns), rows(ns, ns))):
            p[:, x, s] = p_row
            q[:, x, s] = q_row
    return make_fsc(nx, ny, ns, p, q)
