"""
Experiment tables.

Two tables show how the capacity behaves near the decomposable channel
{p, q_hat}, whose states are absorbing:
    - the gap table follows q_lambda as lambda goes to 0 and shows the bracket
      of q_lambda against the persistent gap of q_hat = q_0
    - the discontinuity table follows q_k as k grows; the distance to q_hat is
      2 / (k + 1) while the brackets stay away from the q_hat bracket

The tables are plot-ready pandas DataFrames with rationals as "a/b" strings and
interval ends rounded outward.
"""

from typing import List, Optional, Sequence

import pandas as pd

from fsccap.bounds.bounds import BoundCache, BoundReport, sandwich
from fsccap.channel.families import build_family
from fsccap.channel.fsc import distance, format_rational, parse_rational
from fsccap.indecomp.indecomposability import indecomposable_test
from fsccap.info.interval import format_lower, format_upper
from fsccap.info.measures import binary_entropy
from fsccap.utils import custom_logger

logger = custom_logger.setup_logging(__name__)


def reports_frame(reports: Sequence[BoundReport]) -> pd.DataFrame:
    """Return one row per report with the sandwich CSV columns."""
    return pd.DataFrame([report.to_row() for report in reports])


def branch_capacities(eps) -> dict:
    """
    Return the capacities of the two single-state branches of {p(eps), q_hat}.

    The state 0 branch is noiseless with capacity 1 and the state 1 branch is
    BSC(eps) with capacity 1 - H2(eps). Their difference H2(eps) is the gap that
    never closes for q_hat.
    """
    noisy = 1 - binary_entropy(eps)
    return {
        "branch0_capacity": "1",
        "branch1_capacity_lo": format_lower(noisy.lo),
        "branch1_capacity_hi": format_upper(noisy.hi),
    }


def _bracket_columns(report: BoundReport) -> dict:
    return {
        "lower": format_lower(report.lower.value.lo),
        "upper": format_upper(report.upper.value.hi),
    }


def gap_table(
    eps,
    lambdas: List,
    M: int,
    n: int,
    tol: Optional[float] = None,
    precision: Optional[int] = None,
    threads: Optional[int] = None,
    cache: Optional[BoundCache] = None,
) -> pd.DataFrame:
    """
    Tabulate brackets of {p(eps), q_lambda} over a list of lambda.

    Parameters
    ----------
    eps : rational
        crossover probability of the noisy state
    lambdas : list of rational
        switching probabilities, 0 gives q_hat
    M : int
        sandwich stage
    n : int
        blocklength of the indecomposability test
    tol, precision, threads, cache
        passed to `sandwich`

    Returns
    -------
    table : pd.DataFrame
        columns lambda, indecomp_gap_at_n, lower, upper, gap_lo and the branch
        capacities of q_hat

    """
    branches = branch_capacities(eps)
    rows = []
    for lam in lambdas:
        lam = parse_rational(lam)
        fsc = build_family("p-qlambda", eps=eps, lam=lam)
        indecomp = indecomposable_test(fsc, n, eps=0)
        report = sandwich(
            fsc, M, tol=tol, precision=precision, threads=threads, cache=cache
        )
        logger.info(f"lambda={format_rational(lam)}: {report.bracket}")
        rows.append(
            {
                "lambda": format_rational(lam),
                "indecomp_gap_at_n": format_rational(indecomp.worst_gap),
                **_bracket_columns(report),
                "gap_lo": format_lower(report.gap.lo),
                **branches,
            }
        )
    return pd.DataFrame(rows)


def discontinuity_table(
    eps,
    ks: List[int],
    M: int,
    n: int,
    tol: Optional[float] = None,
    precision: Optional[int] = None,
    threads: Optional[int] = None,
    cache: Optional[BoundCache] = None,
) -> pd.DataFrame:
    """
    Tabulate brackets of {p(eps), q_k} over a list of k.

    The last row is the q_hat reference with k = "inf" and distance 0.

    Parameters
    ----------
    eps : rational
        crossover probability of the noisy state
    ks : list of int
        the k values, each at least 1
    M : int
        sandwich stage
    n : int
        blocklength of the indecomposability test
    tol, precision, threads, cache
        passed to `sandwich`

    Returns
    -------
    table : pd.DataFrame
        columns k, distance_to_qhat, indecomp_gap_at_n, lower, upper

    """
    if not ks:
        raise ValueError("the k list must not be empty")
    qhat = build_family("p-qhat", eps=eps)
    channels = [(str(k), build_family("p-qk", eps=eps, k=k)) for k in ks]
    channels.append(("inf", qhat))

    rows = []
    for label, fsc in channels:
        indecomp = indecomposable_test(fsc, n, eps=0)
        report = sandwich(
            fsc, M, tol=tol, precision=precision, threads=threads, cache=cache
        )
        logger.info(f"k={label}: {report.bracket}")
        rows.append(
            {
                "k": label,
                "distance_to_qhat": format_rational(distance(qhat, fsc, 0)),
                "indecomp_gap_at_n": format_rational(indecomp.worst_gap),
                **_bracket_columns(report),
            }
        )
    return pd.DataFrame(rows)
