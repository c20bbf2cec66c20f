"""
Indecomposability diagnostics.

A channel is indecomposable when, for every eps > 0, there is an n0 such that for
all n >= n0

    |q^n(s_n | x^n, s0) - q^n(s_n | x^n, s0')| <= eps

for every s_n, x^n, s0 and s0'. A finite computation can only check one blocklength
at a time, so a passing report is evidence at blocklength n and not a proof.
"""

import itertools
from dataclasses import dataclass
from typing import List, Optional, Tuple

import gmpy2
import numpy as np

from fsccap.channel.fsc import (
    MPQ,
    FscParams,
    decode_sequence,
    format_rational,
    is_input_independent_transition,
    parse_rational,
    state_kernel,
)
from fsccap.utils import config_helper, custom_logger
from fsccap.utils.exceptions import BudgetError, ParamRangeError

logger = custom_logger.setup_logging(__name__)

KERNELS = ["transition", "marginal"]


@dataclass(frozen=True)
class IndecompReport:
    """
    Outcome of the indecomposability test at one blocklength.

    Parameters
    ----------
    n : int
        tested blocklength
    worst_gap : mpq
        max over s_n, x^n, s0, s0' of |q^n(s_n|x^n,s0) - q^n(s_n|x^n,s0')|
    eps : mpq
        the tolerance tested against
    passed : bool
        worst_gap <= eps
    argmax_witness : tuple
        (s_n, x_seq, s0, s0') attaining the worst gap
    input_independent : bool
        whether q ignores the input, in which case one input sequence was tested
    kernel : str
        how the state kernel was computed

    """

    n: int
    worst_gap: MPQ
    eps: MPQ
    passed: bool
    argmax_witness: Tuple[int, Tuple[int, ...], int, int]
    input_independent: bool
    kernel: str = "transition"

    @property
    def note(self) -> str:
        """How to read a passing test."""
        return f"evidence at blocklength {self.n}"

    def to_dict(self) -> dict:
        """Serialize with "a/b" strings."""
        s_n, x_seq, s0, s0_other = self.argmax_witness
        return {
            "n": self.n,
            "worst_gap": format_rational(self.worst_gap),
            "eps": format_rational(self.eps),
            "pass": self.passed,
            "argmax_witness": {
                "s_n": s_n,
                "x_seq": list(x_seq),
                "s0": s0,
                "s0_other": s0_other,
            },
            "input_independent": self.input_independent,
            "kernel": self.kernel,
            "note": self.note,
        }


def _input_sequences(
    fsc: FscParams, n: int, input_independent: bool, enumeration_cap: int
) -> List[Tuple[int, ...]]:
    if input_independent:
        return [(0,) * n]
    count = fsc.nx**n
    if count > enumeration_cap:
        raise BudgetError(
            f"{count} input sequences at n={n} exceed the enumeration cap "
            f"of {enumeration_cap}"
        )
    return [decode_sequence(code, fsc.nx, n) for code in range(count)]


def _transition_kernels(fsc: FscParams, x_seqs: List[Tuple[int, ...]]) -> np.ndarray:
    """
    Return K[i, s0, s_n] = q^n(s_n | x_seqs[i], s0) for every listed sequence.

    The sequences are either one representative or all sequences in code order;
    the latter are built level by level so prefixes share their products.
    """
    n = len(x_seqs[0])
    identity = np.array(
        [[gmpy2.mpq(int(i == j)) for j in range(fsc.ns)] for i in range(fsc.ns)],
        dtype=object,
    )
    if len(x_seqs) == 1:
        kernel = identity
        for x in x_seqs[0]:
            kernel = kernel @ fsc.q_slice(x)
        return kernel[None, :, :]

    kernels = identity[None, :, :]
    for _ in range(n):
        extended = [kernels @ fsc.q_slice(x) for x in range(fsc.nx)]
        kernels = np.stack(extended, axis=1).reshape(-1, fsc.ns, fsc.ns)
    return kernels


def _marginal_kernels(fsc: FscParams, x_seqs: List[Tuple[int, ...]]) -> np.ndarray:
    return np.array(
        [
            [state_kernel(fsc, x_seq, s0, kernel="marginal") for s0 in range(fsc.ns)]
            for x_seq in x_seqs
        ],
        dtype=object,
    )


def _worst_gap(
    fsc: FscParams, n: int, kernel: str, enumeration_cap: int
) -> Tuple[MPQ, Tuple[int, Tuple[int, ...], int, int], bool]:
    if kernel not in KERNELS:
        raise ValueError(f"kernel must be one of {KERNELS} and not `{kernel}`")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParamRangeError(f"blocklength must be a positive integer, got {n}")

    input_independent = is_input_independent_transition(fsc)
    x_seqs = _input_sequences(fsc, n, input_independent, enumeration_cap)
    if kernel == "transition":
        kernels = _transition_kernels(fsc, x_seqs)
    else:
        kernels = _marginal_kernels(fsc, x_seqs)

    worst, witness = gmpy2.mpq(-1), None
    for i, x_seq in enumerate(x_seqs):
        for s0, s0_other in itertools.combinations(range(fsc.ns), 2):
            for s_n in range(fsc.ns):
                gap = abs(kernels[i, s0, s_n] - kernels[i, s0_other, s_n])
                if gap > worst:
                    worst, witness = gap, (s_n, x_seq, s0, s0_other)
    return worst, witness, input_independent


def indecomposable_test(
    fsc: FscParams,
    n: int,
    eps,
    enumeration_cap: Optional[int] = None,
    kernel: str = "transition",
) -> IndecompReport:
    """
    Test the state kernel's dependence on the initial state at blocklength n.

    Parameters
    ----------
    fsc : FscParams
        the channel
    n : int
        blocklength
    eps : rational
        tolerance, 0 <= eps < 1
    enumeration_cap : int, optional
        largest number of input sequences to enumerate
    kernel : str
        "transition" multiplies the transition matrices, "marginal" sums the joint
        block law over the outputs

    Returns
    -------
    report : IndecompReport
        the worst gap, its witness and the verdict

    """
    eps = parse_rational(eps)
    if not 0 <= eps < 1:
        raise ParamRangeError(f"eps must satisfy 0 <= eps < 1, got {eps}")
    enumeration_cap = (
        config_helper.ENUMERATION_CAP if enumeration_cap is None else enumeration_cap
    )
    worst, witness, input_independent = _worst_gap(fsc, n, kernel, enumeration_cap)
    report = IndecompReport(
        n=n,
        worst_gap=worst,
        eps=eps,
        passed=worst <= eps,
        argmax_witness=witness,
        input_independent=input_independent,
        kernel=kernel,
    )
    logger.info(
        f"n={n}: worst gap {format_rational(worst)} "
        f"{'<=' if report.passed else '>'} eps {format_rational(eps)}"
    )
    return report


def geometric_gap_profile(
    fsc: FscParams,
    n_max: int,
    enumeration_cap: Optional[int] = None,
    kernel: str = "transition",
) -> List[Tuple[int, MPQ]]:
    """
    Return the worst gap for every blocklength 1..n_max.

    For an input-independent transition the profile cannot increase; an increase
    is logged as a warning.

    Parameters
    ----------
    fsc : FscParams
        the channel
    n_max : int
        largest blocklength
    enumeration_cap : int, optional
        largest number of input sequences to enumerate
    kernel : str
        see `indecomposable_test`

    Returns
    -------
    profile : list of (int, mpq)
        (n, worst_gap) pairs

    """
    if n_max < 1:
        raise ParamRangeError(f"n_max must be at least 1, got {n_max}")
    enumeration_cap = (
        config_helper.ENUMERATION_CAP if enumeration_cap is None else enumeration_cap
    )
    profile = []
    for n in range(1, n_max + 1):
        worst, _, input_independent = _worst_gap(fsc, n, kernel, enumeration_cap)
        if input_independent and profile and worst > profile[-1][1]:
            logger.warning(f"gap profile increased at n={n}")
        profile.append((n, worst))
    return profile
