"""
Finite state channels.

A finite state channel (FSC) is given by the pair {p, q} where the one-step law
factors as

    p(y_n, s_n | x_n, s_{n-1}) = p(y_n | x_n, s_{n-1}) * q(s_n | x_n, s_{n-1})

The tensors are stored as numpy object arrays of exact rationals (gmpy2.mpq):
    - p is indexed (y, x, s_prev)
    - q is indexed (s_next, x, s_prev)

Sequences are encoded as base-|X| / base-|Y| integers with the first symbol most
significant, so block tables are dense arrays indexed by the sequence code.
Logarithms are base 2 throughout the package.
"""

import hashlib
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Sequence, Tuple, Union

import gmpy2
import numpy as np

from fsccap.utils import config_helper, custom_logger
from fsccap.utils.exceptions import (
    BudgetError,
    NegativeEntryError,
    ParamRangeError,
    RationalParseError,
    RowSumError,
    ShapeError,
    ShapeMismatchError,
)

logger = custom_logger.setup_logging(__name__)

MPQ = type(gmpy2.mpq(0))
MPZ = type(gmpy2.mpz(0))
_RATIONAL_PATTERN = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


def parse_rational(value) -> MPQ:
    """
    Parse a value as an exact rational.

    Floats are refused so that channel entries are never rounded on the way in.

    Parameters
    ----------
    value : str, int, Fraction or mpq
        the value, strings are written as "a/b" or "a"

    Returns
    -------
    rational : mpq
        the exact rational

    """
    if isinstance(value, bool):
        raise RationalParseError(f"`{value}` is a boolean, not a rational")
    if isinstance(value, MPQ):
        return value
    if isinstance(value, (int, MPZ)):
        return gmpy2.mpq(value)
    if isinstance(value, Fraction):
        return gmpy2.mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        match = _RATIONAL_PATTERN.match(value)
        if match:
            numerator, denominator = match.groups()
            denominator = int(denominator) if denominator else 1
            if denominator == 0:
                raise RationalParseError(f"`{value}` has a zero denominator")
            return gmpy2.mpq(int(numerator), denominator)
    raise RationalParseError(
        f"`{value!r}` is not an exact rational, write it as an 'a/b' string"
    )


def format_rational(value) -> str:
    """Format a rational as an "a/b" string."""
    value = parse_rational(value)
    return f"{value.numerator}/{value.denominator}"


def as_rational_array(values, shape=None) -> np.ndarray:
    """
    Convert nested values into an object array of exact rationals.

    Parameters
    ----------
    values : array-like
        nested lists or arrays of rationals
    shape : tuple, optional
        the expected shape

    Returns
    -------
    array : np.ndarray
        object array of mpq

    """
    raw = np.asarray(values, dtype=object)
    if shape is not None and raw.shape != tuple(shape):
        raise ShapeError(f"expected shape {tuple(shape)} but got {raw.shape}")
    flat = [parse_rational(v) for v in raw.ravel()]
    array = np.empty(raw.shape, dtype=object)
    array.ravel()[:] = flat
    return array


def encode_sequence(seq: Sequence[int], base: int) -> int:
    """Encode a sequence as a base-`base` integer, first symbol most significant."""
    code = 0
    for symbol in seq:
        code = code * base + int(symbol)
    return code


def decode_sequence(code: int, base: int, n: int) -> Tuple[int, ...]:
    """Decode a base-`base` integer into a sequence of length `n`."""
    symbols = []
    for _ in range(n):
        code, symbol = divmod(code, base)
        symbols.append(symbol)
    return tuple(reversed(symbols))


@dataclass(frozen=True, eq=False)
class FscParams:
    """
    The parameters {p, q} of a finite state channel.

    Parameters
    ----------
    nx : int
        input alphabet size |X|
    ny : int
        output alphabet size |Y|
    ns : int
        state count |S|
    p : np.ndarray
        object array (ny, nx, ns) holding p(y | x, s_prev)
    q : np.ndarray
        object array (ns, nx, ns) holding q(s_next | x, s_prev)

    """

    nx: int
    ny: int
    ns: int
    p: np.ndarray
    q: np.ndarray

    def p_slice(self, s_prev: int) -> np.ndarray:
        """Return the DMC matrix p(y | x, s_prev) with rows indexed by x."""
        return self.p[:, :, s_prev].T

    def q_slice(self, x: int) -> np.ndarray:
        """Return the state transition matrix Q_x[s_prev, s_next]."""
        return self.q[:, x, :].T

    def to_dict(self) -> dict:
        """Serialize to the channel JSON layout with "a/b" strings."""
        return {
            "nx": self.nx,
            "ny": self.ny,
            "ns": self.ns,
            "p": _nested_strings(self.p),
            "q": _nested_strings(self.q),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FscParams":
        """Build validated parameters from the channel JSON layout."""
        missing = [key for key in ["nx", "ny", "ns", "p", "q"] if key not in data]
        if missing:
            raise ShapeError(f"channel file is missing the keys {missing}")
        return make_fsc(data["nx"], data["ny"], data["ns"], data["p"], data["q"])

    def digest(self) -> str:
        """Return the sha256 of the canonical serialization."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def __eq__(self, other):
        if not isinstance(other, FscParams):
            return NotImplemented
        return (
            (self.nx, self.ny, self.ns) == (other.nx, other.ny, other.ns)
            and np.array_equal(self.p, other.p)
            and np.array_equal(self.q, other.q)
        )

    def __hash__(self):
        return hash(self.digest())


@dataclass(frozen=True, eq=False)
class JointBlockLaw:
    """
    The block law p^n(y^n, s_n | x^n, s_0).

    `table[y_code, s_n]` holds the probability of the output sequence with code
    `y_code` together with the final state `s_n`.
    """

    n: int
    x_seq: Tuple[int, ...]
    s0: int
    ny: int
    table: np.ndarray

    def as_dict(self) -> Dict[Tuple[Tuple[int, ...], int], MPQ]:
        """Return the table keyed by (y_seq, s_n)."""
        return {
            (decode_sequence(y_code, self.ny, self.n), s_n): self.table[y_code, s_n]
            for y_code in range(self.table.shape[0])
            for s_n in range(self.table.shape[1])
        }

    def total(self) -> MPQ:
        """Return the exact total mass."""
        return sum(self.table.ravel(), gmpy2.mpq(0))


def _nested_strings(array) -> Union[list, str]:
    if not isinstance(array, np.ndarray):
        return format_rational(array)
    return [_nested_strings(sub) for sub in array]


def make_fsc(nx: int, ny: int, ns: int, p, q) -> FscParams:
    """
    Build and validate channel parameters from nested rationals.

    Parameters
    ----------
    nx, ny, ns : int
        alphabet sizes
    p : array-like
        p(y | x, s_prev) indexed (y, x, s_prev)
    q : array-like
        q(s_next | x, s_prev) indexed (s_next, x, s_prev)

    Returns
    -------
    fsc : FscParams
        the validated parameters

    """
    return validate(
        FscParams(
            nx=int(nx),
            ny=int(ny),
            ns=int(ns),
            p=np.asarray(p, dtype=object),
            q=np.asarray(q, dtype=object),
        )
    )


def validate(raw: FscParams) -> FscParams:
    """
    Validate channel parameters.

    Parameters
    ----------
    raw : FscParams
        parameters with possibly unchecked tensors

    Returns
    -------
    fsc : FscParams
        parameters with read-only exact tensors whose rows sum to one

    """
    nx, ny, ns = int(raw.nx), int(raw.ny), int(raw.ns)
    if min(nx, ny, ns) < 2:  # noqa: PLR2004
        raise ShapeError(f"alphabet sizes must be at least 2, got {(nx, ny, ns)}")
    p = as_rational_array(raw.p, shape=(ny, nx, ns))
    q = as_rational_array(raw.q, shape=(ns, nx, ns))

    for name, tensor in [("p", p), ("q", q)]:
        negative = np.argwhere(tensor < 0)
        if len(negative):
            where = (name, *(int(i) for i in negative[0]))
            raise NegativeEntryError(where, tensor[tuple(negative[0])])
        for x in range(nx):
            for s_prev in range(ns):
                total = sum(tensor[:, x, s_prev], gmpy2.mpq(0))
                if total != 1:
                    raise RowSumError((name, x, s_prev), format_rational(total))

    p.flags.writeable = False
    q.flags.writeable = False
    return FscParams(nx=nx, ny=ny, ns=ns, p=p, q=q)


def one_step_kernel(fsc: FscParams, x: int) -> np.ndarray:
    """
    Return the one-step matrix T_x[s_prev, y * ns + s_next].

    The entry is p(y | x, s_prev) * q(s_next | x, s_prev).
    """
    p_rows = fsc.p[:, x, :].T  # (s_prev, y)
    q_rows = fsc.q[:, x, :].T  # (s_prev, s_next)
    kernel = p_rows[:, :, None] * q_rows[:, None, :]
    return kernel.reshape(fsc.ns, fsc.ny * fsc.ns)


def _unit_row(size: int, index: int) -> np.ndarray:
    row = np.array([gmpy2.mpq(0)] * size, dtype=object)
    row[index] = gmpy2.mpq(1)
    return row


def _check_block(fsc: FscParams, x_seq: Sequence[int], s0: int) -> Tuple[int, ...]:
    x_seq = tuple(int(x) for x in x_seq)
    if len(x_seq) == 0:
        raise ParamRangeError("block length must be at least 1")
    if any(x < 0 or x >= fsc.nx for x in x_seq):
        raise ParamRangeError(f"input sequence {x_seq} has symbols outside [0, {fsc.nx})")
    if not 0 <= s0 < fsc.ns:
        raise ParamRangeError(f"initial state {s0} outside [0, {fsc.ns})")
    return x_seq


def joint_block_law(fsc: FscParams, x_seq: Sequence[int], s0: int) -> JointBlockLaw:
    """
    Compute p^n(y^n, s_n | x^n, s_0) by the inductive product-sum.

    p^n(y^n, s_n | x^n, s_0)
        = sum_{s_{n-1}} p(y_n, s_n | x_n, s_{n-1}) p^{n-1}(y^{n-1}, s_{n-1} | ...)

    Parameters
    ----------
    fsc : FscParams
        the channel
    x_seq : sequence of int
        the input block
    s0 : int
        the initial state

    Returns
    -------
    law : JointBlockLaw
        the exact block law

    """
    x_seq = _check_block(fsc, x_seq, s0)
    table = _unit_row(fsc.ns, s0).reshape(1, fsc.ns)
    for x in x_seq:
        table = (table @ one_step_kernel(fsc, x)).reshape(-1, fsc.ns)
    return JointBlockLaw(n=len(x_seq), x_seq=x_seq, s0=s0, ny=fsc.ny, table=table)


def output_block_law(
    fsc: FscParams, x_seq: Sequence[int], s0: int
) -> Dict[Tuple[int, ...], MPQ]:
    """
    Compute p^n(y^n | x^n, s_0) by summing the block law over the final state.

    Returns
    -------
    law : dict
        probability of every output sequence, keyed by the sequence tuple

    """
    law = joint_block_law(fsc, x_seq, s0)
    marginal = law.table.sum(axis=1)
    return {
        decode_sequence(y_code, fsc.ny, law.n): marginal[y_code]
        for y_code in range(len(marginal))
    }


def state_kernel(
    fsc: FscParams, x_seq: Sequence[int], s0: int, kernel: str = "transition"
) -> Tuple[MPQ, ...]:
    """
    Compute the state kernel q^n(s_n | x^n, s_0).

    Parameters
    ----------
    fsc : FscParams
        the channel
    x_seq : sequence of int
        the input block
    s0 : int
        the initial state
    kernel : str
        "transition" uses the q-only recursion, "marginal" sums the joint block
        law over the outputs; both are exactly equal

    Returns
    -------
    kernel : tuple of mpq
        probability of every final state

    """
    if kernel == "marginal":
        return tuple(joint_block_law(fsc, x_seq, s0).table.sum(axis=0))
    if kernel != "transition":
        raise ValueError(f"kernel must be 'transition' or 'marginal', not `{kernel}`")
    x_seq = _check_block(fsc, x_seq, s0)
    row = _unit_row(fsc.ns, s0)
    for x in x_seq:
        row = row @ fsc.q_slice(x)
    return tuple(row)


def block_channel(
    fsc: FscParams, n: int, s0: int, cell_cap: Union[int, None] = None
) -> np.ndarray:
    """
    Build the block channel p^n(y^n | x^n, s_0) as a dense matrix.

    Prefixes share their partial tables, so every level extends the tables of the
    previous level by one input symbol.

    Parameters
    ----------
    fsc : FscParams
        the channel
    n : int
        block length
    s0 : int
        initial state
    cell_cap : int, optional
        largest allowed |X|^n * |Y|^n, defaults to the configured cap

    Returns
    -------
    w : np.ndarray
        object array (|X|^n, |Y|^n) with rows indexed by the input code

    """
    cell_cap = config_helper.BLOCK_CELL_CAP if cell_cap is None else cell_cap
    _check_block(fsc, (0,) * n, s0)
    cells = fsc.nx**n * fsc.ny**n
    if cells > cell_cap:
        raise BudgetError(
            f"block channel at n={n} has {cells} cells, above the cap of {cell_cap}"
        )

    kernels = [one_step_kernel(fsc, x) for x in range(fsc.nx)]
    tables = _unit_row(fsc.ns, s0).reshape(1, 1, fsc.ns)
    for _ in range(n):
        prefixes, y_codes, _ = tables.shape
        flat = tables.reshape(prefixes * y_codes, fsc.ns)
        extended = [
            (flat @ kernel).reshape(prefixes, y_codes * fsc.ny, fsc.ns)
            for kernel in kernels
        ]
        tables = np.stack(extended, axis=1).reshape(
            prefixes * fsc.nx, y_codes * fsc.ny, fsc.ns
        )
    logger.debug(f"built block channel n={n} s0={s0} with {cells} cells")
    return tables.sum(axis=2)


def distance(a: FscParams, b: FscParams, s0: int) -> MPQ:
    """
    Compute the distance between {p1, q1, s0} and {p2, q2, s0}.

    d = max_x sum_y |p1(y|x,s0) - p2(y|x,s0)| + max_x sum_s |q1(s|x,s0) - q2(s|x,s0)|

    Returns
    -------
    d : mpq
        the exact distance

    """
    if (a.nx, a.ny, a.ns) != (b.nx, b.ny, b.ns):
        raise ShapeMismatchError(
            f"alphabets differ: {(a.nx, a.ny, a.ns)} vs {(b.nx, b.ny, b.ns)}"
        )
    if not 0 <= s0 < a.ns:
        raise ParamRangeError(f"initial state {s0} outside [0, {a.ns})")
    p_term = max(
        sum((abs(a.p[y, x, s0] - b.p[y, x, s0]) for y in range(a.ny)), gmpy2.mpq(0))
        for x in range(a.nx)
    )
    q_term = max(
        sum((abs(a.q[s, x, s0] - b.q[s, x, s0]) for s in range(a.ns)), gmpy2.mpq(0))
        for x in range(a.nx)
    )
    return p_term + q_term


def is_state_independent_output(fsc: FscParams) -> bool:
    """Check whether p(y | x, s) does not depend on the state."""
    return all(
        np.array_equal(fsc.p[:, :, s], fsc.p[:, :, 0]) for s in range(1, fsc.ns)
    )


def is_input_independent_transition(fsc: FscParams) -> bool:
    """Check whether q(s_next | x, s_prev) does not depend on the input."""
    return all(
        np.array_equal(fsc.q[:, x, :], fsc.q[:, 0, :]) for x in range(1, fsc.nx)
    )


def load_channel(path: Union[str, Path]) -> FscParams:
    """
    Load a channel JSON file.

    Parameters
    ----------
    path : str or Path
        the file holding {"nx", "ny", "ns", "p", "q"} with "a/b" entries

    Returns
    -------
    fsc : FscParams
        the validated channel

    """
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    logger.info(f"loaded channel from {path}")
    return FscParams.from_dict(data)


def save_channel(fsc: FscParams, path: Union[str, Path]) -> None:
    """Write a channel JSON file."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(fsc.to_dict(), f, indent=2)
