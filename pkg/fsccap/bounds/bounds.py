"""
Certified capacity bounds of finite state channels.

For a channel {p, q} with state count |S| the per-blocklength functions are

    upper_n = (1/n) max_{X^n} max_{s0} I(X^n; Y^n | s0)
    lower_n = (1/n) max_{X^n} min_{s0} I(X^n; Y^n | s0)

and the capacity is bracketed at every stage M by

    lower(M) = max_{1 <= n <= 2^M} lower_n - log2|S| / n
    upper(M) = min_{1 <= n <= 2^M} upper_n + log2|S| / n

Both sequences are monotone in M. Every reported value is an interval enclosure
computed from exact rational block channels, so the bracket is sound whatever the
quality of the float optimizers used to find the witnesses.
"""

import threading
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple, Union

import gmpy2
import numpy as np
from joblib import Parallel, delayed

from fsccap.bounds.dmc import (
    DmcCapacity,
    dmc_capacity,
    dual_upper_bound,
    mutual_information_float,
)
from fsccap.bounds.limits import effective_limit
from fsccap.channel.fsc import (
    MPQ,
    FscParams,
    block_channel,
    format_rational,
    is_state_independent_output,
)
from fsccap.info.interval import (
    RealInterval,
    down,
    format_lower,
    format_upper,
    interval_max,
    interval_min,
    up,
)
from fsccap.info.measures import InputDistribution, mutual_information
from fsccap.utils import config_helper, custom_logger
from fsccap.utils.exceptions import BudgetError, NonconvergenceError, ParamRangeError

logger = custom_logger.setup_logging(__name__)

KINDS = ["lower", "upper"]


@dataclass(frozen=True)
class BoundCertificate:
    """
    A certified bound with the witness needed to re-evaluate it.

    Parameters
    ----------
    kind : str
        "lower" or "upper"
    value : RealInterval
        the certified value
    n_star : int
        blocklength achieving the extremum
    witness : InputDistribution or tuple of mpq
        input distribution of a lower bound, dual output distribution of an
        upper bound
    s0_star : int
        initial state achieving the inner min (lower) or max (upper)
    witness_n : int
        blocklength the witness lives on, 1 for a single-letter witness of a
        state-independent channel
    corrected : bool
        whether the -/+ log2|S|/n correction is applied
    raw_value : RealInterval, optional
        the corrected value before clamping to the feasible range
    clamped : bool
        whether clamping changed the value
    stalled : bool
        whether the optimizer was still improving when its budget ran out
    cap : RealInterval, optional
        min over s0 of the single-state capacity bound, an upper cap of a lower
        bound kept for diagnostics

    """

    kind: str
    value: RealInterval
    n_star: int
    witness: Union[InputDistribution, Tuple[MPQ, ...]]
    s0_star: int
    witness_n: int
    corrected: bool = False
    raw_value: Optional[RealInterval] = None
    clamped: bool = False
    stalled: bool = False
    cap: Optional[RealInterval] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS} and not `{self.kind}`")

    def to_dict(self) -> dict:
        """Serialize with "a/b" witnesses and outward-rounded intervals."""
        if isinstance(self.witness, InputDistribution):
            witness = self.witness.to_dict()
        else:
            witness = {
                "n": self.witness_n,
                "weights": [format_rational(w) for w in self.witness],
            }
        return {
            "kind": self.kind,
            "value": self.value.to_dict(),
            "n_star": self.n_star,
            "s0_star": self.s0_star,
            "witness_n": self.witness_n,
            "witness": witness,
            "corrected": self.corrected,
            "raw_value": self.raw_value.to_dict() if self.raw_value else None,
            "clamped": self.clamped,
            "stalled": self.stalled,
            "cap": self.cap.to_dict() if self.cap else None,
        }


@dataclass(frozen=True)
class BoundReport:
    """
    The sandwich bounds at stage M.

    Parameters
    ----------
    M : int
        stage, blocklengths 1..2^M were used
    lower : BoundCertificate
        corrected and clamped lower bound
    upper : BoundCertificate
        corrected and clamped upper bound
    gap : RealInterval
        upper - lower

    """

    M: int
    lower: BoundCertificate
    upper: BoundCertificate
    gap: RealInterval

    @property
    def bracket(self) -> RealInterval:
        """The capacity bracket [lower.lo, upper.hi]."""
        return RealInterval(
            self.lower.value.lo, self.upper.value.hi, self.lower.value.precision
        )

    def to_row(self) -> dict:
        """Return the CSV row of the report."""
        return {
            "M": self.M,
            "lower_lo": format_lower(self.lower.value.lo),
            "lower_hi": format_upper(self.lower.value.hi),
            "upper_lo": format_lower(self.upper.value.lo),
            "upper_hi": format_upper(self.upper.value.hi),
            "gap_hi": format_upper(self.gap.hi),
            "n_star_lower": self.lower.n_star,
            "n_star_upper": self.upper.n_star,
        }

    def to_dict(self) -> dict:
        """Serialize the full report."""
        return {
            "M": self.M,
            "lower": self.lower.to_dict(),
            "upper": self.upper.to_dict(),
            "gap": self.gap.to_dict(),
        }


class BoundCache:
    """
    Thread-safe memo of per-blocklength certificates.

    Keys are (channel digest, n, tol, precision) and values are the pair
    (lower certificate, upper certificate).
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._store: Dict[tuple, Tuple[BoundCertificate, BoundCertificate]] = {}

    def get(self, key: tuple) -> Optional[Tuple[BoundCertificate, BoundCertificate]]:
        """Return the cached pair or None."""
        with self._lock:
            return self._store.get(key)

    def put(self, key: tuple, value: Tuple[BoundCertificate, BoundCertificate]) -> None:
        """Store a pair, keeping the first value stored under a key."""
        with self._lock:
            self._store.setdefault(key, value)

    def __contains__(self, key: tuple) -> bool:
        with self._lock:
            return key in self._store

    def __len__(self) -> int:
        with self._lock:
            return len(self._store)

    def clear(self) -> None:
        """Drop every entry."""
        with self._lock:
            self._store.clear()


DEFAULT_CACHE = BoundCache()


def _settings(tol, precision) -> Tuple[float, int]:
    tol = config_helper.TOL if tol is None else float(tol)
    precision = config_helper.PRECISION_BITS if precision is None else int(precision)
    if tol <= 0:
        raise ParamRangeError(f"tol must be positive, got {tol}")
    return tol, precision


def _check_n(n: int) -> None:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParamRangeError(f"blocklength must be a positive integer, got {n}")


def block_slices(
    fsc: FscParams, n: int, cell_cap: Optional[int] = None
) -> List[np.ndarray]:
    """Return the block channel p^n(. | ., s0) for every initial state."""
    return [block_channel(fsc, n, s0, cell_cap=cell_cap) for s0 in range(fsc.ns)]


def _single_letter(fsc: FscParams, tol, precision) -> DmcCapacity:
    try:
        return dmc_capacity(fsc.p_slice(0), tol=tol, precision=precision)
    except NonconvergenceError as err:
        logger.warning("single-letter capacity kept the unconverged certificates")
        return err.result


def upper_bound_fn(
    fsc: FscParams,
    n: int,
    tol: Optional[float] = None,
    precision: Optional[int] = None,
    cell_cap: Optional[int] = None,
) -> BoundCertificate:
    """
    Certify upper_n = (1/n) max_{X^n} max_{s0} I(X^n; Y^n | s0).

    The value encloses upper_n: its lower end is an attained mutual information
    and its upper end the dual bound of the maximizing initial state. No
    log2|S|/n correction is applied.

    Parameters
    ----------
    fsc : FscParams
        the channel
    n : int
        blocklength
    tol : float, optional
        Blahut-Arimoto duality gap tolerance
    precision : int, optional
        working precision in bits
    cell_cap : int, optional
        cap on the block channel size

    Returns
    -------
    cert : BoundCertificate
        upper certificate with the dual output distribution as witness

    Raises
    ------
    NonconvergenceError
        when an inner capacity did not converge, carrying a sound certificate

    """
    _check_n(n)
    tol, precision = _settings(tol, precision)

    if is_state_independent_output(fsc):
        result = _single_letter(fsc, tol, precision)
        return BoundCertificate(
            kind="upper",
            value=RealInterval(result.lower.lo, result.upper.hi, precision),
            n_star=n,
            witness=result.output,
            s0_star=0,
            witness_n=1,
        )

    results = []
    unconverged = None
    for s0, w in enumerate(block_slices(fsc, n, cell_cap)):
        try:
            results.append(dmc_capacity(w, tol=tol, precision=precision, n=n))
        except NonconvergenceError as err:
            results.append(err.result)
            unconverged = err
        logger.debug(f"upper n={n} s0={s0}: {results[-1].upper}")

    s0_star = max(range(len(results)), key=lambda s: (results[s].upper.hi, -s))
    value = RealInterval(
        interval_max(r.lower for r in results).lo,
        interval_max(r.upper for r in results).hi,
        precision,
    ).scale(gmpy2.mpq(1, n))
    cert = BoundCertificate(
        kind="upper",
        value=value,
        n_star=n,
        witness=results[s0_star].output,
        s0_star=s0_star,
        witness_n=n,
    )
    if unconverged is not None:
        raise NonconvergenceError(unconverged.budget, cert)
    return cert


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    if not np.all(np.isfinite(v)):
        raise ValueError(f"cannot project a non-finite vector {v} onto the simplex")
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    index = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - cumulative / index > 0)[0][-1]
    theta = cumulative[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def maximin_ascent(
    channels: List[np.ndarray],
    iterations: int,
    step: float,
    tol: float,
    cap: Optional[float] = None,
) -> Tuple[np.ndarray, float, bool]:
    """
    Maximize f(P) = min_s I(P; W_s) by projected supergradient ascent.

    Parameters
    ----------
    channels : list of np.ndarray
        float channel matrices sharing the input alphabet
    iterations : int
        iteration budget
    step : float
        initial step, scaled by 1 / (sqrt(t) * |inputs|) at iteration t
    tol : float
        improvement tolerance, also the distance to `cap` that stops early
    cap : float, optional
        known upper bound of the maximum

    Returns
    -------
    best : np.ndarray
        best iterate found
    best_value : float
        f at the best iterate
    stalled : bool
        whether the best value still improved by more than `tol` over the last
        tenth of the budget when the budget ran out

    """
    size = channels[0].shape[0]
    px = np.full(size, 1.0 / size)
    best, best_value = px, -np.inf
    trace = []
    for t in range(1, iterations + 1):
        evaluated = [mutual_information_float(px, w) for w in channels]
        values = [mi for mi, _ in evaluated]
        active = int(np.argmin(values))
        if values[active] > best_value:
            best, best_value = px, values[active]
        trace.append(best_value)
        if cap is not None and best_value >= cap - tol:
            return best, best_value, False
        px = project_simplex(px + step / (np.sqrt(t) * size) * evaluated[active][1])

    window = max(1, iterations // 10)
    stalled = len(trace) > window and trace[-1] - trace[-1 - window] > tol
    return best, best_value, stalled


def lower_bound_fn(
    fsc: FscParams,
    n: int,
    tol: Optional[float] = None,
    precision: Optional[int] = None,
    iterations: Optional[int] = None,
    step: Optional[float] = None,
    cell_cap: Optional[int] = None,
) -> BoundCertificate:
    """
    Certify a lower bound of lower_n = (1/n) max_{X^n} min_{s0} I(X^n; Y^n | s0).

    The input distribution is found by projected supergradient ascent from the
    uniform start; the value is the exact enclosure of min_{s0} I at the best
    iterate divided by n, which is sound whatever the optimizer reached.

    Parameters
    ----------
    fsc : FscParams
        the channel
    n : int
        blocklength
    tol : float, optional
        optimizer tolerance
    precision : int, optional
        working precision in bits
    iterations : int, optional
        supergradient iteration budget
    step : float, optional
        initial supergradient step
    cell_cap : int, optional
        cap on the block channel size

    Returns
    -------
    cert : BoundCertificate
        lower certificate with the input distribution as witness

    """
    _check_n(n)
    tol, precision = _settings(tol, precision)
    iterations = config_helper.MAXIMIN_ITERATIONS if iterations is None else iterations
    step = config_helper.MAXIMIN_STEP if step is None else step

    if is_state_independent_output(fsc):
        result = _single_letter(fsc, tol, precision)
        return BoundCertificate(
            kind="lower",
            value=result.lower,
            n_star=n,
            witness=result.px,
            s0_star=0,
            witness_n=1,
            stalled=not result.converged,
            cap=result.upper,
        )

    slices = block_slices(fsc, n, cell_cap)
    caps = []
    for w in slices:
        try:
            caps.append(dmc_capacity(w, tol=tol, precision=precision, n=n).upper)
        except NonconvergenceError as err:
            logger.warning(f"cap at n={n} kept an unconverged dual bound")
            caps.append(err.result.upper)
    cap = interval_min(caps)

    channels = [w.astype(float) for w in slices]
    best, best_value, stalled = maximin_ascent(
        channels, iterations, step, tol, cap=float(cap.lo)
    )
    if stalled:
        logger.warning(f"maximin ascent at n={n} stalled with f={best_value:.6f}")

    px = InputDistribution.from_floats(best, n=n)
    values = [mutual_information(px, w, precision) for w in slices]
    s0_star = min(range(len(values)), key=lambda s: (values[s].lo, s))
    logger.debug(f"lower n={n}: f={values[s0_star]} at s0={s0_star}")
    return BoundCertificate(
        kind="lower",
        value=interval_min(values).scale(gmpy2.mpq(1, n)),
        n_star=n,
        witness=px,
        s0_star=s0_star,
        witness_n=n,
        stalled=stalled,
        cap=cap.scale(gmpy2.mpq(1, n)),
    )


def _evaluate_blocklength(
    fsc: FscParams, n: int, tol: float, precision: int
) -> Tuple[BoundCertificate, BoundCertificate]:
    lower = lower_bound_fn(fsc, n, tol=tol, precision=precision)
    try:
        upper = upper_bound_fn(fsc, n, tol=tol, precision=precision)
    except NonconvergenceError as err:
        logger.warning(f"upper bound at n={n} uses an unconverged dual witness")
        upper = err.result
    return lower, upper


def feasible_cap(fsc: FscParams, precision: int) -> RealInterval:
    """Enclose log2 min(|X|, |Y|), the largest possible capacity."""
    return RealInterval.log2(min(fsc.nx, fsc.ny), precision)


def correction(fsc: FscParams, n: int, precision: int) -> RealInterval:
    """Enclose the state correction log2|S| / n."""
    return RealInterval.log2(fsc.ns, precision).scale(gmpy2.mpq(1, n))


def sandwich(
    fsc: FscParams,
    M: int,
    tol: Optional[float] = None,
    precision: Optional[int] = None,
    threads: Optional[int] = None,
    cache: Optional[BoundCache] = None,
) -> BoundReport:
    """
    Compute the sandwich bounds at stage M.

    Blocklengths 1..2^M are evaluated, reusing cached certificates. Missing
    blocklengths run in a joblib thread pool and are reduced in index order, so
    the report does not depend on the thread count.

    Parameters
    ----------
    fsc : FscParams
        the channel
    M : int
        stage
    tol : float, optional
        optimizer tolerance
    precision : int, optional
        working precision in bits
    threads : int, optional
        worker threads
    cache : BoundCache, optional
        memo of per-blocklength certificates, defaults to the module cache

    Returns
    -------
    report : BoundReport
        corrected and clamped bounds with their gap

    """
    if isinstance(M, bool) or int(M) != M or M < 0:
        raise ParamRangeError(f"stage M must be a nonnegative integer, got {M}")
    tol, precision = _settings(tol, precision)
    threads = config_helper.THREADS if threads is None else int(threads)
    cache = DEFAULT_CACHE if cache is None else cache

    digest = fsc.digest()
    blocklengths = list(range(1, 2**M + 1))
    missing = [n for n in blocklengths if (digest, n, tol, precision) not in cache]
    if missing:
        logger.info(f"stage M={M}: evaluating blocklengths {missing}")
        computed = Parallel(n_jobs=threads, prefer="threads")(
            delayed(_evaluate_blocklength)(fsc, n, tol, precision) for n in missing
        )
        for n, pair in zip(missing, computed):
            cache.put((digest, n, tol, precision), pair)

    lowers, uppers = [], []
    for n in blocklengths:
        lower, upper = cache.get((digest, n, tol, precision))
        shift = correction(fsc, n, precision)
        lowers.append(replace(lower, value=lower.value - shift, corrected=True))
        uppers.append(replace(upper, value=upper.value + shift, corrected=True))

    best_lower = max(range(len(lowers)), key=lambda i: (lowers[i].value.lo, -i))
    best_upper = min(range(len(uppers)), key=lambda i: (uppers[i].value.hi, i))
    lower = _clamp(lowers[best_lower], floor=0)
    upper = _clamp(uppers[best_upper], cap=feasible_cap(fsc, precision).hi)
    report = BoundReport(M=M, lower=lower, upper=upper, gap=upper.value - lower.value)
    logger.info(
        f"stage M={M}: {lower.value.lo:.6f} <= C <= {upper.value.hi:.6f} "
        f"(n*={lower.n_star}, {upper.n_star})"
    )
    return report


def _clamp(cert: BoundCertificate, floor=None, cap=None) -> BoundCertificate:
    clamped = cert.value.clamp(floor=floor, cap=cap)
    return replace(
        cert,
        value=clamped,
        raw_value=cert.value,
        clamped=(clamped.lo, clamped.hi) != (cert.value.lo, cert.value.hi),
    )


def verify_certificate(
    fsc: FscParams, cert: BoundCertificate, precision: Optional[int] = None
) -> bool:
    """
    Re-evaluate a certificate from its witness.

    A lower certificate is reproduced by min_{s0} I at the witness, an upper
    certificate by the dual bound of the witness on the block channel of s0_star.
    The stored value before clamping is the reference, with a slack equal to the
    width of the re-evaluation.

    Parameters
    ----------
    fsc : FscParams
        the channel the certificate was issued for
    cert : BoundCertificate
        the certificate
    precision : int, optional
        working precision in bits

    Returns
    -------
    valid : bool
        whether the re-evaluation reproduces the certified value

    """
    precision = cert.value.precision if precision is None else precision
    slices = block_slices(fsc, cert.witness_n)
    scale = gmpy2.mpq(1, cert.witness_n)

    if cert.kind == "lower":
        recomputed = interval_min(
            mutual_information(cert.witness, w, precision) for w in slices
        ).scale(scale)
    else:
        bound, _ = dual_upper_bound(slices[cert.s0_star], cert.witness, precision)
        recomputed = bound.scale(scale)
    if cert.corrected:
        shift = correction(fsc, cert.n_star, precision)
        recomputed = recomputed - shift if cert.kind == "lower" else recomputed + shift

    reference = cert.raw_value if cert.raw_value is not None else cert.value
    slack = recomputed.width
    if cert.kind == "lower":
        with up(precision):
            valid = recomputed.hi + slack >= reference.lo
    else:
        with down(precision):
            valid = recomputed.lo - slack <= reference.hi
    if not valid:
        logger.warning(f"{cert.kind} certificate at n={cert.n_star} did not verify")
    return bool(valid)


@dataclass(frozen=True)
class CapacityResult:
    """
    Outcome of the precision loop.

    Parameters
    ----------
    status : str
        "converged" or "partial"
    interval : RealInterval
        the capacity bracket, narrower than 2^-N when converged
    stages : int
        number of stages evaluated
    last_report : BoundReport, optional
        the report of the last completed stage
    reason : str
        why the loop stopped

    """

    status: str
    interval: Optional[RealInterval]
    stages: int
    last_report: Optional[BoundReport]
    reason: str

    def to_dict(self) -> dict:
        """Serialize the result."""
        return {
            "status": self.status,
            "interval": self.interval.to_dict() if self.interval else None,
            "stages": self.stages,
            "reason": self.reason,
            "last_report": self.last_report.to_dict() if self.last_report else None,
        }


def capacity_to_precision(
    fsc: FscParams,
    N: int,
    budget_M: Optional[int] = None,
    tol: Optional[float] = None,
    precision: Optional[int] = None,
    threads: Optional[int] = None,
    cache: Optional[BoundCache] = None,
) -> CapacityResult:
    """
    Bracket the capacity to N bits or stop at the stage budget.

    Stages M = 0, 1, ... are evaluated until gap < 2^-(N+2), which guarantees a
    bracket narrower than 2^-N. Decomposable channels may never pinch, so running
    out of stages is a normal partial outcome; so is a block channel too large
    for the cell cap.

    Parameters
    ----------
    fsc : FscParams
        the channel
    N : int
        target bits
    budget_M : int, optional
        largest stage, defaults to the configured budget
    tol, precision, threads, cache
        passed to `sandwich`

    Returns
    -------
    result : CapacityResult
        converged or partial bracket

    """
    budget_M = config_helper.BUDGET_M if budget_M is None else int(budget_M)
    reports: Dict[int, BoundReport] = {}

    def report(M: int) -> BoundReport:
        if M not in reports:
            reports[M] = sandwich(
                fsc, M, tol=tol, precision=precision, threads=threads, cache=cache
            )
        return reports[M]

    try:
        limit = effective_limit(
            lambda M: report(M).lower.value.lo,
            lambda M: report(M).upper.value.hi,
            N,
            budget_M,
        )
    except BudgetError as err:
        last = reports[max(reports)] if reports else None
        logger.warning(f"precision loop stopped early: {err}")
        return CapacityResult(
            status="partial",
            interval=last.bracket if last else None,
            stages=len(reports),
            last_report=last,
            reason=str(err),
        )

    last = reports[limit.stage]
    if limit.converged:
        reason = f"gap below 2^-{N + 2} at stage {limit.stage}"
    else:
        reason = f"stage budget {budget_M} exhausted"
        logger.warning(f"partial bracket: {reason}")
    return CapacityResult(
        status=limit.status,
        interval=last.bracket,
        stages=len(reports),
        last_report=last,
        reason=reason,
    )
