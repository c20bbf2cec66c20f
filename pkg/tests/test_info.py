"""Tests the interval enclosures and information measures."""

import math

import gmpy2
import numpy as np
import pytest

from fsccap.bounds.dmc import mutual_information_float
from fsccap.channel import families, fsc
from fsccap.info import interval, measures
from fsccap.utils.exceptions import (
    NotADistributionError,
    ParamRangeError,
    ShapeMismatchError,
)

rng = np.random.default_rng(123)
q = gmpy2.mpq

identity = np.array([[q(1), q(0)], [q(0), q(1)]], dtype=object)
bsc = families.bsc_matrix("1/4")


def reference_entropy(dist):
    """Evaluate the entropy at 256 bits."""
    with gmpy2.context(precision=256):
        return -sum(
            (gmpy2.mpfr(p) * gmpy2.log2(gmpy2.mpfr(p)) for p in dist if p > 0),
            gmpy2.mpfr(0),
        )


def reference_mutual_information(px, w):
    """Evaluate the mutual information at 256 bits."""
    output = tuple(np.array(px, dtype=object) @ w)
    with gmpy2.context(precision=256):
        conditional = sum(
            (gmpy2.mpfr(px[x]) * reference_entropy(w[x]) for x in range(len(px))),
            gmpy2.mpfr(0),
        )
        return reference_entropy(output) - conditional


def random_distribution(size, denominator=1000):
    """Draw an exact distribution with a common denominator."""
    counts = rng.multinomial(denominator, [1 / size] * size)
    return tuple(q(int(c), denominator) for c in counts)


def random_matrix(rows, cols):
    """Draw an exact channel matrix."""
    return np.array([random_distribution(cols, 64) for _ in range(rows)], dtype=object)


def test_interval_arithmetic():
    """Checks interval operations keep the exact value inside."""
    third = interval.RealInterval.exact(q(1, 3))
    assert third.lo < third.hi, "Expected 1/3 to need rounding."
    assert third.contains(q(1, 3)), "Expected 1/3 inside."
    total = third + third + third
    assert total.contains(1), "Expected 1/3 + 1/3 + 1/3 to enclose 1."
    assert (1 - third).contains(q(2, 3)), "Expected 1 - 1/3 to enclose 2/3."
    assert third.scale(q(-3)).contains(-1), "Expected -3 * 1/3 to enclose -1."
    assert (third / 2).contains(q(1, 6)), "Expected 1/3 / 2 to enclose 1/6."
    with pytest.raises(ValueError):
        interval.RealInterval(gmpy2.mpfr(1), gmpy2.mpfr(0))


def test_interval_negation():
    """Checks that negation keeps the working precision and directed rounding."""
    third = interval.RealInterval.exact(q(1, 3))
    negated = -third
    assert negated.contains(q(-1, 3)), "Expected -1/3 inside."
    assert negated.lo < negated.hi, "Expected the endpoints to stay apart."
    assert negated.width == third.width, "Expected an exact negation at 64 bits."
    mixed = interval.RealInterval.from_bounds(q(-1, 3), q(1, 3)).scale(q(1, 3))
    assert mixed.contains(q(-1, 9)) and mixed.contains(q(1, 9)), (
        "Expected both ends of a sign-crossing interval to round outward."
    )


def test_interval_clamp():
    """Checks clamping to a floor and a cap."""
    value = interval.RealInterval.from_bounds(q(-1, 2), q(3, 2))
    clamped = value.clamp(floor=0, cap=1)
    assert (clamped.lo, clamped.hi) == (0, 1), "Expected [0, 1]."
    high = interval.RealInterval.exact(2).clamp(cap=1)
    assert (high.lo, high.hi) == (1, 1), "Expected a value above the cap to be 1."


def test_interval_format():
    """Checks outward decimal formatting."""
    third = interval.RealInterval.exact(q(1, 3))
    data = third.to_dict()
    assert data["lo"] == "0.333333333333333", "Expected rounding down."
    assert data["hi"] == "0.333333333333334", "Expected rounding up."


def test_entropy_examples():
    """Checks the entropy of small distributions."""
    uniform = measures.entropy((q(1, 2), q(1, 2)))
    assert uniform.contains(1), "Expected H(1/2, 1/2) to enclose 1."
    assert uniform.width <= 2**-40, "Expected a narrow enclosure."
    assert measures.entropy((q(1), q(0))).contains(0), "Expected H(1, 0) = 0."
    quarter = measures.entropy(("1/4", "3/4"))
    assert quarter.contains(reference_entropy((q(1, 4), q(3, 4)))), (
        "Expected H(1/4, 3/4) to enclose the reference."
    )
    assert abs(quarter.midpoint - 0.8112781244) < 1e-9, "Expected 0.8112781244..."


def test_entropy_errors():
    """Checks that non-distributions are rejected."""
    with pytest.raises(NotADistributionError):
        measures.entropy((q(1, 2), q(1, 4)))
    with pytest.raises(NotADistributionError):
        measures.entropy((q(3, 2), q(-1, 2)))
    with pytest.raises(NotADistributionError):
        measures.entropy(())


def test_binary_entropy():
    """Checks binary entropy values and range."""
    assert measures.binary_entropy("1/2").contains(1), "Expected H2(1/2) = 1."
    assert measures.binary_entropy(0).contains(0), "Expected H2(0) = 0."
    eighth = measures.binary_entropy("1/8")
    assert eighth.contains(reference_entropy((q(1, 8), q(7, 8)))), (
        "Expected H2(1/8) to enclose the reference."
    )
    assert abs(eighth.midpoint - 0.5435644432) < 1e-9, "Expected 0.5435644432..."
    with pytest.raises(ParamRangeError):
        measures.binary_entropy("3/2")


def test_entropy_soundness():
    """Checks enclosures against 256-bit references on 200 distributions."""
    for _ in range(200):
        size = int(rng.integers(1, 65))
        dist = random_distribution(size)
        assert measures.entropy(dist).contains(reference_entropy(dist)), (
            f"Expected the reference inside for {dist}."
        )


def test_entropy_refinement():
    """Checks that doubling the precision never widens the enclosure."""
    for _ in range(20):
        dist = random_distribution(int(rng.integers(2, 17)))
        coarse = measures.entropy(dist, precision=64)
        fine = measures.entropy(dist, precision=128)
        assert fine.width <= coarse.width, "Expected a narrower enclosure."


def test_mutual_information_examples():
    """Checks the mutual information of the noiseless, useless and BSC channels."""
    uniform = measures.InputDistribution.uniform(2)
    assert measures.mutual_information(uniform, identity).contains(1), (
        "Expected the noiseless channel to carry 1 bit."
    )
    useless = np.array([[q(1, 3), q(2, 3)], [q(1, 3), q(2, 3)]], dtype=object)
    assert measures.mutual_information((q(1, 5), q(4, 5)), useless).contains(0), (
        "Expected equal rows to carry nothing."
    )
    noisy = measures.mutual_information(uniform, bsc)
    assert abs(noisy.midpoint - 0.1887218756) < 1e-9, "Expected 1 - H2(1/4)."
    assert noisy.contains(reference_mutual_information(uniform.weights, bsc)), (
        "Expected the 256-bit reference inside."
    )


def test_mutual_information_errors():
    """Checks shape and distribution errors."""
    with pytest.raises(ShapeMismatchError):
        measures.mutual_information(measures.InputDistribution.uniform(3), identity)
    bad = np.array([[q(1, 2), q(1, 4)], [q(0), q(1)]], dtype=object)
    with pytest.raises(NotADistributionError):
        measures.mutual_information((q(1, 2), q(1, 2)), bad)


def test_mutual_information_soundness():
    """Checks mutual information enclosures against 256-bit references."""
    for _ in range(50):
        rows, cols = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        w = random_matrix(rows, cols)
        px = random_distribution(rows, 128)
        value = measures.mutual_information(px, w)
        assert value.contains(reference_mutual_information(px, w)), (
            "Expected the reference inside."
        )
        assert value.lo >= -value.width, "Expected a nonnegative enclosure."
        float_value, _ = mutual_information_float(
            np.array([float(p) for p in px]), w.astype(float)
        )
        assert abs(value.midpoint - float_value) < 1e-9, (
            "Expected the float evaluation to agree."
        )


def test_mutual_information_block_slices():
    """Checks enclosures on block channels of random finite state channels."""
    for _ in range(10):
        channel = families.random_channel(rng)
        for n in [1, 2, 3]:
            for s0 in range(channel.ns):
                w = fsc.block_channel(channel, n, s0)
                px = random_distribution(w.shape[0], 256)
                value = measures.mutual_information(px, w)
                assert value.contains(reference_mutual_information(px, w)), (
                    f"Expected the reference inside at n={n}, s0={s0}."
                )
                float_value, _ = mutual_information_float(
                    np.array([float(p) for p in px]), w.astype(float)
                )
                assert abs(value.midpoint - float_value) < 1e-9, (
                    "Expected the float evaluation to agree."
                )
                assert value.lo >= -value.width, "Expected I >= 0."
                largest = n * math.log2(min(channel.nx, channel.ny))
                assert value.hi <= largest + 1e-12, (
                    "Expected I <= log2 min(|X|^n, |Y|^n)."
                )


def test_mutual_information_zero_mass_inputs():
    """Checks sparse channels under inputs that leave some outputs unreachable."""
    for _ in range(30):
        channel = families.random_channel(rng, nx=3, ny=3, denominator=2)
        w = fsc.block_channel(channel, 2, 0)
        weights = [q(0)] * w.shape[0]
        chosen = rng.choice(w.shape[0], size=2, replace=False)
        weights[chosen[0]], weights[chosen[1]] = q(1, 4), q(3, 4)
        value = measures.mutual_information(weights, w)
        assert value.contains(reference_mutual_information(weights, w)), (
            "Expected the reference inside."
        )
        float_value, d = mutual_information_float(
            np.array([float(p) for p in weights]), w.astype(float)
        )
        assert np.all(np.isfinite(d)), "Expected finite float divergences."
        assert abs(value.midpoint - float_value) < 1e-9, (
            "Expected the float evaluation to agree."
        )


def test_mutual_information_concavity():
    """Checks that the mixture of two inputs carries at least their average."""
    for _ in range(30):
        w = random_matrix(3, 3)
        first, second = random_distribution(3, 64), random_distribution(3, 64)
        mixture = tuple((a + b) / 2 for a, b in zip(first, second))
        mi_first = measures.mutual_information(first, w)
        mi_second = measures.mutual_information(second, w)
        mi_mixture = measures.mutual_information(mixture, w)
        slack = mi_first.width + mi_second.width + mi_mixture.width
        assert mi_mixture.hi + slack >= (mi_first.lo + mi_second.lo) / 2, (
            "Expected concavity in the input distribution."
        )


def test_relative_entropy():
    """Checks divergence values and the infinite case."""
    dist = (q(1, 2), q(1, 2))
    assert measures.relative_entropy(dist, dist).contains(0), "Expected D(p||p) = 0."
    value = measures.relative_entropy((q(1), q(0)), dist)
    assert value.contains(1), "Expected D(delta||uniform) = 1."
    infinite = measures.relative_entropy(dist, (q(1), q(0)))
    assert infinite.lo == gmpy2.inf(), "Expected an infinite divergence."


def test_conditional_entropy():
    """Checks H(Y|X) of a BSC under any input."""
    value = measures.conditional_entropy((q(1, 3), q(2, 3)), bsc)
    assert value.contains(reference_entropy((q(1, 4), q(3, 4)))), (
        "Expected H(Y|X) = H2(1/4)."
    )


def test_input_distribution():
    """Checks the exact input distribution helpers."""
    px = measures.InputDistribution.from_floats([0.25, 0.75, 0.0], positivity_bits=20)
    assert sum(px.weights) == 1, "Expected exact normalization."
    assert all(w > 0 for w in px.weights), "Expected full support."
    assert abs(px.as_floats() - [0.25, 0.75, 0.0]).max() < 1e-5, (
        "Expected the floats to be close."
    )
    uniform = measures.InputDistribution.uniform(4, n=2)
    assert uniform.to_dict() == {"n": 2, "weights": ["1/4"] * 4}, (
        "Expected a/b weights."
    )
    with pytest.raises(NotADistributionError):
        measures.InputDistribution(n=1, weights=(q(1, 2), q(1, 3)))
