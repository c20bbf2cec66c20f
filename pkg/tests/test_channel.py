"""Tests the channel core."""

import itertools
from fractions import Fraction

import gmpy2
import numpy as np
import pytest

from fsccap.channel import families, fsc
from fsccap.utils import config_helper
from fsccap.utils.exceptions import (
    BudgetError,
    NegativeEntryError,
    ParamRangeError,
    RationalParseError,
    RowSumError,
    ShapeError,
    ShapeMismatchError,
)

files_path = config_helper.ROOT_PATH / "tests" / "files"

qhat = families.build_family("p-qhat", eps="1/4")
qhalf = families.build_family("p-qlambda", eps="1/4", lam="1/2")
qk3 = families.build_family("p-qk", eps="1/4", k=3)


def _fraction(value):
    return Fraction(int(value.numerator), int(value.denominator))


def brute_joint_law(channel, x_seq, s0):
    """Enumerate every output and state path with python fractions."""
    n = len(x_seq)
    law = {}
    for y_seq in itertools.product(range(channel.ny), repeat=n):
        for states in itertools.product(range(channel.ns), repeat=n):
            prob = Fraction(1)
            prev = s0
            for x, y, s in zip(x_seq, y_seq, states):
                prob *= _fraction(channel.p[y, x, prev]) * _fraction(
                    channel.q[s, x, prev]
                )
                prev = s
            key = (y_seq, states[-1])
            law[key] = law.get(key, Fraction(0)) + prob
    return law


def test_parse_rational():
    """Checks that rationals parse exactly and floats are refused."""
    assert fsc.parse_rational("1/4") == gmpy2.mpq(1, 4), "Expected 1/4."
    assert fsc.parse_rational(" 3 ") == gmpy2.mpq(3), "Expected 3."
    assert fsc.parse_rational(Fraction(2, 6)) == gmpy2.mpq(1, 3), "Expected 1/3."
    with pytest.raises(RationalParseError):
        fsc.parse_rational(0.25)
    with pytest.raises(RationalParseError):
        fsc.parse_rational("1/0")
    with pytest.raises(RationalParseError):
        fsc.parse_rational(True)


def test_format_rational():
    """Checks that rationals format as a/b and parse back."""
    value = gmpy2.mpq(2, 100)
    assert fsc.format_rational(value) == "1/50", "Expected reduced a/b string."
    assert fsc.parse_rational(fsc.format_rational(value)) == value, (
        "Expected the string to parse back exactly."
    )


def test_sequence_codes():
    """Checks that the first symbol is the most significant digit."""
    assert fsc.encode_sequence((1, 0, 1), 2) == 5, "Expected 101 in base 2."
    assert fsc.decode_sequence(5, 2, 3) == (1, 0, 1), "Expected (1, 0, 1)."
    assert fsc.decode_sequence(7, 3, 3) == (0, 2, 1), "Expected base 3 digits."


def test_validate_row_sum():
    """Checks that a non-stochastic row names the row."""
    with pytest.raises(RowSumError) as err:
        fsc.load_channel(files_path / "bad_channel.json")
    assert err.value.row == ("p", 0, 0), "Expected the offending row."
    assert err.value.actual == "3/4", "Expected the exact row sum."


def test_validate_negative_and_shape():
    """Checks that negative entries and wrong shapes are rejected."""
    p = qhat.p.copy()
    p[0, 0, 0], p[1, 0, 0] = gmpy2.mpq(-1), gmpy2.mpq(2)
    with pytest.raises(NegativeEntryError):
        fsc.make_fsc(2, 2, 2, p, qhat.q)
    with pytest.raises(ShapeError):
        fsc.make_fsc(2, 2, 2, qhat.p[:, :, :1], qhat.q)
    with pytest.raises(ShapeError):
        fsc.make_fsc(1, 2, 2, qhat.p[:, :1, :], qhat.q[:, :1, :])


def test_channel_json():
    """Checks that the channel file builds the q_hat family."""
    loaded = fsc.load_channel(files_path / "qhat_channel.json")
    assert loaded == qhat, "Expected the file to match the family."
    assert loaded.digest() == qhat.digest(), "Expected equal digests."
    assert fsc.FscParams.from_dict(qhalf.to_dict()) == qhalf, (
        "Expected the serialization to rebuild the channel."
    )


def test_save_channel(tmp_path):
    """Checks that a saved channel loads back."""
    path = tmp_path / "channel.json"
    fsc.save_channel(qk3, path)
    assert fsc.load_channel(path) == qk3, "Expected the saved channel back."


def test_tensors_read_only():
    """Checks that validated tensors cannot be modified."""
    with pytest.raises(ValueError):
        qhat.p[0, 0, 0] = gmpy2.mpq(0)


def test_output_block_law():
    """Checks the two-letter output law of {p(1/4), q_lambda(1/2)}."""
    law = fsc.output_block_law(qhalf, (0, 0), 0)
    assert law == {
        (0, 0): gmpy2.mpq(7, 8),
        (0, 1): gmpy2.mpq(1, 8),
        (1, 0): gmpy2.mpq(0),
        (1, 1): gmpy2.mpq(0),
    }, "Expected a noiseless first letter and a half-noisy second letter."


def test_joint_block_law_mass():
    """Checks that the block law is a distribution."""
    law = fsc.joint_block_law(qk3, (1, 0, 1), 1)
    assert law.total() == 1, "Expected total mass 1."
    assert law.table.shape == (8, 2), "Expected 2^3 outputs by 2 states."


def test_joint_block_law_brute_force():
    """Checks the block law against path enumeration on random channels."""
    rng = np.random.default_rng(7)
    for _ in range(5):
        channel = families.random_channel(rng)
        for n in range(1, 4):
            for x_seq in itertools.product(range(2), repeat=n):
                for s0 in range(2):
                    law = fsc.joint_block_law(channel, x_seq, s0).as_dict()
                    oracle = brute_joint_law(channel, x_seq, s0)
                    assert {k: _fraction(v) for k, v in law.items()} == oracle, (
                        f"Expected path enumeration at x={x_seq}, s0={s0}."
                    )


@pytest.mark.slow
def test_joint_block_law_brute_force_suite():
    """Checks the block law against path enumeration on 50 channels up to n=4."""
    rng = np.random.default_rng(2024)
    for _ in range(50):
        channel = families.random_channel(rng)
        for n in range(1, 5):
            for x_seq in itertools.product(range(2), repeat=n):
                for s0 in range(2):
                    law = fsc.joint_block_law(channel, x_seq, s0).as_dict()
                    oracle = brute_joint_law(channel, x_seq, s0)
                    assert {k: _fraction(v) for k, v in law.items()} == oracle, (
                        f"Expected path enumeration at x={x_seq}, s0={s0}."
                    )


def test_block_law_zero_length():
    """Checks that an empty input block is rejected."""
    with pytest.raises(ParamRangeError):
        fsc.joint_block_law(qhat, (), 0)
    with pytest.raises(ParamRangeError):
        fsc.joint_block_law(qhat, (0, 2), 0)


def test_state_kernel():
    """Checks q_k(3) after two steps and the agreement of both kernels."""
    kernel = fsc.state_kernel(qk3, (0, 0), 0)
    assert kernel == (gmpy2.mpq(5, 8), gmpy2.mpq(3, 8)), "Expected (5/8, 3/8)."
    rng = np.random.default_rng(11)
    channel = families.random_channel(rng)
    for x_seq in itertools.product(range(2), repeat=3):
        for s0 in range(2):
            assert fsc.state_kernel(channel, x_seq, s0) == fsc.state_kernel(
                channel, x_seq, s0, kernel="marginal"
            ), "Expected the transition and marginal kernels to agree."


def test_block_channel():
    """Checks that block channel rows are the output block laws."""
    w = fsc.block_channel(qhalf, 3, 1)
    assert w.shape == (8, 8), "Expected an 8x8 block channel."
    for x_code in range(8):
        x_seq = fsc.decode_sequence(x_code, 2, 3)
        law = fsc.output_block_law(qhalf, x_seq, 1)
        for y_seq, prob in law.items():
            assert w[x_code, fsc.encode_sequence(y_seq, 2)] == prob, (
                f"Expected row {x_seq} to match the output law."
            )


def test_block_channel_cap():
    """Checks that oversized block channels raise a budget error."""
    with pytest.raises(BudgetError):
        fsc.block_channel(qhat, 3, 0, cell_cap=63)


def test_distance_identity():
    """Checks that d(q_hat, q_k) = 2 / (k + 1) exactly."""
    for k in range(1, 101):
        channel = families.build_family("p-qk", eps="1/4", k=k)
        for s0 in range(2):
            assert fsc.distance(qhat, channel, s0) == gmpy2.mpq(2, k + 1), (
                f"Expected 2/(k+1) at k={k}."
            )


@pytest.mark.parametrize("seed", range(5))
def test_distance_properties(seed):
    """Checks symmetry, nonnegativity and zero exactly on matching slices."""
    rng = np.random.default_rng(seed)
    first = families.random_channel(rng)
    second = families.random_channel(rng)
    for s0 in range(2):
        d = fsc.distance(first, second, s0)
        assert d == fsc.distance(second, first, s0), "Expected symmetry."
        assert d >= 0, "Expected a nonnegative distance."
        assert fsc.distance(first, first, s0) == 0, "Expected d(a, a) = 0."
        matches = np.array_equal(
            first.p[:, :, s0], second.p[:, :, s0]
        ) and np.array_equal(first.q[:, :, s0], second.q[:, :, s0])
        assert (d == 0) == matches, "Expected zero only for matching slices."

        p, q = second.p.copy(), second.q.copy()
        p[:, :, s0], q[:, :, s0] = first.p[:, :, s0], first.q[:, :, s0]
        grafted = fsc.make_fsc(2, 2, 2, p, q)
        assert fsc.distance(first, grafted, s0) == 0, (
            "Expected zero when only the other state's slices differ."
        )


@pytest.mark.parametrize("seed", range(5))
def test_state_kernels_agree(seed):
    """Checks the transition and marginal kernels entry by entry up to n=5."""
    rng = np.random.default_rng(100 + seed)
    channel = families.random_channel(rng)
    for n in range(1, 6):
        for x_seq in itertools.product(range(2), repeat=n):
            for s0 in range(2):
                transition = fsc.state_kernel(channel, x_seq, s0)
                marginal = fsc.state_kernel(channel, x_seq, s0, kernel="marginal")
                assert transition == marginal, (
                    f"Expected equal kernels at x={x_seq}, s0={s0}."
                )
                assert sum(transition) == 1, "Expected a distribution."


def test_distance_mismatch():
    """Checks that channels with different alphabets cannot be compared."""
    wide = families.build_family("p-qhat", eps="1/4", ny=3)
    with pytest.raises(ShapeMismatchError):
        fsc.distance(qhat, wide, 0)


def test_independence_predicates():
    """Checks the state-independent output and input-independent transition."""
    bsc = families.build_family("bsc", eps="1/4")
    assert fsc.is_state_independent_output(bsc), "Expected bsc to ignore the state."
    assert not fsc.is_state_independent_output(qhat), "Expected p to use the state."
    assert fsc.is_input_independent_transition(qhat), "Expected q_hat to ignore x."


def test_families():
    """Checks the family relations and parameter ranges."""
    assert families.build_family("p-qlambda", eps="1/4", lam="0") == qhat, (
        "Expected q_0 to be q_hat."
    )
    assert families.build_family("p-qk", eps="1/4", k=1) == qhalf, (
        "Expected q_1 to be q_lambda(1/2)."
    )
    padded = families.build_family("p-qk", eps="1/4", k=3, nx=3, ny=3, ns=3)
    assert padded.q[2, 0, 0] == 0, "Expected padded states to stay unreachable."
    with pytest.raises(ParamRangeError):
        families.build_family("p-qhat", eps="1/2")
    with pytest.raises(ParamRangeError):
        families.build_family("p-qlambda", eps="1/4", lam="3/4")
    with pytest.raises(ParamRangeError):
        families.build_family("p-qk", eps="1/4", k=0)
    with pytest.raises(ParamRangeError):
        families.build_family("unknown", eps="1/4")
