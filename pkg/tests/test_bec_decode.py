import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bits, decoder_failure_exceptions
from turbobec.bec_decode import (
    ERASED,
    ChannelContractViolated,
    ReceivedWord,
    Status,
    _runs,
    bec_transmit,
    improved_decode,
    ml_decode_oracle,
    turbo_decode,
)
from turbobec.pccc import make_turbo_code, toy_spec
from turbobec.stopsets import brute_force_stopping_sets

TOY = make_turbo_code(toy_spec())
CODEWORDS = TOY.codewords()
patterns = st.integers(0, (1 << 12) - 1)
cw_index = st.integers(0, 3)


@given(st.lists(st.sampled_from([0, 1, ERASED]), max_size=20))
def test_received_word_text_roundtrip(symbols):
    rw = ReceivedWord(np.array(symbols, dtype=np.int8))
    assert ReceivedWord.parse(str(rw)) == rw


def test_received_word_rejects_bad_symbols():
    with pytest.raises(ValueError):
        ReceivedWord(np.array([0, 2]))
    with pytest.raises(ValueError):
        ReceivedWord.parse("01x")


def test_no_erasures_recovers_in_one_iteration(toy):
    cw = bits(CODEWORDS[1], 12)
    out = turbo_decode(ReceivedWord.from_codeword(cw), toy)
    assert out.status is Status.RECOVERED and out.iterations == 1
    assert list(out.codeword) == cw


def test_all_erased_stalls(toy):
    out = turbo_decode(ReceivedWord.from_codeword([0] * 12, (1 << 12) - 1), toy)
    assert out.status is Status.STALLED
    assert out.residual == frozenset(range(12))


@settings(max_examples=200)
@given(cw_index, patterns)
def test_decoders_never_emit_wrong_bits(i, E):
    cw = bits(CODEWORDS[i], 12)
    rx = ReceivedWord.from_codeword(cw, E)
    for out in (turbo_decode(rx, TOY), improved_decode(rx, TOY), improved_decode(rx, TOY, l_max=2)):
        assert all(x == ERASED or x == y for x, y in zip(out.estimate.to_list(), cw))


@settings(max_examples=200)
@given(cw_index, patterns)
def test_improved_matches_ml(i, E):
    rx = ReceivedWord.from_codeword(bits(CODEWORDS[i], 12), E)
    a, b = improved_decode(rx, TOY), ml_decode_oracle(rx, TOY)
    assert a.status == b.status
    assert a.estimate == b.estimate


@settings(max_examples=100)
@given(cw_index, patterns)
def test_improved_dominates_basic(i, E):
    rx = ReceivedWord.from_codeword(bits(CODEWORDS[i], 12), E)
    basic = turbo_decode(rx, TOY)
    for disc in ("lifo", "fifo"):
        imp = improved_decode(rx, TOY, discipline=disc)
        assert imp.residual <= basic.residual


def test_emit_codeword_returns_consistent_codeword(toy):
    E = 0b111111111111 ^ 0b000000000011
    rx = ReceivedWord.from_codeword([0] * 12, E)
    out = improved_decode(rx, toy, emit_codeword=True)
    assert out.status is Status.RECOVERED
    word = int("".join(map(str, out.codeword[::-1])), 2)
    assert word in CODEWORDS and all(out.codeword[p] == 0 for p in range(2))


def test_budget_exhaustion_keeps_root_estimate(toy):
    rx = ReceivedWord.from_codeword([0] * 12, (1 << 12) - 1)
    out = improved_decode(rx, toy, l_max=1)
    assert out.status is Status.BUDGET_EXHAUSTED
    assert out.estimate == rx


def test_inconsistent_word_raises(toy):
    word = bits(CODEWORDS[1], 12)
    word[0] ^= 1
    rx = ReceivedWord.from_codeword(word)
    with pytest.raises(ChannelContractViolated):
        turbo_decode(rx, toy)
    with pytest.raises(ChannelContractViolated):
        ml_decode_oracle(rx, toy)


def test_length_mismatch_rejected(toy):
    with pytest.raises(ValueError):
        turbo_decode(ReceivedWord.from_codeword([0] * 5), toy)


def test_channel_extremes():
    cw = [1, 0, 1, 1]
    assert bec_transmit(cw, 0.0, 1).erasures == frozenset()
    assert bec_transmit(cw, 1.0, 1).erasures == frozenset(range(4))
    assert bec_transmit(cw, 0.5, 7) == bec_transmit(cw, 0.5, 7)
    with pytest.raises(ValueError):
        bec_transmit(cw, 1.5)


def test_selection_runs():
    # profile 1,2,2,2,1: one forward run of length 2 starting after depth 0
    assert _runs([1, 2, 2, 2, 1]) == (1, 2, 1, 2, 3)
    assert _runs([1, 1, 1]) == (0, -1, None, -1, None)


@pytest.mark.parametrize("perm", [(0, 1, 2, 3), (3, 2, 1, 0), (1, 3, 0, 2)])
def test_residual_is_maximal_stopping_set_hamming(perm):
    from turbobec.pccc import hamming_spec

    code = make_turbo_code(hamming_spec(perm))
    assert decoder_failure_exceptions(code, brute_force_stopping_sets(code, code.N)) == 0
