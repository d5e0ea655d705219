import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from turbobec.pccc import (
    SpecFormatError,
    TerminationUnsupported,
    TurboCodeSpec,
    drp_interleaver,
    dual_terminate,
    encode,
    format_code_spec,
    format_interleaver,
    hamming74,
    hamming_spec,
    load_code_spec,
    load_interleaver,
    make_turbo_code,
    toy_constituent,
    toy_spec,
)
from turbobec.stopsets import is_turbo_stopping_set

TOY_PERM = (3, 5, 1, 4, 0, 2)


def _rsc_parity(u):
    """Parity of the recursive encoder p (1 + D + D^2) = u (1 + D^2); returns (parity, final state)."""
    s1 = s2 = 0  # feedback register
    out = []
    for b in u:
        a = b ^ s1 ^ s2
        out.append(a ^ s2)
        s1, s2 = a, s1
    return out, (s1, s2)


def _toy_codewords_by_hand():
    """All toy codewords, built with a hand-written encoder and multiplexer."""
    words = {}
    for x in range(64):
        u = [(x >> i) & 1 for i in range(6)]
        ub = [0] * 6
        for i, j in enumerate(TOY_PERM):
            ub[j] = u[i]
        pa, sa = _rsc_parity(u)
        pb, sb = _rsc_parity(ub)
        if sa != (0, 0) or sb != (0, 0):
            continue
        word = []
        for j in range(6):
            word.append(u[j])
            word.append(pa[j] if j % 2 == 0 else pb[j])
        words[tuple(u)] = word
    return words


def test_toy_geometry(toy):
    assert (toy.N, toy.maps.N_a, toy.maps.N_b, toy.I) == (12, 9, 9, 6)
    assert toy.maps.mu_a[3] is None
    assert toy.min_distance() == 5


def test_toy_codewords_match_hand_encoder(toy):
    hand = _toy_codewords_by_hand()
    assert len(hand) == 4
    got = {tuple(int(b) for b in encode(info, toy)) for info in ([0, 0], [1, 0], [0, 1], [1, 1])}
    assert got == {tuple(w) for w in hand.values()}
    info_pos = toy.info_positions
    for info in ([1, 0], [0, 1], [1, 1]):
        u = dual_terminate(info, toy)
        assert [u[p] for p in info_pos] == info
        assert list(encode(info, toy)) == hand[tuple(u)]


def test_toy_example_words(toy):
    assert "".join(map(str, encode([1, 0], toy))) == "111111000001"
    assert "".join(map(str, encode([0, 1], toy))) == "000100111010"


def test_zero_info_gives_zero(toy):
    assert dual_terminate([0, 0], toy) == [0] * 6
    assert not encode([0, 0], toy).any()


def test_end_tail_is_singular_for_toy_interleaver():
    spec = TurboCodeSpec(toy_constituent(), 2, TOY_PERM, (1, 0), (0, 1), tail_positions="end")
    with pytest.raises(TerminationUnsupported):
        make_turbo_code(spec)


def test_identity_interleaver_cannot_dual_terminate():
    # both encoders see the same input, so the two termination systems coincide
    with pytest.raises(TerminationUnsupported):
        make_turbo_code(TurboCodeSpec(toy_constituent(), 2, tuple(range(6)), (1, 0), (0, 1), tail_positions="auto"))


def test_end_tail_terminates_both_encoders():
    code = make_turbo_code(TurboCodeSpec(toy_constituent(), 2, (0, 1, 3, 2, 5, 4), (1, 0), (0, 1)))
    for info in ([1, 0], [0, 1]):
        u = dual_terminate(info, code)
        assert u[:2] == info
        assert code.run_encoder(u)[1] == 0
        assert code.run_encoder(code.interleave(u))[1] == 0


def test_hamming_pccc(ham_id):
    assert ham_id.N == 10
    assert ham_id.min_distance() == 3
    assert dual_terminate([1, 0, 1, 1], ham_id) == [1, 0, 1, 1]


@settings(max_examples=30)
@given(st.lists(st.integers(0, 1), min_size=2, max_size=2), st.lists(st.integers(0, 1), min_size=2, max_size=2))
def test_encoder_is_linear(a, b):
    code = make_turbo_code(toy_spec())
    s = [x ^ y for x, y in zip(a, b)]
    assert np.array_equal(encode(s, code), encode(a, code) ^ encode(b, code))


def test_codeword_supports_are_stopping_sets(toy):
    for c in toy.codewords()[1:]:
        assert is_turbo_stopping_set(toy, [p for p in range(toy.N) if (c >> p) & 1])


def test_invalid_interleaver_rejected():
    with pytest.raises(ValueError):
        make_turbo_code(hamming_spec((0, 1, 1, 3)))


def test_spec_file_roundtrip(tmp_path):
    spec = toy_spec()
    path = tmp_path / "toy.spec"
    path.write_text(format_code_spec(spec))
    back = load_code_spec(path)
    assert back == spec
    assert format_code_spec(back) == path.read_text()


def test_spec_file_with_parity_check(tmp_path):
    path = tmp_path / "code.spec"
    path.write_text("# rate 1/3\nparity_check = 5 7\nK = 4\ninterleaver = 7 2 5 0 3 6 1 4\n")
    spec = load_code_spec(path)
    assert spec.constituent.parity_check == ((0b101, 0b111),)
    assert make_turbo_code(spec).N == 3 * 8


def test_spec_file_errors_carry_line(tmp_path):
    path = tmp_path / "bad.spec"
    path.write_text("constituent = toy\nK = two\ninterleaver = 0 1 2 3 4 5\n")
    with pytest.raises(SpecFormatError) as err:
        load_code_spec(path)
    assert err.value.line == 2 and str(path) in str(err.value)
    path.write_text("constituent = toy\nbogus = 1\n")
    with pytest.raises(SpecFormatError, match=":2:"):
        load_code_spec(path)


def test_interleaver_file(tmp_path):
    path = tmp_path / "pi.txt"
    path.write_text(format_interleaver(TOY_PERM))
    assert load_interleaver(path) == TOY_PERM
    path.write_text("0 2 2\n")
    with pytest.raises(SpecFormatError):
        load_interleaver(path)


def test_drp_is_permutation():
    perm = drp_interleaver(64, 13, [3, 0, 1, 2], [1, 3, 0, 2])
    assert sorted(perm) == list(range(64))


def test_hamming_constituent_is_systematic_block_code():
    h = hamming74()
    assert (h.n, h.k, h.nu) == (7, 4, 0)
