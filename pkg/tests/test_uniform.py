from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import reference_code
from turbobec.algebra import EnumFn, Poly, iter_subspaces
from turbobec.pccc import hamming74, toy_constituent
from turbobec.uniform import (
    detour_tally,
    format_enumfn,
    irtssef_uniform,
    parse_enumfn,
    sirsef_block,
    sirsef_conv,
    sirsef_from_supports,
    terminated_code,
    tssef,
)

HAMMING_SIRSEF = EnumFn(
    {(1, 2): 3, (1, 3): 1, (2, 1): 3, (2, 2): 3, (2, 3): 6, (3, 0): 1, (3, 1): 3, (3, 2): 12, (3, 3): 4, (4, 1): 3, (4, 2): 3, (4, 3): 1}
)


def subspace_supports(tc):
    """Supports of all nonzero subcodes, by explicit subspace enumeration."""
    out = set()
    for coords in iter_subspaces(tc.dimension):
        if not coords:
            continue
        s = 0
        for c in coords:
            w = 0
            for i, g in enumerate(tc.generators):
                if (c >> i) & 1:
                    w ^= g
            s |= w
        out.add(s)
    return out


def test_hamming_sirsef():
    assert sirsef_block(hamming74()) == HAMMING_SIRSEF


@pytest.mark.parametrize("spec, sections", [(hamming74(), None), (toy_constituent(), 4), (toy_constituent(), 6), (reference_code(3), 6)])
def test_union_closure_matches_subspace_enumeration(spec, sections):
    tc = terminated_code(spec, sections)
    assert sirsef_block(tc) == sirsef_from_supports(subspace_supports(tc), tc.systematic_mask)


def test_codeword_mode_counts_codewords():
    f = sirsef_block(hamming74(), mode="codeword")
    assert sum(c for _k, c in f.items()) == 15
    full = sirsef_block(hamming74())
    assert all(full.coefficient(w, z) >= c for (w, z), c in f.items())


def test_hamming_uniform_tssef_and_wef():
    A = sirsef_block(hamming74())
    S = irtssef_uniform(A, A, 4)
    assert tssef(S) == Poly({3: Fraction(1, 4), 4: 3, 5: Fraction(27, 2), 6: 38, 7: Fraction(265, 4), 8: 45, 9: 10, 10: 1})
    Ac = sirsef_block(hamming74(), mode="codeword")
    wef = tssef(irtssef_uniform(Ac, Ac, 4), mode="codeword")
    assert wef == Poly({0: 1, 3: Fraction(1, 4), 4: 3, 5: Fraction(15, 2), 6: 3, 7: Fraction(1, 4), 10: 1})


@pytest.mark.parametrize("I", [2, 3, 4, 5, 6])
def test_conv_detours_match_terminated_block(I):
    toy = toy_constituent()
    block = sirsef_block(toy, I)
    for max_total in (5, 8, 2 * I):
        assert sirsef_conv(toy, I, max_total) == block.truncate(max_total)
        assert sirsef_conv(toy, I, max_total, exact=True) == block.truncate(max_total)


def test_conv_detours_nu3():
    spec = reference_code(3)
    for I in (4, 6):
        assert sirsef_conv(spec, I, 2 * I, exact=True) == sirsef_block(spec, I)


def test_detour_tally_counts_single_detours():
    t = detour_tally(toy_constituent(), 6, 12)
    # the shortest nonzero path of 1+D^2 / 1+D+D^2 has length 3 and input weight 3 or 2
    singles = {k: v for k, v in t.items() if k[3] == 1 and k[2] == 3}
    assert singles and all(w + z <= 6 for (w, z, _g, _s) in singles)


def test_conv_requires_k1_and_memory():
    with pytest.raises(ValueError):
        sirsef_conv(hamming74(), 4, 10)


def test_tssef_mode_check():
    with pytest.raises(ValueError):
        tssef(EnumFn(), mode="weights")


@given(st.dictionaries(st.tuples(st.integers(0, 6), st.integers(0, 6)), st.fractions(), max_size=8))
def test_enumfn_text_roundtrip(terms):
    f = EnumFn(terms)
    assert parse_enumfn(format_enumfn(f)) == f


def test_parse_enumfn_rejects_bad_record():
    with pytest.raises(ValueError, match="line 2"):
        parse_enumfn("1 2 3 4\n1 2 3\n")
