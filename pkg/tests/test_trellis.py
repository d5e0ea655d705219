from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import reference_code
from turbobec.algebra import iter_subspaces, poly_mul
from turbobec.pccc import hamming74, toy_constituent
from turbobec.trellis import (
    ConvCodeSpec,
    NonCanonicalError,
    build_extended_module,
    build_minimal_module,
    dump_module,
    format_poly_octal,
    formula_dims,
    module_complexity,
    parse_poly,
    sectionalize_info,
    unroll,
)
from turbobec.uniform import terminated_code


def test_parse_poly_conventions():
    assert parse_poly("13") == 0b1101  # 1 + D^2 + D^3
    assert parse_poly("1+D+D^2") == 0b111
    assert parse_poly("1 + D^3") == 0b1001
    assert parse_poly("0") == 0
    with pytest.raises(ValueError):
        parse_poly("1+X")


@given(st.integers(0, 1 << 12).map(lambda x: 2 * x + 1))
def test_octal_roundtrip(p):
    assert parse_poly(format_poly_octal(p)) == p


@pytest.mark.parametrize("nu", [2, 3, 4, 5])
def test_layer_dims_match_rank_formulas(nu):
    spec = reference_code(nu)
    m = build_minimal_module(spec)
    layers, edges = formula_dims(spec)
    assert list(m.layer_dims) == layers
    assert m.edge_dims() == edges


def test_hamming_module_shape():
    h = hamming74()
    m = build_minimal_module(h)
    assert list(m.layer_dims) == formula_dims(h)[0]
    assert sectionalize_info(m).section_lengths == (1, 1, 1, 4)


def _terminated_words_brute(spec: ConvCodeSpec, L: int) -> set[int]:
    """Sequences of L sections with H(D) v(D) = 0 exactly, by exhaustion."""
    n = spec.n
    out = set()
    for bits in product((0, 1), repeat=n * L):
        cols = [sum(bits[t * n + j] << t for t in range(L)) for j in range(n)]
        if all(not _row_syndrome(row, cols) for row in spec.parity_check):
            out.add(sum(b << i for i, b in enumerate(bits)))
    return out


def _row_syndrome(row, cols) -> int:
    s = 0
    for h, v in zip(row, cols):
        s ^= poly_mul(h, v)
    return s


def _zero_paths(t, L) -> set[int]:
    out = set()
    stack = [(0, 0, 0)]
    while stack:
        d, v, word = stack.pop()
        if d == L:
            if v == 0:
                out.add(word)
            continue
        for (l, r, label, _inp, _dim) in t.edges[d]:
            if l == v:
                w = word
                for q, bit in enumerate(label):
                    w |= bit << (t.label_offsets[d] + q)
                stack.append((d + 1, r, w))
    return out


@pytest.mark.parametrize("spec", [toy_constituent(), reference_code(3)], ids=["nu2", "nu3"])
@pytest.mark.parametrize("L", [3, 5])
def test_minimal_trellis_paths_are_terminated_codewords(spec, L):
    t = unroll(build_minimal_module(spec), L)
    assert _zero_paths(t, L) == _terminated_words_brute(spec, L)


@pytest.mark.parametrize("L", [3, 5])
def test_extended_paths_are_subcode_supports(L):
    spec = toy_constituent()
    t = unroll(build_extended_module(sectionalize_info(build_minimal_module(spec))), L)
    gens = terminated_code(spec, L).generators
    supports = set()
    for coords in iter_subspaces(len(gens)):
        s = 0
        for c in coords:
            word = 0
            for i, g in enumerate(gens):
                if (c >> i) & 1:
                    word ^= g
            s |= word
        supports.add(s)
    assert _zero_paths(t, L) == supports


def test_complexity_nu2():
    m = sectionalize_info(build_minimal_module(reference_code(2)))
    assert module_complexity(m) == (4, 8)
    ext = build_extended_module(m)
    assert module_complexity(ext) == (5, 16)
    assert module_complexity(ext, deduplicated=False) == (5, 16)


def test_pruning_drops_high_dimensional_edges():
    m = sectionalize_info(build_minimal_module(reference_code(3)))
    full = build_extended_module(m)
    pruned = build_extended_module(m, prune_alpha=2)
    assert all(e.dim < 2 for es in pruned.edges for e in es)
    assert module_complexity(pruned)[1] < module_complexity(full)[1]
    with pytest.raises(ValueError):
        build_extended_module(m, prune_alpha=1)


@pytest.mark.parametrize(
    "rows, reason",
    [
        ([["1+D", "1+D^2"]], "basic"),  # common factor 1+D
        ([["0", "0"]], "zero row"),
    ],
)
def test_noncanonical_rejected(rows, reason):
    with pytest.raises(NonCanonicalError, match=reason):
        ConvCodeSpec.from_strings(rows).validate()


def test_canonical_accepted():
    toy_constituent().validate()
    hamming74().validate()


def test_dump_is_deterministic():
    m = build_minimal_module(toy_constituent())
    assert dump_module(m) == dump_module(build_minimal_module(toy_constituent()))
    assert dump_module(build_extended_module(sectionalize_info(m))).startswith("extended-module")
