"""Support-size enumerating functions and uniform-interleaver averages.

A *subcode class* is a distinct support set of a nonzero linear subcode;
the set of such supports is exactly the set of unions of codeword
supports.  ``a[w, z]`` counts classes with ``w`` systematic and ``z``
parity positions.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Sequence

from .algebra import EnumFn, Poly, binomial, popcount, solve_gf2
from .stopsets import brute_force_stopping_sets, maximal_supported_subcode
from .trellis import ConvCodeSpec, build_extended_module, build_minimal_module, sectionalize_info, unroll

__all__ = [
    "terminated_code",
    "sirsef_block",
    "sirsef_from_supports",
    "sirsef_conv",
    "detour_tally",
    "irtssef_uniform",
    "tssef",
    "interleaver_average_oracle",
    "InterleaverClass",
    "format_enumfn",
    "parse_enumfn",
]


class TerminatedCode:
    """Zero-to-zero terminated block code of a constituent, unpunctured.

    Bits are laid out section by section; ``systematic_mask`` marks the
    first bit of every section.
    """

    def __init__(self, spec: ConvCodeSpec, sections: int | None = None):
        m = sectionalize_info(build_minimal_module(spec))
        if sections is None:
            sections = m.depth if spec.nu == 0 else None
        if sections is None or sections % m.depth:
            raise ValueError("number of sections must be a positive multiple of k")
        self.module = m
        self.sections = sections
        trans = [{(e.left, e.input): (e.right, e.label) for e in es} for es in m.edges]
        self.offsets = []
        pos = 0
        sys_mask = 0
        for j in range(sections):
            self.offsets.append(pos)
            sys_mask |= 1 << pos
            pos += m.section_lengths[j % m.depth]
        self.length = pos
        self.systematic_mask = sys_mask

        def run(u):
            s, word = 0, 0
            for j, b in enumerate(u):
                s, lab = trans[j % m.depth][(s, b)]
                for q, bit in enumerate(lab):
                    if bit:
                        word |= 1 << (self.offsets[j] + q)
            return s, word

        finals, words = [], []
        for i in range(sections):
            u = [0] * sections
            u[i] = 1
            s, w = run(u)
            finals.append(s)
            words.append(w)
        rows = [sum(((finals[i] >> r) & 1) << i for i in range(sections)) for r in range(m.state_width)]
        _, kernel = solve_gf2(rows, 0, sections)
        gens = []
        for k in kernel:
            w = 0
            for i in range(sections):
                if (k >> i) & 1:
                    w ^= words[i]
            gens.append(w)
        self.generators = tuple(gens)

    @property
    def dimension(self) -> int:
        return len(self.generators)

    def codewords(self) -> list[int]:
        out = [0]
        for g in self.generators:
            out += [c ^ g for c in out]
        return out

    def split(self, support: int) -> tuple[int, int]:
        return popcount(support & self.systematic_mask), popcount(support & ~self.systematic_mask)


def terminated_code(spec: ConvCodeSpec, sections: int | None = None) -> TerminatedCode:
    return TerminatedCode(spec, sections)


def _union_closure(supports: Iterable[int]) -> set[int]:
    closure: set[int] = set()
    for c in set(supports):
        if c:
            closure |= {x | c for x in closure}
            closure.add(c)
    return closure


def sirsef_from_supports(supports: Iterable[int], systematic_mask: int) -> EnumFn:
    counts: dict[tuple[int, int], int] = defaultdict(int)
    for s in supports:
        counts[(popcount(s & systematic_mask), popcount(s & ~systematic_mask))] += 1
    return EnumFn.from_counts(counts)


def sirsef_block(constituent, sections: int | None = None, mode: str = "stopping", max_dim: int = 16) -> EnumFn:
    """SIRSEF of a block code (or of a convolutional code terminated after ``sections``).

    ``mode="codeword"`` counts only one-dimensional subcodes, i.e. nonzero
    codewords, which gives the input-redundancy weight enumerator.
    """
    tc = constituent if isinstance(constituent, TerminatedCode) else TerminatedCode(constituent, sections)
    if tc.dimension > max_dim:
        raise ValueError(f"dimension {tc.dimension} exceeds the exhaustive limit {max_dim}")
    words = [c for c in tc.codewords() if c]
    if mode == "codeword":
        return sirsef_from_supports(words, tc.systematic_mask)
    if mode != "stopping":
        raise ValueError("mode must be 'stopping' or 'codeword'")
    return sirsef_from_supports(_union_closure(words), tc.systematic_mask)


# ----------------------------------------------------------------------------
# convolutional constituents: detour compounds with binomial placement


def _irreducible_detours(spec: ConvCodeSpec, max_len: int, max_total: int) -> list[tuple[int, int, int, int]]:
    """Distinct supports of subcodes spanning exactly ``[0, gamma)`` with no internal zero state.

    Returns ``(gamma, support, w, z)`` tuples.  A support is irreducible when
    its maximal subcode does not split at any interior depth.
    """
    ext = build_extended_module(sectionalize_info(build_minimal_module(spec)))
    t = unroll(ext, max_len)
    lengths = t.section_lengths
    offs = t.label_offsets
    found: set[tuple[int, int]] = set()
    # DFS over paths that leave zero at depth 0 and stay off zero until they return
    stack = [(0, 0, 0)]  # (depth, vertex, label support)
    while stack:
        d, v, lab = stack.pop()
        if d == max_len:
            continue
        for (l, r, label, _inp, _dim) in t.edges[d]:
            if l != v:
                continue
            nl = lab
            for q, bit in enumerate(label):
                if bit:
                    nl |= 1 << (offs[d] + q)
            if d == 0 and r == 0 and not nl:
                continue
            if popcount(nl) > max_total:
                continue
            if r == 0:
                if nl and (d == 0 or v != 0):
                    found.add((d + 1, nl))
                continue
            stack.append((d + 1, r, nl))
    codes: dict[int, TerminatedCode] = {}
    out = []
    for gamma, supp in sorted(found):
        tc = codes.get(gamma) or codes.setdefault(gamma, TerminatedCode(spec, gamma))
        if not _spans(supp, tc, gamma) or _splits(supp, tc):
            continue
        w, z = tc.split(supp)
        out.append((gamma, supp, w, z))
    return out


def _spans(supp: int, tc: TerminatedCode, gamma: int) -> bool:
    first = (1 << (tc.offsets[1] if gamma > 1 else tc.length)) - 1
    last_off = tc.offsets[gamma - 1]
    return bool(supp & first) and bool(supp >> last_off)


def _max_dim(tc: TerminatedCode, X: int) -> int:
    return maximal_supported_subcode(tc.generators, X)[1]


def _splits(supp: int, tc: TerminatedCode) -> bool:
    full = _max_dim(tc, supp)
    for d in range(1, tc.sections):
        cut = (1 << tc.offsets[d]) - 1
        if _max_dim(tc, supp & cut) + _max_dim(tc, supp & ~cut) == full:
            return True
    return False


def detour_tally(spec: ConvCodeSpec, I: int, max_total: int) -> dict[tuple[int, int, int, int], int]:
    """``t[w, z, gamma, sigma]``: ordered back-to-back sequences of ``sigma`` irreducible detours."""
    dets = _irreducible_detours(spec, I, max_total)
    tally: dict[tuple[int, int, int, int], int] = defaultdict(int)
    # states: (w, z, gamma, sigma) -> count, grown one detour at a time
    frontier = {(0, 0, 0, 0): 1}
    while frontier:
        nxt: dict[tuple[int, int, int, int], int] = defaultdict(int)
        for (w, z, g, s), n in frontier.items():
            for (dg, _supp, dw, dz) in dets:
                key = (w + dw, z + dz, g + dg, s + 1)
                if key[2] <= I and key[0] + key[1] <= max_total:
                    nxt[key] += n
        for k, n in nxt.items():
            tally[k] += n
        frontier = nxt
    return dict(tally)


def _exact_placements(spec: ConvCodeSpec, I: int, max_total: int) -> EnumFn:
    """Count placed compounds, allowing a zero gap only where the adjoining detours do not bridge."""
    dets = _irreducible_detours(spec, I, max_total)
    counts: dict[tuple[int, int], int] = defaultdict(int)
    codes: dict[int, TerminatedCode] = {}

    def code(g):
        return codes.get(g) or codes.setdefault(g, TerminatedCode(spec, g))

    def shifted(supp, g_from, by):
        # move a support that starts at depth 0 to start at depth ``by`` (k=1 layout)
        return supp << code(g_from + by).offsets[by] if by else supp

    # grow sequences of placed detours left to right; track the current run of
    # back-to-back detours so bridging can be tested
    def rec(pos, w, z, run_supp, run_len, run_dims):
        for (dg, supp, dw, dz) in dets:
            if w + z + dw + dz > max_total:
                continue
            for gap in range(0, I - pos - dg + 1):
                if pos == 0 and gap == 0 and run_len == 0:
                    pass
                start = pos + gap
                if start + dg > I:
                    break
                if gap == 0 and run_len > 0:
                    new_len = run_len + dg
                    new_supp = run_supp | shifted(supp, dg, run_len)
                    new_dims = run_dims + _max_dim(code(dg), supp)
                    if _max_dim(code(new_len), new_supp) != new_dims:
                        continue  # bridged: this union is a different irreducible detour
                else:
                    new_len, new_supp, new_dims = dg, supp, _max_dim(code(dg), supp)
                counts[(w + dw, z + dz)] += 1
                rec(start + dg, w + dw, z + dz, new_supp, new_len, new_dims)

    rec(0, 0, 0, 0, 0, 0)
    return EnumFn.from_counts(counts)


def sirsef_conv(spec: ConvCodeSpec, I: int, max_total: int, exact: bool = False) -> EnumFn:
    """Truncated SIRSEF of a terminated ``(n, 1, nu)`` code from extended-trellis detours.

    Each ordered sequence of ``sigma`` irreducible detours of total length
    ``gamma`` is weighted by the ``C(I - gamma + sigma, sigma)`` ways of
    placing it in ``I`` sections.  With ``exact=True`` placements are
    enumerated individually and a zero gap is allowed only where the two
    neighbouring detours do not merge into a larger irreducible support;
    that count always equals the terminated-code SIRSEF.
    """
    if spec.k != 1:
        raise ValueError("detour placement assumes one input bit per section (k = 1)")
    if spec.nu == 0:
        raise ValueError("use sirsef_block for block constituents")
    if exact:
        return _exact_placements(spec, I, max_total)
    counts: dict[tuple[int, int], int] = defaultdict(int)
    for (w, z, g, s), n in detour_tally(spec, I, max_total).items():
        counts[(w, z)] += binomial(I - g + s, s) * n
    return EnumFn.from_counts(counts)


# ----------------------------------------------------------------------------
# uniform interleaver


def irtssef_uniform(A_a: EnumFn, A_b: EnumFn, I: int) -> EnumFn:
    """``S_w(Z) = A_w^a(Z) A_w^b(Z) / C(I, w)`` for every input size ``w``."""
    conds = {}
    for w in sorted(set(A_a.w_values()) & set(A_b.w_values())):
        if w < 1 or w > I:
            continue
        conds[w] = (A_a.conditional(w) * A_b.conditional(w)).scale(Fraction(1, binomial(I, w)))
    return EnumFn.from_conditionals(conds)


def tssef(S: EnumFn, mode: str = "stopping") -> Poly:
    """Size-graded projection ``s_i = sum_w s[w, i - w]``; codeword mode adds the zero word."""
    if mode not in ("stopping", "codeword"):
        raise ValueError("mode must be 'stopping' or 'codeword'")
    p = S.total_size()
    if mode == "codeword":
        p = p + Poly({0: 1})
    return p


class InterleaverClass:
    def __init__(self, irtssef: EnumFn, wef: Poly):
        self.irtssef = irtssef
        self.wef = wef
        self.members: list[tuple[int, ...]] = []

    @property
    def tssef(self) -> Poly:
        return tssef(self.irtssef)

    def __repr__(self) -> str:
        return f"InterleaverClass(size={len(self.members)}, tssef={self.tssef.to_string()})"


def interleaver_average_oracle(constituent: ConvCodeSpec, I: int | None = None, max_length: int = 6):
    """Exact IRTSSEF of every interleaver of a block-constituent PCCC, grouped, and their average.

    Returns ``(classes, average)``; ``classes`` is a list of
    :class:`InterleaverClass` sorted by decreasing size.
    """
    from .pccc import TurboCodeSpec, make_turbo_code

    if I is None:
        I = constituent.k
    if I > max_length:
        raise ValueError(f"{I}! interleavers exceed the exhaustive limit (I <= {max_length})")
    classes: dict[tuple, InterleaverClass] = {}
    total = EnumFn()
    count = 0
    for perm in itertools.permutations(range(I)):
        code = make_turbo_code(TurboCodeSpec(constituent, K=I - 2 * constituent.nu, interleaver=perm))
        sys_mask = 0
        for p in code.maps.systematic_positions:
            sys_mask |= 1 << p
        sets = brute_force_stopping_sets(code, code.N)
        S = sirsef_from_supports((s.mask for s in sets), sys_mask)
        wef = Poly({0: 1})
        for c in code.codewords()[1:]:
            wef = wef + Poly({popcount(c): 1})
        key = tuple(sorted(S.items()))
        cls = classes.get(key)
        if cls is None:
            cls = classes[key] = InterleaverClass(S, wef)
        cls.members.append(perm)
        total = total + S
        count += 1
    average = total.scale(Fraction(1, count))
    return sorted(classes.values(), key=lambda c: -len(c.members)), average


# ----------------------------------------------------------------------------
# serialization


def format_enumfn(f: EnumFn) -> str:
    """Structured text: a header then one ``w z numerator denominator`` record per term."""
    lines = ["# enumfn v1", "# w z num den"]
    for (w, z), c in sorted(f.items()):
        lines.append(f"{w} {z} {c.numerator} {c.denominator}")
    return "\n".join(lines) + "\n"


def parse_enumfn(text: str) -> EnumFn:
    terms = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        w, z, num, den = (int(x) for x in parts)
        terms[(w, z)] = Fraction(num, den)
    return EnumFn(terms)
