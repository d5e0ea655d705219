"""Turbo stopping sets: membership test, brute-force oracle and trellis branch-and-bound search."""

from __future__ import annotations

import heapq
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .algebra import gf2_rank, popcount, solve_gf2, span_elements
from .pccc import TurboCode
from .trellis import ExtendedTrellisModule, build_extended_module, sectionalize_info, unroll

__all__ = [
    "INF",
    "StoppingSet",
    "EnumerationResult",
    "CapacityError",
    "maximal_supported_subcode",
    "is_turbo_stopping_set",
    "stopping_set_witness",
    "is_codeword_support",
    "brute_force_stopping_sets",
    "maximal_stopping_set_within",
    "ExtendedConstituent",
    "TailWeights",
    "tail_weight_table",
    "constrained_min_weight",
    "gpb_enumerate",
    "size_histogram",
    "format_report",
    "parse_report",
    "REPORT_VERSION",
]

INF = math.inf
MAX_BRUTE_FORCE_LENGTH = 22
REPORT_VERSION = 1


class CapacityError(ValueError):
    """The requested exhaustive computation is too large."""


def _mask(positions) -> int:
    if isinstance(positions, int):
        return positions
    m = 0
    for p in positions:
        m |= 1 << int(p)
    return m


def _positions(mask: int) -> tuple[int, ...]:
    out = []
    p = 0
    while mask:
        if mask & 1:
            out.append(p)
        mask >>= 1
        p += 1
    return tuple(out)


def maximal_supported_subcode(generators: Sequence[int], support) -> tuple[int, int]:
    """Largest subcode whose codewords vanish outside ``support``.

    ``generators`` are codeword bitmasks spanning the code.  Returns
    ``(support_mask, dimension)`` of that subcode.  A subcode with support
    exactly ``X`` exists iff the returned support equals ``X``.
    """
    X = _mask(support)
    gens = [g for g in generators if g]
    if not gens:
        return 0, 0
    outside = 0
    for g in gens:
        outside |= g & ~X
    rows = []
    for p in _positions(outside):
        rows.append(sum(((g >> p) & 1) << i for i, g in enumerate(gens)))
    _, kernel = solve_gf2(rows, 0, len(gens))
    words = []
    for k in kernel:
        w = 0
        for i, g in enumerate(gens):
            if (k >> i) & 1:
                w ^= g
        words.append(w)
    supp = 0
    for w in words:
        supp |= w
    return supp, gf2_rank(words)


def _projections(code: TurboCode, S: int) -> tuple[int, int]:
    xa = xb = 0
    mu_a, mu_b = code.maps.mu_a, code.maps.mu_b
    for p in _positions(S):
        if mu_a[p] is not None:
            xa |= 1 << mu_a[p]
        if mu_b[p] is not None:
            xb |= 1 << mu_b[p]
    return xa, xb


def stopping_set_witness(code: TurboCode, S) -> tuple[int, int, int, int]:
    """``(support_a, dim_a, support_b, dim_b)`` of the maximal subcodes inside the projections of ``S``."""
    xa, xb = _projections(code, _mask(S))
    gens = code.constituent_generators
    sa, da = maximal_supported_subcode(gens["a"], xa)
    sb, db = maximal_supported_subcode(gens["b"], xb)
    return sa, da, sb, db


def is_turbo_stopping_set(code: TurboCode, S) -> bool:
    """Whether ``S`` (positions or bitmask) is a turbo stopping set."""
    S = _mask(S)
    if not S:
        return False
    xa, xb = _projections(code, S)
    sa, da, sb, db = stopping_set_witness(code, S)
    if sa != xa or sb != xb or da == 0 or db == 0:
        return False
    # systematic consistency through the interleaver
    psi_a, psi_b, perm = code.maps.psi_a, code.maps.psi_b, code.perm
    ia = {perm[psi_a[c]] for c in _positions(sa) if psi_a[c] is not None}
    ib = {psi_b[c] for c in _positions(sb) if psi_b[c] is not None}
    return ia == ib


def _has_exact_support(generators, X: int) -> bool:
    supp, dim = maximal_supported_subcode(generators, X)
    if supp != X or dim == 0:
        return False
    # subcode basis: re-derive by restricting to the span inside X
    basis = [w for w in _subcode_basis(generators, X)]
    return any(w == X for w in span_elements(basis))


def _subcode_basis(generators, X: int) -> list[int]:
    gens = [g for g in generators if g]
    outside = 0
    for g in gens:
        outside |= g & ~X
    rows = [sum(((g >> p) & 1) << i for i, g in enumerate(gens)) for p in _positions(outside)]
    _, kernel = solve_gf2(rows, 0, len(gens))
    out = []
    for k in kernel:
        w = 0
        for i, g in enumerate(gens):
            if (k >> i) & 1:
                w ^= g
        out.append(w)
    return out


def is_codeword_support(code: TurboCode, S) -> bool:
    """Direct-sum classifier: a stopping set is a codeword support iff both
    maximal subcodes contain a word covering their whole support."""
    S = _mask(S)
    xa, xb = _projections(code, S)
    gens = code.constituent_generators
    return _has_exact_support(gens["a"], xa) and _has_exact_support(gens["b"], xb)


@dataclass(frozen=True)
class StoppingSet:
    positions: frozenset[int]
    witness_a: int | None = None  # support masks over constituent indices
    witness_b: int | None = None
    is_codeword: bool | None = None

    @property
    def size(self) -> int:
        return len(self.positions)

    @property
    def mask(self) -> int:
        return _mask(self.positions)

    @classmethod
    def from_mask(cls, code: TurboCode, S: int) -> "StoppingSet":
        sa, _, sb, _ = stopping_set_witness(code, S)
        return cls(frozenset(_positions(S)), sa, sb, is_codeword_support(code, S))


def brute_force_stopping_sets(code: TurboCode, tau: int) -> list[StoppingSet]:
    """Every turbo stopping set of size ``<= tau`` by scanning all subsets."""
    if code.N > MAX_BRUTE_FORCE_LENGTH:
        raise CapacityError(f"N={code.N} exceeds the brute-force limit {MAX_BRUTE_FORCE_LENGTH}")
    out = []
    for size in range(1, min(tau, code.N) + 1):
        for combo in itertools.combinations(range(code.N), size):
            S = _mask(combo)
            if is_turbo_stopping_set(code, S):
                out.append(StoppingSet.from_mask(code, S))
    return out


def maximal_stopping_set_within(sets: Iterable[StoppingSet | int], erased) -> frozenset[int]:
    """Union of all listed stopping sets contained in ``erased`` (stopping sets are union-closed)."""
    E = _mask(erased)
    u = 0
    for s in sets:
        m = s if isinstance(s, int) else s.mask
        if m & ~E == 0:
            u |= m
    return frozenset(_positions(u))


def size_histogram(sets: Iterable[StoppingSet]) -> dict[int, int]:
    return dict(sorted(Counter(s.size for s in sets).items()))


# ----------------------------------------------------------------------------
# extended trellis search


class ExtendedConstituent:
    """Extended trellis of one constituent, unrolled over the interleaver length.

    Each edge is ``(left, right, input_bit, weight, parity_mask)`` where
    ``weight`` counts the kept label bits that are charged to this
    constituent and ``parity_mask`` holds the turbo positions of its kept
    parity bits.
    """

    def __init__(self, code: TurboCode, which: str, ext: ExtendedTrellisModule | None = None, count_systematic=None):
        if ext is None:
            ext = code.extended
        self.ext = ext
        t = unroll(ext, code.I)
        slots = code.turbo_slots_a if which == "a" else code.turbo_slots_b
        if count_systematic is None:
            count_systematic = which == "a"
        self.which = which
        self.depth = t.depth
        self.nv = t.num_vertices
        self.edges = []
        for j in range(t.depth):
            row = []
            for (l, r, label, inp, _d) in t.edges[j]:
                pm = 0
                for q in range(1, len(label)):
                    p = slots[j][q]
                    if p is not None and label[q]:
                        pm |= 1 << p
                w = popcount(pm) + (inp if count_systematic else 0)
                row.append((l, r, inp, w, pm))
            self.edges.append(row)
        self.period = _period(code, which)

    def forward(self, inputs: Sequence[int]) -> dict[int, float]:
        """Minimum-weight frontier after forcing the first ``len(inputs)`` input labels."""
        front = {0: 0}
        for j, b in enumerate(inputs):
            nxt: dict[int, float] = {}
            for (l, r, inp, w, _pm) in self.edges[j]:
                if inp == b and l in front:
                    c = front[l] + w
                    if c < nxt.get(r, INF):
                        nxt[r] = c
            front = nxt
        return front


def _period(code: TurboCode, which: str) -> int:
    mask = code.spec.puncture_a if which == "a" else code.spec.puncture_b
    m = code.module
    parity_per_module = sum(ln - 1 for ln in m.section_lengths)
    if parity_per_module == 0:
        return m.depth
    modules = len(mask) // math.gcd(len(mask), parity_per_module)
    return m.depth * modules


class TailWeights:
    """Minimum label weight from ``(depth, vertex)`` to the zero vertex at the end.

    Depths near the end are stored explicitly.  Once two depths one period
    apart agree, earlier depths repeat with that period.
    """

    def __init__(self, tc: ExtendedConstituent):
        I = tc.depth
        P = tc.period
        table: dict[int, list[float]] = {}
        cur = [INF] * tc.nv[I]
        cur[0] = 0
        table[I] = cur
        self.plateau = None
        for j in range(I - 1, -1, -1):
            prev = [INF] * tc.nv[j]
            for (l, r, _inp, w, _pm) in tc.edges[j]:
                c = cur[r] + w
                if c < prev[l]:
                    prev[l] = c
            table[j] = prev
            cur = prev
            if j + P <= I and table.get(j + P) == prev:
                self.plateau = j
                break
        self.period = P
        self._table = table
        self.depth = I

    def __call__(self, depth: int, vertex: int) -> float:
        return self.row(depth)[vertex]

    def row(self, depth: int) -> list[float]:
        if depth in self._table:
            return self._table[depth]
        d0 = self.plateau
        steps = -(-(d0 - depth) // self.period)
        return self._table[depth + steps * self.period]


def tail_weight_table(code: TurboCode, which: str = "a", ext: ExtendedTrellisModule | None = None) -> TailWeights:
    return TailWeights(ExtendedConstituent(code, which, ext))


def constrained_min_weight(tc: ExtendedConstituent, constraints: dict[int, int]) -> float:
    """Minimum path weight (as charged by ``tc``) honoring ``{section: input_bit}`` constraints."""
    cur = {0: 0}
    for j in range(tc.depth):
        need = constraints.get(j)
        nxt: dict[int, float] = {}
        for (l, r, inp, w, _pm) in tc.edges[j]:
            if need is not None and inp != need:
                continue
            if l in cur:
                c = cur[l] + w
                if c < nxt.get(r, INF):
                    nxt[r] = c
        cur = nxt
    return cur.get(0, INF)


def _parity_supports(tc: ExtendedConstituent, inputs: Sequence[int], budget: float) -> set[int]:
    """Distinct kept-parity supports of zero-to-zero paths with the given input labels."""
    front: dict[int, set[int]] = {0: {0}}
    for j, b in enumerate(inputs):
        nxt: dict[int, set[int]] = {}
        for (l, r, inp, _w, pm) in tc.edges[j]:
            if inp != b or l not in front:
                continue
            bucket = nxt.setdefault(r, set())
            for m in front[l]:
                mm = m | pm
                if popcount(mm) <= budget:
                    bucket.add(mm)
        front = {v: s for v, s in nxt.items() if s}
    return front.get(0, set())


@dataclass
class EnumerationResult:
    sets: list[StoppingSet]
    tau: int
    approximate: bool = False
    expansions: int = 0

    def __iter__(self):
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def masks(self) -> set[int]:
        return {s.mask for s in self.sets}


def gpb_enumerate(
    code: TurboCode,
    tau: int,
    prune_alpha: int | None = None,
    on_expand: Callable[[tuple[int, ...], float], None] | None = None,
    with_witness: bool = True,
) -> EnumerationResult:
    """All turbo stopping sets of size ``<= tau`` by branch and bound on input prefixes.

    Constraint sets fix the input support bit by bit over all ``I`` input
    positions.  Each is bounded below by the first constituent's best
    completion plus the second constituent's best parity weight under the
    interleaved constraints; the most promising set is expanded first.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    ext = code.extended if prune_alpha is None else build_extended_module(code.module, prune_alpha)
    ta = ExtendedConstituent(code, "a", ext)
    tb = ExtendedConstituent(code, "b", ext)
    tail_a = TailWeights(ta)
    I = code.I
    perm = code.perm
    sys_pos = code.maps.systematic_positions
    found: dict[int, None] = {}
    expansions = 0

    def bound(prefix: tuple[int, ...]) -> float:
        front = ta.forward(prefix)
        row = tail_a.row(len(prefix))
        wa = min((w + row[v] for v, w in front.items()), default=INF)
        if wa == INF:
            return INF
        wb = constrained_min_weight(tb, {perm[i]: b for i, b in enumerate(prefix)})
        return wa + wb

    counter = itertools.count()
    heap = [(bound(()), -next(counter), ())]
    while heap:
        wb_, _, prefix = heapq.heappop(heap)
        if wb_ > tau:
            break  # best-first: everything left is worse
        expansions += 1
        if on_expand:
            on_expand(prefix, wb_)
        if len(prefix) < I:
            for b in (0, 1):
                child = prefix + (b,)
                w = bound(child)
                if w <= tau:
                    heapq.heappush(heap, (w, -next(counter), child))
            continue
        u = prefix
        wu = sum(u)
        if wu == 0:
            continue
        ub = [0] * I
        for i, b in enumerate(u):
            ub[perm[i]] = b
        sys_mask = 0
        for i, b in enumerate(u):
            if b:
                sys_mask |= 1 << sys_pos[i]
        pas = _parity_supports(ta, u, tau - wu)
        if not pas:
            continue
        min_pa = min(popcount(m) for m in pas)
        pbs = _parity_supports(tb, ub, tau - wu - min_pa)
        for pa in pas:
            for pb in pbs:
                S = sys_mask | pa | pb
                if popcount(S) <= tau:
                    found.setdefault(S)
    masks = sorted(found, key=lambda m: (popcount(m), _positions(m)))
    if with_witness:
        sets = [StoppingSet.from_mask(code, m) for m in masks]
    else:
        sets = [StoppingSet(frozenset(_positions(m))) for m in masks]
    return EnumerationResult(sets, tau, approximate=prune_alpha is not None, expansions=expansions)


# ----------------------------------------------------------------------------
# report format


def format_report(code: TurboCode, result: EnumerationResult) -> str:
    lines = [
        f"# stopping-set report v{REPORT_VERSION}",
        f"code N={code.N} K={code.K} I={code.I} interleaver={' '.join(map(str, code.perm))}",
        f"tau {result.tau}",
        f"approximate {'yes' if result.approximate else 'no'}",
        f"count {len(result.sets)}",
    ]
    for s in result.sets:
        wa = "-" if s.witness_a is None else format(s.witness_a, "x")
        wb = "-" if s.witness_b is None else format(s.witness_b, "x")
        cw = "-" if s.is_codeword is None else ("yes" if s.is_codeword else "no")
        pos = " ".join(map(str, sorted(s.positions)))
        lines.append(f"set size={s.size} codeword={cw} witness_a={wa} witness_b={wb} positions={pos}")
    lines.append("histogram")
    for size, n in size_histogram(result.sets).items():
        lines.append(f"size {size} {n}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> tuple[dict, list[StoppingSet]]:
    """Read back the header fields and stopping sets of :func:`format_report` output."""
    header: dict = {}
    sets = []
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# stopping-set report v"):
        raise ValueError("not a stopping-set report")
    header["version"] = int(lines[0].rsplit("v", 1)[1])
    for line in lines[1:]:
        if line.startswith("set "):
            fields = dict(tok.split("=", 1) for tok in line[4:].split(" positions=")[0].split())
            pos = line.split("positions=", 1)[1].split()
            cw = fields["codeword"]
            sets.append(
                StoppingSet(
                    frozenset(int(p) for p in pos),
                    None if fields["witness_a"] == "-" else int(fields["witness_a"], 16),
                    None if fields["witness_b"] == "-" else int(fields["witness_b"], 16),
                    None if cw == "-" else cw == "yes",
                )
            )
        elif line.startswith(("tau ", "count ")):
            k, v = line.split()
            header[k] = int(v)
        elif line.startswith("approximate "):
            header["approximate"] = line.split()[1] == "yes"
    return header, sets
