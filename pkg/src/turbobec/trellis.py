"""Minimal, information bit-oriented and extended (subspace) trellis modules.

The minimal module is realised as the partial-syndrome trellis of the
parity-check matrix: the state at a cut is the vector of partial parity
sums of every check that straddles the cut, restricted to states that are
both reachable from and able to return to the zero state.  States are raw
ints over those partial-sum coordinates, so every vertex set ``V_i`` is a
linear subspace of a common ambient space and subspaces of ``V_i`` can be
keyed by their canonical basis.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from .algebra import (
    count_subspaces,
    gf2_rank,
    iter_subspaces,
    poly_deg,
    poly_gcd,
    poly_mul,
    rref_basis,
    span_elements,
)

__all__ = [
    "ConvCodeSpec",
    "NonCanonicalError",
    "Edge",
    "TrellisModule",
    "ExtEdge",
    "ExtendedTrellisModule",
    "Trellis",
    "rank_profiles",
    "formula_dims",
    "build_minimal_module",
    "sectionalize_info",
    "build_extended_module",
    "module_complexity",
    "unroll",
    "dump_module",
    "parse_poly",
    "format_poly_octal",
]


class NonCanonicalError(ValueError):
    """Parity-check matrix is not canonical, or its first column is not an information position."""


def parse_poly(text: str) -> int:
    """Parse a GF(2)[D] polynomial.

    Accepts algebraic form (``"1+D+D^2"``) or octal.  Octal digits are read
    most significant bit first with that bit as the ``D**0`` coefficient, so
    ``"13"`` (binary 1011) is ``1 + D^2 + D^3``.
    """
    t = text.strip().replace(" ", "")
    if not t:
        raise ValueError("empty polynomial")
    if "D" in t.upper():
        p = 0
        for term in t.upper().split("+"):
            m = re.fullmatch(r"(1|D(?:\^?(\d+))?)", term)
            if not m:
                raise ValueError(f"bad polynomial term {term!r} in {text!r}")
            e = 0 if term == "1" else int(m.group(2) or 1)
            p ^= 1 << e
        return p
    if t == "0":
        return 0
    bits = bin(int(t, 8))[2:]
    p = 0
    for i, ch in enumerate(bits):
        if ch == "1":
            p |= 1 << i
    return p


def format_poly_octal(p: int) -> str:
    if p == 0:
        return "0"
    if not p & 1:
        raise ValueError("octal form needs a non-zero constant term")
    bits = "".join(str((p >> i) & 1) for i in range(poly_deg(p) + 1))
    return format(int(bits, 2), "o")


def _poly_det(m: list[list[int]]) -> int:
    """Determinant over GF(2)[D] by permutation expansion (signs vanish)."""
    n = len(m)
    tot = 0
    for perm in itertools.permutations(range(n)):
        prod = 1
        for r, c in enumerate(perm):
            prod = poly_mul(prod, m[r][c])
            if not prod:
                break
        tot ^= prod
    return tot


@dataclass(frozen=True)
class ConvCodeSpec:
    """Binary ``(n, k, nu)`` convolutional code given by a polynomial parity-check matrix.

    ``parity_check[r][j]`` is the polynomial of row ``r``, column ``j`` with
    bit ``i`` holding the coefficient of ``D**i``.  A constant matrix
    (``nu = 0``) describes a linear block code.
    """

    parity_check: tuple[tuple[int, ...], ...]
    name: str = ""

    def __post_init__(self):
        rows = tuple(tuple(int(p) for p in row) for row in self.parity_check)
        object.__setattr__(self, "parity_check", rows)
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("parity-check matrix must be a non-empty rectangular array")

    @classmethod
    def from_strings(cls, rows: Sequence[Sequence[str]], name: str = "") -> "ConvCodeSpec":
        return cls(tuple(tuple(parse_poly(p) for p in row) for row in rows), name=name)

    @classmethod
    def from_block_parity_check(cls, h, name: str = "") -> "ConvCodeSpec":
        """Block code (``nu = 0``) from a constant 0/1 parity-check matrix."""
        return cls(tuple(tuple(int(x) & 1 for x in row) for row in h), name=name)

    @property
    def n(self) -> int:
        return len(self.parity_check[0])

    @property
    def k(self) -> int:
        return self.n - len(self.parity_check)

    @property
    def row_degrees(self) -> tuple[int, ...]:
        return tuple(max(poly_deg(p) for p in row) for row in self.parity_check)

    @property
    def nu(self) -> int:
        return sum(self.row_degrees)

    def coefficient_matrix(self, power: int) -> list[int]:
        """Rows of the constant matrix ``H_power`` as column bitmasks."""
        return [
            sum(((p >> power) & 1) << j for j, p in enumerate(row)) for row in self.parity_check
        ]

    def low_matrix(self) -> list[int]:
        return self.coefficient_matrix(0)

    def high_matrix(self) -> list[int]:
        out = []
        for row, d in zip(self.parity_check, self.row_degrees):
            out.append(sum(((p >> d) & 1) << j for j, p in enumerate(row)))
        return out

    def validate(self) -> None:
        """Raise :class:`NonCanonicalError` unless the matrix is canonical.

        Canonical means reduced (high-order coefficient matrix of full rank)
        and basic (the full-size minors have gcd 1).  The first column must
        also be an information position, which the sectionalization relies on.
        """
        rows = self.parity_check
        if any(all(p == 0 for p in row) for row in rows):
            raise NonCanonicalError("zero row in parity-check matrix")
        r = len(rows)
        if r >= self.n:
            raise NonCanonicalError("need more columns than rows")
        if gf2_rank(self.high_matrix()) != r:
            raise NonCanonicalError("high-order coefficient matrix is rank deficient (not reduced)")
        g = 0
        for cols in itertools.combinations(range(self.n), r):
            g = poly_gcd(g, _poly_det([[rows[i][c] for c in cols] for i in range(r)]))
            if g == 1:
                break
        if g != 1:
            raise NonCanonicalError("full-size minors share a common factor (not basic)")
        b, _ = rank_profiles(self)
        if b[self.n] != b[self.n - 1]:
            raise NonCanonicalError("first column is not an information position; permute columns")


def rank_profiles(spec: ConvCodeSpec) -> tuple[list[int], list[int]]:
    """``b_i`` (ranks of trailing columns of H^L) and ``f_i`` (leading columns of H^H), i = 0..n."""
    n = spec.n
    low, high = spec.low_matrix(), spec.high_matrix()
    b = [0] * (n + 1)
    f = [0] * (n + 1)
    for i in range(1, n + 1):
        tail = ((1 << i) - 1) << (n - i)
        b[i] = gf2_rank([row & tail for row in low])
        f[i] = gf2_rank([row & ((1 << i) - 1) for row in high])
    return b, f


def formula_dims(spec: ConvCodeSpec) -> tuple[list[int], list[int]]:
    """Vertex and edge space dimensions of the minimal module from the rank profiles."""
    n, k, nu = spec.n, spec.k, spec.nu
    b, f = rank_profiles(spec)
    vdims = [nu - n + k + f[i] + b[n - i] for i in range(n + 1)]
    edims = [nu - n + k + f[i] + b[n - i - 1] + 1 for i in range(n)]
    return vdims, edims


class Edge(NamedTuple):
    left: int
    right: int
    label: tuple[int, ...]
    input: int | None


@dataclass(frozen=True)
class TrellisModule:
    """One period of a (minimal or sectionalized) trellis.

    ``vertices[i]`` lists the raw states at boundary ``i``; boundary
    ``depth`` coincides with boundary 0 of the next module.  Every edge of
    ``edges[i]`` runs from ``vertices[i]`` to ``vertices[i + 1]``.
    """

    spec: ConvCodeSpec
    vertices: tuple[tuple[int, ...], ...]
    edges: tuple[tuple[Edge, ...], ...]
    layer_dims: tuple[int, ...]
    info_positions: tuple[int, ...]
    section_lengths: tuple[int, ...]
    state_width: int
    info_oriented: bool = False

    @property
    def depth(self) -> int:
        return len(self.edges)

    def edge_dims(self) -> list[int]:
        return [len(es).bit_length() - 1 for es in self.edges]


class _SyndromeStepper:
    """Partial-syndrome dynamics of a parity-check matrix, one code bit at a time."""

    def __init__(self, spec: ConvCodeSpec):
        self.spec = spec
        degs = spec.row_degrees
        self.offs = []
        o = 0
        for d in degs:
            self.offs.append(o)
            o += d + 1
        self.width = o
        n = spec.n
        self.colmask = [0] * n
        for r, row in enumerate(spec.parity_check):
            for j, p in enumerate(row):
                for dlt in range(degs[r] + 1):
                    if (p >> dlt) & 1:
                        self.colmask[j] |= 1 << (self.offs[r] + dlt)
        self.check_mask = sum(1 << o for o in self.offs)
        self.degs = degs

    def step(self, i: int, s: int, b: int) -> int | None:
        if b:
            s ^= self.colmask[i]
        if i < self.spec.n - 1:
            return s
        if s & self.check_mask:
            return None
        out = 0
        for o, d in zip(self.offs, self.degs):
            out |= ((s >> (o + 1)) & ((1 << d) - 1)) << o
        return out


def _state_spaces(st: _SyndromeStepper) -> list[frozenset[int]]:
    n = st.spec.n
    allstates = range(1 << st.width)
    reach = [set() for _ in range(n)]
    reach[0] = {0}
    while True:
        for i in range(n - 1):
            reach[i + 1] = {t for s in reach[i] for b in (0, 1) if (t := st.step(i, s, b)) is not None}
        new0 = reach[0] | {
            t for s in reach[n - 1] for b in (0, 1) if (t := st.step(n - 1, s, b)) is not None
        }
        if new0 == reach[0]:
            break
        reach[0] = new0
    co0 = {0}
    while True:
        co = [set() for _ in range(n)]
        nxt = co0
        for i in range(n - 1, -1, -1):
            co[i] = {s for s in allstates if any(st.step(i, s, b) in nxt for b in (0, 1))}
            nxt = co[i]
        new0 = co0 | co[0]
        if new0 == co0:
            break
        co0 = new0
    co[0] = co0
    return [frozenset(reach[i] & co[i]) for i in range(n)]


def build_minimal_module(spec: ConvCodeSpec) -> TrellisModule:
    """Minimal trellis module of depth ``n`` with single-bit labels."""
    spec.validate()
    st = _SyndromeStepper(spec)
    spaces = _state_spaces(st)
    n = spec.n
    vertices = [tuple(sorted(spaces[i])) for i in range(n)] + [tuple(sorted(spaces[0]))]
    edges = []
    for i in range(n):
        nxt = spaces[(i + 1) % n]
        es = []
        for s in vertices[i]:
            for b in (0, 1):
                t = st.step(i, s, b)
                if t is not None and t in nxt:
                    es.append(Edge(s, t, (b,), b))
        edges.append(es)
    info = tuple(i for i in range(n) if len(edges[i]) == 2 * len(vertices[i]))
    for i in range(n):
        if i not in info:
            edges[i] = [e._replace(input=None) for e in edges[i]]
    lengths = tuple((info[j + 1] if j + 1 < len(info) else n) - p for j, p in enumerate(info))
    dims = tuple(len(v).bit_length() - 1 for v in vertices)
    return TrellisModule(
        spec=spec,
        vertices=tuple(vertices),
        edges=tuple(tuple(es) for es in edges),
        layer_dims=dims,
        info_positions=info,
        section_lengths=lengths,
        state_width=st.width,
    )


def sectionalize_info(t: TrellisModule) -> TrellisModule:
    """Merge the forced positions so there is one section per information bit."""
    if t.info_oriented:
        return t
    out_edges = []
    verts = []
    for p, ln in zip(t.info_positions, t.section_lengths):
        verts.append(t.vertices[p])
        nxt = [dict() for _ in range(ln)]
        for q in range(ln):
            for e in t.edges[p + q]:
                nxt[q].setdefault(e.left, []).append(e)
        es = []
        for s in t.vertices[p]:
            stack = [(s, (), None, 0)]
            while stack:
                cur, lab, inp, q = stack.pop()
                if q == ln:
                    es.append(Edge(s, cur, lab, inp))
                    continue
                for e in nxt[q].get(cur, ()):
                    stack.append((e.right, lab + e.label, e.label[0] if q == 0 else inp, q + 1))
        es.sort(key=lambda e: (e.left, e.input, e.right))
        out_edges.append(tuple(es))
    verts.append(t.vertices[-1])
    dims = tuple(len(v).bit_length() - 1 for v in verts)
    return TrellisModule(
        spec=t.spec,
        vertices=tuple(verts),
        edges=tuple(out_edges),
        layer_dims=dims,
        info_positions=t.info_positions,
        section_lengths=t.section_lengths,
        state_width=t.state_width,
        info_oriented=True,
    )


class ExtEdge(NamedTuple):
    left: int  # index into the left boundary's vertex list
    right: int
    label: tuple[int, ...]
    dim: int
    basis: tuple[int, ...]  # packed (left | label | right) edge vectors


@dataclass(frozen=True)
class ExtendedTrellisModule:
    """Information bit-oriented module whose vertices and edges are subspaces.

    ``vertices[i]`` holds canonical bases of subspaces of ``V_i``; index 0 is
    always the zero subspace.  Edge labels are per-position ORs over a basis
    of the edge subspace; the first label bit is the input label.
    """

    base: TrellisModule
    vertices: tuple[tuple[tuple[int, ...], ...], ...]
    edges: tuple[tuple[ExtEdge, ...], ...]
    raw_edge_counts: tuple[int, ...]
    prune_alpha: int | None = None

    @property
    def depth(self) -> int:
        return len(self.edges)

    def vertex_dims(self, i: int) -> list[int]:
        return [len(b) for b in self.vertices[i]]


def _subspace_index(vecs: Sequence[int]) -> tuple[tuple[tuple[int, ...], ...], dict]:
    basis = rref_basis(vecs)
    subs = []
    for coords in iter_subspaces(len(basis)):
        subs.append(rref_basis(_lift(coords, basis)))
    subs.sort(key=lambda b: (len(b), b))
    return tuple(subs), {b: i for i, b in enumerate(subs)}


def _lift(coords: Sequence[int], basis: Sequence[int]) -> list[int]:
    out = []
    for c in coords:
        v = 0
        j = 0
        while c:
            if c & 1:
                v ^= basis[j]
            c >>= 1
            j += 1
        out.append(v)
    return out


def build_extended_module(t_info: TrellisModule, prune_alpha: int | None = None) -> ExtendedTrellisModule:
    """Extended module: all subspaces of each ``V_i`` and of each edge space.

    An edge subspace connects the span of its left endpoints to the span of
    its right endpoints.  Parallel edges carrying the same label are merged,
    keeping the smallest canonical basis.  With ``prune_alpha`` set, edge
    subspaces of dimension ``>= prune_alpha`` are dropped.
    """
    if prune_alpha is not None and prune_alpha < 2:
        raise ValueError("prune_alpha must be >= 2")
    if not t_info.info_oriented:
        t_info = sectionalize_info(t_info)
    W = t_info.state_width
    depth = t_info.depth
    vlists = []
    vindex = []
    for i in range(depth):
        subs, idx = _subspace_index(t_info.vertices[i])
        vlists.append(subs)
        vindex.append(idx)
    vlists.append(vlists[0])
    vindex.append(vindex[0])
    all_edges = []
    raw_counts = []
    wmask = (1 << W) - 1
    for i in range(depth):
        ln = t_info.section_lengths[i]
        lmask = (1 << ln) - 1
        packed = []
        for e in t_info.edges[i]:
            lab = sum(bit << q for q, bit in enumerate(e.label))
            packed.append(e.left | (lab << W) | (e.right << (W + ln)))
        ebasis = rref_basis(packed)
        best: dict[tuple, ExtEdge] = {}
        raw = 0
        for coords in iter_subspaces(len(ebasis)):
            d = len(coords)
            if prune_alpha is not None and d >= prune_alpha:
                continue
            raw += 1
            vecs = _lift(coords, ebasis)
            key_basis = rref_basis(vecs)
            left = vindex[i][rref_basis(v & wmask for v in vecs)]
            right = vindex[i + 1][rref_basis(v >> (W + ln) for v in vecs)]
            lab_or = 0
            for v in vecs:
                lab_or |= (v >> W) & lmask
            label = tuple((lab_or >> q) & 1 for q in range(ln))
            k = (left, right, label)
            cur = best.get(k)
            if cur is None or key_basis < cur.basis:
                best[k] = ExtEdge(left, right, label, d, key_basis)
        all_edges.append(tuple(sorted(best.values(), key=lambda e: (e.left, e.label, e.right))))
        raw_counts.append(raw)
    return ExtendedTrellisModule(
        base=t_info,
        vertices=tuple(vlists),
        edges=tuple(all_edges),
        raw_edge_counts=tuple(raw_counts),
        prune_alpha=prune_alpha,
    )


def module_complexity(m, deduplicated: bool = True) -> tuple[Fraction, Fraction]:
    """Vertex and edge complexities ``(mu, phi)``: counts over one module divided by ``k``.

    For an extended module, ``deduplicated=False`` counts every edge
    subspace before parallel same-label edges are merged.
    """
    if isinstance(m, ExtendedTrellisModule):
        k = m.base.spec.k
        v = sum(len(m.vertices[i]) for i in range(m.depth))
        e = sum(len(es) for es in m.edges) if deduplicated else sum(m.raw_edge_counts)
    else:
        if not m.info_oriented:
            m = sectionalize_info(m)
        k = m.spec.k
        v = sum(len(m.vertices[i]) for i in range(m.depth))
        e = sum(len(es) for es in m.edges)
    return Fraction(v, k), Fraction(e, k)


# ----------------------------------------------------------------------------
# unrolled trellises


@dataclass
class Trellis:
    """A terminated trellis of ``depth`` sections with integer vertex ids.

    Vertex 0 is the zero state (or zero subspace) at every boundary.
    ``edges[j]`` holds ``(left, right, label, input, dim)`` tuples;
    ``label_offsets[j]`` is the index of the section's first code bit in the
    unpunctured constituent sequence.
    """

    depth: int
    num_vertices: list[int]
    edges: list[list[tuple]]
    label_offsets: list[int]
    section_lengths: list[int]
    vertex_keys: list[Sequence] = field(default_factory=list)

    @property
    def length(self) -> int:
        return self.label_offsets[-1] + self.section_lengths[-1] if self.depth else 0


def unroll(m, sections: int) -> Trellis:
    """Repeat a module over ``sections`` information sections.

    Works for both :class:`TrellisModule` (vertex keys are states) and
    :class:`ExtendedTrellisModule` (keys are subspaces, ``dim`` filled in).
    """
    if not isinstance(m, ExtendedTrellisModule) and not m.info_oriented:
        m = sectionalize_info(m)
    k = m.depth
    if isinstance(m, ExtendedTrellisModule):
        keys = [m.vertices[i] for i in range(k)]
        sec_edges = [[(e.left, e.right, e.label, e.label[0], e.dim) for e in es] for es in m.edges]
        lengths = m.base.section_lengths
    else:
        keys = []
        sec_edges = []
        for i in range(k):
            order = sorted(m.vertices[i])  # state 0 first
            keys.append(order)
        for i in range(k):
            li = {s: x for x, s in enumerate(keys[i])}
            ri = {s: x for x, s in enumerate(keys[(i + 1) % k])}
            sec_edges.append([(li[e.left], ri[e.right], e.label, e.input, 1) for e in m.edges[i]])
        lengths = m.section_lengths
    edges, offs, lens, nv, vk = [], [], [], [], []
    pos = 0
    for j in range(sections):
        i = j % k
        edges.append(sec_edges[i])
        offs.append(pos)
        lens.append(lengths[i])
        pos += lengths[i]
        nv.append(len(keys[i]))
        vk.append(keys[i])
    nv.append(len(keys[sections % k]))
    vk.append(keys[sections % k])
    return Trellis(sections, nv, edges, offs, lens, vk)


def dump_module(m) -> str:
    """Structured text dump of a module for golden-file comparison."""
    lines = []
    if isinstance(m, ExtendedTrellisModule):
        lines.append(f"extended-module depth={m.depth} prune_alpha={m.prune_alpha}")
        for i in range(m.depth + 1):
            vs = " ".join("{" + ",".join(str(b) for b in v) + "}" for v in m.vertices[i])
            lines.append(f"V[{i}] n={len(m.vertices[i])}: {vs}")
        for i, es in enumerate(m.edges):
            lines.append(f"E[{i}] n={len(es)}")
            for e in es:
                lab = "".join(map(str, e.label))
                lines.append(f"  {e.left} -> {e.right} label={lab} dim={e.dim}")
    else:
        kind = "info-module" if m.info_oriented else "minimal-module"
        lines.append(f"{kind} depth={m.depth} dims={list(m.layer_dims)}")
        for i in range(m.depth + 1):
            lines.append(f"V[{i}] n={len(m.vertices[i])}: {' '.join(map(str, m.vertices[i]))}")
        for i, es in enumerate(m.edges):
            lines.append(f"E[{i}] n={len(es)}")
            for e in es:
                lab = "".join(map(str, e.label))
                inp = "-" if e.input is None else str(e.input)
                lines.append(f"  {e.left} -> {e.right} in={inp} out={lab}")
    return "\n".join(lines) + "\n"
