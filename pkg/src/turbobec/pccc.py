"""Parallel concatenated (turbo) codes: index maps, dual termination, encoding.

Conventions
-----------
* The input block has length ``I = K + 2*nu``.  By default the ``2*nu``
  tail bits sit at the end of the block and are chosen so both constituent
  encoders end in the zero state (see ``TurboCodeSpec.tail_positions``).
* ``interleaver[i] = j`` means the second encoder sees ``u_b[j] = u[i]``.
* Constituent codewords are indexed section by section over their
  *unpunctured* label bits, so a constituent index is ``None``-free.
* Puncture masks apply to parity bits only, cyclically in the order the
  parity bits are produced.
* The default multiplex order emits, for each time index ``j``, the
  systematic bit ``u_j`` followed by the kept parity bits of the first and
  then the second constituent at that section.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .algebra import gf2_rank, popcount, solve_gf2
from .trellis import (
    ConvCodeSpec,
    TrellisModule,
    build_extended_module,
    build_minimal_module,
    sectionalize_info,
)

__all__ = [
    "TurboCodeSpec",
    "IndexMaps",
    "TurboCode",
    "TerminationUnsupported",
    "SpecFormatError",
    "make_turbo_code",
    "dual_terminate",
    "encode",
    "hamming74",
    "toy_constituent",
    "toy_spec",
    "hamming_spec",
    "drp_interleaver",
    "load_code_spec",
    "format_code_spec",
    "load_interleaver",
    "format_interleaver",
    "NAMED_CONSTITUENTS",
]


class TerminationUnsupported(ValueError):
    """The interleaver makes the dual-termination system singular."""


class SpecFormatError(ValueError):
    def __init__(self, msg: str, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + msg)
        self.path = path
        self.line = line


def hamming74() -> ConvCodeSpec:
    """Systematic cyclic (7,4) Hamming code, ``g(x) = 1 + x + x^3``.

    Information bits come first; the parity part of row ``i`` is
    ``x^(3+i) mod g(x)`` which gives parity weights 2, 2, 3, 2.
    """
    g = 0b1011
    parity_rows = []
    for i in range(4):
        r = 1 << (3 + i)
        for sh in range(3, -1, -1):
            if (r >> (sh + 3)) & 1:
                r ^= g << sh
        parity_rows.append([(r >> q) & 1 for q in range(3)])
    # H = [P^T | I]
    h = [[parity_rows[i][q] for i in range(4)] + [int(q == c) for c in range(3)] for q in range(3)]
    return ConvCodeSpec.from_block_parity_check(h, name="hamming74")


def toy_constituent() -> ConvCodeSpec:
    """The (2,1,2) code with ``H(D) = (1 + D^2, 1 + D + D^2)``."""
    return ConvCodeSpec.from_strings([["1+D^2", "1+D+D^2"]], name="toy")


NAMED_CONSTITUENTS = {"hamming74": hamming74, "toy": toy_constituent}


@dataclass(frozen=True)
class TurboCodeSpec:
    constituent: ConvCodeSpec
    K: int
    interleaver: tuple[int, ...]
    puncture_a: tuple[int, ...] = (1,)
    puncture_b: tuple[int, ...] = (1,)
    multiplex_order: tuple[int, ...] | None = None  # permutation of the default order
    # "end": tail bits in the last 2*nu positions; "auto": latest positions that
    # give a solvable termination system; or an explicit tuple of positions
    tail_positions: tuple[int, ...] | str = "end"

    def __post_init__(self):
        if not isinstance(self.tail_positions, str):
            object.__setattr__(self, "tail_positions", tuple(sorted(int(x) for x in self.tail_positions)))
        object.__setattr__(self, "interleaver", tuple(int(x) for x in self.interleaver))
        object.__setattr__(self, "puncture_a", tuple(int(x) for x in self.puncture_a))
        object.__setattr__(self, "puncture_b", tuple(int(x) for x in self.puncture_b))
        if self.multiplex_order is not None:
            object.__setattr__(self, "multiplex_order", tuple(int(x) for x in self.multiplex_order))

    @property
    def nu(self) -> int:
        return self.constituent.nu

    @property
    def I(self) -> int:  # noqa: E743 - conventional name for the interleaver length
        return self.K + 2 * self.nu

    def validate(self) -> None:
        c = self.constituent
        c.validate()
        I = self.I
        if self.K < 1:
            raise ValueError("K must be positive")
        if I % c.k:
            raise ValueError(f"interleaver length {I} is not a multiple of k={c.k}")
        if c.nu == 0 and I != c.k:
            raise ValueError("a block constituent needs interleaver length equal to k")
        if sorted(self.interleaver) != list(range(I)):
            raise ValueError(f"interleaver is not a permutation of 0..{I - 1}")
        tp = self.tail_positions
        if isinstance(tp, str):
            if tp not in ("end", "auto"):
                raise ValueError(f"tail_positions must be 'end', 'auto' or a tuple, got {tp!r}")
        elif len(tp) != 2 * self.nu or len(set(tp)) != len(tp) or any(not 0 <= x < I for x in tp):
            raise ValueError(f"need {2 * self.nu} distinct tail positions in 0..{I - 1}")
        for m in (self.puncture_a, self.puncture_b):
            if not m or any(x not in (0, 1) for x in m):
                raise ValueError("puncture masks must be non-empty 0/1 sequences")


@dataclass(frozen=True)
class IndexMaps:
    """Turbo-to-constituent position maps; ``None`` marks an absent position.

    ``mu_a[p]`` / ``mu_b[p]`` give the constituent index of turbo position
    ``p``.  ``psi_a[c]`` is the systematic index of first-constituent bit
    ``c`` and ``psi_b[c]`` the interleaved systematic index of
    second-constituent bit ``c``.
    """

    mu_a: tuple[int | None, ...]
    mu_b: tuple[int | None, ...]
    psi_a: tuple[int | None, ...]
    psi_b: tuple[int | None, ...]
    turbo_of_a: tuple[int, ...]
    turbo_of_b: tuple[int, ...]
    systematic_positions: tuple[int, ...]  # turbo position of u_j

    @property
    def N(self) -> int:
        return len(self.mu_a)

    @property
    def N_a(self) -> int:
        return len(self.psi_a)

    @property
    def N_b(self) -> int:
        return len(self.psi_b)


def _constituent_layout(module: TrellisModule, sections: int, mask: Sequence[int]):
    """Per-section label slots: constituent index, or ``None`` when punctured."""
    slots = []
    idx = 0
    pc = 0
    sys_index = []
    for j in range(sections):
        ln = module.section_lengths[j % module.depth]
        row = []
        for q in range(ln):
            if q == 0:
                row.append(idx)
                sys_index.append(idx)
                idx += 1
            else:
                if mask[pc % len(mask)]:
                    row.append(idx)
                    idx += 1
                else:
                    row.append(None)
                pc += 1
        slots.append(tuple(row))
    return slots, sys_index, idx


class TurboCode:
    """A PCCC with both constituents built from the same code."""

    def __init__(self, spec: TurboCodeSpec):
        spec.validate()
        self.spec = spec
        self.K = spec.K
        self.I = spec.I
        self.nu = spec.nu
        self.perm = spec.interleaver
        self.inv_perm = tuple(int(x) for x in np.argsort(spec.interleaver))
        self.minimal = build_minimal_module(spec.constituent)
        self.module = sectionalize_info(self.minimal)
        self._trans = self._transitions(self.module)

        self.slots_a, sys_a, n_a = _constituent_layout(self.module, self.I, spec.puncture_a)
        self.slots_b, sys_b, n_b = _constituent_layout(self.module, self.I, spec.puncture_b)
        self.maps = self._index_maps(sys_a, sys_b, n_a, n_b)
        self.N = self.maps.N
        # per-section label slot -> turbo position (None if punctured)
        self.turbo_slots_a = [
            tuple(None if c is None else self.maps.turbo_of_a[c] for c in row) for row in self.slots_a
        ]
        self.turbo_slots_b = [
            tuple(None if c is None else self.maps.turbo_of_b[c] for c in row) for row in self.slots_b
        ]
        self._tail_of_info = self._termination_solver()
        self.generator = tuple(self._encode_block(self.dual_terminate_bits(1 << i)) for i in range(self.K))

    # -- construction helpers ---------------------------------------------------

    @staticmethod
    def _transitions(m: TrellisModule):
        out = []
        for es in m.edges:
            d = {}
            for e in es:
                d[(e.left, e.input)] = (e.right, e.label)
            out.append(d)
        return out

    def _index_maps(self, sys_a, sys_b, n_a, n_b) -> IndexMaps:
        I = self.I
        default = []  # entries: ("u", j) | ("a", c) | ("b", c)
        for j in range(I):
            default.append(("u", j))
            default.extend(("a", c) for c in self.slots_a[j][1:] if c is not None)
            default.extend(("b", c) for c in self.slots_b[j][1:] if c is not None)
        order = self.spec.multiplex_order
        if order is not None:
            if sorted(order) != list(range(len(default))):
                raise ValueError(f"multiplex order must permute 0..{len(default) - 1}")
            default = [default[x] for x in order]
        N = len(default)
        mu_a: list[int | None] = [None] * N
        mu_b: list[int | None] = [None] * N
        sys_pos = [0] * I
        for p, (kind, x) in enumerate(default):
            if kind == "u":
                sys_pos[x] = p
                mu_a[p] = sys_a[x]
                mu_b[p] = sys_b[self.perm[x]]
            elif kind == "a":
                mu_a[p] = x
            else:
                mu_b[p] = x
        psi_a: list[int | None] = [None] * n_a
        psi_b: list[int | None] = [None] * n_b
        for j, c in enumerate(sys_a):
            psi_a[c] = j
        for j, c in enumerate(sys_b):
            psi_b[c] = j
        turbo_a = [0] * n_a
        turbo_b = [0] * n_b
        for p in range(N):
            if mu_a[p] is not None:
                turbo_a[mu_a[p]] = p
            if mu_b[p] is not None:
                turbo_b[mu_b[p]] = p
        return IndexMaps(
            tuple(mu_a), tuple(mu_b), tuple(psi_a), tuple(psi_b), tuple(turbo_a), tuple(turbo_b), tuple(sys_pos)
        )

    def run_encoder(self, u: Sequence[int]) -> tuple[list[tuple[int, ...]], int]:
        """Walk the constituent trellis from state zero; return section labels and the final state."""
        s = 0
        labels = []
        k = self.module.depth
        for j, b in enumerate(u):
            s, lab = self._trans[j % k][(s, int(b))]
            labels.append(lab)
        return labels, s

    def _termination_solver(self) -> list[int]:
        I, K, nu = self.I, self.K, self.nu
        width = self.module.state_width
        cols = []
        for i in range(I):
            u = [0] * I
            u[i] = 1
            _, sa = self.run_encoder(u)
            _, sb = self.run_encoder(self.interleave(u))
            cols.append(sa | (sb << width))
        tp = self.spec.tail_positions
        if tp == "end":
            tail = list(range(K, I))
        elif tp == "auto":
            tail = []
            for i in range(I - 1, -1, -1):
                if len(tail) < 2 * nu and gf2_rank([cols[t] for t in tail] + [cols[i]]) > len(tail):
                    tail.append(i)
            tail.sort()
        else:
            tail = list(tp)
        self.tail_positions = tuple(tail)
        self.info_positions = tuple(i for i in range(I) if i not in set(tail))
        if nu == 0:
            return [0] * K
        rows = [sum(((cols[t] >> r) & 1) << q for q, t in enumerate(tail)) for r in range(2 * width)]
        if gf2_rank(rows) != 2 * nu:
            raise TerminationUnsupported(
                f"interleaver {list(self.perm)} leaves the dual-termination system singular "
                f"for tail positions {tail}"
            )
        tails = []
        for i in self.info_positions:
            sol = solve_gf2(rows, cols[i], 2 * nu)
            if sol is None:
                raise TerminationUnsupported("information bit cannot be terminated by the tail bits")
            tails.append(sol[0])
        return tails

    # -- public API -------------------------------------------------------------

    def interleave(self, u: Sequence[int]) -> list[int]:
        ub = [0] * len(u)
        for i, j in enumerate(self.perm):
            ub[j] = u[i]
        return ub

    def dual_terminate_bits(self, info: int) -> list[int]:
        """Input block (list of ``I`` bits) from a ``K``-bit info mask."""
        u = [0] * self.I
        tail = 0
        for i, p in enumerate(self.info_positions):
            if (info >> i) & 1:
                u[p] = 1
                tail ^= self._tail_of_info[i]
        for q, p in enumerate(self.tail_positions):
            u[p] = (tail >> q) & 1
        return u

    def _encode_block(self, u: Sequence[int]) -> int:
        la, sa = self.run_encoder(u)
        lb, sb = self.run_encoder(self.interleave(u))
        assert sa == 0 and sb == 0, "termination failed"
        word = 0
        for labels, slots in ((la, self.turbo_slots_a), (lb, self.turbo_slots_b)):
            for lab, row in zip(labels, slots):
                for bit, p in zip(lab, row):
                    if p is not None and bit:
                        word |= 1 << p
        return word

    def encode_int(self, info: int) -> int:
        w = 0
        for i in range(self.K):
            if (info >> i) & 1:
                w ^= self.generator[i]
        return w

    def constituent_codeword(self, which: str, u: Sequence[int]) -> list[int]:
        """Unpunctured-index codeword of a constituent for input ``u`` (not interleaved here)."""
        slots = self.slots_a if which == "a" else self.slots_b
        labels, _ = self.run_encoder(u)
        out = [0] * (self.maps.N_a if which == "a" else self.maps.N_b)
        for lab, row in zip(labels, slots):
            for bit, c in zip(lab, row):
                if c is not None:
                    out[c] = bit
        return out

    @cached_property
    def constituent_generators(self) -> dict[str, tuple[int, ...]]:
        """Generator rows (bitmask over constituent indices) of each terminated, punctured constituent."""
        I = self.I
        cols = []
        for i in range(I):
            u = [0] * I
            u[i] = 1
            cols.append(self.run_encoder(u)[1])
        rows = [sum(((cols[i] >> r) & 1) << i for i in range(I)) for r in range(self.module.state_width)]
        kernel = solve_gf2(rows, 0, I)[1]
        out = {}
        for which in ("a", "b"):
            gens = []
            for v in kernel:
                u = [(v >> i) & 1 for i in range(I)]
                cw = self.constituent_codeword(which, u)
                gens.append(sum(b << c for c, b in enumerate(cw)))
            out[which] = tuple(gens)
        return out

    @cached_property
    def extended(self):
        return build_extended_module(self.module)

    def codewords(self) -> list[int]:
        """All ``2**K`` codewords as bitmasks (small ``K`` only)."""
        if self.K > 20:
            raise ValueError("too many codewords to list")
        out = [0]
        for g in self.generator:
            out += [c ^ g for c in out]
        return out

    def min_distance(self) -> int:
        return min(popcount(c) for c in self.codewords()[1:])

    def __repr__(self) -> str:
        s = self.spec
        return f"TurboCode(N={self.N}, K={self.K}, I={self.I}, nu={self.nu}, interleaver={list(s.interleaver)})"


def make_turbo_code(spec: TurboCodeSpec) -> TurboCode:
    return TurboCode(spec)


def dual_terminate(info: Sequence[int], code: TurboCode) -> list[int]:
    """Append the ``2*nu`` tail bits that drive both encoders to the zero state."""
    if len(info) != code.K:
        raise ValueError(f"expected {code.K} information bits, got {len(info)}")
    mask = sum(int(b) << i for i, b in enumerate(info))
    return code.dual_terminate_bits(mask)


def encode(info: Sequence[int], code: TurboCode) -> np.ndarray:
    """Encode ``K`` information bits into an ``N``-bit codeword."""
    u = dual_terminate(info, code)
    w = code._encode_block(u)
    return np.array([(w >> p) & 1 for p in range(code.N)], dtype=np.uint8)


def toy_spec(interleaver=(3, 5, 1, 4, 0, 2)) -> TurboCodeSpec:
    """Rate-1/2 toy PCCC: K=2, I=6, alternate parity puncturing.

    With this interleaver the last four input positions cannot terminate
    both encoders, so the tail positions are picked automatically.
    """
    return TurboCodeSpec(
        toy_constituent(),
        K=2,
        interleaver=interleaver,
        puncture_a=(1, 0),
        puncture_b=(0, 1),
        tail_positions="auto",
    )


def hamming_spec(interleaver=(0, 1, 2, 3)) -> TurboCodeSpec:
    return TurboCodeSpec(hamming74(), K=4, interleaver=interleaver)


def drp_interleaver(length: int, step: int, read_dither: Sequence[int], write_dither: Sequence[int], start: int = 0):
    """Dithered relative prime interleaver.

    A read dither permutes within blocks of ``len(read_dither)``, a relative
    prime step walks the result, and a write dither permutes the output
    blocks.  Both dither lengths must divide ``length``.
    """
    r, w = len(read_dither), len(write_dither)
    if length % r or length % w:
        raise ValueError("dither lengths must divide the interleaver length")
    if math.gcd(step, length) != 1:
        raise ValueError("step must be relatively prime to the length")
    a = [r * (i // r) + read_dither[i % r] for i in range(length)]
    b = [a[(start + i * step) % length] for i in range(length)]
    c = [b[w * (i // w) + write_dither[i % w]] for i in range(length)]
    # c[i] is the input index read at output slot i; return it as input -> slot
    perm = [0] * length
    for slot, src in enumerate(c):
        perm[src] = slot
    return tuple(perm)


# ----------------------------------------------------------------------------
# file formats


def _parse_bits(s: str) -> tuple[int, ...]:
    s = s.replace(" ", "")
    if not s or any(ch not in "01" for ch in s):
        raise ValueError(f"expected a 0/1 string, got {s!r}")
    return tuple(int(ch) for ch in s)


def load_interleaver(path) -> tuple[int, ...]:
    text = Path(path).read_text()
    try:
        perm = tuple(int(tok) for tok in text.split())
    except ValueError as exc:
        raise SpecFormatError(f"non-integer entry ({exc})", str(path)) from None
    if sorted(perm) != list(range(len(perm))):
        raise SpecFormatError("entries are not a permutation of 0..L-1", str(path))
    return perm


def format_interleaver(perm: Sequence[int]) -> str:
    return " ".join(str(int(x)) for x in perm) + "\n"


def load_code_spec(path, interleaver: Sequence[int] | None = None) -> TurboCodeSpec:
    """Read a key-value code spec file.

    Recognized keys: ``constituent`` (a named code) or ``parity_check``
    (rows separated by ``;``, entries octal or algebraic), ``K``,
    ``interleaver``, ``puncture_a``, ``puncture_b``, ``multiplex``,
    ``tail_positions`` (``end``, ``auto`` or explicit positions).
    ``#`` starts a comment.
    """
    path = str(path)
    vals: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecFormatError(f"expected 'key = value', got {raw!r}", path, lineno)
        key, val = (x.strip() for x in line.split("=", 1))
        if key not in {"constituent", "parity_check", "K", "interleaver", "puncture_a", "puncture_b", "multiplex", "tail_positions"}:
            raise SpecFormatError(f"unknown key {key!r}", path, lineno)
        vals[key] = (val, lineno)

    def get(key, conv, default=None):
        if key not in vals:
            return default
        v, ln = vals[key]
        try:
            return conv(v)
        except (ValueError, KeyError) as exc:
            raise SpecFormatError(f"bad value for {key}: {exc}", path, ln) from None

    if "constituent" in vals:
        constituent = get("constituent", lambda v: NAMED_CONSTITUENTS[v]())
    elif "parity_check" in vals:
        constituent = get(
            "parity_check", lambda v: ConvCodeSpec.from_strings([row.split() for row in v.split(";")])
        )
    else:
        raise SpecFormatError("missing 'constituent' or 'parity_check'", path)
    if "K" not in vals:
        raise SpecFormatError("missing 'K'", path)
    K = get("K", int)
    perm = interleaver if interleaver is not None else get("interleaver", lambda v: tuple(int(x) for x in v.split()))
    if perm is None:
        raise SpecFormatError("no interleaver given (key or separate file)", path)
    mux = get("multiplex", lambda v: None if v == "default" else tuple(int(x) for x in v.split()))
    tail = get("tail_positions", lambda v: v if v in ("end", "auto") else tuple(int(x) for x in v.split()), "end")
    spec = TurboCodeSpec(
        constituent,
        K=K,
        interleaver=perm,
        puncture_a=get("puncture_a", _parse_bits, (1,)),
        puncture_b=get("puncture_b", _parse_bits, (1,)),
        multiplex_order=mux,
        tail_positions=tail,
    )
    try:
        spec.validate()
    except ValueError as exc:
        raise SpecFormatError(str(exc), path) from None
    return spec


def format_code_spec(spec: TurboCodeSpec) -> str:
    from .trellis import format_poly_octal

    c = spec.constituent
    lines = []
    if c.name in NAMED_CONSTITUENTS:
        lines.append(f"constituent = {c.name}")
    else:
        rows = "; ".join(" ".join(format_poly_octal(p) for p in row) for row in c.parity_check)
        lines.append(f"parity_check = {rows}")
    lines.append(f"K = {spec.K}")
    lines.append("interleaver = " + " ".join(map(str, spec.interleaver)))
    lines.append("puncture_a = " + "".join(map(str, spec.puncture_a)))
    lines.append("puncture_b = " + "".join(map(str, spec.puncture_b)))
    mux = "default" if spec.multiplex_order is None else " ".join(map(str, spec.multiplex_order))
    lines.append(f"multiplex = {mux}")
    tp = spec.tail_positions
    lines.append("tail_positions = " + (tp if isinstance(tp, str) else " ".join(map(str, tp))))
    return "\n".join(lines) + "\n"
