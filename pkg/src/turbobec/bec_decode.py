"""Erasure channel, boolean turbo decoding, improved (guessing) decoding and an ML oracle."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import solve_gf2
from .pccc import TurboCode
from .trellis import unroll

__all__ = [
    "ERASED",
    "Status",
    "ReceivedWord",
    "DecodeOutcome",
    "DecoderState",
    "ChannelContractViolated",
    "SelectionUnavailable",
    "bec_transmit",
    "turbo_decode",
    "run_turbo",
    "select_bit_position",
    "improved_decode",
    "ml_decode_oracle",
]

ERASED = -1


class ChannelContractViolated(ValueError):
    """The received word agrees with no codeword."""


class SelectionUnavailable(RuntimeError):
    """No vertex-count transition to guess from (only possible on a broken stall)."""


class Status(enum.Enum):
    RECOVERED = "recovered"
    STALLED = "stalled"
    AMBIGUOUS = "ambiguous"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True, eq=False)
class ReceivedWord:
    """Ternary word; ``symbols[p]`` is 0, 1 or ``ERASED``."""

    symbols: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=np.int8)
        if s.ndim != 1 or np.any((s != 0) & (s != 1) & (s != ERASED)):
            raise ValueError("symbols must be a 1-d array over {0, 1, ERASED}")
        s.setflags(write=False)
        object.__setattr__(self, "symbols", s)

    @classmethod
    def from_codeword(cls, codeword: Sequence[int], erased: Sequence[int] | int = ()) -> "ReceivedWord":
        s = np.array(codeword, dtype=np.int8)
        if isinstance(erased, (int, np.integer)):
            erased = [p for p in range(len(s)) if (int(erased) >> p) & 1]
        s[list(erased)] = ERASED
        return cls(s)

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other) -> bool:
        return isinstance(other, ReceivedWord) and np.array_equal(self.symbols, other.symbols)

    def __hash__(self) -> int:
        return hash(self.symbols.tobytes())

    @property
    def erasures(self) -> frozenset[int]:
        return frozenset(int(p) for p in np.flatnonzero(self.symbols == ERASED))

    def to_list(self) -> list[int]:
        return [int(x) for x in self.symbols]

    def __str__(self) -> str:
        return "".join("?" if x == ERASED else str(int(x)) for x in self.symbols)

    @classmethod
    def parse(cls, text: str) -> "ReceivedWord":
        """Inverse of ``str``: characters ``0``, ``1`` and ``?`` (or ``e``/``*``)."""
        table = {"0": 0, "1": 1, "?": ERASED, "e": ERASED, "*": ERASED}
        try:
            return cls(np.array([table[ch] for ch in text.strip() if not ch.isspace()], dtype=np.int8))
        except KeyError as exc:
            raise ValueError(f"bad received-word character {exc}") from None


@dataclass
class DecodeOutcome:
    status: Status
    estimate: ReceivedWord
    residual: frozenset[int]
    iterations: int
    guesses: list[tuple[int, int]] = field(default_factory=list)
    # every (branch, selected position) pair, for instrumentation
    selections: list[tuple[tuple[tuple[int, int], ...], int]] = field(default_factory=list)
    branches: int = 0

    @property
    def codeword(self) -> np.ndarray | None:
        if self.status is Status.RECOVERED:
            return self.estimate.symbols.astype(np.uint8)
        return None


def bec_transmit(codeword: Sequence[int], epsilon: float, seed=None) -> ReceivedWord:
    """Erase each position independently with probability ``epsilon``."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    c = np.asarray(codeword, dtype=np.int8)
    mask = rng.random(len(c)) < epsilon
    out = c.copy()
    out[mask] = ERASED
    return ReceivedWord(out)


# ----------------------------------------------------------------------------
# per-constituent decoding tables


class _Constituent:
    """Unrolled information bit-oriented trellis with edges resolved to turbo positions."""

    def __init__(self, code: TurboCode, which: str):
        t = unroll(code.module, code.I)
        slots = code.turbo_slots_a if which == "a" else code.turbo_slots_b
        self.depth = t.depth
        self.nv = t.num_vertices
        self.edges = []  # per section: list of (left, right, checks) with checks ((pos, bit), ...)
        for j in range(t.depth):
            row = []
            for (l, r, label, _inp, _d) in t.edges[j]:
                checks = tuple((p, b) for p, b in zip(slots[j], label) if p is not None)
                row.append((l, r, checks))
            self.edges.append(row)
        self.section_positions = [tuple(p for p in slots[j] if p is not None) for j in range(t.depth)]

    def run(self, est: list[int], beta_prev: list[list[bool]]):
        """One forward and backward pass; updates ``est`` in place.

        Returns ``(alpha, beta, consistent)``.
        """
        I = self.depth
        alpha = [[False] * n for n in self.nv]
        alpha[0][0] = True
        for j in range(I):
            a_l = alpha[j]
            a_r = alpha[j + 1]
            bp = beta_prev[j + 1]
            for (l, r, checks) in self.edges[j]:
                if a_l[l] and bp[r] and not a_r[r] and _ok(checks, est):
                    a_r[r] = True
        beta = [[False] * n for n in self.nv]
        beta[I][0] = alpha[I][0]
        for j in range(I - 1, -1, -1):
            b_r = beta[j + 1]
            b_l = beta[j]
            a_l = alpha[j]
            for (l, r, checks) in self.edges[j]:
                if a_l[l] and b_r[r] and not b_l[l] and _ok(checks, est):
                    b_l[l] = True
        consistent = all(any(a) for a in alpha) and all(any(b) for b in beta)
        if consistent:
            for j in range(I):
                vals: dict[int, int] = {}
                a_l, b_r = beta[j], beta[j + 1]
                for (l, r, checks) in self.edges[j]:
                    if a_l[l] and b_r[r] and _ok(checks, est):
                        for p, b in checks:
                            if est[p] == ERASED:
                                prev = vals.get(p)
                                if prev is None:
                                    vals[p] = b
                                elif prev != b:
                                    vals[p] = 2
                for p, v in vals.items():
                    if v != 2:
                        est[p] = v
        return alpha, beta, consistent


def _ok(checks, est) -> bool:
    for p, b in checks:
        e = est[p]
        if e != ERASED and e != b:
            return False
    return True


def _tables(code: TurboCode) -> tuple[_Constituent, _Constituent]:
    t = getattr(code, "_decoder_tables", None)
    if t is None:
        t = (_Constituent(code, "a"), _Constituent(code, "b"))
        code._decoder_tables = t
    return t


@dataclass
class DecoderState:
    """Metrics after the latest pass of each constituent."""

    alpha: dict[str, list[list[bool]]]
    beta: dict[str, list[list[bool]]]
    estimate: list[int]
    iterations: int
    consistent: bool = True

    def gamma(self, which: str) -> list[int]:
        """Number of legal vertices per depth."""
        return [sum(a and b for a, b in zip(al, bl)) for al, bl in zip(self.alpha[which], self.beta[which])]


@dataclass
class _RunResult:
    kind: str  # "recovered" | "stalled" | "budget" | "inconsistent"
    state: DecoderState


def run_turbo(code: TurboCode, estimate: list[int], l_max: int) -> _RunResult:
    """Iterate both constituent decoders on ``estimate`` (modified in place).

    Stops on recovery, when the metrics stop changing, on an inconsistency,
    or after ``l_max`` iterations.  One iteration is a pass of the first
    constituent followed by a pass of the second.
    """
    dec = {"a": None, "b": None}
    dec["a"], dec["b"] = _tables(code)
    beta_prev = {x: [[True] * n for n in dec[x].nv] for x in "ab"}
    for x in "ab":
        beta_prev[x][-1] = [v == 0 for v in range(dec[x].nv[-1])]
    sys_pos = code.maps.systematic_positions
    prev = None
    alpha, beta = {}, {}
    it = 0
    while True:
        it += 1
        for x in "ab":
            alpha[x], beta[x], ok = dec[x].run(estimate, beta_prev[x])
            beta_prev[x] = [list(b) for b in beta[x]]
            beta_prev[x][-1] = [v == 0 for v in range(dec[x].nv[-1])]
            if not ok:
                return _RunResult("inconsistent", DecoderState(alpha, beta, estimate, it, False))
        state = DecoderState(dict(alpha), dict(beta), estimate, it)
        if all(estimate[p] != ERASED for p in sys_pos):
            return _RunResult("recovered", state)
        cur = (alpha["a"], beta["a"], alpha["b"], beta["b"])
        if prev is not None and cur == prev:
            return _RunResult("stalled", state)
        if it >= l_max:
            return _RunResult("budget", state)
        prev = cur


def _fill_from_systematic(code: TurboCode, estimate: list[int]) -> list[int] | None:
    """Re-encode from the systematic bits; ``None`` if that disagrees with known bits."""
    u = [estimate[p] for p in code.maps.systematic_positions]
    la, sa = code.run_encoder(u)
    lb, sb = code.run_encoder(code.interleave(u))
    if sa or sb:
        return None
    word = list(estimate)
    for labels, slots in ((la, code.turbo_slots_a), (lb, code.turbo_slots_b)):
        for lab, row in zip(labels, slots):
            for bit, p in zip(lab, row):
                if p is None:
                    continue
                if word[p] != ERASED and word[p] != bit:
                    return None
                word[p] = bit
    return word


def _outcome(status, est, T, **kw) -> DecodeOutcome:
    rw = ReceivedWord(np.array(est, dtype=np.int8))
    return DecodeOutcome(status, rw, rw.erasures, T, **kw)


def turbo_decode(received: ReceivedWord, code: TurboCode, l_max: int = 10_000) -> DecodeOutcome:
    """Basic boolean turbo decoding on the erasure channel."""
    if len(received) != code.N:
        raise ValueError(f"received word has length {len(received)}, code length is {code.N}")
    est = received.to_list()
    res = run_turbo(code, est, l_max)
    T = res.state.iterations
    if res.kind == "recovered":
        full = _fill_from_systematic(code, est)
        if full is None:
            raise ChannelContractViolated("recovered systematic bits do not re-encode to the received word")
        return _outcome(Status.RECOVERED, full, T)
    if res.kind == "inconsistent":
        raise ChannelContractViolated("received word is inconsistent with every codeword")
    status = Status.STALLED if res.kind == "stalled" else Status.BUDGET_EXHAUSTED
    return _outcome(status, est, T)


def _runs(g: Sequence[int]):
    """Helper for the selection rule: ``(l, w_f, f, w_r, r)`` from a legal-vertex profile."""
    n = len(g)
    l_cnt = sum(1 for j in range(n - 1) if g[j] == 1 and g[j + 1] == 2)
    w_f, f_best = -1, None
    for f in range(1, n):
        if g[f - 1] == 1 and g[f] == 2:
            w = 0
            while f + w + 1 < n and g[f + w + 1] == 2:
                w += 1
            if w > w_f:
                w_f, f_best = w, f
    w_r, r_best = -1, None
    for r in range(n - 1):
        if g[r + 1] == 1 and g[r] == 2:
            w = 0
            while r - w - 1 >= 0 and g[r - w - 1] == 2:
                w += 1
            if w > w_r:
                w_r, r_best = w, r
    return l_cnt, w_f, f_best, w_r, r_best


def select_bit_position(state: DecoderState, code: TurboCode) -> int:
    """Systematic index to guess after a stall, from the legal-vertex counts.

    A constituent with more 1 -> 2 count transitions wins (ties go to the
    first constituent when its longest run of 2s is at least as long).
    Within it the longest forward or backward run of 2s decides the
    position; second-constituent positions are de-interleaved.
    """
    stats = {}
    for x in "ab":
        l_cnt, w_f, f, w_r, r = _runs(state.gamma(x))
        stats[x] = (l_cnt, w_f, f, w_r, r, max(w_f, w_r))
    la, wa = stats["a"][0], stats["a"][5]
    lb, wb = stats["b"][0], stats["b"][5]
    x = "a" if (la > lb or (la == lb and wa >= wb)) else "b"
    _, w_f, f, w_r, r, w = stats[x]
    if w < 0:
        raise SelectionUnavailable("no 1 -> 2 legal-vertex transition")
    v = f - 1 if w_f >= w_r else r
    if x == "b":
        v = code.inv_perm[v]
    return v


def improved_decode(
    received: ReceivedWord,
    code: TurboCode,
    l_max: int | None = None,
    discipline: str = "lifo",
    emit_codeword: bool = False,
    on_select: Callable[[tuple, int], None] | None = None,
) -> DecodeOutcome:
    """Turbo decoding with guessing of erased systematic bits.

    With ``l_max=None`` the search is unbounded and the result is maximum
    likelihood.  By default the whole guess tree is drained so that an
    erasure pattern admitting several codewords is reported as
    ``AMBIGUOUS`` (estimate holds the bits common to all of them).  With
    ``emit_codeword=True`` the first recovered codeword is returned.
    On ``BUDGET_EXHAUSTED`` the estimate is the one before any guess, so
    no unverified bit is emitted.
    """
    if discipline not in ("lifo", "fifo"):
        raise ValueError("discipline must be 'lifo' or 'fifo'")
    if len(received) != code.N:
        raise ValueError(f"received word has length {len(received)}, code length is {code.N}")
    budget = float("inf") if l_max is None else l_max
    sys_pos = code.maps.systematic_positions
    est = received.to_list()
    res = run_turbo(code, est, budget)
    T = res.state.iterations
    selections: list = []
    if res.kind == "inconsistent":
        raise ChannelContractViolated("received word is inconsistent with every codeword")
    if res.kind == "recovered":
        full = _fill_from_systematic(code, est)
        if full is None:
            raise ChannelContractViolated("recovered systematic bits do not re-encode to the received word")
        return _outcome(Status.RECOVERED, full, T)
    root = list(est)
    if T >= budget:
        return _outcome(Status.BUDGET_EXHAUSTED, root, T)

    v = select_bit_position(res.state, code)
    assert est[sys_pos[v]] == ERASED, "selected position is not erased"
    selections.append(((), v))
    if on_select:
        on_select((), v)
    pending = deque([((( v, 0),), list(est)), (((v, 1),), list(est))])
    solutions: list[tuple[list[int], tuple]] = []
    branches = 0
    exhausted = False
    while pending:
        if T >= budget:
            exhausted = True
            break
        L, est = pending.pop() if discipline == "lifo" else pending.popleft()
        branches += 1
        pos, val = L[-1]
        est[sys_pos[pos]] = val
        res = run_turbo(code, est, budget - T)
        T += res.state.iterations
        if res.kind == "recovered":
            full = _fill_from_systematic(code, est)
            if full is not None:
                solutions.append((full, L))
                if emit_codeword:
                    return _outcome(Status.RECOVERED, full, T, guesses=list(L), selections=selections, branches=branches)
            continue
        if res.kind == "inconsistent":
            continue
        if res.kind == "budget":
            exhausted = True
            break
        v = select_bit_position(res.state, code)
        assert est[sys_pos[v]] == ERASED, "selected position is not erased"
        selections.append((L, v))
        if on_select:
            on_select(L, v)
        pending.append((L + ((v, 0),), list(est)))
        pending.append((L + ((v, 1),), est))

    if exhausted:
        return _outcome(Status.BUDGET_EXHAUSTED, root, T, selections=selections, branches=branches)
    if not solutions:
        raise ChannelContractViolated("no codeword is consistent with the received word")
    words = {tuple(w) for w, _ in solutions}
    if len(words) == 1:
        full, L = solutions[0]
        return _outcome(Status.RECOVERED, full, T, guesses=list(L), selections=selections, branches=branches)
    first = solutions[0][0]
    common = [b if all(w[p] == b for w in words) else ERASED for p, b in enumerate(first)]
    return _outcome(Status.AMBIGUOUS, common, T, selections=selections, branches=branches)


def ml_decode_oracle(received: ReceivedWord, code: TurboCode) -> DecodeOutcome:
    """Maximum-likelihood erasure decoding by solving for the information bits."""
    sym = received.to_list()
    if len(sym) != code.N:
        raise ValueError(f"received word has length {len(sym)}, code length is {code.N}")
    rows, rhs = [], []
    for p, s in enumerate(sym):
        if s != ERASED:
            rows.append(sum(((g >> p) & 1) << i for i, g in enumerate(code.generator)))
            rhs.append(s)
    sol = solve_gf2(rows, rhs, code.K)
    if sol is None:
        raise ChannelContractViolated("received word is inconsistent with every codeword")
    particular, kernel = sol
    word = code.encode_int(particular)
    free = 0
    for k in kernel:
        free |= code.encode_int(k)
    est = [ERASED if (free >> p) & 1 else (word >> p) & 1 for p in range(code.N)]
    status = Status.AMBIGUOUS if free else Status.RECOVERED
    return _outcome(status, est, 0)
