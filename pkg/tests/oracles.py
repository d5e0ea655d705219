"""Exhaustive property checks shared by the unit and acceptance tests."""

from collections import defaultdict

from turbobec.bec_decode import ERASED, ReceivedWord, improved_decode, run_turbo, turbo_decode
from turbobec.stopsets import maximal_stopping_set_within


def bits(word: int, n: int) -> list[int]:
    return [(word >> p) & 1 for p in range(n)]


def decoder_failure_exceptions(code, sets, patterns=None) -> int:
    """Patterns where the basic decoder's residual differs from the maximal stopping set inside them."""
    masks = [s.mask for s in sets]
    bad = 0
    for E in patterns if patterns is not None else range(1 << code.N):
        out = turbo_decode(ReceivedWord.from_codeword([0] * code.N, E), code)
        if out.residual != maximal_stopping_set_within(masks, E):
            bad += 1
    return bad


def guess_value_violations(code, sets) -> tuple[int, int]:
    """Fix one erased bit of a stopping set to 0 and to 1; residuals must agree when both are consistent."""
    checked = bad = 0
    for cw in code.codewords():
        word = bits(cw, code.N)
        for s in sets:
            for j in s.positions:
                residuals = []
                for val in (0, 1):
                    est = list(word)
                    for p in s.positions:
                        est[p] = ERASED
                    est[j] = val
                    res = run_turbo(code, est, 10_000)
                    if res.kind == "inconsistent":
                        break
                    residuals.append({p for p, x in enumerate(est) if x == ERASED})
                if len(residuals) == 2:
                    checked += 1
                    bad += residuals[0] != residuals[1]
    return checked, bad


def _improved_runs(code):
    for cw in code.codewords():
        word = bits(cw, code.N)
        for E in range(1 << code.N):
            rx = ReceivedWord.from_codeword(word, E)
            sel = []
            improved_decode(rx, code, on_select=lambda L, v: sel.append((L, v)))
            yield rx, sel


def guess_position_violations(code) -> tuple[int, int]:
    """Branches of equal depth must have guessed, and then select, the same positions."""
    checked = bad = 0
    for _rx, sel in _improved_runs(code):
        by_depth = defaultdict(set)
        for L, v in sel:
            by_depth[len(L)].add((tuple(p for p, _ in L), v))
        checked += len(sel)
        bad += sum(len(x) > 1 for x in by_depth.values())
    return checked, bad


def selected_erased_violations(code) -> tuple[int, int]:
    """Replay every branch and confirm the selected systematic position is still erased."""
    sys_pos = code.maps.systematic_positions
    checked = bad = 0
    for rx, sel in _improved_runs(code):
        for L, v in sel:
            est = rx.to_list()
            res = run_turbo(code, est, 10_000)
            for pos, val in L:
                est[sys_pos[pos]] = val
                res = run_turbo(code, est, 10_000)
            assert res.kind == "stalled"
            checked += 1
            bad += est[sys_pos[v]] != ERASED
    return checked, bad
