"""Command-line front end and Monte-Carlo frame-error simulation."""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import bec_decode as bd
from .pccc import (
    NAMED_CONSTITUENTS,
    SpecFormatError,
    TurboCode,
    encode,
    hamming_spec,
    load_code_spec,
    load_interleaver,
    make_turbo_code,
    toy_spec,
)

__all__ = ["SimConfig", "SimRecord", "simulate_fer", "write_csv", "read_csv", "run_command", "main", "THREADS_ENV"]

THREADS_ENV = "TURBOBEC_THREADS"
CSV_FIELDS = ("epsilon", "frames", "frame_errors", "fer", "mean_iterations", "ambiguous", "stderr")
PRESETS = {"toy": toy_spec, "hamming": hamming_spec}
DECODERS = ("basic", "improved", "ml")


class DataError(Exception):
    """Bad input data (files, words, parameters); maps to exit code 2."""


@dataclass
class SimConfig:
    code: TurboCode
    epsilons: Sequence[float]
    frames: int = 1000
    l_max: int | None = 10_000
    decoder: str = "basic"
    discipline: str = "lifo"
    seed: int = 0
    threads: int | None = None

    def validate(self) -> None:
        if self.frames < 1:
            raise ValueError("frames must be at least 1")
        if any(not 0.0 <= e <= 1.0 for e in self.epsilons):
            raise ValueError("epsilon values must lie in [0, 1]")
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}")


@dataclass
class SimRecord:
    epsilon: float
    frames: int
    frame_errors: int
    mean_iterations: float
    ambiguous: int
    wall_time: float = field(default=0.0, compare=False)

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames

    @property
    def stderr(self) -> float:
        p = self.fer
        return math.sqrt(p * (1.0 - p) / self.frames)


def _decode(received, code, cfg_decoder, l_max, discipline):
    if cfg_decoder == "basic":
        return bd.turbo_decode(received, code, l_max=l_max if l_max is not None else 10_000)
    if cfg_decoder == "improved":
        return bd.improved_decode(received, code, l_max=l_max, discipline=discipline)
    return bd.ml_decode_oracle(received, code)


def _frame_block(code: TurboCode, eps_index: int, eps: float, start: int, stop: int, decoder, l_max, discipline, seed):
    """Simulate frames ``start..stop-1``; returns (errors, iteration sum, ambiguous)."""
    errors = iters = amb = 0
    memo: dict[bytes, bd.DecodeOutcome] = {}
    for f in range(start, stop):
        rng = np.random.default_rng(np.random.SeedSequence([seed, eps_index, f]))
        info = rng.integers(0, 2, code.K)
        cw = encode(info, code)
        rx = bd.bec_transmit(cw, eps, rng)
        key = rx.symbols.tobytes()
        out = memo.get(key)
        if out is None:
            out = memo[key] = _decode(rx, code, decoder, l_max, discipline)
        iters += out.iterations
        if out.status is bd.Status.AMBIGUOUS:
            amb += 1
        got = out.codeword
        if got is None or not np.array_equal(got, cw):
            errors += 1
    return errors, iters, amb


def _threads(cfg: SimConfig) -> int:
    if cfg.threads is not None:
        return max(1, cfg.threads)
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def simulate_fer(cfg: SimConfig) -> list[SimRecord]:
    """FER and mean iteration count per erasure probability.

    Every frame draws its information bits and erasures from its own
    substream ``SeedSequence([seed, eps_index, frame])``, so results do not
    depend on the worker count and two decoders run with the same seed see
    the same frames.  Ambiguous outcomes count as frame errors.
    """
    cfg.validate()
    workers = _threads(cfg)
    records = []
    for ei, eps in enumerate(cfg.epsilons):
        t0 = time.perf_counter()
        args = (cfg.decoder, cfg.l_max, cfg.discipline, cfg.seed)
        if workers == 1:
            parts = [_frame_block(cfg.code, ei, eps, 0, cfg.frames, *args)]
        else:
            bounds = np.linspace(0, cfg.frames, workers + 1).astype(int)
            with ProcessPoolExecutor(workers) as ex:
                futs = [
                    ex.submit(_frame_block, cfg.code, ei, eps, int(a), int(b), *args)
                    for a, b in zip(bounds[:-1], bounds[1:])
                    if b > a
                ]
                parts = [f.result() for f in futs]
        errors, iters, amb = (sum(p[i] for p in parts) for i in range(3))
        records.append(SimRecord(float(eps), cfg.frames, errors, iters / cfg.frames, amb, time.perf_counter() - t0))
    return records


def write_csv(records: Sequence[SimRecord], stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow([repr(r.epsilon), r.frames, r.frame_errors, repr(r.fer), repr(r.mean_iterations), r.ambiguous, repr(r.stderr)])


def read_csv(stream) -> list[SimRecord]:
    rows = list(csv.DictReader(stream))
    if rows and tuple(rows[0].keys()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {tuple(rows[0].keys())}")
    return [
        SimRecord(float(r["epsilon"]), int(r["frames"]), int(r["frame_errors"]), float(r["mean_iterations"]), int(r["ambiguous"]))
        for r in rows
    ]


# ----------------------------------------------------------------------------
# argument handling


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise DataError(f"bad number list {text!r}: {exc}") from None


def _parse_positions(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise DataError(f"bad position list {text!r}: {exc}") from None


def _load_code(args) -> TurboCode:
    perm = load_interleaver(args.interleaver) if args.interleaver else None
    if args.code:
        spec = load_code_spec(args.code, interleaver=perm)
    else:
        factory = PRESETS[args.preset]
        spec = factory(perm) if perm is not None else factory()
    return make_turbo_code(spec)


def _add_code_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--code", help="code spec file (key = value lines)")
    p.add_argument("--preset", choices=sorted(PRESETS), default="toy", help="built-in code when --code is absent")
    p.add_argument("--interleaver", help="interleaver file, overrides the one in the spec")


def _open_out(path):
    return open(path, "w", newline="") if path and path != "-" else None


def _emit(text: str, path) -> None:
    fh = _open_out(path)
    if fh is None:
        sys.stdout.write(text)
    else:
        with fh:
            fh.write(text)


def cmd_encode(args) -> int:
    code = _load_code(args)
    try:
        info = [int(ch) for ch in args.info.strip()]
    except ValueError:
        raise DataError(f"information word must be a 0/1 string, got {args.info!r}") from None
    if len(info) != code.K or any(b not in (0, 1) for b in info):
        raise DataError(f"information word must have {code.K} bits in {{0, 1}}")
    print("".join(map(str, encode(info, code))))
    return 0


def cmd_decode(args) -> int:
    code = _load_code(args)
    try:
        rx = bd.ReceivedWord.parse(args.received)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    if len(rx) != code.N:
        raise DataError(f"received word has length {len(rx)}, code length is {code.N}")
    out = _decode(rx, code, args.decoder, args.l_max, args.discipline)
    print(f"status: {out.status.value}")
    print(f"estimate: {out.estimate}")
    print(f"residual: {' '.join(map(str, sorted(out.residual)))}")
    print(f"iterations: {out.iterations}")
    return 0


def cmd_simulate(args) -> int:
    code = _load_code(args)
    cfg = SimConfig(
        code,
        _parse_floats(args.eps),
        frames=args.frames,
        l_max=args.l_max,
        decoder=args.decoder,
        discipline=args.discipline,
        seed=args.seed,
        threads=args.threads,
    )
    try:
        recs = simulate_fer(cfg)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    buf = io.StringIO()
    write_csv(recs, buf)
    _emit(buf.getvalue(), args.output)
    return 0


def cmd_enumerate(args) -> int:
    from .stopsets import EnumerationResult, brute_force_stopping_sets, format_report, gpb_enumerate

    code = _load_code(args)
    if args.tau < 0:
        raise DataError("tau must be non-negative")
    if args.method == "brute":
        res = EnumerationResult(brute_force_stopping_sets(code, args.tau), args.tau)
    else:
        res = gpb_enumerate(code, args.tau, prune_alpha=args.prune_alpha)
    _emit(format_report(code, res), args.output)
    return 0


def cmd_uniform(args) -> int:
    from .algebra import EnumFn
    from .uniform import format_enumfn, irtssef_uniform, sirsef_block, sirsef_conv, tssef

    c = NAMED_CONSTITUENTS[args.constituent]()
    I = args.interleaver_length
    if I is None:
        if c.nu:
            raise DataError("--interleaver-length is required for a convolutional constituent")
        I = c.k
    if c.nu == 0 and I != c.k:
        raise DataError(f"a block constituent has interleaver length {c.k}")
    if c.nu == 0 or args.mode == "codeword":
        A = sirsef_block(c, I, mode=args.mode)
    else:
        max_total = args.max_total if args.max_total is not None else I * c.n
        A = sirsef_conv(c, I, max_total, exact=args.exact)
    S = irtssef_uniform(A, A, I)
    if args.max_total is not None:
        A = A.truncate(args.max_total)
        S = S.truncate(args.max_total)
    T = tssef(S, args.mode)
    if args.format == "records":
        parts = {"sirsef": A, "irtssef": S}
        out = "".join(f"# {name}\n" + format_enumfn(parts[name]) for name in args.show if name in parts)
        if "tssef" in args.show:
            out += "# tssef\n" + format_enumfn(EnumFn({(0, z): c for z, c in T.items()}))
    else:
        lines = []
        for name in args.show:
            val = {"sirsef": A, "irtssef": S, "tssef": T}[name]
            prefix = f"{name}: " if len(args.show) > 1 else ""
            lines.append(prefix + (val.to_string() if name != "tssef" else val.to_string("X")))
        out = "\n".join(lines) + "\n"
    _emit(out, args.output)
    return 0


def cmd_check_stopset(args) -> int:
    from .stopsets import is_codeword_support, is_turbo_stopping_set

    code = _load_code(args)
    pos = _parse_positions(args.positions)
    if any(p < 0 or p >= code.N for p in pos):
        raise DataError(f"positions must lie in 0..{code.N - 1}")
    if is_turbo_stopping_set(code, pos):
        kind = "codeword" if is_codeword_support(code, pos) else "non-codeword"
        print(f"stopping set: yes ({kind})")
    else:
        print("stopping set: no")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="turbobec", description="Turbo codes on the binary erasure channel.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    e = sub.add_parser("encode", help="encode an information word")
    _add_code_args(e)
    e.add_argument("--info", required=True, help="information bits as a 0/1 string")
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="decode a received word ('?' marks an erasure)")
    _add_code_args(d)
    d.add_argument("--received", required=True)
    d.add_argument("--decoder", choices=DECODERS, default="basic")
    d.add_argument("--l-max", type=int, default=None, help="iteration budget (default: unbounded for improved)")
    d.add_argument("--discipline", choices=("lifo", "fifo"), default="lifo")
    d.set_defaults(func=cmd_decode)

    s = sub.add_parser("simulate", help="Monte-Carlo FER sweep, CSV output")
    _add_code_args(s)
    s.add_argument("--eps", required=True, help="comma-separated erasure probabilities")
    s.add_argument("--frames", type=int, default=1000)
    s.add_argument("--l-max", type=int, default=None)
    s.add_argument("--decoder", choices=DECODERS, default="basic")
    s.add_argument("--discipline", choices=("lifo", "fifo"), default="lifo")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=None, help=f"worker processes (default: ${THREADS_ENV} or 1)")
    s.add_argument("--output", "-o", default="-")
    s.set_defaults(func=cmd_simulate)

    n = sub.add_parser("enumerate", help="list stopping sets up to a size")
    _add_code_args(n)
    n.add_argument("--tau", type=int, required=True)
    n.add_argument("--method", choices=("gpb", "brute"), default="gpb")
    n.add_argument("--prune-alpha", type=int, default=None)
    n.add_argument("--output", "-o", default="-")
    n.set_defaults(func=cmd_enumerate)

    u = sub.add_parser("uniform", help="uniform-interleaver size enumerators")
    u.add_argument("--constituent", choices=sorted(NAMED_CONSTITUENTS), required=True)
    u.add_argument("--interleaver-length", type=int, default=None)
    u.add_argument("--mode", choices=("stopping", "codeword"), default="stopping")
    u.add_argument("--max-total", type=int, default=None, help="truncate to total size")
    u.add_argument("--exact", action="store_true", help="exact detour placement for convolutional constituents")
    u.add_argument("--show", nargs="+", choices=("sirsef", "irtssef", "tssef"), default=["tssef"])
    u.add_argument("--format", choices=("text", "records"), default="text")
    u.add_argument("--output", "-o", default="-")
    u.set_defaults(func=cmd_uniform)

    c = sub.add_parser("check-stopset", help="test whether positions form a turbo stopping set")
    _add_code_args(c)
    c.add_argument("--positions", required=True, help="comma-separated code positions")
    c.set_defaults(func=cmd_check_stopset)
    return p


def run_command(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; usage errors are 1 here
        return 0 if exc.code == 0 else 1
    try:
        return args.func(args)
    except SpecFormatError as exc:
        print(f"turbobec: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError, ValueError) as exc:
        print(f"turbobec: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
