"""Exact GF(2) linear algebra, subspace counting and enumerating-function arithmetic.

Binary vectors are Python ints: bit ``j`` holds coordinate ``j``.  Matrices
given as 2-D 0/1 array-likes are converted row by row with column ``j`` in
bit ``j``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from math import comb
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "rows_to_ints",
    "ints_to_rows",
    "popcount",
    "parity",
    "gf2_rank",
    "rref_basis",
    "in_span",
    "span_elements",
    "solve_gf2",
    "nullspace",
    "gaussian_binomial",
    "count_subspaces",
    "iter_subspaces",
    "poly_deg",
    "poly_mul",
    "poly_divmod",
    "poly_gcd",
    "Poly",
    "EnumFn",
    "conditional_from_full",
]


def popcount(x: int) -> int:
    return bin(x).count("1")


def parity(x: int) -> int:
    return popcount(x) & 1


def rows_to_ints(m) -> list[int]:
    """Convert a 0/1 matrix (array-like) to a list of row bitmasks."""
    if isinstance(m, np.ndarray) and m.size == 0:
        return [0] * (m.shape[0] if m.ndim == 2 else 0)
    arr = np.asarray(m, dtype=np.int64) & 1
    if arr.ndim != 2:
        raise ValueError("expected a 2-D binary matrix")
    out = []
    for row in arr:
        v = 0
        for j in np.flatnonzero(row):
            v |= 1 << int(j)
        out.append(v)
    return out


def ints_to_rows(rows: Sequence[int], ncols: int) -> np.ndarray:
    out = np.zeros((len(rows), ncols), dtype=np.uint8)
    for i, v in enumerate(rows):
        for j in range(ncols):
            out[i, j] = (v >> j) & 1
    return out


def _as_int_rows(m) -> list[int]:
    if isinstance(m, (list, tuple)) and all(isinstance(v, (int, np.integer)) for v in m):
        return [int(v) for v in m]
    return rows_to_ints(m)


def rref_basis(vectors: Iterable[int]) -> tuple[int, ...]:
    """Canonical basis of the span of ``vectors``.

    Reduced row-echelon form with the highest set bit of each row as its
    pivot; pivots appear in no other row and rows are sorted descending.
    Equal spans give equal tuples, so the result can key a subspace.
    """
    rows: dict[int, int] = {}  # pivot bit -> row
    for v in vectors:
        v = int(v)
        for h in sorted(rows, reverse=True):
            if (v >> h) & 1:
                v ^= rows[h]
        if not v:
            continue
        h = v.bit_length() - 1
        for p in rows:
            if (rows[p] >> h) & 1:
                rows[p] ^= v
        rows[h] = v
    return tuple(rows[h] for h in sorted(rows, reverse=True))


def gf2_rank(m) -> int:
    """Rank over GF(2) of a binary matrix (array-like or list of row ints)."""
    return len(rref_basis(_as_int_rows(m)))


def in_span(basis: Sequence[int], v: int) -> bool:
    """Membership test against a basis in :func:`rref_basis` form."""
    for r in basis:
        if (v >> (r.bit_length() - 1)) & 1:
            v ^= r
    return v == 0


def span_elements(basis: Sequence[int]) -> list[int]:
    """All 2**len(basis) elements of the span."""
    out = [0]
    for b in basis:
        out += [x ^ b for x in out]
    return out


def solve_gf2(rows: Sequence[int], rhs: Sequence[int] | int, nvars: int):
    """Solve ``A x = b`` over GF(2).

    ``rows[i]`` is the coefficient mask of equation ``i`` over ``nvars``
    unknowns and ``rhs`` is either a bit sequence or an int bitmask over the
    equations.  Returns ``(particular, kernel_basis)`` with ``particular`` an
    int bitmask, or ``None`` when the system is inconsistent.
    """
    if isinstance(rhs, int):
        rhs = [(rhs >> i) & 1 for i in range(len(rows))]
    aug = [int(r) | (int(b) << nvars) for r, b in zip(rows, rhs)]
    mask = (1 << nvars) - 1
    pivot_rows: list[tuple[int, int]] = []  # (pivot column, row)
    for r in aug:
        for col, pr in pivot_rows:
            if (r >> col) & 1:
                r ^= pr
        if r & mask == 0:
            if r:
                return None
            continue
        col = (r & -r).bit_length() - 1
        pivot_rows = [(c, pr ^ r) if (pr >> col) & 1 else (c, pr) for c, pr in pivot_rows]
        pivot_rows.append((col, r))
    particular = 0
    pivot_cols = set()
    for col, r in pivot_rows:
        pivot_cols.add(col)
        if (r >> nvars) & 1:
            particular |= 1 << col
    kernel = []
    for free in range(nvars):
        if free in pivot_cols:
            continue
        v = 1 << free
        for col, r in pivot_rows:
            if (r >> free) & 1:
                v |= 1 << col
        kernel.append(v)
    return particular, kernel


def nullspace(rows: Sequence[int], ncols: int) -> list[int]:
    """Basis of ``{x : A x = 0}`` for ``A`` given as row bitmasks."""
    return solve_gf2(rows, [0] * len(rows), ncols)[1]


# ----------------------------------------------------------------------------
# subspace counting


def gaussian_binomial(k: int, n: int) -> int:
    """Number of ``k``-dimensional subspaces of ``GF(2)**n``."""
    if not 0 <= k <= n:
        raise ValueError(f"gaussian_binomial needs 0 <= k <= n, got k={k}, n={n}")
    num = den = 1
    for i in range(k):
        num *= (1 << (n - i)) - 1
        den *= (1 << (i + 1)) - 1
    return num // den


def count_subspaces(n: int) -> int:
    """Total number of subspaces of ``GF(2)**n``, the zero subspace included."""
    return sum(gaussian_binomial(j, n) for j in range(n + 1))


def iter_subspaces(n: int, max_dim: int | None = None) -> Iterator[tuple[int, ...]]:
    """Yield every subspace of ``GF(2)**n`` once, as a canonical basis.

    Walks reduced echelon forms by pivot set, so nothing is generated twice.
    Bases come out in the :func:`rref_basis` normal form.
    """
    top = n if max_dim is None else min(n, max_dim)
    for d in range(top + 1):
        for piv in itertools.combinations(range(n - 1, -1, -1), d):
            # row r has pivot piv[r]; free entries are the non-pivot bits below it
            free_slots = []
            pivset = set(piv)
            for r, p in enumerate(piv):
                for b in range(p):
                    if b not in pivset:
                        free_slots.append((r, b))
            for fill in range(1 << len(free_slots)):
                rows = [1 << p for p in piv]
                for idx, (r, b) in enumerate(free_slots):
                    if (fill >> idx) & 1:
                        rows[r] |= 1 << b
                yield tuple(rows)


# ----------------------------------------------------------------------------
# GF(2)[D] polynomials as ints (bit i = coefficient of D**i)


def poly_deg(p: int) -> int:
    return p.bit_length() - 1


def poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_divmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("polynomial division by zero")
    q = 0
    db = poly_deg(b)
    while a and poly_deg(a) >= db:
        s = poly_deg(a) - db
        q |= 1 << s
        a ^= b << s
    return q, a


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_divmod(a, b)[1]
    return a


# ----------------------------------------------------------------------------
# exact enumerating functions


def _frac(c) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class Poly:
    """Univariate polynomial with exact rational coefficients.

    Stored sparsely; zero coefficients are never kept.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[int, object] | None = None):
        c: dict[int, Fraction] = {}
        for e, v in (coeffs or {}).items():
            if e < 0:
                raise ValueError("negative exponent")
            v = _frac(v)
            if v:
                c[int(e)] = c.get(int(e), Fraction(0)) + v
                if not c[int(e)]:
                    del c[int(e)]
        self._c = c

    @classmethod
    def from_list(cls, coeffs: Sequence[object]) -> "Poly":
        return cls({i: v for i, v in enumerate(coeffs)})

    @property
    def coeffs(self) -> dict[int, Fraction]:
        return dict(self._c)

    def __getitem__(self, e: int) -> Fraction:
        return self._c.get(e, Fraction(0))

    def degree(self) -> int:
        return max(self._c) if self._c else -1

    def min_degree(self) -> int:
        return min(self._c) if self._c else -1

    def is_zero(self) -> bool:
        return not self._c

    def items(self):
        return sorted(self._c.items())

    def __add__(self, other: "Poly") -> "Poly":
        c = dict(self._c)
        for e, v in other._c.items():
            c[e] = c.get(e, Fraction(0)) + v
        return Poly(c)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + other.scale(-1)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        c: dict[int, Fraction] = {}
        for e1, v1 in self._c.items():
            for e2, v2 in other._c.items():
                c[e1 + e2] = c.get(e1 + e2, Fraction(0)) + v1 * v2
        return Poly(c)

    __rmul__ = __mul__

    def scale(self, s) -> "Poly":
        s = _frac(s)
        return Poly({e: v * s for e, v in self._c.items()})

    def __call__(self, x):
        return sum((v * _frac(x) ** e for e, v in self._c.items()), Fraction(0))

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def to_string(self, var: str = "X") -> str:
        return _format_terms((((e,), v) for e, v in self.items()), var) if self._c else "0"

    def __repr__(self) -> str:
        return f"Poly({self.to_string()})"


class EnumFn:
    """Bivariate enumerating function in ``W`` (input size) and ``Z`` (parity size).

    Coefficients are exact rationals keyed by ``(w, z)``.  Values are
    immutable: arithmetic returns new objects.
    """

    __slots__ = ("_t",)

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None):
        t: dict[tuple[int, int], Fraction] = {}
        for (w, z), v in (terms or {}).items():
            if w < 0 or z < 0:
                raise ValueError("negative exponent")
            v = _frac(v)
            key = (int(w), int(z))
            t[key] = t.get(key, Fraction(0)) + v
            if not t[key]:
                del t[key]
        self._t = t

    @classmethod
    def from_conditionals(cls, conds: Mapping[int, Poly]) -> "EnumFn":
        """Rebuild ``sum_w W**w * A_w(Z)``."""
        terms: dict[tuple[int, int], Fraction] = {}
        for w, p in conds.items():
            for z, v in p.items():
                terms[(w, z)] = terms.get((w, z), Fraction(0)) + v
        return cls(terms)

    @classmethod
    def from_counts(cls, counts: Mapping[tuple[int, int], int]) -> "EnumFn":
        return cls(dict(counts))

    @property
    def terms(self) -> dict[tuple[int, int], Fraction]:
        return dict(self._t)

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        return self._t.get(key, Fraction(0))

    def items(self):
        return sorted(self._t.items())

    def is_zero(self) -> bool:
        return not self._t

    def w_degree(self) -> int:
        return max((w for w, _ in self._t), default=-1)

    def w_values(self) -> list[int]:
        return sorted({w for w, _ in self._t})

    def conditional(self, w: int) -> Poly:
        """Coefficient polynomial of ``W**w`` as a polynomial in ``Z``."""
        return Poly({z: v for (ww, z), v in self._t.items() if ww == w})

    def total_size(self) -> Poly:
        """Project onto total size ``X**(w+z)``."""
        c: dict[int, Fraction] = {}
        for (w, z), v in self._t.items():
            c[w + z] = c.get(w + z, Fraction(0)) + v
        return Poly(c)

    def coefficient(self, w: int, z: int) -> Fraction:
        return self._t.get((w, z), Fraction(0))

    def truncate(self, max_total: int) -> "EnumFn":
        return EnumFn({k: v for k, v in self._t.items() if k[0] + k[1] <= max_total})

    def __add__(self, other: "EnumFn") -> "EnumFn":
        t = dict(self._t)
        for k, v in other._t.items():
            t[k] = t.get(k, Fraction(0)) + v
        return EnumFn(t)

    def __sub__(self, other: "EnumFn") -> "EnumFn":
        return self + other.scale(-1)

    def __mul__(self, other):
        if not isinstance(other, EnumFn):
            return self.scale(other)
        t: dict[tuple[int, int], Fraction] = {}
        for (w1, z1), v1 in self._t.items():
            for (w2, z2), v2 in other._t.items():
                k = (w1 + w2, z1 + z2)
                t[k] = t.get(k, Fraction(0)) + v1 * v2
        return EnumFn(t)

    __rmul__ = __mul__

    def scale(self, s) -> "EnumFn":
        s = _frac(s)
        return EnumFn({k: v * s for k, v in self._t.items()})

    def __call__(self, W, Z):
        W, Z = _frac(W), _frac(Z)
        return sum((v * W**w * Z**z for (w, z), v in self._t.items()), Fraction(0))

    def __eq__(self, other) -> bool:
        return isinstance(other, EnumFn) and self._t == other._t

    def __hash__(self):
        return hash(frozenset(self._t.items()))

    def to_string(self) -> str:
        """Human-readable form grouped by powers of ``W``."""
        if not self._t:
            return "0"
        parts = []
        for w in self.w_values():
            inner = _format_terms((((z,), v) for z, v in self.conditional(w).items()), "Z")
            wt = "" if w == 0 else ("W" if w == 1 else f"W^{w}")
            if w == 0:
                parts.append(inner)
            elif " + " in inner or "*" in inner or inner.startswith("-"):
                parts.append(f"{wt}({inner})")
            elif inner == "1":
                parts.append(wt)
            else:
                parts.append(f"{wt}*{inner}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"EnumFn({self.to_string()})"


def _fmt_coeff(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _format_terms(terms, var: str = "X") -> str:
    out = []
    for (e,), v in terms:
        if e == 0:
            out.append(_fmt_coeff(v))
            continue
        mono = var if e == 1 else f"{var}^{e}"
        out.append(mono if v == 1 else f"{_fmt_coeff(v)}*{mono}")
    return " + ".join(out)


def conditional_from_full(f: EnumFn, w: int) -> Poly:
    """``A_w(Z)``: the coefficient of ``W**w`` in ``f``; zero when absent."""
    return f.conditional(w)


def binomial(n: int, k: int) -> int:
    return comb(n, k) if 0 <= k <= n else 0
