"""Binary codebooks: construction, distances, erasure matching and list decoding.

Words of length ``n`` are stored as Python integers used as bit-vectors: bit
``t`` holds position ``t + 1`` of the written form, so ``"1000111"`` has bit 0
set. Codeword indices are 0-based everywhere.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EnumerationCap,
    LengthMismatch,
    LengthNotPowerOfTwo,
    MalformedInput,
    ParamRange,
    RankDeficient,
    SizeGuard,
)

MAX_BLOCK_LENGTH = 1 << 16
DEFAULT_ENUMERATION_CAP = 1 << 20

STRATEGIES = ("auto", "brute", "linear", "fht")


# ---------------------------------------------------------------------------
# bit-vector helpers
# ---------------------------------------------------------------------------

def parse_bits(s: str) -> int:
    """Parse a ``0``/``1`` string (leftmost character is position 1)."""
    value = 0
    for t, ch in enumerate(s):
        if ch == "1":
            value |= 1 << t
        elif ch != "0":
            raise MalformedInput(f"not a bit-string: {s!r}")
    return value


def format_bits(value: int, n: int) -> str:
    return "".join("1" if (value >> t) & 1 else "0" for t in range(n))


def hamming_distance(x: int, y: int, n: int | None = None, m: int | None = None) -> int:
    """Number of positions where ``x`` and ``y`` differ.

    ``n`` and ``m`` are the declared lengths of the two words; when both are
    given they must agree.
    """
    if n is not None and m is not None and n != m:
        raise LengthMismatch(f"lengths differ: {n} != {m}")
    return (x ^ y).bit_count()


@dataclass(frozen=True)
class ErasedWord:
    """A word over ``{0, 1, ?}``: value bits plus an erasure mask."""

    n: int
    values: int
    erased: int

    def __post_init__(self):
        full = (1 << self.n) - 1
        if self.erased & ~full or self.values & ~full:
            raise MalformedInput("bits set beyond the word length")
        # erased positions are normalised to 0
        object.__setattr__(self, "values", self.values & ~self.erased)

    @classmethod
    def parse(cls, s: str) -> "ErasedWord":
        values = erased = 0
        for t, ch in enumerate(s):
            if ch == "1":
                values |= 1 << t
            elif ch == "?":
                erased |= 1 << t
            elif ch != "0":
                raise MalformedInput(f"not a word over {{0,1,?}}: {s!r}")
        return cls(len(s), values, erased)

    def __str__(self) -> str:
        out = []
        for t in range(self.n):
            if (self.erased >> t) & 1:
                out.append("?")
            else:
                out.append("1" if (self.values >> t) & 1 else "0")
        return "".join(out)

    def matches(self, x: int) -> bool:
        """True if ``x`` agrees with this word on every non-erased position."""
        return not ((x ^ self.values) & ~self.erased)

    @property
    def erasure_count(self) -> int:
        return self.erased.bit_count()


# ---------------------------------------------------------------------------
# GF(2) linear algebra on int rows
# ---------------------------------------------------------------------------

def gf2_rank(rows: Iterable[int]) -> int:
    pivots: dict[int, int] = {}
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top not in pivots:
                pivots[top] = row
                break
            row ^= pivots[top]
    return len(pivots)


def _solve_gf2(equations: Iterable[tuple[int, int]], k: int):
    """Solve ``sum_t m_t a_t = b`` for every ``(a, b)`` over GF(2).

    Returns ``(particular, null_basis)`` or ``None`` when inconsistent. Rows are
    kept in reduced row-echelon form keyed by pivot bit.
    """
    rref: dict[int, list[int]] = {}
    for a, b in equations:
        for bit, (pa, pb) in rref.items():
            if (a >> bit) & 1:
                a ^= pa
                b ^= pb
        if not a:
            if b:
                return None
            continue
        bit = a.bit_length() - 1
        for other, row in rref.items():
            if (row[0] >> bit) & 1:
                row[0] ^= a
                row[1] ^= b
        rref[bit] = [a, b]
    particular = 0
    for bit, (_, b) in rref.items():
        if b:
            particular |= 1 << bit
    basis = []
    for f in range(k):
        if f in rref:
            continue
        vec = 1 << f
        for bit, (a, _) in rref.items():
            if (a >> f) & 1:
                vec |= 1 << bit
        basis.append(vec)
    return particular, basis


# ---------------------------------------------------------------------------
# Codebook
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistanceEnumerator:
    """Counts ``B_i`` of ordered codeword pairs at Hamming distance ``i``."""

    coefficients: tuple[int, ...]

    def __call__(self, p: float) -> float:
        return evaluate_enumerator(self, p)


@dataclass(frozen=True)
class Codebook:
    n: int
    codewords: tuple[int, ...]
    generator: tuple[int, ...] | None = None
    name: str = ""
    reed_muller: tuple[int, int] | None = None
    enumeration_cap: int = field(default=DEFAULT_ENUMERATION_CAP, compare=False)

    def __post_init__(self):
        if not 1 <= self.n <= MAX_BLOCK_LENGTH:
            raise ParamRange(f"block length {self.n} outside [1, {MAX_BLOCK_LENGTH}]")
        full = (1 << self.n) - 1
        if any(c & ~full for c in self.codewords):
            raise LengthMismatch("codeword longer than n")
        if len(set(self.codewords)) != len(self.codewords):
            raise MalformedInput("codewords must be distinct")
        if self.generator is not None:
            k = len(self.generator)
            if gf2_rank(self.generator) < k:
                raise RankDeficient(f"generator has rank < {k}")
            if len(self.codewords) != 1 << k:
                raise MalformedInput("codebook size does not match generator rank")
            span = set(_span(self.generator))
            if not span.issuperset(self.codewords):
                raise MalformedInput("codeword outside the generator's row space")

    @property
    def M(self) -> int:
        return len(self.codewords)

    @property
    def k(self) -> int | None:
        return None if self.generator is None else len(self.generator)

    @cached_property
    def index(self) -> dict[int, int]:
        return {c: i for i, c in enumerate(self.codewords)}

    @cached_property
    def min_distance(self) -> int | None:
        """Minimum distance over distinct pairs; ``None`` when ``M == 1``."""
        if self.M < 2:
            return None
        if self.generator is not None:
            return min(c.bit_count() for c in self.codewords if c)
        return min((a ^ b).bit_count() for a, b in combinations(self.codewords, 2))

    @cached_property
    def _columns(self) -> tuple[int, ...]:
        # column t of the generator as a k-bit int (bit s = G[s][t])
        cols = []
        for t in range(self.n):
            col = 0
            for s, row in enumerate(self.generator):
                if (row >> t) & 1:
                    col |= 1 << s
            cols.append(col)
        return tuple(cols)

    def encode(self, message: int) -> int:
        out = 0
        for s, row in enumerate(self.generator):
            if (message >> s) & 1:
                out ^= row
        return out

    def word(self, i: int) -> str:
        return format_bits(self.codewords[i], self.n)

    # -- serialisation ----------------------------------------------------

    def to_json(self) -> dict:
        doc = {
            "name": self.name,
            "n": self.n,
            "M": self.M,
            "codewords": [self.word(i) for i in range(self.M)],
        }
        if self.generator is not None:
            doc["generator"] = [list(format_bits(row, self.n)) for row in self.generator]
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Codebook":
        try:
            n = int(doc["n"])
            words = [str(w) for w in doc["codewords"]]
            gen = doc.get("generator")
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad codebook document: {exc}") from exc
        if any(len(w) != n for w in words):
            raise LengthMismatch("codeword length differs from n")
        if "M" in doc and int(doc["M"]) != len(words):
            raise MalformedInput("M does not match the number of codewords")
        rows = None
        if gen is not None:
            rows = tuple(parse_bits("".join(str(b) for b in row)) for row in gen)
            if any(len(row) != n for row in gen):
                raise LengthMismatch("generator row length differs from n")
        name = str(doc.get("name", ""))
        rm = None
        match = re.fullmatch(r"RM\((\d+),(\d+)\)", name)
        if match and rows is not None:
            r, m = int(match.group(1)), int(match.group(2))
            if n == 1 << m and rows == reed_muller_generator(r, m):
                rm = (r, m)
        return cls(n, tuple(parse_bits(w) for w in words), rows, name, rm)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def load(cls, path) -> "Codebook":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise MalformedInput(f"{path}: {exc}") from exc
        return cls.from_json(doc)


def _span(rows: Sequence[int]) -> list[int]:
    """All GF(2) combinations of ``rows`` in little-endian message order."""
    words = [0]
    for row in rows:
        words += [w ^ row for w in words]
    return words


def _rows_from_matrix(generator) -> tuple[tuple[int, ...], int]:
    if isinstance(generator, np.ndarray):
        generator = generator.tolist()
    rows = []
    n = None
    for row in generator:
        if isinstance(row, str):
            bits = list(row)
        else:
            bits = [str(int(b)) for b in row]
        if n is None:
            n = len(bits)
        elif len(bits) != n:
            raise LengthMismatch("generator rows have different lengths")
        if any(b not in "01" for b in bits):
            raise MalformedInput("generator entries must be 0 or 1")
        rows.append(parse_bits("".join(bits)))
    if n is None:
        raise MalformedInput("empty generator")
    return tuple(rows), n


def build_linear_code(generator, name: str = "", cap: int = DEFAULT_ENUMERATION_CAP) -> Codebook:
    """Enumerate the row space of a k x n GF(2) generator.

    Codeword ``m`` is ``sum_s bit_s(m) * row_s``, i.e. message bits are
    little-endian coefficients of the generator rows.
    """
    rows, n = _rows_from_matrix(generator)
    if not 1 <= n <= MAX_BLOCK_LENGTH:
        raise ParamRange(f"block length {n} outside [1, {MAX_BLOCK_LENGTH}]")
    if len(rows) > n:
        raise RankDeficient("more generator rows than columns")
    if gf2_rank(rows) < len(rows):
        raise RankDeficient(f"generator has rank < {len(rows)}")
    if 1 << len(rows) > cap:
        raise SizeGuard(f"2^{len(rows)} codewords exceed the enumeration cap {cap}")
    return Codebook(n, tuple(_span(rows)), rows, name)


def reed_muller_generator(r: int, m: int) -> tuple[int, ...]:
    """Monomial evaluation rows of RM(r, m), by degree then lexicographically.

    Position ``t`` (0-based) is the evaluation point whose variable ``v_s`` is
    bit ``s - 1`` of ``t``.
    """
    n = 1 << m
    var_rows = []
    for s in range(m):
        row = 0
        for t in range(n):
            if (t >> s) & 1:
                row |= 1 << t
        var_rows.append(row)
    rows = []
    for degree in range(r + 1):
        for mono in combinations(range(m), degree):
            row = (1 << n) - 1
            for s in mono:
                row &= var_rows[s]
            rows.append(row)
    return tuple(rows)


def build_reed_muller(r: int, m: int, cap: int = DEFAULT_ENUMERATION_CAP) -> Codebook:
    if not 1 <= r <= m:
        raise ParamRange(f"need 1 <= r <= m, got r={r}, m={m}")
    k = sum(comb(m, i) for i in range(r + 1))
    if 1 << k > cap:
        raise SizeGuard(f"RM({r},{m}) has 2^{k} codewords, above the cap {cap}")
    rows = reed_muller_generator(r, m)
    return Codebook(1 << m, tuple(_span(rows)), rows, f"RM({r},{m})", (r, m))


# ---------------------------------------------------------------------------
# distance enumerator
# ---------------------------------------------------------------------------

def distance_enumerator(cb: Codebook, pairwise: bool = False) -> DistanceEnumerator:
    """Ordered-pair distance counts.

    Linear codes use ``B_i = M * A_i`` (weight distribution) unless
    ``pairwise`` forces the direct O(M^2) count.
    """
    counts = [0] * (cb.n + 1)
    if cb.generator is not None and not pairwise:
        for c in cb.codewords:
            counts[c.bit_count()] += cb.M
    else:
        for w, c in Counter((a ^ b).bit_count() for a in cb.codewords for b in cb.codewords).items():
            counts[w] = c
    return DistanceEnumerator(tuple(counts))


def evaluate_enumerator(B: DistanceEnumerator, p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ParamRange(f"p={p} outside [0, 1]")
    acc = 0.0
    for b in reversed(B.coefficients):
        acc = acc * p + b
    return acc


# ---------------------------------------------------------------------------
# fast Walsh-Hadamard transform
# ---------------------------------------------------------------------------

def fht(v) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform by radix-2 butterflies."""
    out = np.array(v, dtype=np.int64)
    size = out.shape[0]
    if size == 0 or size & (size - 1):
        raise LengthNotPowerOfTwo(f"length {size} is not a power of two")
    h = 1
    while h < size:
        view = out.reshape(-1, 2, h)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] += b
        view[:, 1, :] = a - b
        h *= 2
    return out


def _require_rm1(cb: Codebook) -> int:
    if cb.reed_muller is None or cb.reed_muller[0] != 1:
        raise ParamRange("the FHT strategy needs an RM(1, m) codebook")
    return cb.reed_muller[1]


def _signs(value: int, n: int, mask: int | None = None) -> np.ndarray:
    bits = np.unpackbits(
        np.frombuffer(value.to_bytes((n + 7) // 8, "little"), dtype=np.uint8), bitorder="little"
    )[:n].astype(np.int64)
    s = 1 - 2 * bits
    if mask is not None:
        keep = np.unpackbits(
            np.frombuffer(mask.to_bytes((n + 7) // 8, "little"), dtype=np.uint8), bitorder="little"
        )[:n]
        s[keep == 0] = 0
    return s


# ---------------------------------------------------------------------------
# erasure matching
# ---------------------------------------------------------------------------

def _matches_brute(cb: Codebook, y: ErasedWord) -> list[int]:
    keep = ~y.erased
    v = y.values
    return [i for i, c in enumerate(cb.codewords) if not ((c ^ v) & keep)]


def _matches_linear(cb: Codebook, y: ErasedWord, cap: int) -> list[int]:
    cols = cb._columns
    eqs = [(cols[t], (y.values >> t) & 1) for t in range(cb.n) if not (y.erased >> t) & 1]
    solved = _solve_gf2(eqs, cb.k)
    if solved is None:
        return []
    particular, basis = solved
    if 1 << len(basis) > cap:
        raise EnumerationCap(f"2^{len(basis)} matching codewords exceed the cap {cap}")
    index = cb.index
    return sorted(index[cb.encode(m)] for m in _coset(particular, basis))


def _coset(particular: int, basis: Sequence[int]) -> list[int]:
    out = [particular]
    for b in basis:
        out += [x ^ b for x in out]
    return out


def _matches_fht(cb: Codebook, y: ErasedWord) -> list[int]:
    _require_rm1(cb)
    support = cb.n - y.erasure_count
    corr = fht(_signs(y.values, cb.n, ~y.erased & ((1 << cb.n) - 1)))
    index = cb.index
    out = []
    # message bit 0 is the constant row, bits 1..m the linear rows
    for a in np.flatnonzero(corr == support):
        out.append(index[cb.encode(int(a) << 1)])
    for a in np.flatnonzero(corr == -support):
        out.append(index[cb.encode((int(a) << 1) | 1)])
    return sorted(set(out))


def choose_strategy(cb: Codebook, y: ErasedWord, cap: int | None = None) -> str:
    """Pick LinearSolve when a generator exists and the coset fits under the cap."""
    cap = cb.enumeration_cap if cap is None else cap
    if cb.generator is None:
        return "brute"
    # expected coset size is 2^(k - rank of the surviving columns)
    cols = cb._columns
    rank = gf2_rank(cols[t] for t in range(cb.n) if not (y.erased >> t) & 1)
    return "linear" if 1 << (cb.k - rank) <= cap else "brute"


def erasure_matches(cb: Codebook, y: ErasedWord, strategy: str = "brute", cap: int | None = None) -> list[int]:
    """Sorted indices of codewords that agree with ``y`` off its erasures."""
    if y.n != cb.n:
        raise LengthMismatch(f"word length {y.n} != code length {cb.n}")
    cap = cb.enumeration_cap if cap is None else cap
    if strategy == "auto":
        strategy = choose_strategy(cb, y, cap)
    if strategy == "brute":
        return _matches_brute(cb, y)
    if strategy == "linear":
        if cb.generator is None:
            raise ParamRange("the linear strategy needs a generator matrix")
        return _matches_linear(cb, y, cap)
    if strategy == "fht":
        return _matches_fht(cb, y)
    raise ParamRange(f"unknown strategy {strategy!r}")


# ---------------------------------------------------------------------------
# list decoding
# ---------------------------------------------------------------------------

def distances_to(cb: Codebook, y: int, strategy: str = "scan") -> list[int]:
    """Distances from ``y`` to every codeword, in codeword order."""
    if strategy == "scan":
        return [(c ^ y).bit_count() for c in cb.codewords]
    if strategy == "fht":
        _require_rm1(cb)
        corr = fht(_signs(y, cb.n))
        n = cb.n
        out = [0] * cb.M
        index = cb.index
        for a, c in enumerate(corr.tolist()):
            out[index[cb.encode(a << 1)]] = (n - c) // 2
            out[index[cb.encode((a << 1) | 1)]] = (n + c) // 2
        return out
    raise ParamRange(f"unknown strategy {strategy!r}")


def list_decode(cb: Codebook, y: int, R: int, strategy: str = "scan") -> list[tuple[int, int]]:
    """Codewords within radius ``R`` of ``y`` as ``(index, distance)``, nearest first."""
    if not 0 <= R <= cb.n:
        raise ParamRange(f"radius {R} outside [0, {cb.n}]")
    if y >> cb.n:
        raise LengthMismatch("word longer than the code length")
    dist = distances_to(cb, y, strategy)
    hits = [(i, d) for i, d in enumerate(dist) if d <= R]
    hits.sort(key=lambda t: (t[1], t[0]))
    return hits
