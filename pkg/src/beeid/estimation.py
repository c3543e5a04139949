"""Error-probability estimates for joint identification.

For a codebook sent through BEC(p) or BSC(p), the failure probability
``P_err`` of the joint decoder is bracketed through

* ``U``, the sum over permutations of the probability that the permutation
  competes with the true one, which is the permanent of a pairwise matrix, and
* ``V``, the analogous sum over pairs of permutations, which is a
  second-order permanent evaluated on a layered trellis,

giving ``4U - V - 3 <= P_err <= U - 1``.
"""

from __future__ import annotations

import logging
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import comb, factorial

import numpy as np

from .codes import Codebook
from .errors import DomainError, MalformedInput, ParamRange, SizeGuard
from .scaled import ScaledReal

log = logging.getLogger(__name__)

PERMANENT_GUARD = 30
PERMANENT_BRUTE_GUARD = 9
SECOND_ORDER_GUARD = 14
SECOND_ORDER_BRUTE_GUARD = 6

# rows enumerated as one vectorised block inside the Glynn sum
_GLYNN_BLOCK_BITS = 12

KINDS = ("bec", "bsc_upper", "bsc_lower")


@dataclass(frozen=True)
class PairwiseMatrix:
    entries: np.ndarray
    kind: str
    p: float
    distances: np.ndarray

    @property
    def M(self) -> int:
        return self.entries.shape[0]


def pairwise_distances(cb: Codebook) -> np.ndarray:
    words = cb.codewords
    return np.array([[(a ^ b).bit_count() for b in words] for a in words], dtype=np.int64)


def build_pairwise_matrix(cb: Codebook, p: float, kind: str) -> PairwiseMatrix:
    """``p**d`` (BEC), ``(4p(1-p))**(d/2)`` (BSC upper) or ``(p(1-p))**(d/2)`` (BSC lower)."""
    kind = kind.lower()
    if kind == "bec":
        if not 0.0 < p < 1.0:
            raise ParamRange(f"BEC erasure probability {p} outside (0, 1)")
        base = p
        D = pairwise_distances(cb).astype(float)
    elif kind in ("bsc_upper", "bsc_lower"):
        if not 0.0 < p < 0.5:
            raise ParamRange(f"BSC crossover probability {p} outside (0, 1/2)")
        base = math.sqrt((4.0 if kind == "bsc_upper" else 1.0) * p * (1.0 - p))
        D = pairwise_distances(cb).astype(float)
    else:
        raise ParamRange(f"unknown pairwise matrix kind {kind!r}")
    return PairwiseMatrix(np.power(base, D), kind, p, D.astype(np.int64))


def _square(T) -> np.ndarray:
    A = np.asarray(T.entries if isinstance(T, PairwiseMatrix) else T, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise MalformedInput(f"expected a square matrix, got shape {A.shape}")
    return A


# ---------------------------------------------------------------------------
# permanents
# ---------------------------------------------------------------------------

def permanent(T, guard: int = PERMANENT_GUARD) -> ScaledReal:
    """Permanent by Glynn's formula.

    ``per(A) = 2**-(M-1) * sum_delta (prod delta) prod_j sum_i delta_i A_ij``
    over sign vectors with ``delta_0 = +1``. The low rows are enumerated as a
    vectorised block; the high rows step through a reflected Gray code so each
    step flips one sign. Rows and then columns are scaled to max 1 first and
    the scale factors are carried in the exponent.
    """
    A = _square(T)
    M = A.shape[0]
    if M > guard:
        raise SizeGuard(f"permanent of a {M}x{M} matrix exceeds the guard M <= {guard}")
    if M == 0:
        return ScaledReal.one()
    scale = ScaledReal.one()
    row_max = np.abs(A).max(axis=1)
    if not row_max.all():
        return ScaledReal.zero()
    A = A / row_max[:, None]
    col_max = np.abs(A).max(axis=0)
    A = A / col_max
    for s in np.concatenate([row_max, col_max]):
        scale = scale * float(s)
    if M == 1:
        return scale * float(A[0, 0])

    free = M - 1
    b = min(free, _GLYNN_BLOCK_BITS)
    h = free - b
    codes = np.arange(1 << b)[:, None] >> np.arange(b) & 1
    signs = 1.0 - 2.0 * codes
    low = A[0] + signs @ A[1 : b + 1]
    low_sign = signs.prod(axis=1)

    high_rows = A[b + 1 :]
    delta = np.ones(h)
    high = high_rows.sum(axis=0)
    sign_high = 1.0
    parts = []
    for g in range(1 << h):
        if g:
            bit = (g & -g).bit_length() - 1
            high = high - 2.0 * delta[bit] * high_rows[bit]
            delta[bit] = -delta[bit]
            sign_high = -sign_high
        terms = np.prod(low + high, axis=1) * low_sign
        parts.append(sign_high * math.fsum(terms.tolist()))
    total = math.fsum(parts)
    return ScaledReal.from_float(total).ldexp(-free) * scale


def permanent_bruteforce(T, guard: int = PERMANENT_BRUTE_GUARD) -> ScaledReal:
    """Direct sum over all permutations (test oracle)."""
    A = _square(T)
    M = A.shape[0]
    if M > guard:
        raise SizeGuard(f"brute-force permanent limited to M <= {guard}")
    rows = A.tolist()
    total = math.fsum(math.prod(rows[i][s] for i, s in enumerate(sigma)) for sigma in permutations(range(M)))
    return ScaledReal.from_float(total)


def second_order_permanent_bruteforce(T, guard: int = SECOND_ORDER_BRUTE_GUARD) -> ScaledReal:
    """Direct double sum over pairs of permutations (test oracle)."""
    A = _square(T)
    M = A.shape[0]
    if M > guard:
        raise SizeGuard(f"brute-force second-order permanent limited to M <= {guard}")
    rows = A.tolist()
    perms = list(permutations(range(M)))
    terms = []
    for sigma in perms:
        for tau in perms:
            prod = 1.0
            for j in range(M):
                i, k = sigma[j], tau[j]
                prod *= rows[i][j] if i == k else rows[i][j] * rows[k][j]
            terms.append(prod)
    return ScaledReal.from_float(math.fsum(terms))


# ---------------------------------------------------------------------------
# second-order permanent trellis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrellisStats:
    M: int
    vertices: int
    vertices_formula: int
    edges_upper_bound: int
    edges_actual: int
    root_degree: int

    @property
    def multiplications(self) -> int:
        return self.edges_actual - self.root_degree

    @property
    def additions(self) -> int:
        return self.edges_actual - self.vertices + 1

    def to_json(self) -> dict:
        return {
            "vertices": self.vertices,
            "edges": self.edges_actual,
            "edges_upper_bound": self.edges_upper_bound,
            "mults": self.multiplications,
            "adds": self.additions,
        }


def trellis_vertex_count(M: int) -> int:
    return comb(2 * M, M) // 2 + (1 << (M - 1))


def trellis_edge_bound(M: int) -> int:
    bound = Fraction(M * M * comb(2 * M - 2, M - 1), 2) + Fraction(M * (M + 1) * 2**M, 8)
    return int(bound)


def _walk_trellis(A: np.ndarray):
    """Viterbi pass over the second-order-permanent trellis.

    Type-1 vertices of layer ``j`` are ``j``-subsets of rows (int bitmasks);
    type-2 vertices are unordered pairs of distinct ``j``-subsets stored as
    ``(smaller, larger)`` tuples. Only two layers are alive at a time and each
    layer is rescaled by a power of two so its largest value is in ``[0.5, 1)``.

    Returns ``(value, vertices, edges, root_degree)``.
    """
    M = A.shape[0]
    full = (1 << M) - 1
    members = [tuple(i for i in range(M) if (mask >> i) & 1) for mask in range(1 << M)]
    layer: dict = {0: 1.0}
    exponent = 0
    vertices = 1
    edges = 0
    root_degree = M + M * (M - 1) // 2
    for c in range(M):
        col = A[:, c].tolist()
        nxt: dict = {}
        get = nxt.get
        for key, val in layer.items():
            if type(key) is int:
                free = members[full & ~key]
                r = len(free)
                edges += r + r * (r - 1) // 2
                for pos, i in enumerate(free):
                    ti = col[i] * val
                    left = key | (1 << i)
                    nxt[left] = get(left, 0.0) + ti
                    ti2 = 2.0 * ti
                    for k in free[pos + 1 :]:
                        tgt = (left, key | (1 << k))
                        nxt[tgt] = get(tgt, 0.0) + ti2 * col[k]
            else:
                a, b = key
                free_a = members[full & ~a]
                free_b = members[full & ~b]
                edges += len(free_a) * len(free_b)
                for i in free_a:
                    a2 = a | (1 << i)
                    ti = col[i] * val
                    for k in free_b:
                        b2 = b | (1 << k)
                        if i == k:
                            # shared extension: one edge, single factor
                            w = ti
                            tgt = (a2, b2) if a2 < b2 else (b2, a2)
                        elif a2 == b2:
                            w = ti * col[k]
                            tgt = a2
                        else:
                            w = ti * col[k]
                            tgt = (a2, b2) if a2 < b2 else (b2, a2)
                        nxt[tgt] = get(tgt, 0.0) + w
        vertices += len(nxt)
        top = max(nxt.values()) if nxt else 0.0
        if top > 0.0:
            _, e = math.frexp(top)
            exponent += e
            layer = {key: math.ldexp(v, -e) for key, v in nxt.items()}
        else:
            layer = nxt
    value = ScaledReal.from_float(layer.get(full, 0.0), exponent)
    return value, vertices, edges, root_degree


def second_order_permanent(T, guard: int = SECOND_ORDER_GUARD) -> ScaledReal:
    """``sum_{sigma,tau} prod_j phi(T[sigma(j), j], T[tau(j), j])`` via the trellis.

    ``phi(a, b) = a`` when the two permutations pick the same row, else ``a*b``.
    """
    A = _square(T)
    M = A.shape[0]
    if M > guard:
        raise SizeGuard(f"second-order permanent limited to M <= {guard}")
    if M == 0:
        return ScaledReal.one()
    # phi mixes degree-1 and degree-2 terms per column, so no global scale
    # factors out; the per-layer rescaling in the walk handles the range
    value, *_ = _walk_trellis(A)
    return value


def trellis_stats(M: int, guard: int = SECOND_ORDER_GUARD) -> TrellisStats:
    """Vertex and edge counts of the constructed trellis for ``M x M`` inputs."""
    if not 1 <= M <= guard:
        raise SizeGuard(f"trellis statistics limited to 1 <= M <= {guard}")
    value, vertices, edges, root_degree = _walk_trellis(np.ones((M, M)))
    expected = float(factorial(M)) ** 2
    if not math.isclose(float(value), expected, rel_tol=1e-9):
        raise AssertionError(f"all-ones trellis value {float(value)} != (M!)^2 = {expected}")
    return TrellisStats(
        M=M,
        vertices=vertices,
        vertices_formula=trellis_vertex_count(M),
        edges_upper_bound=trellis_edge_bound(M),
        edges_actual=edges,
        root_degree=root_degree,
    )


# ---------------------------------------------------------------------------
# U, V and the resulting bounds
# ---------------------------------------------------------------------------

def _check_channel(channel: str) -> str:
    channel = channel.lower()
    if channel not in ("bec", "bsc"):
        raise ParamRange(f"unknown channel {channel!r}")
    return channel


def estimate_U(cb: Codebook, p: float, channel: str):
    """``U`` exactly for the BEC, or a ``(lower, upper)`` pair for the BSC."""
    if _check_channel(channel) == "bec":
        return permanent(build_pairwise_matrix(cb, p, "bec"))
    return (
        permanent(build_pairwise_matrix(cb, p, "bsc_lower")),
        permanent(build_pairwise_matrix(cb, p, "bsc_upper")),
    )


def estimate_V(cb: Codebook, p: float, channel: str):
    """``V`` exactly for the BEC, or a ``(lower, upper)`` pair for the BSC."""
    if _check_channel(channel) == "bec":
        return second_order_permanent(build_pairwise_matrix(cb, p, "bec"))
    return (
        second_order_permanent(build_pairwise_matrix(cb, p, "bsc_lower")),
        second_order_permanent(build_pairwise_matrix(cb, p, "bsc_upper")),
    )


@dataclass(frozen=True)
class ErrorBounds:
    lower: float
    upper: float
    # the Bonferroni lower bound exceeded the union upper bound
    vacuous: bool = False
    raw_lower: float | None = None
    raw_upper: float = 0.0


# U values below 1 by more than this are treated as errors rather than rounding
_UNIT_SLACK = 1e-9
# lower exceeding upper by less than this relative margin is rounding, not slack
_VACUOUS_RTOL = 1e-9
# U - 1 and V - 1 come from values near 1, so their absolute error is a few ulps
# of U and V; an excess below this many ulps cannot be told apart from noise
_VACUOUS_ULPS = 64


def error_bounds(U, V=None) -> ErrorBounds:
    """``P_err <= U - 1`` and ``P_err >= 4U - V - 3``, clamped to ``[0, 1]``.

    ``U`` and ``V`` may be ``(lower, upper)`` pairs (BSC); then the upper bound
    uses the upper ``U`` and the lower bound uses the lower ``U`` with the upper
    ``V``. The lower bound is formed as ``4(U-1) - (V-1)`` to limit cancellation.
    """
    u_lo, u_hi = (ScaledReal.coerce(u) for u in (U if isinstance(U, tuple) else (U, U)))
    for u in (u_lo, u_hi):
        if float(u) < 1.0 - _UNIT_SLACK:
            raise DomainError(f"U = {float(u)} < 1; the identity term alone contributes 1")
    raw_upper = max(float(u_hi - 1), 0.0)
    upper = min(raw_upper, 1.0)
    if V is None:
        return ErrorBounds(0.0, upper, False, None, raw_upper)
    v_hi = ScaledReal.coerce(V[1] if isinstance(V, tuple) else V)
    if float(v_hi) < 1.0 - _UNIT_SLACK:
        raise DomainError(f"V = {float(v_hi)} < 1")
    raw_lower = float((u_lo - 1) * 4 - (v_hi - 1))
    lower = min(max(raw_lower, 0.0), 1.0)
    noise = max(_VACUOUS_RTOL * abs(raw_upper), _VACUOUS_ULPS * sys.float_info.epsilon * (4 * float(u_lo) + float(v_hi)))
    vacuous = raw_lower > raw_upper + noise
    return ErrorBounds(lower, upper, vacuous, raw_lower, raw_upper)


def theta(channel: str, p: float, d: int) -> float:
    """Largest off-diagonal pairwise entry for minimum distance ``d``."""
    if _check_channel(channel) == "bec":
        return p**d
    return (4.0 * p * (1.0 - p)) ** (d / 2.0)


def closed_form_upper_bound(M: int, theta_value: float) -> ScaledReal:
    """``M! * sum_{i=0}^{M} theta^(M-i) (1-theta)^i / i!``.

    This is the permanent of the matrix with unit diagonal and ``theta``
    elsewhere, summed by number of fixed points.
    """
    if not 0.0 <= theta_value <= 1.0:
        raise ParamRange(f"theta {theta_value} outside [0, 1]")
    th = ScaledReal.from_float(theta_value)
    co = ScaledReal.from_float(1.0 - theta_value)
    total = ScaledReal.zero()
    falling = 1  # M! / i!, built from i = M downwards
    for i in range(M, -1, -1):
        total = total + ScaledReal.from_int(falling) * th ** (M - i) * co**i
        falling *= i if i else 1
    return total


def barg_forney_sandwich_check(D: int, p: float) -> bool:
    """Check ``(p(1-p))^(D/2) <= tail <= (4p(1-p))^(D/2)`` in exact rationals.

    ``tail`` is the probability that at least half of ``D`` independent
    BSC(p) flips occur. Both sides are squared so odd ``D`` stays exact.
    """
    if D < 1 or not 0.0 < p < 0.5:
        raise ParamRange("need D >= 1 and 0 < p < 1/2")
    q = Fraction(p)
    tail = sum(comb(D, j) * q**j * (1 - q) ** (D - j) for j in range((D + 1) // 2, D + 1))
    base = q * (1 - q)
    holds = base**D <= tail * tail <= (4 * base) ** D
    if D % 2:
        log.info("Barg-Forney sandwich, odd D=%d, p=%g: %s (tail=%.6g)", D, p, holds, float(tail))
    return holds
