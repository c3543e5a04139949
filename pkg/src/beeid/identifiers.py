"""Joint decoders that recover the codeword-to-output permutation.

``jedi`` handles erasures through unique perfect matching, ``jmdi`` finds a
minimum total-distance assignment, ``jldi`` does the same on a radius-pruned
graph, and ``ml_identify`` takes arbitrary log-likelihoods.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

from .codes import Codebook, ErasedWord, erasure_matches, list_decode, parse_bits
from .errors import LengthMismatch, MalformedInput, ParamRange, PreconditionBreach
from .matching import (
    Assignment,
    BipartiteGraph,
    NoPerfectMatching,
    hungarian,
    maximum_matching,
    pma,
    sparse_min_cost_matching,
    _has_directed_cycle,
)

ML_SCALE = 1 << 20


class Outcome(str, Enum):
    IDENTIFIED = "identified"
    FAILURE = "failure"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class IdentificationResult:
    outcome: Outcome
    assignment: Assignment | None = None
    reason: str = ""
    edges: int = 0
    strategy: str = ""
    wall_time: float = 0.0
    order: tuple[tuple[int, int], ...] = ()
    residual: tuple[tuple[int, int], ...] = ()
    fallback: bool = False
    # codewords matched to absentee sinks
    absent: tuple[int, ...] = ()
    max_matching: int | None = None
    graph: BipartiteGraph | None = field(default=None, repr=False, compare=False)

    @property
    def identified(self) -> bool:
        return self.outcome is Outcome.IDENTIFIED

    @property
    def sigma(self) -> tuple[int, ...] | None:
        return None if self.assignment is None else self.assignment.sigma

    @property
    def cost(self) -> int | None:
        return None if self.assignment is None else self.assignment.total_cost

    def to_json(self) -> dict:
        doc = {"outcome": self.outcome.value}
        if self.assignment is not None:
            doc["assignment"] = list(self.assignment.sigma)
            if self.assignment.total_cost is not None:
                doc["cost"] = self.assignment.total_cost
        if self.reason:
            doc["reason"] = self.reason
        if self.order:
            doc["order"] = [list(e) for e in self.order]
        if self.residual:
            doc["residual"] = [list(e) for e in self.residual]
        if self.absent:
            doc["absent"] = list(self.absent)
        if self.fallback:
            doc["fallback"] = True
        doc["edges"] = self.edges
        doc["strategy"] = self.strategy
        return doc


def _as_erased(cb: Codebook, outputs) -> list[ErasedWord]:
    words = [ErasedWord.parse(y) if isinstance(y, str) else y for y in outputs]
    for y in words:
        if y.n != cb.n:
            raise LengthMismatch(f"output length {y.n} != code length {cb.n}")
    return words


def _as_bits(cb: Codebook, outputs) -> list[int]:
    words = []
    for y in outputs:
        if isinstance(y, str):
            if len(y) != cb.n:
                raise LengthMismatch(f"output length {len(y)} != code length {cb.n}")
            y = parse_bits(y)
        elif isinstance(y, ErasedWord):
            raise MalformedInput("erased outputs need an erasure decoder")
        elif y >> cb.n:
            raise LengthMismatch("output longer than the code length")
        words.append(y)
    return words


def erasure_graph(cb: Codebook, outputs: Sequence[ErasedWord], strategy: str = "auto") -> BipartiteGraph:
    """Input-output graph: edge (i, j) iff output ``j`` matches codeword ``i``."""
    rows: list[list[int]] = [[] for _ in range(cb.M)]
    for j, y in enumerate(outputs):
        for i in erasure_matches(cb, y, strategy):
            rows[i].append(j)
    return BipartiteGraph(cb.M, tuple(tuple(r) for r in rows))


def jedi(cb: Codebook, outputs, strategy: str = "auto") -> IdentificationResult:
    """Joint erasure decoding: identify iff the input-output graph has a unique perfect matching."""
    start = time.perf_counter()
    words = _as_erased(cb, outputs)
    if len(words) != cb.M:
        raise MalformedInput(f"expected {cb.M} outputs, got {len(words)}")
    g = erasure_graph(cb, words, strategy)
    try:
        peel = pma(g)
    except PreconditionBreach:
        # impossible for genuine channel outputs, which always contain the true matching
        return IdentificationResult(
            Outcome.FAILURE, reason="no-perfect-matching", edges=g.num_edges, strategy=strategy,
            wall_time=time.perf_counter() - start, graph=g,
        )
    elapsed = time.perf_counter() - start
    if peel.unique:
        return IdentificationResult(
            Outcome.IDENTIFIED, peel.assignment, edges=g.num_edges, strategy=strategy,
            wall_time=elapsed, order=peel.order, graph=g,
        )
    return IdentificationResult(
        Outcome.FAILURE, reason="not-unique", edges=g.num_edges, strategy=strategy,
        wall_time=elapsed, order=peel.order, residual=peel.residual, graph=g,
    )


def distance_matrix(cb: Codebook, outputs: Sequence[int]) -> list[list[int]]:
    return [[(x ^ y).bit_count() for y in outputs] for x in cb.codewords]


def jmdi(cb: Codebook, outputs) -> IdentificationResult:
    """Joint minimum-distance decoding via the Hungarian method on the complete graph."""
    start = time.perf_counter()
    words = _as_bits(cb, outputs)
    if len(words) != cb.M:
        raise MalformedInput(f"expected {cb.M} outputs, got {len(words)}")
    assignment = hungarian(distance_matrix(cb, words))
    return IdentificationResult(
        Outcome.IDENTIFIED, assignment, edges=cb.M * cb.M, strategy="hungarian",
        wall_time=time.perf_counter() - start,
    )


def pruned_graph(cb: Codebook, outputs: Sequence[int], R: int, strategy: str = "scan") -> BipartiteGraph:
    """Edges of cost at most ``R`` found by list decoding each output."""
    rows: list[list[tuple[int, int]]] = [[] for _ in range(cb.M)]
    for j, y in enumerate(outputs):
        for i, d in list_decode(cb, y, R, strategy):
            rows[i].append((j, d))
    return BipartiteGraph(
        cb.M,
        tuple(tuple(j for j, _ in r) for r in rows),
        tuple(tuple(d for _, d in r) for r in rows),
    )


def jldi(cb: Codebook, outputs, R: int, fallback: bool = False, strategy: str = "scan") -> IdentificationResult:
    """Joint list decoding: min-cost matching restricted to edges of cost <= R.

    A pruned graph without a perfect matching gives ``Outcome.INFEASIBLE``
    unless ``fallback`` reruns the problem through :func:`jmdi`.
    """
    start = time.perf_counter()
    if not 0 <= R <= cb.n:
        raise ParamRange(f"radius {R} outside [0, {cb.n}]")
    words = _as_bits(cb, outputs)
    if len(words) != cb.M:
        raise MalformedInput(f"expected {cb.M} outputs, got {len(words)}")
    g = pruned_graph(cb, words, R, strategy)
    result = sparse_min_cost_matching(g)
    elapsed = time.perf_counter() - start
    if isinstance(result, NoPerfectMatching):
        if fallback:
            full = jmdi(cb, words)
            return IdentificationResult(
                full.outcome, full.assignment, edges=full.edges, strategy="hungarian",
                wall_time=time.perf_counter() - start, fallback=True,
            )
        return IdentificationResult(
            Outcome.INFEASIBLE, reason=f"radius {R} leaves no perfect matching",
            edges=g.num_edges, strategy=strategy, wall_time=elapsed,
            max_matching=result.size, graph=g,
        )
    return IdentificationResult(
        Outcome.IDENTIFIED, result, edges=g.num_edges, strategy=strategy, wall_time=elapsed, graph=g,
    )


def ml_identify(
    cb: Codebook,
    outputs: Sequence,
    loglik: Callable[[int, int], float],
    scale: int = ML_SCALE,
) -> IdentificationResult:
    """Maximum-likelihood identification for an arbitrary channel.

    ``loglik(i, j)`` is ``log P(output j | codeword i)``; ``-inf`` removes the
    edge. Costs are ``-loglik`` in fixed point with ``scale`` steps per nat,
    shifted so the smallest finite cost is zero.
    """
    start = time.perf_counter()
    M = cb.M
    if len(outputs) != M:
        raise MalformedInput(f"expected {M} outputs, got {len(outputs)}")
    raw: list[list[tuple[int, float]]] = [[] for _ in range(M)]
    for i in range(M):
        for j in range(M):
            ll = loglik(i, j)
            if ll > -math.inf:
                raw[i].append((j, -ll))
    finite = [c for row in raw for _, c in row]
    shift = min(finite) if finite else 0.0
    g = BipartiteGraph(
        M,
        tuple(tuple(j for j, _ in r) for r in raw),
        tuple(tuple(round((c - shift) * scale) for _, c in r) for r in raw),
    )
    result = sparse_min_cost_matching(g)
    elapsed = time.perf_counter() - start
    if isinstance(result, NoPerfectMatching):
        return IdentificationResult(
            Outcome.INFEASIBLE, reason="no perfect matching with positive likelihood",
            edges=g.num_edges, strategy="ml", wall_time=elapsed, max_matching=result.size, graph=g,
        )
    return IdentificationResult(
        Outcome.IDENTIFIED, result, edges=g.num_edges, strategy="ml", wall_time=elapsed, graph=g,
    )


def bsc_loglik(cb: Codebook, outputs: Sequence[int], p: float) -> Callable[[int, int], float]:
    lp, lq = math.log(p), math.log1p(-p)
    n = cb.n

    def loglik(i, j):
        d = (cb.codewords[i] ^ outputs[j]).bit_count()
        return d * lp + (n - d) * lq

    return loglik


def bec_loglik(cb: Codebook, outputs: Sequence[ErasedWord]) -> Callable[[int, int], float]:
    """0 on compatible pairs, ``-inf`` otherwise (the erasure factor is common to all)."""

    def loglik(i, j):
        return 0.0 if outputs[j].matches(cb.codewords[i]) else -math.inf

    return loglik


# ---------------------------------------------------------------------------
# absentees
# ---------------------------------------------------------------------------

def _unique_modulo_sinks(g: BipartiteGraph, sigma: Sequence[int], real: int) -> bool:
    """Alternating-cycle test with all sink columns (``j >= real``) merged.

    Swapping two codewords between sinks does not change the identification,
    so the sinks act as one right node ``S``: codewords on a sink get the arc
    ``S -> i``, the others ``i -> S``.
    """
    M = g.M
    S = M + real
    succ: list[list[int]] = [[] for _ in range(M + real + 1)]
    for i, adj in enumerate(g.adjacency):
        on_sink = sigma[i] >= real
        if on_sink:
            succ[S].append(i)
        to_sink = False
        for j in adj:
            if j >= real:
                to_sink = True
            elif sigma[i] == j:
                succ[M + j].append(i)
            else:
                succ[i].append(M + j)
        if to_sink and not on_sink:
            succ[i].append(S)
    return not _has_directed_cycle(succ)


def identify_with_absentees(cb: Codebook, outputs, channel: str, a: int | None = None) -> IdentificationResult:
    """Identify when ``a = M - len(outputs)`` codewords produced no output.

    ``a`` sink columns are appended, adjacent to every codeword (at cost 0 on
    the BSC). The ``assignment`` covers all ``M`` columns; codewords landing in
    columns ``>= len(outputs)`` are reported in ``absent``.
    """
    start = time.perf_counter()
    M = cb.M
    real = len(outputs)
    if real > M:
        raise MalformedInput(f"{real} outputs for {M} codewords")
    if a is None:
        a = M - real
    if a != M - real:
        raise MalformedInput(f"absentee count {a} inconsistent with {real} outputs")
    channel = channel.lower()
    if a == 0:
        return jedi(cb, outputs) if channel == "bec" else jmdi(cb, outputs)
    if channel == "bec":
        words = _as_erased(cb, outputs)
        rows = []
        for x in cb.codewords:
            row = [j for j, y in enumerate(words) if y.matches(x)]
            rows.append(tuple(row + list(range(real, M))))
        g = BipartiteGraph(M, tuple(rows))
        size, match_l = maximum_matching(g)
        elapsed = time.perf_counter() - start
        if size < M:
            return IdentificationResult(
                Outcome.INFEASIBLE, reason="outputs cannot all be explained",
                edges=g.num_edges, strategy="hopcroft-karp", wall_time=elapsed, max_matching=size, graph=g,
            )
        absent = tuple(i for i in range(M) if match_l[i] >= real)
        if not _unique_modulo_sinks(g, match_l, real):
            return IdentificationResult(
                Outcome.FAILURE, reason="not-unique", edges=g.num_edges, strategy="hopcroft-karp",
                wall_time=elapsed, absent=absent, graph=g,
            )
        return IdentificationResult(
            Outcome.IDENTIFIED, Assignment(tuple(match_l)), edges=g.num_edges,
            strategy="hopcroft-karp", wall_time=elapsed, absent=absent, graph=g,
        )
    if channel == "bsc":
        words = _as_bits(cb, outputs)
        costs = [row + [0] * a for row in distance_matrix(cb, words)]
        assignment = hungarian(costs)
        absent = tuple(i for i in range(M) if assignment.sigma[i] >= real)
        return IdentificationResult(
            Outcome.IDENTIFIED, assignment, edges=M * M, strategy="hungarian",
            wall_time=time.perf_counter() - start, absent=absent,
        )
    raise ParamRange(f"unknown channel {channel!r}")
