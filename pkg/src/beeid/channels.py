"""Seeded transmission of a whole codebook through BEC(p) or BSC(p).

Every trial draws from Philox substreams keyed by ``(seed, tag)`` with the
trial index in the counter, so trial ``t`` produces the same record whether
trials run serially, in parallel, or in any order. Noise, the shuffle and the
absentee selection use separate tags, so turning on absentees leaves noise
realisations untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .codes import Codebook, ErasedWord, format_bits, parse_bits
from .errors import MalformedInput, ParamRange

NOISE, SHUFFLE, ABSENTEE = 0, 1, 2

CHANNELS = ("bec", "bsc")


@lru_cache(maxsize=256)
def _key(seed: int, tag: int) -> np.ndarray:
    state = np.random.SeedSequence([seed & (2**64 - 1), tag]).generate_state(2, np.uint64)
    state.flags.writeable = False
    return state


def substream(seed: int, trial_index: int, tag: int) -> np.random.Generator:
    """Independent generator for one (seed, trial, purpose) triple."""
    if trial_index < 0:
        raise ParamRange("trial index must be non-negative")
    counter = np.array([0, 0, trial_index, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=_key(seed, tag), counter=counter))


@dataclass(frozen=True)
class TransmissionRecord:
    """Shuffled channel outputs plus the hidden permutation.

    ``truth[i]`` is the output index produced by codeword ``i``, or ``None``
    when that codeword's output was dropped as an absentee.
    """

    channel: str
    p: float
    n: int
    outputs: tuple
    truth: tuple
    seed: int
    trial_index: int
    present: tuple[int, ...] = field(default=())

    @property
    def M(self) -> int:
        return len(self.truth)

    @property
    def absentees(self) -> int:
        return sum(t is None for t in self.truth)

    def output_strings(self) -> list[str]:
        if self.channel == "bec":
            return [str(y) for y in self.outputs]
        return [format_bits(y, self.n) for y in self.outputs]

    def to_json(self) -> dict:
        return {
            "channel": self.channel,
            "p": self.p,
            "n": self.n,
            "seed": self.seed,
            "trial_index": self.trial_index,
            "outputs": self.output_strings(),
            "truth": list(self.truth),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"

    @classmethod
    def from_json(cls, doc: dict) -> "TransmissionRecord":
        try:
            channel = doc["channel"].lower()
            n = int(doc["n"])
            raw = doc["outputs"]
            truth = tuple(doc["truth"])
        except (KeyError, TypeError, AttributeError) as exc:
            raise MalformedInput(f"bad transmission record: {exc}") from exc
        outputs = parse_outputs(raw, n)
        if channel == "bsc" and any(isinstance(y, ErasedWord) for y in outputs):
            raise MalformedInput("BSC record contains erasures")
        present = tuple(i for i, t in enumerate(truth) if t is not None)
        return cls(channel, float(doc.get("p", 0.0)), n, tuple(outputs), truth,
                   int(doc.get("seed", 0)), int(doc.get("trial_index", 0)), present)


def parse_outputs(raw, n: int | None = None) -> list:
    """Words over ``{0,1,?}``; any ``?`` anywhere makes every word an ErasedWord."""
    if not isinstance(raw, list) or not all(isinstance(s, str) for s in raw):
        raise MalformedInput("outputs must be a list of strings")
    for s in raw:
        if n is not None and len(s) != n:
            raise MalformedInput(f"output {s!r} has length {len(s)}, expected {n}")
    if any("?" in s for s in raw):
        return [ErasedWord.parse(s) for s in raw]
    return [parse_bits(s) for s in raw]


def _check_p(channel: str, p: float) -> None:
    hi = 1.0 if channel == "bec" else 0.5
    if not 0.0 <= p <= hi:
        raise ParamRange(f"{channel.upper()} parameter {p} outside [0, {hi}]")


def _noise_masks(rng: np.random.Generator, M: int, n: int, p: float) -> list[int]:
    """One ``n``-bit mask per codeword, each bit set independently with probability ``p``."""
    if p == 0.0:
        return [0] * M
    bits = rng.random((M, n)) < p
    packed = np.packbits(bits, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _shuffle(seed: int, trial_index: int, M: int) -> tuple[int, ...]:
    return tuple(int(j) for j in substream(seed, trial_index, SHUFFLE).permutation(M))


def _transmit(cb: Codebook, channel: str, p: float, seed: int, trial_index: int) -> TransmissionRecord:
    _check_p(channel, p)
    masks = _noise_masks(substream(seed, trial_index, NOISE), cb.M, cb.n, p)
    sigma = _shuffle(seed, trial_index, cb.M)
    outputs: list = [None] * cb.M
    for i, (x, mask) in enumerate(zip(cb.codewords, masks)):
        if channel == "bec":
            outputs[sigma[i]] = ErasedWord(cb.n, x, mask)
        else:
            outputs[sigma[i]] = x ^ mask
    return TransmissionRecord(channel, p, cb.n, tuple(outputs), sigma, seed, trial_index, tuple(range(cb.M)))


def bec_transmit(cb: Codebook, p: float, seed: int, trial_index: int) -> TransmissionRecord:
    """Erase each of the ``M*n`` positions with probability ``p``, then shuffle."""
    return _transmit(cb, "bec", p, seed, trial_index)


def bsc_transmit(cb: Codebook, p: float, seed: int, trial_index: int) -> TransmissionRecord:
    """Flip each of the ``M*n`` positions with probability ``p``, then shuffle."""
    return _transmit(cb, "bsc", p, seed, trial_index)


def transmit(cb: Codebook, channel: str, p: float, seed: int, trial_index: int) -> TransmissionRecord:
    channel = channel.lower()
    if channel not in CHANNELS:
        raise ParamRange(f"unknown channel {channel!r}")
    return _transmit(cb, channel, p, seed, trial_index)


def absentee_drop(rec: TransmissionRecord, a: int, rng: np.random.Generator | None = None) -> TransmissionRecord:
    """Remove ``a`` uniformly chosen outputs, renumbering the survivors in order.

    Without an explicit generator the record's own absentee substream is used.
    """
    remaining = len(rec.outputs)
    if not 0 <= a <= remaining:
        raise ParamRange(f"cannot drop {a} of {remaining} outputs")
    if a == 0:
        return rec
    if rng is None:
        rng = substream(rec.seed, rec.trial_index, ABSENTEE)
    dropped = {int(j) for j in rng.choice(remaining, size=a, replace=False)}
    renumber = {}
    kept = []
    for j, y in enumerate(rec.outputs):
        if j not in dropped:
            renumber[j] = len(kept)
            kept.append(y)
    truth = tuple(None if t is None or t in dropped else renumber[t] for t in rec.truth)
    present = tuple(i for i, t in enumerate(truth) if t is not None)
    return TransmissionRecord(rec.channel, rec.p, rec.n, tuple(kept), truth, rec.seed, rec.trial_index, present)
