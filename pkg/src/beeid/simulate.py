"""Monte Carlo failure rates with Wilson intervals and analytical bounds.

Trials are split into fixed-size chunks whose counters are summed, so the
totals do not depend on how many workers process the chunks or in which order.
Every point of a sweep reuses the same seed; with the same uniforms driving the
noise, erasure sets grow monotonically with ``p`` (common random numbers).
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from scipy.stats import binomtest

from . import estimation
from .channels import transmit
from .codes import Codebook
from .errors import GuardError, ParamRange
from .identifiers import jedi, jldi, jmdi

log = logging.getLogger(__name__)

DEFAULT_TRIALS = 100_000
CHUNK = 4096
DECODERS = ("jedi", "jmdi", "jldi")
CSV_HEADER = (
    "code", "channel", "p", "trials", "failures", "rate",
    "wilson_lo", "wilson_hi", "bound_lower", "bound_upper", "seed",
)


@dataclass(frozen=True)
class SimResult:
    code: str
    channel: str
    p: float
    trials: int
    failures: int
    rate: float
    wilson_lo: float
    wilson_hi: float
    seed: int
    decoder: str = "jedi"
    bound_lower: float | None = None
    bound_upper: float | None = None
    vacuous: bool = False
    # identified but different from the truth; always 0 for JEDI
    misidentified: int = 0

    def csv_row(self) -> list[str]:
        def cell(x):
            return "" if x is None else repr(float(x))

        return [
            self.code, self.channel, repr(float(self.p)), str(self.trials), str(self.failures),
            cell(self.rate), cell(self.wilson_lo), cell(self.wilson_hi),
            cell(self.bound_lower), cell(self.bound_upper), str(self.seed),
        ]


def wilson_interval(failures: int, trials: int, z: float | None = None) -> tuple[float, float]:
    """Wilson score interval; 95% unless a z-multiplier is given."""
    level = 0.95 if z is None else math.erf(z / math.sqrt(2.0))
    ci = binomtest(failures, trials).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


def contained(result: SimResult, z: float = 3.0) -> bool:
    """True if the z-sigma Wilson interval of the rate meets ``[bound_lower, bound_upper]``."""
    if result.bound_lower is None or result.bound_upper is None:
        raise ValueError("result carries no bounds")
    lo, hi = wilson_interval(result.failures, result.trials, z)
    return lo <= result.bound_upper and hi >= result.bound_lower


def default_workers() -> int:
    env = os.environ.get("BEEID_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParamRange(f"BEEID_THREADS={env!r} is not an integer") from None
    return os.cpu_count() or 1


def _check_decoder(channel: str, decoder: str, radius: int | None, n: int) -> None:
    if decoder not in DECODERS:
        raise ParamRange(f"unknown decoder {decoder!r}")
    if channel not in ("bec", "bsc"):
        raise ParamRange(f"unknown channel {channel!r}")
    if (decoder == "jedi") != (channel == "bec"):
        raise ParamRange(f"decoder {decoder} does not apply to the {channel.upper()}")
    if decoder == "jldi" and (radius is None or not 0 <= radius <= n):
        raise ParamRange(f"JLDI needs a radius in [0, {n}]")


def _run_chunk(cb: Codebook, channel: str, p: float, seed: int, decoder: str,
               radius: int | None, start: int, stop: int) -> tuple[int, int]:
    failures = misidentified = 0
    for t in range(start, stop):
        rec = transmit(cb, channel, p, seed, t)
        if decoder == "jedi":
            res = jedi(cb, rec.outputs, "brute")
        elif decoder == "jmdi":
            res = jmdi(cb, rec.outputs)
        else:
            res = jldi(cb, rec.outputs, radius)
        if not res.identified:
            failures += 1
        elif res.sigma != rec.truth:
            failures += 1
            misidentified += 1
    return failures, misidentified


def _chunk_args(trials: int):
    return [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]


def count_failures(cb: Codebook, channel: str, p: float, trials: int, seed: int,
                   decoder: str = "jedi", radius: int | None = None,
                   workers: int | None = None, pool: ProcessPoolExecutor | None = None) -> tuple[int, int]:
    """``(failures, misidentified)`` over trial indices ``0 .. trials-1``."""
    chunks = _chunk_args(trials)
    workers = default_workers() if workers is None else workers
    if pool is None and (workers <= 1 or len(chunks) == 1):
        totals = [_run_chunk(cb, channel, p, seed, decoder, radius, a, b) for a, b in chunks]
    else:
        own = pool is None
        ex = ProcessPoolExecutor(max_workers=workers) if own else pool
        try:
            futures = [ex.submit(_run_chunk, cb, channel, p, seed, decoder, radius, a, b) for a, b in chunks]
            totals = [f.result() for f in futures]
        finally:
            if own:
                ex.shutdown()
    return sum(t[0] for t in totals), sum(t[1] for t in totals)


def bounds_for(cb: Codebook, channel: str, p: float) -> estimation.ErrorBounds | None:
    """Bounds from ``U`` and ``V``, or ``None`` when a size guard rules them out."""
    if p == 0.0:
        return estimation.ErrorBounds(0.0, 0.0)
    if channel == "bec" and p == 1.0:
        return None
    try:
        U = estimation.estimate_U(cb, p, channel)
        V = estimation.estimate_V(cb, p, channel)
    except GuardError as exc:
        log.info("bounds skipped for %s at p=%g: %s", cb.name, p, exc)
        return None
    return estimation.error_bounds(U, V)


def run_trials(cb: Codebook, channel: str, p: float, trials: int = DEFAULT_TRIALS, seed: int = 0,
               decoder: str = "jedi", radius: int | None = None, workers: int | None = None,
               with_bounds: bool = False, pool: ProcessPoolExecutor | None = None) -> SimResult:
    channel = channel.lower()
    decoder = decoder.lower()
    if trials < 1:
        raise ParamRange("need at least one trial")
    _check_decoder(channel, decoder, radius, cb.n)
    failures, misidentified = count_failures(cb, channel, p, trials, seed, decoder, radius, workers, pool)
    if decoder == "jedi" and misidentified:
        # a unique perfect matching must be the true one
        raise AssertionError(f"JEDI returned a wrong identification in {misidentified} trials")
    lo, hi = wilson_interval(failures, trials)
    b = bounds_for(cb, channel, p) if with_bounds else None
    return SimResult(
        code=cb.name or "code", channel=channel, p=p, trials=trials, failures=failures,
        rate=failures / trials, wilson_lo=lo, wilson_hi=hi, seed=seed, decoder=decoder,
        bound_lower=None if b is None else b.lower,
        bound_upper=None if b is None else b.upper,
        vacuous=False if b is None else b.vacuous,
        misidentified=misidentified,
    )


def sweep(cb: Codebook, channel: str, p_grid, trials: int = DEFAULT_TRIALS, seed: int = 0,
          decoder: str = "jedi", with_bounds: bool = False, radius: int | None = None,
          workers: int | None = None) -> list[SimResult]:
    grid = [float(p) for p in p_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParamRange("p grid must be strictly ascending")
    if not grid:
        return []
    workers = default_workers() if workers is None else workers
    if workers <= 1:
        return [run_trials(cb, channel, p, trials, seed, decoder, radius, 1, with_bounds) for p in grid]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [run_trials(cb, channel, p, trials, seed, decoder, radius, workers, with_bounds, pool) for p in grid]


def parse_grid(spec: str) -> list[float]:
    """``LO:HI:STEP`` (inclusive of HI up to rounding) or a comma list."""
    try:
        if ":" in spec:
            lo, hi, step = (float(x) for x in spec.split(":"))
            if step <= 0:
                raise ParamRange("grid step must be positive")
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            return [round(lo + k * step, 12) for k in range(max(count, 0))]
        return [float(x) for x in spec.split(",") if x.strip()]
    except ValueError as exc:
        raise ParamRange(f"bad p grid {spec!r}: {exc}") from None


def write_csv(results, out=None) -> str:
    """Render results under the fixed header; also write to ``out`` (path or file) if given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow(r.csv_row())
    text = buf.getvalue()
    if out is not None:
        if hasattr(out, "write"):
            out.write(text)
        else:
            with open(out, "w", newline="") as fh:
                fh.write(text)
    return text


def plot_spec(results, csv_name: str) -> dict:
    """Declarative description of the rate-versus-p plot with both bounds."""
    return {
        "data": csv_name,
        "x": "p",
        "series": ["rate", "bound_upper", "bound_lower"],
        "error_band": ["wilson_lo", "wilson_hi"],
        "scale": {"x": "linear", "y": "log"},
        "title": f"{results[0].code} on {results[0].channel.upper()}" if results else "",
    }
