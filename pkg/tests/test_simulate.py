import io

import pytest

from beeid.codes import build_linear_code, build_reed_muller
from beeid.errors import ParamRange
from beeid.simulate import (
    CHUNK,
    CSV_HEADER,
    _run_chunk,
    SimResult,
    bounds_for,
    contained,
    count_failures,
    default_workers,
    parse_grid,
    run_trials,
    sweep,
    wilson_interval,
    write_csv,
)

REP2 = build_linear_code(["11"], name="rep2")


def test_noiseless_never_fails(simplex):
    r = run_trials(simplex, "bec", 0.0, trials=300, seed=1, with_bounds=True)
    assert r.failures == 0 and (r.bound_lower, r.bound_upper) == (0.0, 0.0)
    assert contained(r)


def test_all_erased_always_fails(ex2):
    r = run_trials(ex2, "bec", 1.0, trials=50, seed=1, with_bounds=True)
    assert r.failures == 50 and r.bound_upper is None


def test_rep2_rate_matches_p4():
    r = run_trials(REP2, "bec", 0.5, trials=20_000, seed=3, with_bounds=True)
    assert r.wilson_lo <= 0.0625 <= r.wilson_hi
    assert r.bound_lower == pytest.approx(0.0625) and r.bound_upper == pytest.approx(0.0625)


def test_chunk_boundaries_do_not_matter(ex2):
    # each trial depends only on its index, so any split gives the same total
    trials = CHUNK + 17
    whole = count_failures(ex2, "bec", 0.4, trials, 5, workers=1)
    split = [_run_chunk(ex2, "bec", 0.4, 5, "jedi", None, a, b) for a, b in ((0, 1000), (1000, 3001), (3001, trials))]
    assert whole == (sum(s[0] for s in split), sum(s[1] for s in split))


def test_worker_count_invariant(ex2):
    a = run_trials(ex2, "bec", 0.3, trials=2 * CHUNK + 5, seed=9, workers=1)
    b = run_trials(ex2, "bec", 0.3, trials=2 * CHUNK + 5, seed=9, workers=2)
    assert a == b


def test_sweep_monotone_with_common_random_numbers(simplex):
    res = sweep(simplex, "bec", [0.1, 0.2, 0.3, 0.4], trials=2000, seed=4, workers=1)
    fails = [r.failures for r in res]
    assert fails == sorted(fails) and fails[-1] > 0


def test_bsc_decoders():
    cb = build_reed_muller(1, 3)
    m = run_trials(cb, "bsc", 0.05, trials=300, seed=2, decoder="jmdi")
    l = run_trials(cb, "bsc", 0.05, trials=300, seed=2, decoder="jldi", radius=cb.n)
    assert m.failures == l.failures
    assert m.misidentified == m.failures


def test_bsc_bounds_bracket_rate(ex2):
    r = run_trials(ex2, "bsc", 0.1, trials=4000, seed=6, decoder="jmdi", with_bounds=True)
    assert r.bound_lower <= r.bound_upper
    # JMDI is the ML decoder on the BSC, so the union bound covers its failures
    assert r.wilson_lo <= r.bound_upper


def test_decoder_channel_checks(ex2):
    with pytest.raises(ParamRange):
        run_trials(ex2, "bsc", 0.1, 10, decoder="jedi")
    with pytest.raises(ParamRange):
        run_trials(ex2, "bec", 0.1, 10, decoder="jmdi")
    with pytest.raises(ParamRange):
        run_trials(ex2, "bsc", 0.1, 10, decoder="jldi")
    with pytest.raises(ParamRange):
        run_trials(ex2, "bec", 0.1, 0)


def test_sweep_grid_rules(ex2):
    assert sweep(ex2, "bec", [], trials=10) == []
    with pytest.raises(ParamRange):
        sweep(ex2, "bec", [0.2, 0.1], trials=10)


def test_bounds_guard_returns_none():
    big = build_reed_muller(1, 5)
    assert bounds_for(big, "bec", 0.2) is None


def test_wilson():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and 0 < hi < 0.05
    lo3, hi3 = wilson_interval(10, 100, z=3.0)
    lo2, hi2 = wilson_interval(10, 100)
    assert lo3 < lo2 < 0.1 < hi2 < hi3


def test_contained_needs_bounds():
    r = SimResult("c", "bec", 0.1, 10, 0, 0.0, 0.0, 0.3, 0)
    with pytest.raises(ValueError):
        contained(r)


class TestGrid:
    def test_range(self):
        assert parse_grid("0.05:0.5:0.05") == [round(0.05 * k, 12) for k in range(1, 11)]
        assert parse_grid("0.1:0.1:0.1") == [0.1]

    def test_list(self):
        assert parse_grid("0.1, 0.3,0.2") == [0.1, 0.3, 0.2]

    @pytest.mark.parametrize("bad", ["0.1:0.2", "a,b", "0.1:0.2:0"])
    def test_bad(self, bad):
        with pytest.raises(ParamRange):
            parse_grid(bad)


def test_default_workers(monkeypatch):
    monkeypatch.setenv("BEEID_THREADS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("BEEID_THREADS", "x")
    with pytest.raises(ParamRange):
        default_workers()


def test_csv(ex2):
    res = sweep(ex2, "bec", [0.2, 0.3], trials=100, seed=1, with_bounds=True, workers=1)
    buf = io.StringIO()
    text = write_csv(res, buf)
    assert buf.getvalue() == text
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[0] == "code,channel,p,trials,failures,rate,wilson_lo,wilson_hi,bound_lower,bound_upper,seed"
    assert len(lines) == 3 and lines[1].startswith("example2,bec,0.2,100,")
    no_bounds = write_csv([run_trials(ex2, "bec", 0.2, 10)])
    assert no_bounds.splitlines()[1].split(",")[8:10] == ["", ""]
