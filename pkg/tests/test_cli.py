import json
import math
import subprocess
import sys

import pytest

from beeid import presets
from beeid.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_gen_preset(capsys):
    code, out, err = run(["gen", "--preset", "example2"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["n"] == 5 and len(doc["codewords"]) == 4
    assert json.loads(err) == {"name": "example2", "n": 5, "M": 4, "d": 3}


def test_gen_rm_and_linear(tmp_path, capsys):
    out = tmp_path / "rm.json"
    assert run(["gen", "--r", "1", "--m", "3", "--out", str(out)], capsys)[0] == 0
    assert len(json.loads(out.read_text())["codewords"]) == 16
    assert (tmp_path / "rm.json.manifest.json").exists()
    g = write_json(tmp_path / "g.json", list(presets.EXAMPLE1_GENERATOR))
    code, text, _ = run(["gen", "--generator", g], capsys)
    assert code == 0 and len(json.loads(text)["codewords"]) == 8


def test_gen_conflicting_sources(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--preset", "example2", "--r", "1", "--m", "3"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["gen", "--code", "rm", "--preset", "example2"])


def test_decode_example1a(tmp_path, capsys):
    outs = write_json(tmp_path / "y.json", {"channel": "bec", "outputs": list(presets.EXAMPLE1A_OUTPUTS)})
    code, text, _ = run(["decode", "--preset", "example1-simplex", "--outputs", outs], capsys)
    doc = json.loads(text)
    assert code == 0 and doc["outcome"] == "identified"
    assert doc["assignment"] == [0, 3, 6, 1, 4, 2, 7, 5]


def test_decode_failure_is_exit_zero(tmp_path, capsys):
    outs = write_json(tmp_path / "y.json", list(presets.EXAMPLE1B_OUTPUTS))
    code, text, _ = run(["decode", "--preset", "example1-simplex", "--outputs", outs], capsys)
    assert code == 0 and json.loads(text)["outcome"] == "failure"


@pytest.mark.parametrize("extra", [[], ["--decoder", "jldi", "--radius", "2"]])
def test_decode_example2(tmp_path, capsys, extra):
    outs = write_json(tmp_path / "y.json", list(presets.EXAMPLE2_OUTPUTS))
    code, text, _ = run(["decode", "--preset", "example2", "--outputs", outs, *extra], capsys)
    doc = json.loads(text)
    assert code == 0 and doc["assignment"] == [0, 1, 2, 3] and doc["cost"] == 5


def test_decode_absent(tmp_path, capsys):
    outs = write_json(tmp_path / "y.json", ["11100", "00111", "11011"])
    code, text, _ = run(["decode", "--preset", "example2", "--outputs", outs], capsys)
    assert code == 0 and json.loads(text)["absent"] == [0]


def test_decode_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["decode", "--preset", "example2", "--outputs", str(bad)], capsys)[0] == 4
    short = write_json(tmp_path / "s.json", ["111"] * 4)
    assert run(["decode", "--preset", "example2", "--outputs", short], capsys)[0] == 4
    erased = write_json(tmp_path / "e.json", ["1110?"] * 4)
    assert run(["decode", "--preset", "example2", "--outputs", erased, "--decoder", "jmdi"], capsys)[0] == 3
    ok = write_json(tmp_path / "y.json", list(presets.EXAMPLE2_OUTPUTS))
    assert run(["decode", "--outputs", ok], capsys)[0] == 3


def test_estimate(capsys):
    code, text, _ = run(["estimate", "--preset", "example2", "--channel", "bec", "--p", "0.3",
                         "--with-v", "--closed-form"], capsys)
    doc = json.loads(text)
    assert code == 0
    assert doc["U"]["value"] == pytest.approx(1.003096780587432, rel=1e-13)
    assert doc["upper"] == pytest.approx(0.0030967805874321, rel=1e-9)
    assert doc["lower"] == pytest.approx(0.0030789152576109493, rel=1e-9)
    assert doc["closed_form"]["value"] >= doc["U"]["value"]
    assert doc["per2_stats"]["vertices"] == math.comb(8, 4) // 2 + 2**3


def test_estimate_bsc_and_range(capsys):
    code, text, _ = run(["estimate", "--preset", "example2", "--channel", "bsc", "--p", "0.1"], capsys)
    doc = json.loads(text)
    assert code == 0 and doc["U"]["lower"]["value"] <= doc["U"]["upper"]["value"]
    assert run(["estimate", "--preset", "example2", "--channel", "bsc", "--p", "0.7"], capsys)[0] == 3


def test_trellis_stats(capsys):
    code, text, _ = run(["trellis-stats", "--m", "3"], capsys)
    doc = json.loads(text)
    assert code == 0
    assert (doc["vertices"], doc["edges"], doc["mults"], doc["adds"]) == (14, 33, 27, 20)
    assert run(["trellis-stats", "--m", "15"], capsys)[0] == 5


def test_simulate_manifest_and_replay(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    argv = ["simulate", "--preset", "example2", "--channel", "bec", "--p-grid", "0.1:0.3:0.1",
            "--trials", "500", "--seed", "7", "--with-bounds", "--workers", "1", "--out", str(out)]
    assert run(argv, capsys)[0] == 0
    first = out.read_bytes()
    assert first.startswith(b"code,channel,p,trials,failures,rate,")
    assert len(first.splitlines()) == 4
    plot = json.loads((tmp_path / "sim.plot.json").read_text())
    assert plot["data"] == "sim.csv"
    manifest = json.loads((tmp_path / "sim.csv.manifest.json").read_text())
    assert manifest["seed"] == 7 and manifest["argv"] == argv
    out.unlink()
    assert run(["replay", str(tmp_path / "sim.csv.manifest.json")], capsys)[0] == 0
    assert out.read_bytes() == first


def test_replay_detects_changed_input(tmp_path, capsys):
    cb = tmp_path / "cb.json"
    cb.write_text(presets.example2().dumps())
    outs = write_json(tmp_path / "y.json", list(presets.EXAMPLE2_OUTPUTS))
    res = tmp_path / "r.json"
    assert run(["decode", "--codebook", str(cb), "--outputs", outs, "--out", str(res)], capsys)[0] == 0
    manifest = str(res) + ".manifest.json"
    assert run(["replay", manifest], capsys)[0] == 0
    cb.write_text(presets.example1_simplex().dumps())
    assert run(["replay", manifest], capsys)[0] == 4


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "beeid", "trellis-stats", "--m", "2"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["vertices"] == 5
    proc = subprocess.run([sys.executable, "-m", "beeid", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
