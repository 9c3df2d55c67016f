import json
import subprocess
import sys

import numpy as np
import pytest

from phasestab import cli
from phasestab.frames import load_frame


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


@pytest.fixture
def frames(tmp_path):
    return {
        "basis": write(tmp_path, "basis.json", {"field": "real", "dim": 2, "vectors": [[1, 0], [0, 1]]}),
        "three": write(tmp_path, "three.json", {"field": "real", "dim": 2, "vectors": [[1, 0], [0, 1], [1, 1]]}),
        "cx3": write(tmp_path, "cx3.json", {"field": "complex", "dim": 2,
                                            "vectors": [[[1, 0], [0, 0]], [[0, 0], [1, 0]], [[1, 0], [0, 1]]]}),
        "bad": write(tmp_path, "bad.json", {"field": "real", "dim": 3, "vectors": [[1, 0]]}),
    }


def run(tmp_path, argv, name="out.json"):
    out = tmp_path / name
    code = cli.main(argv + ["--out", str(out), "--quiet"])
    text = out.read_text() if out.exists() else None
    return code, text


class TestPrCheck:
    def test_exit_codes(self, tmp_path, frames):
        code, text = run(tmp_path, ["pr-check", frames["basis"]])
        assert code == 10
        doc = json.loads(text)
        assert doc["verdict"] == "no" and doc["witness_check"]["measurement_gap"] == 0.0
        assert run(tmp_path, ["pr-check", frames["three"]])[0] == 0
        assert run(tmp_path, ["pr-check", frames["bad"]])[0] == 2
        assert run(tmp_path, ["pr-check", str(tmp_path / "missing.json")])[0] == 2

    def test_complex(self, tmp_path, frames):
        code, text = run(tmp_path, ["pr-check", frames["cx3"]])
        assert code == 10
        assert run(tmp_path, ["pr-check", frames["cx3"], "--method", "complement"])[0] == 2

    def test_stdout(self, capsys, frames):
        assert cli.main(["pr-check", frames["three"], "--quiet"]) == 0
        cap = capsys.readouterr()
        assert json.loads(cap.out)["subcommand"] == "pr-check" and cap.err == ""


class TestLipschitz:
    def test_codes(self, tmp_path, frames):
        assert run(tmp_path, ["lipschitz", frames["basis"]])[0] == 10
        code, text = run(tmp_path, ["lipschitz", frames["three"], "--pairs", "200"])
        assert code == 0
        doc = json.loads(text)
        assert doc["c"] == pytest.approx(2 / 3, rel=1e-6)


class TestWitness:
    def test_onb(self, tmp_path):
        code, text = run(tmp_path, ["witness", "--generator", "onb", "--delta", "0.01", "--N", "4"])
        assert code == 0

    def test_sinc(self, tmp_path):
        code, text = run(tmp_path, ["witness", "--generator", "sinc", "--delta", "0.1", "--N", "4"])
        assert code == 0

    def test_budget(self, tmp_path):
        code, _ = run(tmp_path, ["witness", "--generator", "sinc", "--delta", "0.001", "--budget", "100"])
        assert code == 12

    def test_bad_args(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            cli.main(["witness", "--generator", "nope", "--delta", "0.1"])
        assert exc.value.code == 2


class TestSincTable:
    def test_csv(self, tmp_path):
        out = tmp_path / "t.csv"
        assert cli.main(["sinc-table", "--m-max", "4", "--out", str(out), "--quiet"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "m,dist,gap,gap_tail,ratio,log2_incr"
        assert len(lines) == 5
        assert lines[-1].endswith(",")
        assert lines[1].split(",")[1] == repr(8**0.5)

    def test_too_small(self, tmp_path):
        assert cli.main(["sinc-table", "--m-max", "1", "--quiet"]) == 2


class TestHolder:
    def test_invalid(self, tmp_path):
        for bad in ({"gamma": [1.0]}, {"R": -1}, {"m_max": True}, {"field": "quaternion"}, {"nope": 1}, [1, 2]):
            cfg = write(tmp_path, "cfg.json", bad)
            assert cli.main(["holder", "--config", cfg, "--quiet"]) == 2

    def test_small_run(self, tmp_path):
        cfg = write(tmp_path, "cfg.json", {"gamma": [2.0], "m_max": 3, "trials": 50, "lipschitz_trials": 200})
        code, text = run(tmp_path, ["holder", "--config", cfg])
        assert code == 0
        assert json.loads(text)["runs"][0]["violations"] == 0


class TestPerturb:
    def test_run(self, tmp_path, frames):
        fo = tmp_path / "perturbed.json"
        code, text = run(tmp_path, ["perturb", "--frame", frames["three"], "--epsilon", "0.01", "--frame-out", str(fo)])
        assert code == 0
        doc = json.loads(text)
        assert doc["difference_sq"] < 0.01
        F = load_frame(str(fo))
        G = load_frame(frames["three"])
        assert F.M == 2 and F.N == 3
        assert np.sum(np.abs(F.vectors - G.vectors) ** 2) == pytest.approx(doc["difference_sq"])
        assert doc["cp_failure"]["ambient_dim"] == 3 and doc["cp_failure"]["certified"]

    def test_bad_eps(self, tmp_path, frames):
        assert run(tmp_path, ["perturb", "--frame", frames["three"], "--epsilon", "0"])[0] == 2


def test_determinism(tmp_path, frames):
    cfg = write(tmp_path, "cfg.json", {"gamma": [2.0], "m_max": 3, "trials": 30, "lipschitz_trials": 200})
    cmds = [
        ["pr-check", frames["three"]],
        ["lipschitz", frames["three"], "--pairs", "100"],
        ["witness", "--generator", "riesz", "--delta", "0.1", "--riesz-blocks", "3"],
        ["sinc-table", "--m-max", "3"],
        ["holder", "--config", cfg],
        ["perturb", "--frame", frames["three"], "--epsilon", "0.01"],
    ]
    for argv in cmds:
        a = run(tmp_path, argv, "a.out")
        b = run(tmp_path, argv, "b.out")
        assert a == b and a[1]


def test_module_entry(frames):
    r = subprocess.run([sys.executable, "-m", "phasestab", "pr-check", frames["basis"], "--quiet"], capture_output=True, text=True)
    assert r.returncode == 10 and json.loads(r.stdout)["verdict"] == "no"
