import csv
import json
import math
import shutil

import numpy as np
import pytest

from stark_embed.cli import main
from stark_embed.cli.config import load_config, parse_list, parse_number
from stark_embed.errors import ArgumentError
from stark_embed.transform import GridFunction, resolve_table

SINGLE = """\
[frame]
alpha = 1
xi_max = 1e4

[plan]
mode = single
energies = 0
d = pi/6
"""


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    cfg = write(d / "single.ini", SINGLE)
    assert main(["construct", "--config", cfg, "--out", str(d / "b")]) == 0
    return d / "b"


class TestConfig:
    def test_numbers(self):
        assert parse_number("pi/6") == pytest.approx(math.pi / 6)
        assert parse_number("2*sqrt(4)") == 4.0
        assert parse_list("0, 1,2.5") == [0.0, 1.0, 2.5]
        with pytest.raises(ArgumentError):
            parse_number("__import__('os')")

    def test_round_trip_ini(self, tmp_path):
        cfg = load_config("construct", write(tmp_path / "a.ini", SINGLE))
        back = load_config("construct", write(tmp_path / "b.ini", cfg.to_ini()))
        assert back.to_dict() == cfg.to_dict()

    @pytest.mark.parametrize("text", [
        "[frame\nalpha = 1\n",
        "[frame]\nalpha = 3\n[plan]\nd = 0.5\n",
        "[plan]\nmode = single\nenergies = 0, 0\nd = 0.5\n",
        "[plan]\nmode = bogus\n",
        "[plan]\nd = 0.5\n[checks]\nenabled = envelope, magic\n",
    ])
    def test_invalid(self, tmp_path, text):
        with pytest.raises(ArgumentError):
            load_config("construct", write(tmp_path / "c.ini", text))


class TestConstructVerify:
    def test_bundle_contents(self, bundle):
        for name in ("config.ini", "report.json", "manifest.json",
                     "envelope_claims.txt"):
            assert (bundle / name).is_file()
        rep = json.loads((bundle / "report.json").read_text())
        assert rep["certified"] and rep["checks_pass"]
        assert rep["spectral"]["envelope"]["sup"] == pytest.approx(math.pi / 2)

    def test_verify(self, bundle, tmp_path):
        assert main(["verify", str(bundle), "--out", str(tmp_path)]) == 0
        res = json.loads((tmp_path / "verify.json").read_text())
        assert res["verdicts"] == ["L2-certified"]

    def test_tampered_potential(self, bundle, tmp_path):
        b = tmp_path / "tampered"
        shutil.copytree(bundle, b)
        p = resolve_table(b / "V.txt")
        V = GridFunction.load(p)
        p.unlink()
        V.with_values(1.5 * V.values).save(b / "V.txt")
        assert main(["verify", str(b)]) == 1
        res = json.loads((b / "verify.json").read_text())
        assert res["checks"]["envelope"]["pass"] is False

    def test_subcritical_fails(self, tmp_path, capsys):
        cfg = write(tmp_path / "sub.ini", SINGLE.replace("pi/6", "0.15"))
        assert main(["construct", "--config", cfg, "--out",
                     str(tmp_path / "o")]) == 1
        assert "L2-certified" not in capsys.readouterr().out

    def test_manifest_determinism(self, tmp_path):
        cfg = write(tmp_path / "s.ini", SINGLE)
        sums = []
        for k in range(2):
            out = tmp_path / f"run{k}"
            main(["construct", "--config", cfg, "--out", str(out), "--seed", "3"])
            sums.append(json.loads((out / "manifest.json").read_text())["checksums"])
        assert sums[0] == sums[1] and len(sums[0]) >= 6

    def test_glue_mode(self, tmp_path):
        cfg = write(tmp_path / "g.ini", "[frame]\nxi_max = 2e4\n[plan]\n"
                    "mode = glue\nenergies = 0, 1\nW = 4\n")
        code = main(["construct", "--config", cfg, "--out", str(tmp_path / "g")])
        rep = json.loads((tmp_path / "g" / "report.json").read_text())
        assert rep["checks_pass"]
        assert code == (0 if rep["certified"] else 1)
        assert len(rep["construction"]["blocks"]) == 4

    def test_schrodinger_mode_and_verify(self, tmp_path):
        cfg = write(tmp_path / "s.ini", "[frame]\nxi_max = 1e4\n[plan]\n"
                    "mode = schrodinger-critical\na = pi/2\n")
        out = tmp_path / "s"
        main(["construct", "--config", cfg, "--out", str(out)])
        rep = json.loads((out / "report.json").read_text())
        assert rep["checks"]["envelope"]["pass"]
        main(["verify", str(out)])
        res = json.loads((out / "verify.json").read_text())
        assert res["checks"]["envelope"]["pass"]


class TestUsage:
    def test_malformed_config(self, tmp_path, capsys):
        cfg = write(tmp_path / "bad.ini", "[plan\nd = 1\n")
        assert main(["construct", "--config", cfg]) == 2
        assert "usage" in capsys.readouterr().err

    def test_empty_sweep(self, tmp_path):
        cfg = write(tmp_path / "sw.ini", SINGLE)
        assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 2

    def test_missing_bundle(self, tmp_path):
        assert main(["verify", str(tmp_path / "nope")]) == 2

    def test_missing_config_flag(self):
        with pytest.raises(SystemExit) as exc:
            main(["construct"])
        assert exc.value.code == 2


class TestExport:
    def test_csv_deterministic(self, bundle, tmp_path):
        outs = []
        for k in range(2):
            o = tmp_path / f"e{k}"
            assert main(["export", str(bundle), "--out", str(o)]) == 0
            outs.append({p.name: p.read_bytes() for p in o.iterdir()})
        assert outs[0] == outs[1]
        assert set(outs[0]) == {"logR_E0.csv", "xiV.csv", "tails_E0.csv"}
        rows = list(csv.reader((tmp_path / "e0" / "tails_E0.csv").open()))
        assert rows[0] == ["decade", "lo", "hi", "mass"]
        assert [r[0] for r in rows[1:]] == ["1", "2", "3", "4"]

    def test_json(self, bundle, tmp_path):
        assert main(["export", str(bundle), "--format", "json", "--out",
                     str(tmp_path)]) == 0
        s = json.loads((tmp_path / "summary.json").read_text())
        assert s["verdicts"] == ["L2-certified"]

    def test_no_trajectories(self, bundle, tmp_path, capsys):
        b = tmp_path / "b"
        shutil.copytree(bundle, b)
        for p in b.glob("traj_E*"):
            p.unlink()
        assert main(["export", str(b), "--out", str(tmp_path / "o")]) == 0
        assert "warning" in capsys.readouterr().err
        assert (tmp_path / "o" / "xiV.csv").is_file()
        assert not list((tmp_path / "o").glob("logR_*"))


class TestSweep:
    SWEEP = SINGLE + "\n[sweep]\nd = 0.15, pi/12, 0.6\n"

    def test_table_and_cells(self, tmp_path):
        cfg = write(tmp_path / "sw.ini", self.SWEEP)
        main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")])
        rows = list(csv.DictReader((tmp_path / "s" / "sweep.csv").open()))
        assert [r["mode"] for r in rows] == ["single", "critical", "single"]
        assert all(r["status"] == "ok" for r in rows)
        assert rows[2]["verdict"] == "L2-certified"
        assert rows[0]["verdict"] != "L2-certified"
        assert len(list((tmp_path / "s").glob("cell_*"))) == 3
        man = json.loads((tmp_path / "s" / "manifest.json").read_text())
        assert "sweep.csv" in man["checksums"]

    def test_parallel_matches_serial(self, tmp_path):
        cfg = write(tmp_path / "sw.ini", self.SWEEP)
        main(["sweep", "--config", cfg, "--out", str(tmp_path / "a")])
        main(["sweep", "--config", cfg, "--out", str(tmp_path / "b"),
              "--jobs", "2"])
        a = (tmp_path / "a" / "sweep.csv").read_bytes()
        b = (tmp_path / "b" / "sweep.csv").read_bytes()
        assert a == b

    def test_margin_cells(self, tmp_path):
        cfg = write(tmp_path / "m.ini", SINGLE + "\n[sweep]\nalpha = 0.5, 1\n"
                    "margin = 2\n")
        main(["sweep", "--config", cfg, "--out", str(tmp_path / "m")])
        rows = list(csv.DictReader((tmp_path / "m" / "sweep.csv").open()))
        assert [float(r["alpha"]) for r in rows] == [0.5, 1.0]
        assert float(rows[1]["d"]) == pytest.approx(math.pi / 6)


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "stark_embed", "--help"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "construct" in r.stdout


def test_envelope_claims_file(bundle):
    claims = np.loadtxt(bundle / "envelope_claims.txt", ndmin=2)
    assert claims.shape == (1, 3)
    assert claims[0, 2] == pytest.approx(math.pi / 2)
