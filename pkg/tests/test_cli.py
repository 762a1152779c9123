import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from fadekit.cli import build_parser, main
from fadekit.fitting import load_samples

SUBCOMMANDS = ["mixture", "eval", "capacity", "sample", "fit", "converge", "approx-rician"]


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def read_csv(text, header):
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == header.split(",")
    return np.array([[float(v) for v in r] for r in rows[1:]])


@pytest.fixture(scope="module")
def sample_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "s.txt"
    code, _ = run(["sample", "--gbar", "1", "--kappa", "5", "--mu", "3", "--m", "2",
                   "--n", "20000", "--seed", "11", "--out", str(path)])
    assert code == 0
    return path


class TestFormats:
    def test_mixture_json(self):
        code, text = run(["mixture", "--gbar", "1", "--kappa", "1", "--mu", "1", "--m", "2"])
        assert code == 0
        doc = json.loads(text)
        assert doc["regime"] == "proper"
        w = [c["weight"] for c in doc["components"]]
        assert w == pytest.approx([1 / 3, 2 / 3], rel=1e-14)
        assert [c["shape"] for c in doc["components"]] == [2, 1]
        assert doc["checks"]["weight_sum"] == pytest.approx(1, abs=1e-12)
        assert doc["checks"]["mean"] == pytest.approx(1, rel=1e-12)

    def test_mixture_improper(self):
        _, text = run(["mixture", "--gbar", "1", "--kappa", "2", "--mu", "3", "--m", "1"])
        doc = json.loads(text)
        assert doc["regime"] == "improper"
        assert any(c["weight"] < 0 for c in doc["components"])

    def test_eval_cdf_example(self):
        code, text = run(["eval", "--what", "cdf", "--gbar", "1", "--kappa", "3", "--mu", "2",
                          "--m", "2", "--grid", "0:5:6"])
        assert code == 0
        rows = read_csv(text, "x,value")
        assert rows.shape == (6, 2)
        assert rows[0].tolist() == [0.0, 0.0]
        assert np.all(np.diff(rows[:, 1]) > 0)

    def test_eval_log_and_mgf(self):
        _, text = run(["eval", "--what", "pdf", "--gbar", "1", "--kappa", "3", "--mu", "2",
                       "--m", "2", "--grid", "1e-3:10:7", "--log"])
        rows = read_csv(text, "x,value")
        assert rows[:, 0] == pytest.approx(np.geomspace(1e-3, 10, 7), rel=1e-15)
        _, text = run(["eval", "--what", "mgf", "--gbar", "1", "--kappa", "3", "--mu", "2",
                       "--m", "2", "--grid=-2:0:3"])
        rows = read_csv(text, "x,value")
        assert rows[-1].tolist() == [0.0, 1.0]

    def test_floats_round_trip_exactly(self):
        _, text = run(["eval", "--what", "pdf", "--gbar", "1", "--kappa", "3", "--mu", "2",
                       "--m", "2", "--grid", "0.1:3:4"])
        for line in text.splitlines()[1:]:
            for tok in line.split(","):
                assert f"{float(tok):.17g}" == tok

    def test_capacity_example(self):
        code, text = run(["capacity", "--kappa", "10", "--mu", "3", "--m", "3",
                          "--gbar-db-grid", "0:40:41"])
        assert code == 0
        rows = read_csv(text, "snr_db,capacity_bpshz")
        assert rows.shape == (41, 2)
        assert np.all(np.diff(rows[:, 1]) > 0)
        assert np.all(rows[:, 1] <= np.log2(1 + 10 ** (rows[:, 0] / 10)))

    def test_sample_to_stdout(self):
        code, text = run(["sample", "--gbar", "1", "--kappa", "5", "--mu", "3", "--m", "2",
                          "--n", "60", "--seed", "3"])
        assert code == 0
        assert load_samples(text).n == 60

    def test_sample_file_matches_stdout(self, sample_file):
        _, text = run(["sample", "--gbar", "1", "--kappa", "5", "--mu", "3", "--m", "2",
                       "--n", "20000", "--seed", "11"])
        assert sample_file.read_text() == text

    def test_fit_json(self, sample_file):
        code, text = run(["fit", "--in", str(sample_file), "--mu-max", "3", "--m-max", "3",
                          "--models", "shadowed,nakagami"])
        assert code == 0
        doc = json.loads(text)
        assert doc["model"] in ("shadowed", "nakagami")
        assert {c["model"] for c in doc["candidates"]} == {"shadowed", "nakagami"}

    def test_converge(self):
        code, text = run(["converge", "--kappa", "5", "--mu", "3", "--m-list", "2,20"])
        assert code == 0
        rows = read_csv(text, "m,sup_gap")
        assert rows[:, 0].tolist() == [2, 20] and rows[1, 1] < rows[0, 1]

    def test_approx_rician(self):
        code, text = run(["approx-rician", "--K", "3", "--m-list", "5,20"])
        assert code == 0
        rows = read_csv(text, "m,sup_pdf_gap")
        assert rows[1, 1] < rows[0, 1]


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ["mixture", "--gbar", "2", "--kappa", "0.5", "--mu", "6", "--m", "2"],
        ["eval", "--what", "cdf", "--gbar", "1", "--kappa", "3", "--mu", "2", "--m", "1", "--grid", "0:9:10"],
        ["sample", "--gbar", "1", "--kappa", "1", "--mu", "2", "--m", "6", "--n", "500", "--seed", "99"],
        ["approx-rician", "--K", "10", "--m-list", "1,4"],
    ])
    def test_byte_identical(self, argv):
        assert run(argv) == run(argv)


class TestExitCodes:
    def test_help_for_every_subcommand(self):
        parser = build_parser()
        actions = [a for a in parser._actions if a.dest == "command"][0]
        for name in SUBCOMMANDS:
            sub = actions.choices[name]
            text = sub.format_help()
            for act in sub._actions:
                for opt in act.option_strings:
                    assert opt in text
            assert run([name, "--help"])[0] == 0

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "fadekit", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        for name in SUBCOMMANDS:
            assert name in proc.stdout

    @pytest.mark.parametrize("argv", [
        [],
        ["eval", "--what", "cdf"],
        ["eval", "--what", "cdf", "--gbar", "1", "--kappa", "3", "--mu", "2", "--m", "2", "--grid", "0:5"],
        ["mixture", "--gbar", "1", "--kappa", "1", "--mu", "1.5", "--m", "2"],
        ["mixture", "--gbar", "-1", "--kappa", "1", "--mu", "1", "--m", "2"],
        ["mixture", "--gbar", "1", "--kappa", "1e-5", "--mu", "3", "--m", "1"],
        ["eval", "--what", "pdf", "--gbar", "1", "--kappa", "3", "--mu", "2", "--m", "2", "--grid=-1:1:3"],
        ["converge", "--kappa", "5", "--mu", "3", "--m-list", "a,b"],
    ])
    def test_usage_errors(self, argv, capsys):
        code, text = run(argv)
        assert code == 2 and text == ""

    def test_compute_errors(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("1.0\n-2.0\n")
        code, text = run(["fit", "--in", str(bad), "--mu-max", "2", "--m-max", "2"])
        assert code == 1 and text == ""
        assert "line 2" in capsys.readouterr().err
        code, _ = run(["fit", "--in", str(tmp_path / "missing.txt"), "--mu-max", "2", "--m-max", "2"])
        assert code == 1
        code, _ = run(["sample", "--gbar", "1", "--kappa", "1", "--mu", "3", "--m", "1",
                       "--n", "10", "--seed", "1", "--method", "mixture"])
        assert code == 1
