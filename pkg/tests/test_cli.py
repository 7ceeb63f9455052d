"""
Tests for the command-line front end.
"""

import json
import math
import pytest

import cli
from tools import FileTool


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    """Run every command inside a scratch directory."""
    monkeypatch.chdir(tmp_path)
    return tmp_path


def read_csv(path):
    return FileTool().load_csv(path)


def read_json(path):
    return json.loads(path.read_text())


def test_tail_arctan(workdir):
    out = workdir / "tail.csv"
    assert cli.main(["tail", "--kind", "skbm-sup", "--alpha", "1", "--u", "2", "--out", str(out)]) == 0
    metadata, df = read_csv(out)
    assert df["survival"].iloc[0] == pytest.approx(0.295167, abs=1e-6)
    assert metadata["command"] == "tail"
    assert "spec_hash" in metadata
    assert (workdir / "tail.csv.spec.json").exists()


def test_tail_brownian_and_cauchy(workdir):
    out = workdir / "bm.csv"
    assert cli.main(["tail", "--kind", "bm", "--u", "0", "--out", str(out)]) == 0
    assert read_csv(out)[1]["survival"].iloc[0] == 1.0

    out = workdir / "cauchy.csv"
    assert cli.main(["tail", "--kind", "cauchy-sup", "--u", "100", "--out", str(out)]) == 0
    value = read_csv(out)[1]["survival"].iloc[0]
    assert abs(value - 1.0 / (100.0 * math.pi)) <= 4.0 / math.pi ** 2 * math.log(100.0) / 100.0 ** 2


def test_tail_usage_errors():
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["tail", "--kind", "levy"])
    assert excinfo.value.code == 2
    assert cli.main(["tail", "--u", "1"]) == 2
    assert cli.main(["tail", "--kind", "bm", "--u", "-1"]) == 2


def test_density(workdir):
    out = workdir / "density.json"
    assert cli.main(["density", "--alpha", "1", "--x", "1,0.01", "--format", "json", "--out", str(out)]) == 0
    rows = read_json(out)["data"]
    assert rows[0]["density"] == pytest.approx(0.219695, abs=1e-6)
    assert rows[0]["method"] == "series"
    assert rows[1]["method"] == "kanter_integral"

    assert cli.main(["density", "--alpha", "1", "--x", "0.01", "--no-fallback", "--out", str(out)]) == 1


def test_heat_series(workdir):
    out = workdir / "heat.csv"
    assert cli.main(["heat", "--process", "skbm", "--alpha", "1", "--t", "1e-12,1e-3", "--out", str(out)]) == 0
    metadata, df = read_csv(out)
    assert list(df.columns) == ["t", "value", "stderr", "provenance", "bias_diag"]
    assert df["value"].iloc[0] == pytest.approx(1.0, abs=1e-9)
    assert metadata["process"] == "skbm"
    assert metadata["alpha"] == "1.0"

    assert cli.main(["heat", "--alpha", "2.5", "--t", "0.1", "--out", str(out)]) == 2
    assert cli.main(["heat", "--process", "ksbm", "--provenance", "series", "--t", "0.1", "--out", str(out)]) == 2


def test_heat_both_and_replay(workdir):
    """Test the coupled ordering and byte-identical replay from the spec file."""
    out = workdir / "both.csv"
    args = ["heat", "--process", "both", "--provenance", "mc", "--alpha", "1.5", "--t", "0.01,0.1",
            "--paths", "2000", "--steps", "8", "--seed", "3", "--out", str(out)]
    assert cli.main(args) == 0
    _, df = read_csv(out)
    ks = df[df["process"] == "ksbm"].set_index("t")["value"]
    sk = df[df["process"] == "skbm"].set_index("t")["value"]
    assert (sk <= ks + 1e-12).all()

    first = out.read_bytes()
    out.unlink()
    assert cli.main(["--spec", str(workdir / "both.csv.spec.json")]) == 0
    assert out.read_bytes() == first


def test_expand(workdir):
    out = workdir / "expand.json"
    assert cli.main(["expand", "--process", "skbm", "--alpha", "1.5", "--interval", "0,1", "--out", str(out)]) == 0
    data = read_json(out)["data"]
    assert data["c2"] == pytest.approx(2.0 * 2.0 * math.gamma(1.0 / 3.0) / math.pi, rel=1e-12)
    assert data["constant_provenance"]["c2"] == "closed_form"

    assert cli.main(["expand", "--process", "ksbm", "--alpha", "1", "--interval", "0,1", "--out", str(out)]) == 0
    assert read_json(out)["data"]["c2log"] == pytest.approx(2.0 / math.pi)

    assert cli.main(["expand", "--process", "skbm", "--alpha", "1.5", "--eigenseries", "--out", str(out)]) == 0
    assert read_json(out)["data"]["source"] == "eigenseries"


def test_expand_refuses_low_alpha(workdir, capsys):
    assert cli.main(["expand", "--process", "skbm", "--alpha", "0.5", "--out", str(workdir / "x.json")]) == 2
    assert "alpha=0.5" in capsys.readouterr().err


def test_fit_synthetic(workdir):
    out = workdir / "fit.json"
    args = ["fit", "--synthetic", "--process", "skbm", "--alpha", "1.5", "--eigenseries",
            "--t-grid", "1e-6,1e-3,12", "--out", str(out)]
    assert cli.main(args) == 0
    coefficients = read_json(out)["data"]["coefficients"]
    assert coefficients["t^(1/alpha)"][0] == pytest.approx(4.0 * math.gamma(1.0 / 3.0) / math.pi, rel=1e-8)

    assert cli.main(["fit", "--out", str(out)]) == 2


def test_fit_from_curve(workdir):
    """Test fitting a curve file written by the heat command."""
    curve = workdir / "curve.csv"
    assert cli.main(["heat", "--process", "skbm", "--alpha", "1", "--t-grid", "1e-6,1e-4,8", "--out", str(curve)]) == 0
    out = workdir / "fit.csv"
    args = ["fit", "--curve", str(curve), "--basis", "t*ln(1/t),t", "--format", "csv", "--out", str(out)]
    assert cli.main(args) == 0
    _, df = read_csv(out)
    row = df.set_index("coefficient").loc["t*ln(1/t)"]
    assert row["value"] == pytest.approx(4.0 / math.pi, rel=1e-3)


def test_run_log(workdir):
    out = workdir / "bm.csv"
    cli.main(["tail", "--kind", "bm", "--u", "1", "--out", str(out)])
    logs = list((workdir / "logs").glob("run_*.jsonl"))
    assert len(logs) == 1
    entry = json.loads(logs[0].read_text().splitlines()[-1])
    assert entry["command"] == "tail"
    assert entry["outcome"] == "ok"


def test_replay_keeps_block_size(workdir, monkeypatch):
    """Test that a replay draws the same numbers after HEATLAB_BLOCK_CELLS changes."""
    monkeypatch.setattr(cli.config, "BLOCK_CELLS", 64)
    out = workdir / "mc.csv"
    args = ["heat", "--process", "skbm", "--provenance", "mc", "--alpha", "1.5", "--t", "0.05",
            "--paths", "300", "--steps", "8", "--seed", "5", "--out", str(out)]
    assert cli.main(args) == 0
    spec = read_json(workdir / "mc.csv.spec.json")
    assert spec["params"]["block_cells"] == 64

    first = out.read_bytes()
    out.unlink()
    monkeypatch.setattr(cli.config, "BLOCK_CELLS", 10 ** 6)
    assert cli.main(["--spec", str(workdir / "mc.csv.spec.json")]) == 0
    assert out.read_bytes() == first
