"""
Tests for random streams, the block pool, artifact files and the run log.
"""

import json
import numpy as np
import pytest

from heatlab.nodes.logger import RunLogger
from heatlab.state import CriterionResult, ExperimentSpec
from tools import FileTool, block_layout, map_blocks, substream


def _square(task):
    return task * task


def test_block_layout():
    """Test that blocks tile the paths in order."""
    blocks = block_layout(paths=1000, cells_per_path=64, block_cells=4096)
    assert [b.index for b in blocks] == list(range(len(blocks)))
    assert blocks[0].count == 64
    assert sum(b.count for b in blocks) == 1000
    assert all(later.start == earlier.start + earlier.count for earlier, later in zip(blocks, blocks[1:]))

    # a path longer than a block still gets a block of its own
    assert block_layout(paths=3, cells_per_path=10_000, block_cells=100)[0].count == 1

    with pytest.raises(ValueError):
        block_layout(paths=0, cells_per_path=1, block_cells=1)


def test_substreams():
    """Test reproducibility and separation of substreams."""
    a = substream(42, 5).random(8)
    b = substream(42, 5).random(8)
    c = substream(42, 6).random(8)
    d = substream(43, 5).random(8)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_map_blocks_order():
    """Test that results come back in task order for any worker count."""
    tasks = list(range(12))
    assert map_blocks(_square, tasks, workers=1) == [t * t for t in tasks]
    assert map_blocks(_square, tasks, workers=3) == [t * t for t in tasks]


def test_csv_round_trip(tmp_path):
    """Test CSV output with a metadata header."""
    tool = FileTool(base_dir=tmp_path)
    rows = [{"t": 0.001, "value": 0.9, "provenance": "series"},
            {"t": 0.01, "value": 1.0 / 3.0, "provenance": "series"}]
    path = tool.save_csv(rows, "curve.csv", metadata={"seed": 7, "alpha": 1.5})

    text = path.read_text()
    assert text.startswith("# alpha: 1.5\n# seed: 7\n")
    assert '"t","value","provenance"' in text

    metadata, df = tool.load_csv(path)
    assert metadata == {"alpha": "1.5", "seed": "7"}
    assert df["value"].iloc[1] == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert list(df["provenance"]) == ["series", "series"]

    with pytest.raises(ValueError):
        tool.save_csv([], "empty.csv")


def test_json_output(tmp_path):
    """Test JSON output with numpy values and a metadata wrapper."""
    tool = FileTool(base_dir=tmp_path)
    path = tool.save_json({"values": np.array([1.0, 2.0]), "n": np.int64(3)}, "nested/out.json",
                          metadata={"seed": 1})
    document = json.loads(path.read_text())
    assert document == {"metadata": {"seed": 1}, "data": {"n": 3, "values": [1.0, 2.0]}}
    assert tool.load_json(path)["data"]["n"] == 3

    spec = ExperimentSpec(command="heat", params={"alpha": "1.5"}, seed=4)
    wrapped = tool.save_json(spec, "spec.json", metadata={"note": "x"})
    assert tool.load_json(wrapped, ExperimentSpec) == spec

    with pytest.raises(FileNotFoundError):
        tool.load_json(tmp_path / "missing.json")


def test_run_logger(tmp_path):
    """Test command and criterion records and their lookup."""
    run_logger = RunLogger(tmp_path / "logs")
    first = run_logger.log_run("heat", {"alpha": "1.5"}, seed=7, start_time=1.0, end_time=1.25)
    run_logger.log_criterion(CriterionResult(id="A1", passed=True, elapsed_s=0.5), "fast", seed=7)
    run_logger.log_run("tail", error=ValueError("bad u"), outcome="error")

    entry = run_logger.get_run_log(first)
    assert entry["command"] == "heat"
    assert entry["elapsed_ms"] == 250
    assert entry["outcome"] == "ok"

    recent = run_logger.get_recent_runs(limit=2)
    assert [e["command"] for e in recent] == ["tail", "A1"]
    assert recent[0]["error"] == "ValueError: bad u"
    assert recent[1]["kind"] == "criterion"
    assert [e["command"] for e in run_logger.get_recent_runs(command="heat")] == ["heat"]
    assert run_logger.get_run_log("missing") is None

    with pytest.raises(ValueError):
        run_logger.log_run("heat", outcome="done")
