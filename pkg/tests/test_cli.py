"""End-to-end CLI flows through main(), with exit-code contracts."""

from __future__ import annotations

import json

import pytest

import scenarios
from etho.cli import EXIT_RUNTIME, EXIT_USAGE, EXIT_VALIDATION, main
from etho.trackdata import save_dataset, save_objects


@pytest.fixture
def bundle(tmp_path):
    d, objects = scenarios.epm_scene()
    out = tmp_path / "ds"
    out.mkdir()
    save_dataset(d, out / "dataset.json", "json")
    save_objects(objects, out / "objects.json")
    return out


def test_ingest_run_eval_flow(tmp_path, capsys):
    d, objects = scenarios.epm_scene()
    csv_path = tmp_path / "k.csv"
    save_dataset(d, csv_path, "csv")
    obj_path = tmp_path / "o.json"
    save_objects(objects, obj_path)

    assert main([
        "ingest", "--keypoints", str(csv_path), "--objects", str(obj_path),
        "--out", str(tmp_path / "ds"), "--frame-size", "10000x10000", "--id", "test",
    ]) == 0

    events_path = tmp_path / "events.json"
    assert main([
        "run", "--behavior", "epm_closed_arm", "--dataset", str(tmp_path / "ds"),
        "--out", str(events_path),
    ]) == 0
    doc = json.loads(events_path.read_text())
    assert doc["events"]["m0"] == [[40, 70]]

    gt_path = tmp_path / "labels.csv"
    rows = ["frame,label"] + [f"{f},{1 if 40 <= f < 70 else 0}" for f in range(doc["n_frames"])]
    gt_path.write_text("\n".join(rows) + "\n")
    capsys.readouterr()
    assert main(["eval", "--pred", str(events_path), "--gt", str(gt_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["f1"] == 1.0


def test_run_with_params(bundle, tmp_path, capsys):
    assert main([
        "run", "--behavior", "epm_closed_arm", "--dataset", str(bundle),
        "--param", "min_window=1000",
    ]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["events"]["m0"] == []


def test_define_then_run_via_session(bundle, tmp_path, capsys):
    etho_file = tmp_path / "behaviors.etho"
    etho_file.write_text('define in_closed as object("closed arm", overlap)\n')
    session_file = tmp_path / "s.json"
    assert main(["define", "--file", str(etho_file), "--session", str(session_file)]) == 0
    capsys.readouterr()
    assert main([
        "run", "--behavior", "in_closed", "--dataset", str(bundle),
        "--session", str(session_file),
    ]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["events"]["m0"] == [[40, 70]]


def test_define_syntax_error_exit_2_with_position(tmp_path, capsys):
    etho_file = tmp_path / "behaviors.etho"
    etho_file.write_text("define broken as\ndefine ok as state(speed > 1)\n")
    rc = main(["define", "--file", str(etho_file), "--session", str(tmp_path / "s.json")])
    assert rc == EXIT_VALIDATION
    err = capsys.readouterr().err
    assert f"{etho_file}:2:1" in err  # 'define' of line 2 is the unexpected token


def test_unknown_behavior_exit_2(bundle, capsys):
    rc = main(["run", "--behavior", "nope", "--dataset", str(bundle)])
    assert rc == EXIT_VALIDATION
    assert "unknown behavior" in capsys.readouterr().err


def test_usage_error_exit_1(capsys):
    assert main(["run"]) == EXIT_USAGE
    assert main(["not-a-command"]) == EXIT_USAGE


def test_missing_file_exit_runtime(tmp_path, capsys):
    rc = main(["ethogram", "--events", str(tmp_path / "none.json"), "--out", str(tmp_path / "x.svg")])
    assert rc == EXIT_RUNTIME


def test_ethogram_and_traj_outputs(bundle, tmp_path, capsys):
    events_path = tmp_path / "events.json"
    main(["run", "--behavior", "epm_open_arm", "--dataset", str(bundle), "--out", str(events_path)])
    svg_path = tmp_path / "plot.svg"
    assert main(["ethogram", "--events", f"open={events_path}", "--out", str(svg_path)]) == 0
    assert svg_path.read_bytes().startswith(b"<svg")
    traj_path = tmp_path / "traj.svg"
    assert main([
        "traj", "--dataset", str(bundle), "--animal", "m0",
        "--bodyparts", "mouse_center", "--events", str(events_path), "--out", str(traj_path),
    ]) == 0
    assert traj_path.read_bytes().startswith(b"<svg")


def test_retrieve(capsys):
    assert main(["retrieve", "--query", "umap embedding", "--k", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["results"]) == 2
    assert doc["results"][0]["name"] == "umap_embedding"


def test_session_save_load(tmp_path, capsys):
    state_path = tmp_path / "state.json"
    assert main(["session", "save", "--path", str(state_path)]) == 0
    capsys.readouterr()
    assert main(["session", "load", "--path", str(state_path)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["budget"] == 4096
    assert summary["symbols"] == []


def test_session_load_bad_version(tmp_path, capsys):
    state_path = tmp_path / "state.json"
    state_path.write_text(json.dumps({"version": 42}))
    assert main(["session", "load", "--path", str(state_path)]) == EXIT_VALIDATION
