import orjson
import pytest

from inpaint360.documents import read_json
from inpaint360.pipeline.cli import main, run_id
from inpaint360.pipeline.config import PipelineConfig, load_config
from inpaint360.pipeline.stages import evaluate, run_stage


def test_synth_then_resume(tiny_config_path, tmp_path):
    out = tmp_path / "run"
    assert main(["synth", "--config", str(tiny_config_path), "--out", str(out)]) == 0
    manifest = read_json(out / "synth" / "stage_manifest.json")
    assert manifest["stage"] == "synth"
    assert "synth/manifest.json" in manifest["outputs"]
    assert read_json(out / "run.json")["seeds"]["run"] == 0
    assert (out / "metrics.prom").exists()

    cfg = load_config(tiny_config_path).with_overrides(output_dir=out)
    assert run_stage("synth", cfg) == "skipped"
    assert run_stage("synth", cfg, force=True) == "ran"


def test_run_log_is_written(tiny_config_path, tmp_path):
    out = tmp_path / "run"
    main(["synth", "--config", str(tiny_config_path), "--out", str(out)])
    lines = (out / "logs" / "run.jsonl").read_bytes().splitlines()
    records = [orjson.loads(line) for line in lines]
    assert "synth" in {r["labels"].get("stage") for r in records}
    assert run_id(load_config(tiny_config_path)) in {r["labels"].get("run_id") for r in records}


def test_changed_seed_reruns(tiny_config_path, tmp_path):
    cfg = load_config(tiny_config_path).with_overrides(output_dir=tmp_path)
    assert run_stage("synth", cfg) == "ran"
    assert run_stage("synth", cfg.with_overrides(seed=1)) == "ran"


def test_bad_config_exit_code(tmp_path):
    path = tmp_path / "bad.json"
    path.write_bytes(b'{"stages": ["paint"]}')
    assert main(["synth", "--config", str(path), "--out", str(tmp_path / "run")]) == 2


def test_zero_workers_exit_code(tmp_path):
    assert main(["synth", "--workers", "0", "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize("name, value", [("INPAINT360_WORKERS", "0"), ("INPAINT360_TRACE_EXPORTER", "zipkin")])
def test_invalid_environment_exit_code(monkeypatch, tmp_path, name, value):
    monkeypatch.setenv(name, value)
    assert main(["synth", "--out", str(tmp_path / "run")]) == 2


def test_missing_upstream_exit_code(tiny_config_path, tmp_path):
    assert main(["train", "--config", str(tiny_config_path), "--out", str(tmp_path / "run")]) == 3
    assert not (tmp_path / "run" / "train" / "stage_manifest.json").exists()


def test_unknown_stage_is_rejected():
    with pytest.raises(KeyError):
        run_stage("paint", PipelineConfig())
    with pytest.raises(SystemExit):
        main(["paint"])


def _run_all(config_path, out, workers):
    assert main(["run-all", "--config", str(config_path), "--out", str(out), "--workers", str(workers)]) == 0
    return {name: report.to_document() for name, report in evaluate(out).items()}


@pytest.mark.slow
def test_run_all_is_deterministic_across_workers(tiny_config_path, tmp_path):
    first = _run_all(tiny_config_path, tmp_path / "a", 1)
    second = _run_all(tiny_config_path, tmp_path / "b", 2)
    assert set(first) == {"per-frame", "retrain", "base", "in", "geom", "full"}
    assert first == second
    assert (tmp_path / "a" / "eval" / "ablation.json").exists()
    assert (tmp_path / "a" / "render" / "orbit_cameras.json").exists()
    for stage in ("synth", "train", "segment", "refine-masks", "inpaint", "retrain", "prior-train", "finetune", "render", "eval"):
        assert (tmp_path / "a" / stage / "stage_manifest.json").exists()
