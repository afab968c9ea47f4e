import json

from kitchentamp.cli import load_config, main

from conftest import TRANSCRIPTS


def test_plan_writes_report(tmp_path, capsys):
    rc = main(["plan", "--variant", "easy-single", "--mode", "subgoals", "--n-reprompt", "2",
               "--transcripts", str(TRANSCRIPTS), "--out", str(tmp_path), "--trace"])
    assert rc == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["outcome"] == "Success"
    assert len(list((tmp_path / "frames").glob("*.svg"))) == len(doc["executed_plan"]) + 1
    assert "Success" in capsys.readouterr().out


def test_missing_transcript_exit_code(tmp_path, capsys):
    assert main(["plan", "--transcripts", str(tmp_path)]) == 2
    assert "missing transcript" in capsys.readouterr().err


def test_render_scenes(tmp_path):
    assert main(["render", "--out", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.glob("*.svg")) == [
        "easy-dual.svg", "easy-single.svg", "obstacles-dual.svg", "obstacles-single.svg"]


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text(f'variant = "obstacles-dual"\nmode = "actions"\nn-reprompt = 1\ntranscripts = "{TRANSCRIPTS}"\n'
                   '[live]\nmodel = "m"\n')
    assert load_config(str(cfg))["live"] == {"model": "m"}
    main(["plan", "--config", str(cfg)])
    assert capsys.readouterr().out.startswith("obstacles-dual actions N=1")
    main(["plan", "--config", str(cfg), "--mode", "subgoals"])
    assert capsys.readouterr().out.startswith("obstacles-dual subgoals N=1")


def test_bench_prints_csv(capsys):
    rc = main(["bench", "--variant", "easy-single", "--mode", "actions", "--n-reprompt", "0", "--trials", "2",
               "--workers", "1", "--transcripts", str(TRANSCRIPTS)])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("variant,method") and lines[1].startswith("easy-single,actions-N0")


def test_validate_fixtures(tmp_path, capsys):
    assert main(["validate-fixtures", "--transcripts", str(tmp_path)]) == 1
    assert "missing transcript" in capsys.readouterr().out
