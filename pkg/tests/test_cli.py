import json

import pytest

from minifleet.cli import CONFIG_ENV, build_parser, main


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParser:
    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_unknown_scenario_rejected_by_argparse(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["run", "--scenario", "nope"])


class TestRun:
    def test_scenario_required(self, capsys):
        code, _, err = run_cli(capsys, "run")
        assert code == 2
        assert "--scenario is required" in err

    def test_sync_circle_writes_log(self, capsys, tmp_path):
        out = tmp_path / "run.ndjson"
        code, stdout, _ = run_cli(
            capsys,
            "run", "--scenario", "sync_circle", "--seed", "3",
            "--sigma-xy", "0", "--out", str(out),
        )
        assert code == 0
        assert "complete" in stdout
        lines = out.read_text().strip().splitlines()
        assert json.loads(lines[0])["kind"] == "header"
        assert json.loads(lines[-1]) == {"kind": "end", "complete": True}

    def test_env_config_supplies_scenario(self, capsys, tmp_path, monkeypatch):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"scenario": "sync_circle", "sigma_xy": 0.0, "seed": 1}))
        monkeypatch.setenv(CONFIG_ENV, str(cfg))
        code, stdout, _ = run_cli(capsys, "run")
        assert code == 0
        assert stdout.startswith("sync_circle:")

    def test_flags_win_over_env_config(self, capsys, tmp_path, monkeypatch):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"scenario": "sync_circle", "vehicles": 1, "seed": 1}))
        monkeypatch.setenv(CONFIG_ENV, str(cfg))
        out = tmp_path / "run.ndjson"
        code, _, _ = run_cli(
            capsys, "run", "--vehicles", "2", "--sigma-xy", "0", "--out", str(out)
        )
        assert code == 0
        header = json.loads(out.read_text().splitlines()[0])
        assert header["config"]["vehicle_count"] == 2

    def test_non_object_env_config_rejected(self, capsys, tmp_path, monkeypatch):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1,2,3]")
        monkeypatch.setenv(CONFIG_ENV, str(cfg))
        with pytest.raises(SystemExit):
            main(["run"])


class TestReplay:
    def test_replay_of_fresh_log(self, capsys, tmp_path):
        out = tmp_path / "run.ndjson"
        run_cli(
            capsys, "run", "--scenario", "sync_circle", "--sigma-xy", "0",
            "--out", str(out),
        )
        code, stdout, _ = run_cli(capsys, "replay", "--log", str(out))
        assert code == 0
        assert "zero divergences" in stdout

    def test_replay_of_tampered_log(self, capsys, tmp_path):
        out = tmp_path / "run.ndjson"
        run_cli(
            capsys, "run", "--scenario", "sync_circle", "--sigma-xy", "0",
            "--out", str(out),
        )
        lines = out.read_text().splitlines()
        rec = json.loads(lines[50])
        rec["thrusts"][0][1] += 1
        lines[50] = json.dumps(rec, separators=(",", ":"), sort_keys=True)
        out.write_text("\n".join(lines) + "\n")
        code, stdout, _ = run_cli(capsys, "replay", "--log", str(out))
        assert code == 1
        assert "divergence at tick" in stdout


class TestPlanHex:
    def test_emits_problem_and_plan_ndjson(self, capsys):
        code, stdout, _ = run_cli(
            capsys, "plan-hex", "--workspace", "1.5x0.9", "--robots", "3", "--seed", "2"
        )
        assert code == 0
        kinds = [json.loads(line)["kind"] for line in stdout.strip().splitlines()]
        assert kinds[:3] == ["grid", "endpoints", "plan"]
        assert set(kinds[3:]) == {"step"}

    def test_bad_workspace_string(self, capsys):
        code, _, err = run_cli(capsys, "plan-hex", "--workspace", "wide", "--robots", "1")
        assert code == 2
        assert "--workspace" in err

    def test_too_many_robots(self, capsys):
        code, _, err = run_cli(
            capsys, "plan-hex", "--workspace", "0.45x0.3", "--robots", "40"
        )
        assert code == 2
        assert "too many robots" in err
