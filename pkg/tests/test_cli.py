import json
import os

import pytest

from torloop.cli import dispatch

from helpers import one_event_scenario


@pytest.fixture
def scenario_file(tmp_path):
    p = tmp_path / "scenario.json"
    p.write_text(one_event_scenario())
    return str(p)


class TestValidate:
    def test_ok_exit_zero(self, scenario_file, capsys):
        assert dispatch(["validate", "--scenario", scenario_file]) == 0
        out = capsys.readouterr().out
        assert "OK" in out

    def test_writes_nothing(self, scenario_file, tmp_path):
        before = set(os.listdir(tmp_path))
        dispatch(["validate", "--scenario", scenario_file])
        assert set(os.listdir(tmp_path)) == before

    def test_broken_scenario_exit_one(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        doc = json.loads(one_event_scenario())
        doc["scenes"][0]["event_zones"][0]["respawn"]["s_on_path"] = 10.0
        p.write_text(json.dumps(doc))
        assert dispatch(["validate", "--scenario", str(p)]) == 1
        assert "respawn-not-after-event" in capsys.readouterr().out

    def test_unparseable_scenario_exit_one(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert dispatch(["validate", "--scenario", str(p)]) == 1
        assert "scenario error" in capsys.readouterr().err

    def test_missing_file_exit_one(self, tmp_path, capsys):
        missing = str(tmp_path / "nope.json")
        assert dispatch(["validate", "--scenario", missing]) == 1
        assert "not found" in capsys.readouterr().err


class TestUsageErrors:
    def test_no_command_exits_two(self):
        with pytest.raises(SystemExit) as exc:
            dispatch([])
        assert exc.value.code == 2

    def test_unknown_driver_spec_exits_two(self, scenario_file, tmp_path):
        with pytest.raises(SystemExit) as exc:
            dispatch([
                "run", "--scenario", scenario_file,
                "--driver", "human", "--out", str(tmp_path / "out"),
            ])
        assert exc.value.code == 2

    def test_bad_listen_spec_exits_two(self, scenario_file, tmp_path):
        with pytest.raises(SystemExit) as exc:
            dispatch([
                "serve", "--scenario", scenario_file,
                "--listen", "nowhere", "--out", str(tmp_path / "out"),
            ])
        assert exc.value.code == 2


class TestRun:
    def test_run_writes_artifacts(self, scenario_file, tmp_path, capsys):
        out = str(tmp_path / "out")
        code = dispatch([
            "run", "--scenario", scenario_file,
            "--driver", "scripted:rt=2.5,style=brake",
            "--out", out, "--headless",
        ])
        assert code == 0
        names = os.listdir(out)
        assert "run.json" in names
        assert any(n.endswith("_main.json") for n in names)
        assert any(n.endswith("_main.inputs.jsonl") for n in names)
        assert "failures=0" in capsys.readouterr().out

    def test_run_then_replay_round_trip(self, scenario_file, tmp_path):
        rec = str(tmp_path / "rec")
        rep = str(tmp_path / "rep")
        assert dispatch([
            "run", "--scenario", scenario_file,
            "--driver", "scripted:rt=1.0,style=steer", "--out", rec,
        ]) == 0
        assert dispatch([
            "replay", "--scenario", scenario_file,
            "--inputs", rec, "--out", rep,
        ]) == 0
        manifest = json.load(open(os.path.join(rec, "run.json")))
        telemetry = manifest["scenes"]["main"]["telemetry"]
        original = open(os.path.join(rec, telemetry), "rb").read()
        assert open(os.path.join(rep, telemetry), "rb").read() == original

    def test_replay_against_altered_scenario_fails(self, scenario_file, tmp_path, capsys):
        rec = str(tmp_path / "rec")
        assert dispatch([
            "run", "--scenario", scenario_file,
            "--driver", "scripted:rt=2.5,style=brake", "--out", rec,
        ]) == 0
        altered = tmp_path / "altered.json"
        altered.write_text(one_event_scenario(tor_budget=5.0))
        assert dispatch([
            "replay", "--scenario", str(altered),
            "--inputs", rec, "--out", str(tmp_path / "rep"),
        ]) == 1
        assert "mismatch" in capsys.readouterr().err


class TestImportOsm:
    def test_import_writes_path_fragment(self, tmp_path):
        src = tmp_path / "roads.osm"
        src.write_text(
            "<osm>"
            "<node id='1' lat='50.0' lon='7.0'/>"
            "<node id='2' lat='50.001' lon='7.0'/>"
            "<way id='10'><nd ref='1'/><nd ref='2'/>"
            "<tag k='highway' v='residential'/></way>"
            "</osm>"
        )
        out = tmp_path / "paths.json"
        assert dispatch(["import-osm", "--in", str(src), "--out", str(out)]) == 0
        fragment = json.loads(out.read_text())
        assert "osm_way_10" in fragment["paths"]

    def test_import_failure_exit_one(self, tmp_path, capsys):
        src = tmp_path / "roads.osm"
        src.write_text("<osm><way id='1'><nd ref='9'/><nd ref='8'/>"
                       "<tag k='highway' v='x'/></way></osm>")
        out = tmp_path / "paths.json"
        assert dispatch(["import-osm", "--in", str(src), "--out", str(out)]) == 1
        assert "import failed" in capsys.readouterr().err
        assert not out.exists()
