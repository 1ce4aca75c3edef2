"""Command-line interface: flags, exit codes, and the full pipeline."""

from __future__ import annotations

import argparse
import json

import pytest

from pedwatch.cli import build_parser, main
from pedwatch.service.auth import User, hash_password, write_users_file
from pedwatch.store import Store

SUBCOMMANDS = (
    "ingest", "analyze", "correlate", "cutlist", "render-clips", "synth", "serve",
)


def scenario_doc(source_uri: str) -> dict:
    """Two minutes at cam42: one 30 s wait at the stop, one median crossing."""
    return {
        "meta": {
            "camera_id": "cam42",
            "start_ts": "2020-03-10T10:00:00-05:00",
            "fps": 10.0,
            "frame_count": 1200,
            "width": 1920,
            "height": 1080,
            "source_uri": source_uri,
        },
        "groups": [
            {
                "name": "sb_stop",
                "kind": "dwell",
                "polygons": [[[0, 450], [200, 450], [200, 550], [0, 550]]],
            },
            {
                "name": "median",
                "kind": "crossing",
                "polygons": [[[400, 400], [1600, 400], [1600, 700], [400, 700]]],
            },
        ],
        "agents": [
            {"behavior": "wait", "start_s": 2.0, "duration_s": 30.0,
             "roi": "sb_stop"},
            {"behavior": "cross", "start_s": 10.0, "duration_s": 4.0,
             "path": [[500, 380], [500, 720]]},
        ],
        "seed": 7,
    }


@pytest.fixture
def workdir(tmp_path):
    source = tmp_path / "raw.mp4"
    source.write_bytes(b"\x00" * 64)
    (tmp_path / "scenario.json").write_text(
        json.dumps(scenario_doc(str(source)))
    )
    return tmp_path


def run(argv):
    return main([str(a) for a in argv])


def synth_and_ingest(workdir, boardings=False, extra_ingest=()):
    dets = workdir / "detections.jsonl"
    assert run(["synth", "--scenario", workdir / "scenario.json", "--out", dets]) == 0
    store = workdir / "store"
    roi = workdir / "roi.json"
    roi.write_text(json.dumps({"groups": scenario_doc("x")["groups"]}))
    argv = ["ingest", "--store", store, "--roi", roi,
            "--detections", dets, "--meta", f"{dets}.meta.json"]
    if boardings:
        csv = workdir / "boardings.csv"
        csv.write_text(
            "stop_id,date,hour,boardings\nsb_stop,2020-03-10,10,2\n"
        )
        argv += ["--boardings", csv]
    assert run(argv + list(extra_ingest)) == 0
    return Store(store)


class TestHelp:
    def test_main_help_lists_every_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for name in SUBCOMMANDS:
            assert name in out

    @pytest.mark.parametrize("name", SUBCOMMANDS)
    def test_subcommand_help_exits_zero(self, capsys, name):
        with pytest.raises(SystemExit) as exc:
            run([name, "--help"])
        assert exc.value.code == 0
        assert "--store" in capsys.readouterr().out or name == "synth"

    def test_every_flag_documented(self):
        parser = build_parser()
        sub = next(
            a for a in parser._actions
            if isinstance(a, argparse._SubParsersAction)
        )
        assert set(sub.choices) == set(SUBCOMMANDS)
        for name, sp in sub.choices.items():
            for action in sp._actions:
                assert action.help, f"{name}: {action.dest} lacks help text"


class TestExitCodes:
    def test_no_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run([])
        assert exc.value.code == 2

    def test_unknown_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run(["frobnicate"])
        assert exc.value.code == 2

    def test_missing_required_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run(["analyze"])
        assert exc.value.code == 2

    def test_analyze_on_empty_store_names_stage(self, tmp_path, capsys):
        assert run(["analyze", "--store", tmp_path / "none"]) == 1
        assert "analyze/load" in capsys.readouterr().err

    def test_bad_roi_names_stage(self, tmp_path, capsys):
        roi = tmp_path / "roi.json"
        roi.write_text("{not json")
        assert run(["ingest", "--store", tmp_path / "s", "--roi", roi]) == 1
        assert "ingest/roi" in capsys.readouterr().err

    def test_detections_without_meta(self, workdir, capsys):
        roi = workdir / "roi.json"
        roi.write_text(json.dumps({"groups": scenario_doc("x")["groups"]}))
        dets = workdir / "d.jsonl"
        dets.write_text("")
        assert run(["ingest", "--store", workdir / "s", "--roi", roi,
                    "--detections", dets]) == 1
        assert "requires --meta" in capsys.readouterr().err

    def test_missing_scenario_file(self, tmp_path, capsys):
        assert run(["synth", "--scenario", tmp_path / "no.json",
                    "--out", tmp_path / "o.jsonl"]) == 1
        assert "synth/scenario" in capsys.readouterr().err

    def test_serve_rejects_bad_addr(self, tmp_path, capsys):
        users = tmp_path / "users.json"
        write_users_file(users, [User("ana", hash_password("pw"))])
        assert run(["serve", "--store", tmp_path, "--users", users,
                    "--addr", "nocolon"]) == 1
        assert "--addr" in capsys.readouterr().err

    def test_serve_requires_users_file(self, tmp_path, capsys):
        assert run(["serve", "--store", tmp_path,
                    "--users", tmp_path / "none.json"]) == 1
        assert "users" in capsys.readouterr().err


class TestSynth:
    def test_writes_stream_and_sidecars(self, workdir):
        dets = workdir / "detections.jsonl"
        assert run(["synth", "--scenario", workdir / "scenario.json",
                    "--out", dets]) == 0
        assert dets.exists()
        meta = json.loads((workdir / "detections.jsonl.meta.json").read_text())
        assert meta["camera_id"] == "cam42"
        truth = json.loads((workdir / "detections.jsonl.truth.json").read_text())
        assert truth["sessions"]["sb_stop"]
        assert truth["crossings"]["median"]

    def test_deterministic_for_fixed_seed(self, workdir):
        a, b = workdir / "a.jsonl", workdir / "b.jsonl"
        run(["synth", "--scenario", workdir / "scenario.json", "--out", a])
        run(["synth", "--scenario", workdir / "scenario.json", "--out", b])
        assert a.read_bytes() == b.read_bytes()


class TestPipeline:
    def test_ingest_populates_store(self, workdir):
        store = synth_and_ingest(workdir, boardings=True)
        assert store.roi_path.exists()
        assert store.video_keys() == ["cam42_20200310T100000"]
        assert len(store.load_boardings()) == 1

    def test_min_confidence_filters_at_ingest(self, workdir):
        full = synth_and_ingest(workdir)
        n_full = len(full.load_log(full.video_keys()[0]).detections)
        strict_dir = workdir / "strict"
        strict_dir.mkdir()
        (strict_dir / "scenario.json").write_text(
            (workdir / "scenario.json").read_text()
        )
        store = synth_and_ingest(strict_dir, extra_ingest=["--min-confidence", "2.0"])
        assert len(store.load_log(store.video_keys()[0]).detections) == 0
        assert n_full > 0

    def test_analyze_writes_sorted_events_and_reports(self, workdir):
        store = synth_and_ingest(workdir, boardings=True)
        assert run(["analyze", "--store", store.root]) == 0

        events = store.load_events()
        keys = [(e.date, e.hour, e.session.f_b, e.event_id) for e in events]
        assert keys == sorted(keys)
        kinds = {e.kind for e in events}
        assert kinds == {"dwell", "crossing"}

        summary = store.load_report("summary.json")
        assert summary["groups"]["sb_stop"]["total"] == 1
        assert summary["groups"]["median"]["total"] == 1
        accuracy = store.load_report("accuracy.json")
        assert accuracy["groups"]["sb_stop"]["mae"] == 1.0

    def test_run_config_is_explicit_and_stable(self, workdir):
        store = synth_and_ingest(workdir)
        run(["analyze", "--store", store.root])
        config = store.load_run_config()
        assert set(config) == {
            "command", "tz", "stride", "iou_min", "track_gap_s",
            "min_session_time_s", "min_no_detection_s", "min_disp_px",
            "groups", "videos",
        }
        assert config["groups"]["sb_stop"]["min_session_time_s"] == 15.0
        assert config["groups"]["median"]["min_no_detection_s"] == 2.0
        assert config["videos"] == ["cam42_20200310T100000"]

    def test_analyze_is_repeatable_byte_for_byte(self, workdir):
        store = synth_and_ingest(workdir, boardings=True)
        run(["analyze", "--store", store.root])
        first = {
            p.name: p.read_bytes()
            for p in [store.events_path, store.run_config_path,
                      store.reports_dir / "summary.json",
                      store.reports_dir / "accuracy.json"]
        }
        run(["analyze", "--store", store.root])
        second = {
            p.name: p.read_bytes()
            for p in [store.events_path, store.run_config_path,
                      store.reports_dir / "summary.json",
                      store.reports_dir / "accuracy.json"]
        }
        assert first == second

    def test_workers_do_not_change_output(self, workdir):
        store = synth_and_ingest(workdir)
        run(["analyze", "--store", store.root, "--workers", "1"])
        serial = store.events_path.read_bytes()
        run(["analyze", "--store", store.root, "--workers", "4"])
        assert store.events_path.read_bytes() == serial

    def test_threshold_flags_override_config(self, workdir):
        store = synth_and_ingest(workdir)
        run(["analyze", "--store", store.root, "--min-session-time-s", "60"])
        # 30 s wait falls under the raised 60 s floor; only the crossing stays
        assert all(e.kind != "dwell" for e in store.load_events())
        config = store.load_run_config()
        assert config["groups"]["sb_stop"]["min_session_time_s"] == 60.0

    def test_correlate_writes_table_and_csv(self, workdir):
        store = synth_and_ingest(workdir)
        run(["analyze", "--store", store.root])
        out = workdir / "corr.csv"
        assert run(["correlate", "--store", store.root, "--out", out]) == 0
        assert store.load_report("correlation.json")["rows"]
        lines = out.read_text().splitlines()
        assert lines[0].startswith("series,")
        assert lines[1].startswith("#SB_STOP,")

    def test_correlate_default_csv_location(self, workdir):
        store = synth_and_ingest(workdir)
        run(["analyze", "--store", store.root])
        assert run(["correlate", "--store", store.root]) == 0
        assert (store.reports_dir / "correlation.csv").exists()

    def test_cutlist_and_render(self, workdir):
        store = synth_and_ingest(workdir)
        run(["analyze", "--store", store.root])
        assert run(["cutlist", "--store", store.root, "--merge"]) == 0
        doc = store.load_cutlist()
        clips = doc["videos"]["cam42_20200310T100000"]["clips"]
        assert clips

        template = "cp {source} {output} # {start_s} {duration_s}"
        assert run(["render-clips", "--store", store.root,
                    "--cutter", template]) == 0
        rendered = sorted(store.clips_dir.iterdir())
        assert [p.name for p in rendered] == sorted(
            f"{c['output_name']}.mp4" for c in clips
        )
        for ev in store.load_events():
            assert store.clip_file(ev.event_id) is not None

    def test_render_skips_existing(self, workdir, caplog):
        store = synth_and_ingest(workdir)
        run(["analyze", "--store", store.root])
        run(["cutlist", "--store", store.root])
        template = "cp {source} {output} # {start_s} {duration_s}"
        run(["render-clips", "--store", store.root, "--cutter", template])
        with caplog.at_level("INFO", logger="pedwatch.clips"):
            assert run(["render-clips", "--store", store.root,
                        "--cutter", template]) == 0
        assert "skipping" in caplog.text

    def test_render_failure_exits_one(self, workdir, capsys):
        store = synth_and_ingest(workdir)
        run(["analyze", "--store", store.root])
        run(["cutlist", "--store", store.root])
        template = "false {source} {start_s} {duration_s} {output}"
        assert run(["render-clips", "--store", store.root,
                    "--cutter", template]) == 1
        assert "render-clips" in capsys.readouterr().err

    def test_cutlist_before_analyze_fails(self, workdir, capsys):
        store = synth_and_ingest(workdir)
        assert run(["cutlist", "--store", store.root]) == 1
        assert "cutlist/load" in capsys.readouterr().err
