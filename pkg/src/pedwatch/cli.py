"""Command-line entry point: ingest, analyze, correlate, cutlist, render, synth, serve.

One verb per pipeline stage so stages can be scripted and cached
independently. Exit codes: 0 success, 2 usage error, 1 processing error
(the failing stage is named on stderr). Identical inputs and arguments
produce byte-identical store artifacts.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .clips import DEFAULT_PAD_S, cutlist as build_cutlist, render_clips
from .inference import SessionParams, infer_crossings, infer_dwell_sessions
from .ingest import (
    ParseError,
    parse_boardings,
    parse_detection_log,
    parse_roi_config,
    parse_video_meta,
)
from .model import ActivityEvent, RoiGroup
from .store import (
    Store,
    StoreError,
    build_accuracy,
    build_correlation,
    clip_from_record,
    correlation_csv,
    correlation_document,
    parse_tz,
    summary_document,
    window_for,
)
from .synth import generate, parse_scenario, serialize_ground_truth

log = logging.getLogger("pedwatch")


class StageError(Exception):
    """A processing failure attributed to a named pipeline stage."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(message)


def _fail(stage: str, exc: Exception) -> StageError:
    return StageError(stage, str(exc))


# -- subcommands --------------------------------------------------------


def cmd_ingest(args) -> int:
    store = Store(Path(args.store))
    store.initialize()
    try:
        groups = parse_roi_config(Path(args.roi).read_bytes())
    except (OSError, ParseError) as e:
        raise _fail("ingest/roi", e)
    store.save_roi(groups)
    log.info("ingest: %d ROI groups", len(groups))

    if args.boardings:
        try:
            records = parse_boardings(Path(args.boardings).read_bytes())
        except (OSError, ParseError) as e:
            raise _fail("ingest/boardings", e)
        store.save_boardings(records)
        log.info("ingest: %d boarding records", len(records))

    if args.detections:
        if not args.meta:
            raise StageError("ingest", "--detections requires --meta")
        try:
            meta = parse_video_meta(Path(args.meta).read_bytes())
            with open(args.detections, "rb") as f:
                video = parse_detection_log(f, meta, args.min_confidence)
        except (OSError, ParseError) as e:
            raise _fail("ingest/detections", e)
        key = store.add_video(video)
        log.info("ingest: video %s with %d detections", key, len(video.detections))
    return 0


def _group_params(group: RoiGroup, fps: float, args) -> SessionParams:
    """Threshold precedence: flags > ROI config > kind defaults."""
    return SessionParams(
        min_session_time_s=(
            args.min_session_time_s
            if args.min_session_time_s is not None
            else group.min_session_time_s
        ),
        min_no_detection_s=(
            args.min_no_detection_s
            if args.min_no_detection_s is not None
            else group.min_no_detection_s
        ),
        fps=fps,
        stride=args.stride,
        iou_min=args.iou_min,
        track_gap_s=args.track_gap_s,
    )


def cmd_analyze(args) -> int:
    store = Store(Path(args.store))
    try:
        groups = store.load_roi()
        logs = store.load_all_logs()
    except (StoreError, ParseError) as e:
        raise _fail("analyze/load", e)
    if not logs:
        raise StageError("analyze/load", "store holds no videos; run ingest first")
    tz = parse_tz(args.tz)

    def infer(task) -> list[ActivityEvent]:
        video, group = task
        params = _group_params(group, video.meta.fps, args)
        if group.kind == "dwell":
            return infer_dwell_sessions(video, group, params, tz=tz)
        return infer_crossings(
            video, group, params, min_disp_px=args.min_disp_px, tz=tz
        )

    tasks = [(video, group) for video in logs for group in groups]
    try:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(infer, tasks))
    except ValueError as e:
        raise _fail("analyze/infer", e)
    events = sorted(
        (ev for batch in results for ev in batch),
        key=lambda e: (e.date, e.hour, e.session.f_b, e.event_id),
    )
    store.write_events(events)

    metas = [video.meta for video in logs]
    window = window_for(events, metas, tz)
    try:
        summary = {
            "groups": {g.name: summary_document(events, g, window) for g in groups}
        }
    except ValueError as e:
        raise _fail("analyze/summary", e)
    store.write_report("summary.json", summary)

    boardings = store.load_boardings()
    if boardings:
        store.write_report(
            "accuracy.json", build_accuracy(events, groups, window, boardings)
        )

    store.write_run_config(
        {
            "command": "analyze",
            "tz": args.tz,
            "stride": args.stride,
            "iou_min": args.iou_min,
            "track_gap_s": args.track_gap_s,
            "min_session_time_s": args.min_session_time_s,
            "min_no_detection_s": args.min_no_detection_s,
            "min_disp_px": args.min_disp_px,
            "groups": {
                g.name: {
                    "kind": g.kind,
                    "min_session_time_s": (
                        args.min_session_time_s
                        if args.min_session_time_s is not None
                        else g.min_session_time_s
                    ),
                    "min_no_detection_s": (
                        args.min_no_detection_s
                        if args.min_no_detection_s is not None
                        else g.min_no_detection_s
                    ),
                }
                for g in groups
            },
            "videos": store.video_keys(),
        }
    )
    log.info("analyze: %d events across %d videos", len(events), len(logs))
    return 0


def cmd_correlate(args) -> int:
    store = Store(Path(args.store))
    try:
        groups = store.load_roi()
        events = store.load_events()
        metas = [store.load_meta(k) for k in store.video_keys()]
    except (StoreError, ParseError) as e:
        raise _fail("correlate/load", e)
    tz = _run_tz(store)
    window = window_for(events, metas, tz)
    try:
        table = build_correlation(
            events, groups, window, apply_outlier_filter=args.filter_outliers
        )
    except ValueError as e:
        raise _fail("correlate", e)
    store.write_report("correlation.json", correlation_document(table))
    csv_text = correlation_csv(table)
    out = Path(args.out) if args.out else store.reports_dir / "correlation.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(csv_text)
    log.info("correlate: wrote %s", out)
    return 0


def _run_tz(store: Store):
    try:
        return parse_tz(store.load_run_config().get("tz"))
    except StoreError:
        return None


def cmd_cutlist(args) -> int:
    store = Store(Path(args.store))
    try:
        events = store.load_events()
        keys = store.video_keys()
    except StoreError as e:
        raise _fail("cutlist/load", e)
    manifests = {}
    total = 0
    for key in keys:
        meta = store.load_meta(key)
        own = [
            ev for ev in events
            if ev.camera_id == meta.camera_id
            and meta.start_ts <= ev.session.t_b < meta.end_ts
        ]
        if not own:
            continue
        try:
            clips, manifest = build_cutlist(
                own, meta, pad_s=args.pad_s, merge_overlaps=args.merge
            )
        except ValueError as e:
            raise _fail("cutlist", e)
        manifests[key] = manifest
        total += len(clips)
    store.write_cutlist(manifests)
    log.info("cutlist: %d clips across %d videos", total, len(manifests))
    return 0


def cmd_render_clips(args) -> int:
    store = Store(Path(args.store))
    try:
        doc = store.load_cutlist()
    except StoreError as e:
        raise _fail("render-clips/load", e)
    failures = 0
    rendered = 0
    for key, video in sorted(doc["videos"].items()):
        meta = parse_video_meta(json.dumps(video["video"]))
        clips = [
            clip_from_record({**c, "event_id": c["event_ids"][0]})
            for c in video["clips"]
        ]
        try:
            report = render_clips(
                clips, meta, args.cutter, store.clips_dir, extension=args.extension
            )
        except (ValueError, FileNotFoundError) as e:
            raise _fail("render-clips", e)
        failures += sum(o.status == "failed" for o in report.outcomes)
        rendered += sum(o.status == "ok" for o in report.outcomes)
    log.info("render-clips: %d rendered, %d failed", rendered, failures)
    if failures:
        raise StageError("render-clips", f"{failures} clip(s) failed to render")
    return 0


def cmd_synth(args) -> int:
    try:
        scenario = parse_scenario(Path(args.scenario).read_bytes())
    except (OSError, ParseError) as e:
        raise _fail("synth/scenario", e)
    detections, truth = generate(scenario)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    from .ingest import serialize_detection_log, serialize_video_meta

    out.write_bytes(serialize_detection_log(detections))
    out.with_suffix(out.suffix + ".meta.json").write_bytes(
        serialize_video_meta(detections.meta)
    )
    out.with_suffix(out.suffix + ".truth.json").write_bytes(
        serialize_ground_truth(truth)
    )
    log.info(
        "synth: %d detections, truth for %d groups",
        len(detections.detections), len(truth.sessions),
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    from .service.auth import TokenStore

    store = Store(Path(args.store))
    users_path = Path(args.users)
    if not users_path.exists():
        raise StageError("serve", f"no users file at {users_path}")
    host, _, port = args.addr.rpartition(":")
    if not host or not port.isdigit():
        raise StageError("serve", f"--addr must be HOST:PORT, got {args.addr!r}")
    app = create_app(store, users_path, TokenStore(ttl_s=args.token_ttl_s))
    uvicorn.run(app, host=host, port=int(port), log_level="info")
    return 0


# -- parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pedwatch",
        description="Detection-log analytics: dwell sessions, crossings, "
        "statistics, clips, and the review service.",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest", help="validate and store inputs")
    p.add_argument("--store", required=True, help="store directory")
    p.add_argument("--roi", required=True, help="ROI config document")
    p.add_argument("--detections", help="detection log (JSONL)")
    p.add_argument("--meta", help="video metadata sidecar for --detections")
    p.add_argument("--boardings", help="operator boardings CSV")
    p.add_argument("--min-confidence", type=float, default=None,
                   help="drop detections below this confidence at ingest")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="run inference and write reports")
    p.add_argument("--store", required=True, help="store directory")
    p.add_argument("--tz", default=None,
                   help="timezone for hour buckets (offset or IANA name; "
                   "default: each recording's own offset)")
    p.add_argument("--stride", type=int, default=1,
                   help="analyzed-frame step of the detector (default 1)")
    p.add_argument("--iou-min", type=float, default=0.3,
                   help="IoU floor for track association (default 0.3)")
    p.add_argument("--track-gap-s", type=float, default=2.0,
                   help="seconds before an unmatched track expires (default 2)")
    p.add_argument("--min-session-time-s", type=float, default=None,
                   help="override every group's session floor")
    p.add_argument("--min-no-detection-s", type=float, default=None,
                   help="override every group's merge gap")
    p.add_argument("--min-disp-px", type=float, default=0.0,
                   help="crossing displacement gate in pixels (0 disables)")
    p.add_argument("--workers", type=int, default=os.cpu_count(),
                   help="parallel inference workers (default: CPU count)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("correlate", help="write the correlation table")
    p.add_argument("--store", required=True, help="store directory")
    p.add_argument("--out", default=None,
                   help="CSV path (default: <store>/reports/correlation.csv)")
    p.add_argument("--filter-outliers", action="store_true",
                   help="Tukey-filter the crossing series before correlating")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("cutlist", help="build clip boundaries for all events")
    p.add_argument("--store", required=True, help="store directory")
    p.add_argument("--pad-s", type=float, default=DEFAULT_PAD_S,
                   help="context seconds around each event (default 2)")
    p.add_argument("--merge", action="store_true",
                   help="coalesce overlapping or touching clips")
    p.set_defaults(func=cmd_cutlist)

    p = sub.add_parser("render-clips", help="cut clips with an external command")
    p.add_argument("--store", required=True, help="store directory")
    p.add_argument("--cutter", required=True,
                   help="command template with {source} {start_s} "
                   "{duration_s} {output}")
    p.add_argument("--extension", default=".mp4",
                   help="clip file extension (default .mp4)")
    p.set_defaults(func=cmd_render_clips)

    p = sub.add_parser("synth", help="generate a scripted detection stream")
    p.add_argument("--scenario", required=True, help="scenario document")
    p.add_argument("--out", required=True,
                   help="output JSONL; .meta.json and .truth.json written beside")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--store", required=True, help="store directory")
    p.add_argument("--addr", default="127.0.0.1:8750", help="HOST:PORT to bind")
    p.add_argument("--users", required=True, help="credentials file")
    p.add_argument("--token-ttl-s", type=float, default=12 * 3600,
                   help="session token lifetime (default 12 h)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except StageError as e:
        print(f"pedwatch: error in {e.stage}: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
