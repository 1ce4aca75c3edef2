"""On-disk store layout and report document builders.

A store is one directory per deployment:

    roi.json                 ROI configuration
    boardings.csv            operator boarding records (optional)
    videos/<key>.meta.json   per-recording metadata
    videos/<key>.detections.jsonl
    events.jsonl             analysis snapshot, one event per line
    run_config.json          resolved parameters of the last analyze
    reports/summary.json     per-group matrix + per-hour box stats
    reports/accuracy.json    MAE vs. boardings (when present)
    reports/correlation.json correlation table
    reports/correlation.csv  same table, hour columns, r to 2 decimals
    cutlist.json             clip manifest per recording
    clips/                   rendered clip files
    annotations.jsonl        append-only review verdicts

Everything is plain JSON/CSV; nothing embeds wall-clock write times, so
re-running a stage over unchanged inputs rewrites identical bytes.
"""

from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .analytics import (
    CorrelationTable,
    FilterResult,
    Window,
    box_stats,
    correlation_table,
    hour_series,
    hourly_counts,
    mae,
    outlier_filter,
    sum_series,
)
from .clips import Manifest
from .ingest import (
    ParseError,
    parse_boardings,
    parse_detection_log,
    parse_roi_config,
    parse_timestamp,
    parse_video_meta,
    serialize_boardings,
    serialize_detection_log,
    serialize_roi_config,
    serialize_video_meta,
)
from .model import (
    ActivityEvent,
    BoardingRecord,
    ClipRef,
    DetectionLog,
    RoiGroup,
    Session,
    VideoMeta,
)


class StoreError(Exception):
    """A store is missing a required artifact or holds a malformed one."""


_OFFSET = re.compile(r"([+-])(\d{2}):?(\d{2})$")


def parse_tz(text: str | None) -> dt.tzinfo | None:
    """Timezone from config text: None/local, UTC, +-HH:MM, or an IANA name."""
    if text is None or text in ("", "local"):
        return None
    if text.upper() in ("UTC", "Z"):
        return dt.timezone.utc
    m = _OFFSET.match(text)
    if m:
        sign = 1 if m.group(1) == "+" else -1
        delta = dt.timedelta(hours=int(m.group(2)), minutes=int(m.group(3)))
        return dt.timezone(sign * delta)
    from zoneinfo import ZoneInfo

    return ZoneInfo(text)


def dumps_document(doc) -> bytes:
    """The one serialization for report documents and API bodies."""
    return json.dumps(doc, indent=2, sort_keys=True).encode() + b"\n"


_UNSAFE = re.compile(r"[^A-Za-z0-9_-]+")


def video_key(meta: VideoMeta) -> str:
    stamp = meta.start_ts.strftime("%Y%m%dT%H%M%S")
    return f"{_UNSAFE.sub('-', meta.camera_id)}_{stamp}"


@dataclass(frozen=True)
class Store:
    root: Path

    @property
    def roi_path(self) -> Path:
        return self.root / "roi.json"

    @property
    def boardings_path(self) -> Path:
        return self.root / "boardings.csv"

    @property
    def videos_dir(self) -> Path:
        return self.root / "videos"

    @property
    def events_path(self) -> Path:
        return self.root / "events.jsonl"

    @property
    def run_config_path(self) -> Path:
        return self.root / "run_config.json"

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"

    @property
    def cutlist_path(self) -> Path:
        return self.root / "cutlist.json"

    @property
    def clips_dir(self) -> Path:
        return self.root / "clips"

    @property
    def annotations_path(self) -> Path:
        return self.root / "annotations.jsonl"

    def initialize(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.videos_dir.mkdir(exist_ok=True)
        self.reports_dir.mkdir(exist_ok=True)
        self.clips_dir.mkdir(exist_ok=True)

    # -- inputs ---------------------------------------------------------

    def save_roi(self, groups: Iterable[RoiGroup], camera_id: str = "") -> None:
        self.roi_path.write_bytes(serialize_roi_config(groups, camera_id))

    def load_roi(self) -> list[RoiGroup]:
        if not self.roi_path.exists():
            raise StoreError(f"no ROI config at {self.roi_path}")
        return parse_roi_config(self.roi_path.read_bytes())

    def save_boardings(self, records: Iterable[BoardingRecord]) -> None:
        self.boardings_path.write_bytes(serialize_boardings(records))

    def load_boardings(self) -> list[BoardingRecord]:
        if not self.boardings_path.exists():
            return []
        return parse_boardings(self.boardings_path.read_bytes())

    def add_video(self, log: DetectionLog) -> str:
        key = video_key(log.meta)
        (self.videos_dir / f"{key}.meta.json").write_bytes(
            serialize_video_meta(log.meta)
        )
        (self.videos_dir / f"{key}.detections.jsonl").write_bytes(
            serialize_detection_log(log)
        )
        return key

    def video_keys(self) -> list[str]:
        return sorted(
            p.name.removesuffix(".meta.json")
            for p in self.videos_dir.glob("*.meta.json")
        )

    def load_meta(self, key: str) -> VideoMeta:
        path = self.videos_dir / f"{key}.meta.json"
        if not path.exists():
            raise StoreError(f"no video {key!r} in store")
        return parse_video_meta(path.read_bytes())

    def load_log(self, key: str) -> DetectionLog:
        meta = self.load_meta(key)
        with open(self.videos_dir / f"{key}.detections.jsonl", "rb") as f:
            return parse_detection_log(f, meta)

    def load_all_logs(self) -> list[DetectionLog]:
        return [self.load_log(k) for k in self.video_keys()]

    # -- analysis snapshot ----------------------------------------------

    def write_events(self, events: Iterable[ActivityEvent]) -> None:
        with open(self.events_path, "wb") as f:
            for ev in events:
                f.write(json.dumps(event_to_record(ev), sort_keys=True,
                                   separators=(",", ":")).encode())
                f.write(b"\n")

    def load_events(self) -> list[ActivityEvent]:
        if not self.events_path.exists():
            raise StoreError(f"no analysis snapshot at {self.events_path}; run analyze")
        events = []
        with open(self.events_path, "rb") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    events.append(event_from_record(json.loads(line)))
                except (KeyError, TypeError, ValueError) as e:
                    raise StoreError(
                        f"{self.events_path} line {lineno}: {e}"
                    ) from e
        return events

    def write_run_config(self, config: dict) -> None:
        self.run_config_path.write_bytes(dumps_document(config))

    def load_run_config(self) -> dict:
        if not self.run_config_path.exists():
            raise StoreError(f"no run config at {self.run_config_path}")
        return json.loads(self.run_config_path.read_bytes())

    def write_report(self, name: str, doc: dict) -> Path:
        path = self.reports_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        if name.endswith(".json"):
            path.write_bytes(dumps_document(doc))
        else:
            path.write_text(doc)
        return path

    def load_report(self, name: str) -> dict:
        path = self.reports_dir / name
        if not path.exists():
            raise StoreError(f"no report {name!r}; run analyze/correlate first")
        return json.loads(path.read_bytes())

    def write_cutlist(self, manifests: dict[str, Manifest]) -> None:
        doc = {
            "videos": {
                key: manifest_document(m) for key, m in sorted(manifests.items())
            }
        }
        self.cutlist_path.write_bytes(dumps_document(doc))

    def load_cutlist(self) -> dict:
        if not self.cutlist_path.exists():
            raise StoreError(f"no cut-list at {self.cutlist_path}; run cutlist")
        return json.loads(self.cutlist_path.read_bytes())

    def clip_file(self, event_id: str, extension: str = ".mp4") -> Path | None:
        """Rendered clip for an event, or None while unrendered."""
        try:
            doc = self.load_cutlist()
        except StoreError:
            return None
        for video in doc["videos"].values():
            for clip in video["clips"]:
                if event_id in clip["event_ids"]:
                    path = self.clips_dir / f"{clip['output_name']}{extension}"
                    return path if path.exists() else None
        return None


# -- event records ------------------------------------------------------


def event_to_record(ev: ActivityEvent) -> dict:
    rec = {
        "event_id": ev.event_id,
        "kind": ev.kind,
        "camera_id": ev.camera_id,
        "roi_group": ev.session.roi_group,
        "date": ev.date.isoformat(),
        "hour": ev.hour,
        "f_b": ev.session.f_b,
        "f_e": ev.session.f_e,
        "p": ev.session.p,
        "detection_count": ev.session.detection_count,
        "t_b": ev.session.t_b.isoformat(),
        "t_e": ev.session.t_e.isoformat(),
        "position": [ev.position[0], ev.position[1]],
        "count": ev.count,
        "clip": clip_to_record(ev.clip) if ev.clip else None,
    }
    return rec


def event_from_record(rec: dict) -> ActivityEvent:
    session = Session(
        roi_group=rec["roi_group"],
        f_b=rec["f_b"],
        f_e=rec["f_e"],
        p=rec["p"],
        detection_count=rec["detection_count"],
        t_b=parse_timestamp(rec["t_b"]),
        t_e=parse_timestamp(rec["t_e"]),
    )
    return ActivityEvent(
        event_id=rec["event_id"],
        kind=rec["kind"],
        session=session,
        date=dt.date.fromisoformat(rec["date"]),
        hour=rec["hour"],
        position=(rec["position"][0], rec["position"][1]),
        count=rec["count"],
        clip=clip_from_record(rec["clip"]) if rec.get("clip") else None,
        camera_id=rec["camera_id"],
    )


def clip_to_record(clip: ClipRef) -> dict:
    return {
        "event_id": clip.event_id,
        "source_uri": clip.source_uri,
        "start_frame": clip.start_frame,
        "end_frame": clip.end_frame,
        "start_ts": clip.start_ts.isoformat(),
        "end_ts": clip.end_ts.isoformat(),
        "output_name": clip.output_name,
    }


def clip_from_record(rec: dict) -> ClipRef:
    return ClipRef(
        event_id=rec["event_id"],
        source_uri=rec["source_uri"],
        start_frame=rec["start_frame"],
        end_frame=rec["end_frame"],
        start_ts=parse_timestamp(rec["start_ts"]),
        end_ts=parse_timestamp(rec["end_ts"]),
        output_name=rec["output_name"],
    )


def manifest_document(manifest: Manifest) -> dict:
    clips: dict[str, dict] = {}
    for event_id, clip in manifest.entries:
        entry = clips.setdefault(
            clip.output_name, {**clip_to_record(clip), "event_ids": []}
        )
        entry["event_ids"].append(event_id)
    for entry in clips.values():
        entry["event_ids"].sort()
        del entry["event_id"]  # superseded by event_ids
    return {
        "video": json.loads(serialize_video_meta(manifest.meta)),
        "clips": [clips[name] for name in sorted(clips)],
    }


# -- report documents ---------------------------------------------------


def window_for(
    events: list[ActivityEvent],
    metas: list[VideoMeta],
    tz: dt.tzinfo | None = None,
    date_from: dt.date | None = None,
    date_to: dt.date | None = None,
) -> Window:
    """Recording window restricted to an inclusive [from, to] date range."""
    window = Window.from_metas(metas, tz)
    dates = tuple(
        d for d in window.dates
        if (date_from is None or d >= date_from) and (date_to is None or d <= date_to)
    )
    return Window(dates=dates, hours=window.hours)


def events_in(
    events: list[ActivityEvent], group: str, window: Window
) -> list[ActivityEvent]:
    picked = [
        ev for ev in events
        if ev.session.roi_group == group and (ev.date, ev.hour) in window
    ]
    return sorted(picked, key=lambda e: (e.date, e.hour, e.session.f_b, e.event_id))


def box_document(stats) -> dict:
    return {
        "min": stats.min,
        "q1": stats.q1,
        "median": stats.median,
        "q3": stats.q3,
        "max": stats.max,
        "mean": stats.mean,
        "outliers": list(stats.outliers),
    }


def summary_document(
    events: list[ActivityEvent], group: RoiGroup, window: Window
) -> dict:
    """Matrix plus per-hour box statistics for one group over a window."""
    in_window = events_in(events, group.name, window)
    matrix = hourly_counts(in_window, window)
    box = (
        {
            str(hour): box_document(box_stats(list(matrix.hour_values(hour))))
            for hour in matrix.hours
        }
        if matrix.dates
        else {}
    )
    return {
        "box": box,
        "group": group.name,
        "kind": group.kind,
        "window": {
            "dates": [d.isoformat() for d in window.dates],
            "hours": list(window.hours),
        },
        "matrix": {
            "dates": [d.isoformat() for d in matrix.dates],
            "hours": list(matrix.hours),
            "counts": [list(row) for row in matrix.counts],
        },
        "daily_totals": {
            d.isoformat(): total for d, total in matrix.daily_totals().items()
        },
        "total": matrix.total(),
        "events": len(in_window),
    }


def correlation_series(
    events: list[ActivityEvent],
    groups: list[RoiGroup],
    window: Window,
    apply_outlier_filter: bool = False,
) -> tuple[dict, dict, FilterResult | None]:
    """Per-hour series for the crossing group and each dwell group.

    Returns (cro_series, named_series, filter_result). The crossing series
    joins every crossing-kind group; each dwell group contributes a row
    labelled #<NAME>, plus #BOTH (their elementwise sum) when there are
    at least two dwell groups.
    """
    crossing_events = [
        ev for g in groups if g.kind == "crossing"
        for ev in events_in(events, g.name, window)
    ]
    cro = hour_series(hourly_counts(crossing_events, window))
    result: FilterResult | None = None
    if apply_outlier_filter:
        result = outlier_filter(cro)
        cro = result.series
    named: dict[str, dict] = {}
    dwell_groups = [g for g in groups if g.kind == "dwell"]
    for g in dwell_groups:
        named[f"#{g.name.upper()}"] = hour_series(
            hourly_counts(events_in(events, g.name, window), window)
        )
    if len(dwell_groups) >= 2:
        labels = sorted(named)
        both = named[labels[0]]
        for label in labels[1:]:
            both = {
                h: sum_series(both[h], named[label][h])
                for h in both
                if h in named[label]
            }
        named["#BOTH"] = both
    return cro, named, result


def correlation_document(table: CorrelationTable) -> dict:
    return {
        "hours": list(table.hours),
        "rows": {
            label: {
                str(hour): {
                    "r": cell.r,
                    "classification": cell.classification,
                    "reason": cell.reason,
                }
                for hour, cell in row.items()
            }
            for label, row in table.rows.items()
        },
    }


def correlation_csv(table: CorrelationTable) -> str:
    """Hour columns, one series row each, r to 2 decimals, blank when undefined."""
    lines = ["series," + ",".join(f"{h:02d}:00" for h in table.hours)]
    for label in sorted(table.rows):
        cells = [
            "" if table.rows[label][h].r is None else f"{table.rows[label][h].r:.2f}"
            for h in table.hours
        ]
        lines.append(label + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


def accuracy_document(report) -> dict:
    return {
        "mae": report.mae,
        "joined_pairs": report.joined_pairs,
        "unmatched_estimates": report.unmatched_estimates,
        "unmatched_reference": report.unmatched_reference,
        "residuals": [
            {
                "date": r.date.isoformat(),
                "hour": r.hour,
                "estimate": r.estimate,
                "reference": r.reference,
            }
            for r in report.residuals
        ],
    }


def build_correlation(
    events: list[ActivityEvent],
    groups: list[RoiGroup],
    window: Window,
    apply_outlier_filter: bool = False,
) -> CorrelationTable:
    cro, named, _ = correlation_series(
        events, groups, window, apply_outlier_filter=apply_outlier_filter
    )
    return correlation_table(cro, named)


def build_accuracy(
    events: list[ActivityEvent],
    groups: list[RoiGroup],
    window: Window,
    boardings: list[BoardingRecord],
) -> dict:
    """Per-dwell-group MAE against the matching stop's boarding records."""
    reports: dict[str, dict] = {}
    by_stop: dict[str, list[BoardingRecord]] = {}
    for rec in boardings:
        by_stop.setdefault(rec.stop_id, []).append(rec)
    for g in groups:
        if g.kind != "dwell":
            continue
        reference = by_stop.get(g.name)
        if not reference:
            continue
        estimates = hour_series(
            hourly_counts(events_in(events, g.name, window), window)
        )
        try:
            reports[g.name] = accuracy_document(mae(estimates, reference))
        except ValueError as e:
            reports[g.name] = {"error": str(e)}
    return {"groups": reports}
