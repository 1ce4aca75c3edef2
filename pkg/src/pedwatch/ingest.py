"""Parsing and serialization of detection logs, metadata, ROI configs, and boardings.

Wire formats:
  detection log   one JSON record per line:
                  {"frame": u, "label": s, "bbox": [x1,y1,x2,y2], "conf": f}
  video metadata  JSON: {"camera_id", "start_ts" (RFC 3339 with offset), "fps",
                  "frame_count", "width", "height", "source_uri"}
  ROI config      JSON: {"camera_id", "groups": [{"name", "kind", "polygons",
                  "min_session_time_s"?, "min_no_detection_s"?, "target_label"?,
                  "transverse_axis"?}]}
  boardings       CSV with header stop_id,date,hour,boardings
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
from typing import IO, Iterable

from .geometry import polygon_convexity_defect
from .model import (
    CROSSING_DEFAULTS,
    DWELL_DEFAULTS,
    BoardingRecord,
    Detection,
    DetectionLog,
    RoiGroup,
    VideoMeta,
)


class ParseError(ValueError):
    """Input rejection with the offending line and field, when known."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"field {field!r}: "
        super().__init__(prefix + message)


def _as_stream(data: bytes | IO[bytes]) -> IO[bytes]:
    if isinstance(data, (bytes, bytearray)):
        return io.BytesIO(data)
    return data


def parse_timestamp(raw: str) -> dt.datetime:
    """RFC 3339 timestamp with offset ('Z' accepted)."""
    text = raw.replace("Z", "+00:00") if raw.endswith("Z") else raw
    ts = dt.datetime.fromisoformat(text)
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {raw!r} has no UTC offset")
    return ts


def parse_detection_log(
    data: bytes | IO[bytes],
    meta: VideoMeta,
    min_confidence: float | None = None,
) -> DetectionLog:
    """Stream-parse a line-delimited detection log, validating as lines arrive.

    Input already sorted by frame is kept as-is; unsorted input is sorted
    stably. min_confidence optionally drops records below the cutoff
    (default keeps everything).
    """
    detections: list[Detection] = []
    sorted_so_far = True
    last_frame = -1
    for lineno, raw in enumerate(_as_stream(data), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"malformed record: {e.msg}", line=lineno) from e
        if not isinstance(rec, dict):
            raise ParseError("record is not an object", line=lineno)
        det = _detection_from_record(rec, lineno, meta)
        if min_confidence is not None and det.confidence < min_confidence:
            continue
        if det.frame < last_frame:
            sorted_so_far = False
        last_frame = det.frame
        detections.append(det)
    if not sorted_so_far:
        detections.sort(key=lambda d: d.frame)  # stable: in-frame source order kept
    return DetectionLog(meta=meta, detections=tuple(detections))


def _detection_from_record(rec: dict, lineno: int, meta: VideoMeta) -> Detection:
    for key in ("frame", "label", "bbox", "conf"):
        if key not in rec:
            raise ParseError("missing", line=lineno, field=key)
    frame = rec["frame"]
    if not isinstance(frame, int) or isinstance(frame, bool) or frame < 0:
        raise ParseError(f"expected non-negative integer, got {frame!r}",
                         line=lineno, field="frame")
    bbox = rec["bbox"]
    if (
        not isinstance(bbox, list)
        or len(bbox) != 4
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox)
    ):
        raise ParseError(f"expected [x1,y1,x2,y2], got {bbox!r}",
                         line=lineno, field="bbox")
    try:
        det = Detection(
            frame=frame,
            label=rec["label"],
            bbox=tuple(float(v) for v in bbox),
            confidence=float(rec["conf"]),
        )
    except (TypeError, ValueError) as e:
        field = _failed_detection_field(rec)
        raise ParseError(str(e), line=lineno, field=field) from e
    if det.frame >= meta.frame_count:
        raise ParseError(
            f"frame {det.frame} >= frame_count {meta.frame_count}",
            line=lineno, field="frame",
        )
    if not meta.contains(det):
        raise ParseError(
            f"bbox {list(det.bbox)} outside {meta.width}x{meta.height} frame",
            line=lineno, field="bbox",
        )
    return det


def _failed_detection_field(rec: dict) -> str:
    from .model import RECOGNIZED_LABELS

    if rec["label"] not in RECOGNIZED_LABELS:
        return "label"
    x1, y1, x2, y2 = rec["bbox"]
    if not (x1 < x2 and y1 < y2):
        return "bbox"
    return "conf"


def serialize_detection_log(log: DetectionLog) -> bytes:
    out = io.BytesIO()
    for d in log.detections:
        rec = {
            "frame": d.frame,
            "label": d.label,
            "bbox": list(d.bbox),
            "conf": d.confidence,
        }
        out.write(json.dumps(rec, separators=(",", ":")).encode())
        out.write(b"\n")
    return out.getvalue()


def parse_video_meta(data: bytes | str) -> VideoMeta:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed metadata document: {e.msg}") from e
    for key in ("camera_id", "start_ts", "fps", "frame_count",
                "width", "height", "source_uri"):
        if key not in doc:
            raise ParseError("missing", field=key)
    try:
        start_ts = parse_timestamp(doc["start_ts"])
    except ValueError as e:
        raise ParseError(str(e), field="start_ts") from e
    try:
        return VideoMeta(
            camera_id=str(doc["camera_id"]),
            start_ts=start_ts,
            fps=float(doc["fps"]),
            frame_count=int(doc["frame_count"]),
            width=int(doc["width"]),
            height=int(doc["height"]),
            source_uri=str(doc["source_uri"]),
        )
    except (TypeError, ValueError) as e:
        raise ParseError(str(e)) from e


def serialize_video_meta(meta: VideoMeta) -> bytes:
    doc = {
        "camera_id": meta.camera_id,
        "start_ts": meta.start_ts.isoformat(),
        "fps": meta.fps,
        "frame_count": meta.frame_count,
        "width": meta.width,
        "height": meta.height,
        "source_uri": meta.source_uri,
    }
    return json.dumps(doc, indent=2, sort_keys=True).encode()


def parse_roi_config(data: bytes | str) -> list[RoiGroup]:
    """Parse and validate an ROI configuration document.

    Every polygon is checked convex (cross-product sign test); thresholds
    absent from a group default by kind (dwell 15 s / 5 s, crossing 1 s / 2 s).
    """
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed ROI config: {e.msg}") from e
    if "groups" not in doc:
        raise ParseError("missing", field="groups")
    groups: list[RoiGroup] = []
    seen: set[str] = set()
    for g in doc["groups"]:
        name = g.get("name")
        if not name or not isinstance(name, str):
            raise ParseError("group without a name", field="name")
        if name in seen:
            raise ParseError(f"duplicate group name {name!r}", field="name")
        seen.add(name)
        kind = g.get("kind")
        if kind not in ("dwell", "crossing"):
            raise ParseError(
                f"group {name!r}: kind must be dwell or crossing, got {kind!r}",
                field="kind",
            )
        polygons = g.get("polygons")
        if not polygons:
            raise ParseError(f"group {name!r} has no polygons", field="polygons")
        checked = []
        for pi, poly in enumerate(polygons):
            if len(poly) < 3:
                raise ParseError(
                    f"group {name!r} polygon {pi} has {len(poly)} vertices, need >= 3",
                    field="polygons",
                )
            vertices = tuple((float(x), float(y)) for x, y in poly)
            defect = polygon_convexity_defect(vertices)
            if defect is not None:
                raise ParseError(
                    f"group {name!r} polygon {pi} is not convex at vertex {defect}",
                    field="polygons",
                )
            checked.append(vertices)
        default_session, default_gap = (
            DWELL_DEFAULTS if kind == "dwell" else CROSSING_DEFAULTS
        )
        axis = g.get("transverse_axis", [1.0, 0.0])
        try:
            group = RoiGroup(
                name=name,
                kind=kind,
                polygons=tuple(checked),
                min_session_time_s=float(g.get("min_session_time_s", default_session)),
                min_no_detection_s=float(g.get("min_no_detection_s", default_gap)),
                target_label=g.get("target_label", "person"),
                transverse_axis=(float(axis[0]), float(axis[1])),
            )
        except (TypeError, ValueError) as e:
            raise ParseError(f"group {name!r}: {e}") from e
        groups.append(group)
    return groups


def serialize_roi_config(groups: Iterable[RoiGroup], camera_id: str = "") -> bytes:
    doc = {
        "camera_id": camera_id,
        "groups": [
            {
                "name": g.name,
                "kind": g.kind,
                "polygons": [[[x, y] for x, y in poly] for poly in g.polygons],
                "min_session_time_s": g.min_session_time_s,
                "min_no_detection_s": g.min_no_detection_s,
                "target_label": g.target_label,
                "transverse_axis": list(g.transverse_axis),
            }
            for g in groups
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True).encode()


def parse_boardings(data: bytes | IO[bytes]) -> list[BoardingRecord]:
    """Parse operator boarding records, rejecting duplicate (stop_id, date, hour) keys."""
    stream = io.TextIOWrapper(_as_stream(data), encoding="utf-8")
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        return []
    expected = ["stop_id", "date", "hour", "boardings"]
    if [h.strip() for h in header] != expected:
        raise ParseError(f"expected header {','.join(expected)}, got {','.join(header)}",
                         line=1)
    records: list[BoardingRecord] = []
    seen: dict[tuple[str, dt.date, int], int] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 columns, got {len(row)}", line=lineno)
        stop_id = row[0].strip()
        try:
            date = dt.date.fromisoformat(row[1].strip())
        except ValueError as e:
            raise ParseError(str(e), line=lineno, field="date") from e
        try:
            hour = int(row[2])
            boardings = int(row[3])
        except ValueError as e:
            raise ParseError(str(e), line=lineno, field="hour/boardings") from e
        try:
            rec = BoardingRecord(stop_id=stop_id, date=date, hour=hour,
                                 boardings=boardings)
        except ValueError as e:
            raise ParseError(str(e), line=lineno) from e
        key = (stop_id, date, hour)
        if key in seen:
            raise ParseError(
                f"duplicate key ({stop_id}, {date}, {hour}) also on line {seen[key]}",
                line=lineno,
            )
        seen[key] = lineno
        records.append(rec)
    return records


def serialize_boardings(records: Iterable[BoardingRecord]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["stop_id", "date", "hour", "boardings"])
    for r in records:
        writer.writerow([r.stop_id, r.date.isoformat(), r.hour, r.boardings])
    return out.getvalue().encode()
