"""Domain types shared across the pipeline, plus the frame-to-wall-clock mapping."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

RECOGNIZED_LABELS = frozenset(
    {"person", "car", "bus", "truck", "bicycle", "motorcycle", "traffic_light"}
)

# Default thresholds by ROI kind: (min_session_time_s, min_no_detection_s).
DWELL_DEFAULTS = (15.0, 5.0)
CROSSING_DEFAULTS = (1.0, 2.0)


@dataclass(frozen=True)
class Detection:
    """One detected object in one frame, in pixel coordinates."""

    frame: int
    label: str
    bbox: tuple[float, float, float, float]  # x1, y1, x2, y2
    confidence: float

    def __post_init__(self):
        if self.frame < 0:
            raise ValueError(f"frame must be non-negative, got {self.frame}")
        if self.label not in RECOGNIZED_LABELS:
            raise ValueError(f"unrecognized label {self.label!r}")
        x1, y1, x2, y2 = self.bbox
        if not (x1 < x2 and y1 < y2):
            raise ValueError(f"degenerate bbox {self.bbox}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence outside [0, 1]: {self.confidence}")


@dataclass(frozen=True)
class VideoMeta:
    """Recording metadata for one raw video file.

    start_ts must be timezone-aware; all wall-clock derivation in the
    pipeline goes through it and fps.
    """

    camera_id: str
    start_ts: dt.datetime
    fps: float
    frame_count: int
    width: int
    height: int
    source_uri: str

    def __post_init__(self):
        if self.start_ts.tzinfo is None:
            raise ValueError("start_ts must be timezone-aware")
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if self.frame_count < 1:
            raise ValueError(f"frame_count must be >= 1, got {self.frame_count}")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"bad frame dimensions {self.width}x{self.height}")

    @property
    def end_ts(self) -> dt.datetime:
        """Exclusive end of the recording window."""
        return frame_to_time(self.frame_count, self)

    def contains(self, det: Detection) -> bool:
        """Whether a detection is consistent with this video's bounds."""
        x1, y1, x2, y2 = det.bbox
        return (
            det.frame < self.frame_count
            and 0 <= x1
            and x2 <= self.width
            and 0 <= y1
            and y2 <= self.height
        )


@dataclass(frozen=True)
class RoiGroup:
    """A named set of convex polygons analyzed as one region, with its thresholds."""

    name: str
    kind: str  # "dwell" or "crossing"
    polygons: tuple[tuple[tuple[float, float], ...], ...]
    min_session_time_s: float
    min_no_detection_s: float
    target_label: str = "person"
    # Unit vector of the road-transverse axis, used by the crossing
    # displacement gate. Default: image x-axis.
    transverse_axis: tuple[float, float] = (1.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("dwell", "crossing"):
            raise ValueError(f"kind must be dwell or crossing, got {self.kind!r}")
        if self.min_session_time_s < 0 or self.min_no_detection_s < 0:
            raise ValueError("thresholds must be non-negative")
        if self.target_label not in RECOGNIZED_LABELS:
            raise ValueError(f"unrecognized target_label {self.target_label!r}")
        ax, ay = self.transverse_axis
        norm = (ax * ax + ay * ay) ** 0.5
        if norm == 0:
            raise ValueError("transverse_axis must be non-zero")
        if abs(norm - 1.0) > 1e-9:
            object.__setattr__(self, "transverse_axis", (ax / norm, ay / norm))
        for i, poly in enumerate(self.polygons):
            if len(poly) < 3:
                raise ValueError(f"polygon {i} has fewer than 3 vertices")


@dataclass(frozen=True)
class Session:
    """A contiguous activity interval within one ROI group."""

    roi_group: str
    f_b: int  # first frame index
    f_e: int  # last frame index
    p: int  # inferred unique persons
    detection_count: int
    t_b: dt.datetime
    t_e: dt.datetime

    def __post_init__(self):
        if self.f_b > self.f_e:
            raise ValueError(f"f_b {self.f_b} > f_e {self.f_e}")
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.detection_count < 1:
            raise ValueError("detection_count must be >= 1")
        if self.p > self.detection_count:
            raise ValueError(f"p {self.p} exceeds detection_count {self.detection_count}")


@dataclass(frozen=True)
class ClipRef:
    """Frame and timestamp bounds of one extractable clip of the source video."""

    event_id: str
    source_uri: str
    start_frame: int
    end_frame: int
    start_ts: dt.datetime
    end_ts: dt.datetime
    output_name: str

    def __post_init__(self):
        if not 0 <= self.start_frame <= self.end_frame:
            raise ValueError(
                f"bad clip frames [{self.start_frame}, {self.end_frame}]"
            )


@dataclass(frozen=True)
class ActivityEvent:
    """A crossing or dwell occurrence derived from one session.

    count is the person weight the event contributes to hourly totals:
    a dwell event carries its session's p, a crossing event carries 1
    (one event is emitted per inferred person).
    """

    event_id: str
    kind: str  # "crossing" or "dwell"
    session: Session
    date: dt.date
    hour: int
    position: tuple[float, float]
    count: int = 1
    clip: ClipRef | None = None
    camera_id: str = ""

    def __post_init__(self):
        if self.kind not in ("crossing", "dwell"):
            raise ValueError(f"kind must be crossing or dwell, got {self.kind!r}")
        if not 0 <= self.hour <= 23:
            raise ValueError(f"hour outside 0-23: {self.hour}")
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")


@dataclass(frozen=True)
class DetectionLog:
    """A video's metadata plus its frame-sorted detection sequence."""

    meta: VideoMeta
    detections: tuple[Detection, ...]

    def __post_init__(self):
        last = -1
        for d in self.detections:
            if d.frame < last:
                raise ValueError("detections must be sorted by frame")
            last = d.frame
            if not self.meta.contains(d):
                raise ValueError(
                    f"detection at frame {d.frame} outside video bounds"
                )

    def __len__(self) -> int:
        return len(self.detections)


@dataclass(frozen=True)
class BoardingRecord:
    """One operator-reported boarding count for a stop, date, and hour."""

    stop_id: str
    date: dt.date
    hour: int
    boardings: int

    def __post_init__(self):
        if not 0 <= self.hour <= 23:
            raise ValueError(f"hour outside 0-23: {self.hour}")
        if self.boardings < 0:
            raise ValueError(f"boardings must be non-negative, got {self.boardings}")


def frame_to_time(frame: int, meta: VideoMeta) -> dt.datetime:
    """Wall-clock timestamp of a frame index, at millisecond precision."""
    if frame < 0:
        raise ValueError(f"frame must be non-negative, got {frame}")
    millis = round(frame / meta.fps * 1000.0)
    return meta.start_ts + dt.timedelta(milliseconds=millis)


def midpoint_time(f_b: int, f_e: int, meta: VideoMeta) -> dt.datetime:
    """Wall-clock timestamp of the midpoint of a frame span."""
    millis = round((f_b + f_e) / 2.0 / meta.fps * 1000.0)
    return meta.start_ts + dt.timedelta(milliseconds=millis)


def hour_bucket(ts: dt.datetime, tz: dt.tzinfo | None = None) -> tuple[dt.date, int]:
    """Local calendar date and hour of a timestamp.

    Buckets are half-open [h:00, h+1:00). With tz=None the timestamp's own
    offset is used.
    """
    local = ts.astimezone(tz) if tz is not None else ts
    return local.date(), local.hour
