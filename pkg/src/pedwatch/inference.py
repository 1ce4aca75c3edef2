"""Sessionization of ROI-filtered detection streams and event inference.

The pipeline over one ROI group runs in four stages:

  1. sessionize       group occupied frames into raw sessions; frames at
                      most `stride` apart belong to the same session
  2. merge_sessions   coalesce sessions separated by no-detection gaps of
                      at most min_no_detection_s (transitively)
  3. filter_sessions  drop sessions shorter than min_session_time_s
  4. track association within each surviving session; the number of
                      opened track fragments is the inferred person count p

Dwell groups emit one event per session carrying p. Crossing groups emit
p events per session (one per fragment), optionally gated on the longest
fragment's net displacement along the group's transverse axis.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass
from typing import NamedTuple

from .geometry import anchor_point, bbox_anchor, filter_to_roi
from .model import (
    ActivityEvent,
    Detection,
    DetectionLog,
    RoiGroup,
    Session,
    frame_to_time,
    hour_bucket,
    midpoint_time,
)

Bbox = tuple[float, float, float, float]


class Span(NamedTuple):
    """A session's frame interval, inclusive on both ends."""

    f_b: int
    f_e: int


@dataclass(frozen=True)
class SessionParams:
    """Thresholds and tracking knobs for one pipeline run."""

    min_session_time_s: float
    min_no_detection_s: float
    fps: float
    stride: int = 1
    iou_min: float = 0.3
    track_gap_s: float = 2.0

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if not 0.0 < self.iou_min <= 1.0:
            raise ValueError(f"iou_min must be in (0, 1], got {self.iou_min}")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.track_gap_s < 0:
            raise ValueError("track_gap_s must be non-negative")

    @classmethod
    def for_group(
        cls,
        group: RoiGroup,
        fps: float,
        stride: int = 1,
        iou_min: float = 0.3,
        track_gap_s: float = 2.0,
    ) -> "SessionParams":
        return cls(
            min_session_time_s=group.min_session_time_s,
            min_no_detection_s=group.min_no_detection_s,
            fps=fps,
            stride=stride,
            iou_min=iou_min,
            track_gap_s=track_gap_s,
        )


@dataclass(frozen=True)
class TrackFragment:
    """A chain of IoU-associated detections of (presumably) one person."""

    first_frame: int
    last_frame: int
    boxes: tuple[tuple[int, Bbox], ...]  # (frame, bbox) history

    def __len__(self) -> int:
        return len(self.boxes)

    def net_displacement(self, axis: tuple[float, float]) -> float:
        """Magnitude of the anchor displacement projected on a unit axis."""
        (x0, y0) = bbox_anchor(self.boxes[0][1])
        (x1, y1) = bbox_anchor(self.boxes[-1][1])
        return abs((x1 - x0) * axis[0] + (y1 - y0) * axis[1])

    def midpoint_anchor(self) -> tuple[float, float]:
        return bbox_anchor(self.boxes[len(self.boxes) // 2][1])


def sessionize(d_roi: DetectionLog, params: SessionParams) -> list[Span]:
    """Merge consecutive detections into raw sessions (stage S_D).

    Occupied frames at most `stride` apart continue the same session;
    a larger gap starts a new one.
    """
    spans: list[Span] = []
    start = prev = None
    for det in d_roi.detections:
        f = det.frame
        if start is None:
            start = prev = f
        elif f == prev:
            continue
        elif f - prev <= params.stride:
            prev = f
        else:
            spans.append(Span(start, prev))
            start = prev = f
    if start is not None:
        spans.append(Span(start, prev))
    return spans


def merge_sessions(s_d: list[Span], params: SessionParams) -> list[Span]:
    """Coalesce sessions whose inter-session gap is within min_no_detection_s (stage S_M).

    Merging is transitive: a chain of short gaps collapses into one
    spanning session. Every residual gap strictly exceeds the threshold.
    """
    merged: list[Span] = []
    for span in s_d:
        if merged and (span.f_b - merged[-1].f_e) / params.fps <= params.min_no_detection_s:
            merged[-1] = Span(merged[-1].f_b, span.f_e)
        else:
            merged.append(span)
    return merged


def filter_sessions(s_m: list[Span], params: SessionParams) -> list[Span]:
    """Keep sessions lasting at least min_session_time_s (stage S_F, boundary inclusive)."""
    return [
        s for s in s_m
        if (s.f_e - s.f_b) / params.fps >= params.min_session_time_s
    ]


def run_pipeline(d_roi: DetectionLog, params: SessionParams) -> tuple[list[Span], list[Span], list[Span]]:
    """All three sessionization stages; returns (S_D, S_M, S_F)."""
    s_d = sessionize(d_roi, params)
    s_m = merge_sessions(s_d, params)
    s_f = filter_sessions(s_m, params)
    return s_d, s_m, s_f


def iou(a: Bbox, b: Bbox) -> float:
    ix1 = max(a[0], b[0])
    iy1 = max(a[1], b[1])
    ix2 = min(a[2], b[2])
    iy2 = min(a[3], b[3])
    iw = max(0.0, ix2 - ix1)
    ih = max(0.0, iy2 - iy1)
    inter = iw * ih
    if inter == 0.0:
        return 0.0
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


class _OpenTrack:
    __slots__ = ("boxes", "last_frame")

    def __init__(self, frame: int, bbox: Bbox):
        self.boxes: list[tuple[int, Bbox]] = [(frame, bbox)]
        self.last_frame = frame

    def extend(self, frame: int, bbox: Bbox) -> None:
        self.boxes.append((frame, bbox))
        self.last_frame = frame


def associate_tracks(
    span: Span, d_roi: DetectionLog, params: SessionParams
) -> list[TrackFragment]:
    """Greedy frame-order IoU association of the detections inside a session.

    Each detection extends the active fragment of highest IoU at or above
    iou_min, at most one detection per fragment per frame; otherwise it
    opens a new fragment. Fragments expire once unmatched for longer than
    track_gap_s. The returned list covers every fragment ever opened,
    ordered by opening time.
    """
    by_frame: dict[int, list[Detection]] = {}
    for det in d_roi.detections:
        if span.f_b <= det.frame <= span.f_e:
            by_frame.setdefault(det.frame, []).append(det)

    opened: list[_OpenTrack] = []
    active: list[_OpenTrack] = []
    for frame in sorted(by_frame):
        active = [
            t for t in active
            if (frame - t.last_frame) / params.fps <= params.track_gap_s
        ]
        for det in by_frame[frame]:
            best_track = None
            best_iou = 0.0
            for track in active:
                if track.last_frame == frame:
                    continue  # one detection per track per frame
                score = iou(det.bbox, track.boxes[-1][1])
                if score >= params.iou_min and score > best_iou:
                    best_iou = score
                    best_track = track
            if best_track is not None:
                best_track.extend(frame, det.bbox)
            else:
                track = _OpenTrack(frame, det.bbox)
                active.append(track)
                opened.append(track)
    return [
        TrackFragment(
            first_frame=t.boxes[0][0],
            last_frame=t.last_frame,
            boxes=tuple(t.boxes),
        )
        for t in opened
    ]


def count_unique_persons(span: Span, d_roi: DetectionLog, params: SessionParams) -> int:
    """Inferred unique-person count p: the number of track fragments opened."""
    return len(associate_tracks(span, d_roi, params))


_UNSAFE = re.compile(r"[^A-Za-z0-9_-]+")


def _safe(text: str) -> str:
    return _UNSAFE.sub("-", text)


def _event_id_base(meta, group: RoiGroup) -> str:
    """Globally unique prefix: recording start disambiguates same-camera videos."""
    stamp = meta.start_ts.strftime("%Y%m%dT%H%M%S")
    return f"{_safe(meta.camera_id)}_{stamp}_{_safe(group.name)}"


def _build_session(
    span: Span, d_roi: DetectionLog, group: RoiGroup, p: int
) -> Session:
    meta = d_roi.meta
    count = sum(1 for d in d_roi.detections if span.f_b <= d.frame <= span.f_e)
    return Session(
        roi_group=group.name,
        f_b=span.f_b,
        f_e=span.f_e,
        p=p,
        detection_count=count,
        t_b=frame_to_time(span.f_b, meta),
        t_e=frame_to_time(span.f_e, meta),
    )


def _session_anchor(span: Span, d_roi: DetectionLog) -> tuple[float, float]:
    """Anchor of the detection nearest the session's midpoint frame."""
    mid = (span.f_b + span.f_e) / 2.0
    best = min(
        (d for d in d_roi.detections if span.f_b <= d.frame <= span.f_e),
        key=lambda d: abs(d.frame - mid),
    )
    return anchor_point(best)


def infer_dwell_sessions(
    log: DetectionLog,
    group: RoiGroup,
    params: SessionParams | None = None,
    tz: dt.tzinfo | None = None,
) -> list[ActivityEvent]:
    """Full dwell pipeline over a stop ROI: one event per final session, weighted by p."""
    if group.kind != "dwell":
        raise ValueError(f"group {group.name!r} is not a dwell group")
    if params is None:
        params = SessionParams.for_group(group, log.meta.fps)
    d_roi = filter_to_roi(log, group)
    _, _, s_f = run_pipeline(d_roi, params)
    events: list[ActivityEvent] = []
    meta = log.meta
    for span in s_f:
        p = count_unique_persons(span, d_roi, params)
        session = _build_session(span, d_roi, group, p)
        date, hour = hour_bucket(midpoint_time(span.f_b, span.f_e, meta), tz)
        event_id = f"{_event_id_base(meta, group)}_dwell_{span.f_b:07d}_{span.f_e:07d}"
        events.append(
            ActivityEvent(
                event_id=event_id,
                kind="dwell",
                session=session,
                date=date,
                hour=hour,
                position=_session_anchor(span, d_roi),
                count=p,
                camera_id=meta.camera_id,
            )
        )
    return events


def infer_crossings(
    log: DetectionLog,
    group: RoiGroup,
    params: SessionParams | None = None,
    min_disp_px: float = 0.0,
    tz: dt.tzinfo | None = None,
) -> list[ActivityEvent]:
    """Crossing pipeline over a road ROI: p events per final session.

    With min_disp_px > 0 a session emits events only if its longest
    fragment moved at least that far along the group's transverse axis;
    at 0 the displacement gate is disabled.
    """
    if group.kind != "crossing":
        raise ValueError(f"group {group.name!r} is not a crossing group")
    if params is None:
        params = SessionParams.for_group(group, log.meta.fps)
    d_roi = filter_to_roi(log, group)
    _, _, s_f = run_pipeline(d_roi, params)
    events: list[ActivityEvent] = []
    meta = log.meta
    for span in s_f:
        fragments = associate_tracks(span, d_roi, params)
        if min_disp_px > 0.0:
            longest = max(fragments, key=len)
            if longest.net_displacement(group.transverse_axis) < min_disp_px:
                continue
        session = _build_session(span, d_roi, group, len(fragments))
        date, hour = hour_bucket(midpoint_time(span.f_b, span.f_e, meta), tz)
        base = f"{_event_id_base(meta, group)}_crossing_{span.f_b:07d}_{span.f_e:07d}"
        for k, fragment in enumerate(fragments):
            events.append(
                ActivityEvent(
                    event_id=f"{base}_{k:02d}",
                    kind="crossing",
                    session=session,
                    date=date,
                    hour=hour,
                    position=fragment.midpoint_anchor(),
                    count=1,
                    camera_id=meta.camera_id,
                )
            )
    return events
