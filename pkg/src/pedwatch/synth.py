"""Scripted scenario generation with known ground truth, plus brute-force oracles.

Scenarios model the behaviors the pipeline must recognize (waiting at a
stop, crossing the road, passing by) and the detector's failure modes
(per-frame dropout, multi-second occlusion bursts, positional jitter).
Everything is deterministic per (scenario, seed).
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import in_group
from .ingest import ParseError, parse_roi_config, parse_video_meta, serialize_video_meta
from .model import Detection, DetectionLog, RoiGroup, VideoMeta, hour_bucket, midpoint_time

Point = tuple[float, float]


@dataclass(frozen=True)
class AgentScript:
    """One scripted person: a behavior plus detector-noise knobs.

    wait anchors at the named ROI group's centroid (plus offset_px);
    cross and pass_by walk their polyline at constant speed. dropout is
    the per-frame probability of starting an occlusion burst of
    dropout_burst_s (a burst of 0 suppresses a single frame).
    """

    behavior: str  # "wait", "cross", or "pass_by"
    start_s: float
    duration_s: float
    roi: str | None = None
    path: tuple[Point, ...] = ()
    offset_px: Point = (0.0, 0.0)
    dropout: float = 0.0
    dropout_burst_s: float = 0.0
    box_size: tuple[float, float] = (30.0, 60.0)
    jitter_px: float = 0.0

    def __post_init__(self):
        if self.behavior not in ("wait", "cross", "pass_by"):
            raise ValueError(f"unknown behavior {self.behavior!r}")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")
        if not 0.0 <= self.dropout <= 1.0:
            raise ValueError("dropout must be in [0, 1]")
        if self.behavior == "wait" and not self.roi:
            raise ValueError("wait behavior requires a roi name")
        if self.behavior in ("cross", "pass_by") and len(self.path) < 2:
            raise ValueError(f"{self.behavior} behavior requires a path of >= 2 points")


@dataclass(frozen=True)
class Scenario:
    meta: VideoMeta
    groups: tuple[RoiGroup, ...]
    agents: tuple[AgentScript, ...]
    seed: int = 0


@dataclass(frozen=True)
class TrueSession:
    f_b: int
    f_e: int
    p: int  # distinct scripted agents present
    agents: tuple[int, ...]


@dataclass(frozen=True)
class TrueCrossing:
    agent: int
    frame: int  # middle of the agent's in-group interval
    date: dt.date
    hour: int


@dataclass(frozen=True)
class GroundTruth:
    sessions: dict[str, tuple[TrueSession, ...]] = field(default_factory=dict)
    crossings: dict[str, tuple[TrueCrossing, ...]] = field(default_factory=dict)


def _polygon_centroid(poly: tuple[Point, ...]) -> Point:
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    return (sum(xs) / len(xs), sum(ys) / len(ys))


def _polyline_at(path: tuple[Point, ...], fraction: float) -> Point:
    """Constant-speed position along a polyline, fraction in [0, 1]."""
    lengths = [
        ((path[i + 1][0] - path[i][0]) ** 2 + (path[i + 1][1] - path[i][1]) ** 2) ** 0.5
        for i in range(len(path) - 1)
    ]
    total = sum(lengths)
    if total == 0:
        return path[0]
    target = max(0.0, min(1.0, fraction)) * total
    for (ax, ay), (bx, by), seg in zip(path, path[1:], lengths):
        if target <= seg and seg > 0:
            t = target / seg
            return (ax + (bx - ax) * t, ay + (by - ay) * t)
        target -= seg
    return path[-1]


def _true_anchor(agent: AgentScript, t_s: float, groups: dict[str, RoiGroup]) -> Point:
    if agent.behavior == "wait":
        group = groups[agent.roi]
        cx, cy = _polygon_centroid(group.polygons[0])
        return (cx + agent.offset_px[0], cy + agent.offset_px[1])
    fraction = (t_s - agent.start_s) / agent.duration_s
    x, y = _polyline_at(agent.path, fraction)
    return (x + agent.offset_px[0], y + agent.offset_px[1])


def _clamped_bbox(
    anchor: Point, box_size: tuple[float, float], meta: VideoMeta
) -> tuple[float, float, float, float]:
    w, h = box_size
    ax = min(max(anchor[0], w / 2), meta.width - w / 2)
    ay = min(max(anchor[1], h), float(meta.height))
    return (ax - w / 2, ay - h, ax + w / 2, ay)


def generate(scenario: Scenario) -> tuple[DetectionLog, GroundTruth]:
    """Emit the scenario's detection stream and its script-derived ground truth.

    Per frame, each active agent emits one person detection at its
    scripted anchor plus jitter, unless inside a dropout burst. Ground
    truth comes from the unjittered anchors only.
    """
    meta = scenario.meta
    groups = {g.name: g for g in scenario.groups}
    for i, agent in enumerate(scenario.agents):
        if agent.behavior == "wait" and agent.roi not in groups:
            raise ParseError(f"agent {i} references unknown ROI {agent.roi!r}")

    rng = np.random.default_rng(scenario.seed)
    detections: list[Detection] = []
    # group name -> frame -> set of agent indices truly present
    presence: dict[str, dict[int, set[int]]] = {name: {} for name in groups}
    burst_until = [-1.0] * len(scenario.agents)

    for frame in range(meta.frame_count):
        t_s = frame / meta.fps
        for i, agent in enumerate(scenario.agents):
            if not agent.start_s <= t_s < agent.start_s + agent.duration_s:
                continue
            anchor = _true_anchor(agent, t_s, groups)
            for name, group in groups.items():
                if in_group(anchor, group):
                    presence[name].setdefault(frame, set()).add(i)
            if t_s <= burst_until[i]:
                continue
            if agent.dropout > 0 and rng.random() < agent.dropout:
                burst_until[i] = t_s + agent.dropout_burst_s
                continue
            if agent.jitter_px > 0:
                jx, jy = rng.uniform(-agent.jitter_px, agent.jitter_px, size=2)
                anchor = (anchor[0] + jx, anchor[1] + jy)
            detections.append(
                Detection(
                    frame=frame,
                    label="person",
                    bbox=_clamped_bbox(anchor, agent.box_size, meta),
                    confidence=0.9,
                )
            )

    truth = GroundTruth(
        sessions={
            name: _true_sessions(presence[name], groups[name], meta)
            for name in groups
        },
        crossings={
            name: _true_crossings(presence[name], scenario, name)
            for name, g in groups.items()
            if g.kind == "crossing"
        },
    )
    return DetectionLog(meta=meta, detections=tuple(detections)), truth


def _true_sessions(
    frames_present: dict[int, set[int]], group: RoiGroup, meta: VideoMeta
) -> tuple[TrueSession, ...]:
    """Sessionize true presence with the group's thresholds (stride 1)."""
    occupied = sorted(frames_present)
    if not occupied:
        return ()
    fps = meta.fps
    spans: list[tuple[int, int]] = []
    start = prev = occupied[0]
    for f in occupied[1:]:
        if f - prev <= 1:
            prev = f
        else:
            spans.append((start, prev))
            start = prev = f
    spans.append((start, prev))

    merged: list[tuple[int, int]] = []
    for span in spans:
        if merged and (span[0] - merged[-1][1]) / fps <= group.min_no_detection_s:
            merged[-1] = (merged[-1][0], span[1])
        else:
            merged.append(span)

    sessions = []
    for f_b, f_e in merged:
        if (f_e - f_b) / fps < group.min_session_time_s:
            continue
        agents: set[int] = set()
        for f in range(f_b, f_e + 1):
            agents |= frames_present.get(f, set())
        sessions.append(
            TrueSession(f_b=f_b, f_e=f_e, p=len(agents), agents=tuple(sorted(agents)))
        )
    return tuple(sessions)


def _true_crossings(
    frames_present: dict[int, set[int]], scenario: Scenario, group_name: str
) -> tuple[TrueCrossing, ...]:
    """One true crossing per cross-behavior agent seen inside the group."""
    crossings = []
    for i, agent in enumerate(scenario.agents):
        if agent.behavior != "cross":
            continue
        inside = sorted(f for f, agents in frames_present.items() if i in agents)
        if not inside:
            continue
        mid = inside[len(inside) // 2]
        date, hour = hour_bucket(
            midpoint_time(inside[0], inside[-1], scenario.meta)
        )
        crossings.append(TrueCrossing(agent=i, frame=mid, date=date, hour=hour))
    return tuple(sorted(crossings, key=lambda c: c.frame))


def brute_force_sessions(
    d_roi: DetectionLog, params
) -> tuple[list[tuple[int, int]], list[tuple[int, int]], list[tuple[int, int]]]:
    """Reference sessionization via an explicit occupied-frame interval scan.

    Computes the occupied-frame set directly and merges intervals by
    repeated whole-list passes until a fixpoint, independent of the
    streaming pipeline. Intended as a testing oracle for streams up to
    ~10^4 frames.
    """
    occupied = sorted({d.frame for d in d_roi.detections})
    s_d: list[tuple[int, int]] = []
    i = 0
    while i < len(occupied):
        j = i
        while j + 1 < len(occupied) and occupied[j + 1] - occupied[j] <= params.stride:
            j += 1
        s_d.append((occupied[i], occupied[j]))
        i = j + 1

    s_m = list(s_d)
    changed = True
    while changed:
        changed = False
        for k in range(len(s_m) - 1):
            gap_s = (s_m[k + 1][0] - s_m[k][1]) / params.fps
            if gap_s <= params.min_no_detection_s:
                s_m[k : k + 2] = [(s_m[k][0], s_m[k + 1][1])]
                changed = True
                break

    s_f = [
        (b, e) for b, e in s_m if (e - b) / params.fps >= params.min_session_time_s
    ]
    return s_d, s_m, s_f


def parse_scenario(data: bytes | str) -> Scenario:
    """Parse a scenario document (meta, groups, agents, seed)."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed scenario: {e.msg}") from e
    for key in ("meta", "groups", "agents"):
        if key not in doc:
            raise ParseError("missing", field=key)
    meta = parse_video_meta(json.dumps(doc["meta"]))
    groups = parse_roi_config(json.dumps({"groups": doc["groups"]}))
    agents = []
    for i, a in enumerate(doc["agents"]):
        try:
            agents.append(
                AgentScript(
                    behavior=a["behavior"],
                    start_s=float(a["start_s"]),
                    duration_s=float(a["duration_s"]),
                    roi=a.get("roi"),
                    path=tuple((float(x), float(y)) for x, y in a.get("path", [])),
                    offset_px=tuple(a.get("offset_px", (0.0, 0.0))),
                    dropout=float(a.get("dropout", 0.0)),
                    dropout_burst_s=float(a.get("dropout_burst_s", 0.0)),
                    box_size=tuple(a.get("box_size", (30.0, 60.0))),
                    jitter_px=float(a.get("jitter_px", 0.0)),
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"agent {i}: {e}", field="agents") from e
    return Scenario(
        meta=meta,
        groups=tuple(groups),
        agents=tuple(agents),
        seed=int(doc.get("seed", 0)),
    )


def serialize_scenario(scenario: Scenario) -> bytes:
    doc = {
        "meta": json.loads(serialize_video_meta(scenario.meta)),
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
            for g in scenario.groups
        ],
        "agents": [
            {
                "behavior": a.behavior,
                "start_s": a.start_s,
                "duration_s": a.duration_s,
                "roi": a.roi,
                "path": [[x, y] for x, y in a.path],
                "offset_px": list(a.offset_px),
                "dropout": a.dropout,
                "dropout_burst_s": a.dropout_burst_s,
                "box_size": list(a.box_size),
                "jitter_px": a.jitter_px,
            }
            for a in scenario.agents
        ],
        "seed": scenario.seed,
    }
    return json.dumps(doc, indent=2, sort_keys=True).encode()


def serialize_ground_truth(truth: GroundTruth) -> bytes:
    doc = {
        "sessions": {
            name: [
                {"f_b": s.f_b, "f_e": s.f_e, "p": s.p, "agents": list(s.agents)}
                for s in sessions
            ]
            for name, sessions in truth.sessions.items()
        },
        "crossings": {
            name: [
                {
                    "agent": c.agent,
                    "frame": c.frame,
                    "date": c.date.isoformat(),
                    "hour": c.hour,
                }
                for c in crossings
            ]
            for name, crossings in truth.crossings.items()
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True).encode()
