from __future__ import annotations

import datetime as dt

import pytest

from pedwatch.model import Detection, DetectionLog, RoiGroup, VideoMeta

TZ_CDT = dt.timezone(dt.timedelta(hours=-5))


def make_meta(
    fps: float = 10.0,
    frame_count: int = 360_000,
    start: dt.datetime | None = None,
    camera_id: str = "cam42",
) -> VideoMeta:
    return VideoMeta(
        camera_id=camera_id,
        start_ts=start or dt.datetime(2020, 3, 10, 10, 0, tzinfo=TZ_CDT),
        fps=fps,
        frame_count=frame_count,
        width=1920,
        height=1080,
        source_uri="/data/raw/cam42_2020-03-10.mp4",
    )


def make_det(
    frame: int,
    x: float = 100.0,
    y: float = 500.0,
    w: float = 30.0,
    h: float = 60.0,
    label: str = "person",
    conf: float = 0.9,
) -> Detection:
    """Detection whose anchor (bottom-center) sits at (x, y)."""
    return Detection(
        frame=frame,
        label=label,
        bbox=(x - w / 2, y - h, x + w / 2, y),
        confidence=conf,
    )


def make_log(frames, meta: VideoMeta | None = None, **det_kwargs) -> DetectionLog:
    meta = meta or make_meta()
    return DetectionLog(
        meta=meta,
        detections=tuple(make_det(f, **det_kwargs) for f in frames),
    )


def make_event(
    date: dt.date | None = None,
    hour: int = 10,
    count: int = 1,
    kind: str = "dwell",
    event_id: str = "",
    f_b: int = 0,
    f_e: int = 200,
    p: int | None = None,
    roi_group: str = "sb_stop",
    meta: VideoMeta | None = None,
):
    from pedwatch.model import ActivityEvent, Session, frame_to_time

    meta = meta or make_meta()
    date = date or dt.date(2020, 3, 10)
    p = count if kind == "dwell" else (p or 1)
    session = Session(
        roi_group=roi_group,
        f_b=f_b,
        f_e=f_e,
        p=p,
        detection_count=max(p, f_e - f_b + 1),
        t_b=frame_to_time(f_b, meta),
        t_e=frame_to_time(f_e, meta),
    )
    return ActivityEvent(
        event_id=event_id or f"{meta.camera_id}_{roi_group}_{kind}_{f_b:07d}_{f_e:07d}",
        kind=kind,
        session=session,
        date=date,
        hour=hour,
        position=(100.0, 500.0),
        count=count,
        camera_id=meta.camera_id,
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    results: dict[str, str] = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" not in nodeid or "criterion" not in nodeid:
                continue
            name = nodeid.rsplit("::", 1)[-1]
            verdict = "PASS" if status == "passed" else "FAIL"
            if results.get(name) != "FAIL":
                results[name] = verdict
    if results:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name in sorted(results):
            terminalreporter.write_line(f"{results[name]}  {name}")


@pytest.fixture
def meta() -> VideoMeta:
    return make_meta()


@pytest.fixture
def stop_group() -> RoiGroup:
    # 200x100 px pad around anchor (100, 500)
    return RoiGroup(
        name="sb_stop",
        kind="dwell",
        polygons=((( 0.0, 450.0), (200.0, 450.0), (200.0, 550.0), (0.0, 550.0)),),
        min_session_time_s=15.0,
        min_no_detection_s=5.0,
    )


@pytest.fixture
def median_group() -> RoiGroup:
    # horizontal band across the road median
    return RoiGroup(
        name="median",
        kind="crossing",
        polygons=(((400.0, 400.0), (1600.0, 400.0), (1600.0, 700.0), (400.0, 700.0)),),
        min_session_time_s=1.0,
        min_no_detection_s=2.0,
    )
