"""Clip cut-lists and external-cutter invocation.

Cutting itself is delegated to any command template honoring the
{source} {start_s} {duration_s} {output} placeholders, so the core never
touches codecs.
"""

from __future__ import annotations

import logging
import re
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path

from .model import ActivityEvent, ClipRef, VideoMeta, frame_to_time

log = logging.getLogger(__name__)

DEFAULT_PAD_S = 2.0

_SAFE_NAME = re.compile(r"^[A-Za-z0-9_-]+$")


@dataclass(frozen=True)
class Manifest:
    """Maps every event to its containing clip."""

    meta: VideoMeta
    entries: tuple[tuple[str, ClipRef], ...]  # (event_id, clip)

    def clip_for(self, event_id: str) -> ClipRef | None:
        for eid, clip in self.entries:
            if eid == event_id:
                return clip
        return None


def cutlist(
    events: list[ActivityEvent],
    meta: VideoMeta,
    pad_s: float = DEFAULT_PAD_S,
    merge_overlaps: bool = False,
) -> tuple[list[ClipRef], Manifest]:
    """Build clip boundaries covering each event, padded and clamped.

    Each clip spans [f_b - pad, f_e + pad] frames, clamped to the video.
    With merge_overlaps, overlapping or touching clips coalesce; a merged
    clip is named after its earliest event. The manifest maps every
    event_id to its containing clip.
    """
    if pad_s < 0:
        raise ValueError(f"pad_s must be non-negative, got {pad_s}")
    pad = round(pad_s * meta.fps)
    padded: list[tuple[int, int, ActivityEvent]] = []
    for ev in sorted(events, key=lambda e: (e.session.f_b, e.event_id)):
        f_b, f_e = ev.session.f_b, ev.session.f_e
        if f_b < 0 or f_e >= meta.frame_count:
            raise ValueError(
                f"event {ev.event_id} span [{f_b}, {f_e}] outside video "
                f"of {meta.frame_count} frames"
            )
        start = max(0, f_b - pad)
        end = min(meta.frame_count - 1, f_e + pad)
        padded.append((start, end, ev))

    # Group events into clip intervals.
    groups: list[tuple[int, int, list[ActivityEvent]]] = []
    for start, end, ev in padded:
        if merge_overlaps and groups and start <= groups[-1][1] + 1:
            gs, ge, evs = groups[-1]
            groups[-1] = (gs, max(ge, end), evs + [ev])
        else:
            groups.append((start, end, [ev]))

    clips: list[ClipRef] = []
    entries: list[tuple[str, ClipRef]] = []
    for start, end, evs in groups:
        first = evs[0]
        clip = ClipRef(
            event_id=first.event_id,
            source_uri=meta.source_uri,
            start_frame=start,
            end_frame=end,
            start_ts=frame_to_time(start, meta),
            end_ts=frame_to_time(end, meta),
            output_name=f"{meta.camera_id}_{first.date.isoformat()}_{first.event_id}",
        )
        if not _SAFE_NAME.match(clip.output_name.replace(".", "")):
            raise ValueError(f"unsafe clip name {clip.output_name!r}")
        clips.append(clip)
        for ev in evs:
            entries.append((ev.event_id, clip))
    return clips, Manifest(meta=meta, entries=tuple(entries))


REQUIRED_PLACEHOLDERS = ("{source}", "{start_s}", "{duration_s}", "{output}")


@dataclass(frozen=True)
class RenderOutcome:
    output_name: str
    status: str  # "ok", "skipped", or "failed"
    exit_code: int | None = None


@dataclass(frozen=True)
class RenderReport:
    outcomes: tuple[RenderOutcome, ...]

    @property
    def ok(self) -> bool:
        return all(o.status != "failed" for o in self.outcomes)


def render_clips(
    clips: list[ClipRef],
    meta: VideoMeta,
    cutter_template: str,
    out_dir: Path,
    extension: str = ".mp4",
) -> RenderReport:
    """Run the external cutter once per clip, skipping outputs that already exist.

    A failing cutter is recorded and processing continues; a missing
    source file aborts before any invocation.
    """
    missing = [p for p in REQUIRED_PLACEHOLDERS if p not in cutter_template]
    if missing:
        raise ValueError(f"cutter template missing placeholders: {', '.join(missing)}")
    sources = {c.source_uri for c in clips}
    for src in sources:
        if not Path(src).exists():
            raise FileNotFoundError(f"source video not found: {src}")
    out_dir.mkdir(parents=True, exist_ok=True)
    outcomes: list[RenderOutcome] = []
    for clip in clips:
        output = out_dir / f"{clip.output_name}{extension}"
        if output.exists():
            log.info("clip %s already rendered, skipping", clip.output_name)
            outcomes.append(RenderOutcome(clip.output_name, "skipped"))
            continue
        start_s = clip.start_frame / meta.fps
        duration_s = (clip.end_frame - clip.start_frame + 1) / meta.fps
        command = cutter_template.format(
            source=shlex.quote(clip.source_uri),
            start_s=f"{start_s:.3f}",
            duration_s=f"{duration_s:.3f}",
            output=shlex.quote(str(output)),
        )
        proc = subprocess.run(command, shell=True, capture_output=True)
        if proc.returncode == 0:
            outcomes.append(RenderOutcome(clip.output_name, "ok", 0))
        else:
            log.error(
                "cutter failed for %s (exit %d): %s",
                clip.output_name, proc.returncode, proc.stderr.decode(errors="replace"),
            )
            outcomes.append(RenderOutcome(clip.output_name, "failed", proc.returncode))
    return RenderReport(outcomes=tuple(outcomes))
