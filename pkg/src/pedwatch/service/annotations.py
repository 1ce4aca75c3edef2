"""Append-only review verdict log.

Every verdict is one JSON line; nothing is ever rewritten. Current state
is a pure fold over the log: the latest entry per (event_id, reviewer)
wins, earlier entries remain as history.
"""

from __future__ import annotations

import datetime as dt
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from ..ingest import parse_timestamp

VERDICTS = ("confirmed", "false_positive", "unsure")


@dataclass(frozen=True)
class Annotation:
    event_id: str
    verdict: str
    note: str
    reviewer: str
    ts: dt.datetime

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}, got {self.verdict!r}")


def annotation_to_record(a: Annotation) -> dict:
    return {
        "event_id": a.event_id,
        "verdict": a.verdict,
        "note": a.note,
        "reviewer": a.reviewer,
        "ts": a.ts.isoformat(),
    }


def annotation_from_record(rec: dict) -> Annotation:
    return Annotation(
        event_id=rec["event_id"],
        verdict=rec["verdict"],
        note=rec["note"],
        reviewer=rec["reviewer"],
        ts=parse_timestamp(rec["ts"]),
    )


class AnnotationLog:
    """Single-appender log; reads replay the file for a consistent snapshot."""

    def __init__(self, path: Path):
        self.path = path
        self._lock = threading.Lock()

    def append(self, annotation: Annotation) -> None:
        line = json.dumps(
            annotation_to_record(annotation), sort_keys=True, separators=(",", ":")
        )
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(line + "\n")

    def replay(self) -> list[Annotation]:
        """Full history in append order."""
        if not self.path.exists():
            return []
        out = []
        with open(self.path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    out.append(annotation_from_record(json.loads(line)))
        return out

    def latest(self) -> dict[tuple[str, str], Annotation]:
        """Current state: last write per (event_id, reviewer)."""
        state: dict[tuple[str, str], Annotation] = {}
        for a in self.replay():
            state[(a.event_id, a.reviewer)] = a
        return state

    def for_event(self, event_id: str) -> list[Annotation]:
        """Latest verdict of each reviewer for one event, by reviewer id."""
        state = self.latest()
        return sorted(
            (a for (eid, _), a in state.items() if eid == event_id),
            key=lambda a: a.reviewer,
        )
