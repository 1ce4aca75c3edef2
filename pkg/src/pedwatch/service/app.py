"""HTTP review service: aggregates, event drill-down, clips, and verdicts.

Every endpoint except POST /api/login requires a bearer token. Errors are
uniform {"code", "message"} documents. Summary and correlation bodies are
produced by the same document builders the CLI writes to disk, so a
response is byte-identical to the corresponding report.
"""

from __future__ import annotations

import datetime as dt
import mimetypes
import re
from pathlib import Path

from fastapi import Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response

from ..store import (
    Store,
    StoreError,
    build_correlation,
    correlation_document,
    dumps_document,
    event_to_record,
    parse_tz,
    summary_document,
    window_for,
)
from .annotations import VERDICTS, Annotation, AnnotationLog, annotation_to_record
from .auth import TokenStore, User, authenticate, load_users_file


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _parse_date(raw: str | None, name: str) -> dt.date | None:
    if raw is None:
        return None
    try:
        return dt.date.fromisoformat(raw)
    except ValueError:
        raise ApiError(400, "invalid_request", f"{name} is not a YYYY-MM-DD date")


_RANGE = re.compile(r"bytes=(\d*)-(\d*)$")


def create_app(
    store: Store,
    users: dict[str, User] | Path,
    token_store: TokenStore | None = None,
    clock=None,
) -> FastAPI:
    if isinstance(users, Path):
        users = load_users_file(users)
    tokens = token_store or TokenStore()
    now = clock or (lambda: dt.datetime.now(dt.timezone.utc))
    annotations = AnnotationLog(store.annotations_path)

    app = FastAPI(title="pedwatch review service", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message},
        )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"code": "invalid_request", "message": str(exc.errors()[:1])},
        )

    def current_user(request: Request) -> str:
        header = request.headers.get("authorization", "")
        if not header.startswith("Bearer "):
            raise ApiError(401, "auth_required", "missing bearer token")
        user_id = tokens.validate(header.removeprefix("Bearer "))
        if user_id is None:
            raise ApiError(401, "auth_invalid", "invalid or expired token")
        return user_id

    def store_tz() -> dt.tzinfo | None:
        try:
            return parse_tz(store.load_run_config().get("tz"))
        except StoreError:
            return None

    def load_groups():
        try:
            return {g.name: g for g in store.load_roi()}
        except StoreError as e:
            raise ApiError(409, "store_incomplete", str(e))

    def load_events():
        try:
            return store.load_events()
        except StoreError as e:
            raise ApiError(409, "store_incomplete", str(e))

    def resolve_window(date_from: str | None, date_to: str | None):
        metas = [store.load_meta(k) for k in store.video_keys()]
        if not metas:
            raise ApiError(409, "store_incomplete", "store holds no videos")
        return window_for(
            [], metas, store_tz(),
            _parse_date(date_from, "from"), _parse_date(date_to, "to"),
        )

    @app.post("/api/login")
    async def login(request: Request):
        body = await request.json()
        user_id = body.get("user", "")
        password = body.get("password", "")
        user = authenticate(users, user_id, password)
        if user is None:
            raise ApiError(401, "auth_failed", "unknown user or wrong password")
        token = tokens.issue(user.user_id)
        return JSONResponse(
            {"token": token, "role": user.role, "expires_in_s": tokens.ttl_s}
        )

    @app.get("/api/summary")
    def get_summary(
        request: Request,
        group: str,
        user: str = Depends(current_user),
    ):
        groups = load_groups()
        if group not in groups:
            raise ApiError(404, "unknown_group", f"no ROI group named {group!r}")
        window = resolve_window(
            request.query_params.get("from"), request.query_params.get("to")
        )
        doc = summary_document(load_events(), groups[group], window)
        return Response(dumps_document(doc), media_type="application/json")

    @app.get("/api/events")
    def get_events(
        date: str,
        hour: int,
        group: str,
        user: str = Depends(current_user),
    ):
        groups = load_groups()
        if group not in groups:
            raise ApiError(404, "unknown_group", f"no ROI group named {group!r}")
        if not 0 <= hour <= 23:
            raise ApiError(400, "invalid_request", f"hour {hour} outside 0-23")
        day = _parse_date(date, "date")
        state = annotations.latest()
        try:
            cutlist = store.load_cutlist()
        except StoreError:
            cutlist = {"videos": {}}
        clip_by_event: dict[str, dict] = {}
        for video in cutlist["videos"].values():
            for clip in video["clips"]:
                for eid in clip["event_ids"]:
                    clip_by_event[eid] = clip
        rows = []
        for ev in load_events():
            if ev.session.roi_group != group or ev.date != day or ev.hour != hour:
                continue
            rec = event_to_record(ev)
            if ev.clip is None and ev.event_id in clip_by_event:
                rec["clip"] = clip_by_event[ev.event_id]
            rec["annotations"] = [
                annotation_to_record(a)
                for (eid, _), a in sorted(state.items(), key=lambda kv: kv[0])
                if eid == ev.event_id
            ]
            rows.append(rec)
        rows.sort(key=lambda r: (r["f_b"], r["event_id"]))
        return Response(dumps_document({"events": rows}), media_type="application/json")

    @app.post("/api/events/{event_id}/verdict")
    async def post_verdict(
        event_id: str,
        request: Request,
        user: str = Depends(current_user),
    ):
        body = await request.json()
        verdict = body.get("verdict")
        if verdict not in VERDICTS:
            raise ApiError(
                400, "invalid_verdict",
                f"verdict must be one of {', '.join(VERDICTS)}",
            )
        known = {ev.event_id for ev in load_events()}
        if event_id not in known:
            raise ApiError(404, "unknown_event", f"no event {event_id!r}")
        annotation = Annotation(
            event_id=event_id,
            verdict=verdict,
            note=str(body.get("note", "")),
            reviewer=user,
            ts=now(),
        )
        annotations.append(annotation)
        return JSONResponse(annotation_to_record(annotation))

    @app.get("/api/clips/{event_id}")
    def get_clip(
        event_id: str,
        request: Request,
        user: str = Depends(current_user),
    ):
        path = store.clip_file(event_id)
        if path is None:
            raise ApiError(
                404, "clip_not_rendered",
                f"no rendered clip for {event_id!r}; run render-clips and retry",
            )
        data = path.read_bytes()
        media_type = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
        range_header = request.headers.get("range")
        if range_header is None:
            return Response(
                data, media_type=media_type,
                headers={"Accept-Ranges": "bytes", "Content-Length": str(len(data))},
            )
        m = _RANGE.match(range_header.strip())
        if not m or (not m.group(1) and not m.group(2)):
            raise ApiError(416, "bad_range", f"unsupported range {range_header!r}")
        if m.group(1):
            start = int(m.group(1))
            end = int(m.group(2)) if m.group(2) else len(data) - 1
        else:
            # suffix form bytes=-N: the final N bytes
            start = max(0, len(data) - int(m.group(2)))
            end = len(data) - 1
        if start >= len(data) or start > end:
            raise ApiError(416, "bad_range", f"range {range_header!r} outside clip")
        end = min(end, len(data) - 1)
        chunk = data[start : end + 1]
        return Response(
            chunk,
            status_code=206,
            media_type=media_type,
            headers={
                "Accept-Ranges": "bytes",
                "Content-Range": f"bytes {start}-{end}/{len(data)}",
                "Content-Length": str(len(chunk)),
            },
        )

    @app.get("/api/correlation")
    def get_correlation(request: Request, user: str = Depends(current_user)):
        groups = load_groups()
        window = resolve_window(
            request.query_params.get("from"), request.query_params.get("to")
        )
        table = build_correlation(load_events(), list(groups.values()), window)
        doc = correlation_document(table)
        return Response(dumps_document(doc), media_type="application/json")

    return app
