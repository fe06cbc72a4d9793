"""Session-hosting HTTP service for interactive steering clients.

Endpoints follow the documented wire protocol: JSON session creation, a
versioned state view, weight and decision posts, and a server-sent-event
stream carrying the full state view after every mutation. Sessions mutate
one call at a time behind a per-session lock; reads return the latest
committed view without blocking.
"""

from __future__ import annotations

import json
import queue
import threading
import uuid
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from pydantic import BaseModel, Field

from .objectives import ConstraintViolation, ObjectiveWeights
from .steering_loop import (
    Action,
    SessionConfig,
    create_session,
    restore_session,
    session_snapshot,
    set_weights,
    step,
)
from .viewdata import state_view


class WeightsBody(BaseModel):
    w_position: float = Field(ge=0)
    w_sand: float = Field(ge=0)
    w_cost: float = Field(ge=0)


class DecisionBody(BaseModel):
    action: str
    target_z: Optional[float] = None


class _SessionHolder:
    """One live session: lock-serialized mutations, wait-free reads."""

    def __init__(self, session):
        self.lock = threading.Lock()
        self.session = session
        self.version = 1
        self.view = state_view(session, self.version)
        self.subscribers: list[queue.Queue] = []

    def mutate(self, fn):
        with self.lock:
            self.session = fn(self.session)
            self.version += 1
            self.view = state_view(self.session, self.version)
            for q in list(self.subscribers):
                q.put(self.view)
            return self.view

    def subscribe(self) -> queue.Queue:
        with self.lock:
            q = queue.Queue()
            self.subscribers.append(q)
            return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self.lock:
            if q in self.subscribers:
                self.subscribers.remove(q)


def create_app(snapshot_dir=None, ui_dir=None) -> FastAPI:
    app = FastAPI(title="geodss", version="0.1.0")
    sessions: dict[str, _SessionHolder] = {}
    snap_path = Path(snapshot_dir) if snapshot_dir else None

    if snap_path is not None and snap_path.exists():
        for file in sorted(snap_path.glob("*.json")):
            try:
                holder = _SessionHolder(restore_session(json.loads(file.read_text())))
                sessions[file.stem] = holder
            except Exception:  # damaged snapshot: skip, do not block startup
                continue

    def _persist(session_id: str) -> None:
        if snap_path is None:
            return
        snap_path.mkdir(parents=True, exist_ok=True)
        holder = sessions[session_id]
        (snap_path / f"{session_id}.json").write_text(
            json.dumps(session_snapshot(holder.session))
        )

    def _holder(session_id: str) -> _SessionHolder:
        holder = sessions.get(session_id)
        if holder is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return holder

    @app.post("/sessions")
    def create(config: Optional[dict] = None):
        try:
            cfg = SessionConfig.from_dict(config or {})
        except (ValueError, TypeError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=f"invalid config: {exc}")
        session_id = uuid.uuid4().hex[:12]
        sessions[session_id] = _SessionHolder(create_session(cfg))
        _persist(session_id)
        return {"id": session_id, "version": sessions[session_id].version}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        return _holder(session_id).view

    @app.post("/sessions/{session_id}/weights")
    def post_weights(session_id: str, body: WeightsBody):
        holder = _holder(session_id)
        weights = ObjectiveWeights(body.w_position, body.w_sand, body.w_cost)
        view = holder.mutate(lambda s: set_weights(s, weights))
        _persist(session_id)
        return view

    @app.post("/sessions/{session_id}/decision")
    def post_decision(session_id: str, body: DecisionBody):
        holder = _holder(session_id)
        if body.action == "accept":
            override = None
        elif body.action == "stop":
            override = Action("stop")
        elif body.action == "steer":
            if body.target_z is None:
                raise HTTPException(status_code=400, detail="steer needs target_z")
            override = Action("steer", body.target_z)
        else:
            raise HTTPException(status_code=400, detail=f"unknown action {body.action!r}")
        try:
            view = holder.mutate(lambda s: step(s, override))
        except ConstraintViolation as exc:
            raise HTTPException(
                status_code=409,
                detail={"constraint": str(exc).split(":")[0], "message": str(exc)},
            )
        except (RuntimeError, ValueError) as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        _persist(session_id)
        return view

    @app.get("/sessions/{session_id}/events")
    def events(session_id: str):
        holder = _holder(session_id)
        q = holder.subscribe()

        def gen():
            try:
                while True:
                    try:
                        view = q.get(timeout=15.0)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield f"id: {view['version']}\ndata: {json.dumps(view)}\n\n"
            finally:
                holder.unsubscribe(q)

        return StreamingResponse(gen(), media_type="text/event-stream")

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
