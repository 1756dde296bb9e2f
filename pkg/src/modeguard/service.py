"""HTTP wire protocol over a live supervisor session.

The app owns the session lifecycle: its lifespan starts the tick thread
on startup and stops it (optionally flushing the decision log to disk)
on shutdown.  Mutating endpoints acknowledge with the post-tick state
snapshot, so a caller always sees the mode its command produced.
"""

from __future__ import annotations

import asyncio
import json
import queue
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from .runtime import LiveSession

__all__ = ["build_app"]


class InjectBody(BaseModel):
    group: str
    event: str


class RcBody(BaseModel):
    stick: str | None = None
    switch: str | None = None
    power: str | None = None


def _flush_log(session: LiveSession, path: Path) -> None:
    entries = [
        {
            "period": e.period_index,
            "mode": e.mode.name,
            "mce": e.command,
            "consumed": list(e.consumed),
        }
        for e in session.log
    ]
    path.write_text(json.dumps(entries, indent=2) + "\n", encoding="utf-8")


def build_app(session: LiveSession, log_path: Path | str | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        session.start()
        try:
            yield
        finally:
            session.stop()
            if log_path is not None:
                _flush_log(session, Path(log_path))

    app = FastAPI(title="modeguard", lifespan=lifespan)

    @app.get("/state")
    def state() -> dict:
        return session.state_snapshot()

    @app.post("/inject")
    def inject(body: InjectBody):
        try:
            return session.inject(body.group, body.event)
        except ValueError as err:
            return JSONResponse({"error": str(err)}, status_code=400)
        except RuntimeError as err:
            return JSONResponse({"error": str(err)}, status_code=409)

    @app.post("/rc")
    def rc(body: RcBody):
        if body.stick is None and body.switch is None and body.power is None:
            return JSONResponse(
                {"error": "provide at least one of stick, switch, power"},
                status_code=400,
            )
        try:
            return session.set_rc(stick=body.stick, switch=body.switch, power=body.power)
        except ValueError as err:
            return JSONResponse({"error": str(err)}, status_code=400)
        except RuntimeError as err:
            return JSONResponse({"error": str(err)}, status_code=409)

    @app.get("/events")
    def events() -> StreamingResponse:
        async def stream():
            sub = session.subscribe()
            try:
                while True:
                    try:
                        record = sub.get_nowait()
                    except queue.Empty:
                        if session.fault is not None or not session.running:
                            break
                        await asyncio.sleep(0.02)
                        continue
                    yield json.dumps(record) + "\n"
                    if "fault" in record:
                        break
            finally:
                session.unsubscribe(sub)

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    return app
