"""HTTP service exposing sessions, datasets, ROIs, behavior runs and SVG
exports; the backend for both scripted clients and the browser UI.

One engine, one serializer: run results are emitted through the same
canonical JSON writer as the CLI, so the two paths are byte-identical.
Per-session mutations are serialized with a non-blocking lock; a second
concurrent mutation is rejected with 409 rather than queued.
"""

from __future__ import annotations

import base64
import re
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import dsl, plots, retrieval, session, trackdata
from .cli import canonical_json_bytes
from .errors import EthoError, EthoSyntaxError, UnknownNameError
from .events import events_to_json


@dataclass
class ServerSession:
    session_id: str
    state: session.SessionState = field(default_factory=session.SessionState)
    dataset: trackdata.Dataset | None = None
    backdrop: bytes | None = None
    backdrop_type: str = "image/png"
    lock: threading.Lock = field(default_factory=threading.Lock)


class _Mutation:
    """Non-blocking per-session critical section; busy means 409."""

    def __init__(self, sess: ServerSession):
        self.sess = sess

    def __enter__(self):
        if not self.sess.lock.acquire(blocking=False):
            raise _Busy()
        return self.sess

    def __exit__(self, *exc):
        self.sess.lock.release()
        return False


class _Busy(Exception):
    pass


_FENCE_RE = re.compile(r"```(?:etho\w*)?\n(.*?)```", re.DOTALL)


def extract_dsl_blocks(text: str) -> list[str]:
    """Fenced ``` blocks, or the whole utterance when it starts with 'define'."""
    blocks = [m.group(1) for m in _FENCE_RE.finditer(text)]
    if not blocks and text.strip().lower().startswith("define "):
        blocks = [text]
    return blocks


def create_app(data_dir: str | None = None, registry: retrieval.ModuleRegistry | None = None) -> FastAPI:
    app = FastAPI(title="etho", docs_url=None, redoc_url=None)
    sessions: dict[str, ServerSession] = {}
    module_registry = registry or retrieval.default_registry()

    def get_session(session_id: str) -> ServerSession:
        if session_id not in sessions:
            raise UnknownNameError("session", session_id)
        return sessions[session_id]

    def need_dataset(sess: ServerSession) -> trackdata.Dataset:
        if sess.dataset is None:
            raise EthoError("no dataset uploaded for this session")
        return sess.dataset

    @app.exception_handler(EthoError)
    async def etho_error(request: Request, exc: EthoError):
        payload = {"error": str(exc)}
        status = 400
        if isinstance(exc, EthoSyntaxError):
            payload["line"] = exc.line
            payload["col"] = exc.col
            payload["expected"] = list(exc.expected)
        if isinstance(exc, UnknownNameError):
            payload["known"] = list(exc.known)
            if exc.kind in ("session", "behavior"):
                payload["error"] = f"unknown {exc.kind}"
                status = 404
        return JSONResponse(payload, status_code=status)

    @app.exception_handler(_Busy)
    async def busy(request: Request, exc: _Busy):
        return JSONResponse({"error": "concurrent mutation rejected"}, status_code=409)

    @app.post("/sessions")
    def create_session():
        session_id = uuid.uuid4().hex[:12]
        sessions[session_id] = ServerSession(session_id)
        return {"session_id": session_id}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        sess = get_session(session_id)
        return Response(
            canonical_json_bytes(session.state_to_json(sess.state)),
            media_type="application/json",
        )

    @app.post("/sessions/{session_id}/state")
    def post_state(session_id: str, payload: dict = Body(...)):
        sess = get_session(session_id)
        with _Mutation(sess):
            sess.state = session.state_from_json(payload)
        return {"ok": True, "behaviors": sorted(sess.state.registry.programs)}

    @app.post("/sessions/{session_id}/dataset")
    def post_dataset(session_id: str, payload: dict = Body(...)):
        sess = get_session(session_id)
        if "dataset" not in payload:
            raise EthoError("body must carry a 'dataset' object in the canonical JSON format")
        with _Mutation(sess):
            sess.dataset = trackdata.dataset_from_json(payload["dataset"])
            if "objects" in payload and payload["objects"] is not None:
                sess.state.objects = trackdata.objects_from_json(payload["objects"])
        d = sess.dataset
        return {
            "id": d.id,
            "n_frames": d.n_frames,
            "animal_ids": list(d.animal_ids),
            "bodypart_names": list(d.bodypart_names),
            "frame_size": list(d.frame_size),
            "objects": trackdata.get_object_names(sess.state.objects),
        }

    @app.get("/sessions/{session_id}/objects")
    def get_objects(session_id: str):
        sess = get_session(session_id)
        return {"objects": trackdata.get_object_names(sess.state.objects)}

    @app.post("/sessions/{session_id}/rois")
    def post_roi(session_id: str, payload: dict = Body(...)):
        sess = get_session(session_id)
        name = payload.get("name")
        polygon = payload.get("polygon")
        if not name or not isinstance(polygon, list):
            raise EthoError("body must carry 'name' and 'polygon' ([[x, y], ...])")
        with _Mutation(sess):
            sess.state.objects = trackdata.add_roi(sess.state.objects, name, polygon)
        return {"objects": trackdata.get_object_names(sess.state.objects)}

    @app.post("/sessions/{session_id}/backdrop")
    def post_backdrop(session_id: str, payload: dict = Body(...)):
        # optional still frame used purely as a drawing backdrop in the UI
        sess = get_session(session_id)
        if "image_base64" not in payload:
            raise EthoError("body must carry 'image_base64'")
        with _Mutation(sess):
            sess.backdrop = base64.b64decode(payload["image_base64"])
            sess.backdrop_type = payload.get("content_type", "image/png")
        return {"ok": True, "bytes": len(sess.backdrop)}

    @app.get("/sessions/{session_id}/backdrop")
    def get_backdrop(session_id: str):
        sess = get_session(session_id)
        if sess.backdrop is None:
            raise UnknownNameError("backdrop", session_id)
        return Response(sess.backdrop, media_type=sess.backdrop_type)

    @app.post("/sessions/{session_id}/utterance")
    def post_utterance(session_id: str, payload: dict = Body(...)):
        sess = get_session(session_id)
        if "text" not in payload:
            raise EthoError("body must carry 'text'")
        text = str(payload["text"])
        with _Mutation(sess):
            result = session.process_utterance(sess.state, text)
            defined = []
            diagnostics = []
            for block in extract_dsl_blocks(text):
                try:
                    defs = dsl.parse(block)
                    sess.state.registry = dsl.compile_defs(defs, sess.state.registry)
                    defined += [d.name for d in defs]
                except EthoSyntaxError as e:
                    diagnostics.append(
                        {"message": e.bare_message, "line": e.line, "col": e.col,
                         "expected": list(e.expected)}
                    )
                except EthoError as e:
                    diagnostics.append({"message": str(e), "line": None, "col": None, "expected": []})
        return {
            "resolved_context": result.resolved_context,
            "warnings": result.warnings,
            "defined": defined,
            "diagnostics": diagnostics,
            "symbols": sorted(sess.state.long.entries),
        }

    @app.post("/sessions/{session_id}/run")
    def post_run(session_id: str, payload: dict = Body(...)):
        sess = get_session(session_id)
        if "behavior" not in payload:
            raise EthoError("body must carry 'behavior'")
        d = need_dataset(sess)
        result = sess.state.registry.run(
            str(payload["behavior"]), d, sess.state.objects, payload.get("params") or None
        )
        return Response(canonical_json_bytes(events_to_json(result)), media_type="application/json")

    @app.get("/sessions/{session_id}/ethogram.svg")
    def get_ethogram(session_id: str, behaviors: str):
        sess = get_session(session_id)
        d = need_dataset(sess)
        names = [b for b in behaviors.split(",") if b]
        named = [(name, sess.state.registry.run(name, d, sess.state.objects)) for name in names]
        return Response(plots.render_ethogram(named).encode("utf-8"), media_type="image/svg+xml")

    @app.get("/sessions/{session_id}/trajectory.svg")
    def get_trajectory(session_id: str, animal: str, bodyparts: str = "all", behavior: str | None = None):
        sess = get_session(session_id)
        d = need_dataset(sess)
        events = None
        if behavior:
            events = sess.state.registry.run(behavior, d, sess.state.objects)
        svg = plots.render_trajectory(d, animal, bodyparts.split(","), events)
        return Response(svg.encode("utf-8"), media_type="image/svg+xml")

    @app.post("/retrieve")
    def post_retrieve(payload: dict = Body(...)):
        if "query" not in payload:
            raise EthoError("body must carry 'query'")
        k = int(payload.get("k", retrieval.DEFAULT_K))
        results = module_registry.query(retrieval.RetrievalQuery(str(payload["query"]), k))
        return {"results": [{"name": n, "score": s} for n, s in results]}

    ui_dir = Path(data_dir) / "ui" if data_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
