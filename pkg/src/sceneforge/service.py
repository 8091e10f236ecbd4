"""Session-scoped HTTP API: one text box in, complete scene state out.

A session owns a scene, a camera, a journal, and a seed.  Descriptions
rebuild the scene through the full generation pipeline; commands edit it
in place.  Every utterance draws its randomness from (session seed,
journal length), so replaying the utterance list reproduces the final
scene byte for byte.
"""

from __future__ import annotations

import json
import re
import secrets
import threading
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .camera import camera_to_wire
from .catalog import Catalog, Model
from .errors import (
    ParseError,
    ResolutionError,
    SceneforgeError,
    SceneStructureError,
    UnknownVerbError,
)
from .geometry import scene_to_wire
from .interact import JournalEntry, SceneState, apply_text, diff_changed
from .lang import (
    ObjectSpec,
    SceneTemplate,
    looks_declarative,
    operation_to_wire,
    parse_description,
    template_to_wire,
)
from .layout import CONDITIONS, LayoutConfig, generate
from .priors import KnowledgeBase

SAVE_VERSION = 1
MAX_SEED = 2**64


class UnknownResourceError(SceneforgeError):
    """Request names a session or model that does not exist."""


class SessionBusyError(SceneforgeError):
    """A command arrived while another was still being applied."""


@dataclass
class Session:
    id: str
    seed: int
    condition: str
    state: SceneState
    journal: list[JournalEntry] = field(default_factory=list)
    utterances: list[str] = field(default_factory=list)
    created_at: float = 0.0
    updated_at: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


def state_to_wire(z: SceneState, catalog: Catalog) -> dict:
    return {
        "scene": scene_to_wire(z.scene, catalog),
        "camera": camera_to_wire(z.camera),
        "selection": sorted(z.selection),
    }


def model_to_wire(m: Model) -> dict:
    """Box and metadata a renderer needs; no mesh data exists to ship."""
    return {
        "id": m.id,
        "category": m.category,
        "halfExtents": [float(x) for x in m.half_extents],
        "tags": list(m.tags),
        "attributes": sorted(list(kv) for kv in m.attributes),
        "surfaces": [
            {
                "normalClass": s.normal_class,
                "facing": s.facing,
                "center": [float(x) for x in s.center],
                "axes": [[float(x) for x in a] for a in s.axes],
            }
            for s in m.support_surfaces
        ],
    }


class SessionEngine:
    """Session store and command dispatcher shared by HTTP and the REPL."""

    def __init__(
        self,
        kb: KnowledgeBase,
        catalog: Catalog,
        cfg: LayoutConfig | None = None,
        clock=time.time,
    ):
        self.kb = kb
        self.catalog = catalog
        self.base_cfg = cfg if cfg is not None else LayoutConfig()
        self.clock = clock
        self.sessions: dict[str, Session] = {}

    def _cfg(self, condition: str, rng_key) -> LayoutConfig:
        return replace(self.base_cfg, flags=CONDITIONS[condition], rng_seed=rng_key)

    def _fresh_state(self, seed: int, condition: str) -> SceneState:
        t = SceneTemplate((ObjectSpec(0, "room"),))
        scene, t = generate(t, self.catalog, self.kb, self._cfg(condition, (seed,)))
        return SceneState(scene=scene, template=t)

    def create(self, seed: int | None = None, condition: str = "full") -> Session:
        if condition not in CONDITIONS:
            raise SceneforgeError(
                f"unknown condition {condition!r}; choose from {sorted(CONDITIONS)}"
            )
        if seed is None:
            seed = secrets.randbits(63)
        seed = int(seed)
        if not 0 <= seed < MAX_SEED:
            raise SceneforgeError("seed must fit in an unsigned 64-bit integer")
        now = float(self.clock())
        s = Session(
            id=secrets.token_hex(12),
            seed=seed,
            condition=condition,
            state=self._fresh_state(seed, condition),
            created_at=now,
            updated_at=now,
        )
        self.sessions[s.id] = s
        return s

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownResourceError(f"no session {session_id!r}") from None

    def submit(self, session_id: str, text: str) -> dict:
        """Apply one utterance; concurrent submissions are rejected, not queued."""
        s = self.get(session_id)
        if not s.lock.acquire(blocking=False):
            raise SessionBusyError(f"session {session_id} is busy with another command")
        try:
            return self._submit_locked(s, text)
        finally:
            s.lock.release()

    def _parse_declarative(self, text: str) -> SceneTemplate:
        try:
            return parse_description(text, self.catalog.taxonomy)
        except ParseError:
            # not a description; without a known verb it is not a command
            # either, so report the word that failed to be one
            first = re.search(r"[A-Za-z]+", text)
            if first is None or text.lower().lstrip().startswith("there"):
                raise
            raise UnknownVerbError(
                f"unknown verb {first.group().lower()!r}",
                (first.start(), first.end()),
            ) from None

    def _submit_locked(self, s: Session, text: str) -> dict:
        n = len(s.journal)
        cfg = self._cfg(s.condition, (s.seed, n))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if looks_declarative(text):
                t = self._parse_declarative(text)
                scene, t = generate(t, self.catalog, self.kb, cfg)
                new_state = SceneState(scene=scene, template=t, camera=s.state.camera)
                entries = [
                    JournalEntry(
                        timestamp=float(self.clock()),
                        raw_text=text,
                        parsed_op=None,
                        changed_ids=diff_changed(s.state.scene, scene),
                    )
                ]
                parsed: object = template_to_wire(t)
            else:
                rng = np.random.default_rng([s.seed, n])
                new_state, entries = apply_text(
                    s.state, text, self.kb, self.catalog, cfg, rng, clock=self.clock
                )
                parsed = [operation_to_wire(e.parsed_op) for e in entries]
        # state commits only after the whole utterance succeeded
        s.state = new_state
        s.journal.extend(entries)
        s.utterances.append(text)
        s.updated_at = float(self.clock())
        return {
            "parsed": parsed,
            "state": state_to_wire(new_state, self.catalog),
            "warnings": [str(w.message) for w in caught],
            "degradedFlag": bool(new_state.scene.degraded),
        }


def save_session(s: Session, path: str | Path) -> None:
    doc = {
        "version": SAVE_VERSION,
        "seed": s.seed,
        "condition": s.condition,
        "createdAt": s.created_at,
        "utterances": list(s.utterances),
        "journal": [e.to_wire() for e in s.journal],
    }
    Path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_session(path: str | Path, engine: SessionEngine) -> Session:
    """Recreate a saved session by replaying its utterances in the engine."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        version = doc["version"]
        seed = int(doc["seed"])
        condition = doc["condition"]
        utterances = list(doc["utterances"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise SceneforgeError(f"unreadable session file {path}: {exc}") from exc
    if version != SAVE_VERSION:
        raise SceneforgeError(f"unsupported session file version {version!r}")
    s = engine.create(seed=seed, condition=condition)
    for text in utterances:
        engine.submit(s.id, text)
    return s


def _error_payload(exc: SceneforgeError) -> tuple[int, dict]:
    if isinstance(exc, UnknownResourceError):
        status, code = 404, "not_found"
    elif isinstance(exc, SessionBusyError):
        status, code = 409, "busy"
    elif isinstance(exc, ParseError):
        status, code = 422, "parse_error"
    elif isinstance(exc, ResolutionError):
        status, code = 422, "resolution_error"
    elif isinstance(exc, SceneStructureError):
        status, code = 422, "invalid_operation"
    else:
        status, code = 422, "bad_request"
    payload: dict = {"code": code, "message": str(exc)}
    span = getattr(exc, "span", None)
    if span is not None:
        payload["span"] = list(span)
    return status, payload


def build_app(
    kb: KnowledgeBase,
    catalog: Catalog,
    cfg: LayoutConfig | None = None,
    clock=time.time,
):
    """FastAPI application over a fresh session engine."""
    from fastapi import Body, FastAPI, Request
    from fastapi.exceptions import RequestValidationError
    from fastapi.responses import JSONResponse

    engine = SessionEngine(kb, catalog, cfg, clock)
    app = FastAPI(title="sceneforge", docs_url=None, redoc_url=None)
    app.state.engine = engine

    @app.exception_handler(SceneforgeError)
    def _domain_error(request: Request, exc: SceneforgeError):
        status, payload = _error_payload(exc)
        return JSONResponse(status_code=status, content=payload)

    @app.exception_handler(RequestValidationError)
    def _body_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422, content={"code": "bad_request", "message": str(exc)}
        )

    @app.post("/sessions")
    def create_session(body: dict | None = Body(default=None)):
        body = body or {}
        s = engine.create(
            seed=body.get("seed"), condition=body.get("condition", "full")
        )
        return {
            "id": s.id,
            "seed": s.seed,
            "condition": s.condition,
            "state": state_to_wire(s.state, catalog),
        }

    @app.post("/sessions/{session_id}/text")
    def submit_text(session_id: str, body: dict = Body(...)):
        text = body.get("text")
        if not isinstance(text, str) or not text.strip():
            raise ParseError("request body must carry a non-empty 'text' field")
        return engine.submit(session_id, text)

    @app.get("/sessions/{session_id}/scene")
    def get_scene(session_id: str):
        return scene_to_wire(engine.get(session_id).state.scene, catalog)

    @app.get("/sessions/{session_id}/journal")
    def get_journal(session_id: str):
        s = engine.get(session_id)
        return {
            "seed": s.seed,
            "utterances": list(s.utterances),
            "entries": [e.to_wire() for e in s.journal],
        }

    @app.get("/catalog/models/{model_id}")
    def get_model(model_id: str):
        m = catalog.by_id.get(model_id)
        if m is None:
            raise UnknownResourceError(f"no model {model_id!r}")
        return model_to_wire(m)

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "models": len(catalog),
            "sessions": len(engine.sessions),
        }

    return app
