"""HTTP API consumed by the playground UI (and any other client).

Endpoints: health, raster->SVG conversion, deterministic rendering,
referring-style element selection, and a chat endpoint that drives SVG edits
through a pluggable responder.  Sessions live in memory with a TTL; nothing
touches a live LLM unless a credential is explicitly configured.
"""

from __future__ import annotations

import io
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, File, HTTPException, UploadFile
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .core import (
    Color,
    NAMED_COLORS,
    Recolor,
    Remove,
    Scale,
    SvgDocument,
    edit_elements,
    select_elements,
    serialize_svg,
    with_ids,
)
from .errors import EmptyForeground, SvglabError
from .llm import Responder, extract_svg
from .parser import parse_svg_with_warnings
from .prompts import PromptTemplate, user_exchange
from .raster import RasterImage, rasterize
from .vectorize import VectorizeConfig, vectorize

SESSION_TTL_SECONDS = 30 * 60

EDIT_PROMPT = PromptTemplate(
    "edit",
    "You are editing an SVG image. Reply with the full edited SVG document.\n"
    "Current SVG: <SVG>\nInstruction: <INSTRUCTION>",
)

_VARIANT_WORDS = {
    "circle": "circle", "circles": "circle",
    "rect": "rect", "rects": "rect", "rectangle": "rect", "rectangles": "rect",
    "square": "rect", "squares": "rect", "box": "rect", "boxes": "rect",
    "polygon": "polygon", "polygons": "polygon", "triangle": "polygon",
    "triangles": "polygon", "path": "path", "paths": "path",
}
_REMOVE_WORDS = {"remove", "delete", "erase", "drop"}
_RECOLOR_WORDS = {"recolor", "color", "colour", "paint", "make", "turn"}
_GROW_WORDS = {"bigger", "larger", "grow", "enlarge", "double"}
_SHRINK_WORDS = {"smaller", "shrink", "halve", "half"}


@dataclass
class ParsedInstruction:
    action: Optional[object] = None  # core EditAction
    fill: Optional[Color] = None
    variant: Optional[str] = None
    ids: tuple[str, ...] = ()


def parse_instruction(text: str, doc: SvgDocument) -> ParsedInstruction:
    """Rule-based reading of an edit/selection instruction.

    Vocabulary: the nine named colors, shape-kind words, and element ids
    (bare or #-prefixed).  When an action verb is present the last color
    word names the recolor target and any earlier color word selects.
    """
    words = re.findall(r"#?[\w-]+", text.lower())
    known_ids = set(doc.ids())
    ids = tuple(w.lstrip("#") for w in words if w.lstrip("#") in known_ids)
    colors = [w for w in words if w in NAMED_COLORS]
    variants = [_VARIANT_WORDS[w] for w in words if w in _VARIANT_WORDS]

    action = None
    if any(w in _REMOVE_WORDS for w in words):
        action = Remove()
    elif any(w in _GROW_WORDS for w in words):
        action = Scale(2.0)
    elif any(w in _SHRINK_WORDS for w in words):
        action = Scale(0.5)
    elif any(w in _RECOLOR_WORDS for w in words) and colors:
        action = Recolor(Color(*NAMED_COLORS[colors[-1]]))
        colors = colors[:-1]

    fill = Color(*NAMED_COLORS[colors[0]]) if colors else None
    variant = variants[0] if variants else None
    return ParsedInstruction(action=action, fill=fill, variant=variant, ids=ids)


def select_by_instruction(doc: SvgDocument, instruction: str) -> list[str]:
    parsed = parse_instruction(instruction, doc)
    if parsed.ids:
        return select_elements(doc, ids=parsed.ids)
    if parsed.fill is None and parsed.variant is None:
        return []
    return select_elements(doc, fill=parsed.fill, variant=parsed.variant)


class RulesResponder:
    """Offline chat handler: parses the instruction and edits the SVG itself."""

    name = "rules"

    def respond(self, doc: Optional[SvgDocument], message: str) -> tuple[str, Optional[SvgDocument]]:
        if doc is None:
            return ("Upload or paste an SVG first; then ask me to select, recolor, "
                    "resize, or remove elements.", None)
        parsed = parse_instruction(message, doc)
        if parsed.ids:
            ids = list(parsed.ids)
        elif parsed.fill is not None or parsed.variant is not None:
            ids = select_elements(doc, fill=parsed.fill, variant=parsed.variant)
        else:
            ids = []
        if not ids:
            return ("No elements match that instruction. I understand the nine "
                    "named colors, shape kinds, and element ids.", None)
        if parsed.action is None:
            return (f"Matching elements: {', '.join(ids)}.", None)
        edited = edit_elements(doc, ids, parsed.action)
        verb = type(parsed.action).__name__.lower()
        return (f"Applied {verb} to {', '.join(ids)}.\n{serialize_svg(edited)}", edited)


@dataclass
class Session:
    history: list = field(default_factory=list)
    svg: Optional[str] = None
    touched: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    def __init__(self, ttl: float = SESSION_TTL_SECONDS):
        self.ttl = ttl
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def get(self, session_id: str) -> Session:
        now = time.monotonic()
        with self._lock:
            expired = [k for k, s in self._sessions.items() if now - s.touched > self.ttl]
            for k in expired:
                del self._sessions[k]
            session = self._sessions.setdefault(session_id, Session())
            session.touched = now
            return session


class ChatRequest(BaseModel):
    session_id: str
    message: str
    svg: Optional[str] = None


class RenderRequest(BaseModel):
    svg: str
    width: int = 224
    height: int = 224


class SelectRequest(BaseModel):
    svg: str
    instruction: str


def _parse_or_422(svg_text: str) -> SvgDocument:
    try:
        doc, warnings = parse_svg_with_warnings(svg_text)
    except SvglabError as exc:
        raise HTTPException(status_code=422,
                            detail={"error": type(exc).__name__, "message": str(exc)})
    return doc


def _element_lines(doc: SvgDocument) -> dict[str, str]:
    doc = with_ids(doc)
    lines = serialize_svg(doc).splitlines()[1:-1]
    return {el.id: line for el, line in zip(doc.elements, lines)}


def _changed_ids(before: Optional[str], after: SvgDocument) -> list[str]:
    after_lines = _element_lines(after)
    before_lines: dict[str, str] = {}
    if before:
        try:
            before_lines = _element_lines(parse_svg_with_warnings(before)[0])
        except SvglabError:
            pass
    changed = {ident for ident, line in after_lines.items()
               if before_lines.get(ident) != line}
    changed.update(ident for ident in before_lines if ident not in after_lines)
    return sorted(changed)


def create_app(responder: Optional[Responder] = None,
               session_ttl: float = SESSION_TTL_SECONDS,
               ui_dir: Optional[str] = None) -> FastAPI:
    """Build the API app; `responder=None` selects the offline rules handler.

    When `ui_dir` points at the built playground (index.html + dist/), it is
    served same-origin at /.
    """
    app = FastAPI(title="svglab")
    rules = RulesResponder()
    sessions = SessionStore(ttl=session_ttl)

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/convert")
    async def convert(file: UploadFile = File(...), mode: str = "binary",
                      invert: bool = False):
        data = await file.read()
        if len(data) > 5 * 1024 * 1024:
            raise HTTPException(status_code=422, detail={"error": "TooLarge"})
        try:
            from PIL import Image
            import numpy as np

            with Image.open(io.BytesIO(data)) as im:
                im = im.convert("RGB")
                img = RasterImage(np.asarray(im, dtype=np.uint8))
        except Exception as exc:
            raise HTTPException(status_code=422,
                                detail={"error": "UnsupportedFormat", "message": str(exc)})
        cfg = VectorizeConfig(mode=mode, invert=invert, min_patch_px=4,
                              corner_angle_deg=60.0)
        try:
            doc = vectorize(img, cfg)
        except EmptyForeground as exc:
            raise HTTPException(status_code=422,
                                detail={"error": "EmptyForeground", "message": str(exc)})
        return Response(content=serialize_svg(with_ids(doc)),
                        media_type="image/svg+xml")

    @app.post("/api/render")
    def render(req: RenderRequest):
        doc = _parse_or_422(req.svg)
        if not 1 <= req.width <= 2048 or not 1 <= req.height <= 2048:
            raise HTTPException(status_code=422, detail={"error": "BadSize"})
        img = rasterize(doc, req.width, req.height)
        from PIL import Image

        buf = io.BytesIO()
        Image.fromarray(img.pixels, mode="RGB").save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.post("/api/select")
    def select(req: SelectRequest):
        doc = with_ids(_parse_or_422(req.svg))
        return {"ids": select_by_instruction(doc, req.instruction)}

    @app.post("/api/chat")
    def chat(req: ChatRequest):
        session = sessions.get(req.session_id)
        with session.lock:  # sessions are independently serialized
            if req.svg is not None:
                _parse_or_422(req.svg)
                session.svg = req.svg
            current_doc = None
            if session.svg:
                current_doc = with_ids(_parse_or_422(session.svg))

            if responder is None:
                reply, edited = rules.respond(current_doc, req.message)
                new_svg = serialize_svg(edited) if edited is not None else None
            else:
                prompt = EDIT_PROMPT.render({
                    "SVG": session.svg or "(none)",
                    "INSTRUCTION": req.message,
                })
                try:
                    reply = responder(user_exchange(prompt))
                except SvglabError as exc:
                    raise HTTPException(status_code=502,
                                        detail={"error": type(exc).__name__,
                                                "message": str(exc)})
                candidate = extract_svg(reply)
                new_svg = serialize_svg(with_ids(candidate)) if candidate is not None else None

            session.history.append({"role": "user", "text": req.message})
            session.history.append({"role": "assistant", "text": reply})
            payload: dict = {"reply": reply}
            if new_svg is not None:
                payload["svg"] = new_svg
                payload["elements_changed"] = _changed_ids(
                    session.svg, parse_svg_with_warnings(new_svg)[0])
        return JSONResponse(payload)

    if ui_dir is not None:
        from pathlib import Path

        from fastapi.staticfiles import StaticFiles

        root = Path(ui_dir)
        if (root / "index.html").exists():
            app.mount("/", StaticFiles(directory=root, html=True), name="ui")

    return app
