"""Local HTTP+JSON service backing the web chat client.

Framework-free (stdlib http.server): one ChatSession per session id with
idle expiry, per-session turn serialization, and optional static serving of
the single-page frontend.
"""

from __future__ import annotations

import json
import re
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Callable

from .chat import ChatConfig, ChatSession, chat_turn
from .errors import CelloError
from .llm import LlmClient
from .retriever import AssembledContext

# retrieve_fn(query, code_k, text_k, lineage) -> AssembledContext
RetrieveFn = Callable[[str, int, int, bool], AssembledContext]

_SNIPPET_LIMIT = 600

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


def _snippet(text: str) -> str:
    return text if len(text) <= _SNIPPET_LIMIT else text[:_SNIPPET_LIMIT] + "…"


class ChatService:
    """Session registry plus the chat use-case, independent of HTTP."""

    def __init__(self, retrieve_fn: RetrieveFn, llm: LlmClient,
                 config: ChatConfig | None = None,
                 default_code_k: int = 25, default_text_k: int = 25,
                 default_lineage: bool = False,
                 session_ttl: float = 3600.0,
                 clock: Callable[[], float] = time.time):
        self._retrieve = retrieve_fn
        self._llm = llm
        self._config = config or ChatConfig()
        self._defaults = (default_code_k, default_text_k, default_lineage)
        self._ttl = session_ttl
        self._clock = clock
        self._sessions: dict[str, ChatSession] = {}
        self._touched: dict[str, float] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._contexts: dict[tuple[str, int], AssembledContext] = {}

    def create_session(self) -> str:
        session = ChatSession(config={
            "code_k": self._defaults[0],
            "text_k": self._defaults[1],
            "lineage": self._defaults[2],
            "model": self._config.model,
        })
        with self._registry_lock:
            self._sessions[session.id] = session
            self._touched[session.id] = self._clock()
            self._locks[session.id] = threading.Lock()
        return session.id

    def get_session(self, session_id: str) -> ChatSession:
        self.expire_idle()
        with self._registry_lock:
            if session_id not in self._sessions:
                raise KeyError(session_id)
            self._touched[session_id] = self._clock()
            return self._sessions[session_id]

    def expire_idle(self) -> None:
        now = self._clock()
        with self._registry_lock:
            stale = [sid for sid, at in self._touched.items()
                     if now - at > self._ttl]
            for sid in stale:
                self._sessions.pop(sid, None)
                self._touched.pop(sid, None)
                self._locks.pop(sid, None)

    def chat(self, session_id: str, message: str,
             code_k: int | None = None, text_k: int | None = None,
             lineage: bool | None = None) -> dict[str, Any]:
        session = self.get_session(session_id)
        ck = self._defaults[0] if code_k is None else int(code_k)
        tk = self._defaults[1] if text_k is None else int(text_k)
        lin = self._defaults[2] if lineage is None else bool(lineage)
        captured: list[AssembledContext] = []

        def retriever_fn(query: str) -> AssembledContext:
            context = self._retrieve(query, ck, tk, lin)
            captured.append(context)
            return context

        with self._locks[session_id]:
            turn = chat_turn(session, message, retriever_fn, self._llm,
                             self._config)
            context = captured[0] if captured else AssembledContext.empty(message)
            self._contexts[(session_id, len(session.turns) - 1)] = context
            self._contexts[(session_id, len(session.turns) - 2)] = context
        return {
            "reply": turn.content,
            "context": {
                "code": [{"path": h.path, "chunk_id": h.chunk_id,
                          "snippet": _snippet(h.text)}
                         for h in context.code_hits],
                "text": [{"path": h.path, "chunk_id": h.chunk_id,
                          "snippet": _snippet(h.text)}
                         for h in context.text_hits],
                "lineage": list(context.lineage_notes),
            },
        }

    def transcript(self, session_id: str) -> dict[str, Any]:
        session = self.get_session(session_id)
        return {
            "session_id": session.id,
            "turns": [
                {"role": t.role, "content": t.content,
                 "attached_context_digest": list(t.attached_context_digest)}
                for t in session.turns
            ],
        }

    def context_digest(self, session_id: str, turn_index: int) -> dict[str, Any]:
        session = self.get_session(session_id)
        if not 0 <= turn_index < len(session.turns):
            raise KeyError(f"turn {turn_index}")
        return {"chunk_ids":
                list(session.turns[turn_index].attached_context_digest)}


def make_handler(service: ChatService, static_dir: str | Path | None = None):
    static_root = Path(static_dir).resolve() if static_dir else None

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send_json(self, doc: dict, status: int = 200) -> None:
            body = json.dumps(doc).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _read_json(self) -> dict:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length) if length else b"{}"
            return json.loads(raw.decode("utf-8"))

        def do_POST(self):
            try:
                if self.path == "/api/session":
                    self._send_json({"session_id": service.create_session()})
                    return
                if self.path == "/api/chat":
                    body = self._read_json()
                    try:
                        doc = service.chat(
                            body["session_id"], body["message"],
                            code_k=body.get("code_k"),
                            text_k=body.get("text_k"),
                            lineage=body.get("lineage"))
                    except KeyError as exc:
                        self._send_json({"error": f"not found: {exc}"}, 404)
                        return
                    self._send_json(doc)
                    return
                self._send_json({"error": "no such endpoint"}, 404)
            except (json.JSONDecodeError, TypeError) as exc:
                self._send_json({"error": f"bad request: {exc}"}, 400)
            except CelloError as exc:
                self._send_json({"error": str(exc)}, 502)

        def do_GET(self):
            if self.path == "/api/health":
                self._send_json({"status": "ok"})
                return
            match = re.fullmatch(r"/api/session/([0-9a-f-]+)", self.path)
            if match:
                try:
                    self._send_json(service.transcript(match.group(1)))
                except KeyError:
                    self._send_json({"error": "unknown session"}, 404)
                return
            match = re.fullmatch(r"/api/context/([0-9a-f-]+)/(\d+)", self.path)
            if match:
                try:
                    self._send_json(service.context_digest(
                        match.group(1), int(match.group(2))))
                except KeyError:
                    self._send_json({"error": "unknown session or turn"}, 404)
                return
            self._serve_static()

        def _serve_static(self):
            if static_root is None:
                self._send_json({"error": "no such endpoint"}, 404)
                return
            rel = self.path.lstrip("/") or "index.html"
            target = (static_root / rel).resolve()
            if not str(target).startswith(str(static_root)) or not target.is_file():
                self._send_json({"error": "not found"}, 404)
                return
            body = target.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", _CONTENT_TYPES.get(
                target.suffix, "application/octet-stream"))
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


def serve(bind_address: tuple[str, int], service: ChatService,
          static_dir: str | Path | None = None) -> ThreadingHTTPServer:
    """Bind the service; caller runs serve_forever() (or a thread does)."""
    handler = make_handler(service, static_dir)
    try:
        return ThreadingHTTPServer(bind_address, handler)
    except OSError as exc:
        raise CelloError(f"cannot bind {bind_address}: {exc}") from exc
