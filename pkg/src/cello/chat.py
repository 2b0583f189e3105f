"""Interactive assistant: append-only conversation memory, per-turn
retrieval-enriched prompting, and the paradigm task templates for kernel
collection and porting."""

from __future__ import annotations

import hashlib
import json
import logging
import uuid
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import CelloError, TemplateError
from .llm import LlmClient, LlmRequest
from .retriever import AssembledContext, render_prompt

log = logging.getLogger(__name__)

DEFAULT_SYSTEM_PROMPT = (
    "You are a local coding assistant for a scientific HPC codebase. "
    "Ground every answer in the retrieved code and documentation snippets.")

CHAT_TURN_TEMPLATE = """{QUERY}

### Retrieved code
{CODE_CONTEXT}

### Retrieved documentation
{TEXT_CONTEXT}

### Call-chain notes
{LINEAGE}
"""


@dataclass(frozen=True)
class Turn:
    role: str
    content: str
    attached_context_digest: tuple[str, ...] = ()


@dataclass
class ChatSession:
    """Append-only transcript; roles alternate user/assistant after an
    optional leading system turn."""

    id: str = field(default_factory=lambda: uuid.uuid4().hex)
    turns: list[Turn] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def append_turn(self, role: str, content: str,
                    digest: tuple[str, ...] = ()) -> Turn:
        if role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown role: {role}")
        if role == "system" and self.turns:
            raise ValueError("system turn must lead the session")
        if role in ("user", "assistant"):
            last = next((t.role for t in reversed(self.turns)
                         if t.role != "system"), None)
            expected = "user" if last in (None, "assistant") else "assistant"
            if role != expected:
                raise ValueError(f"expected a {expected} turn, got {role}")
        turn = Turn(role=role, content=content, attached_context_digest=digest)
        self.turns.append(turn)
        return turn

    def history_messages(self) -> list[dict[str, str]]:
        return [{"role": t.role, "content": t.content} for t in self.turns]

    def hash_chain(self) -> str:
        digest = hashlib.blake2b(digest_size=16)
        for turn in self.turns:
            digest.update(turn.role.encode())
            digest.update(turn.content.encode())
            digest.update("\x1f".join(turn.attached_context_digest).encode())
            digest.update(b"\x1e")
        return digest.hexdigest()

    def to_json(self) -> str:
        doc = {
            "session_id": self.id,
            "config": self.config,
            "turns": [
                {"role": t.role, "content": t.content,
                 "attached_context_digest": list(t.attached_context_digest)}
                for t in self.turns
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"


@dataclass(frozen=True)
class ChatConfig:
    model: str = "local"
    temperature: float = 0.2
    max_tokens: int = 1024
    context_token_budget: int = 8192
    system_prompt: str = DEFAULT_SYSTEM_PROMPT


def estimate_tokens(text: str) -> int:
    # 4 bytes/token heuristic
    return len(text.encode("utf-8")) // 4 + 1


RetrieverFn = Callable[[str], AssembledContext]


def chat_turn(session: ChatSession, user_message: str,
              retriever_fn: RetrieverFn, llm: LlmClient,
              config: ChatConfig | None = None) -> Turn:
    """Run one conversational turn.

    Retrieval runs on the raw user message; the LLM request carries the full
    history verbatim plus the current message wrapped with assembled
    context. Turns are appended only after the model answers, so a transport
    failure leaves the session untouched. Retrieval failure degrades to a
    context-free prompt with a recorded warning.
    """
    config = config or ChatConfig()
    try:
        context = retriever_fn(user_message)
    except CelloError as exc:
        context = AssembledContext.empty(user_message)
        warning = f"retrieval failed, continuing without context: {exc}"
        session.warnings.append(warning)
        log.warning("%s", warning)
    rendered = render_prompt(context, CHAT_TURN_TEMPLATE)
    history = session.history_messages()
    if not any(m["role"] == "system" for m in history):
        history.insert(0, {"role": "system", "content": config.system_prompt})
    messages = history + [{"role": "user", "content": rendered}]
    messages = _trim_to_budget(messages, config.context_token_budget)
    request = LlmRequest(model=config.model, messages=tuple(messages),
                         temperature=config.temperature,
                         max_tokens=config.max_tokens)
    response = llm.complete(request)
    digest = context.chunk_ids()
    session.append_turn("user", user_message, digest)
    return session.append_turn("assistant", response.content, digest)


def _trim_to_budget(messages: list[dict[str, str]],
                    budget: int) -> list[dict[str, str]]:
    """Drop oldest non-system turns first; never the current context."""
    def total() -> int:
        return sum(estimate_tokens(m["content"]) for m in messages)

    messages = list(messages)
    while total() > budget:
        droppable = next(
            (i for i, m in enumerate(messages[:-1]) if m["role"] != "system"),
            None)
        if droppable is None:
            break
        del messages[droppable]
    return messages


# --- task templates ----------------------------------------------------------

@dataclass(frozen=True)
class TaskTemplate:
    name: str
    body: str

    def placeholders(self) -> list[str]:
        return [p for p in ("BASE_IMPL", "IDENTIFIER", "PORT_IMPL", "NAME")
                if "{" + p + "}" in self.body]


COLLECT_KERNELS = TaskTemplate(
    name="collect_kernels",
    body=(
        "You are an expert high-performance computing software developer. "
        "I have a {BASE_IMPL} codebase called **{NAME}** for High-Energy "
        "Physics simulations. I need you to:\n"
        "1. **Scan the entire codebase** and identify every function "
        "implemented for GPU execution, marked with {IDENTIFIER}.\n"
        "2. **Output a flat list** of those function names under the heading "
        "Table 1, one per line, along with the source file path where each "
        "appears.\n"
        "First, **only produce the list of {BASE_IMPL} functions**. After "
        "you've confirmed the list, devise a strategy to replace each "
        "function with an equivalent {PORT_IMPL} version considering "
        "important operations like data transfer, memory initialization, "
        "floating point operations, and reduction. Do not write any code."
    ),
)

PORT_KERNELS = TaskTemplate(
    name="port_kernels",
    body=(
        "You are an expert GPU and high-performance computing software "
        "engineer. You will convert a set of {BASE_IMPL} {IDENTIFIER} "
        "kernels from the **{NAME}** project into equivalent, performant "
        "{PORT_IMPL} kernels using the above strategy. The resulting code "
        "must compile, target new GPU architectures, and integrate cleanly "
        "into the existing CMake build.\n"
        "1. For every {BASE_IMPL} function in Table 1 rewrite the "
        "implementation in {PORT_IMPL}.\n"
        "2. Preserve numerical results bit-wise where feasible (double "
        "precision).\n"
        "3. Insert explicit device memory management where the {BASE_IMPL} "
        "runtime previously handled mapping: allocate once per event batch "
        "and reuse.\n"
        "4. Use features from {PORT_IMPL} that are known to be more "
        "efficient.\n"
        "5. Supply a two-sentence performance note per kernel (expected "
        "speed-up, occupancy bottlenecks)."
    ),
)

TASK_TEMPLATES = {t.name: t for t in (COLLECT_KERNELS, PORT_KERNELS)}

# Keyword substitutions per programming model, matching the kernel patterns.
PARADIGM_BINDINGS: dict[str, dict[str, str]] = {
    "cuda": {"BASE_IMPL": "CUDA", "IDENTIFIER": "__global__, __device__",
             "PORT_IMPL": "OpenMP"},
    "kokkos": {"BASE_IMPL": "Kokkos", "IDENTIFIER": "Kokkos::parallel_for",
               "PORT_IMPL": "CUDA"},
    "openmp": {"BASE_IMPL": "OpenMP", "IDENTIFIER": "pragma omp target",
               "PORT_IMPL": "CUDA"},
}


def render_task_template(template: TaskTemplate,
                         bindings: Mapping[str, str]) -> str:
    """Substitute every placeholder; an unbound one is a template error."""
    text = template.body
    for placeholder in template.placeholders():
        if placeholder not in bindings:
            raise TemplateError(f"{placeholder} unbound")
        text = text.replace("{" + placeholder + "}", bindings[placeholder])
    return text


def task_bindings(paradigm: str, project_name: str) -> dict[str, str]:
    if paradigm not in PARADIGM_BINDINGS:
        raise ValueError(f"unknown paradigm: {paradigm}")
    bindings = dict(PARADIGM_BINDINGS[paradigm])
    bindings["NAME"] = project_name
    return bindings


def run_repl(session: ChatSession, retriever_fn: RetrieverFn, llm: LlmClient,
             config: ChatConfig | None = None,
             input_fn: Callable[[str], str] = input,
             print_fn: Callable[[str], None] = print) -> None:
    """Terminal loop; /exit quits, /paths shows last context provenance."""
    last_digest: tuple[str, ...] = ()
    print_fn("cello chat — /exit to quit")
    while True:
        try:
            line = input_fn(">>> ").strip()
        except EOFError:
            return
        if line in ("/exit", "/quit"):
            return
        if not line:
            continue
        if line == "/paths":
            print_fn("\n".join(last_digest) or "(no context yet)")
            continue
        try:
            turn = chat_turn(session, line, retriever_fn, llm, config)
        except CelloError as exc:
            print_fn(f"error: {exc}")
            continue
        last_digest = turn.attached_context_digest
        print_fn(turn.content)
