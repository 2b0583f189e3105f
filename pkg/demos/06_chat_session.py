"""A three-turn assistant conversation over the mini-repo, fully offline.

Conversation history is append-only and carried verbatim into every
request; each turn re-retrieves context for the new message and records
the chunk ids it used (the context digest). With the scripted model double
and the built-in embedder the whole transcript is reproducible bit for
bit.

Run:  python demos/06_chat_session.py
"""

from pathlib import Path

from cello import (ChatSession, HashingEmbedder, RetrievalQuotas,
                   ScriptedLlm, VectorCollection, chat_turn, chunk_code,
                   chunk_text, ingest_corpus, render_task_template,
                   retrieve, task_bindings)
from cello.chat import COLLECT_KERNELS

ROOT = Path(__file__).resolve().parent.parent / "tests/fixtures/minirepo"

# --- 1. Index ---------------------------------------------------------------
manifest = ingest_corpus(ROOT)
code = VectorCollection("code", HashingEmbedder(dims=256))
text = VectorCollection("text", HashingEmbedder(dims=256))
for entry in manifest.files:
    data = (ROOT / entry.path).read_bytes()
    if entry.kind == "code":
        code.upsert(chunk_code(data, entry.path))
    else:
        text.upsert(chunk_text(data.decode(), entry.path, window=400, overlap=80))


def retriever_fn(query):
    return retrieve(query, RetrievalQuotas(4, 2), code, text)


# --- 2. The kernel-collection task prompt ------------------------------------
task = render_task_template(COLLECT_KERNELS, task_bindings("cuda", "minirepo"))
print("task prompt (CUDA row):\n" + task[:260] + "...\n")

# --- 3. Three turns with a scripted model ------------------------------------
llm = ScriptedLlm([
    "Table 1: simulate_hits, reset_cells, interpolate_energy, ... (8 total)",
    "simulate_hits deposits parametrized shower energy per cell.",
    "Port: replace the launch with '#pragma omp target teams distribute'.",
])
session = ChatSession()
for message in (task,
                "explain ```calo::simulate_hits```",
                "port it to OpenMP"):
    turn = chat_turn(session, message, retriever_fn, llm)
    print(f"[assistant] {turn.content}")
    print(f"  context digest: {len(turn.attached_context_digest)} chunk ids\n")

print("transcript roles:", [t.role for t in session.turns])
print("history hash chain:", session.hash_chain())
