"""Dual-collection retrieval with exact-symbol re-ranking.

Code and text live in separate collections with independent quotas, so a
big codebase can never crowd documentation out of the context (or vice
versa). Backquoted symbols in the query jump matching chunks to the front
without touching their scores.

Run:  python demos/03_vector_retrieval.py
"""

from pathlib import Path

from cello import (HashingEmbedder, RetrievalQuotas, VectorCollection,
                   chunk_code, chunk_text, ingest_corpus, render_prompt,
                   retrieve)

ROOT = Path(__file__).resolve().parent.parent / "tests/fixtures/minirepo"

# --- 1. Index the corpus into two collections ----------------------------
manifest = ingest_corpus(ROOT)
code = VectorCollection("code", HashingEmbedder(dims=256))
text = VectorCollection("text", HashingEmbedder(dims=256))
for entry in manifest.files:
    data = (ROOT / entry.path).read_bytes()
    if entry.kind == "code":
        code.upsert(chunk_code(data, entry.path))
    else:
        text.upsert(chunk_text(data.decode(), entry.path, window=400, overlap=80))
print(f"indexed {len(code)} code chunks, {len(text)} text chunks")

# --- 2. Query without and with a backquoted symbol -----------------------
plain = retrieve("how is shower energy deposited?",
                 RetrievalQuotas(code_k=6, text_k=2), code, text)
print("\nplain query, code hits:")
for hit in plain.code_hits:
    print(f"  {hit.score:+.3f} {hit.symbol or '-':28s} {hit.path}")

# Backquote the identifier as it appears in source; every hit whose text
# contains it is partitioned to the front, scores untouched.
marked = retrieve("how does ```simulate_hits``` deposit energy?",
                  RetrievalQuotas(code_k=6, text_k=2), code, text)
print("\nsame question naming ```simulate_hits``` (* = exact match):")
for hit in marked.code_hits:
    tag = "*" if "simulate_hits" in hit.text else " "
    print(f" {tag}{hit.score:+.3f} {hit.symbol or '-':28s} {hit.path}")

# --- 3. Render the final prompt ------------------------------------------
prompt = render_prompt(marked)
print("\nrendered prompt starts:\n" + "\n".join(prompt.splitlines()[:12]))
