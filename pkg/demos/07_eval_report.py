"""Retrieval-completeness evaluation: fragmentation census and score table.

The completeness score for one paradigm and configuration is the mean over
applications of (kernels present in retrieved context / ground-truth
kernel count); 1.0 means every kernel made it into the context.

Run:  python demos/07_eval_report.py
"""

from pathlib import Path

from cello import (GroundTruth, HashingEmbedder, PATTERNS, RetrievalQuotas,
                   VectorCollection, chunk_code, fragment_census,
                   ingest_corpus, kernel_recall, render_report, retrieve)
from cello.chunking import chunk_code_fixed
from cello.evaluation import CompletenessEntry, CompletenessReport
from cello.retriever import AssembledContext

ROOT = Path(__file__).resolve().parent.parent / "tests/fixtures/minirepo"
TRUTH = {
    "cuda": GroundTruth("CUDA", "minirepo", 8),
    "openmp": GroundTruth("OpenMP", "minirepo", 5),
    "kokkos": GroundTruth("Kokkos", "minirepo", 4),
}

manifest = ingest_corpus(ROOT)
all_chunks = []
for entry in manifest.files:
    if entry.kind == "code":
        all_chunks.extend(chunk_code((ROOT / entry.path).read_bytes(),
                                     entry.path))

# --- 1. Fragmentation: routine-boundary vs fixed-window chunks -------------
window_chunks = []
for entry in manifest.files:
    if entry.kind == "code":
        window_chunks.extend(chunk_code_fixed(
            (ROOT / entry.path).read_bytes(), entry.path, window=200, overlap=0))
print("census, routine-boundary chunks:", fragment_census(all_chunks))
print("census, 200-byte window chunks: ", fragment_census(window_chunks))

# --- 2. Retrieval completeness via the built-in embedder -------------------
code = VectorCollection("code", HashingEmbedder(dims=256))
code.upsert(all_chunks)
text = VectorCollection("text", HashingEmbedder(dims=256))

reports = []
for paradigm, truth in TRUTH.items():
    query = (f"list every {truth.paradigm} kernel with its source file; "
             f"markers: {', '.join(PATTERNS[paradigm].identifiers)}")
    context = retrieve(query, RetrievalQuotas(code_k=25, text_k=0), code, text)
    retrieved_chunks = [c for c in all_chunks
                        if c.id in {h.chunk_id for h in context.code_hits}]
    recall = kernel_recall(retrieved_chunks, truth, PATTERNS[paradigm])
    reports.append(CompletenessReport(
        paradigm=truth.paradigm, configuration="hash-ngram retriever",
        entries=(CompletenessEntry(truth.application,
                                   min(recall.retrieved, truth.total_kernels),
                                   truth.total_kernels),)))

print("\n" + render_report(reports))

# --- 3. Why separate collections: the code/text split of a shared ranking --
# Rank code and text chunks against the same query on one score scale and
# take the top 50, as a single shared index would. Code crowds text out;
# per-collection quotas make the mix explicit instead.
from cello import chunk_text, code_text_split

text = VectorCollection("text", HashingEmbedder(dims=256))
for entry in manifest.files:
    if entry.kind == "text":
        text.upsert(chunk_text((ROOT / entry.path).read_text(), entry.path,
                               window=400, overlap=80))

query = "list every GPU kernel with its source file"
merged = sorted(code.query_text(query, len(code)) +
                text.query_text(query, len(text)),
                key=lambda h: (-h.score, h.chunk_id))
code_n, text_n = code_text_split(merged, 50)
print(f"shared ranking, top 50: code={code_n} text={text_n}")
quota_context = retrieve(query, RetrievalQuotas(code_k=25, text_k=25),
                         code, text)
print(f"quota retrieval:        code={len(quota_context.code_hits)} "
      f"text={len(quota_context.text_hits)}")
