"""Walk the bundled mini-repo, classify files, and chunk code along
routine boundaries.

Run from the repository root:  python demos/01_ingest_and_chunk.py
"""

from pathlib import Path

from cello import chunk_code, ingest_corpus

ROOT = Path(__file__).resolve().parent.parent / "tests/fixtures/minirepo"

# --- 1. Scan the corpus -------------------------------------------------
# Every file is classified by extension (code vs text); unknown extensions
# like data/table.bin are excluded. The manifest is deterministic: rescan
# an unchanged tree and you get byte-identical JSON.
manifest = ingest_corpus(ROOT)
print("corpus counts:", manifest.counts)
for entry in manifest.files:
    print(f"  {entry.kind:4s} {entry.language:8s} {entry.path}")

# --- 2. Chunk one CUDA file ---------------------------------------------
# The chunker parses the file and emits one chunk per top-level function
# or class definition; directives and declarations between definitions
# become preamble chunks. Nothing is lost, nothing overlaps.
path = "src/sim/calo_kernels.cu"
chunks = chunk_code((ROOT / path).read_bytes(), path)
print(f"\n{path} -> {len(chunks)} chunks")
for chunk in chunks:
    head = chunk.text.splitlines()[0][:60]
    print(f"  [{chunk.kind:16s}] {chunk.symbol or '-':30s} {head}")

# Each routine chunk is self-contained: balanced braces, re-parseable in
# isolation. That is the property that keeps retrieved snippets whole.
routine = next(c for c in chunks if c.kind == "CodeRoutine")
print("\nfirst routine chunk:\n" + routine.text)
