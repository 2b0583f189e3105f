"""Callgraph-aware prompt enrichment.

A cached callgraph (JSON produced at ingestion time) answers two-hop
lineage queries: immediate callers plus immediate callees. When the
ENHANCE_PROMPT_WITH_LINEAGE switch is on, the retriever appends one
natural-language lineage summary per resolved code symbol, so the model
sees how a routine sits in the execution flow before proposing changes.

Run:  python demos/04_lineage_prompts.py
"""

import json

from cello import (load_callgraph, summarize_lineage, two_hop_lineage,
                   enrich_with_lineage)
from cello.retriever import AssembledContext, ContextHit

# --- 1. A small callgraph for the mini-repo ------------------------------
document = json.dumps({
    "nodes": [
        {"id": "main", "path": "src/main.cpp"},
        {"id": "calo::simulate_hits", "path": "src/sim/calo_kernels.cu"},
        {"id": "calo::interpolate_energy", "path": "src/sim/calo_kernels.cu"},
        {"id": "calo::reset_cells", "path": "src/sim/calo_kernels.cu"},
    ],
    "edges": [
        ["main", "calo::simulate_hits"],
        ["main", "calo::reset_cells"],
        ["calo::simulate_hits", "calo::interpolate_energy"],
    ],
})
graph = load_callgraph(document)

for target in graph.nodes:
    print(summarize_lineage(two_hop_lineage(graph, target)))

# --- 2. Enrich a retrieved context ---------------------------------------
context = AssembledContext(
    query="can I change the interpolation?",
    symbols=(),
    code_hits=(
        ContextHit("c1", 0.91, "src/sim/calo_kernels.cu", "CodeRoutine",
                   "calo::simulate_hits", "__global__ void simulate_hits..."),
        ContextHit("c2", 0.88, "src/sim/calo_kernels.cu", "CodeRoutine",
                   "calo::interpolate_energy", "__device__ float interpolate..."),
    ),
    text_hits=())

enriched = enrich_with_lineage(context, graph, enabled=True)
print("\nlineage notes attached to the prompt:")
for note in enriched.lineage_notes:
    print(" ", note)

disabled = enrich_with_lineage(context, graph, enabled=False)
print("\nswitch off ->", disabled.lineage_notes)
