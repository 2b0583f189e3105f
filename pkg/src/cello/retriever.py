"""Dual-collection retrieval with exact-symbol re-ranking.

Each query is encoded twice — once per collection's embedding model — and
per-collection quotas are filled independently. A pattern-matching pass then
partitions every hit list so hits containing a backquoted query symbol come
first, preserving score order inside each group. Optionally, callgraph
lineage summaries are appended for resolved code symbols.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

from .callgraph import CallGraph, summarize_lineage, two_hop_lineage
from .errors import TemplateError
from .vectorstore import VectorCollection

LINEAGE_FLAG = "ENHANCE_PROMPT_WITH_LINEAGE"
CODE_TOP_K = "CODE_TOP_K"
TEXT_TOP_K = "TEXT_TOP_K"

BACKQUOTE = "```"

DEFAULT_PROMPT_TEMPLATE = """You are a coding assistant for a scientific HPC codebase.
Use only the material below; cite file paths when referring to code.

## Question
{QUERY}

## Retrieved code
{CODE_CONTEXT}

## Retrieved documentation
{TEXT_CONTEXT}

## Call-chain notes
{LINEAGE}
"""


@dataclass(frozen=True)
class RetrievalQuotas:
    code_k: int = 25
    text_k: int = 25

    def __post_init__(self):
        if self.code_k < 0 or self.text_k < 0:
            raise ValueError("quotas must be non-negative")


@dataclass(frozen=True)
class ContextHit:
    chunk_id: str
    score: float
    path: str
    kind: str
    symbol: str | None
    text: str


@dataclass(frozen=True)
class AssembledContext:
    query: str
    symbols: tuple[str, ...]
    code_hits: tuple[ContextHit, ...]
    text_hits: tuple[ContextHit, ...]
    lineage_notes: tuple[str, ...] = ()
    diagnostics: tuple[str, ...] = ()

    @classmethod
    def empty(cls, query: str) -> "AssembledContext":
        return cls(query=query, symbols=tuple(extract_backquoted_symbols(query)),
                   code_hits=(), text_hits=())

    def chunk_ids(self) -> tuple[str, ...]:
        return tuple(h.chunk_id for h in self.code_hits + self.text_hits)

    def to_json(self) -> str:
        doc = {
            "query": self.query,
            "symbols": list(self.symbols),
            "code_hits": [_hit_doc(h) for h in self.code_hits],
            "text_hits": [_hit_doc(h) for h in self.text_hits],
            "lineage_notes": list(self.lineage_notes),
            "diagnostics": list(self.diagnostics),
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _hit_doc(hit: ContextHit) -> dict[str, Any]:
    return {"chunk_id": hit.chunk_id, "score": hit.score, "path": hit.path,
            "kind": hit.kind, "symbol": hit.symbol, "text": hit.text}


def extract_backquoted_symbols(query: str) -> list[str]:
    """Contents of balanced triple-backquote spans, in order, trimmed.

    A trailing unbalanced opener yields no span.
    """
    out: list[str] = []
    i = 0
    while True:
        a = query.find(BACKQUOTE, i)
        if a < 0:
            break
        b = query.find(BACKQUOTE, a + 3)
        if b < 0:
            break
        out.append(query[a + 3:b].strip())
        i = b + 3
    return out


def rerank_by_symbols(hits: list[ContextHit], symbols: list[str]) -> list[ContextHit]:
    """Stable partition: symbol-matching hits first, score order kept inside
    each group. Empty symbols never match; no symbols means identity."""
    needles = [s for s in symbols if s]
    if not needles:
        return list(hits)
    matching = [h for h in hits if any(s in h.text for s in needles)]
    rest = [h for h in hits if not any(s in h.text for s in needles)]
    return matching + rest


def retrieve(query: str, quotas: RetrievalQuotas, code: VectorCollection,
             text: VectorCollection) -> AssembledContext:
    """Encode the query against both collections and assemble context."""
    symbols = extract_backquoted_symbols(query)
    code_hits = _collection_hits(query, code, quotas.code_k)
    text_hits = _collection_hits(query, text, quotas.text_k)
    return AssembledContext(
        query=query,
        symbols=tuple(symbols),
        code_hits=tuple(rerank_by_symbols(code_hits, symbols)),
        text_hits=tuple(rerank_by_symbols(text_hits, symbols)),
    )


def _collection_hits(query: str, collection: VectorCollection,
                     k: int) -> list[ContextHit]:
    if k == 0 or len(collection) == 0:
        return []
    hits = collection.query_text(query, k)
    return [
        ContextHit(chunk_id=h.chunk_id, score=h.score,
                   path=h.metadata["path"], kind=h.metadata["kind"],
                   symbol=h.metadata["symbol"],
                   text=collection.text_of(h.chunk_id))
        for h in hits
    ]


def enrich_with_lineage(context: AssembledContext, graph: CallGraph | None,
                        enabled: bool) -> AssembledContext:
    """Append one lineage summary per resolved code-hit symbol (deduplicated).

    Disabled means no lineage notes and an otherwise unchanged context.
    Symbols absent from the graph are skipped and recorded as diagnostics.
    """
    if not enabled:
        return replace(context, lineage_notes=())
    if graph is None:
        raise ValueError("lineage enabled but no callgraph loaded")
    notes: list[str] = []
    diagnostics = list(context.diagnostics)
    seen: set[str] = set()
    for hit in context.code_hits:
        symbol = hit.symbol
        if not symbol or symbol in seen:
            continue
        seen.add(symbol)
        if symbol in graph:
            notes.append(summarize_lineage(two_hop_lineage(graph, symbol)))
        else:
            diagnostics.append(f"symbol not in callgraph: {symbol}")
    return replace(context, lineage_notes=tuple(notes),
                   diagnostics=tuple(diagnostics))


def render_prompt(context: AssembledContext,
                  template: str = DEFAULT_PROMPT_TEMPLATE) -> str:
    """Fill {QUERY}, {CODE_CONTEXT}, {TEXT_CONTEXT}, {LINEAGE} placeholders;
    every snippet is preceded by a '// source: <path>' provenance line."""
    for placeholder in ("{QUERY}", "{CODE_CONTEXT}", "{TEXT_CONTEXT}", "{LINEAGE}"):
        if placeholder not in template:
            raise TemplateError(f"template missing placeholder {placeholder}")
    code_section = "\n\n".join(
        f"// source: {h.path}\n{h.text}" for h in context.code_hits)
    text_section = "\n\n".join(
        f"// source: {h.path}\n{h.text}" for h in context.text_hits)
    lineage_section = "\n".join(context.lineage_notes)
    return (template
            .replace("{QUERY}", context.query)
            .replace("{CODE_CONTEXT}", code_section)
            .replace("{TEXT_CONTEXT}", text_section)
            .replace("{LINEAGE}", lineage_section))


@dataclass(frozen=True)
class RetrieverConfig:
    code_k: int = 25
    text_k: int = 25
    lineage: bool = False

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> "RetrieverConfig":
        return cls(
            code_k=int(mapping.get(CODE_TOP_K, 25)),
            text_k=int(mapping.get(TEXT_TOP_K, 25)),
            lineage=bool(mapping.get(LINEAGE_FLAG, False)),
        )

    def quotas(self) -> RetrievalQuotas:
        return RetrievalQuotas(code_k=self.code_k, text_k=self.text_k)
