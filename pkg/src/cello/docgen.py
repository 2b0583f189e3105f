"""Guarded documentation generation.

Model output only ever lands inside /** ... */ comment blocks (with any
early-terminating `*/` sequences defused) or in sidecar .summary.md files,
so hallucinated code can never execute. Every generated block carries a
constant watermark line, which doubles as the idempotence marker: re-running
docgen replaces previously generated blocks instead of stacking new ones.
"""

from __future__ import annotations

import difflib
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, TextIO

from . import cst
from .chunking import CODE_ROUTINE, Chunk, chunk_code
from .errors import GenerationError
from .llm import LlmClient, LlmRequest
from .retriever import AssembledContext

WATERMARK = ("@note [LLM-generated] Generated by CelloAI-style docgen; "
             "verify before trusting.")

_SYSTEM_PROMPT = (
    "You write Doxygen documentation for C++/CUDA routines. Reply with the "
    "comment body only: one brief sentence, @param lines, and an @return "
    "line when applicable. No code blocks, no comment delimiters.")


@dataclass(frozen=True)
class DoxygenComment:
    target_symbol: str
    body: str
    watermark: str = WATERMARK

    @property
    def rendered(self) -> str:
        lines = ["/**"]
        for line in self.body.splitlines() or [""]:
            lines.append(f" * {line}".rstrip())
        lines.append(" *")
        lines.append(f" * {self.watermark}")
        lines.append(" */")
        return "\n".join(lines)


def sanitize_body(text: str) -> str:
    """Defuse comment terminators so the guard block cannot end early."""
    return text.replace("*/", "*\\/")


def routine_signature(chunk: Chunk) -> str:
    head = chunk.text.split("{", 1)[0].strip()
    return " ".join(head.split())


def document_routine(chunk: Chunk, context: AssembledContext, llm: LlmClient,
                     model: str = "local") -> DoxygenComment:
    """Ask the model for a comment body and wrap it in the guarded block.

    The prompt carries the routine signature plus retrieved documentation
    snippets; empty model output is a generation error so nothing is
    inserted.
    """
    if chunk.kind != CODE_ROUTINE:
        raise ValueError("document_routine requires a CodeRoutine chunk")
    snippets = "\n\n".join(
        f"// source: {h.path}\n{h.text}" for h in context.text_hits)
    prompt = (
        f"Signature:\n{routine_signature(chunk)}\n\n"
        f"Routine:\n{chunk.text}\n\n"
        f"Background material:\n{snippets if snippets else '(none)'}\n"
    )
    request = LlmRequest(model=model, messages=(
        {"role": "system", "content": _SYSTEM_PROMPT},
        {"role": "user", "content": prompt},
    ))
    response = llm.complete(request)
    body = sanitize_body(response.content.strip())
    if not body:
        raise GenerationError(
            f"model returned empty documentation for {chunk.symbol or chunk.id}")
    return DoxygenComment(target_symbol=chunk.symbol or "", body=body)


def insert_comment(source: bytes, span_start: int,
                   comment: DoxygenComment) -> bytes:
    """Insert (or replace) a generated block immediately above a routine.

    The block adopts the routine's indentation; every original byte
    survives except a previously generated (watermarked) block, which is
    replaced so repeated runs are a byte-level fixpoint.
    """
    if not 0 <= span_start <= len(source):
        raise ValueError(f"span start {span_start} out of bounds")
    line_start = source.rfind(b"\n", 0, span_start) + 1
    prefix = source[line_start:span_start]
    indent = prefix if not prefix.strip() else b""
    block = ("\n".encode() + indent).join(
        line.encode() for line in comment.rendered.split("\n"))
    insertion = block + b"\n" + indent
    replace_from = _generated_block_start(source, span_start)
    return source[:replace_from] + insertion + source[span_start:]


def _generated_block_start(source: bytes, span_start: int) -> int:
    """Start offset of a watermarked comment directly above the routine, or
    span_start when there is none (human comments are left in place)."""
    watermark = WATERMARK.encode()
    for token in reversed(cst.lex(source).tokens):
        if token.kind != cst.COMMENT or token.end > span_start:
            continue
        if source[token.end:span_start].strip() != b"":
            break
        if watermark in source[token.start:token.end]:
            return token.start
        break
    return span_start


def tokens_unchanged(original: bytes, modified: bytes) -> bool:
    """True when the non-comment token streams agree (the inertness check)."""
    return cst.significant_tokens(original) == cst.significant_tokens(modified)


def summarize_file(path: str, chunks: list[Chunk], context: AssembledContext,
                   llm: LlmClient, model: str = "local") -> str:
    """One markdown summary per file, headed by the path and the watermark.

    Written alongside the source as <path>.summary.md by the drivers; never
    into the source file itself.
    """
    routines = [c for c in chunks if c.kind == CODE_ROUTINE and c.path == path]
    header = f"# Summary: {path}\n\n{WATERMARK}\n\n"
    if not routines:
        return header + "No routines found in this file.\n"
    listing = "\n".join(f"- {c.symbol or c.id}" for c in routines)
    snippets = "\n\n".join(
        f"// source: {h.path}\n{h.text}" for h in context.text_hits)
    prompt = (
        f"Summarize the file {path} for a developer joining the project.\n\n"
        f"Routines:\n{listing}\n\n"
        f"Background material:\n{snippets if snippets else '(none)'}\n"
    )
    request = LlmRequest(model=model, messages=(
        {"role": "system", "content": "You summarize scientific C++ source files "
                                      "in a few short markdown paragraphs."},
        {"role": "user", "content": prompt},
    ))
    response = llm.complete(request)
    body = response.content.strip()
    if not body:
        raise GenerationError(f"model returned empty summary for {path}")
    return header + body + "\n"


ContextProvider = Callable[[Chunk], AssembledContext]


def _no_context(chunk: Chunk) -> AssembledContext:
    return AssembledContext.empty(chunk.symbol or chunk.path)


def document_file(source: bytes, path: str, llm: LlmClient,
                  context_for: ContextProvider = _no_context,
                  model: str = "local") -> bytes:
    """Document every routine of one file.

    Generation runs in span order (reproducible prompts and diffs);
    insertions are applied bottom-up so earlier offsets stay valid.
    """
    chunks = chunk_code(source, path)
    routines = sorted((c for c in chunks if c.kind == CODE_ROUTINE),
                      key=lambda c: c.span[0])
    generated = [
        (chunk.span[0] + _trivia_offset(chunk),
         document_routine(chunk, context_for(chunk), llm, model=model))
        for chunk in routines
    ]
    updated = source
    for routine_start, comment in reversed(generated):
        updated = insert_comment(updated, routine_start, comment)
    return updated


def _trivia_offset(chunk: Chunk) -> int:
    """Bytes of attached leading comments before the definition itself."""
    data = chunk.text.encode("utf-8")
    for token in cst.lex(data).tokens:
        if token.kind != cst.COMMENT:
            return token.start
    return 0


def document_repository(root: str | Path, paths: list[str], llm: LlmClient,
                        context_for: ContextProvider = _no_context,
                        model: str = "local", dry_run: bool = False,
                        summaries: bool = False,
                        out: TextIO | None = None) -> list[str]:
    """Drive docgen over a repository: files lexicographic, routines by span.

    dry_run renders unified diffs to ``out`` instead of touching files.
    Returns the list of files that changed (or would change).
    """
    root = Path(root)
    changed: list[str] = []
    for rel in sorted(paths):
        full = root / rel
        source = full.read_bytes()
        updated = document_file(source, rel, llm, context_for, model=model)
        if summaries:
            chunks = chunk_code(source, rel)
            summary = summarize_file(rel, chunks,
                                     context_for(chunks[0]) if chunks
                                     else AssembledContext.empty(rel),
                                     llm, model=model)
            if not dry_run:
                Path(str(full) + ".summary.md").write_text(summary, "utf-8")
        if updated == source:
            continue
        changed.append(rel)
        if dry_run:
            diff = difflib.unified_diff(
                source.decode("utf-8", "replace").splitlines(keepends=True),
                updated.decode("utf-8", "replace").splitlines(keepends=True),
                fromfile=f"a/{rel}", tofile=f"b/{rel}")
            (out or sys.stdout).writelines(diff)
        else:
            full.write_bytes(updated)
    return changed
