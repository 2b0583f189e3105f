"""Retrieval-quality metrics: completeness scores over kernel ground truth,
code/text split of unified retrieval, fragmentation census, and markdown
report rendering."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

from . import cst
from .chunking import (CODE_KINDS, CODE_PREAMBLE, Chunk, KernelPattern,
                       find_kernels)
from .vectorstore import ScoredHit


@dataclass(frozen=True)
class GroundTruth:
    paradigm: str
    application: str
    total_kernels: int
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.total_kernels <= 0:
            raise ValueError("total_kernels must be positive")
        if self.names is not None and self.total_kernels < len(self.names):
            raise ValueError("total_kernels below the number of named kernels")


@dataclass(frozen=True)
class CompletenessEntry:
    application: str
    retrieved: int
    total: int

    @property
    def ratio(self) -> float:
        return self.retrieved / self.total


@dataclass(frozen=True)
class CompletenessReport:
    paradigm: str
    configuration: str
    entries: tuple[CompletenessEntry, ...]

    @property
    def score(self) -> float:
        return sum(e.ratio for e in self.entries) / len(self.entries)


def round3(value: float) -> str:
    """Half-away-from-zero rounding to 3 decimals, applied at render time."""
    return str(Decimal(repr(value)).quantize(Decimal("0.001"),
                                             rounding=ROUND_HALF_UP))


def completeness_score(counts: Sequence[dict | tuple | CompletenessEntry],
                       paradigm: str = "", configuration: str = "",
                       applications: Sequence[str] | None = None) -> CompletenessReport:
    """Mean of per-application retrieved/total ratios.

    Accepts entries as CompletenessEntry, (retrieved, total) pairs, or
    {retrieved, total} mappings. A score of 1.0 means perfect retrieval.
    """
    if not counts:
        raise ValueError("counts must be non-empty")
    entries: list[CompletenessEntry] = []
    for i, item in enumerate(counts):
        if isinstance(item, CompletenessEntry):
            entry = item
        elif isinstance(item, dict):
            entry = CompletenessEntry(
                application=item.get("application",
                                     applications[i] if applications else f"app{i}"),
                retrieved=int(item["retrieved"]), total=int(item["total"]))
        else:
            retrieved, total = item
            entry = CompletenessEntry(
                application=applications[i] if applications else f"app{i}",
                retrieved=int(retrieved), total=int(total))
        if entry.total <= 0:
            raise ValueError(f"total must be positive ({entry.application})")
        if not 0 <= entry.retrieved <= entry.total:
            raise ValueError(
                f"retrieved must lie in [0, total] ({entry.application}: "
                f"{entry.retrieved}/{entry.total})")
        entries.append(entry)
    return CompletenessReport(paradigm=paradigm, configuration=configuration,
                              entries=tuple(entries))


@dataclass(frozen=True)
class RecallResult:
    retrieved: int
    found: tuple[str, ...]
    missing: tuple[str, ...]


def kernel_recall(chunks: Sequence[Chunk], truth: GroundTruth,
                  pattern: KernelPattern) -> RecallResult:
    """Count ground-truth kernels present in retrieved chunks.

    With named truth, retrieved counts the name intersection and missing
    lists absent names; otherwise retrieved is the deduplicated kernel count.
    """
    if truth.paradigm != pattern.paradigm:
        raise ValueError(
            f"truth paradigm {truth.paradigm} != pattern {pattern.paradigm}")
    scan = find_kernels(list(chunks), pattern)
    found_names = sorted({ref.name for ref in scan.unique})
    if truth.names is None:
        return RecallResult(retrieved=len(scan.unique),
                            found=tuple(found_names), missing=())
    truth_set = set(truth.names)
    matched = sorted(truth_set & set(found_names))
    missing = sorted(truth_set - set(found_names))
    return RecallResult(retrieved=len(matched), found=tuple(matched),
                        missing=tuple(missing))


def code_text_split(hits: Sequence[ScoredHit], n: int) -> tuple[int, int]:
    """Code/text kind counts over the first min(n, |hits|) hits."""
    if n <= 0:
        raise ValueError("n must be positive")
    window = hits[:n]
    code = sum(1 for h in window if h.metadata.get("kind") in CODE_KINDS)
    return code, len(window) - code


def fragment_census(chunks: Sequence[Chunk]) -> dict[str, int]:
    """Partial/complete routine census over retrieved code chunks.

    complete: begins at a routine start with balanced delimiters;
    partial:  begins or ends mid-routine;
    chunks that touch no routine (includes/preamble only) count in neither.
    Chunks must carry boundary metadata (the CST chunker stamps it; window
    chunks get it from annotate_routine_boundaries).
    """
    partial = 0
    complete = 0
    for chunk in chunks:
        if chunk.kind not in CODE_KINDS or chunk.kind == CODE_PREAMBLE:
            continue
        if chunk.starts_mid_routine or chunk.ends_mid_routine:
            partial += 1
        elif chunk.covers_routine and chunk.balanced:
            complete += 1
    return {"partial": partial, "complete": complete}


def render_report(reports: Sequence[CompletenessReport]) -> str:
    """Deterministic markdown: one row per (application, configuration)."""
    lines = [
        "| Paradigm | Configuration | Application | Retrieved | Total | Ratio | Score |",
        "|---|---|---|---|---|---|---|",
    ]
    for report in reports:
        score = round3(report.score)
        for entry in report.entries:
            lines.append(
                f"| {report.paradigm} | {report.configuration} "
                f"| {entry.application} | {entry.retrieved} | {entry.total} "
                f"| {round3(entry.ratio)} | {score} |")
    return "\n".join(lines) + "\n"


def balanced_delimiters(chunk: Chunk) -> bool:
    """Recompute delimiter balance from chunk text (census helper)."""
    return cst.delimiters_balanced(chunk.text.encode("utf-8"))
