"""Repository and document-corpus scanning.

Walks a source tree, classifies files as code or text by extension, and
emits a deterministic manifest (files sorted by path, stable content
hashes) that downstream chunking and indexing consume.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import IngestError

KIND_CODE = "code"
KIND_TEXT = "text"

DEFAULT_CODE_EXTENSIONS = {
    ".c": "cpp", ".cc": "cpp", ".cpp": "cpp", ".cxx": "cpp",
    ".h": "cpp", ".hh": "cpp", ".hpp": "cpp",
    ".cu": "cuda", ".cuh": "cuda",
    ".hip": "hip",
}
DEFAULT_TEXT_EXTENSIONS = {".md": "markdown", ".txt": "plain"}
DEFAULT_EXCLUDED_DIRS = frozenset({".git", ".svn", ".hg", "build", "_build",
                                   "__pycache__", "node_modules"})
DEFAULT_MAX_FILE_BYTES = 8 * 1024 * 1024


@dataclass(frozen=True)
class IngestConfig:
    code_extensions: dict[str, str] = field(
        default_factory=lambda: dict(DEFAULT_CODE_EXTENSIONS))
    text_extensions: dict[str, str] = field(
        default_factory=lambda: dict(DEFAULT_TEXT_EXTENSIONS))
    excluded_dirs: frozenset[str] = DEFAULT_EXCLUDED_DIRS
    max_file_bytes: int = DEFAULT_MAX_FILE_BYTES


@dataclass(frozen=True)
class SourceFile:
    path: str
    kind: str
    language: str
    byte_len: int
    content_hash: str


@dataclass
class CorpusManifest:
    root: str
    files: list[SourceFile]
    counts: dict[str, int]
    # Diagnostics; never serialized.
    skipped: list[tuple[str, str]] = field(default_factory=list)
    excluded_count: int = 0

    def to_json(self) -> str:
        doc = {
            "root": self.root,
            "files": [
                {"path": f.path, "kind": f.kind, "language": f.language,
                 "byte_len": f.byte_len, "content_hash": f.content_hash}
                for f in self.files
            ],
            "counts": {k: self.counts[k] for k in sorted(self.counts)},
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CorpusManifest":
        doc = json.loads(text)
        files = [SourceFile(**f) for f in doc["files"]]
        return cls(root=doc["root"], files=files, counts=dict(doc["counts"]))


def content_hash(data: bytes) -> str:
    """64-bit stable hash of file bytes, hex-encoded."""
    return hashlib.blake2b(data, digest_size=8).hexdigest()


def classify_file(path: str | Path, config: IngestConfig | None = None):
    """Map a filename to (kind, language), or None for excluded extensions."""
    config = config or IngestConfig()
    ext = Path(path).suffix.lower()
    if ext in config.code_extensions:
        return KIND_CODE, config.code_extensions[ext]
    if ext in config.text_extensions:
        return KIND_TEXT, config.text_extensions[ext]
    return None


def scan_repository(root: str | Path, config: IngestConfig | None = None,
                    only_kind: str | None = None) -> CorpusManifest:
    """Scan one directory tree into a manifest.

    Unreadable individual files are recorded as skipped, not fatal; an
    unreadable or missing root raises IngestError. With only_kind set,
    files of the other kind count as excluded (used for --text-root).
    """
    config = config or IngestConfig()
    root = Path(root)
    if not root.is_dir():
        raise IngestError(f"root is not a readable directory: {root}")

    files: list[SourceFile] = []
    skipped: list[tuple[str, str]] = []
    excluded = 0
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if d not in config.excluded_dirs)
        for fname in sorted(filenames):
            full = Path(dirpath) / fname
            if not full.is_file():
                continue
            rel = full.relative_to(root).as_posix()
            kind_lang = classify_file(fname, config)
            if kind_lang is None:
                excluded += 1
                continue
            kind, language = kind_lang
            if only_kind is not None and kind != only_kind:
                excluded += 1
                continue
            try:
                size = full.stat().st_size
                if size > config.max_file_bytes:
                    excluded += 1
                    continue
                data = full.read_bytes()
            except OSError as exc:
                skipped.append((rel, str(exc)))
                continue
            files.append(SourceFile(
                path=rel, kind=kind, language=language,
                byte_len=len(data), content_hash=content_hash(data)))

    files.sort(key=lambda f: f.path)
    manifest = CorpusManifest(root=str(root), files=files, counts={},
                              skipped=skipped, excluded_count=excluded)
    manifest.counts = _counts(root, files)
    return manifest


def _counts(root: Path, files: list[SourceFile]) -> dict[str, int]:
    code_files = 0
    text_files = 0
    code_lines = 0
    text_words = 0
    for f in files:
        data = (root / f.path).read_bytes()
        if f.kind == KIND_CODE:
            code_files += 1
            code_lines += data.count(b"\n")
        else:
            text_files += 1
            text_words += len(data.split())
    return {"code_files": code_files, "text_files": text_files,
            "code_lines": code_lines, "text_words": text_words}


def ingest_corpus(code_root: str | Path, text_root: str | Path | None = None,
                  config: IngestConfig | None = None) -> CorpusManifest:
    """Scan a code tree plus an optional separate document tree.

    All paths are recorded relative to code_root (text files from an outside
    tree get ``..``-style relative paths) so every manifest entry resolves
    against the single manifest root. Identical files found by both scans
    collapse to one entry; a path collision with differing content is fatal.
    """
    manifest = scan_repository(code_root, config)
    if text_root is None:
        return manifest
    texts = scan_repository(text_root, config, only_kind=KIND_TEXT)
    rebased = [
        replace(f, path=Path(os.path.relpath(Path(text_root) / f.path,
                                             code_root)).as_posix())
        for f in texts.files
    ]
    by_path = {f.path: f for f in manifest.files}
    for f in rebased:
        prior = by_path.get(f.path)
        if prior is None:
            by_path[f.path] = f
        elif prior.content_hash != f.content_hash:
            raise IngestError(f"path collision across roots: {f.path}")
    merged = sorted(by_path.values(), key=lambda f: f.path)
    return CorpusManifest(
        root=str(code_root), files=merged,
        counts=_counts(Path(code_root), merged),
        skipped=manifest.skipped + texts.skipped,
        excluded_count=manifest.excluded_count + texts.excluded_count)
