import logging
import random

import pytest
from hypothesis import given, settings, strategies as st

from cello import cst, chunking
from cello.chunking import (CODE_CONTINUATION, CODE_PREAMBLE, CODE_ROUTINE,
                            TEXT, Chunk, ChunkLimits, PATTERNS, chunk_code,
                            chunk_code_fixed, chunk_text, find_kernels,
                            reassemble_text)
from conftest import MINIREPO_KERNELS


def _routines(chunks):
    return [c for c in chunks if c.kind == CODE_ROUTINE]


class TestChunkCode:
    def test_single_function_single_chunk(self):
        src = b"int add(int a, int b) { return a + b; }\n"
        chunks = chunk_code(src, "one.cpp")
        assert len(chunks) == 1
        assert chunks[0].kind == CODE_ROUTINE
        assert chunks[0].text == "int add(int a, int b) { return a + b; }"
        assert chunks[0].symbol == "add"

    def test_three_functions_three_routine_chunks(self):
        src = b"\n".join(
            b"int f%d() { return %d; }" % (i, i) for i in range(3)) + b"\n"
        chunks = chunk_code(src, "three.cpp")
        routines = _routines(chunks)
        assert len(routines) == 3
        assert all(c.part_total == 1 for c in routines)
        assert [c.symbol for c in routines] == ["f0", "f1", "f2"]

    def test_preamble_collects_directives(self):
        src = (b"#include <vector>\n#include <cmath>\nusing std::vector;\n\n"
               b"int f() { return 0; }\n")
        chunks = chunk_code(src, "pre.cpp")
        assert chunks[0].kind == CODE_PREAMBLE
        assert "#include <vector>" in chunks[0].text
        assert chunks[1].kind == CODE_ROUTINE

    def test_spans_ordered_and_disjoint(self, minirepo_code_chunks):
        by_path = {}
        for c in minirepo_code_chunks:
            by_path.setdefault(c.path, []).append(c)
        for path_chunks in by_path.values():
            spans = [c.span for c in path_chunks]
            assert spans == sorted(spans)
            for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
                assert e1 <= s2

    def test_routine_chunks_balanced_and_reparse_clean(self, minirepo_code_chunks):
        for c in _routines(minirepo_code_chunks):
            data = c.text.encode()
            assert cst.delimiters_balanced(data)
            reparsed = cst.parse(data)
            assert reparsed.error_count == 0

    def test_oversize_function_becomes_continuation_chain(self):
        body = b"".join(b"  acc += value_%04d;\n" % i for i in range(600))
        src = b"int accumulate() {\n" + body + b"  return acc;\n}\n"
        limits = ChunkLimits(max_bytes=1024)
        chunks = chunk_code(src, "big.cpp", limits=limits)
        chain = [c for c in chunks if c.kind == CODE_CONTINUATION]
        assert len(chain) > 5
        assert [c.part_index for c in chain] == list(range(1, len(chain) + 1))
        assert all(c.part_total == len(chain) for c in chain)
        # Concatenation-equality oracle: the chain tiles the definition.
        joined = "".join(c.text for c in chain)
        parsed = cst.parse(src)
        node = parsed.definitions()[0][0]
        assert joined.encode() == src[node.start:node.end]
        assert cst.delimiters_balanced(joined.encode())
        assert all(c.symbol == "accumulate" for c in chain)

    def test_chain_parts_respect_limit(self):
        body = b"".join(b"  acc += value_%04d;\n" % i for i in range(600))
        src = b"int accumulate() {\n" + body + b"  return acc;\n}\n"
        chunks = chunk_code(src, "big.cpp", limits=ChunkLimits(max_bytes=1024))
        for c in chunks:
            if c.kind == CODE_CONTINUATION:
                assert len(c.text.encode()) <= 1024

    def test_unparseable_falls_back_with_warning(self, caplog):
        src = b"garbage { unbalanced\n" * 40
        with caplog.at_level(logging.WARNING, logger="cello.chunking"):
            chunks = chunk_code(src, "broken.cpp")
        assert chunks
        assert all(c.kind == CODE_CONTINUATION for c in chunks)
        assert any("fixed-window" in r.message for r in caplog.records)

    def test_small_max_bytes_rejected(self):
        with pytest.raises(ValueError):
            chunk_code(b"int x;\n", "a.cpp", limits=ChunkLimits(max_bytes=128))

    def test_empty_source(self):
        assert chunk_code(b"", "empty.cpp") == []

    def test_leading_doc_comment_attached(self):
        src = b"#include <x>\n\n/// doc\nint f() { return 0; }\n"
        chunks = chunk_code(src, "doc.cpp")
        routine = _routines(chunks)[0]
        assert routine.text.startswith("/// doc")

    def test_every_marker_lands_in_some_chunk(self, minirepo_root,
                                              minirepo_manifest,
                                              minirepo_code_chunks):
        # Oracle: run the matcher directly on whole files; deduplicated
        # counts must match the chunk-based scan for every paradigm.
        for paradigm in ("cuda", "openmp", "kokkos"):
            pattern = PATTERNS[paradigm]
            whole_file_names = set()
            for entry in minirepo_manifest.files:
                if entry.kind != "code":
                    continue
                data = (minirepo_root / entry.path).read_bytes()
                masked = cst.masked_source(data)
                parsed = cst.parse(data)
                for ident in pattern.identifiers:
                    at = masked.find(ident.encode())
                    while at >= 0:
                        owner = None
                        for node, name in parsed.definitions():
                            if node.start <= at < node.end:
                                owner = name
                        if owner:
                            whole_file_names.add((owner, entry.path))
                        at = masked.find(ident.encode(), at + 1)
            scan = find_kernels(minirepo_code_chunks, pattern)
            chunk_names = {(r.name, r.path) for r in scan.unique
                           if (r.name, r.path) in whole_file_names}
            assert chunk_names == whole_file_names


class TestChunkBoundaryInvariance:
    def test_counts_invariant_under_boundary_changes(self, minirepo_root,
                                                     minirepo_manifest):
        # CST chunking vs fixed windows vs whole-file chunks must agree on
        # deduplicated kernel names per paradigm.
        variants = {"cst": [], "window": [], "whole": []}
        for entry in minirepo_manifest.files:
            if entry.kind != "code":
                continue
            data = (minirepo_root / entry.path).read_bytes()
            variants["cst"].extend(chunk_code(data, entry.path))
            variants["whole"].append(Chunk(
                id="w:" + entry.path, path=entry.path, span=(0, len(data)),
                text=data.decode(), kind=CODE_PREAMBLE))
        for paradigm in ("cuda", "openmp", "kokkos"):
            names = {
                label: set(find_kernels(chunks, PATTERNS[paradigm]).names())
                for label, chunks in variants.items() if chunks
            }
            assert names["cst"] == names["whole"]


class TestFindKernels:
    def test_single_cuda_kernel(self):
        chunks = chunk_code(b"__global__ void k() { }\n", "k.cu")
        scan = find_kernels(chunks, PATTERNS["cuda"])
        assert [(r.name, r.paradigm) for r in scan.refs] == [("k", "CUDA")]

    def test_two_parallel_for_two_refs(self):
        src = (b"void run() {\n"
               b"  Kokkos::parallel_for(n, f1);\n"
               b"  Kokkos::parallel_for(n, f2);\n"
               b"}\n")
        scan = find_kernels(chunk_code(src, "r.cpp"), PATTERNS["kokkos"])
        assert len(scan.refs) == 2
        assert len(scan.unique) == 1  # same enclosing routine

    def test_comment_and_string_markers_excluded(self):
        src = (b"// __global__ old\n"
               b"const char* s = \"__device__ doc\";\n"
               b"__global__ void live() { }\n")
        scan = find_kernels(chunk_code(src, "d.cu"), PATTERNS["cuda"])
        assert [r.name for r in scan.refs] == ["live"]

    def test_minirepo_ground_truth(self, minirepo_code_chunks):
        for paradigm, expected in MINIREPO_KERNELS.items():
            scan = find_kernels(minirepo_code_chunks, PATTERNS[paradigm])
            assert sorted(scan.names()) == sorted(expected)

    def test_refs_sorted_and_inside_chunks(self, minirepo_code_chunks):
        scan = find_kernels(minirepo_code_chunks, PATTERNS["cuda"])
        keys = [(r.path, r.marker_span) for r in scan.refs]
        assert keys == sorted(keys)
        by_id = {c.id: c for c in minirepo_code_chunks}
        for ref in scan.refs:
            holder = [c for c in minirepo_code_chunks
                      if c.path == ref.path
                      and c.span[0] <= ref.marker_span[0] < c.span[1]]
            assert holder, f"no chunk holds {ref}"

    def test_pure_function_determinism(self, minirepo_code_chunks):
        first = find_kernels(minirepo_code_chunks, PATTERNS["openmp"])
        second = find_kernels(minirepo_code_chunks, PATTERNS["openmp"])
        assert first.refs == second.refs
        assert first.unique == second.unique

    def test_pragma_with_space_after_hash(self):
        src = b"void f() {\n#  pragma omp target\n  { work(); }\n}\n"
        scan = find_kernels(chunk_code(src, "s.cpp"), PATTERNS["openmp"])
        assert [r.name for r in scan.refs] == ["f"]


class TestChunkText:
    def test_short_doc_single_chunk(self):
        chunks = chunk_text("hello", "d.md", window=10, overlap=2)
        assert len(chunks) == 1
        assert chunks[0].text == "hello"
        assert chunks[0].kind == TEXT

    def test_spec_arithmetic_example(self):
        chunks = chunk_text("abcdef", "d.md", window=4, overlap=2)
        assert [c.text for c in chunks] == ["abcd", "cdef"]

    def test_empty_doc(self):
        assert chunk_text("", "d.md", window=4, overlap=1) == []

    def test_invalid_window(self):
        with pytest.raises(ValueError):
            chunk_text("abc", "d.md", window=4, overlap=4)

    def test_overlap_exact(self):
        doc = "x" * 25 + "y" * 25
        chunks = chunk_text(doc, "d.md", window=20, overlap=5)
        for a, b in zip(chunks, chunks[1:]):
            assert a.text[-5:] == b.text[:5]

    @settings(max_examples=60, deadline=None)
    @given(doc=st.text(min_size=0, max_size=4000),
           window=st.integers(2, 400), overlap=st.integers(0, 398))
    def test_lossless_reconstruction_property(self, doc, window, overlap):
        if overlap >= window:
            overlap = window - 1
        chunks = chunk_text(doc, "d.md", window=window, overlap=overlap)
        assert reassemble_text(chunks, overlap) == doc

    def test_random_10kb_reconstruction(self):
        rng = random.Random(7)
        doc = "".join(rng.choice("abcdef \n") for _ in range(10_000))
        chunks = chunk_text(doc, "big.md", window=800, overlap=120)
        assert reassemble_text(chunks, 120) == doc


class TestFragmentationContrast:
    def test_window_chunking_breaks_delimiters_cst_does_not(self, minirepo_root,
                                                            minirepo_manifest):
        # Property behind the fragmentation table: fixed windows cut inside
        # multi-line functions, CST chunks never do.
        cst_unbalanced = 0
        window_unbalanced = 0
        for entry in minirepo_manifest.files:
            if entry.kind != "code":
                continue
            data = (minirepo_root / entry.path).read_bytes()
            for c in chunk_code(data, entry.path):
                if c.kind == CODE_ROUTINE and not c.balanced:
                    cst_unbalanced += 1
            for c in chunk_code_fixed(data, entry.path, window=160, overlap=0):
                if not c.balanced:
                    window_unbalanced += 1
        assert cst_unbalanced == 0
        assert window_unbalanced >= 1
