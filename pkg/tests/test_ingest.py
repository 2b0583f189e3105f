import json

import pytest

from cello import ingest
from cello.errors import IngestError


class TestClassify:
    @pytest.mark.parametrize("name,expected", [
        ("sim.cu", ("code", "cuda")),
        ("helpers.cuh", ("code", "cuda")),
        ("port.hip", ("code", "hip")),
        ("main.cpp", ("code", "cpp")),
        ("defs.h", ("code", "cpp")),
        ("README.md", ("text", "markdown")),
        ("notes.txt", ("text", "plain")),
    ])
    def test_extension_map(self, name, expected):
        assert ingest.classify_file(name) == expected

    def test_unknown_extension_excluded(self):
        assert ingest.classify_file("data.bin") is None
        assert ingest.classify_file("archive.tar.gz") is None


class TestScan:
    def test_empty_directory(self, tmp_path):
        manifest = ingest.scan_repository(tmp_path)
        assert manifest.files == []
        assert manifest.counts == {"code_files": 0, "text_files": 0,
                                   "code_lines": 0, "text_words": 0}

    def test_counts_from_small_tree(self, tmp_path):
        (tmp_path / "a.cu").write_text("int x;\nint y;\nint z;\n")
        (tmp_path / "notes.md").write_text("five words are written here")
        manifest = ingest.scan_repository(tmp_path)
        assert manifest.counts == {"code_files": 1, "text_files": 1,
                                   "code_lines": 3, "text_words": 5}

    def test_missing_root_is_fatal(self, tmp_path):
        with pytest.raises(IngestError):
            ingest.scan_repository(tmp_path / "nope")

    def test_excluded_dirs_and_size_cap(self, tmp_path):
        (tmp_path / ".git").mkdir()
        (tmp_path / ".git" / "junk.cpp").write_text("int x;\n")
        (tmp_path / "build").mkdir()
        (tmp_path / "build" / "gen.cpp").write_text("int y;\n")
        (tmp_path / "big.cpp").write_bytes(b"x" * 32)
        config = ingest.IngestConfig(max_file_bytes=16)
        manifest = ingest.scan_repository(tmp_path, config)
        assert manifest.files == []
        assert manifest.excluded_count == 1  # big.cpp; excluded dirs never visited

    def test_file_accounting_balances(self, minirepo_root):
        manifest = ingest.scan_repository(minirepo_root)
        total = sum(1 for p in minirepo_root.rglob("*") if p.is_file())
        assert len(manifest.files) + manifest.excluded_count == total

    def test_rescan_is_byte_identical(self, minirepo_root):
        first = ingest.scan_repository(minirepo_root).to_json()
        second = ingest.scan_repository(minirepo_root).to_json()
        assert first == second

    def test_paths_sorted_and_unique(self, minirepo_manifest):
        paths = [f.path for f in minirepo_manifest.files]
        assert paths == sorted(paths)
        assert len(paths) == len(set(paths))

    def test_content_hash_tracks_bytes(self, tmp_path):
        target = tmp_path / "a.cpp"
        target.write_text("int x;\n")
        h1 = ingest.scan_repository(tmp_path).files[0].content_hash
        h2 = ingest.scan_repository(tmp_path).files[0].content_hash
        target.write_text("int y;\n")
        h3 = ingest.scan_repository(tmp_path).files[0].content_hash
        assert h1 == h2 != h3

    def test_kind_language_invariant(self, minirepo_manifest):
        for f in minirepo_manifest.files:
            if f.kind == "text":
                assert f.language in ("markdown", "plain")
            else:
                assert f.language in ("cpp", "cuda", "hip")


class TestManifestJson:
    def test_exact_top_level_keys(self, minirepo_manifest):
        doc = json.loads(minirepo_manifest.to_json())
        assert list(doc) == ["root", "files", "counts"]
        assert list(doc["files"][0]) == ["path", "kind", "language",
                                         "byte_len", "content_hash"]

    def test_round_trip(self, minirepo_manifest):
        text = minirepo_manifest.to_json()
        again = ingest.CorpusManifest.from_json(text)
        assert again.files == minirepo_manifest.files
        assert again.counts == minirepo_manifest.counts


class TestSeparateTextRoot:
    def test_outside_text_root_resolves(self, tmp_path):
        code = tmp_path / "repo"
        docs = tmp_path / "papers"
        code.mkdir(), docs.mkdir()
        (code / "k.cu").write_text("__global__ void k() { }\n")
        (docs / "paper.md").write_text("shower simulation on GPUs")
        manifest = ingest.ingest_corpus(code, docs)
        assert manifest.counts["code_files"] == 1
        assert manifest.counts["text_files"] == 1
        text_entry = next(f for f in manifest.files if f.kind == "text")
        assert (code / text_entry.path).resolve().read_text().startswith("shower")

    def test_nested_text_root_collapses_duplicates(self, tmp_path):
        code = tmp_path / "repo"
        (code / "docs").mkdir(parents=True)
        (code / "docs" / "a.md").write_text("doc words here")
        (code / "m.cpp").write_text("int x;\n")
        manifest = ingest.ingest_corpus(code, code / "docs")
        assert [f.path for f in manifest.files] == ["docs/a.md", "m.cpp"]
        assert manifest.counts["text_files"] == 1

    def test_non_text_under_text_root_excluded(self, tmp_path):
        code = tmp_path / "repo"
        docs = tmp_path / "papers"
        code.mkdir(), docs.mkdir()
        (docs / "paper.md").write_text("words")
        (docs / "stray.cpp").write_text("int x;\n")
        manifest = ingest.ingest_corpus(code, docs)
        assert manifest.counts["code_files"] == 0
        assert manifest.counts["text_files"] == 1
