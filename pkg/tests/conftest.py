from pathlib import Path

import pytest

from cello import chunking, ingest

FIXTURES = Path(__file__).parent / "fixtures"
MINIREPO = FIXTURES / "minirepo"

# Ground truth for the bundled corpus, by paradigm.
MINIREPO_KERNELS = {
    "cuda": (
        "calo::finalize_state", "calo::interpolate_energy", "calo::reset_cells",
        "calo::simulate_hits", "cell_index", "clamp_energy", "fast_exp",
        "load_geometry",
    ),
    "openmp": (
        "apply_decay", "normalize_waveform", "wire::fft_forward",
        "wire::rasterize_signal", "wire::scatter_add",
    ),
    "kokkos": (
        "fill_response", "p2r::propagate_tracks", "p2r::update_kalman",
        "reduce_charge",
    ),
}


@pytest.fixture(scope="session")
def minirepo_root() -> Path:
    return MINIREPO


@pytest.fixture(scope="session")
def minirepo_manifest(minirepo_root):
    return ingest.ingest_corpus(minirepo_root)


@pytest.fixture(scope="session")
def minirepo_chunks(minirepo_root, minirepo_manifest):
    chunks = []
    for entry in minirepo_manifest.files:
        data = (minirepo_root / entry.path).read_bytes()
        if entry.kind == "code":
            chunks.extend(chunking.chunk_code(data, entry.path, entry.language))
        else:
            chunks.extend(chunking.chunk_text(
                data.decode("utf-8"), entry.path, window=400, overlap=80))
    return chunks


@pytest.fixture(scope="session")
def minirepo_code_chunks(minirepo_chunks):
    return [c for c in minirepo_chunks if c.kind in chunking.CODE_KINDS]


@pytest.fixture(scope="session")
def minirepo_text_chunks(minirepo_chunks):
    return [c for c in minirepo_chunks if c.kind == chunking.TEXT]
