"""Command-line interface: ingest, chunk, kernels, index, lineage, query,
docgen, chat, serve, eval."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import chunking
from .callgraph import load_callgraph, summarize_lineage, two_hop_lineage
from .chat import ChatConfig, ChatSession, run_repl
from .docgen import document_repository
from .embeddings import BUILTIN_NAME, HashingEmbedder, RemoteEmbeddingProvider
from .errors import CelloError
from .evaluation import (GroundTruth, CompletenessEntry, CompletenessReport,
                         kernel_recall, render_report)
from .ingest import CorpusManifest, IngestConfig, ingest_corpus
from .llm import HttpLlmClient
from .retriever import (AssembledContext, RetrieverConfig, RetrievalQuotas,
                        enrich_with_lineage, retrieve)
from .server import ChatService, serve
from .vectorstore import VectorCollection

DEFAULT_TEXT_WINDOW = 1200
DEFAULT_TEXT_OVERLAP = 200
# the address local inference servers conventionally bind
DEFAULT_LLM_ENDPOINT = "http://127.0.0.1:8080/v1/chat/completions"


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CelloError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cello",
        description="Local-first retrieval-augmented code assistant toolkit")
    sub = parser.add_subparsers(required=True)

    p = sub.add_parser("ingest", help="scan a repository into a manifest")
    p.add_argument("--root", required=True)
    p.add_argument("--text-root")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("chunk", help="chunk manifest files into JSONL")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-bytes", type=int, default=chunking.ChunkLimits().max_bytes)
    p.add_argument("--window", type=int, default=DEFAULT_TEXT_WINDOW)
    p.add_argument("--overlap", type=int, default=DEFAULT_TEXT_OVERLAP)
    p.set_defaults(func=_cmd_chunk)

    p = sub.add_parser("kernels", help="enumerate GPU kernels by pattern")
    p.add_argument("--chunks", default="chunks.jsonl")
    p.add_argument("--paradigm", required=True, choices=sorted(chunking.PATTERNS))
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_kernels)

    p = sub.add_parser("index", help="embed chunks into a vector collection")
    p.add_argument("--chunks", required=True)
    p.add_argument("--collection", required=True, choices=["code", "text"])
    p.add_argument("--provider", default=BUILTIN_NAME)
    p.add_argument("--dims", type=int, default=256)
    p.add_argument("--endpoint")
    p.add_argument("--store", required=True)
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("lineage", help="print a two-hop lineage summary")
    p.add_argument("--graph", required=True)
    p.add_argument("--fn", required=True)
    p.set_defaults(func=_cmd_lineage)

    p = sub.add_parser("query", help="retrieve context for a query")
    p.add_argument("--q", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--embed-endpoint")
    p.add_argument("--code-k", type=int)
    p.add_argument("--text-k", type=int)
    p.add_argument("--lineage", action="store_true")
    p.add_argument("--graph")
    p.add_argument("--config", help="JSON file with CODE_TOP_K, TEXT_TOP_K, "
                                    "ENHANCE_PROMPT_WITH_LINEAGE")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("docgen", help="generate guarded Doxygen blocks")
    p.add_argument("--manifest", required=True)
    p.add_argument("--endpoint", default=DEFAULT_LLM_ENDPOINT)
    p.add_argument("--model", default="local")
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--summaries", action="store_true")
    p.set_defaults(func=_cmd_docgen)

    p = sub.add_parser("chat", help="interactive REPL")
    p.add_argument("--store", default="store")
    p.add_argument("--endpoint", default=DEFAULT_LLM_ENDPOINT)
    p.add_argument("--embed-endpoint")
    p.add_argument("--model", default="local")
    p.add_argument("--lineage", action="store_true")
    p.add_argument("--graph")
    p.add_argument("--code-k", type=int, default=25)
    p.add_argument("--text-k", type=int, default=25)
    p.set_defaults(func=_cmd_chat)

    p = sub.add_parser("serve", help="run the chat service")
    p.add_argument("--bind", default="127.0.0.1:8700")
    p.add_argument("--store", default="store")
    p.add_argument("--endpoint", default=DEFAULT_LLM_ENDPOINT)
    p.add_argument("--embed-endpoint")
    p.add_argument("--model", default="local")
    p.add_argument("--lineage", action="store_true")
    p.add_argument("--graph")
    p.add_argument("--frontend")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("eval", help="render retrieval-completeness report")
    p.add_argument("--truth", required=True)
    p.add_argument("--retrieval", required=True)
    p.add_argument("--label", default="cello-retriever")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)

    return parser


def _cmd_ingest(args) -> int:
    manifest = ingest_corpus(args.root, args.text_root, IngestConfig())
    Path(args.out).write_text(manifest.to_json(), "utf-8")
    print(f"wrote {args.out}: {manifest.counts}")
    return 0


def _cmd_chunk(args) -> int:
    manifest = CorpusManifest.from_json(Path(args.manifest).read_text("utf-8"))
    root = Path(manifest.root)
    limits = chunking.ChunkLimits(max_bytes=args.max_bytes)
    chunks: list[chunking.Chunk] = []
    for entry in manifest.files:
        data = (root / entry.path).read_bytes()
        if entry.kind == "code":
            chunks.extend(chunking.chunk_code(data, entry.path, entry.language,
                                              limits))
        else:
            chunks.extend(chunking.chunk_text(
                data.decode("utf-8", "replace"), entry.path,
                window=args.window, overlap=args.overlap))
    Path(args.out).write_text(chunking.write_chunks_jsonl(chunks), "utf-8")
    print(f"wrote {args.out}: {len(chunks)} chunks")
    return 0


def _cmd_kernels(args) -> int:
    chunks = chunking.read_chunks_jsonl(Path(args.chunks).read_text("utf-8"))
    scan = chunking.find_kernels(chunks, chunking.PATTERNS[args.paradigm])
    doc = {
        "paradigm": scan.refs[0].paradigm if scan.refs
        else chunking.PATTERNS[args.paradigm].paradigm,
        "total_markers": len(scan.refs),
        "kernels": [
            {"name": r.name, "path": r.path,
             "marker_span": [r.marker_span[0], r.marker_span[1]]}
            for r in scan.unique
        ],
    }
    Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", "utf-8")
    print(f"wrote {args.out}: {len(scan.unique)} kernels "
          f"({len(scan.refs)} markers)")
    return 0


def _make_provider(name: str, dims: int, endpoint: str | None):
    if endpoint:
        return RemoteEmbeddingProvider(name, dims, endpoint)
    return HashingEmbedder(dims)


def _cmd_index(args) -> int:
    chunks = chunking.read_chunks_jsonl(Path(args.chunks).read_text("utf-8"))
    wanted = chunking.CODE_KINDS if args.collection == "code" else {chunking.TEXT}
    chunks = [c for c in chunks if c.kind in wanted]
    provider = _make_provider(args.provider, args.dims, args.endpoint)
    directory = Path(args.store) / args.collection
    if (directory / "manifest.json").exists():
        collection = VectorCollection.load(directory, provider)
    else:
        collection = VectorCollection(args.collection, provider)
    result = collection.upsert(chunks)
    collection.save(directory)
    print(f"{args.collection}: inserted={result.inserted} "
          f"updated={result.updated} unchanged={result.unchanged} "
          f"rejected={len(result.rejected)}")
    return 0


def _cmd_lineage(args) -> int:
    graph = load_callgraph(Path(args.graph).read_bytes())
    print(summarize_lineage(two_hop_lineage(graph, args.fn)))
    return 0


def _load_collection(directory: Path, embed_endpoint: str | None):
    """Reconstruct the provider from the stored manifest: the built-in
    embedder needs nothing, remote providers need the embeddings endpoint."""
    manifest = json.loads((directory / "manifest.json").read_text("utf-8"))
    if manifest["provider"] == BUILTIN_NAME:
        return VectorCollection.load(directory)
    if not embed_endpoint:
        raise CelloError(
            f"collection {directory} was built with remote provider "
            f"{manifest['provider']!r}; pass --embed-endpoint")
    provider = RemoteEmbeddingProvider(manifest["provider"],
                                       int(manifest["dims"]), embed_endpoint)
    return VectorCollection.load(directory, provider)


def _load_store(store: str, embed_endpoint: str | None = None):
    code = _load_collection(Path(store) / "code", embed_endpoint)
    text = _load_collection(Path(store) / "text", embed_endpoint)
    return code, text


def _cmd_query(args) -> int:
    config = RetrieverConfig()
    if args.config:
        config = RetrieverConfig.from_mapping(
            json.loads(Path(args.config).read_text("utf-8")))
    code_k = args.code_k if args.code_k is not None else config.code_k
    text_k = args.text_k if args.text_k is not None else config.text_k
    lineage = args.lineage or config.lineage
    code, text = _load_store(args.store, args.embed_endpoint)
    context = retrieve(args.q, RetrievalQuotas(code_k, text_k), code, text)
    if lineage:
        if not args.graph:
            print("error: --lineage requires --graph", file=sys.stderr)
            return 2
        graph = load_callgraph(Path(args.graph).read_bytes())
        context = enrich_with_lineage(context, graph, True)
    Path(args.out).write_text(context.to_json(), "utf-8")
    print(f"wrote {args.out}: {len(context.code_hits)} code hits, "
          f"{len(context.text_hits)} text hits")
    return 0


def _cmd_docgen(args) -> int:
    manifest = CorpusManifest.from_json(Path(args.manifest).read_text("utf-8"))
    llm = HttpLlmClient(args.endpoint)
    code_paths = [f.path for f in manifest.files if f.kind == "code"]
    changed = document_repository(
        Path(manifest.root), code_paths, llm, model=args.model,
        dry_run=args.dry_run, summaries=args.summaries)
    verb = "would change" if args.dry_run else "changed"
    print(f"{verb} {len(changed)} file(s)")
    return 0


def _retrieve_fn_from_store(store: str, graph_path: str | None,
                            embed_endpoint: str | None = None):
    code, text = _load_store(store, embed_endpoint)
    graph = load_callgraph(Path(graph_path).read_bytes()) if graph_path else None

    def retrieve_fn(query: str, code_k: int, text_k: int,
                    lineage: bool) -> AssembledContext:
        context = retrieve(query, RetrievalQuotas(code_k, text_k), code, text)
        return enrich_with_lineage(context, graph, lineage and graph is not None)

    return retrieve_fn


def _cmd_chat(args) -> int:
    retrieve_fn = _retrieve_fn_from_store(args.store, args.graph,
                                          args.embed_endpoint)
    llm = HttpLlmClient(args.endpoint)
    session = ChatSession()

    def retriever_fn(query: str) -> AssembledContext:
        return retrieve_fn(query, args.code_k, args.text_k, args.lineage)

    run_repl(session, retriever_fn, llm, ChatConfig(model=args.model))
    return 0


def _cmd_serve(args) -> int:
    host, _, port = args.bind.rpartition(":")
    retrieve_fn = _retrieve_fn_from_store(args.store, args.graph,
                                          args.embed_endpoint)
    llm = HttpLlmClient(args.endpoint)
    service = ChatService(retrieve_fn, llm, ChatConfig(model=args.model),
                          default_lineage=args.lineage)
    httpd = serve((host or "127.0.0.1", int(port)), service,
                  static_dir=args.frontend)
    print(f"serving on http://{args.bind}")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_eval(args) -> int:
    truths = json.loads(Path(args.truth).read_text("utf-8"))
    dump = json.loads(Path(args.retrieval).read_text("utf-8"))
    dumped = {(d["paradigm"], d["application"]):
              [chunking.Chunk.from_record(r) for r in d["chunks"]]
              for d in dump}
    by_paradigm: dict[str, list[CompletenessEntry]] = {}
    for item in truths:
        truth = GroundTruth(
            paradigm=item["paradigm"], application=item["application"],
            total_kernels=int(item["total"]),
            names=tuple(item["names"]) if item.get("names") else None)
        chunks = dumped.get((truth.paradigm, truth.application), [])
        pattern = chunking.PATTERNS[truth.paradigm.lower()]
        recall = kernel_recall(chunks, truth, pattern)
        retrieved = min(recall.retrieved, truth.total_kernels)
        by_paradigm.setdefault(truth.paradigm, []).append(
            CompletenessEntry(application=truth.application,
                              retrieved=retrieved, total=truth.total_kernels))
    reports = [
        CompletenessReport(paradigm=paradigm, configuration=args.label,
                           entries=tuple(entries))
        for paradigm, entries in sorted(by_paradigm.items())
    ]
    Path(args.out).write_text(render_report(reports), "utf-8")
    print(f"wrote {args.out}: {len(reports)} paradigm(s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
