"""cello: local-first retrieval-augmented code assistant toolkit.

Syntax-aware chunking for C++/CUDA/HIP, dual code/text vector retrieval
with exact-symbol re-ranking, callgraph-enriched prompting, guarded
documentation generation, an interactive chat assistant, and an evaluation
harness for retrieval completeness.
"""

from .callgraph import CallGraph, Lineage, load_callgraph, summarize_lineage, two_hop_lineage
from .chat import (ChatConfig, ChatSession, TaskTemplate, TASK_TEMPLATES,
                   chat_turn, render_task_template, task_bindings)
from .chunking import (Chunk, ChunkLimits, KernelPattern, KernelRef, KernelScan,
                       PATTERNS, chunk_code, chunk_code_fixed, chunk_text,
                       find_kernels)
from .embeddings import HashingEmbedder, RemoteEmbeddingProvider
from .errors import (CallGraphError, CelloError, CollectionError,
                     GenerationError, IngestError, ProtocolError,
                     ProviderContractError, TemplateError, TransportError)
from .evaluation import (CompletenessReport, GroundTruth, code_text_split,
                         completeness_score, fragment_census, kernel_recall,
                         render_report)
from .ingest import (CorpusManifest, IngestConfig, SourceFile, classify_file,
                     ingest_corpus, scan_repository)
from .llm import HttpLlmClient, LlmRequest, LlmResponse, ScriptedLlm
from .retriever import (AssembledContext, ContextHit, RetrievalQuotas,
                        RetrieverConfig, enrich_with_lineage,
                        extract_backquoted_symbols, render_prompt, retrieve)
from .vectorstore import ScoredHit, UpsertResult, VectorCollection

__version__ = "0.1.0"
