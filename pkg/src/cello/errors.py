"""Exception types shared across the toolkit."""


class CelloError(Exception):
    """Base class for all cello errors."""


class IngestError(CelloError):
    """Fatal corpus-scanning failure (unreadable root, duplicate paths)."""


class TransportError(CelloError):
    """Network-level failure talking to an embedding or LLM endpoint. Retriable."""


class ProtocolError(CelloError):
    """Endpoint answered, but not in the agreed wire format. Not retriable."""


class ProviderContractError(CelloError):
    """Embedding endpoint violated its declared contract (e.g. wrong dims)."""


class CollectionError(CelloError):
    """Vector-collection misuse: dims mismatch, kind mismatch, lock conflicts."""


class CallGraphError(CelloError):
    """Malformed callgraph document or unknown lookup target."""


class TemplateError(CelloError):
    """A prompt template placeholder is missing or unbound."""


class GenerationError(CelloError):
    """The model produced unusable output (e.g. empty documentation body)."""
