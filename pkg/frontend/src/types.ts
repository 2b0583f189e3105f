/** Wire types for the assistant service JSON API. */

export interface ContextRef {
  path: string;
  chunk_id: string;
  snippet?: string;
}

export interface ChatContext {
  code: ContextRef[];
  text: ContextRef[];
  lineage: string[];
}

export interface ChatResponse {
  reply: string;
  context: ChatContext;
}

export interface TranscriptTurn {
  role: "system" | "user" | "assistant";
  content: string;
  attached_context_digest?: string[];
}

export interface SessionTranscript {
  session_id: string;
  turns: TranscriptTurn[];
}

/** Retrieval controls; lineage maps to ENHANCE_PROMPT_WITH_LINEAGE. */
export interface Controls {
  codeK: number;
  textK: number;
  lineage: boolean;
}

/**
 * Whole client state. Rendering is a pure function of this value:
 * the visible transcript is always the server-acknowledged turns plus an
 * optimistic bubble for the one in-flight message, never anything else.
 */
export interface UiState {
  sessionId: string | null;
  turns: TranscriptTurn[];
  /** Context panels keyed by assistant turn index in `turns`. */
  contexts: Record<number, ChatContext>;
  /** Message currently in flight (exactly one per session). */
  pending: string | null;
  /** Last failure, kept with its message so Retry can resend it. */
  error: string | null;
  failedMessage: string | null;
  controls: Controls;
}
