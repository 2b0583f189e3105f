import type { ChatContext, ChatResponse, TranscriptTurn, UiState } from "./types.js";

export const DEFAULT_CODE_K = 25;
export const DEFAULT_TEXT_K = 25;

export function initialState(): UiState {
  return {
    sessionId: null,
    turns: [],
    contexts: {},
    pending: null,
    error: null,
    failedMessage: null,
    controls: { codeK: DEFAULT_CODE_K, textK: DEFAULT_TEXT_K, lineage: false },
  };
}

/** Server transcript replaces local turns wholesale (reload path). */
export function fromTranscript(
  state: UiState,
  sessionId: string,
  turns: TranscriptTurn[],
): UiState {
  return { ...state, sessionId, turns: [...turns], pending: null, error: null, failedMessage: null };
}

/** Optimistic send: exactly one in-flight message per session. */
export function beginSend(state: UiState, message: string): UiState {
  if (state.pending !== null) throw new Error("a request is already in flight");
  return { ...state, pending: message, error: null, failedMessage: null };
}

/** Server acknowledged: append user+assistant turns, attach the context panel. */
export function applyReply(state: UiState, message: string, response: ChatResponse): UiState {
  const turns: TranscriptTurn[] = [
    ...state.turns,
    { role: "user", content: message },
    { role: "assistant", content: response.reply },
  ];
  const contexts: Record<number, ChatContext> = {
    ...state.contexts,
    [turns.length - 1]: response.context,
  };
  return { ...state, turns, contexts, pending: null, error: null, failedMessage: null };
}

/**
 * Failure: drop the optimistic bubble (the server transcript is unchanged),
 * keep the message so a retry affordance can resend it.
 */
export function applyError(state: UiState, message: string, error: string): UiState {
  return { ...state, pending: null, error, failedMessage: message };
}

export function toggleLineage(state: UiState, enabled: boolean): UiState {
  return { ...state, controls: { ...state.controls, lineage: enabled } };
}

export function setQuotas(state: UiState, codeK: number, textK: number): UiState {
  const clamp = (value: number) => (Number.isFinite(value) && value >= 0 ? Math.floor(value) : 0);
  return { ...state, controls: { ...state.controls, codeK: clamp(codeK), textK: clamp(textK) } };
}

/** Bubbles to render: acknowledged turns plus the optimistic one. */
export function visibleTurns(state: UiState): TranscriptTurn[] {
  const turns = state.turns.filter((t) => t.role !== "system");
  if (state.pending !== null) {
    return [...turns, { role: "user", content: state.pending }];
  }
  return turns;
}
