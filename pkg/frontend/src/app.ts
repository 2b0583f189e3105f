import { ApiClient, ApiError } from "./api.js";
import { render } from "./render.js";
import {
  applyError, applyReply, beginSend, fromTranscript, initialState,
  setQuotas, toggleLineage,
} from "./state.js";
import type { UiState } from "./types.js";

const SESSION_KEY = "cello.session_id";

export interface AppHandle {
  state(): UiState;
  send(message: string): Promise<void>;
  retry(): Promise<void>;
  setLineage(enabled: boolean): void;
  ready: Promise<void>;
}

/**
 * Mount the chat client. The session id persists in storage so a page
 * reload reconstructs the same transcript from GET /api/session/<id>;
 * a vanished session falls back to a fresh one.
 */
export function mount(
  root: HTMLElement,
  client: ApiClient = new ApiClient(),
  storage: Pick<Storage, "getItem" | "setItem"> = window.localStorage,
): AppHandle {
  let state = initialState();

  const update = (next: UiState): void => {
    state = next;
    render(root, state, handlers);
  };

  const send = async (message: string): Promise<void> => {
    if (state.sessionId === null || state.pending !== null) return;
    const controls = state.controls;
    update(beginSend(state, message));
    try {
      const response = await client.chat(state.sessionId, message, controls);
      update(applyReply(state, message, response));
    } catch (error) {
      const text = error instanceof ApiError
        ? `request failed (${error.status})`
        : "request failed (network)";
      update(applyError(state, message, text));
    }
  };

  const retry = (): Promise<void> => {
    const message = state.failedMessage;
    return message !== null ? send(message) : Promise.resolve();
  };

  const handlers = {
    onSend: (message: string) => { void send(message); },
    onRetry: () => { void retry(); },
    onToggleLineage: (enabled: boolean) => update(toggleLineage(state, enabled)),
    onQuotaChange: (codeK: number, textK: number) =>
      update(setQuotas(state, codeK, textK)),
  };

  const ready = (async () => {
    const stored = storage.getItem(SESSION_KEY);
    if (stored) {
      try {
        const transcript = await client.getSession(stored);
        update(fromTranscript(state, transcript.session_id, transcript.turns));
        return;
      } catch {
        // expired or unknown: fall through to a fresh session
      }
    }
    const sessionId = await client.createSession();
    storage.setItem(SESSION_KEY, sessionId);
    update(fromTranscript(state, sessionId, []));
  })();

  update(state);
  return {
    state: () => state,
    send,
    retry,
    setLineage: handlers.onToggleLineage,
    ready,
  };
}

declare global {
  interface Window { celloApp?: AppHandle }
}

if (typeof document !== "undefined" && document.getElementById("app-root")) {
  window.celloApp = mount(document.getElementById("app-root") as HTMLElement);
}
