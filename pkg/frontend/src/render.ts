import type { ChatContext, ContextRef, UiState } from "./types.js";
import { visibleTurns } from "./state.js";

export interface Handlers {
  onSend(message: string): void;
  onRetry(): void;
  onToggleLineage(enabled: boolean): void;
  onQuotaChange(codeK: number, textK: number): void;
}

/** Rebuild the whole view from state; no incremental DOM state to drift. */
export function render(root: HTMLElement, state: UiState, handlers: Handlers): void {
  const document = root.ownerDocument;
  root.replaceChildren();

  const app = el(document, "div", "app");

  // --- header with retrieval controls -----------------------------------
  const header = el(document, "header", "header");
  const title = el(document, "span", "title");
  title.textContent = "cello chat";
  header.appendChild(title);

  const controls = el(document, "div", "controls");
  controls.appendChild(quotaInput(document, "code-k", "code", state.controls.codeK,
    (v) => handlers.onQuotaChange(v, state.controls.textK), state.pending !== null));
  controls.appendChild(quotaInput(document, "text-k", "text", state.controls.textK,
    (v) => handlers.onQuotaChange(state.controls.codeK, v), state.pending !== null));

  const lineageLabel = el(document, "label", "lineage-toggle");
  const lineageBox = el(document, "input") as HTMLInputElement;
  lineageBox.type = "checkbox";
  lineageBox.id = "lineage-toggle";
  lineageBox.checked = state.controls.lineage;
  lineageBox.disabled = state.pending !== null;
  lineageBox.addEventListener("change", () => handlers.onToggleLineage(lineageBox.checked));
  lineageLabel.append(lineageBox, document.createTextNode(" lineage"));
  controls.appendChild(lineageLabel);
  header.appendChild(controls);
  app.appendChild(header);

  // --- transcript ---------------------------------------------------------
  const transcript = el(document, "main", "transcript");
  transcript.id = "transcript";
  const turns = visibleTurns(state);
  const serverTurns = state.turns.filter((t) => t.role !== "system").length;
  turns.forEach((turn, index) => {
    const bubble = el(document, "div", `bubble ${turn.role}`);
    bubble.dataset.role = turn.role;
    const content = el(document, "div", "content");
    content.textContent = turn.content;
    bubble.appendChild(content);
    if (index >= serverTurns) bubble.classList.add("pending");

    if (turn.role === "assistant") {
      const serverIndex = indexInServerTurns(state, index);
      const context = serverIndex !== null ? state.contexts[serverIndex] : undefined;
      if (context) {
        bubble.appendChild(contextPanel(document, context, state.controls.lineage));
      } else if (turn.attached_context_digest?.length) {
        const note = el(document, "div", "context-digest");
        note.textContent = `context: ${turn.attached_context_digest.length} chunks`;
        bubble.appendChild(note);
      }
    }
    transcript.appendChild(bubble);
  });
  app.appendChild(transcript);

  // --- error banner ---------------------------------------------------------
  if (state.error !== null) {
    const banner = el(document, "div", "error-banner");
    banner.id = "error-banner";
    const text = el(document, "span");
    text.textContent = state.error;
    const retry = el(document, "button", "retry") as HTMLButtonElement;
    retry.id = "retry";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => handlers.onRetry());
    banner.append(text, retry);
    app.appendChild(banner);
  }

  // --- composer ---------------------------------------------------------------
  const composer = el(document, "form", "composer") as HTMLFormElement;
  composer.id = "composer";
  const input = el(document, "input", "message") as HTMLInputElement;
  input.id = "message-input";
  input.placeholder = "ask about the codebase…";
  input.disabled = state.pending !== null;
  const send = el(document, "button", "send") as HTMLButtonElement;
  send.id = "send";
  send.type = "submit";
  send.textContent = state.pending !== null ? "…" : "Send";
  send.disabled = state.pending !== null;
  composer.append(input, send);
  composer.addEventListener("submit", (event) => {
    event.preventDefault();
    const message = input.value.trim();
    if (message) handlers.onSend(message);
  });
  app.appendChild(composer);

  root.appendChild(app);
}

/** Map a visible assistant bubble back to its index in the server turns. */
function indexInServerTurns(state: UiState, visibleIndex: number): number | null {
  let seen = -1;
  for (let i = 0; i < state.turns.length; i += 1) {
    if (state.turns[i].role === "system") continue;
    seen += 1;
    if (seen === visibleIndex) return i;
  }
  return null;
}

function contextPanel(document: Document, context: ChatContext, lineageEnabled: boolean): HTMLElement {
  const panel = el(document, "div", "context-panel");

  const section = (label: string, refs: ContextRef[]) => {
    if (refs.length === 0) return;
    const group = el(document, "div", `context-group ${label}`);
    const heading = el(document, "div", "context-heading");
    heading.textContent = label === "code" ? "Retrieved code" : "Retrieved text";
    group.appendChild(heading);
    for (const ref of refs) {
      const details = el(document, "details", "context-hit") as HTMLDetailsElement;
      const summary = el(document, "summary", "context-path");
      summary.textContent = ref.path;
      summary.dataset.chunkId = ref.chunk_id;
      details.appendChild(summary);
      const body = el(document, "pre", "context-snippet");
      body.textContent = ref.snippet ?? `(chunk ${ref.chunk_id})`;
      details.appendChild(body);
      group.appendChild(details);
    }
    panel.appendChild(group);
  };
  section("code", context.code);
  section("text", context.text);

  // Lineage section only when the switch is on and there is something to show.
  if (lineageEnabled && context.lineage.length > 0) {
    const group = el(document, "div", "context-group lineage");
    group.id = "lineage-section";
    const heading = el(document, "div", "context-heading");
    heading.textContent = "Call-chain notes";
    group.appendChild(heading);
    for (const note of context.lineage) {
      const line = el(document, "div", "lineage-note");
      line.textContent = note;
      group.appendChild(line);
    }
    panel.appendChild(group);
  }
  return panel;
}

function quotaInput(
  document: Document,
  id: string,
  label: string,
  value: number,
  onChange: (value: number) => void,
  disabled: boolean,
): HTMLElement {
  const wrap = el(document, "label", "quota");
  const input = el(document, "input") as HTMLInputElement;
  input.type = "number";
  input.id = id;
  input.min = "0";
  input.value = String(value);
  input.disabled = disabled;
  input.addEventListener("change", () => onChange(Number(input.value)));
  wrap.append(document.createTextNode(`${label} `), input);
  return wrap;
}

function el(document: Document, tag: string, className?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  return node;
}
