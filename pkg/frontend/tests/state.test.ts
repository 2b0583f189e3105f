import { describe, expect, it } from "vitest";

import {
  applyError, applyReply, beginSend, fromTranscript, initialState,
  setQuotas, toggleLineage, visibleTurns,
} from "../src/state.js";
import type { ChatResponse } from "../src/types.js";

const RESPONSE: ChatResponse = {
  reply: "the reply",
  context: {
    code: [{ path: "src/a.cu", chunk_id: "c1" }],
    text: [],
    lineage: [],
  },
};

describe("state reducers", () => {
  it("optimistic bubble appears while pending", () => {
    let state = fromTranscript(initialState(), "s1", []);
    state = beginSend(state, "hello");
    expect(visibleTurns(state)).toEqual([{ role: "user", content: "hello" }]);
    expect(state.pending).toBe("hello");
  });

  it("only one in-flight request per session", () => {
    let state = beginSend(fromTranscript(initialState(), "s1", []), "one");
    expect(() => beginSend(state, "two")).toThrow();
  });

  it("reply appends user and assistant turns with context", () => {
    let state = beginSend(fromTranscript(initialState(), "s1", []), "hello");
    state = applyReply(state, "hello", RESPONSE);
    expect(state.turns.map((t) => t.role)).toEqual(["user", "assistant"]);
    expect(state.contexts[1]).toEqual(RESPONSE.context);
    expect(state.pending).toBeNull();
  });

  it("error drops the optimistic bubble and keeps the message for retry", () => {
    let state = beginSend(fromTranscript(initialState(), "s1", []), "hello");
    state = applyError(state, "hello", "request failed (500)");
    expect(state.turns).toEqual([]);
    expect(visibleTurns(state)).toEqual([]);
    expect(state.failedMessage).toBe("hello");
    expect(state.error).toContain("500");
  });

  it("transcript replacement mirrors the server (reload path)", () => {
    const turns = [
      { role: "user" as const, content: "q" },
      { role: "assistant" as const, content: "a", attached_context_digest: ["c1"] },
    ];
    const state = fromTranscript(initialState(), "s9", turns);
    expect(state.sessionId).toBe("s9");
    expect(state.turns).toEqual(turns);
  });

  it("system turns are hidden from the visible transcript", () => {
    const state = fromTranscript(initialState(), "s1", [
      { role: "system", content: "hidden" },
      { role: "user", content: "visible" },
    ]);
    expect(visibleTurns(state)).toEqual([{ role: "user", content: "visible" }]);
  });

  it("lineage toggle and quota changes are pure control updates", () => {
    let state = initialState();
    state = toggleLineage(state, true);
    expect(state.controls.lineage).toBe(true);
    state = setQuotas(state, 7, 3);
    expect(state.controls).toEqual({ codeK: 7, textK: 3, lineage: true });
    state = setQuotas(state, -4, Number.NaN);
    expect(state.controls.codeK).toBe(0);
    expect(state.controls.textK).toBe(0);
  });
});
