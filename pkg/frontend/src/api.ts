import type { ChatResponse, Controls, SessionTranscript } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the assistant service endpoints. */
export class ApiClient {
  constructor(
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
    private readonly base: string = "",
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, `HTTP ${response.status} on ${path}`);
    }
    return (await response.json()) as T;
  }

  async createSession(): Promise<string> {
    const doc = await this.request<{ session_id: string }>("/api/session", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: "{}",
    });
    return doc.session_id;
  }

  async chat(sessionId: string, message: string, controls: Controls): Promise<ChatResponse> {
    return this.request<ChatResponse>("/api/chat", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        session_id: sessionId,
        message,
        code_k: controls.codeK,
        text_k: controls.textK,
        lineage: controls.lineage,
      }),
    });
  }

  async getSession(sessionId: string): Promise<SessionTranscript> {
    return this.request<SessionTranscript>(`/api/session/${sessionId}`);
  }

  async health(): Promise<boolean> {
    try {
      const doc = await this.request<{ status: string }>("/api/health");
      return doc.status === "ok";
    } catch {
      return false;
    }
  }
}
