// Typed client for the study-service HTTP API. All state lives on the server;
// the UI never fabricates rewards or phase transitions.

export type Phase = "instructions" | "quiz" | "md" | "pe" | "done";

export interface SessionView {
  id: string;
  phase: Phase;
  condition: string;
  block: number;
  trial: number;
  block_complete: boolean;
  total_blocks: number;
  trials_per_block: number;
  total_reward: number;
  last_reward: number | null;
  awaiting_inference: boolean;
  inferred_model: number | null;
  quiz_attempts: number;
  quiz?: string[];
}

export interface QuizResult {
  passed: boolean;
  phase: Phase;
}

export interface ChoiceResult {
  reward: number;
  state: SessionView;
}

export interface Debrief {
  bonus_pence: number;
  total_reward: number;
  inferred_model: number | null;
  condition: string;
}

export class ApiError extends Error {
  constructor(
    readonly code: string,
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class StudyClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.base}${path}`, {
        headers: { "Content-Type": "application/json" },
        ...init,
      });
    } catch (err) {
      throw new ApiError("network", 0, `network failure: ${String(err)}`);
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const code = body?.error?.code ?? "unknown";
      const message = body?.error?.message ?? response.statusText;
      throw new ApiError(code, response.status, message);
    }
    return body as T;
  }

  createSession(): Promise<SessionView> {
    return this.request<SessionView>("/sessions", { method: "POST" });
  }

  state(sessionId: string): Promise<SessionView> {
    return this.request<SessionView>(`/sessions/${sessionId}/state`);
  }

  submitQuiz(sessionId: string, answers: boolean[]): Promise<QuizResult> {
    return this.request<QuizResult>(`/sessions/${sessionId}/quiz`, {
      method: "POST",
      body: JSON.stringify({ answers }),
    });
  }

  submitChoice(sessionId: string, arm: number): Promise<ChoiceResult> {
    return this.request<ChoiceResult>(`/sessions/${sessionId}/choice`, {
      method: "POST",
      body: JSON.stringify({ arm }),
    });
  }

  debrief(sessionId: string): Promise<Debrief> {
    return this.request<Debrief>(`/sessions/${sessionId}/debrief`);
  }
}
