// Typed client for the game service HTTP API. All calls go through an
// injectable fetch so tests can replay recorded responses.

export type Variant = "reward_aware" | "reward_transition_aware";

export type GraphView = {
  nodes: number[];
  attacker_root: number;
  edges: [number, number][];
  exploit_counts: number[];
  exploit_probs: number[];
};

export type SessionView = {
  variant: Variant;
  round: number;
  rounds_total: number;
  graph: GraphView;
  potential_rewards: number[];
  cumulative_score: number;
  attack_probabilities?: number[];
};

export type CreateResponse = {
  session_id: string;
  view: SessionView;
};

export type RoundResult = {
  round: number;
  rounds_total: number;
  attacked_node: number;
  delta: number[];
  r_D: number;
  r_A: number;
  cumulative_score: number;
  protection: number;
  attack_probabilities?: number[];
};

export type FinalizeResponse = {
  score: number;
  code: string;
};

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class GameClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(
    path: string,
    method: string,
    body?: unknown,
  ): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : {},
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  createSession(variant: Variant): Promise<CreateResponse> {
    return this.request<CreateResponse>("/session", "POST", { variant });
  }

  submitAction(
    sessionId: string,
    node: number,
    responseTimeMs: number,
  ): Promise<RoundResult> {
    return this.request<RoundResult>(`/session/${sessionId}/action`, "POST", {
      node,
      response_time_ms: responseTimeMs,
    });
  }

  finalize(sessionId: string): Promise<FinalizeResponse> {
    return this.request<FinalizeResponse>(
      `/session/${sessionId}/finalize`,
      "POST",
    );
  }

  exportSession(sessionId: string): Promise<Record<string, unknown>> {
    return this.request<Record<string, unknown>>(
      `/session/${sessionId}/export`,
      "GET",
    );
  }
}
