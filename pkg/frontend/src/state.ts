// Client-side session state. The store mirrors acknowledged server state
// only; probabilities are never extrapolated locally.

import type { RoundResult, SessionView, Variant } from "./api.js";

export type Phase = "start" | "playing" | "awaiting" | "finished";

export type ClientSessionState = {
  sessionId: string | null;
  variant: Variant | null;
  phase: Phase;
  round: number;
  roundsTotal: number;
  view: SessionView | null;
  lastResult: RoundResult | null;
  cumulativeScore: number;
  probabilities: number[] | null;
  finalScore: number | null;
  confirmationCode: string | null;
  roundStartedAt: number | null;
};

export function initialState(): ClientSessionState {
  return {
    sessionId: null,
    variant: null,
    phase: "start",
    round: 0,
    roundsTotal: 40,
    view: null,
    lastResult: null,
    cumulativeScore: 0,
    probabilities: null,
    finalScore: null,
    confirmationCode: null,
    roundStartedAt: null,
  };
}

export function sessionCreated(
  state: ClientSessionState,
  sessionId: string,
  view: SessionView,
  now: number,
): ClientSessionState {
  return {
    ...state,
    sessionId,
    variant: view.variant,
    phase: "playing",
    round: view.round,
    roundsTotal: view.rounds_total,
    view,
    cumulativeScore: view.cumulative_score,
    probabilities: view.attack_probabilities ?? null,
    roundStartedAt: now,
  };
}

export function submissionStarted(
  state: ClientSessionState,
): ClientSessionState {
  if (state.phase !== "playing") {
    throw new Error(`cannot submit while ${state.phase}`);
  }
  return { ...state, phase: "awaiting" };
}

export function roundResolved(
  state: ClientSessionState,
  result: RoundResult,
  now: number,
): ClientSessionState {
  const finishedAllRounds = result.round >= result.rounds_total;
  return {
    ...state,
    phase: finishedAllRounds ? "finished" : "playing",
    round: result.round,
    lastResult: result,
    cumulativeScore: result.cumulative_score,
    probabilities: result.attack_probabilities ?? state.probabilities,
    roundStartedAt: finishedAllRounds ? null : now,
  };
}

export function finalized(
  state: ClientSessionState,
  score: number,
  code: string,
): ClientSessionState {
  return {
    ...state,
    phase: "finished",
    finalScore: score,
    confirmationCode: code,
  };
}

export function responseTimeMs(
  state: ClientSessionState,
  now: number,
): number {
  if (state.roundStartedAt === null) {
    return 0;
  }
  return Math.max(0, now - state.roundStartedAt);
}

// Session id lives in the URL fragment so a refresh can resume.
export function fragmentSessionId(fragment: string): string | null {
  const match = fragment.match(/^#?session=([A-Za-z0-9_-]+)$/);
  return match ? match[1] : null;
}

export function sessionFragment(sessionId: string): string {
  return `#session=${sessionId}`;
}
