import { describe, expect, it } from "vitest";

import type { RoundResult, SessionView } from "../src/api.js";
import {
  finalized,
  fragmentSessionId,
  initialState,
  responseTimeMs,
  roundResolved,
  sessionCreated,
  sessionFragment,
  submissionStarted,
} from "../src/state.js";

const view: SessionView = {
  variant: "reward_transition_aware",
  round: 0,
  rounds_total: 40,
  graph: {
    nodes: [0, 1, 2],
    attacker_root: 3,
    edges: [[3, 0], [3, 1], [0, 2]],
    exploit_counts: [1, 1, 1],
    exploit_probs: [1 / 3, 1 / 3, 1 / 3],
  },
  potential_rewards: [5, 3, 2],
  cumulative_score: 0,
  attack_probabilities: [0.5, 0.3, 0.2],
};

function result(round: number, probs?: number[]): RoundResult {
  return {
    round,
    rounds_total: 40,
    attacked_node: 1,
    delta: [1, 1, 1],
    r_D: 4.2,
    r_A: -1.1,
    cumulative_score: round * 4.2,
    protection: 1,
    attack_probabilities: probs,
  };
}

describe("session state", () => {
  it("mirrors the server view on creation", () => {
    const s = sessionCreated(initialState(), "abc", view, 100);
    expect(s.phase).toBe("playing");
    expect(s.sessionId).toBe("abc");
    expect(s.roundsTotal).toBe(40);
    expect(s.probabilities).toEqual([0.5, 0.3, 0.2]);
    expect(s.roundStartedAt).toBe(100);
  });

  it("locks input while a submission is in flight", () => {
    const s = sessionCreated(initialState(), "abc", view, 0);
    const awaiting = submissionStarted(s);
    expect(awaiting.phase).toBe("awaiting");
    expect(() => submissionStarted(awaiting)).toThrow(/awaiting/);
  });

  it("rejects submission before a session exists", () => {
    expect(() => submissionStarted(initialState())).toThrow(/start/);
  });

  it("returns to playing after a mid-session round", () => {
    let s = sessionCreated(initialState(), "abc", view, 0);
    s = submissionStarted(s);
    s = roundResolved(s, result(1, [0.6, 0.2, 0.2]), 50);
    expect(s.phase).toBe("playing");
    expect(s.round).toBe(1);
    expect(s.cumulativeScore).toBeCloseTo(4.2);
    expect(s.probabilities).toEqual([0.6, 0.2, 0.2]);
    expect(s.roundStartedAt).toBe(50);
  });

  it("keeps prior probabilities when the result omits them", () => {
    let s = sessionCreated(initialState(), "abc", view, 0);
    s = roundResolved(submissionStarted(s), result(1), 0);
    expect(s.probabilities).toEqual([0.5, 0.3, 0.2]);
  });

  it("finishes after the last round and stores the final code", () => {
    let s = sessionCreated(initialState(), "abc", view, 0);
    s = roundResolved(submissionStarted(s), result(40), 0);
    expect(s.phase).toBe("finished");
    s = finalized(s, 168, "code123");
    expect(s.finalScore).toBe(168);
    expect(s.confirmationCode).toBe("code123");
  });

  it("measures response time from the round start", () => {
    const s = sessionCreated(initialState(), "abc", view, 1000);
    expect(responseTimeMs(s, 1450)).toBe(450);
    expect(responseTimeMs(initialState(), 1450)).toBe(0);
  });

  it("round-trips the session id through the URL fragment", () => {
    expect(fragmentSessionId(sessionFragment("a_B-9"))).toBe("a_B-9");
    expect(fragmentSessionId("#other=1")).toBeNull();
    expect(fragmentSessionId("")).toBeNull();
  });
});
