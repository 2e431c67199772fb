import { describe, expect, it } from "vitest";

import type { SessionView } from "../src/api.js";
import {
  applyChoiceResult,
  applyServerView,
  armOrder,
  initialState,
  trialCounter,
} from "../src/state.js";

function view(overrides: Partial<SessionView> = {}): SessionView {
  return {
    id: "s1",
    phase: "md",
    condition: "optimal",
    block: 1,
    trial: 1,
    block_complete: false,
    total_blocks: 5,
    trials_per_block: 30,
    total_reward: 0,
    last_reward: null,
    awaiting_inference: false,
    inferred_model: null,
    quiz_attempts: 0,
    ...overrides,
  };
}

describe("state mirror", () => {
  it("only advances on server acknowledgment", () => {
    let state = initialState();
    expect(state.view).toBeNull();
    state = applyServerView(state, view());
    expect(state.view?.block).toBe(1);
  });

  it("keeps quiz items from the last server view that sent them", () => {
    let state = applyServerView(initialState(), view({ quiz: ["a", "b"] }));
    state = applyServerView(state, view());
    expect(state.quizItems).toEqual(["a", "b"]);
  });

  it("records the displayed reward from the response", () => {
    let state = applyServerView(initialState(), view());
    state = applyChoiceResult(state, 1, view({ trial: 2, total_reward: 1 }));
    expect(state.lastOutcome).toBe(1);
    expect(state.view?.total_reward).toBe(1);
  });

  it("flags a block break when the server advances the block", () => {
    let state = applyServerView(initialState(), view({ trial: 30 }));
    state = applyChoiceResult(state, 0, view({ block: 2, trial: 1 }));
    expect(state.showBlockBreak).toBe(true);
    state = applyChoiceResult(state, 0, view({ block: 2, trial: 2 }));
    expect(state.showBlockBreak).toBe(false);
  });

  it("renders counters capped at the block length", () => {
    expect(trialCounter(view({ trial: 31, block: 2 }))).toBe("Block 2/5 - Trial 30/30");
    expect(trialCounter(view())).toBe("Block 1/5 - Trial 1/30");
  });
});

describe("arm order", () => {
  it("is a permutation of the three arms, fixed per session", () => {
    const order = armOrder("abc", window.sessionStorage);
    expect([...order].sort()).toEqual([1, 2, 3]);
    expect(armOrder("abc", window.sessionStorage)).toEqual(order);
  });

  it("is stored per session id", () => {
    window.sessionStorage.clear();
    const seen = new Set<string>();
    for (let i = 0; i < 64; i++) {
      seen.add(JSON.stringify(armOrder(`s${i}`, window.sessionStorage)));
    }
    expect(seen.size).toBeGreaterThan(1); // shuffled, not always identity
  });
});
