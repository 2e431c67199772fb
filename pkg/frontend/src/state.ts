// Client-side mirror of the server session plus UI-only bookkeeping.
// The mirror only advances on server acknowledgment.

import type { SessionView } from "./api.js";

export interface UiState {
  view: SessionView | null;
  quizItems: string[];
  // single-flight guard: at most one request may be outstanding
  inFlight: boolean;
  // arms unlock only after the reward of the previous choice was shown
  locked: boolean;
  lastOutcome: number | null;
  showBlockBreak: boolean;
  error: string | null;
}

export function initialState(): UiState {
  return {
    view: null,
    quizItems: [],
    inFlight: false,
    locked: false,
    lastOutcome: null,
    showBlockBreak: false,
    error: null,
  };
}

export function applyServerView(state: UiState, view: SessionView): UiState {
  const quizItems = view.quiz ?? state.quizItems;
  return { ...state, view, quizItems, error: null };
}

export function applyChoiceResult(
  state: UiState,
  reward: number,
  view: SessionView,
): UiState {
  const previous = state.view;
  const blockAdvanced =
    previous !== null && (view.block !== previous.block || view.phase === "done");
  return {
    ...state,
    view,
    lastOutcome: reward,
    showBlockBreak: blockAdvanced,
    error: null,
  };
}

export function trialCounter(view: SessionView): string {
  return `Block ${view.block}/${view.total_blocks} - Trial ${Math.min(
    view.trial,
    view.trials_per_block,
  )}/${view.trials_per_block}`;
}

// A fixed per-session shuffle of arm display positions avoids position
// confounds while keeping the layout stable for the participant.
export function armOrder(sessionId: string, storage: Storage): number[] {
  const key = `arm-order-${sessionId}`;
  const saved = storage.getItem(key);
  if (saved) {
    return JSON.parse(saved) as number[];
  }
  const arms = [1, 2, 3];
  for (let i = arms.length - 1; i > 0; i--) {
    const j = Math.floor(Math.random() * (i + 1));
    [arms[i], arms[j]] = [arms[j], arms[i]];
  }
  storage.setItem(key, JSON.stringify(arms));
  return arms;
}
