// DOM rendering and interaction wiring. Server state is authoritative: every
// displayed reward came from a server response, and a refresh resumes from
// GET /state without duplicating trials.

import { ApiError, StudyClient } from "./api.js";
import type { Debrief, SessionView } from "./api.js";
import {
  UiState,
  applyChoiceResult,
  applyServerView,
  armOrder,
  initialState,
  trialCounter,
} from "./state.js";

const SESSION_KEY = "banditboed-session";

export interface ControllerOptions {
  lockoutMs?: number;
  storage?: Storage;
}

export class TaskController {
  state: UiState = initialState();
  private quizVisible = false;
  private debrief: Debrief | null = null;
  private storage: Storage;
  private lockoutMs: number;
  private retryAction: (() => Promise<void>) | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: StudyClient,
    options: ControllerOptions = {},
  ) {
    this.lockoutMs = options.lockoutMs ?? 250;
    this.storage = options.storage ?? window.sessionStorage;
  }

  async start(): Promise<void> {
    const existing = this.storage.getItem(SESSION_KEY);
    if (existing) {
      try {
        const view = await this.client.state(existing);
        this.state = applyServerView(this.state, view);
        this.render();
        return;
      } catch (err) {
        if (err instanceof ApiError && err.code === "session_not_found") {
          this.storage.removeItem(SESSION_KEY);
        } else {
          this.showError(err, () => this.start());
          return;
        }
      }
    }
    try {
      const view = await this.client.createSession();
      this.storage.setItem(SESSION_KEY, view.id);
      this.state = applyServerView(this.state, view);
      this.render();
    } catch (err) {
      this.showError(err, () => this.start());
    }
  }

  private sessionId(): string {
    const id = this.state.view?.id;
    if (!id) throw new Error("no active session");
    return id;
  }

  beginQuiz(): void {
    this.quizVisible = true;
    this.render();
  }

  async submitQuiz(answers: boolean[]): Promise<void> {
    if (this.state.inFlight) return;
    this.state = { ...this.state, inFlight: true };
    this.render();
    try {
      const verdict = await this.client.submitQuiz(this.sessionId(), answers);
      const view = await this.client.state(this.sessionId());
      this.quizVisible = verdict.passed;
      this.state = applyServerView({ ...this.state, inFlight: false }, view);
      this.render();
    } catch (err) {
      this.state = { ...this.state, inFlight: false };
      this.showError(err, () => this.resync());
    }
  }

  async choose(arm: number): Promise<void> {
    // single-flight plus inter-trial lockout: double clicks never double-submit
    if (this.state.inFlight || this.state.locked) return;
    this.state = { ...this.state, inFlight: true };
    this.render();
    try {
      const result = await this.client.submitChoice(this.sessionId(), arm);
      const lock = this.lockoutMs > 0;
      this.state = applyChoiceResult(
        { ...this.state, inFlight: false, locked: lock },
        result.reward,
        result.state,
      );
      this.render();
      if (lock) {
        setTimeout(() => {
          this.state = { ...this.state, locked: false };
          this.render();
        }, this.lockoutMs);
      }
      if (result.state.phase === "done") {
        await this.loadDebrief();
      }
    } catch (err) {
      this.state = { ...this.state, inFlight: false };
      // the request may or may not have landed; resync rather than re-post
      this.showError(err, () => this.resync());
    }
  }

  async resync(): Promise<void> {
    try {
      const view = await this.client.state(this.sessionId());
      this.state = applyServerView({ ...this.state, inFlight: false }, view);
      this.render();
      if (view.phase === "done") {
        await this.loadDebrief();
      }
    } catch (err) {
      this.showError(err, () => this.resync());
    }
  }

  private async loadDebrief(): Promise<void> {
    try {
      this.debrief = await this.client.debrief(this.sessionId());
      this.render();
    } catch (err) {
      this.showError(err, () => this.loadDebrief());
    }
  }

  private showError(err: unknown, retry: () => Promise<void>): void {
    const message =
      err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    this.retryAction = retry;
    this.state = { ...this.state, error: message };
    this.render();
  }

  // -- rendering ---------------------------------------------------------

  render(): void {
    const view = this.state.view;
    this.root.replaceChildren();
    if (this.state.error) {
      this.root.appendChild(this.renderErrorBanner());
    }
    if (!view) {
      this.root.appendChild(el("p", "loading", "Connecting..."));
      return;
    }
    if (view.phase === "instructions" && !this.quizVisible) {
      this.root.appendChild(this.renderInstructions(view));
    } else if (view.phase === "instructions" || view.phase === "quiz") {
      this.root.appendChild(this.renderQuiz());
    } else if (view.phase === "md" || view.phase === "pe") {
      this.root.appendChild(this.renderTask(view));
    } else {
      this.root.appendChild(this.renderDebrief(view));
    }
  }

  private renderErrorBanner(): HTMLElement {
    const banner = el("div", "error-banner");
    banner.appendChild(el("p", "error-text", `Connection problem (${this.state.error})`));
    const retry = el("button", "retry") as HTMLButtonElement;
    retry.textContent = "Retry";
    retry.addEventListener("click", () => {
      this.state = { ...this.state, error: null };
      const action = this.retryAction;
      this.retryAction = null;
      if (action) void action();
    });
    banner.appendChild(retry);
    return banner;
  }

  private renderInstructions(view: SessionView): HTMLElement {
    const screen = el("div", "screen instructions");
    screen.appendChild(el("h1", "", "Welcome"));
    screen.appendChild(
      el(
        "p",
        "",
        `You will play ${view.total_blocks} rounds of a game with three slot machines. ` +
          `Each round has ${view.trials_per_block} turns. On every turn, pick one machine; ` +
          "it may pay a reward. Machines differ in how often they pay, and what worked in " +
          "one round need not work in the next. Your bonus grows with every reward you collect.",
      ),
    );
    if (view.quiz_attempts > 0) {
      screen.appendChild(
        el("p", "quiz-feedback", "At least one answer was incorrect. Please re-read and try again."),
      );
    }
    const button = el("button", "begin-quiz") as HTMLButtonElement;
    button.textContent = "Take the comprehension check";
    button.addEventListener("click", () => this.beginQuiz());
    screen.appendChild(button);
    return screen;
  }

  private renderQuiz(): HTMLElement {
    const screen = el("div", "screen quiz");
    screen.appendChild(el("h1", "", "Comprehension check"));
    const form = el("form", "quiz-form") as HTMLFormElement;
    this.state.quizItems.forEach((text, i) => {
      const row = el("fieldset", "quiz-item");
      row.appendChild(el("legend", "", text));
      for (const value of ["true", "false"]) {
        const label = el("label", "");
        const input = document.createElement("input");
        input.type = "radio";
        input.name = `q${i}`;
        input.value = value;
        input.required = true;
        label.appendChild(input);
        label.appendChild(document.createTextNode(value === "true" ? "True" : "False"));
        row.appendChild(label);
      }
      form.appendChild(row);
    });
    const submit = el("button", "quiz-submit") as HTMLButtonElement;
    submit.textContent = "Submit answers";
    submit.type = "submit";
    submit.disabled = this.state.inFlight;
    form.appendChild(submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const answers: boolean[] = [];
      for (let i = 0; i < this.state.quizItems.length; i++) {
        const checked = form.querySelector<HTMLInputElement>(`input[name=q${i}]:checked`);
        if (!checked) return;
        answers.push(checked.value === "true");
      }
      void this.submitQuiz(answers);
    });
    screen.appendChild(form);
    return screen;
  }

  private renderTask(view: SessionView): HTMLElement {
    const screen = el("div", "screen task");
    screen.appendChild(el("p", "progress", trialCounter(view)));
    screen.appendChild(el("p", "score", `Rewards collected: ${view.total_reward}`));
    if (view.awaiting_inference) {
      screen.appendChild(el("p", "notice", "Preparing the next round..."));
    }
    if (this.state.showBlockBreak && !this.state.inFlight) {
      screen.appendChild(
        el("div", "block-break", `Round complete! Next up: round ${view.block}.`),
      );
    }
    const outcome = el("div", "outcome");
    if (this.state.lastOutcome !== null) {
      outcome.classList.add(this.state.lastOutcome === 1 ? "win" : "no-win");
      outcome.textContent = this.state.lastOutcome === 1 ? "You won a coin!" : "No reward";
    }
    screen.appendChild(outcome);
    const armsBox = el("div", "arms");
    const disabled = this.state.inFlight || this.state.locked;
    for (const arm of armOrder(view.id, this.storage)) {
      const button = el("button", "arm") as HTMLButtonElement;
      button.dataset.arm = String(arm);
      button.textContent = `Machine ${"ABC"[arm - 1]}`;
      button.disabled = disabled;
      button.addEventListener("click", () => void this.choose(arm));
      armsBox.appendChild(button);
    }
    screen.appendChild(armsBox);
    return screen;
  }

  private renderDebrief(view: SessionView): HTMLElement {
    const screen = el("div", "screen debrief");
    screen.appendChild(el("h1", "", "All done!"));
    screen.appendChild(
      el("p", "final-score", `You collected ${view.total_reward} rewards.`),
    );
    if (this.debrief) {
      const pounds = (this.debrief.bonus_pence / 100).toFixed(2);
      screen.appendChild(el("p", "bonus", `Your bonus: £${pounds}`));
    } else {
      screen.appendChild(el("p", "bonus-loading", "Computing your bonus..."));
    }
    return screen;
  }
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}
