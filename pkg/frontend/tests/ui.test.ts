import { beforeEach, describe, expect, it } from "vitest";

import { StudyClient } from "../src/api.js";
import { TaskController } from "../src/ui.js";
import { MockService } from "./mockservice.js";

const PASSING = [true, true, false, true, false];

function makeController(service: MockService, lockoutMs = 0) {
  const root = document.createElement("main");
  document.body.appendChild(root);
  // late-bound so tests may swap service.fetchImpl mid-flight
  const client = new StudyClient("http://mock", (input, init) =>
    service.fetchImpl(input, init),
  );
  return { root, controller: new TaskController(root, client, { lockoutMs }) };
}

function tick(ms = 0): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

beforeEach(() => {
  window.sessionStorage.clear();
  document.body.replaceChildren();
});

describe("quiz flow", () => {
  it("fail returns to instructions, pass starts the task", async () => {
    const service = new MockService();
    const { root, controller } = makeController(service);
    await controller.start();
    expect(root.querySelector(".instructions")).toBeTruthy();

    controller.beginQuiz();
    expect(root.querySelectorAll(".quiz-item").length).toBe(5);

    await controller.submitQuiz([false, false, false, false, false]);
    expect(root.querySelector(".instructions")).toBeTruthy();
    expect(root.textContent).toContain("incorrect");

    controller.beginQuiz();
    await controller.submitQuiz(PASSING);
    expect(root.querySelector(".task")).toBeTruthy();
  });

  it("verdict comes from the server, not the client", async () => {
    const service = new MockService();
    service.quizAnswers = [false, false, false, false, false];
    const { root, controller } = makeController(service);
    await controller.start();
    controller.beginQuiz();
    // answers that look right to a client-side grader still fail here
    await controller.submitQuiz(PASSING);
    expect(root.querySelector(".instructions")).toBeTruthy();
  });
});

describe("task screen", () => {
  async function startTask(service: MockService, lockoutMs = 0) {
    const made = makeController(service, lockoutMs);
    await made.controller.start();
    made.controller.beginQuiz();
    await made.controller.submitQuiz(PASSING);
    return made;
  }

  it("one click sends exactly one POST and disables arms until the response", async () => {
    const service = new MockService();
    let release: (() => void) | null = null;
    const gate = new Promise<void>((resolve) => (release = resolve));
    const inner = service.fetchImpl;
    service.fetchImpl = async (input, init) => {
      if (String(input).endsWith("/choice")) await gate;
      return inner(input, init);
    };
    const { root, controller } = await startTask(service);
    const before = service.requestLog.filter((r) => r.path.endsWith("/choice")).length;
    const button = root.querySelector<HTMLButtonElement>("button.arm")!;
    const pending = controller.choose(Number(button.dataset.arm));
    expect(root.querySelectorAll<HTMLButtonElement>("button.arm:disabled").length).toBe(3);
    release!();
    await pending;
    const after = service.requestLog.filter((r) => r.path.endsWith("/choice")).length;
    expect(after - before).toBe(1);
  });

  it("double clicks do not double-submit", async () => {
    const service = new MockService();
    const { root, controller } = await startTask(service, 50);
    const arm = Number(root.querySelector<HTMLButtonElement>("button.arm")!.dataset.arm);
    await Promise.all([controller.choose(arm), controller.choose(arm), controller.choose(arm)]);
    const posts = service.requestLog.filter((r) => r.path.endsWith("/choice"));
    expect(posts.length).toBe(1);
    // locked during the inter-trial interval, then usable again
    expect(root.querySelectorAll("button.arm:disabled").length).toBe(3);
    await tick(70);
    expect(root.querySelectorAll("button.arm:disabled").length).toBe(0);
  });

  it("renders the server's reward and running total", async () => {
    const service = new MockService();
    const { root, controller } = await startTask(service);
    await controller.choose(2);
    expect(root.querySelector(".outcome")!.textContent).toContain("won");
    expect(root.textContent).toContain("Rewards collected: 1");
    await controller.choose(1);
    expect(root.querySelector(".outcome")!.textContent).toContain("No reward");
    expect(root.textContent).toContain("Rewards collected: 1");
  });

  it("shows a block interstitial after the 30th trial", async () => {
    const service = new MockService();
    const { root, controller } = await startTask(service);
    for (let t = 0; t < 30; t++) {
      await controller.choose(1);
    }
    expect(root.querySelector(".block-break")).toBeTruthy();
    expect(root.textContent).toContain("round 2");
  });

  it("every displayed reward originated from a server response", async () => {
    const service = new MockService();
    const { root, controller } = await startTask(service);
    const displayed: string[] = [];
    for (let t = 0; t < 12; t++) {
      await controller.choose((t % 3) + 1);
      displayed.push(root.querySelector(".outcome")!.textContent ?? "");
    }
    const session = [...service.sessions.values()][0];
    session.rewardsGiven.slice(0, 12).forEach((r, i) => {
      expect(displayed[i]).toContain(r === 1 ? "won" : "No reward");
    });
  });
});

describe("failure handling and resume", () => {
  it("network failure shows a blocking retry banner and fabricates nothing", async () => {
    const service = new MockService();
    const { root, controller } = makeController(service);
    await controller.start();
    controller.beginQuiz();
    await controller.submitQuiz(PASSING);
    const inner = service.fetchImpl;
    let failNext = true;
    service.fetchImpl = async (input, init) => {
      if (failNext && String(input).endsWith("/choice")) {
        failNext = false;
        throw new Error("socket hang up");
      }
      return inner(input, init);
    };
    await controller.choose(2);
    expect(root.querySelector(".error-banner")).toBeTruthy();
    expect(root.querySelector(".outcome")?.textContent ?? "").toBe("");
    // retry resyncs from the server instead of re-posting the choice
    root.querySelector<HTMLButtonElement>("button.retry")!.click();
    await tick();
    expect(root.querySelector(".error-banner")).toBeFalsy();
    const posts = service.requestLog.filter((r) => r.path.endsWith("/choice"));
    expect(posts.length).toBe(0);
  });

  it("a reload resumes at the server state without duplicating trials", async () => {
    const service = new MockService();
    const first = makeController(service);
    await first.controller.start();
    first.controller.beginQuiz();
    await first.controller.submitQuiz(PASSING);
    await first.controller.choose(2);
    await first.controller.choose(2);

    const second = makeController(service); // same sessionStorage
    await second.controller.start();
    expect(second.root.textContent).toContain("Trial 3/30");
    expect(second.root.textContent).toContain("Rewards collected: 2");
    expect(service.sessions.size).toBe(1);
  });
});
