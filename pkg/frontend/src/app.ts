// Application wiring: start screen with variant choice, per-round submission
// with input locking and response timing, and the finish screen.

import { ApiError, GameClient, type Variant } from "./api.js";
import {
  type ClientSessionState,
  finalized,
  fragmentSessionId,
  initialState,
  responseTimeMs,
  roundResolved,
  sessionCreated,
  sessionFragment,
  submissionStarted,
} from "./state.js";
import {
  renderFeedback,
  renderFinish,
  renderGraph,
  renderProbabilityBars,
  renderRoundStatus,
} from "./render.js";

export type AppElements = {
  start: HTMLElement;
  game: HTMLElement;
  graph: HTMLElement;
  probabilities: HTMLElement;
  status: HTMLElement;
  feedback: HTMLElement;
  finish: HTMLElement;
};

export class App {
  state: ClientSessionState = initialState();

  constructor(
    private client: GameClient,
    private el: AppElements,
    private now: () => number = () => performance.now(),
    private onCopy: (code: string) => void = (code) =>
      navigator.clipboard?.writeText(code),
  ) {}

  async start(variant: Variant): Promise<void> {
    const created = await this.client.createSession(variant);
    this.state = sessionCreated(
      this.state,
      created.session_id,
      created.view,
      this.now(),
    );
    if (typeof window !== "undefined") {
      window.location.hash = sessionFragment(created.session_id);
    }
    this.el.start.hidden = true;
    this.el.game.hidden = false;
    this.redraw();
  }

  async pickNode(node: number): Promise<void> {
    if (this.state.phase !== "playing") {
      return; // input locked while a request is in flight or after finish
    }
    const rt = responseTimeMs(this.state, this.now());
    this.state = submissionStarted(this.state);
    try {
      const result = await this.client.submitAction(
        this.state.sessionId!,
        node,
        rt,
      );
      this.state = roundResolved(this.state, result, this.now());
    } catch (error) {
      if (error instanceof ApiError && (error.status === 409 ||
        error.status === 404)) {
        await this.finish();
        return;
      }
      this.state = { ...this.state, phase: "playing" };
      throw error;
    }
    this.redraw();
    if (this.state.phase === "finished") {
      await this.finish();
    }
  }

  async finish(): Promise<void> {
    const fin = await this.client.finalize(this.state.sessionId!);
    this.state = finalized(this.state, fin.score, fin.code);
    this.el.game.hidden = true;
    this.el.finish.hidden = false;
    renderFinish(this.el.finish, fin.score, fin.code, this.onCopy);
  }

  redraw(): void {
    const view = this.state.view;
    if (!view) return;
    renderGraph(this.el.graph, view.graph, view.potential_rewards, (node) => {
      void this.pickNode(node);
    });
    renderProbabilityBars(this.el.probabilities, this.state.probabilities);
    renderRoundStatus(this.el.status, this.state);
    renderFeedback(this.el.feedback, this.state.lastResult);
  }
}

export function resumeSessionId(): string | null {
  if (typeof window === "undefined") return null;
  return fragmentSessionId(window.location.hash);
}

export function mount(baseUrl = ""): App {
  const byId = (id: string): HTMLElement => {
    const el = document.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el;
  };
  const app = new App(new GameClient(baseUrl), {
    start: byId("start-screen"),
    game: byId("game-screen"),
    graph: byId("graph"),
    probabilities: byId("probabilities"),
    status: byId("round-status"),
    feedback: byId("feedback"),
    finish: byId("finish-screen"),
  });
  for (const variant of [
    "reward_aware",
    "reward_transition_aware",
  ] as Variant[]) {
    document
      .getElementById(`start-${variant}`)
      ?.addEventListener("click", () => void app.start(variant));
  }
  return app;
}
