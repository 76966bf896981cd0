// DOM shell around the pure state module. The slider handler calls
// applyThreshold and re-renders; only decision clicks and session
// lifecycle actions reach the network.
import { ApiError, ReviewApi } from "./api.js";
import {
  aggregatePanel,
  applyThreshold,
  buildView,
  setDecision,
} from "./state.js";
import { Decision, UiSessionView } from "./types.js";

export class ReviewApp {
  view: UiSessionView | null = null;

  constructor(
    private api: ReviewApi,
    private root: HTMLElement
  ) {}

  async start(text: string, modelId: string): Promise<void> {
    const session = await this.api.createSession(text, modelId);
    this.view = buildView(session);
    this.render();
  }

  async resume(sessionId: string): Promise<void> {
    try {
      const session = await this.api.loadSession(sessionId);
      this.view = buildView(session);
      this.render();
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.banner("session not found");
        return;
      }
      this.banner("service unreachable; retry");
      throw err;
    }
  }

  onSlider(theta: number): void {
    if (!this.view) return;
    this.view = applyThreshold(this.view, theta);
    this.render();
  }

  async onDecide(sentenceIndex: number, technique: string, decision: Decision): Promise<void> {
    if (!this.view) return;
    const before = this.view;
    this.view = setDecision(this.view, sentenceIndex, technique, decision);
    this.render();
    try {
      await this.api.recordDecision(before.sessionId, sentenceIndex, technique, decision);
    } catch (err) {
      this.view = before; // roll back the optimistic update
      this.render();
      if (err instanceof ApiError) {
        this.banner(`decision rejected: ${err.message}`);
        return;
      }
      throw err;
    }
  }

  async onExport(): Promise<void> {
    if (!this.view) return;
    const { raw } = await this.api.exportSession(this.view.sessionId);
    const blob = new Blob([raw], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = `${this.view.sessionId}-mappings.json`;
    a.click();
    URL.revokeObjectURL(a.href);
  }

  banner(message: string): void {
    const el = this.root.querySelector(".banner");
    if (el) el.textContent = message;
  }

  render(): void {
    if (!this.view) return;
    const list = this.root.querySelector(".sentences");
    const panel = this.root.querySelector(".panel");
    const slider = this.root.querySelector<HTMLInputElement>(".threshold");
    if (!list || !panel) return;
    if (slider) slider.value = String(this.view.threshold);
    list.innerHTML = "";
    for (const sentence of this.view.sentences) {
      const row = document.createElement("div");
      row.className = sentence.nonPertinent ? "sentence non-pertinent" : "sentence";
      const text = document.createElement("p");
      text.textContent = sentence.text;
      row.appendChild(text);
      for (const chip of sentence.chips) {
        if (!chip.aboveThreshold && chip.decision === null) continue;
        const el = document.createElement("button");
        el.className = `chip ${chip.decision ?? "undecided"}`;
        el.textContent = `${chip.technique} ${chip.name} (${chip.prob.toFixed(2)})`;
        el.title = "click: accept, shift-click: reject";
        el.addEventListener("click", (ev) =>
          this.onDecide(sentence.index, chip.technique, ev.shiftKey ? "rejected" : "accepted")
        );
        row.appendChild(el);
      }
      list.appendChild(row);
    }
    panel.innerHTML = "";
    for (const technique of aggregatePanel(this.view)) {
      const li = document.createElement("li");
      li.textContent = technique;
      panel.appendChild(li);
    }
  }
}

export function mount(root: HTMLElement, baseUrl: string): ReviewApp {
  const api = new ReviewApi(baseUrl, (url, init) => fetch(url, init));
  const app = new ReviewApp(api, root);
  const slider = root.querySelector<HTMLInputElement>(".threshold");
  slider?.addEventListener("input", () => app.onSlider(Number(slider.value)));
  root.querySelector(".export")?.addEventListener("click", () => void app.onExport());
  const form = root.querySelector<HTMLFormElement>(".create");
  form?.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const text = root.querySelector<HTMLTextAreaElement>(".report-text")?.value ?? "";
    const model = root.querySelector<HTMLInputElement>(".model-id")?.value ?? "";
    void app.start(text, model);
  });
  return app;
}
