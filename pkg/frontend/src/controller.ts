// Orchestrates API calls and the view state. Optimistic updates are
// deliberately absent: every successful mutation is followed by a fresh GET,
// and the displayed lists come from those GET payloads alone.

import { ApiError, EthoApi } from "./api.js";
import { emptyDraft, polygonOf } from "./roi.js";
import { UiSession, clearErrors, initialState, pushError, summarizeRun } from "./state.js";

export class SessionController {
  state: UiSession = initialState();
  onChange: (() => void) | null = null;

  constructor(private readonly api: EthoApi) {}

  private notify(): void {
    this.onChange?.();
  }

  private must(): string {
    if (!this.state.sessionId) {
      throw new Error("no session yet");
    }
    return this.state.sessionId;
  }

  async createSession(): Promise<void> {
    this.state = initialState();
    this.state.sessionId = await this.api.createSession();
    this.notify();
  }

  async uploadDataset(dataset: unknown, objects?: unknown): Promise<void> {
    const sid = this.must();
    this.state.dataset = await this.api.uploadDataset(sid, dataset, objects);
    await this.refreshObjects();
  }

  async refreshObjects(): Promise<void> {
    const sid = this.must();
    this.state.objects = (await this.api.getObjects(sid)).objects;
    this.notify();
  }

  async refreshServerState(): Promise<void> {
    const sid = this.must();
    const payload = await this.api.getState(sid);
    this.state.symbols = Object.keys(payload.long).sort();
    this.state.behaviors = payload.behaviors.map((b) => b.name).sort();
    this.notify();
  }

  async submitRoi(): Promise<boolean> {
    const sid = this.must();
    clearErrors(this.state, "roi");
    try {
      await this.api.addRoi(sid, this.state.roiDraft.name, polygonOf(this.state.roiDraft));
    } catch (error) {
      if (error instanceof ApiError) {
        // rejected polygons stay on the canvas for editing
        pushError(this.state, { source: "roi", message: error.message });
        this.notify();
        return false;
      }
      throw error;
    }
    this.state.roiDraft = emptyDraft();
    await this.refreshObjects();
    return true;
  }

  async submitUtterance(text: string): Promise<void> {
    const sid = this.must();
    clearErrors(this.state, "utterance");
    const result = await this.api.utterance(sid, text);
    this.state.resolvedContext = result.resolved_context;
    this.state.warnings = result.warnings;
    for (const diag of result.diagnostics) {
      pushError(this.state, {
        source: "utterance",
        message: diag.message,
        line: diag.line,
        col: diag.col,
      });
    }
    await this.refreshServerState();
  }

  async runBehavior(behavior: string, params: Record<string, unknown> = {}): Promise<void> {
    const sid = this.must();
    clearErrors(this.state, "run");
    try {
      const payload = await this.api.run(sid, behavior, params);
      this.state.results = [...this.state.results, summarizeRun(behavior, payload)];
    } catch (error) {
      if (error instanceof ApiError) {
        pushError(this.state, { source: "run", message: error.message });
        this.notify();
        return;
      }
      throw error;
    }
    this.notify();
  }

  async loadEthogram(behaviors: string[]): Promise<void> {
    const sid = this.must();
    this.state.ethogramSvg = await this.api.ethogramSvg(sid, behaviors);
    this.notify();
  }

  async loadTrajectory(animal: string, bodyparts: string[], behavior?: string): Promise<void> {
    const sid = this.must();
    this.state.trajectorySvg = await this.api.trajectorySvg(sid, animal, bodyparts, behavior);
    this.notify();
  }
}
