// View state: a mirror of server payloads, never a source of truth.
//
// Invariant: every number rendered by the UI is read (or counted) straight
// out of a server payload stored here. Nothing in this module computes
// kinematics, geometry or thresholds; the only derivation allowed is
// counting entries of a payload and echoing its values.

import { DatasetSummary, EventsPayload } from "./api.js";
import { RoiDraft, emptyDraft } from "./roi.js";

export interface RunSummary {
  behavior: string;
  nFrames: number;
  perKey: Array<{ key: string; bouts: number }>;
  totalBouts: number;
  payload: EventsPayload;
}

export interface InlineError {
  source: string; // which panel raised it
  message: string;
  line?: number | null;
  col?: number | null;
}

export interface UiSession {
  sessionId: string | null;
  dataset: DatasetSummary | null;
  objects: string[];
  symbols: string[];
  behaviors: string[];
  results: RunSummary[];
  resolvedContext: string[];
  warnings: string[];
  ethogramSvg: string | null;
  trajectorySvg: string | null;
  roiDraft: RoiDraft;
  errors: InlineError[];
}

export function initialState(): UiSession {
  return {
    sessionId: null,
    dataset: null,
    objects: [],
    symbols: [],
    behaviors: [],
    results: [],
    resolvedContext: [],
    warnings: [],
    ethogramSvg: null,
    trajectorySvg: null,
    roiDraft: emptyDraft(),
    errors: [],
  };
}

export function summarizeRun(behavior: string, payload: EventsPayload): RunSummary {
  const perKey = Object.keys(payload.events)
    .sort()
    .map((key) => ({ key, bouts: payload.events[key].length }));
  let totalBouts = 0;
  for (const entry of perKey) {
    totalBouts += entry.bouts;
  }
  return { behavior, nFrames: payload.n_frames, perKey, totalBouts, payload };
}

export function pushError(state: UiSession, error: InlineError): void {
  state.errors = [...state.errors, error];
}

export function clearErrors(state: UiSession, source?: string): void {
  state.errors = source ? state.errors.filter((e) => e.source !== source) : [];
}
