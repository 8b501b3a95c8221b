// Hover mapping for the ethogram viewer: pixel position -> frame -> bout.
// Pure lookups into a run payload; the SVG itself is server-rendered.

import { EventsPayload } from "./api.js";

export interface HoverInfo {
  frame: number;
  key: string | null;
  eventIndex: number | null;
}

export function frameAtFraction(fraction: number, nFrames: number): number {
  const clamped = Math.min(Math.max(fraction, 0), 1);
  return Math.min(Math.floor(clamped * nFrames), nFrames - 1);
}

export function boutAt(payload: EventsPayload, key: string, frame: number): number | null {
  const bouts = payload.events[key] ?? [];
  for (let i = 0; i < bouts.length; i++) {
    const [start, end] = bouts[i];
    if (start <= frame && frame < end) {
      return i;
    }
  }
  return null;
}

export function hoverInfo(payload: EventsPayload, key: string, fraction: number): HoverInfo {
  const frame = frameAtFraction(fraction, payload.n_frames);
  return { frame, key, eventIndex: boutAt(payload, key, frame) };
}
