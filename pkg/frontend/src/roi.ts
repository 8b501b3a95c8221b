// Polygon-drawing state machine for the ROI canvas. Pure data in, pure data
// out; the canvas binding in app.ts only forwards clicks.

export interface RoiDraft {
  vertices: Array<[number, number]>;
  name: string;
}

export function emptyDraft(): RoiDraft {
  return { vertices: [], name: "" };
}

export function addVertex(draft: RoiDraft, x: number, y: number): RoiDraft {
  return { ...draft, vertices: [...draft.vertices, [x, y]] };
}

export function undoVertex(draft: RoiDraft): RoiDraft {
  return { ...draft, vertices: draft.vertices.slice(0, -1) };
}

export function setName(draft: RoiDraft, name: string): RoiDraft {
  return { ...draft, name };
}

export function canClose(draft: RoiDraft): boolean {
  return draft.vertices.length >= 3 && draft.name.trim().length > 0;
}

// The server is the validator; the draft survives rejection for editing.
export function polygonOf(draft: RoiDraft): Array<[number, number]> {
  return draft.vertices.map(([x, y]) => [x, y]);
}
