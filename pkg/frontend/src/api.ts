// Typed client over the backend HTTP API. The fetch function is injected so
// tests can intercept every request; the UI never talks to the network any
// other way.

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface EventsPayload {
  n_frames: number;
  events: Record<string, Array<[number, number]>>;
}

export interface DatasetSummary {
  id: string;
  n_frames: number;
  animal_ids: string[];
  bodypart_names: string[];
  frame_size: [number, number];
  objects: string[];
}

export interface UtteranceResult {
  resolved_context: string[];
  warnings: string[];
  defined: string[];
  diagnostics: Array<{ message: string; line: number | null; col: number | null; expected: string[] }>;
  symbols: string[];
}

export interface ServerStatePayload {
  version: number;
  budget: number;
  short: Array<{ role: string; text: string; tokens: number }>;
  long: Record<string, string>;
  behaviors: Array<{ name: string; source: string }>;
  objects: { objects: Array<{ name: string }> };
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public payload: Record<string, unknown>,
  ) {
    super(String(payload["error"] ?? `HTTP ${status}`));
  }
}

async function asJson<T>(response: Response): Promise<T> {
  const body = (await response.json()) as Record<string, unknown>;
  if (!response.ok) {
    throw new ApiError(response.status, body);
  }
  return body as T;
}

export class EthoApi {
  constructor(
    private readonly fetchFn: FetchLike,
    private readonly baseUrl: string = "",
  ) {}

  private url(path: string): string {
    return this.baseUrl + path;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.fetchFn(this.url(path), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => asJson<T>(r));
  }

  private get<T>(path: string): Promise<T> {
    return this.fetchFn(this.url(path)).then((r) => asJson<T>(r));
  }

  async createSession(): Promise<string> {
    const body = await this.post<{ session_id: string }>("/sessions", {});
    return body.session_id;
  }

  uploadDataset(sessionId: string, dataset: unknown, objects?: unknown): Promise<DatasetSummary> {
    return this.post(`/sessions/${sessionId}/dataset`, { dataset, objects });
  }

  getObjects(sessionId: string): Promise<{ objects: string[] }> {
    return this.get(`/sessions/${sessionId}/objects`);
  }

  addRoi(sessionId: string, name: string, polygon: Array<[number, number]>): Promise<{ objects: string[] }> {
    return this.post(`/sessions/${sessionId}/rois`, { name, polygon });
  }

  utterance(sessionId: string, text: string): Promise<UtteranceResult> {
    return this.post(`/sessions/${sessionId}/utterance`, { text });
  }

  getState(sessionId: string): Promise<ServerStatePayload> {
    return this.get(`/sessions/${sessionId}/state`);
  }

  run(sessionId: string, behavior: string, params: Record<string, unknown> = {}): Promise<EventsPayload> {
    return this.post(`/sessions/${sessionId}/run`, { behavior, params });
  }

  async ethogramSvg(sessionId: string, behaviors: string[]): Promise<string> {
    const response = await this.fetchFn(
      this.url(`/sessions/${sessionId}/ethogram.svg?behaviors=${behaviors.join(",")}`),
    );
    if (!response.ok) {
      throw new ApiError(response.status, (await response.json()) as Record<string, unknown>);
    }
    return response.text();
  }

  async trajectorySvg(
    sessionId: string,
    animal: string,
    bodyparts: string[],
    behavior?: string,
  ): Promise<string> {
    const params = new URLSearchParams({ animal, bodyparts: bodyparts.join(",") });
    if (behavior) params.set("behavior", behavior);
    const response = await this.fetchFn(this.url(`/sessions/${sessionId}/trajectory.svg?${params}`));
    if (!response.ok) {
      throw new ApiError(response.status, (await response.json()) as Record<string, unknown>);
    }
    return response.text();
  }

  retrieve(query: string, k: number): Promise<{ results: Array<{ name: string; score: number }> }> {
    return this.post("/retrieve", { query, k });
  }
}
