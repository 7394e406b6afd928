/** Thin fetch client for the review service. */

import type { AdjudicationRequest, CorrectionRequest, TaskPage } from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiRequestError";
  }
}

async function parseError(response: Response): Promise<ApiRequestError> {
  let message = `${response.status}`;
  try {
    const body = (await response.json()) as { error?: string };
    if (body.error) message = body.error;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiRequestError(response.status, message);
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  listTasks(params: { kind?: string; doc?: string; status?: string; page?: string; page_size?: number } = {}): Promise<TaskPage> {
    const query = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== undefined) query.set(key, String(value));
    }
    const suffix = query.toString() ? `?${query.toString()}` : "";
    return this.get<TaskPage>(`/api/tasks${suffix}`);
  }

  /** Raw canonical JSON text of a document, exactly as served. */
  async getDocumentText(docId: string): Promise<string> {
    const response = await fetch(`${this.base}/api/docs/${encodeURIComponent(docId)}`);
    if (!response.ok) throw await parseError(response);
    return response.text();
  }

  submitCorrection(body: CorrectionRequest): Promise<{ task_id: string; status: string }> {
    return this.post("/api/corrections", body);
  }

  submitAdjudication(body: AdjudicationRequest): Promise<{ task_id: string; status: string }> {
    return this.post("/api/adjudications", body);
  }
}
