/** Queue-driven task flow: fetch open tasks, auto-advance on submit.
 *
 * The server is the arbiter of task state. Submissions are optimistic:
 * the queue advances on success and stays put on failure so the
 * reviewer's selection survives a 4xx (the error is surfaced inline).
 */

import { ApiClient, ApiRequestError } from "./api.js";
import type { AdjudicationRequest, CorrectionRequest, Task } from "./types.js";

export interface SubmitOutcome {
  ok: boolean;
  advanced: boolean;
  error?: string;
  status?: number;
}

export class TaskQueue {
  private tasks: Task[] = [];
  private cursor = 0;

  constructor(
    private readonly api: ApiClient,
    readonly kind?: "projection_review" | "adjudication",
  ) {}

  async refresh(): Promise<number> {
    const tasks: Task[] = [];
    let page: string | undefined;
    do {
      const batch = await this.api.listTasks({
        kind: this.kind,
        status: "open",
        page,
        page_size: 200,
      });
      tasks.push(...batch.tasks);
      page = batch.next_page ?? undefined;
    } while (page);
    this.tasks = tasks;
    this.cursor = 0;
    return tasks.length;
  }

  current(): Task | null {
    return this.tasks[this.cursor] ?? null;
  }

  remaining(): number {
    return Math.max(0, this.tasks.length - this.cursor);
  }

  advance(): Task | null {
    if (this.cursor < this.tasks.length) this.cursor += 1;
    return this.current();
  }

  async submitCorrection(body: CorrectionRequest): Promise<SubmitOutcome> {
    try {
      await this.api.submitCorrection(body);
      this.advance();
      return { ok: true, advanced: true };
    } catch (error) {
      return failure(error);
    }
  }

  async submitAdjudication(body: AdjudicationRequest): Promise<SubmitOutcome> {
    try {
      await this.api.submitAdjudication(body);
      this.advance();
      return { ok: true, advanced: true };
    } catch (error) {
      if (error instanceof ApiRequestError && error.status === 409) {
        // already decided elsewhere: surface the read-only state and move on
        this.advance();
        return { ok: false, advanced: true, error: error.message, status: 409 };
      }
      return failure(error);
    }
  }
}

function failure(error: unknown): SubmitOutcome {
  if (error instanceof ApiRequestError) {
    return { ok: false, advanced: false, error: error.message, status: error.status };
  }
  return { ok: false, advanced: false, error: String(error) };
}
