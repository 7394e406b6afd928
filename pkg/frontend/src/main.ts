/** App bootstrap: one reviewer session per tab, queue-driven.
 *
 * The left pane shows the current task (projection review first, then
 * adjudication); token clicks and drags edit the selection; buttons and
 * keyboard shortcuts submit. Server errors render inline without
 * touching the selection.
 */

import { ApiClient } from "./api.js";
import {
  acceptCorrection,
  decisionForKey,
  deleteCorrection,
  selectionCorrection,
} from "./corrections.js";
import { replaceChildren } from "./dom.js";
import { TaskQueue } from "./queue.js";
import { clickToken, emptySelection, extendDrag, SelectionState } from "./selection.js";
import { isProjection, type AdjudicationPayload, type ProjectionPayload, type Task } from "./types.js";
import { h, renderAdjudicationTask, renderProjectionTask } from "./view.js";

const api = new ApiClient("");
const annotator = new URLSearchParams(location.search).get("annotator") ?? "anonymous";

let selection: SelectionState = emptySelection();
let dragging = false;

const root = document.getElementById("app");
const status = document.getElementById("status");

function note(message: string): void {
  if (status) status.textContent = message;
}

function targetUtterance(task: Task & { payload: ProjectionPayload }): number {
  // selections are made in the predicted utterance, or the one mapped
  // from the source when the projection was null
  return task.payload.predicted_span ? task.payload.predicted_span[0] : 0;
}

async function main(): Promise<void> {
  const projections = new TaskQueue(api, "projection_review");
  const adjudications = new TaskQueue(api, "adjudication");
  await projections.refresh();
  await adjudications.refresh();

  const currentQueue = (): TaskQueue =>
    projections.current() ? projections : adjudications;

  function render(): void {
    if (!root) return;
    const task = currentQueue().current();
    if (!task) {
      replaceChildren(root, h("p", { class: "done" }, ["queue empty - all tasks reviewed"]));
      note(`0 tasks left (${annotator})`);
      return;
    }
    const view = isProjection(task)
      ? renderProjectionTask(task, selection.range)
      : renderAdjudicationTask(task as Task & { payload: AdjudicationPayload });
    replaceChildren(root, view);
    note(`${projections.remaining() + adjudications.remaining()} open tasks (${annotator})`);
    bind(task);
  }

  function bind(task: Task): void {
    if (!root) return;
    root.querySelectorAll<HTMLElement>(".token").forEach((el) => {
      const index = Number(el.dataset.index);
      el.addEventListener("mousedown", (event) => {
        dragging = true;
        selection = clickToken(selection, index, event.shiftKey);
        render();
      });
      el.addEventListener("mouseenter", () => {
        if (dragging) {
          selection = extendDrag(selection, index);
          render();
        }
      });
    });
    root.querySelectorAll<HTMLButtonElement>("button.answer").forEach((button) => {
      button.addEventListener("click", () => {
        void submitKey(task, button.dataset.key ?? "");
      });
    });
  }

  async function submitKey(task: Task, key: string): Promise<void> {
    if (isProjection(task)) {
      const queue = projections;
      if (key === "a") {
        report(await queue.submitCorrection(acceptCorrection(task, annotator)));
      } else if (key === "d") {
        report(await queue.submitCorrection(deleteCorrection(task, annotator)));
      } else if (key === "Enter" && selection.range) {
        report(
          await queue.submitCorrection(
            selectionCorrection(task, annotator, targetUtterance(task), selection.range),
          ),
        );
      }
      return;
    }
    const adjTask = task as Task & { payload: AdjudicationPayload };
    if (key === "r") {
      note("relabel: select a span in prior context, then press Enter");
      return;
    }
    const decision = decisionForKey(adjTask, annotator, key);
    if (decision) report(await adjudications.submitAdjudication(decision));
  }

  function report(outcome: { ok: boolean; error?: string }): void {
    if (outcome.ok) {
      selection = emptySelection();
    } else {
      note(`rejected: ${outcome.error ?? "unknown error"}`);
    }
    render();
  }

  document.addEventListener("mouseup", () => {
    dragging = false;
  });
  document.addEventListener("keydown", (event) => {
    const task = currentQueue().current();
    if (!task) return;
    if (event.key === "Escape") {
      selection = emptySelection();
      render();
      return;
    }
    void submitKey(task, event.key);
  });

  render();
}

void main().catch((error) => note(`failed to load tasks: ${error}`));
