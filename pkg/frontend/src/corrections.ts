/** Build request bodies from reviewer actions.
 *
 * Every submitted span is a contiguous token range the reviewer actually
 * selected (end-exclusive); the UI never fabricates spans. Accepting a
 * task records an explicit confirmation: a modification restating the
 * predicted span, or a deletion restating a null projection, both of
 * which replay as no-ops.
 */

import type { TokenRange } from "./selection.js";
import type {
  AdjudicationPayload,
  AdjudicationRequest,
  AnswerRecord,
  Choice,
  CorrectionRequest,
  ProjectionPayload,
  Span,
  Task,
} from "./types.js";

export function acceptCorrection(
  task: Task & { payload: ProjectionPayload },
  annotator: string,
): CorrectionRequest {
  const payload = task.payload;
  if (payload.predicted_span) {
    return {
      task_id: task.task_id,
      annotator,
      action: "modification",
      mention_id: payload.mention_id,
      span: payload.predicted_span,
    };
  }
  return {
    task_id: task.task_id,
    annotator,
    action: "deletion",
    mention_id: payload.mention_id,
    span: null,
  };
}

/** "No counterpart": discard the predicted projection. */
export function deleteCorrection(
  task: Task & { payload: ProjectionPayload },
  annotator: string,
): CorrectionRequest {
  return {
    task_id: task.task_id,
    annotator,
    action: "deletion",
    mention_id: task.payload.mention_id,
    span: null,
  };
}

/** A drawn selection: addition for null projections, else modification. */
export function selectionCorrection(
  task: Task & { payload: ProjectionPayload },
  annotator: string,
  utterance: number,
  range: TokenRange,
): CorrectionRequest {
  const span: Span = [utterance, range.start, range.end];
  return {
    task_id: task.task_id,
    annotator,
    action: task.payload.predicted_span ? "modification" : "addition",
    mention_id: task.payload.mention_id,
    span,
  };
}

export function pickDecision(
  task: Task & { payload: AdjudicationPayload },
  annotator: string,
  choice: Exclude<Choice, "relabel">,
): AdjudicationRequest {
  return {
    task_id: task.task_id,
    annotator,
    query: task.payload.query,
    choice,
  };
}

export function relabelDecision(
  task: Task & { payload: AdjudicationPayload },
  annotator: string,
  answer: AnswerRecord,
): AdjudicationRequest {
  return {
    task_id: task.task_id,
    annotator,
    query: task.payload.query,
    choice: "relabel",
    relabel: answer,
  };
}

/** Keyboard shortcuts shared by both task kinds. */
export const KEYBOARD_SHORTCUTS: Record<string, string> = {
  "1": "pick first answer",
  "2": "pick second answer",
  r: "relabel (opens span selection)",
  n: "relabel as not-a-mention",
  a: "accept prediction",
  d: "no counterpart (delete)",
  Enter: "submit current selection",
  Escape: "clear selection",
};

export function decisionForKey(
  task: Task & { payload: AdjudicationPayload },
  annotator: string,
  key: string,
): AdjudicationRequest | null {
  if (key === "1") return pickDecision(task, annotator, "pick_first");
  if (key === "2") return pickDecision(task, annotator, "pick_second");
  if (key === "n") return relabelDecision(task, annotator, { kind: "not_mention" });
  return null;
}
