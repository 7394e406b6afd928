/** Wire types matching the review service API. */

/** Token span in a document: [utterance index, start, end), end-exclusive. */
export type Span = [number, number, number];

export type TaskKind = "projection_review" | "adjudication";
export type TaskStatus = "open" | "done";

export interface ProjectionPayload {
  mention_id: string;
  status: "projected" | "null_projection";
  source_span: [number, number | null, number | null];
  source_tokens: string[];
  predicted_span: Span | null;
  target_tokens: string[];
  language: string;
}

export interface AnswerRecord {
  kind: "span" | "not_mention" | "no_antecedent";
  target?: string;
  span?: Span;
}

export interface AdjudicationPayload {
  query: string;
  answer1: AnswerRecord;
  answer2: AnswerRecord;
  query_span?: Span;
  context_tokens?: string[];
}

export interface Task {
  task_id: string;
  kind: TaskKind;
  doc_id: string;
  status: TaskStatus;
  payload: ProjectionPayload | AdjudicationPayload;
}

export interface TaskPage {
  tasks: Task[];
  total: number;
  next_page: string | null;
}

export type CorrectionAction = "addition" | "deletion" | "modification";

export interface CorrectionRequest {
  task_id: string;
  annotator: string;
  action: CorrectionAction;
  mention_id: string;
  span: Span | null;
  override?: boolean;
}

export type Choice = "pick_first" | "pick_second" | "relabel";

export interface AdjudicationRequest {
  task_id: string;
  annotator: string;
  query: string;
  choice: Choice;
  relabel?: AnswerRecord;
  override?: boolean;
}

export function isProjection(task: Task): task is Task & { payload: ProjectionPayload } {
  return task.kind === "projection_review";
}
