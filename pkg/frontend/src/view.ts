/** Render model for review tasks.
 *
 * Views are plain trees of {tag, attrs, children} nodes; the browser
 * adapter in dom.ts turns them into elements. Keeping rendering pure
 * makes the highlight logic testable without a DOM: a highlight is any
 * token node carrying the "highlight" class, and every highlight always
 * covers whole tokens.
 */

import { directionFor } from "./rtl.js";
import type { TokenRange } from "./selection.js";
import { isSelected } from "./selection.js";
import type { AdjudicationPayload, ProjectionPayload, Span, Task } from "./types.js";

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: (VNode | string)[];
}

export function h(tag: string, attrs: Record<string, string> = {}, children: (VNode | string)[] = []): VNode {
  return { tag, attrs, children };
}

function tokenNode(token: string, index: number, highlighted: boolean, extra = ""): VNode {
  const classes = ["token"];
  if (highlighted) classes.push("highlight");
  if (extra) classes.push(extra);
  return h("span", { class: classes.join(" "), "data-index": String(index) }, [token]);
}

/** One utterance as a row of token spans with an optional highlight. */
export function renderTokens(
  tokens: readonly string[],
  range: TokenRange | null,
  language: string,
  extraClass = "",
): VNode {
  const dir = directionFor(tokens, language);
  return h(
    "div",
    { class: "utterance", dir },
    tokens.map((token, index) => tokenNode(token, index, isSelected(range, index), extraClass)),
  );
}

function spanToRange(span: Span | null | undefined): TokenRange | null {
  if (!span) return null;
  return { start: span[1], end: span[2] };
}

export function renderProjectionTask(
  task: Task & { payload: ProjectionPayload },
  selection: TokenRange | null,
): VNode {
  const payload = task.payload;
  const sourceRange =
    payload.source_span[1] === null || payload.source_span[2] === null
      ? null
      : { start: payload.source_span[1], end: payload.source_span[2] };
  const targetRange = selection ?? spanToRange(payload.predicted_span);
  return h("section", { class: "task projection", "data-task": task.task_id }, [
    h("div", { class: "line source" }, [renderTokens(payload.source_tokens, sourceRange, "en", "source")]),
    h("div", { class: "line target" }, [renderTokens(payload.target_tokens, targetRange, payload.language)]),
    h("div", { class: "status" }, [
      payload.status === "null_projection" ? "no predicted counterpart" : "predicted span shown",
    ]),
  ]);
}

function describeAnswer(answer: AdjudicationPayload["answer1"]): string {
  if (answer.kind === "span") {
    return answer.target ? `antecedent ${answer.target}` : `new span [${(answer.span ?? []).join(", ")})`;
  }
  return answer.kind === "not_mention" ? "not a mention" : "no previous mention";
}

export function renderAdjudicationTask(task: Task & { payload: AdjudicationPayload }): VNode {
  const payload = task.payload;
  const context =
    payload.context_tokens && payload.query_span
      ? [renderTokens(payload.context_tokens, spanToRange(payload.query_span), "", "query")]
      : [];
  return h("section", { class: "task adjudication", "data-task": task.task_id }, [
    h("div", { class: "line context" }, context.length ? context : [`query ${payload.query}`]),
    h("div", { class: "candidates" }, [
      h("button", { class: "answer first", "data-key": "1" }, [describeAnswer(payload.answer1)]),
      h("button", { class: "answer second", "data-key": "2" }, [describeAnswer(payload.answer2)]),
      h("button", { class: "answer relabel", "data-key": "r" }, ["relabel"]),
    ]),
  ]);
}

/** Indices of highlighted tokens inside a rendered utterance, in token order. */
export function highlightedIndices(node: VNode): number[] {
  const out: number[] = [];
  const walk = (current: VNode | string): void => {
    if (typeof current === "string") return;
    const classes = (current.attrs.class ?? "").split(/\s+/);
    if (classes.includes("token") && classes.includes("highlight")) {
      out.push(Number(current.attrs["data-index"]));
    }
    current.children.forEach(walk);
  };
  walk(node);
  return out.sort((a, b) => a - b);
}

/** The dir attribute of the first utterance found in a view. */
export function utteranceDirection(node: VNode): string | null {
  if ((node.attrs.class ?? "").split(/\s+/).includes("utterance")) {
    return node.attrs.dir ?? null;
  }
  for (const child of node.children) {
    if (typeof child === "string") continue;
    const found = utteranceDirection(child);
    if (found) return found;
  }
  return null;
}
