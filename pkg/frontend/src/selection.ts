/** Token-range selection over a rendered utterance.
 *
 * Selections live in logical token indices and are end-exclusive, so a
 * drag over tokens 3..5 submits [3, 6). Direction never matters here:
 * RTL scripts reorder the *rendering*, not the indices, which is what
 * keeps submitted spans stable across scripts.
 */

export interface TokenRange {
  start: number;
  end: number; // exclusive
}

export interface SelectionState {
  anchor: number | null;
  range: TokenRange | null;
}

export function emptySelection(): SelectionState {
  return { anchor: null, range: null };
}

/** Range spanned by a drag (or shift-click) between two token indices. */
export function dragRange(anchor: number, focus: number): TokenRange {
  const start = Math.min(anchor, focus);
  const end = Math.max(anchor, focus) + 1;
  return { start, end };
}

export function beginDrag(state: SelectionState, index: number): SelectionState {
  return { anchor: index, range: { start: index, end: index + 1 } };
}

export function extendDrag(state: SelectionState, index: number): SelectionState {
  if (state.anchor === null) return beginDrag(state, index);
  return { anchor: state.anchor, range: dragRange(state.anchor, index) };
}

/** Click toggles a single token; shift-click extends from the anchor. */
export function clickToken(state: SelectionState, index: number, shift: boolean): SelectionState {
  if (shift && state.anchor !== null) return extendDrag(state, index);
  if (state.range && state.range.start === index && state.range.end === index + 1) {
    return emptySelection();
  }
  return beginDrag(state, index);
}

export function isSelected(range: TokenRange | null, index: number): boolean {
  return range !== null && range.start <= index && index < range.end;
}

/** Clamp a range to an utterance length; null when nothing survives. */
export function clampRange(range: TokenRange, tokenCount: number): TokenRange | null {
  const start = Math.max(0, range.start);
  const end = Math.min(tokenCount, range.end);
  return start < end ? { start, end } : null;
}
