import { describe, expect, it } from "vitest";

import {
  beginDrag,
  clampRange,
  clickToken,
  dragRange,
  emptySelection,
  extendDrag,
  isSelected,
} from "../src/selection.js";

describe("dragRange", () => {
  it("maps a drag over tokens 3..5 to the end-exclusive range [3, 6)", () => {
    expect(dragRange(3, 5)).toEqual({ start: 3, end: 6 });
  });

  it("is direction-agnostic: backward drags give the same range", () => {
    expect(dragRange(5, 3)).toEqual(dragRange(3, 5));
  });

  it("covers a single token as [i, i+1)", () => {
    expect(dragRange(4, 4)).toEqual({ start: 4, end: 5 });
  });
});

describe("click and drag state", () => {
  it("click selects one token, second click on it clears", () => {
    let state = clickToken(emptySelection(), 2, false);
    expect(state.range).toEqual({ start: 2, end: 3 });
    state = clickToken(state, 2, false);
    expect(state.range).toBeNull();
  });

  it("shift-click extends from the anchor", () => {
    let state = clickToken(emptySelection(), 1, false);
    state = clickToken(state, 4, true);
    expect(state.range).toEqual({ start: 1, end: 5 });
  });

  it("extendDrag tracks the moving focus across the anchor", () => {
    let state = beginDrag(emptySelection(), 3);
    state = extendDrag(state, 6);
    expect(state.range).toEqual({ start: 3, end: 7 });
    state = extendDrag(state, 0);
    expect(state.range).toEqual({ start: 0, end: 4 });
  });
});

describe("range helpers", () => {
  it("isSelected respects end-exclusivity", () => {
    const range = { start: 2, end: 4 };
    expect([0, 1, 2, 3, 4].map((i) => isSelected(range, i))).toEqual([
      false,
      false,
      true,
      true,
      false,
    ]);
  });

  it("clampRange trims to the utterance and drops empty results", () => {
    expect(clampRange({ start: -2, end: 3 }, 10)).toEqual({ start: 0, end: 3 });
    expect(clampRange({ start: 8, end: 12 }, 10)).toEqual({ start: 8, end: 10 });
    expect(clampRange({ start: 11, end: 12 }, 10)).toBeNull();
  });
});
