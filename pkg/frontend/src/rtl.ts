/** Script-direction handling.
 *
 * Right-to-left targets (Farsi here) must render with correct
 * directionality or highlights land on the wrong glyph run. Direction
 * comes from the language tag when known and falls back to the first
 * strong directional character of the text.
 */

const RTL_LANGUAGES = new Set(["fa", "ar", "he", "ur", "ps", "yi"]);

// Hebrew, Arabic, Syriac, Thaana, plus the Arabic presentation forms.
const STRONG_RTL = /[֐-ࣿיִ-﷿ﹰ-ﻼ]/;
const STRONG_LTR = /[A-Za-zÀ-ɏͰ-ϿЀ-ӿ]/;

export type Direction = "ltr" | "rtl";

export function directionForLanguage(language: string): Direction | null {
  const primary = language.toLowerCase().split(/[-_]/)[0];
  if (RTL_LANGUAGES.has(primary)) return "rtl";
  if (primary) return "ltr";
  return null;
}

/** First strong directional character decides; LTR when none found. */
export function directionForText(text: string): Direction {
  for (const ch of text) {
    if (STRONG_RTL.test(ch)) return "rtl";
    if (STRONG_LTR.test(ch)) return "ltr";
  }
  return "ltr";
}

export function directionFor(tokens: readonly string[], language: string): Direction {
  return directionForLanguage(language) ?? directionForText(tokens.join(" "));
}
