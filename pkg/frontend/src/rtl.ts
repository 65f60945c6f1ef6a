// Direction detection for the target pane: Hebrew (and other RTL scripts)
// must render right-to-left next to the LTR English source.

const RTL_RANGES: Array<[number, number]> = [
  [0x0590, 0x05ff], // Hebrew
  [0x0600, 0x06ff], // Arabic
  [0x0700, 0x074f], // Syriac
  [0xfb1d, 0xfb4f], // Hebrew presentation forms
];

export function isRtlChar(ch: string): boolean {
  const code = ch.codePointAt(0);
  if (code === undefined) return false;
  return RTL_RANGES.some(([lo, hi]) => code >= lo && code <= hi);
}

/** "rtl" when the text's first strong directional character is RTL. */
export function textDirection(text: string): "ltr" | "rtl" {
  for (const ch of text) {
    if (isRtlChar(ch)) return "rtl";
    if (/[A-Za-z]/.test(ch)) return "ltr";
  }
  return "ltr";
}
