/** Raw score literals for display.
 *
 * Reviewers compare on-screen scores against run logs, so the UI must show
 * the exact decimal text the service serialized. Round-tripping through
 * JSON.parse and String() is not faithful: the payload literal 1.0 comes
 * back as "1". Instead the flagged-page body text is scanned for the source
 * literal of every sim_img and c_text value and those substrings are
 * attached to the parsed items.
 */

import type { FlaggedPage } from "./types.js";

const LITERAL = /-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?|null/y;

/* Occurrences of `"<key>": <number|null>` in source order. A key string
   inside an excerpt arrives with escaped quotes, so requiring the quote
   before the key to be unescaped rules out false matches. */
export function scanScoreLiterals(body: string, key: string): string[] {
  const needle = `"${key}"`;
  const out: string[] = [];
  let from = 0;
  for (;;) {
    const at = body.indexOf(needle, from);
    if (at < 0) break;
    from = at + needle.length;
    if (at > 0 && body[at - 1] === "\\") continue;
    let cursor = from;
    while (cursor < body.length && (body[cursor] === ":" || body[cursor] === " " || body[cursor] === "\n")) {
      cursor += 1;
    }
    LITERAL.lastIndex = cursor;
    const hit = LITERAL.exec(body);
    if (hit !== null) out.push(hit[0]);
  }
  return out;
}

/** Attach source-text score literals to a parsed flagged page.
 *
 * Returns the page unchanged if the scan does not line up with the item
 * count; renderers then fall back to String() on the parsed values.
 */
export function attachRawScores(body: string, page: FlaggedPage): FlaggedPage {
  const sims = scanScoreLiterals(body, "sim_img");
  const cs = scanScoreLiterals(body, "c_text");
  if (sims.length !== page.items.length || cs.length !== page.items.length) return page;
  page.items.forEach((item, i) => {
    item.sim_img_raw = sims[i];
    const c = cs[i];
    if (c !== undefined && c !== "null") item.c_text_raw = c;
  });
  return page;
}
