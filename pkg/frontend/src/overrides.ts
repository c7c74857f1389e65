/** Draft-config override staging helpers.
 *
 * The service owns the draft config; the client builds override requests
 * from form input and shows what changed by diffing the draft against the
 * previously fetched one. A benchmark without its own policy entry resolves
 * to the "*" default, so the diff compares resolved policies and reports
 * only fields whose effective value moved.
 */

import type { DraftConfig, OverrideRequest, PolicyJson } from "./types.js";

export const POLICY_FIELDS: (keyof PolicyJson)[] = [
  "mode",
  "n_default",
  "short_threshold",
  "tau_i",
  "tau_t",
  "ack_low_tau_i",
];

export interface DiffRow {
  benchmark: string;
  field: string;
  before: string;
  after: string;
}

export function resolvePolicy(config: DraftConfig, benchmark: string): PolicyJson {
  const policy = config.policies[benchmark] ?? config.policies["*"];
  if (policy === undefined) throw new Error("draft config has no default policy");
  return policy;
}

function fieldText(value: PolicyJson[keyof PolicyJson]): string {
  return value === undefined ? "unset" : String(value);
}

export function diffDrafts(before: DraftConfig, after: DraftConfig): DiffRow[] {
  const names = new Set<string>([...Object.keys(before.policies), ...Object.keys(after.policies)]);
  const rows: DiffRow[] = [];
  for (const name of [...names].sort()) {
    const a = name === "*" ? before.policies["*"] : resolvePolicy(before, name);
    const b = name === "*" ? after.policies["*"] : resolvePolicy(after, name);
    if (a === undefined || b === undefined) continue;
    for (const field of POLICY_FIELDS) {
      if (a[field] !== b[field]) {
        rows.push({ benchmark: name, field, before: fieldText(a[field]), after: fieldText(b[field]) });
      }
    }
  }
  return rows;
}

export function renderDiff(rows: DiffRow[]): string {
  if (rows.length === 0) return `<p class="diff-empty">No staged changes.</p>`;
  const body = rows
    .map(
      (row) =>
        `<tr><td>${row.benchmark}</td><td>${row.field}</td><td class="diff-before">${row.before}</td><td class="diff-after">${row.after}</td></tr>`,
    )
    .join("");
  return `<table class="diff-table"><thead><tr><th>benchmark</th><th>field</th><th>was</th><th>staged</th></tr></thead><tbody>${body}</tbody></table>`;
}

export interface OverrideFormInput {
  benchmark: string;
  tauI: string;
  tauT: string;
  mode: string;
  ackLowTauI: boolean;
}

/** Translate form fields into an override request, skipping blanks.
 *
 * Threshold inputs are user-typed; Number() only validates them as finite
 * before they travel back to the service, which revalidates ranges.
 */
export function buildOverrideRequest(input: OverrideFormInput): OverrideRequest {
  if (input.benchmark === "") throw new Error("pick a benchmark to override");
  const request: OverrideRequest = { benchmark: input.benchmark };
  if (input.tauI.trim() !== "") {
    const v = Number(input.tauI);
    if (!Number.isFinite(v)) throw new Error(`tau_i is not a number: ${input.tauI}`);
    request.tau_i = v;
  }
  if (input.tauT.trim() !== "") {
    const v = Number(input.tauT);
    if (!Number.isFinite(v)) throw new Error(`tau_t is not a number: ${input.tauT}`);
    request.tau_t = v;
  }
  if (input.mode !== "") request.mode = input.mode;
  if (input.ackLowTauI) request.ack_low_tau_i = true;
  if (request.tau_i === undefined && request.tau_t === undefined && request.mode === undefined) {
    throw new Error("stage at least one field");
  }
  return request;
}
