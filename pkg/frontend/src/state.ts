/** View state carried in the URL query string.
 *
 * Filters round-trip as the strings the user typed; the service does the
 * parsing. Serialization omits defaults so a fresh view has a clean URL.
 */

import type { FlaggedQuery } from "./api.js";

export interface ViewState {
  benchmark: string | null;
  page: number;
  minSim: string;
  minC: string;
}

export const DEFAULT_STATE: ViewState = { benchmark: null, page: 1, minSim: "", minC: "" };

export function parseViewState(search: string): ViewState {
  const params = new URLSearchParams(search);
  const pageRaw = Number(params.get("page") ?? "1");
  const page = Number.isInteger(pageRaw) && pageRaw >= 1 ? pageRaw : 1;
  return {
    benchmark: params.get("benchmark"),
    page,
    minSim: params.get("min_sim") ?? "",
    minC: params.get("min_c") ?? "",
  };
}

export function serializeViewState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.benchmark !== null && state.benchmark !== "") params.set("benchmark", state.benchmark);
  if (state.page !== 1) params.set("page", String(state.page));
  if (state.minSim !== "") params.set("min_sim", state.minSim);
  if (state.minC !== "") params.set("min_c", state.minC);
  const text = params.toString();
  return text === "" ? "" : `?${text}`;
}

export function toFlaggedQuery(state: ViewState): FlaggedQuery {
  const query: FlaggedQuery = { page: state.page };
  if (state.benchmark !== null && state.benchmark !== "") query.benchmark = state.benchmark;
  if (state.minSim !== "") query.min_sim = state.minSim;
  if (state.minC !== "") query.min_c = state.minC;
  return query;
}
