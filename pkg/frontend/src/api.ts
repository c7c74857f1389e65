/** Typed client for the review service HTTP API.
 *
 * Every method maps one-to-one onto a service route and returns the parsed
 * payload untouched. The fetch function is injected so tests can replay
 * recorded responses without a network.
 */

import type {
  BenchmarkSummary,
  DraftConfig,
  FlaggedPage,
  FrontierRow,
  OverrideRequest,
  OverrideResponse,
  RunInfo,
  SweepProfile,
} from "./types.js";
import { attachRawScores } from "./verbatim.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly payload: unknown;

  constructor(status: number, message: string, payload: unknown) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.payload = payload;
  }
}

export interface FlaggedQuery {
  benchmark?: string;
  page?: number;
  page_size?: number;
  min_sim?: string;
  min_c?: string;
}

/* Filter thresholds travel as strings: the client forwards what the user
   typed and lets the service parse it, so no float round trip happens on
   this side of the wire. */
function flaggedParams(query: FlaggedQuery): string {
  const params = new URLSearchParams();
  if (query.benchmark !== undefined) params.set("benchmark", query.benchmark);
  if (query.page !== undefined) params.set("page", String(query.page));
  if (query.page_size !== undefined) params.set("page_size", String(query.page_size));
  if (query.min_sim !== undefined && query.min_sim !== "") params.set("min_sim", query.min_sim);
  if (query.min_c !== undefined && query.min_c !== "") params.set("min_c", query.min_c);
  const text = params.toString();
  return text === "" ? "" : `?${text}`;
}

async function errorFrom(res: Response): Promise<ApiError> {
  let payload: unknown = null;
  let message = `request failed with status ${res.status}`;
  try {
    payload = await res.json();
    if (payload && typeof payload === "object") {
      const body = payload as Record<string, unknown>;
      if (typeof body.detail === "string") message = body.detail;
      else if (typeof body.message === "string") message = body.message;
    }
  } catch {
    /* non-JSON error body: keep the status line */
  }
  return new ApiError(res.status, message, payload);
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;
  private overrideQueue: Promise<unknown> = Promise.resolve();

  constructor(base: string, fetchFn: FetchLike) {
    this.base = base.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(`${this.base}${path}`);
    if (!res.ok) throw await errorFrom(res);
    return (await res.json()) as T;
  }

  benchmarks(): Promise<BenchmarkSummary[]> {
    return this.getJson("/benchmarks");
  }

  run(): Promise<RunInfo> {
    return this.getJson("/run");
  }

  async flagged(query: FlaggedQuery = {}): Promise<FlaggedPage> {
    const res = await this.fetchFn(`${this.base}/flagged${flaggedParams(query)}`);
    if (!res.ok) throw await errorFrom(res);
    const body = await res.text();
    return attachRawScores(body, JSON.parse(body) as FlaggedPage);
  }

  sweep(benchmark: string): Promise<SweepProfile> {
    return this.getJson(`/sweep/${encodeURIComponent(benchmark)}`);
  }

  overrides(): Promise<{ draft_config: DraftConfig }> {
    return this.getJson("/overrides");
  }

  frontier(): Promise<FrontierRow[]> {
    return this.getJson("/frontier");
  }

  assetUrl(imageId: string): string {
    return `${this.base}/assets/${encodeURIComponent(imageId)}`;
  }

  /** Stage one policy override on the server's draft config.
   *
   * Calls are serialized through an internal queue: the draft config is
   * cumulative server-side state, so two in-flight POSTs could interleave
   * and clobber each other's view of it.
   */
  stageOverride(request: OverrideRequest): Promise<OverrideResponse> {
    const step = this.overrideQueue
      .catch(() => undefined)
      .then(async () => {
        const res = await this.fetchFn(`${this.base}/overrides`, {
          method: "POST",
          headers: { "content-type": "application/json" },
          body: JSON.stringify(request),
        });
        if (!res.ok) throw await errorFrom(res);
        return (await res.json()) as OverrideResponse;
      });
    this.overrideQueue = step;
    return step;
  }
}
