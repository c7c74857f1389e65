/** Wire types for the decontamination review service.
 *
 * Field names mirror the JSON payloads exactly. Score fields stay numeric
 * here, but rendering code must never transform them: the displayed string
 * is whatever the payload carried, not a client-side reformulation.
 */

export interface PolicyJson {
  mode: string;
  n_default: number;
  short_threshold: number;
  tau_i: number;
  tau_t: number;
  ack_low_tau_i?: boolean;
}

export interface DraftConfig {
  policies: Record<string, PolicyJson>;
  strip_list: string[];
}

export interface BenchmarkSummary {
  benchmark: string;
  eval_docs: number;
  flagged_matches: number;
  removed_docs: number;
  removed_share: number;
  policy: PolicyJson;
}

export interface RunManifest {
  run_id: string;
  config_hash: string;
  engine_version: string;
  started_at: string;
  finished_at: string;
  threads: number;
  counts: {
    training_docs: number;
    eval_docs: number;
    benchmarks: number;
    removed: number;
    matches_logged: number;
  };
  inputs: Record<string, string>;
}

export interface ReportRow {
  benchmark: string;
  flagged: number;
  share: number;
}

export interface VolumeReport {
  total_training_docs: number;
  rows: ReportRow[];
  tail: { label: string; benchmarks: number; flagged: number; share: number };
  union: { label: string; flagged: number; share: number };
  per_benchmark: Record<string, { flagged: number; share: number }>;
}

export interface RunInfo {
  manifest: RunManifest;
  report: VolumeReport;
}

export interface FlaggedMatch {
  training_doc_id: string;
  benchmark: string;
  eval_doc_id: string;
  sim_img: number;
  c_text: number | null;
  stage_reached: number;
  decision: string;
  train_excerpt: string;
  eval_excerpt: string;
  train_image_ids: string[];
  eval_image_ids: string[];
  /* Source-text literals captured from the response body; display uses
     these so the shown score is byte-identical to the wire. */
  sim_img_raw?: string;
  c_text_raw?: string;
}

export interface FlaggedPage {
  items: FlaggedMatch[];
  page: number;
  page_size: number;
  total: number;
  total_pages: number;
}

export interface SweepSamplePair {
  id: string;
  eval_id: string;
  sim_img: number;
  c_text: number;
  stage: number;
  training: { excerpt: string; image_ids: string[] };
  eval: { excerpt: string; image_ids: string[] };
}

export interface SweepProfile {
  benchmark: string;
  axis: string;
  grid: number[];
  flagged_counts: number[];
  tau_i: number;
  mode: string;
  candidate_count: number;
  eval_doc_count: number;
  containment_computations: number;
  samples?: { tau_t: number; pairs: SweepSamplePair[] }[];
  sample_seed?: number;
}

export interface OverrideRequest {
  benchmark: string;
  tau_i?: number;
  tau_t?: number;
  mode?: string;
  ack_low_tau_i?: boolean;
}

export interface OverrideResponse {
  benchmark: string;
  policy: PolicyJson;
  draft_config: DraftConfig;
}

export interface FrontierRow {
  name: string;
  accuracy: number;
  response_flops: number;
}
