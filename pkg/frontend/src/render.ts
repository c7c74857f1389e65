/** Pure HTML renderers for the review views.
 *
 * Every function takes parsed payloads and returns a markup string; nothing
 * here touches the DOM, so the renderers run unchanged under node tests.
 * Scores are printed from the raw wire literals when present and are never
 * rounded, scaled, or otherwise recomputed on the client.
 */

import type {
  BenchmarkSummary,
  FlaggedMatch,
  FlaggedPage,
  FrontierRow,
  RunInfo,
  SweepProfile,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function simText(m: FlaggedMatch): string {
  return m.sim_img_raw ?? String(m.sim_img);
}

export function containmentText(m: FlaggedMatch): string {
  if (m.c_text === null) return "n/a";
  return m.c_text_raw ?? String(m.c_text);
}

function imageStrip(ids: string[], assetUrl: (id: string) => string): string {
  return ids
    .map(
      (id) =>
        `<img class="thumb" src="${escapeHtml(assetUrl(id))}" alt="${escapeHtml(id)}" title="${escapeHtml(id)}" loading="lazy">`,
    )
    .join("");
}

export function renderMatchCard(m: FlaggedMatch, assetUrl: (id: string) => string): string {
  const badge = m.decision === "remove" ? "badge badge-remove" : "badge badge-keep";
  return `<article class="match-card" data-doc="${escapeHtml(m.training_doc_id)}">
  <header class="match-head">
    <span class="doc-id">${escapeHtml(m.training_doc_id)}</span>
    <span class="arrow">vs</span>
    <span class="doc-id">${escapeHtml(m.eval_doc_id)}</span>
    <span class="bench-chip">${escapeHtml(m.benchmark)}</span>
    <span class="${badge}">${escapeHtml(m.decision)}</span>
  </header>
  <dl class="scores">
    <dt>image similarity</dt><dd class="score-sim">${escapeHtml(simText(m))}</dd>
    <dt>text containment</dt><dd class="score-c">${escapeHtml(containmentText(m))}</dd>
    <dt>stage reached</dt><dd class="score-stage">${m.stage_reached}</dd>
  </dl>
  <div class="pair-body">
    <section class="side side-train">
      <h4>training document</h4>
      <div class="images">${imageStrip(m.train_image_ids, assetUrl)}</div>
      <blockquote>${escapeHtml(m.train_excerpt)}</blockquote>
    </section>
    <section class="side side-eval">
      <h4>benchmark document</h4>
      <div class="images">${imageStrip(m.eval_image_ids, assetUrl)}</div>
      <blockquote>${escapeHtml(m.eval_excerpt)}</blockquote>
    </section>
  </div>
</article>`;
}

export function renderFlaggedList(page: FlaggedPage, assetUrl: (id: string) => string): string {
  if (page.items.length === 0) {
    return `<p class="empty-state">No flagged pairs match the current filters.</p>`;
  }
  return page.items.map((m) => renderMatchCard(m, assetUrl)).join("\n");
}

export function renderPager(page: FlaggedPage): string {
  const prevDisabled = page.page <= 1 ? " disabled" : "";
  const nextDisabled = page.page >= page.total_pages ? " disabled" : "";
  return `<nav class="pager">
  <button type="button" data-nav="prev"${prevDisabled}>prev</button>
  <span class="pager-label">Page ${page.page} of ${Math.max(page.total_pages, 1)} (${page.total} pairs)</span>
  <button type="button" data-nav="next"${nextDisabled}>next</button>
</nav>`;
}

export function renderBenchmarkOptions(rows: BenchmarkSummary[], selected: string | null): string {
  const all = `<option value=""${selected === null ? " selected" : ""}>all benchmarks</option>`;
  const rest = rows
    .map((row) => {
      const sel = row.benchmark === selected ? " selected" : "";
      return `<option value="${escapeHtml(row.benchmark)}"${sel}>${escapeHtml(row.benchmark)} (${row.flagged_matches})</option>`;
    })
    .join("");
  return all + rest;
}

export function renderRunHeader(info: RunInfo): string {
  const m = info.manifest;
  const r = info.report;
  return `<div class="run-header">
  <span class="run-id">${escapeHtml(m.run_id)}</span>
  <span>${m.counts.training_docs} training docs</span>
  <span>${m.counts.removed} removed</span>
  <span>${escapeHtml(r.union.label)}: ${r.union.flagged}</span>
</div>`;
}

export function renderFrontier(rows: FrontierRow[]): string {
  const body = rows
    .map(
      (row) =>
        `<tr><td>${escapeHtml(row.name)}</td><td>${row.accuracy}</td><td>${row.response_flops.toExponential(2)}</td></tr>`,
    )
    .join("");
  return `<table class="frontier"><thead><tr><th>model</th><th>accuracy</th><th>flops/response</th></tr></thead><tbody>${body}</tbody></table>`;
}

export function renderSweepMeta(profile: SweepProfile): string {
  return `<p class="sweep-meta">${escapeHtml(profile.benchmark)} / ${escapeHtml(profile.axis)} sweep, ` +
    `${profile.candidate_count} candidates over ${profile.eval_doc_count} eval docs, ` +
    `${profile.containment_computations} containment computations</p>`;
}

export function renderError(message: string): string {
  return `<div class="error-box" role="alert">${escapeHtml(message)}</div>`;
}
