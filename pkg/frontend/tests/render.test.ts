/** Rendering invariants, chiefly: displayed scores are the wire bytes.
 *
 * The flagged list is rendered from a recorded response replayed through a
 * mock fetch, then every score string shown is checked against the source
 * literal in that response body. No rounding, reformatting, or arithmetic
 * may sit between the payload and the screen.
 */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import {
  containmentText,
  escapeHtml,
  renderBenchmarkOptions,
  renderError,
  renderFlaggedList,
  renderFrontier,
  renderMatchCard,
  renderPager,
  renderRunHeader,
  simText,
} from "../src/render.js";
import { scanScoreLiterals } from "../src/verbatim.js";
import type { BenchmarkSummary, FlaggedMatch, FlaggedPage, FrontierRow, RunInfo } from "../src/types.js";
import { fixtureJson, fixtureText, mockFetch } from "./helpers.js";

const ASSET = (id: string): string => `/assets/${id}`;

function sampleMatch(overrides: Partial<FlaggedMatch> = {}): FlaggedMatch {
  return {
    training_doc_id: "t0001",
    benchmark: "alpha",
    eval_doc_id: "e0001",
    sim_img: 0.97,
    c_text: 0.5,
    stage_reached: 2,
    decision: "remove",
    train_excerpt: "a training excerpt",
    eval_excerpt: "an eval excerpt",
    train_image_ids: ["tr-img-1"],
    eval_image_ids: ["ev-img-1"],
    ...overrides,
  };
}

describe("verbatim scores from a recorded response", () => {
  it("renders every sim and containment literal exactly as the body spelled it", async () => {
    const body = fixtureText("flagged.page1.json");
    const client = new ApiClient("", mockFetch({ "GET /flagged": body }).fetch);
    const page = await client.flagged();
    const html = renderFlaggedList(page, ASSET);

    const simLiterals = scanScoreLiterals(body, "sim_img");
    const cLiterals = scanScoreLiterals(body, "c_text");
    expect(simLiterals).toHaveLength(page.items.length);
    expect(cLiterals).toHaveLength(page.items.length);

    page.items.forEach((item, i) => {
      expect(html).toContain(`<dd class="score-sim">${simLiterals[i]}</dd>`);
      const c = cLiterals[i];
      const shown = c === "null" ? "n/a" : c;
      expect(html).toContain(`<dd class="score-c">${shown}</dd>`);
    });
  });

  it("does not collapse integral floats the way String(Number) would", async () => {
    const body = fixtureText("flagged.page1.json");
    expect(body).toContain('"c_text": 1.0');
    expect(body).toContain('"c_text": 0.0');
    const client = new ApiClient("", mockFetch({ "GET /flagged": body }).fetch);
    const html = renderFlaggedList(await client.flagged(), ASSET);
    expect(html).toContain('<dd class="score-c">1.0</dd>');
    expect(html).toContain('<dd class="score-c">0.0</dd>');
    expect(html).not.toContain('<dd class="score-c">1</dd>');
    expect(html).not.toContain('<dd class="score-c">0</dd>');
  });

  it("renders one card per payload item with its decision badge", async () => {
    const body = fixtureText("flagged.page1.json");
    const client = new ApiClient("", mockFetch({ "GET /flagged": body }).fetch);
    const page = await client.flagged();
    const html = renderFlaggedList(page, ASSET);
    expect(html.match(/<article class="match-card"/g)).toHaveLength(page.items.length);
    for (const item of page.items) {
      expect(html).toContain(`data-doc="${item.training_doc_id}"`);
    }
    const removes = page.items.filter((m) => m.decision === "remove").length;
    expect(html.match(/badge-remove/g) ?? []).toHaveLength(removes);
  });
});

describe("score literal scanning", () => {
  it("reads numbers and null after the key", () => {
    const body = '{"items": [{"sim_img": 0.5, "c_text": null}, {"sim_img": 1.0, "c_text": 2e-3}]}';
    expect(scanScoreLiterals(body, "sim_img")).toEqual(["0.5", "1.0"]);
    expect(scanScoreLiterals(body, "c_text")).toEqual(["null", "2e-3"]);
  });

  it("ignores key text that is escaped inside an excerpt string", () => {
    const body = '{"eval_excerpt": "mentions \\"sim_img\\": 9.9 inline", "sim_img": 0.25}';
    expect(scanScoreLiterals(body, "sim_img")).toEqual(["0.25"]);
  });
});

describe("score text fallbacks", () => {
  it("uses the raw literal when present and String() otherwise", () => {
    expect(simText(sampleMatch({ sim_img_raw: "0.9700000000000001" }))).toBe("0.9700000000000001");
    expect(simText(sampleMatch())).toBe("0.97");
  });

  it("shows n/a when containment was never computed", () => {
    expect(containmentText(sampleMatch({ c_text: null }))).toBe("n/a");
    expect(containmentText(sampleMatch({ c_text: 0.5, c_text_raw: "0.5" }))).toBe("0.5");
  });
});

describe("list chrome", () => {
  it("shows an empty state for a zero-total page", () => {
    const page = fixtureJson<FlaggedPage>("flagged.empty.json");
    const html = renderFlaggedList(page, ASSET);
    expect(html).toContain("empty-state");
    expect(html).not.toContain("match-card");
  });

  it("disables pager ends and reports position", () => {
    const first = fixtureJson<FlaggedPage>("flagged.paged.p1.json");
    const last = fixtureJson<FlaggedPage>("flagged.paged.p5.json");
    const atFirst = renderPager(first);
    expect(atFirst).toContain('data-nav="prev" disabled');
    expect(atFirst).toContain("Page 1 of 5 (250 pairs)");
    expect(atFirst).not.toContain('data-nav="next" disabled');
    const atLast = renderPager(last);
    expect(atLast).toContain('data-nav="next" disabled');
  });

  it("lists benchmark options with flag counts and selection", () => {
    const rows = fixtureJson<BenchmarkSummary[]>("benchmarks.json");
    const html = renderBenchmarkOptions(rows, rows[1]?.benchmark ?? null);
    expect(html).toContain("all benchmarks");
    for (const row of rows) {
      expect(html).toContain(`${row.benchmark} (${row.flagged_matches})`);
    }
    expect(html.match(/ selected/g)).toHaveLength(1);
  });
});

describe("escaping", () => {
  it("escapes markup in excerpts and ids", () => {
    const hostile = sampleMatch({
      train_excerpt: '<script>alert("x")</script>',
      eval_excerpt: "a & b < c",
      training_doc_id: 'doc"onmouseover="x',
    });
    const html = renderMatchCard(hostile, ASSET);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
    expect(html).toContain("a &amp; b &lt; c");
    expect(html).not.toContain('doc"onmouseover');
  });

  it("escapes the raw literal path too", () => {
    const hostile = sampleMatch({ sim_img_raw: "<img onerror=x>" });
    expect(renderMatchCard(hostile, ASSET)).not.toContain("<img onerror");
  });

  it("covers the five significant characters", () => {
    expect(escapeHtml(`&<>"'`)).toBe("&amp;&lt;&gt;&quot;&#39;");
  });
});

describe("surrounding panels", () => {
  it("summarizes the run header from the manifest and report", () => {
    const info = fixtureJson<RunInfo>("run.json");
    const html = renderRunHeader(info);
    expect(html).toContain(info.manifest.run_id);
    expect(html).toContain(`${info.manifest.counts.removed} removed`);
    expect(html).toContain(info.report.union.label);
  });

  it("renders the frontier table in served order", () => {
    const rows = fixtureJson<FrontierRow[]>("frontier.json");
    const html = renderFrontier(rows);
    const cells = [...html.matchAll(/<tr><td>([^<]+)<\/td>/g)].map((m) => m[1]);
    expect(cells).toEqual(rows.map((r) => r.name));
  });

  it("renders errors inline with escaping", () => {
    expect(renderError("<b>bad</b>")).toContain("&lt;b&gt;bad&lt;/b&gt;");
  });
});
