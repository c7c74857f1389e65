/** Browser wiring for the review UI.
 *
 * Everything testable lives in the sibling modules; this file only glues
 * DOM events to the API client and swaps rendered HTML into the page.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  renderBenchmarkOptions,
  renderError,
  renderFlaggedList,
  renderFrontier,
  renderPager,
  renderRunHeader,
  renderSweepMeta,
} from "./render.js";
import { buildOverrideRequest, diffDrafts, renderDiff } from "./overrides.js";
import { renderSweepChart } from "./sweep.js";
import { DEFAULT_STATE, parseViewState, serializeViewState, toFlaggedQuery, type ViewState } from "./state.js";
import type { DraftConfig, SweepProfile } from "./types.js";

const SHELL = `
<header id="run-header"></header>
<div id="notice"></div>
<section class="controls">
  <label>benchmark <select id="bench-select"></select></label>
  <label>min image sim <input id="min-sim" type="text" size="6" placeholder="0.95"></label>
  <label>min containment <input id="min-c" type="text" size="6" placeholder="0.8"></label>
  <button id="apply" type="button">apply</button>
</section>
<section id="sweep-panel" class="panel" hidden>
  <h3>threshold sweep</h3>
  <div id="sweep-chart"></div>
  <div id="sweep-meta"></div>
</section>
<section id="pairs"></section>
<div id="pager"></div>
<section id="override-panel" class="panel">
  <h3>stage a policy override</h3>
  <form id="override-form">
    <label>benchmark <select id="ov-bench"></select></label>
    <label>tau_i <input id="ov-tau-i" type="text" size="6"></label>
    <label>tau_t <input id="ov-tau-t" type="text" size="6"></label>
    <label>mode
      <select id="ov-mode">
        <option value="">keep</option>
        <option value="joint">joint</option>
        <option value="image_only">image_only</option>
      </select>
    </label>
    <label><input id="ov-ack" type="checkbox"> accept low tau_i</label>
    <button type="submit">stage</button>
  </form>
  <div id="override-diff"></div>
</section>
<section id="frontier-panel" class="panel">
  <h3>response-cost frontier</h3>
  <div id="frontier"></div>
</section>
`;

function messageOf(err: unknown): string {
  if (err instanceof ApiError) return `${err.status}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

export async function bootstrap(root: HTMLElement, client: ApiClient): Promise<void> {
  root.innerHTML = SHELL;
  const el = <T extends HTMLElement>(id: string): T => {
    const node = root.querySelector(`#${id}`);
    if (node === null) throw new Error(`missing element #${id}`);
    return node as T;
  };
  const notice = el<HTMLDivElement>("notice");
  const benchSelect = el<HTMLSelectElement>("bench-select");
  const ovBench = el<HTMLSelectElement>("ov-bench");
  let state: ViewState = parseViewState(window.location.search);
  let baseline: DraftConfig | null = null;
  let sweepCache: SweepProfile | null = null;

  const note = (html: string): void => {
    notice.innerHTML = html;
  };

  async function refreshPairs(): Promise<void> {
    try {
      const page = await client.flagged(toFlaggedQuery(state));
      el("pairs").innerHTML = renderFlaggedList(page, (id) => client.assetUrl(id));
      el("pager").innerHTML = renderPager(page);
      note("");
    } catch (err) {
      el("pairs").innerHTML = "";
      el("pager").innerHTML = "";
      note(renderError(messageOf(err)));
    }
  }

  async function refreshSweep(): Promise<void> {
    const panel = el<HTMLElement>("sweep-panel");
    if (state.benchmark === null || state.benchmark === "") {
      panel.hidden = true;
      sweepCache = null;
      return;
    }
    try {
      sweepCache = await client.sweep(state.benchmark);
      el("sweep-chart").innerHTML = renderSweepChart(sweepCache);
      el("sweep-meta").innerHTML = renderSweepMeta(sweepCache);
      panel.hidden = false;
    } catch {
      panel.hidden = true;
      sweepCache = null;
    }
  }

  function pushUrl(): void {
    window.history.pushState(null, "", `${window.location.pathname}${serializeViewState(state)}`);
  }

  async function applyState(): Promise<void> {
    benchSelect.value = state.benchmark ?? "";
    el<HTMLInputElement>("min-sim").value = state.minSim;
    el<HTMLInputElement>("min-c").value = state.minC;
    await Promise.all([refreshPairs(), refreshSweep()]);
  }

  try {
    const [rows, info, overrides] = await Promise.all([
      client.benchmarks(),
      client.run(),
      client.overrides(),
    ]);
    baseline = overrides.draft_config;
    el("run-header").innerHTML = renderRunHeader(info);
    benchSelect.innerHTML = renderBenchmarkOptions(rows, state.benchmark);
    ovBench.innerHTML = rows
      .map((row) => `<option value="${row.benchmark}">${row.benchmark}</option>`)
      .join("");
  } catch (err) {
    note(renderError(messageOf(err)));
    return;
  }

  try {
    el("frontier").innerHTML = renderFrontier(await client.frontier());
  } catch {
    el<HTMLElement>("frontier-panel").hidden = true;
  }

  el<HTMLButtonElement>("apply").addEventListener("click", () => {
    state = {
      benchmark: benchSelect.value === "" ? null : benchSelect.value,
      page: 1,
      minSim: el<HTMLInputElement>("min-sim").value.trim(),
      minC: el<HTMLInputElement>("min-c").value.trim(),
    };
    pushUrl();
    void applyState();
  });

  el("pager").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const nav = target.getAttribute("data-nav");
    if (nav === null) return;
    state = { ...state, page: Math.max(1, state.page + (nav === "next" ? 1 : -1)) };
    pushUrl();
    void refreshPairs();
  });

  el("sweep-chart").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const tau = target.getAttribute("data-tau");
    if (tau === null || sweepCache === null) return;
    el<HTMLInputElement>("ov-tau-t").value = tau;
    ovBench.value = sweepCache.benchmark;
  });

  el<HTMLFormElement>("override-form").addEventListener("submit", (event) => {
    event.preventDefault();
    void (async () => {
      try {
        const request = buildOverrideRequest({
          benchmark: ovBench.value,
          tauI: el<HTMLInputElement>("ov-tau-i").value,
          tauT: el<HTMLInputElement>("ov-tau-t").value,
          mode: el<HTMLSelectElement>("ov-mode").value,
          ackLowTauI: el<HTMLInputElement>("ov-ack").checked,
        });
        const response = await client.stageOverride(request);
        if (baseline !== null) {
          el("override-diff").innerHTML = renderDiff(diffDrafts(baseline, response.draft_config));
        }
        note("");
      } catch (err) {
        note(renderError(messageOf(err)));
      }
    })();
  });

  window.addEventListener("popstate", () => {
    state = parseViewState(window.location.search);
    void applyState();
  });

  state = { ...DEFAULT_STATE, ...state };
  await applyState();
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  const root = document.getElementById("app") as HTMLElement;
  const base = root.getAttribute("data-api-base") ?? "";
  void bootstrap(root, new ApiClient(base, (url, init) => fetch(url, init)));
}
