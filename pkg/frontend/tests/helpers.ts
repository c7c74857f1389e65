/** Shared test plumbing: fixture loading and a replaying fetch mock.
 *
 * Fixtures are responses recorded from a live service instance, stored as
 * the exact body text. The mock keys routes by "METHOD url" and hands back
 * real Response objects so the client code under test is unmodified.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixtureText(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

export function fixtureJson<T>(name: string): T {
  return JSON.parse(fixtureText(name)) as T;
}

export interface RecordedCall {
  url: string;
  method: string;
  body: string | null;
}

export interface RouteSpec {
  status?: number;
  body: string;
}

export interface FetchMock {
  fetch: FetchLike;
  calls: RecordedCall[];
}

export function mockFetch(routes: Record<string, RouteSpec | string>): FetchMock {
  const calls: RecordedCall[] = [];
  const fetch: FetchLike = (url, init) => {
    const method = init?.method ?? "GET";
    calls.push({ url, method, body: typeof init?.body === "string" ? init.body : null });
    const spec = routes[`${method} ${url}`];
    if (spec === undefined) {
      return Promise.resolve(new Response(`{"detail": "not found: ${url}"}`, { status: 404 }));
    }
    const { status = 200, body } = typeof spec === "string" ? { body: spec } : spec;
    return Promise.resolve(new Response(body, { status, headers: { "content-type": "application/json" } }));
  };
  return { fetch, calls };
}

/** Fetch mock whose responses resolve only when the test releases them. */
export function gatedFetch(bodyByCall: string[]): FetchMock & { release: (index: number) => void } {
  const calls: RecordedCall[] = [];
  const gates: (() => void)[] = [];
  const fetch: FetchLike = (url, init) => {
    const index = calls.length;
    calls.push({ url, method: init?.method ?? "GET", body: typeof init?.body === "string" ? init.body : null });
    return new Promise((resolve) => {
      gates[index] = () => {
        resolve(new Response(bodyByCall[index] ?? "{}", { status: 200 }));
      };
    });
  };
  return {
    fetch,
    calls,
    release: (index: number) => {
      const gate = gates[index];
      if (gate === undefined) throw new Error(`no pending call ${index}`);
      gate();
    },
  };
}

export function tick(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
