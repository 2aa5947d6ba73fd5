// @vitest-environment jsdom
// End-to-end: the real UI pipeline (typing -> debounce -> HTTP -> rendered
// rows) against a live service with a trained toy checkpoint.  Gated on
// REVDICT_SERVICE_URL; run via  bash e2e/run.sh

import { readFileSync } from "node:fs";
import { beforeAll, describe, expect, it } from "vitest";

import { start } from "../src/main.js";
import { mountDom, renderedRows } from "./helpers.js";

const SERVICE_URL = process.env.REVDICT_SERVICE_URL;
const CASES_PATH = process.env.REVDICT_E2E_CASES;

interface Case {
  definition: string;
  definition_language: string;
  target_language: string;
  word: string;
}

function mountFullDom(): void {
  mountDom();
  const input = document.getElementById("description") as HTMLInputElement;
  input.value = "";
}

async function waitFor(check: () => boolean, timeoutMs = 8000): Promise<void> {
  const t0 = Date.now();
  while (!check()) {
    if (Date.now() - t0 > timeoutMs) throw new Error("timed out waiting for UI");
    await new Promise((r) => setTimeout(r, 25));
  }
}

describe.skipIf(!SERVICE_URL || !CASES_PATH)("UI against the live service", () => {
  let cases: Case[];

  beforeAll(() => {
    cases = JSON.parse(readFileSync(CASES_PATH!, "utf-8"));
    expect(cases.length).toBeGreaterThanOrEqual(20);
  });

  it("typing a definition surfaces the gold word in the top-10 for >=90%", async () => {
    mountFullDom();
    const store = await start(SERVICE_URL!);
    const input = document.getElementById("description") as HTMLInputElement;

    let hits = 0;
    const sample = cases.slice(0, 20);
    for (const c of sample) {
      // simulate typing: set value, fire input, wait out the debounce
      input.value = c.definition;
      input.dispatchEvent(new window.Event("input", { bubbles: true }));
      await waitFor(
        () => !store.state.pending && store.state.lastQuery === c.definition,
      );
      const surfaces = renderedRows().map((r) => r.surface);
      expect(surfaces.length).toBeLessThanOrEqual(10);
      if (surfaces.includes(c.word)) hits += 1;
    }
    expect(hits / sample.length).toBeGreaterThanOrEqual(0.9);
  }, 120_000);

  it("debounce holds the query back until typing pauses", async () => {
    mountFullDom();
    const store = await start(SERVICE_URL!);
    const input = document.getElementById("description") as HTMLInputElement;
    const c = cases[0];
    for (let i = 1; i <= c.definition.length; i += 4) {
      input.value = c.definition.slice(0, i);
      input.dispatchEvent(new window.Event("input", { bubbles: true }));
      await new Promise((r) => setTimeout(r, 40)); // keeps typing, no 300ms gap
    }
    expect(store.state.lastResponse).toBeNull();
    input.value = c.definition;
    input.dispatchEvent(new window.Event("input", { bubbles: true }));
    await waitFor(() => store.state.lastQuery === c.definition);
    expect(renderedRows().length).toBeGreaterThan(0);
  }, 30_000);
});
