// Shared test scaffolding: a controllable fake service and DOM fixtures.

import { QueryResponse } from "../src/api.js";

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function fixedResponse(surfaces: [string, number][]): QueryResponse {
  return {
    candidates: surfaces.map(([surface, score], rank) => ({ surface, score, rank })),
    model_id: "test-model",
    timing_ms: 1.5,
  };
}

/** fetch stub whose /v1/reverse responses are resolved manually, in any order. */
export class ManualService {
  readonly pending: Array<{ body: string; resolve: (r: Response) => void }> = [];

  fetch = (input: string, init?: RequestInit): Promise<Response> => {
    if (input.endsWith("/v1/health")) {
      return Promise.resolve(
        jsonResponse({
          status: "ok", model_id: "test-model", mode: "monolingual",
          cross_lingual: false, languages: ["aa"], target_languages: ["aa"], k: 3,
        }),
      );
    }
    return new Promise<Response>((resolve) => {
      this.pending.push({ body: String(init?.body ?? ""), resolve });
    });
  };

  resolve(index: number, response: QueryResponse): void {
    this.pending[index].resolve(jsonResponse(response));
  }
}

export function mountDom(): void {
  document.body.innerHTML = `
    <div id="error-banner" hidden></div>
    <input id="description" type="text">
    <select id="definition-language"></select>
    <select id="target-language"></select>
    <input id="top-n" type="number" value="10">
    <div id="status"></div>
    <ol id="candidates"></ol>
    <ul id="history"></ul>
    <button id="export-history" disabled></button>
  `;
}

export function renderedRows(): Array<{ rank: string; surface: string; score: string }> {
  return [...document.querySelectorAll("#candidates .candidate")].map((row) => ({
    rank: row.querySelector(".rank")!.textContent ?? "",
    surface: row.querySelector(".surface")!.textContent ?? "",
    score: row.querySelector(".score")!.textContent ?? "",
  }));
}
