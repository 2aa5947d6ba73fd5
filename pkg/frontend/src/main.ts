// Wiring: service discovery, debounced input, store -> view updates.

import { ServiceClient } from "./api.js";
import { debounce } from "./debounce.js";
import { QueryStore } from "./state.js";
import { populateLanguages, render, ViewElements } from "./view.js";

const DEBOUNCE_MS = 300;

function requireElement<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

export async function start(baseUrl: string): Promise<QueryStore> {
  const client = new ServiceClient(baseUrl);
  const store = new QueryStore(client);

  const elements: ViewElements = {
    candidates: requireElement("candidates"),
    status: requireElement("status"),
    errorBanner: requireElement("error-banner"),
    history: requireElement("history"),
    exportButton: requireElement<HTMLButtonElement>("export-history"),
    definitionSelect: requireElement<HTMLSelectElement>("definition-language"),
    targetSelect: requireElement<HTMLSelectElement>("target-language"),
  };
  const input = requireElement<HTMLInputElement>("description");
  const topNInput = requireElement<HTMLInputElement>("top-n");

  store.subscribe((state) =>
    render(
      elements,
      state,
      (surface) => store.refineFromCandidate(surface),
      (index) => {
        store.branchFromHistory(index);
        input.value = store.state.description;
        input.focus();
      },
    ),
  );

  const health = await client.health();
  populateLanguages(elements, health);
  store.setLanguages(
    elements.definitionSelect.value,
    elements.targetSelect.value,
  );

  const submitSoon = debounce(() => void store.submit(), DEBOUNCE_MS);
  input.addEventListener("input", () => {
    store.setDescription(input.value);
    submitSoon();
  });
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      submitSoon.cancel();
      store.setDescription(input.value);
      void store.submit();
    }
  });
  elements.definitionSelect.addEventListener("change", () => {
    store.setLanguages(elements.definitionSelect.value, elements.targetSelect.value);
    if (store.state.description.trim()) void store.submit();
  });
  elements.targetSelect.addEventListener("change", () => {
    store.setLanguages(elements.definitionSelect.value, elements.targetSelect.value);
    if (store.state.description.trim()) void store.submit();
  });
  topNInput.addEventListener("change", () => {
    const parsed = Number.parseInt(topNInput.value, 10);
    if (Number.isFinite(parsed) && parsed >= 1) store.setTopN(parsed);
  });
  elements.exportButton.addEventListener("click", () => {
    const blob = new Blob([store.exportHistory()], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "query-history.json";
    link.click();
    URL.revokeObjectURL(link.href);
  });

  return store;
}

declare global {
  interface Window {
    REVDICT_SERVICE_URL?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("description")) {
  const base = window.REVDICT_SERVICE_URL ?? "";
  start(base).catch((err) => {
    const banner = document.getElementById("error-banner");
    if (banner) {
      banner.hidden = false;
      banner.textContent = `cannot reach the query service: ${err}`;
    }
  });
}
