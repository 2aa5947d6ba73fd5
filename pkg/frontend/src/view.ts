// DOM rendering. Candidates are shown exactly as the service returned them:
// same order, same scores, no client-side filtering or rescaling.

import { HealthInfo } from "./api.js";
import { UiState } from "./state.js";

export interface ViewElements {
  candidates: HTMLElement;
  status: HTMLElement;
  errorBanner: HTMLElement;
  history: HTMLElement;
  exportButton: HTMLButtonElement;
  definitionSelect: HTMLSelectElement;
  targetSelect: HTMLSelectElement;
}

export function populateLanguages(
  elements: ViewElements,
  health: HealthInfo,
): void {
  fillSelect(elements.definitionSelect, health.languages);
  fillSelect(elements.targetSelect, health.target_languages);
}

function fillSelect(select: HTMLSelectElement, options: string[]): void {
  select.innerHTML = "";
  for (const value of options) {
    const option = select.ownerDocument.createElement("option");
    option.value = value;
    option.textContent = value;
    select.appendChild(option);
  }
}

export function render(
  elements: ViewElements,
  state: UiState,
  onCandidateClick: (surface: string) => void,
  onHistoryBranch: (index: number) => void,
): void {
  const doc = elements.candidates.ownerDocument;

  elements.errorBanner.hidden = state.error === null;
  elements.errorBanner.textContent = state.error ?? "";

  elements.status.textContent = state.pending
    ? "querying…"
    : state.lastResponse
      ? `model ${state.lastResponse.model_id} · ${state.lastResponse.timing_ms.toFixed(1)} ms`
      : "type a description to search";

  elements.candidates.innerHTML = "";
  if (state.lastResponse) {
    for (const candidate of state.lastResponse.candidates) {
      const row = doc.createElement("li");
      row.className = "candidate";
      row.dataset.rank = String(candidate.rank);

      const rank = doc.createElement("span");
      rank.className = "rank";
      rank.textContent = String(candidate.rank);

      const surface = doc.createElement("button");
      surface.className = "surface";
      surface.type = "button";
      surface.textContent = candidate.surface;
      surface.title = "this was my word";
      surface.addEventListener("click", () => onCandidateClick(candidate.surface));

      const score = doc.createElement("span");
      score.className = "score";
      score.textContent = String(candidate.score);

      row.append(rank, surface, score);
      elements.candidates.appendChild(row);
    }
  }

  elements.history.innerHTML = "";
  state.history.forEach((item, index) => {
    const row = doc.createElement("li");
    const branch = doc.createElement("button");
    branch.type = "button";
    branch.className = "branch";
    branch.textContent = `“${item.description}” → ${item.topCandidate}`;
    branch.addEventListener("click", () => onHistoryBranch(index));
    row.appendChild(branch);
    elements.history.appendChild(row);
  });

  elements.exportButton.disabled = state.history.length === 0;
}
