// Session state and query sequencing, free of any DOM dependency.
//
// At most one query is in flight: a new submission aborts the previous
// request, and every submission gets a sequence number so that a response
// (or error) arriving after a newer submission is discarded instead of
// rendered. History is append-only and lives only in memory, so a page
// reload starts a clean session.

import { QueryResponse, ServiceClient, ServiceError } from "./api.js";

export interface HistoryItem {
  description: string;
  topCandidate: string;
}

export interface UiState {
  description: string;
  definitionLanguage: string;
  targetLanguage: string;
  topN: number;
  lastResponse: QueryResponse | null;
  lastQuery: string | null;
  history: HistoryItem[];
  error: string | null;
  pending: boolean;
}

export type Listener = (state: UiState) => void;

export class QueryStore {
  readonly state: UiState = {
    description: "",
    definitionLanguage: "",
    targetLanguage: "",
    topN: 10,
    lastResponse: null,
    lastQuery: null,
    history: [],
    error: null,
    pending: false,
  };

  private seq = 0;
  private applied = 0;
  private controller: AbortController | null = null;
  private listeners: Listener[] = [];

  constructor(private readonly client: ServiceClient) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const l of this.listeners) l(this.state);
  }

  setDescription(text: string): void {
    this.state.description = text;
    this.notify();
  }

  setLanguages(definition: string, target: string): void {
    this.state.definitionLanguage = definition;
    this.state.targetLanguage = target;
    this.notify();
  }

  setTopN(topN: number): void {
    this.state.topN = topN;
    this.notify();
  }

  /** Issue the current description as a query; stale outcomes are dropped. */
  async submit(): Promise<void> {
    const description = this.state.description.trim();
    if (!description) return;
    const mine = ++this.seq;
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    this.state.pending = true;
    this.notify();
    try {
      const response = await this.client.reverse(
        {
          definition: description,
          definition_language: this.state.definitionLanguage,
          target_language: this.state.targetLanguage,
          top_n: this.state.topN,
        },
        controller.signal,
      );
      if (mine !== this.seq || mine <= this.applied) return; // superseded
      this.applied = mine;
      this.state.lastResponse = response;
      this.state.lastQuery = description;
      this.state.error = null;
    } catch (err) {
      if (mine !== this.seq) return; // stale error: ignore silently
      if (err instanceof Error && err.name === "AbortError") return;
      // non-blocking: keep the previous results on screen
      this.state.error =
        err instanceof ServiceError
          ? `${err.code}: ${err.message}`
          : `network error: ${err instanceof Error ? err.message : String(err)}`;
    } finally {
      if (mine === this.seq) {
        this.state.pending = false;
        this.notify();
      }
    }
  }

  /** Record that a shown candidate answered the current query. */
  refineFromCandidate(surface: string): void {
    const response = this.state.lastResponse;
    if (!response || !response.candidates.some((c) => c.surface === surface)) {
      return;
    }
    this.state.history.push({
      description: this.state.lastQuery ?? this.state.description,
      topCandidate: surface,
    });
    this.notify();
  }

  /** Start a new query from a past history item. */
  branchFromHistory(index: number): void {
    const item = this.state.history[index];
    if (!item) return;
    this.state.description = item.description;
    this.notify();
  }

  exportHistory(): string {
    return JSON.stringify(this.state.history, null, 1);
  }
}
