/** Thin typed client over the workbench HTTP API.
 *
 * The UI never computes membership, counts, or metrics itself; every number
 * it shows comes back from one of these calls.
 */

import type {
  CompactnessReport,
  Geometry,
  HopResponse,
  MutationResponse,
  ScatterPoint,
  SelectionResponse,
  SessionSummary,
  TableRow,
  WordcloudCounts,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly kind: string,
    detail: string,
  ) {
    super(detail);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method,
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, "unreachable", `API unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let kind = "error";
      let detail = `${response.status}`;
      try {
        const payload = (await response.json()) as { error?: string; detail?: string };
        kind = payload.error ?? kind;
        detail = payload.detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, kind, detail);
    }
    return (await response.json()) as T;
  }

  session(): Promise<SessionSummary> {
    return this.request("GET", "/api/session");
  }

  addCoreByIds(ids: string[]): Promise<MutationResponse> {
    return this.request("POST", "/api/core", { ids });
  }

  scatter(): Promise<ScatterPoint[]> {
    return this.request("GET", "/api/scatter");
  }

  hopPreview(direction: string): Promise<{ direction: string; count: number }> {
    return this.request("GET", `/api/hop/preview?direction=${direction}`);
  }

  hop(direction: string): Promise<HopResponse> {
    return this.request("POST", "/api/hop", { direction });
  }

  makeSelection(geometry: Geometry): Promise<SelectionResponse> {
    return this.request("POST", "/api/selection", { geometry });
  }

  wordcloud(selectionId: string, top = 50): Promise<{ counts: WordcloudCounts }> {
    return this.request("GET", `/api/selection/${selectionId}/wordcloud?top=${top}`);
  }

  table(selectionId: string): Promise<{ rows: TableRow[] }> {
    return this.request("GET", `/api/selection/${selectionId}/table`);
  }

  pruneManual(selectionId: string): Promise<MutationResponse> {
    return this.request("POST", "/api/prune/manual", { selection_id: selectionId });
  }

  pruneHypersphere(): Promise<MutationResponse> {
    return this.request("POST", "/api/prune/hypersphere", {});
  }

  pruneTopics(): Promise<MutationResponse> {
    return this.request("POST", "/api/prune/topics", {});
  }

  undo(): Promise<MutationResponse> {
    return this.request("POST", "/api/undo", {});
  }

  compactness(): Promise<CompactnessReport> {
    return this.request("GET", "/api/metrics/compactness");
  }
}
