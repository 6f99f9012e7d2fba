// Typed client for the guidepost HTTP API. All UI data flows through here;
// nothing else in the frontend touches the network.

import type {
  ColumnsResponse,
  GuidepostListResponse,
  IngestResponse,
  NeighborhoodResponse,
  OverviewResponse,
  RowPageResponse,
  SessionCreateResponse,
  SessionModel,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface GuidepostQueryParams {
  descriptor: string;
  metric?: string;
  order?: "ascending" | "descending";
  k?: number;
  min?: number;
  max?: number;
  mode?: "exact" | "approximate";
  alpha?: number;
}

export interface RowQueryParams {
  col?: string;
  op?: string;
  value?: string;
  limit?: number;
  offset?: number;
}

function queryString(params: Record<string, unknown>): string {
  const search = new URLSearchParams();
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined && value !== null) search.set(key, String(value));
  }
  const rendered = search.toString();
  return rendered ? `?${rendered}` : "";
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    const body = await response.text();
    if (!response.ok) {
      let code = "http_error";
      let message = body || response.statusText;
      try {
        const doc = JSON.parse(body);
        if (doc?.error?.code) {
          code = doc.error.code;
          message = doc.error.message;
        }
      } catch {
        // non-JSON error body; keep the raw text
      }
      throw new ApiError(response.status, code, message);
    }
    return JSON.parse(body) as T;
  }

  ingest(file: Blob, name = "data.csv"): Promise<IngestResponse> {
    const form = new FormData();
    form.append("file", file, name);
    return this.request("/datasets", { method: "POST", body: form });
  }

  columns(datasetId: string): Promise<ColumnsResponse> {
    return this.request(`/datasets/${datasetId}/columns`);
  }

  guideposts(
    datasetId: string,
    params: GuidepostQueryParams,
  ): Promise<GuidepostListResponse> {
    return this.request(
      `/datasets/${datasetId}/guideposts${queryString({ ...params })}`,
    );
  }

  related(
    datasetId: string,
    guidepostId: string,
    k?: number,
    mode?: "exact" | "approximate",
  ): Promise<NeighborhoodResponse> {
    return this.request(
      `/datasets/${datasetId}/guideposts/${guidepostId}/related${queryString({ k, mode })}`,
    );
  }

  overview(
    datasetId: string,
    descriptor: string,
    mode?: "exact" | "approximate",
  ): Promise<OverviewResponse> {
    return this.request(
      `/datasets/${datasetId}/overview${queryString({ descriptor, mode })}`,
    );
  }

  rows(datasetId: string, params: RowQueryParams = {}): Promise<RowPageResponse> {
    return this.request(
      `/datasets/${datasetId}/rows${queryString({ ...params })}`,
    );
  }

  createSession(datasetId: string): Promise<SessionCreateResponse> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ dataset_id: datasetId }),
    });
  }

  getSession(sessionId: string): Promise<SessionModel> {
    return this.request(`/sessions/${sessionId}`);
  }

  putSession(sessionId: string, doc: SessionModel): Promise<SessionModel> {
    return this.request(`/sessions/${sessionId}`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(doc),
    });
  }
}
