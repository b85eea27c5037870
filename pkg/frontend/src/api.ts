// Thin typed client over the audit service. The UI computes no metric of
// its own: every displayed number comes from these endpoints.

import type {
  AdRecord,
  AgreementReport,
  Flag,
  Health,
  Label,
  LabelEvent,
  Page,
  ScoreResponse,
  Verdict,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    public baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const body = await resp.text();
    if (!resp.ok) {
      let detail = body;
      try {
        detail = JSON.parse(body).detail ?? body;
      } catch {
        // plain-text error body
      }
      throw new ApiError(resp.status, String(detail));
    }
    return (body ? JSON.parse(body) : null) as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getHealth(): Promise<Health> {
    return this.request("/health");
  }

  async getFlags(verdict?: Verdict): Promise<Flag[]> {
    // page through everything; the service caps each response at `limit`
    const flags: Flag[] = [];
    const limit = 200;
    for (let offset = 0; ; offset += limit) {
      const params = new URLSearchParams({ limit: String(limit), offset: String(offset) });
      if (verdict) params.set("verdict", verdict);
      const page = await this.request<Page<Flag>>(`/flags?${params}`);
      flags.push(...page.items);
      if (flags.length >= page.total || page.items.length === 0) break;
    }
    return flags;
  }

  getAd(adId: string): Promise<AdRecord> {
    return this.request(`/ads/${encodeURIComponent(adId)}`);
  }

  async getAds(params: {
    query?: string;
    source?: string;
    limit?: number;
    offset?: number;
  }): Promise<Page<AdRecord>> {
    const search = new URLSearchParams();
    if (params.query) search.set("query", params.query);
    if (params.source) search.set("source", params.source);
    search.set("limit", String(params.limit ?? 50));
    search.set("offset", String(params.offset ?? 0));
    return this.request(`/ads?${search}`);
  }

  postVerdict(adId: string, verdict: Exclude<Verdict, "unreviewed">, reviewer: string): Promise<Flag> {
    return this.post(`/flags/${encodeURIComponent(adId)}/verdict`, { verdict, reviewer });
  }

  postLabel(adId: string, annotator: string, label: Label): Promise<LabelEvent> {
    return this.post("/labels", { ad_id: adId, annotator, label });
  }

  async getLabels(annotator?: string): Promise<LabelEvent[]> {
    const params = annotator ? `?${new URLSearchParams({ annotator })}` : "";
    const page = await this.request<Page<LabelEvent>>(`/labels${params}`);
    return page.items;
  }

  getAgreement(annotatorA: string, annotatorB: string): Promise<AgreementReport> {
    const params = new URLSearchParams({ annotators: `${annotatorA},${annotatorB}` });
    return this.request(`/agreement?${params}`);
  }

  getMetrics(): Promise<Record<string, unknown>> {
    return this.request("/metrics");
  }

  async getRocCsv(): Promise<string> {
    const resp = await this.fetchFn(this.baseUrl + "/roc");
    if (!resp.ok) throw new ApiError(resp.status, "no ROC data");
    return resp.text();
  }

  postScore(text: string): Promise<ScoreResponse> {
    return this.post("/score", { text });
  }
}
