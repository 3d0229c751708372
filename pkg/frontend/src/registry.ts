// Thin HTTP client for the campaign registry's read and ingest endpoints.
// Error bodies carry {"error": CODE}; non-2xx responses become
// RegistryError so callers can branch on the code.

import type {
  CampaignListWire,
  CampaignStatsWire,
  CampaignWire,
  IngestAckWire,
  MetricsBatchWire,
} from "./wire";

export class RegistryError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    public readonly detail?: string,
  ) {
    super(`registry ${status}: ${code}`);
  }
}

async function raiseFor(response: Response): Promise<never> {
  let code = "UNKNOWN_ERROR";
  let detail: string | undefined;
  try {
    const body = (await response.json()) as Record<string, unknown>;
    if (typeof body["error"] === "string") {
      code = body["error"];
    }
    if (typeof body["detail"] === "string") {
      detail = body["detail"];
    }
  } catch {
    // keep the fallback code for non-JSON bodies
  }
  throw new RegistryError(response.status, code, detail);
}

export class RegistryClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/+$/, "") + path;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.url(path), {
      headers: { Accept: "application/json" },
    });
    if (!response.ok) {
      await raiseFor(response);
    }
    return (await response.json()) as T;
  }

  listCampaigns(): Promise<CampaignListWire> {
    return this.getJson<CampaignListWire>("/v1/campaigns");
  }

  getCampaign(campaignId: string): Promise<CampaignWire> {
    return this.getJson<CampaignWire>(`/v1/campaigns/${encodeURIComponent(campaignId)}`);
  }

  getStats(campaignId: string): Promise<CampaignStatsWire> {
    return this.getJson<CampaignStatsWire>(
      `/v1/campaigns/${encodeURIComponent(campaignId)}/stats`,
    );
  }

  async postMetrics(batch: MetricsBatchWire): Promise<IngestAckWire> {
    const response = await this.fetchImpl(this.url("/v1/metrics"), {
      method: "POST",
      headers: { "Content-Type": "application/json", Accept: "application/json" },
      body: JSON.stringify(batch),
    });
    if (!response.ok) {
      await raiseFor(response);
    }
    return (await response.json()) as IngestAckWire;
  }
}
