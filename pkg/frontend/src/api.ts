import type {
  Api,
  ClustersPayload,
  CorrelationsPayload,
  HoldingsPayload,
  JobPayload,
  OverviewPayload,
} from "./types";

export class ApiError extends Error {
  constructor(public status: number, public code: string, detail: string) {
    super(`${code}: ${detail}`);
  }
}

type FetchLike = (url: string) => Promise<Response>;

/**
 * HTTP client for the analysis service. Cluster requests transparently follow
 * the async job flow: a 202 response is polled (with backoff) until the job
 * finishes, then the original request is replayed against the warmed cache.
 */
export class HttpApi implements Api {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (url) => fetch(url),
    private pollDelayMs: number = 400,
    private maxPolls: number = 600,
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    const body = await response.json();
    if (!response.ok && response.status !== 202) {
      throw new ApiError(response.status, body.error ?? "error", body.detail ?? "");
    }
    if (response.status === 202) {
      await this.awaitJob(body.job_id as string);
      return this.getJson<T>(path);
    }
    return body as T;
  }

  private async awaitJob(jobId: string): Promise<void> {
    let delay = this.pollDelayMs;
    for (let i = 0; i < this.maxPolls; i++) {
      const job = await this.getJson<JobPayload>(`/api/jobs/${jobId}`);
      if (job.state === "done") return;
      if (job.state === "failed") {
        throw new ApiError(500, "job-failed", job.error ?? "embedding job failed");
      }
      await new Promise((resolve) => setTimeout(resolve, delay));
      delay = Math.min(delay * 1.5, 5000);
    }
    throw new ApiError(504, "job-timeout", `job ${jobId} did not finish`);
  }

  private query(start?: string, end?: string): string {
    const params = new URLSearchParams();
    if (start) params.set("start", start);
    if (end) params.set("end", end);
    const text = params.toString();
    return text ? `?${text}` : "";
  }

  clusters(start?: string, end?: string): Promise<ClustersPayload> {
    return this.getJson(`/api/clusters${this.query(start, end)}`);
  }

  correlations(start?: string, end?: string): Promise<CorrelationsPayload> {
    return this.getJson(`/api/correlations${this.query(start, end)}`);
  }

  overview(id: string, start?: string, end?: string): Promise<OverviewPayload> {
    return this.getJson(`/api/portfolios/${id}/overview${this.query(start, end)}`);
  }

  holdings(id: string): Promise<HoldingsPayload> {
    return this.getJson(`/api/portfolios/${id}/holdings`);
  }
}
