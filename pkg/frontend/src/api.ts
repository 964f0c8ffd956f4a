/** Thin client for the weaklabel API. All project state lives server-side;
 * this module only moves JSON and remembers the last seen version. */

import type {
  AnalysisReport,
  DocumentRecord,
  GoldRecord,
  HardLabel,
  ManifestPutBody,
  ManifestResponse,
  ProjectInfo,
  QueueResponse,
} from "./types.js";

export interface HttpResponse {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<HttpResponse>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

const PREFIX = "/api/v1";

interface RawResult {
  status: number;
  data: Record<string, unknown>;
}

export class ApiClient {
  /** Version from the most recent response, for staleness displays. */
  lastVersion: number | null = null;

  constructor(
    private readonly fetchLike: FetchLike,
    private readonly baseUrl: string = "",
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<RawResult> {
    const init: { method: string; headers?: Record<string, string>; body?: string } = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchLike(this.baseUrl + PREFIX + path, init);
    const data = (await response.json()) as Record<string, unknown>;
    if (typeof data.version === "number") this.lastVersion = data.version;
    return { status: response.status, data };
  }

  /** Like request(), but any non-2xx status becomes an ApiError. */
  private async expectOk(method: string, path: string, body?: unknown): Promise<RawResult> {
    const result = await this.request(method, path, body);
    if (result.status >= 400) {
      throw new ApiError(result.status, String(result.data.error ?? `HTTP ${result.status}`));
    }
    return result;
  }

  async project(): Promise<ProjectInfo> {
    const { data } = await this.expectOk("GET", "/project");
    return data as unknown as ProjectInfo;
  }

  async document(docId: string): Promise<DocumentRecord> {
    const { data } = await this.expectOk("GET", `/documents/${encodeURIComponent(docId)}`);
    return data.document as DocumentRecord;
  }

  async manifest(name: string): Promise<ManifestResponse> {
    const { data } = await this.expectOk("GET", `/manifests/${encodeURIComponent(name)}`);
    return data as unknown as ManifestResponse;
  }

  /** Returns the raw status and payload: the editor branches on 200/409/422. */
  async putManifest(name: string, body: ManifestPutBody): Promise<RawResult> {
    return this.request("PUT", `/manifests/${encodeURIComponent(name)}`, body);
  }

  async analyze(task: string, manifest?: string): Promise<AnalysisReport> {
    const body: Record<string, string> = { task };
    if (manifest !== undefined) body.manifest = manifest;
    const { data } = await this.expectOk("POST", "/analyze", body);
    return data.analysis as AnalysisReport;
  }

  async reviewQueue(task: string, split?: string, onlyConflicted = false): Promise<QueueResponse> {
    const params: string[] = [];
    if (split !== undefined) params.push(`split=${encodeURIComponent(split)}`);
    if (onlyConflicted) params.push("only_conflicted=true");
    const query = params.length ? `?${params.join("&")}` : "";
    const { data } = await this.expectOk("GET", `/review-queue/${encodeURIComponent(task)}${query}`);
    return data as unknown as QueueResponse;
  }

  async postReview(docId: string, task: string, label: HardLabel): Promise<GoldRecord> {
    const { data } = await this.expectOk("POST", "/reviews", { doc_id: docId, task, label });
    return data.record as GoldRecord;
  }
}
