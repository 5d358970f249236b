import type {
  AssessResult,
  DatasetRecord,
  EngineeredPrompt,
  EvalTable,
  FailureLabel,
  Guideline,
  GuidelineDocument,
  HazardReport,
  ModelInfo,
  ReviewStatus,
  RunStarted,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.name = "ApiError";
  }
}

export interface RecordUpdate {
  ground_truth?: HazardReport | null;
  review_status?: ReviewStatus;
  failure_labels?: FailureLabel[];
}

export interface RunRequest {
  prompt_id?: string;
  model_ids?: string[];
  tracks?: string[];
  judge?: boolean;
}

type Fetch = typeof fetch;

/** Thin typed client for the service's JSON API. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: Fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    let body: unknown = null;
    const text = await response.text();
    if (text) {
      try {
        body = JSON.parse(text);
      } catch {
        body = text;
      }
    }
    if (!response.ok) {
      const detail =
        body && typeof body === "object" && "detail" in body
          ? (body as { detail: unknown }).detail
          : body;
      throw new ApiError(response.status, detail ?? response.statusText);
    }
    return body as T;
  }

  private json(payload: unknown): RequestInit {
    return {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    };
  }

  health(): Promise<{ status: string; records: number }> {
    return this.request("/api/health");
  }

  listModels(): Promise<ModelInfo[]> {
    return this.request("/api/models");
  }

  getGuidelines(): Promise<GuidelineDocument> {
    return this.request("/api/guidelines");
  }

  engineerPrompt(guidelines: Guideline[], metaPrompted = false): Promise<EngineeredPrompt> {
    return this.request("/api/prompt/engineer", this.json({ guidelines, meta_prompted: metaPrompted }));
  }

  listRecords(): Promise<DatasetRecord[]> {
    return this.request("/api/records");
  }

  getRecord(recordId: string): Promise<DatasetRecord> {
    return this.request(`/api/records/${encodeURIComponent(recordId)}`);
  }

  recordImageUrl(recordId: string): string {
    return `${this.baseUrl}/api/records/${encodeURIComponent(recordId)}/image`;
  }

  updateRecord(recordId: string, update: RecordUpdate): Promise<DatasetRecord> {
    return this.request(`/api/records/${encodeURIComponent(recordId)}`, {
      ...this.json(update),
      method: "PUT",
    });
  }

  assess(image: File | Blob, modelId: string, promptId = "default"): Promise<AssessResult> {
    const form = new FormData();
    form.append("image", image, image instanceof File ? image.name : "upload.png");
    form.append("model_id", modelId);
    form.append("prompt_id", promptId);
    return this.request("/api/assess", { method: "POST", body: form });
  }

  startRun(request: RunRequest = {}): Promise<RunStarted> {
    return this.request("/api/runs", this.json(request));
  }

  getRun(runId: string): Promise<EvalTable> {
    return this.request(`/api/runs/${encodeURIComponent(runId)}`);
  }
}
