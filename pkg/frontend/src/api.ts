/*
 * Typed client for the closeread /v1 annotation service.
 *
 * The UI's only configuration is the service base address; identity comes
 * from a bearer token issued out of band by the study coordinator.  Error
 * responses follow one shape everywhere — {code, message, field} — so the
 * client turns every non-2xx into an ApiError and callers can route
 * field-level problems back to the offending input.
 */

export interface BatchView {
  batch_id: string;
  passage_ids: string[];
  is_training: boolean;
  n_expressions: number;
  n_rated: number;
  progress: number;
  completed: boolean;
}

export interface SpanView {
  expr_id: string;
  char_start: number;
  char_end: number;
  completed: boolean;
}

/** Passage payload; deliberately carries no authorship information. */
export interface PassageView {
  passage_id: string;
  text: string;
  checksum: string;
  word_count: number;
  spans: SpanView[];
}

export interface RatingPayload {
  expr_id: string;
  sensical: boolean;
  pragmatic: boolean;
  novel: boolean;
  rationale: string;
  comment: string;
  timestamp: string;
}

export interface HighlightPayload {
  passage_id: string;
  char_start: number;
  char_end: number;
  rationale: string;
  timestamp: string;
}

export interface CompleteResult {
  accepted: boolean;
  is_training: boolean;
  missing: Array<{ annotator_id: string; expr_id: string }>;
}

// Structural stand-in for fetch so tests can substitute a node-http shim.
export interface FetchInit {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
}

export interface FetchResponse {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (url: string, init?: FetchInit) => Promise<FetchResponse>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly field: string | null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

function defaultFetch(url: string, init?: FetchInit): Promise<FetchResponse> {
  return fetch(url, init);
}

export class ServiceClient {
  private readonly base: string;

  constructor(
    baseUrl: string,
    private readonly token: string,
    private readonly fetchFn: FetchLike = defaultFetch,
  ) {
    this.base = baseUrl.replace(/\/+$/, "");
  }

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: FetchInit = {
      method,
      headers: { authorization: `Bearer ${this.token}` },
    };
    if (body !== undefined) {
      init.headers!["content-type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.base + path, init);
    let data: Record<string, unknown>;
    try {
      data = (await res.json()) as Record<string, unknown>;
    } catch {
      data = {};
    }
    if (res.status >= 400) {
      // CloseReadError bodies carry code/message/field; anything else
      // (e.g. a proxy error page) degrades to a generic http_NNN code.
      const code = typeof data.code === "string" ? data.code : `http_${res.status}`;
      const message =
        typeof data.message === "string" ? data.message : JSON.stringify(data);
      const field = typeof data.field === "string" ? data.field : null;
      throw new ApiError(res.status, code, message, field);
    }
    return data as T;
  }

  async listBatches(): Promise<BatchView[]> {
    const out = await this.call<{ batches: BatchView[] }>("GET", "/v1/batches");
    return out.batches;
  }

  getPassage(passageId: string): Promise<PassageView> {
    return this.call<PassageView>(
      "GET",
      `/v1/passages/${encodeURIComponent(passageId)}`,
    );
  }

  async submitRating(payload: RatingPayload): Promise<number> {
    const out = await this.call<{ record_id: number }>("POST", "/v1/ratings", payload);
    return out.record_id;
  }

  async submitHighlight(payload: HighlightPayload): Promise<number> {
    const out = await this.call<{ record_id: number }>(
      "POST",
      "/v1/highlights",
      payload,
    );
    return out.record_id;
  }

  completeBatch(batchId: string): Promise<CompleteResult> {
    return this.call<CompleteResult>(
      "POST",
      `/v1/batches/${encodeURIComponent(batchId)}/complete`,
    );
  }
}

/** Hex SHA-256 of the passage text, for span-offset integrity checks. */
export async function sha256Hex(text: string): Promise<string> {
  const subtle = globalThis.crypto?.subtle;
  if (!subtle) {
    throw new Error("WebCrypto unavailable: cannot verify passage integrity");
  }
  const digest = await subtle.digest("SHA-256", new TextEncoder().encode(text));
  return Array.from(new Uint8Array(digest))
    .map((b) => b.toString(16).padStart(2, "0"))
    .join("");
}
