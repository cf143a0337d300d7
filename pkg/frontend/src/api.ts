/**
 * Client for the annotation service: document construction, submission with
 * single-in-flight cancellation, and health checks.  Only the documented
 * endpoints (/annotate, /health) are ever called.
 */
import type { DocumentJson } from "./types.js";

/** Maximum input length in Unicode code points. */
export const LENGTH_CAP = 5000;

export class ClientError extends Error {}

export class ServiceError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
  }
}

export function codePointLength(text: string): number {
  let n = 0;
  for (const _ of text) n += 1;
  return n;
}

/** Wrap raw text in an empty canonical document the service can annotate. */
export function buildDocument(text: string, id = "demo"): DocumentJson {
  return {
    schema_version: "1",
    id,
    text,
    language: null,
    tokenizations: [],
    mentions: [],
    frames: [],
    clusters: [],
    type_assignments: [],
    temporal_links: [],
    metadata: [],
  };
}

type FetchLike = typeof fetch;

export class AnnotationClient {
  private inflight: AbortController | null = null;

  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  /** POST /annotate; a new submission cancels the pending one. */
  async submit(text: string, docId = "demo"): Promise<DocumentJson> {
    const length = codePointLength(text);
    if (length === 0) {
      throw new ClientError("nothing to annotate");
    }
    if (length > LENGTH_CAP) {
      throw new ClientError(`input is ${length} code points; the demo accepts at most ${LENGTH_CAP}`);
    }
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}/annotate`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(buildDocument(text, docId)),
        signal: controller.signal,
      });
    } catch (err) {
      if (controller.signal.aborted) throw new ClientError("superseded by a newer submission");
      throw new ServiceError(`annotation service unreachable: ${String(err)}`);
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { error?: string };
        if (body.error) detail = body.error;
      } catch {
        // keep the status code
      }
      throw new ServiceError(`annotation failed: ${detail}`, response.status);
    }
    return (await response.json()) as DocumentJson;
  }

  async health(): Promise<boolean> {
    try {
      const response = await this.fetchFn(`${this.baseUrl}/health`, { method: "GET" });
      return response.ok;
    } catch {
      return false;
    }
  }
}
