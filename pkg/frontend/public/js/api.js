/** Maximum input length in Unicode code points. */
export const LENGTH_CAP = 5000;
export class ClientError extends Error {
}
export class ServiceError extends Error {
    constructor(message, status) {
        super(message);
        this.status = status;
    }
}
export function codePointLength(text) {
    let n = 0;
    for (const _ of text)
        n += 1;
    return n;
}
/** Wrap raw text in an empty canonical document the service can annotate. */
export function buildDocument(text, id = "demo") {
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
export class AnnotationClient {
    constructor(baseUrl, fetchFn = fetch) {
        this.baseUrl = baseUrl;
        this.fetchFn = fetchFn;
        this.inflight = null;
    }
    /** POST /annotate; a new submission cancels the pending one. */
    async submit(text, docId = "demo") {
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
        let response;
        try {
            response = await this.fetchFn(`${this.baseUrl}/annotate`, {
                method: "POST",
                headers: { "Content-Type": "application/json" },
                body: JSON.stringify(buildDocument(text, docId)),
                signal: controller.signal,
            });
        }
        catch (err) {
            if (controller.signal.aborted)
                throw new ClientError("superseded by a newer submission");
            throw new ServiceError(`annotation service unreachable: ${String(err)}`);
        }
        finally {
            if (this.inflight === controller)
                this.inflight = null;
        }
        if (!response.ok) {
            let detail = `${response.status}`;
            try {
                const body = (await response.json());
                if (body.error)
                    detail = body.error;
            }
            catch {
                // keep the status code
            }
            throw new ServiceError(`annotation failed: ${detail}`, response.status);
        }
        return (await response.json());
    }
    async health() {
        try {
            const response = await this.fetchFn(`${this.baseUrl}/health`, { method: "GET" });
            return response.ok;
        }
        catch {
            return false;
        }
    }
}
//# sourceMappingURL=api.js.map