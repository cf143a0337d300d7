import { describe, expect, it, vi } from "vitest";

import { AnnotationClient, ClientError, LENGTH_CAP, ServiceError, buildDocument } from "../src/api.js";
import { makeDoc } from "./helpers.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), { status, headers: { "Content-Type": "application/json" } });
}

describe("buildDocument", () => {
  it("produces an empty canonical document around the text", () => {
    const doc = buildDocument("hello\nworld");
    expect(doc.schema_version).toBe("1");
    expect(doc.id).toBe("demo");
    expect(doc.text).toBe("hello\nworld");
    expect(doc.tokenizations).toEqual([]);
    expect(doc.metadata).toEqual([]);
  });
});

describe("AnnotationClient.submit", () => {
  it("rejects empty input client-side", async () => {
    const fetchFn = vi.fn();
    const client = new AnnotationClient("http://x", fetchFn as unknown as typeof fetch);
    await expect(client.submit("")).rejects.toBeInstanceOf(ClientError);
    expect(fetchFn).not.toHaveBeenCalled();
  });

  it("rejects over-cap input client-side, counting code points", async () => {
    const fetchFn = vi.fn();
    const client = new AnnotationClient("http://x", fetchFn as unknown as typeof fetch);
    await expect(client.submit("🐇".repeat(LENGTH_CAP + 1))).rejects.toBeInstanceOf(ClientError);
    expect(fetchFn).not.toHaveBeenCalled();
    // exactly at the cap is allowed (surrogate pairs are one code point each)
    fetchFn.mockResolvedValue(jsonResponse(makeDoc("x")));
    await expect(client.submit("🐇".repeat(LENGTH_CAP))).resolves.toBeTruthy();
  });

  it("posts the document to /annotate and returns the annotated one", async () => {
    const annotated = makeDoc("hi there");
    const fetchFn = vi.fn().mockResolvedValue(jsonResponse(annotated));
    const client = new AnnotationClient("http://service:1", fetchFn as unknown as typeof fetch);
    const out = await client.submit("hi there");
    expect(out).toEqual(annotated);
    const [url, init] = fetchFn.mock.calls[0];
    expect(url).toBe("http://service:1/annotate");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body).text).toBe("hi there");
  });

  it("cancels the in-flight request when a new one starts", async () => {
    let firstSignal: AbortSignal | undefined;
    const fetchFn = vi
      .fn()
      .mockImplementationOnce((_url: string, init: RequestInit) => {
        firstSignal = init.signal as AbortSignal;
        return new Promise((_resolve, reject) => {
          (init.signal as AbortSignal).addEventListener("abort", () =>
            reject(new DOMException("aborted", "AbortError")),
          );
        });
      })
      .mockImplementationOnce(() => Promise.resolve(jsonResponse(makeDoc("second"))));
    const client = new AnnotationClient("http://x", fetchFn as unknown as typeof fetch);
    const first = client.submit("first");
    const second = client.submit("second");
    await expect(first).rejects.toThrow("superseded");
    await expect(second).resolves.toBeTruthy();
    expect(firstSignal?.aborted).toBe(true);
  });

  it("surfaces the service's diagnostic on a 400", async () => {
    const fetchFn = vi.fn().mockResolvedValue(jsonResponse({ error: "no score for item" }, 400));
    const client = new AnnotationClient("http://x", fetchFn as unknown as typeof fetch);
    await expect(client.submit("text")).rejects.toThrow("no score for item");
  });

  it("wraps network failures as ServiceError", async () => {
    const fetchFn = vi.fn().mockRejectedValue(new TypeError("fetch failed"));
    const client = new AnnotationClient("http://x", fetchFn as unknown as typeof fetch);
    await expect(client.submit("text")).rejects.toBeInstanceOf(ServiceError);
  });
});

describe("AnnotationClient.health", () => {
  it("true on 200, false on network failure", async () => {
    const ok = new AnnotationClient("http://x", vi.fn().mockResolvedValue(jsonResponse({ status: "ok" })) as never);
    await expect(ok.health()).resolves.toBe(true);
    const down = new AnnotationClient("http://x", vi.fn().mockRejectedValue(new TypeError("down")) as never);
    await expect(down.health()).resolves.toBe(false);
  });
});
