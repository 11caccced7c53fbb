import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, WorkbenchApi } from "../src/api";

function mockFetch(status: number, body: unknown) {
  return vi.fn(async () => ({
    ok: status >= 200 && status < 300,
    status,
    statusText: String(status),
    json: async () => body,
  })) as unknown as typeof fetch;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("api client", () => {
  it("returns parsed JSON on success", async () => {
    vi.stubGlobal("fetch", mockFetch(200, { model_id: "m", fields: [] }));
    const api = new WorkbenchApi("");
    expect(await api.getForm("m")).toEqual({ model_id: "m", fields: [] });
  });

  it("raises ApiError carrying the service's error body", async () => {
    const body = {
      code: "AnnotationInvalid",
      message: "annotation of segment 'x' is invalid",
      details: { issues: [{ code: "NoProjection", message: "…", where: "model m" }] },
    };
    vi.stubGlobal("fetch", mockFetch(400, body));
    const api = new WorkbenchApi("");
    const err = await api
      .validate("m", { nodes: [], edges: [] })
      .then(() => null)
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(400);
    expect(apiErr.body.code).toBe("AnnotationInvalid");
    expect(apiErr.message).toMatch(/AnnotationInvalid/);
  });

  it("encodes path parameters", async () => {
    const spy = mockFetch(200, {});
    vi.stubGlobal("fetch", spy);
    await new WorkbenchApi("http://h").getModel("a b/c");
    expect(spy).toHaveBeenCalledWith(
      "http://h/api/models/a%20b%2Fc",
      expect.anything(),
    );
  });
});
