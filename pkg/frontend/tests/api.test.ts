import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { FakeServer, fixtures, unreachableFetch } from "./support.js";

describe("ApiClient wire contract", () => {
  it("hits the documented paths with the documented bodies", async () => {
    const server = new FakeServer();
    const api = new ApiClient("", server.fetch);

    await api.session();
    await api.scatter();
    await api.hop("citations");
    await api.hopPreview("references");
    await api.compactness();

    expect(server.requests).toEqual([
      { method: "GET", path: "/api/session", body: undefined },
      { method: "GET", path: "/api/scatter", body: undefined },
      { method: "POST", path: "/api/hop", body: { direction: "citations" } },
      { method: "GET", path: "/api/hop/preview", body: undefined },
      { method: "GET", path: "/api/metrics/compactness", body: undefined },
    ]);
  });

  it("returns server payloads verbatim", async () => {
    const api = new ApiClient("", new FakeServer().fetch);
    expect(await api.scatter()).toEqual(fixtures.scatterAfterHop);
    expect((await api.wordcloud(fixtures.selectionLasso.selection_id)).counts)
      .toEqual(fixtures.wordcloud.counts);
  });

  it("posts selection geometry unchanged", async () => {
    const server = new FakeServer();
    const api = new ApiClient("", server.fetch);
    const geometry = fixtures.lassoGeometry as never;
    const selection = await api.makeSelection(geometry);
    expect(selection.ids).toEqual(fixtures.selectionLasso.ids);
    expect(server.requests[0].body).toEqual({ geometry: fixtures.lassoGeometry });
  });

  it("maps HTTP errors to ApiError with the server detail", async () => {
    const api = new ApiClient("", new FakeServer().fetch);
    const failing = api.makeSelection({ type: "lasso", vertices: [[0, 0], [1, 1], [2, 0]] });
    await expect(failing).rejects.toMatchObject({
      status: 400,
      kind: "GeometryError",
    });
  });

  it("maps transport failures to status 0", async () => {
    const api = new ApiClient("", unreachableFetch);
    try {
      await api.session();
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      expect((err as ApiError).status).toBe(0);
      expect((err as ApiError).kind).toBe("unreachable");
    }
  });
});
