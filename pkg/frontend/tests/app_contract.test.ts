// @vitest-environment jsdom
/** UI contract tests against recorded fixture-API payloads: the view layer
 * must mirror the server exactly — point counts, resolved selections,
 * wordcloud ordering — and delete+undo must restore the scatter. */

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { WorkbenchApp } from "../src/app.js";
import type { Geometry } from "../src/types.js";
import { FakeServer, RecordingSurface, fixtures, unreachableFetch } from "./support.js";

let server: FakeServer;
let surface: RecordingSurface;
let app: WorkbenchApp;

beforeEach(() => {
  server = new FakeServer();
  surface = new RecordingSurface();
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  app = new WorkbenchApp(root, new ApiClient("", server.fetch), surface);
});

describe("workbench contract against the fixture API", () => {
  it("renders exactly as many marks as /api/scatter returns", async () => {
    await app.init();
    expect(surface.circles()).toHaveLength(fixtures.scatterAfterHop.length);
    expect(document.querySelector(".status")!.textContent)
      .toContain(`${fixtures.scatterAfterHop.length} papers`);
  });

  it("legend covers the distinct hops of the corpus", async () => {
    await app.init();
    const entries = [...document.querySelectorAll(".legend-entry")];
    const hops = new Set(fixtures.scatterAfterHop.map((p) => p.hop));
    expect(entries).toHaveLength(hops.size);
    expect(entries[0].textContent).toContain("core");
  });

  it("lasso over the known cluster selects exactly the oracle id set", async () => {
    await app.init();
    await app.submitGesture(fixtures.lassoGeometry as Geometry);
    // the selection is whatever the server resolved, nothing more or less
    expect([...app.view.selectedIds()].sort())
      .toEqual([...fixtures.selectionLasso.ids].sort());
    expect(surface.rings()).toHaveLength(fixtures.selectionLasso.ids.length);
    const deleteButton = document.querySelector(".btn-delete") as HTMLButtonElement;
    expect(deleteButton.disabled).toBe(false);
  });

  it("wordcloud panel mirrors server counts and ordering", async () => {
    await app.init();
    await app.submitGesture(fixtures.lassoGeometry as Geometry);
    const tokens = [...document.querySelectorAll(".wordcloud-token")];
    expect(tokens.map((el) => el.textContent))
      .toEqual(fixtures.wordcloud.counts.map(([t]) => t));
    expect(tokens.map((el) => Number((el as HTMLElement).dataset.count)))
      .toEqual(fixtures.wordcloud.counts.map(([, c]) => c));
  });

  it("table rows mirror the server's selection table", async () => {
    await app.init();
    await app.submitGesture(fixtures.lassoGeometry as Geometry);
    const rows = [...document.querySelectorAll(".table-pane tbody tr")];
    expect(rows).toHaveLength(fixtures.table.rows.length);
  });

  it("delete selected then undo restores the point count", async () => {
    await app.init();
    expect(surface.circles()).toHaveLength(19);

    await app.submitGesture({
      type: "ids",
      ids: fixtures.selectionOffTopic.ids,
    } as Geometry);
    await app.deleteSelected();
    expect(server.state).toBe("after_prune");
    expect(surface.circles()).toHaveLength(13);

    await app.undo();
    expect(server.state).toBe("after_undo");
    expect(surface.circles()).toHaveLength(19);
  });

  it("selection state clears after a mutation refresh", async () => {
    await app.init();
    await app.submitGesture(fixtures.lassoGeometry as Geometry);
    expect(app.selectionId).not.toBeNull();
    await app.undo();
    expect(app.selectionId).toBeNull();
    const deleteButton = document.querySelector(".btn-delete") as HTMLButtonElement;
    expect(deleteButton.disabled).toBe(true);
    expect(surface.rings()).toHaveLength(0);
  });

  it("invalid gesture shows a client-side validation error", async () => {
    await app.init();
    app.view.beginGesture("lasso", [5, 5]);
    app.view.extendGesture([9, 9]);
    await app.finishGesture();
    expect(app.errorVisible()).toBe(true);
    expect(document.querySelector(".error-banner")!.textContent)
      .toContain("3 distinct vertices");
    // nothing was sent to the server for the bad gesture
    expect(server.requests.filter((r) => r.path === "/api/selection")).toHaveLength(0);
  });

  it("unreachable API produces a visible error state, not a silent view", async () => {
    const root = document.createElement("div");
    document.body.replaceChildren(root);
    const offline = new WorkbenchApp(root, new ApiClient("", unreachableFetch),
      new RecordingSurface());
    await offline.init();
    expect(offline.errorVisible()).toBe(true);
    expect(root.querySelector(".error-banner")!.textContent).toContain("unreachable");
  });

  it("server-rejected geometry surfaces the server's error", async () => {
    await app.init();
    await app.submitGesture({
      type: "lasso",
      vertices: [[0, 0], [1, 1], [2, 0]],
    } as Geometry);
    expect(app.errorVisible()).toBe(true);
    expect(document.querySelector(".error-banner")!.textContent)
      .toContain("GeometryError");
  });
});
