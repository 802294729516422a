/** Test doubles: a MarkSurface that records draw calls, and a fake fetch
 * replaying the API payloads recorded from the real service over the
 * bundled offline corpus (frontend/fixtures/*.json). */

import type { FetchLike } from "../src/api.js";
import type { MarkSurface } from "../src/scatter.js";
import type { Point } from "../src/types.js";

import compactnessAfterHop from "../fixtures/compactness_after_hop.json";
import hopFixture from "../fixtures/hop.json";
import hopPreviewFixture from "../fixtures/hop_preview.json";
import lassoGeometry from "../fixtures/lasso_geometry.json";
import pruneManualFixture from "../fixtures/prune_manual.json";
import scatterAfterHop from "../fixtures/scatter_after_hop.json";
import scatterAfterPrune from "../fixtures/scatter_after_prune.json";
import scatterAfterUndo from "../fixtures/scatter_after_undo.json";
import selectionLasso from "../fixtures/selection_lasso.json";
import selectionOffTopic from "../fixtures/selection_off_topic.json";
import sessionFixture from "../fixtures/session.json";
import tableFixture from "../fixtures/table.json";
import undoFixture from "../fixtures/undo.json";
import wordcloudFixture from "../fixtures/wordcloud.json";

export const fixtures = {
  session: sessionFixture,
  scatterAfterHop,
  scatterAfterPrune,
  scatterAfterUndo,
  lassoGeometry,
  selectionLasso,
  selectionOffTopic,
  wordcloud: wordcloudFixture,
  table: tableFixture,
  pruneManual: pruneManualFixture,
  undo: undoFixture,
  hop: hopFixture,
  hopPreview: hopPreviewFixture,
  compactness: compactnessAfterHop,
};

interface Mark {
  kind: "circle" | "ring" | "polyline" | "rect" | "text";
  x?: number;
  y?: number;
  radius?: number;
  fill?: string;
  stroke?: string;
  color?: string;
  points?: Point[];
  message?: string;
}

export class RecordingSurface implements MarkSurface {
  marks: Mark[] = [];
  clears = 0;

  clear(): void {
    this.clears += 1;
    this.marks = [];
  }

  circle(x: number, y: number, radius: number, fill: string, stroke?: string): void {
    this.marks.push({ kind: "circle", x, y, radius, fill, stroke });
  }

  ring(x: number, y: number, radius: number, color: string): void {
    this.marks.push({ kind: "ring", x, y, radius, color });
  }

  polyline(points: Point[], color: string): void {
    this.marks.push({ kind: "polyline", points, color });
  }

  rect(x0: number, y0: number, x1: number, y1: number, color: string): void {
    this.marks.push({ kind: "rect", x: x0, y: y0, color });
  }

  text(x: number, y: number, message: string, color: string): void {
    this.marks.push({ kind: "text", x, y, message, color });
  }

  circles(): Mark[] {
    return this.marks.filter((m) => m.kind === "circle");
  }

  rings(): Mark[] {
    return this.marks.filter((m) => m.kind === "ring");
  }

  texts(): Mark[] {
    return this.marks.filter((m) => m.kind === "text");
  }
}

function json(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export type ServerState = "after_hop" | "after_prune" | "after_undo";

/** Replays the recorded payloads with just enough state for the
 * delete-then-undo flow; unknown routes 404 so contract drift is loud. */
export class FakeServer {
  state: ServerState = "after_hop";
  requests: { method: string; path: string; body?: unknown }[] = [];

  fetch: FetchLike = async (input, init) => {
    const url = new URL(input, "http://fake.test");
    const method = (init?.method ?? "GET").toUpperCase();
    const path = url.pathname;
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.requests.push({ method, path, body });

    if (method === "GET" && path === "/api/session") {
      return json({ ...fixtures.session, n_papers: this.scatter().length });
    }
    if (method === "GET" && path === "/api/scatter") {
      return json(this.scatter());
    }
    if (method === "GET" && path === "/api/metrics/compactness") {
      return json(fixtures.compactness);
    }
    if (method === "GET" && path === "/api/hop/preview") {
      return json(fixtures.hopPreview);
    }
    if (method === "POST" && path === "/api/hop") {
      return json(fixtures.hop);
    }
    if (method === "POST" && path === "/api/selection") {
      const geometry = (body as { geometry: { type: string } }).geometry;
      if (JSON.stringify(geometry) === JSON.stringify(fixtures.lassoGeometry)) {
        return json(fixtures.selectionLasso);
      }
      if (geometry.type === "ids") {
        return json(fixtures.selectionOffTopic);
      }
      return json({ error: "GeometryError", detail: "unmatched geometry" }, 400);
    }
    if (method === "GET"
        && path === `/api/selection/${fixtures.selectionLasso.selection_id}/wordcloud`) {
      return json(fixtures.wordcloud);
    }
    if (method === "GET"
        && path === `/api/selection/${fixtures.selectionLasso.selection_id}/table`) {
      return json(fixtures.table);
    }
    if (method === "GET" && path.endsWith("/wordcloud")) {
      return json({ counts: [] });
    }
    if (method === "GET" && path.endsWith("/table")) {
      return json({ rows: [] });
    }
    if (method === "POST" && path === "/api/prune/manual") {
      this.state = "after_prune";
      return json(fixtures.pruneManual);
    }
    if (method === "POST" && path === "/api/undo") {
      this.state = "after_undo";
      return json(fixtures.undo);
    }
    return json({ error: "NotFound", detail: `no route ${method} ${path}` }, 404);
  };

  private scatter(): typeof fixtures.scatterAfterHop {
    if (this.state === "after_prune") {
      return fixtures.scatterAfterPrune;
    }
    if (this.state === "after_undo") {
      return fixtures.scatterAfterUndo;
    }
    return fixtures.scatterAfterHop;
  }
}

export const unreachableFetch: FetchLike = async () => {
  throw new TypeError("fetch failed: connection refused");
};
