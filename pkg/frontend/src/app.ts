/** Workbench wiring: toolbar, scatter, legend, wordcloud, table.
 *
 * Server-authoritative throughout: every displayed number is a field of an
 * API response, selections hold the ids the server resolved, and there are
 * no optimistic updates — each mutation is followed by a full refresh.
 */

import { ApiClient, ApiError } from "./api.js";
import { legendEntries } from "./palette.js";
import { Canvas2DSurface, GestureError, GestureMode, MarkSurface, ScatterView } from "./scatter.js";
import { renderTable } from "./table.js";
import type { Geometry, Point, ScatterPoint } from "./types.js";
import { renderWordcloud } from "./wordcloud.js";

export type InteractionMode = GestureMode | "pan";

const WIDTH = 900;
const HEIGHT = 600;

export class WorkbenchApp {
  readonly view: ScatterView;
  mode: InteractionMode = "lasso";
  selectionId: string | null = null;
  points: ScatterPoint[] = [];

  private readonly elements: {
    error: HTMLElement;
    status: HTMLElement;
    legend: HTMLElement;
    wordcloud: HTMLElement;
    table: HTMLElement;
    deleteButton: HTMLButtonElement;
    canvas: HTMLCanvasElement | null;
  };

  constructor(
    root: HTMLElement,
    private readonly api: ApiClient,
    surface?: MarkSurface,
  ) {
    const doc = root.ownerDocument;
    root.innerHTML = `
      <div class="workbench">
        <div class="toolbar">
          <select class="direction">
            <option value="citations">citations</option>
            <option value="references">references</option>
          </select>
          <button class="btn-preview">preview hop</button>
          <button class="btn-hop">hop</button>
          <button class="btn-prune-hypersphere">prune: hypersphere</button>
          <button class="btn-prune-topics">prune: topics</button>
          <button class="btn-undo">undo</button>
          <select class="mode-select">
            <option value="lasso">lasso</option>
            <option value="rectangle">rectangle</option>
            <option value="pan">pan</option>
          </select>
          <button class="btn-delete" disabled>delete selected</button>
          <span class="status"></span>
        </div>
        <div class="error-banner" hidden></div>
        <div class="panes">
          <div class="scatter-pane"></div>
          <div class="legend"></div>
          <div class="wordcloud"></div>
          <div class="table-pane"></div>
        </div>
      </div>`;

    const query = <T extends HTMLElement>(selector: string): T => {
      const el = root.querySelector(selector);
      if (!el) {
        throw new Error(`missing element ${selector}`);
      }
      return el as T;
    };

    let canvas: HTMLCanvasElement | null = null;
    if (!surface) {
      canvas = doc.createElement("canvas");
      canvas.width = WIDTH;
      canvas.height = HEIGHT;
      query(".scatter-pane").appendChild(canvas);
      const ctx = canvas.getContext("2d");
      if (!ctx) {
        throw new Error("2D canvas is unavailable; pass a MarkSurface instead");
      }
      surface = new Canvas2DSurface(ctx);
      this.attachPointerHandlers(canvas);
    }
    this.view = new ScatterView(surface, WIDTH, HEIGHT);

    this.elements = {
      error: query(".error-banner"),
      status: query(".status"),
      legend: query(".legend"),
      wordcloud: query(".wordcloud"),
      table: query(".table-pane"),
      deleteButton: query(".btn-delete"),
      canvas,
    };

    query(".btn-hop").addEventListener("click", () => void this.hop());
    query(".btn-preview").addEventListener("click", () => void this.previewHop());
    query(".btn-prune-hypersphere").addEventListener("click",
      () => void this.pruneHypersphere());
    query(".btn-prune-topics").addEventListener("click",
      () => void this.pruneTopics());
    query(".btn-undo").addEventListener("click", () => void this.undo());
    this.elements.deleteButton.addEventListener("click",
      () => void this.deleteSelected());
    query<HTMLSelectElement>(".mode-select").addEventListener("change", (event) => {
      this.mode = (event.target as HTMLSelectElement).value as InteractionMode;
    });
  }

  private direction(): string {
    const select = this.elements.status.ownerDocument.querySelector(".direction");
    return (select as HTMLSelectElement | null)?.value ?? "citations";
  }

  // --- lifecycle ---------------------------------------------------------------

  async init(): Promise<void> {
    await this.refresh();
  }

  /** Reload scatter + metrics from the server; selections do not survive a
   * layout refresh. */
  async refresh(): Promise<void> {
    this.selectionId = null;
    this.view.setSelected([]);
    this.elements.deleteButton.disabled = true;
    try {
      const session = await this.api.session();
      if (session.n_papers === 0) {
        this.points = [];
        this.view.setPoints([]);
        this.view.render();
        this.renderLegend();
        this.setStatus("empty session — add a core to begin");
        this.clearError();
        return;
      }
      const [points, compactness] = await Promise.all([
        this.api.scatter(),
        this.api.compactness(),
      ]);
      this.points = points;
      this.view.setPoints(points);
      this.view.render();
      this.renderLegend();
      this.setStatus(
        `${session.n_papers} papers · hop ${session.current_hop} · ` +
        `compactness ${compactness.score.toFixed(4)}`);
      this.clearError();
    } catch (err) {
      this.showError(err);
    }
  }

  private renderLegend(): void {
    const container = this.elements.legend;
    container.textContent = "";
    const doc = container.ownerDocument;
    for (const entry of legendEntries(this.points)) {
      const item = doc.createElement("span");
      item.className = "legend-entry";
      item.dataset.hop = String(entry.hop);
      const swatch = doc.createElement("i");
      swatch.style.backgroundColor = entry.color;
      item.appendChild(swatch);
      item.appendChild(doc.createTextNode(entry.label));
      container.appendChild(item);
    }
  }

  // --- selection flow --------------------------------------------------------------

  /** Submit a gesture's geometry; the response ids are the selection. */
  async submitGesture(geometry: Geometry): Promise<void> {
    try {
      const selection = await this.api.makeSelection(geometry);
      this.selectionId = selection.selection_id;
      this.view.setSelected(selection.ids);
      this.view.render();
      this.elements.deleteButton.disabled = selection.ids.length === 0;
      const [cloud, table] = await Promise.all([
        this.api.wordcloud(selection.selection_id),
        this.api.table(selection.selection_id),
      ]);
      renderWordcloud(this.elements.wordcloud, cloud.counts);
      renderTable(this.elements.table, table.rows);
      this.clearError();
    } catch (err) {
      this.showError(err);
    }
  }

  finishGesture(): Promise<void> | void {
    let geometry: Geometry;
    try {
      geometry = this.view.endGesture();
    } catch (err) {
      if (err instanceof GestureError) {
        this.showError(err);
        this.view.render();
        return;
      }
      throw err;
    }
    return this.submitGesture(geometry);
  }

  // --- mutations --------------------------------------------------------------------

  async hop(): Promise<void> {
    try {
      await this.api.hop(this.direction());
    } catch (err) {
      this.showError(err);
      return;
    }
    await this.refresh();
  }

  async previewHop(): Promise<void> {
    try {
      const preview = await this.api.hopPreview(this.direction());
      this.setStatus(`next ${preview.direction} hop would add ${preview.count} papers`);
    } catch (err) {
      this.showError(err);
    }
  }

  async pruneHypersphere(): Promise<void> {
    try {
      await this.api.pruneHypersphere();
    } catch (err) {
      this.showError(err);
      return;
    }
    await this.refresh();
  }

  async pruneTopics(): Promise<void> {
    try {
      await this.api.pruneTopics();
    } catch (err) {
      this.showError(err);
      return;
    }
    await this.refresh();
  }

  async deleteSelected(): Promise<void> {
    if (!this.selectionId) {
      return;
    }
    try {
      await this.api.pruneManual(this.selectionId);
    } catch (err) {
      this.showError(err);
      return;
    }
    await this.refresh();
  }

  async undo(): Promise<void> {
    try {
      await this.api.undo();
    } catch (err) {
      this.showError(err);
      return;
    }
    await this.refresh();
  }

  // --- status and errors ---------------------------------------------------------------

  setStatus(message: string): void {
    this.elements.status.textContent = message;
  }

  showError(err: unknown): void {
    const message = err instanceof ApiError
      ? `${err.kind}: ${err.message}`
      : String(err instanceof Error ? err.message : err);
    this.elements.error.textContent = message;
    this.elements.error.hidden = false;
  }

  clearError(): void {
    this.elements.error.hidden = true;
    this.elements.error.textContent = "";
  }

  errorVisible(): boolean {
    return !this.elements.error.hidden;
  }

  // --- browser pointer plumbing ------------------------------------------------------------

  private attachPointerHandlers(canvas: HTMLCanvasElement): void {
    let panning = false;
    let last: Point = [0, 0];

    const position = (event: PointerEvent): Point => {
      const rect = canvas.getBoundingClientRect();
      return [event.clientX - rect.left, event.clientY - rect.top];
    };

    canvas.addEventListener("pointerdown", (event) => {
      const at = position(event);
      if (this.mode === "pan") {
        panning = true;
        last = at;
        return;
      }
      this.view.beginGesture(this.mode, at);
    });
    canvas.addEventListener("pointermove", (event) => {
      const at = position(event);
      if (panning) {
        this.view.pan(at[0] - last[0], at[1] - last[1]);
        last = at;
        this.view.render();
        return;
      }
      if (this.view.gestureInProgress()) {
        this.view.extendGesture(at);
        this.view.render();
      }
    });
    canvas.addEventListener("pointerup", () => {
      if (panning) {
        panning = false;
        return;
      }
      if (this.view.gestureInProgress()) {
        void this.finishGesture();
      }
    });
    canvas.addEventListener("wheel", (event) => {
      event.preventDefault();
      const rect = canvas.getBoundingClientRect();
      const center: Point = [event.clientX - rect.left, event.clientY - rect.top];
      this.view.zoom(event.deltaY < 0 ? 1.15 : 1 / 1.15, center);
      this.view.render();
    });
  }
}
