/**
 * Canvas editor bound to a PageView: draws the page with its boxes and
 * turns keyboard/mouse input into model edits.
 *
 * Keys: a-z retype, Tab/Shift-Tab walk boxes in reading order, arrows
 * nudge (with Shift: resize right/top edges, with Alt: left/bottom),
 * Delete removes, Ctrl-Z undoes, Ctrl-S saves. Dragging on empty paper
 * inserts a box; dragging inside a box moves it; dragging near an edge
 * resizes that edge.
 */

import { LabelerApi, PageInfo } from "./api.js";
import { BoxEntry, Edge, PageView, fromScreenRect, toScreenRect, validateEntries } from "./model.js";

const EDGE_GRIP = 4; // px distance that counts as grabbing an edge

type DragState =
  | { kind: "move"; lastX: number; lastY: number }
  | { kind: "resize"; edge: Edge; lastX: number; lastY: number }
  | { kind: "insert"; startX: number; startY: number; curX: number; curY: number };

export class Editor {
  private view: PageView | null = null;
  private image: HTMLImageElement | null = null;
  private drag: DragState | null = null;
  private scale = 1;
  private statusLine = "";

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly api: LabelerApi,
    private readonly status: (text: string) => void
  ) {
    canvas.tabIndex = 0;
    canvas.addEventListener("keydown", (e) => this.onKey(e));
    canvas.addEventListener("mousedown", (e) => this.onMouseDown(e));
    canvas.addEventListener("mousemove", (e) => this.onMouseMove(e));
    canvas.addEventListener("mouseup", () => this.onMouseUp());
    window.addEventListener("beforeunload", (e) => {
      if (this.view?.dirty) {
        e.preventDefault();
      }
    });
  }

  get pageView(): PageView | null {
    return this.view;
  }

  async load(page: PageInfo): Promise<void> {
    if (this.view?.dirty && !window.confirm("Discard unsaved box edits?")) {
      return;
    }
    const entries = await this.api.getBoxes(page.id);
    this.view = new PageView(page.id, page.width, page.height, entries);
    this.image = await this.loadImage(this.api.imageUrl(page));
    this.scale = Math.min(1200 / page.width, 800 / page.height, 2);
    this.canvas.width = Math.round(page.width * this.scale);
    this.canvas.height = Math.round(page.height * this.scale);
    this.canvas.focus();
    this.note(`loaded ${page.id} with ${entries.length} boxes`);
    this.render();
  }

  private loadImage(url: string): Promise<HTMLImageElement> {
    return new Promise((resolve, reject) => {
      const img = new Image();
      img.onload = () => resolve(img);
      img.onerror = () => reject(new Error(`image failed to load: ${url}`));
      img.src = url;
    });
  }

  async save(): Promise<void> {
    if (!this.view) {
      return;
    }
    const local = validateEntries(this.view.entries, this.view.width, this.view.height);
    if (local.length) {
      this.note(`not saved: ${local[0].message} (box ${local[0].index})`);
      this.render();
      return;
    }
    const result = await this.api.putBoxes(this.view.pageId, this.view.payload().entries);
    if (result.ok) {
      this.view.markSaved();
      this.note("saved");
    } else {
      const first = result.issues[0];
      this.note(
        `rejected (${result.status}): ` +
          (first ? `${first.kind} on box ${first.index}: ${first.message}` : "no detail")
      );
    }
    this.render();
  }

  private note(text: string): void {
    this.statusLine = text;
    const v = this.view;
    const suffix = v ? (v.dirty ? "  [unsaved edits]" : "  [saved]") : "";
    this.status(text + suffix);
  }

  // -- input ----------------------------------------------------------------

  private onKey(e: KeyboardEvent): void {
    const v = this.view;
    if (!v) {
      return;
    }
    const step = e.ctrlKey ? 5 : 1;
    let handled = true;
    if (e.key === "Tab") {
      v.selectNext(e.shiftKey ? -1 : 1);
    } else if (e.key === "Delete" || e.key === "Backspace") {
      v.deleteSelected();
    } else if ((e.ctrlKey || e.metaKey) && e.key.toLowerCase() === "z") {
      v.undo();
    } else if ((e.ctrlKey || e.metaKey) && e.key.toLowerCase() === "s") {
      void this.save();
    } else if (e.key.startsWith("Arrow")) {
      const dx = e.key === "ArrowLeft" ? -step : e.key === "ArrowRight" ? step : 0;
      const dy = e.key === "ArrowUp" ? step : e.key === "ArrowDown" ? -step : 0;
      if (e.shiftKey) {
        // grow/shrink the right and top edges
        if (dx) v.resizeEdge("right", dx);
        if (dy) v.resizeEdge("top", dy);
      } else if (e.altKey) {
        if (dx) v.resizeEdge("left", dx);
        if (dy) v.resizeEdge("bottom", dy);
      } else {
        v.nudge(dx, dy);
      }
    } else if (!e.ctrlKey && !e.metaKey && !e.altKey && v.retype(e.key)) {
      v.selectNext(1); // typing advances, the bulk-correction flow
    } else {
      handled = false;
    }
    if (handled) {
      e.preventDefault();
      this.note(this.statusLine);
      this.render();
    }
  }

  /** Canvas pixel -> image pixel (top-left origin). */
  private toImage(e: MouseEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    return {
      x: Math.round((e.clientX - rect.left) / this.scale),
      y: Math.round((e.clientY - rect.top) / this.scale),
    };
  }

  private hitEdge(box: BoxEntry, x: number, y: number): Edge | null {
    const v = this.view!;
    const r = toScreenRect(box, v.height);
    const inX = x >= r.x - EDGE_GRIP && x <= r.x + r.w + EDGE_GRIP;
    const inY = y >= r.y - EDGE_GRIP && y <= r.y + r.h + EDGE_GRIP;
    if (!inX || !inY) {
      return null;
    }
    if (Math.abs(x - r.x) <= EDGE_GRIP) return "left";
    if (Math.abs(x - (r.x + r.w)) <= EDGE_GRIP) return "right";
    if (Math.abs(y - r.y) <= EDGE_GRIP) return "top";
    if (Math.abs(y - (r.y + r.h)) <= EDGE_GRIP) return "bottom";
    return null;
  }

  private boxAt(x: number, y: number): number | null {
    const v = this.view!;
    for (let i = v.entries.length - 1; i >= 0; i--) {
      const r = toScreenRect(v.entries[i], v.height);
      if (x >= r.x && x < r.x + r.w && y >= r.y && y < r.y + r.h) {
        return i;
      }
    }
    return null;
  }

  private onMouseDown(e: MouseEvent): void {
    const v = this.view;
    if (!v) {
      return;
    }
    this.canvas.focus();
    const { x, y } = this.toImage(e);
    const selected = v.selected;
    if (selected) {
      const edge = this.hitEdge(selected, x, y);
      if (edge) {
        this.drag = { kind: "resize", edge, lastX: x, lastY: y };
        return;
      }
    }
    const hit = this.boxAt(x, y);
    if (hit !== null) {
      v.select(hit);
      this.drag = { kind: "move", lastX: x, lastY: y };
    } else {
      this.drag = { kind: "insert", startX: x, startY: y, curX: x, curY: y };
    }
    this.render();
  }

  private onMouseMove(e: MouseEvent): void {
    const v = this.view;
    if (!v || !this.drag) {
      return;
    }
    const { x, y } = this.toImage(e);
    const d = this.drag;
    if (d.kind === "move") {
      // screen dy down = box dy negative
      if (x !== d.lastX || y !== d.lastY) {
        v.nudge(x - d.lastX, d.lastY - y);
        d.lastX = x;
        d.lastY = y;
      }
    } else if (d.kind === "resize") {
      const dx = x - d.lastX;
      const dy = y - d.lastY;
      if (d.edge === "left" || d.edge === "right") {
        if (dx) v.resizeEdge(d.edge, dx);
      } else if (dy) {
        // screen-down drag lowers top / lowers bottom
        v.resizeEdge(d.edge, -dy);
      }
      d.lastX = x;
      d.lastY = y;
    } else {
      d.curX = x;
      d.curY = y;
    }
    this.render();
  }

  private onMouseUp(): void {
    const v = this.view;
    const d = this.drag;
    this.drag = null;
    if (!v || !d || d.kind !== "insert") {
      this.render();
      return;
    }
    const x0 = Math.min(d.startX, d.curX);
    const x1 = Math.max(d.startX, d.curX);
    const y0 = Math.min(d.startY, d.curY);
    const y1 = Math.max(d.startY, d.curY);
    if (x1 - x0 >= 2 && y1 - y0 >= 2) {
      const rect = { x: x0, y: y0, w: x1 - x0, h: y1 - y0 };
      v.insertBox({ glyph: "*", ...fromScreenRect(rect, v.height) });
      this.note("inserted box; type its letter");
    } else {
      v.select(null);
    }
    this.render();
  }

  // -- drawing ----------------------------------------------------------------

  render(): void {
    const ctx = this.canvas.getContext("2d");
    const v = this.view;
    if (!ctx || !v || !this.image) {
      return;
    }
    ctx.setTransform(this.scale, 0, 0, this.scale, 0, 0);
    ctx.clearRect(0, 0, v.width, v.height);
    ctx.drawImage(this.image, 0, 0);
    ctx.font = "12px sans-serif";
    ctx.textBaseline = "bottom";
    v.entries.forEach((box, i) => {
      const r = toScreenRect(box, v.height);
      const isSelected = i === v.selection;
      ctx.lineWidth = isSelected ? 2 : 1;
      ctx.strokeStyle = isSelected ? "#d22" : box.glyph === "*" ? "#e80" : "#2a7";
      ctx.strokeRect(r.x + 0.5, r.y + 0.5, r.w - 1, r.h - 1);
      ctx.fillStyle = ctx.strokeStyle;
      ctx.fillText(box.glyph, r.x, r.y - 1);
    });
    if (this.drag?.kind === "insert") {
      const d = this.drag;
      ctx.strokeStyle = "#66f";
      ctx.setLineDash([4, 3]);
      ctx.strokeRect(
        Math.min(d.startX, d.curX),
        Math.min(d.startY, d.curY),
        Math.abs(d.curX - d.startX),
        Math.abs(d.curY - d.startY)
      );
      ctx.setLineDash([]);
    }
  }
}
