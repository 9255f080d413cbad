/**
 * Editor state for one page of labeled boxes.
 *
 * Boxes use the box-file convention: origin at the image's bottom-left,
 * y increasing upward, right/top exclusive. The screen draws from the
 * top-left, so rendering flips the y axis; both conversions are exact on
 * integer pixels.
 */

export interface BoxEntry {
  glyph: string;
  left: number;
  bottom: number;
  right: number;
  top: number;
}

export interface ScreenRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export type Edge = "left" | "right" | "top" | "bottom";

export function toScreenRect(box: BoxEntry, imageHeight: number): ScreenRect {
  return {
    x: box.left,
    y: imageHeight - box.top,
    w: box.right - box.left,
    h: box.top - box.bottom,
  };
}

export function fromScreenRect(
  rect: ScreenRect,
  imageHeight: number
): Pick<BoxEntry, "left" | "bottom" | "right" | "top"> {
  return {
    left: rect.x,
    bottom: imageHeight - (rect.y + rect.h),
    right: rect.x + rect.w,
    top: imageHeight - rect.y,
  };
}

export interface Issue {
  kind: string;
  index: number | null;
  message: string;
}

/** Client-side mirror of the hard rules the service enforces on PUT. */
export function validateEntries(
  entries: readonly BoxEntry[],
  width: number,
  height: number
): Issue[] {
  const issues: Issue[] = [];
  entries.forEach((e, i) => {
    if (e.glyph.length !== 1) {
      issues.push({ kind: "malformed", index: i, message: `label must be one character` });
    }
    if (e.left >= e.right || e.bottom >= e.top) {
      issues.push({ kind: "malformed", index: i, message: `degenerate box` });
    }
    if (e.left < 0 || e.bottom < 0 || e.right > width || e.top > height) {
      issues.push({ kind: "out-of-bounds", index: i, message: `box exceeds the page` });
    }
  });
  return issues;
}

function isLowercase(ch: string): boolean {
  return ch.length === 1 && ch >= "a" && ch <= "z";
}

function clone(entries: readonly BoxEntry[]): BoxEntry[] {
  return entries.map((e) => ({ ...e }));
}

/** Reading-order insertion point: lines top-first, left-to-right within. */
function readingOrderIndex(entries: readonly BoxEntry[], box: BoxEntry): number {
  for (let i = 0; i < entries.length; i++) {
    const e = entries[i];
    const overlaps = Math.min(e.top, box.top) - Math.max(e.bottom, box.bottom) > 0;
    if (overlaps ? box.left < e.left : box.top > e.top) {
      return i;
    }
  }
  return entries.length;
}

export class PageView {
  readonly pageId: string;
  readonly width: number;
  readonly height: number;
  entries: BoxEntry[];
  selection: number | null = null;
  private savedState: string;
  private undoStack: BoxEntry[][] = [];

  constructor(pageId: string, width: number, height: number, entries: BoxEntry[]) {
    this.pageId = pageId;
    this.width = width;
    this.height = height;
    this.entries = clone(entries);
    this.savedState = JSON.stringify(this.entries);
  }

  get dirty(): boolean {
    return JSON.stringify(this.entries) !== this.savedState;
  }

  /** Call after a successful save (or reload) to reset the dirty baseline. */
  markSaved(): void {
    this.savedState = JSON.stringify(this.entries);
  }

  payload(): { entries: BoxEntry[] } {
    return { entries: clone(this.entries) };
  }

  private beginEdit(): void {
    this.undoStack.push(clone(this.entries));
    if (this.undoStack.length > 200) {
      this.undoStack.shift();
    }
  }

  undo(): boolean {
    const previous = this.undoStack.pop();
    if (!previous) {
      return false;
    }
    this.entries = previous;
    if (this.selection !== null && this.selection >= this.entries.length) {
      this.selection = this.entries.length ? this.entries.length - 1 : null;
    }
    return true;
  }

  select(index: number | null): void {
    if (index !== null && (index < 0 || index >= this.entries.length)) {
      return;
    }
    this.selection = index;
  }

  selectNext(step = 1): void {
    if (!this.entries.length) {
      this.selection = null;
      return;
    }
    const current = this.selection ?? (step > 0 ? -1 : 0);
    const n = this.entries.length;
    this.selection = ((current + step) % n + n) % n;
  }

  get selected(): BoxEntry | null {
    return this.selection === null ? null : this.entries[this.selection];
  }

  /** Retype the selected box's label; only a-z keys apply. */
  retype(glyph: string): boolean {
    const box = this.selected;
    if (!box || !isLowercase(glyph)) {
      return false;
    }
    this.beginEdit();
    this.entries[this.selection!] = { ...box, glyph };
    return true;
  }

  /** Move the selected box by whole pixels (dy positive = upward). */
  nudge(dx: number, dy: number): boolean {
    const box = this.selected;
    if (!box) {
      return false;
    }
    this.beginEdit();
    this.entries[this.selection!] = {
      ...box,
      left: box.left + dx,
      right: box.right + dx,
      bottom: box.bottom + dy,
      top: box.top + dy,
    };
    return true;
  }

  /** Drag one edge by delta pixels; width/height are clamped to >= 1. */
  resizeEdge(edge: Edge, delta: number): boolean {
    const box = this.selected;
    if (!box) {
      return false;
    }
    const next = { ...box };
    switch (edge) {
      case "left":
        next.left = Math.min(box.left + delta, box.right - 1);
        break;
      case "right":
        next.right = Math.max(box.right + delta, box.left + 1);
        break;
      case "bottom":
        next.bottom = Math.min(box.bottom + delta, box.top - 1);
        break;
      case "top":
        next.top = Math.max(box.top + delta, box.bottom + 1);
        break;
    }
    this.beginEdit();
    this.entries[this.selection!] = next;
    return true;
  }

  deleteSelected(): boolean {
    if (this.selection === null) {
      return false;
    }
    this.beginEdit();
    this.entries.splice(this.selection, 1);
    this.selection = this.entries.length
      ? Math.min(this.selection, this.entries.length - 1)
      : null;
    return true;
  }

  /** Insert a drag-drawn box at its reading-order position and select it. */
  insertBox(box: BoxEntry): number {
    this.beginEdit();
    const index = readingOrderIndex(this.entries, box);
    this.entries.splice(index, 0, { ...box });
    this.selection = index;
    return index;
  }
}
