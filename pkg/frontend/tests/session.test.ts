/**
 * Scripted labeling session against a double that implements the
 * service's documented GET/PUT semantics (including 422 on hard rules
 * and last-write-wins storage).
 */
import { describe, expect, it } from "vitest";

import { FetchLike, LabelerApi } from "../src/api.js";
import { BoxEntry, PageView, validateEntries } from "../src/model.js";

class FakeService {
  pages: Record<string, { width: number; height: number; entries: BoxEntry[] }> = {};
  putCount = 0;

  fetchLike(): FetchLike {
    return async (url, init) => {
      const listMatch = url.match(/\/api\/pages$/);
      const boxesMatch = url.match(/\/api\/pages\/([^/]+)\/boxes$/);
      const respond = (status: number, payload: unknown) => ({
        status,
        json: async () => payload,
      });
      if (listMatch) {
        return respond(
          200,
          Object.entries(this.pages).map(([id, p]) => ({
            id,
            width: p.width,
            height: p.height,
            "image-uri": `/api/pages/${id}/image`,
            "box-uri": `/api/pages/${id}/boxes`,
          }))
        );
      }
      if (!boxesMatch) {
        return respond(404, { error: "unknown endpoint" });
      }
      const page = this.pages[boxesMatch[1]];
      if (!page) {
        return respond(404, { error: "unknown page" });
      }
      if (!init || init.method === undefined || init.method === "GET") {
        return respond(200, { entries: page.entries.map((e) => ({ ...e })) });
      }
      const body = JSON.parse(init.body ?? "{}") as { entries: BoxEntry[] };
      const issues = validateEntries(body.entries, page.width, page.height);
      if (issues.length) {
        return respond(422, { issues });
      }
      page.entries = body.entries.map((e) => ({ ...e }));
      this.putCount += 1;
      return respond(200, { ok: true, entries: body.entries.length });
    };
  }
}

function tenBoxes(): BoxEntry[] {
  const entries: BoxEntry[] = [];
  for (let i = 0; i < 10; i++) {
    entries.push({ glyph: "abcdefghij"[i], left: 10 + i * 20, bottom: 40, right: 25 + i * 20, top: 60 });
  }
  return entries;
}

describe("scripted labeling session", () => {
  it("edits ten boxes and the refetched payload matches the edited state", async () => {
    const service = new FakeService();
    service.pages["sheet0"] = { width: 300, height: 100, entries: tenBoxes() };
    const api = new LabelerApi("", service.fetchLike());

    const pages = await api.listPages();
    expect(pages).toHaveLength(1);
    const info = pages[0];
    expect(info.boxUri).toBe("/api/pages/sheet0/boxes");

    const view = new PageView(info.id, info.width, info.height, await api.getBoxes(info.id));
    expect(view.entries).toHaveLength(10);
    expect(view.dirty).toBe(false);

    // relabel three boxes via the keyboard flow
    view.select(0);
    expect(view.retype("x")).toBe(true);
    view.selectNext(1);
    expect(view.retype("y")).toBe(true);
    view.selectNext(1);
    expect(view.retype("z")).toBe(true);

    // move one box
    view.select(5);
    view.nudge(4, -3);

    // delete one
    view.select(9);
    view.deleteSelected();

    // insert one (same band, far right)
    view.insertBox({ glyph: "q", left: 240, bottom: 40, right: 255, top: 60 });

    expect(view.dirty).toBe(true);
    const edited = view.payload().entries;
    expect(edited).toHaveLength(10);
    // relabeled first three, 'j' gone, 'q' appended at the right end
    expect(edited.map((e) => e.glyph).join("")).toBe("xyzdefghiq");

    const result = await api.putBoxes(view.pageId, edited);
    expect(result.ok).toBe(true);
    view.markSaved();
    expect(view.dirty).toBe(false);

    const refetched = await api.getBoxes(view.pageId);
    expect(refetched).toEqual(edited);
    expect(service.putCount).toBe(1);

    // concrete spot checks on the edited content
    expect(refetched[0].glyph).toBe("x");
    expect(refetched[1].glyph).toBe("y");
    expect(refetched[2].glyph).toBe("z");
    expect(refetched[5]).toEqual({ glyph: "f", left: 114, bottom: 37, right: 129, top: 57 });
    expect(refetched.some((e) => e.glyph === "q")).toBe(true);
    expect(refetched.every((e) => e.glyph !== "j")).toBe(true);
  });

  it("shows per-box issues on a 422 and keeps the server state unchanged", async () => {
    const service = new FakeService();
    service.pages["sheet0"] = { width: 100, height: 50, entries: tenBoxes().slice(0, 2) };
    const api = new LabelerApi("", service.fetchLike());
    const view = new PageView("sheet0", 100, 50, await api.getBoxes("sheet0"));

    view.select(0);
    view.nudge(500, 0); // way out of bounds
    const result = await api.putBoxes(view.pageId, view.payload().entries);
    expect(result.ok).toBe(false);
    if (!result.ok) {
      expect(result.status).toBe(422);
      expect(result.issues[0].kind).toBe("out-of-bounds");
      expect(result.issues[0].index).toBe(0);
    }
    expect(view.dirty).toBe(true); // nothing was acknowledged
    const serverSide = await api.getBoxes("sheet0");
    expect(serverSide[0].left).toBe(10);
  });

  it("undo after a save round trip returns to the saved payload", async () => {
    const service = new FakeService();
    service.pages["sheet0"] = { width: 300, height: 100, entries: tenBoxes() };
    const api = new LabelerApi("", service.fetchLike());
    const view = new PageView("sheet0", 300, 100, await api.getBoxes("sheet0"));

    view.select(3);
    view.retype("m");
    await api.putBoxes(view.pageId, view.payload().entries);
    view.markSaved();

    view.select(4);
    view.retype("n");
    expect(view.dirty).toBe(true);
    view.undo();
    expect(view.dirty).toBe(false); // matches the last save again
  });
});
