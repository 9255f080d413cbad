/** Typed client for the labeling service endpoints. */

import type { BoxEntry, Issue } from "./model.js";

export interface PageInfo {
  id: string;
  width: number;
  height: number;
  imageUri: string;
  boxUri: string;
}

export type SaveResult =
  | { ok: true }
  | { ok: false; status: number; issues: Issue[] };

interface ResponseLike {
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string }
) => Promise<ResponseLike>;

export class LabelerApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...(args as [string]))
  ) {}

  async listPages(): Promise<PageInfo[]> {
    const res = await this.fetchFn(`${this.base}/api/pages`);
    if (res.status !== 200) {
      throw new Error(`page listing failed with ${res.status}`);
    }
    const raw = (await res.json()) as Record<string, unknown>[];
    return raw.map((r) => ({
      id: r["id"] as string,
      width: r["width"] as number,
      height: r["height"] as number,
      imageUri: r["image-uri"] as string,
      boxUri: r["box-uri"] as string,
    }));
  }

  async getBoxes(pageId: string): Promise<BoxEntry[]> {
    const res = await this.fetchFn(`${this.base}/api/pages/${pageId}/boxes`);
    if (res.status !== 200) {
      throw new Error(`boxes for ${pageId} failed with ${res.status}`);
    }
    const raw = (await res.json()) as { entries: BoxEntry[] };
    return raw.entries;
  }

  async putBoxes(pageId: string, entries: BoxEntry[]): Promise<SaveResult> {
    const res = await this.fetchFn(`${this.base}/api/pages/${pageId}/boxes`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ entries }),
    });
    if (res.status === 200) {
      return { ok: true };
    }
    const body = (await res.json()) as { issues?: Issue[] };
    return { ok: false, status: res.status, issues: body.issues ?? [] };
  }

  imageUrl(page: PageInfo): string {
    return `${this.base}${page.imageUri}`;
  }
}
