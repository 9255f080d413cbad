import { LabelerApi, PageInfo } from "./api.js";
import { Editor } from "./editor.js";

const api = new LabelerApi("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

async function start(): Promise<void> {
  const canvas = el<HTMLCanvasElement>("page-canvas");
  const statusBar = el<HTMLElement>("status");
  const listNode = el<HTMLUListElement>("page-list");
  const saveButton = el<HTMLButtonElement>("save");

  const editor = new Editor(canvas, api, (text) => {
    statusBar.textContent = text;
  });
  saveButton.addEventListener("click", () => void editor.save());

  let pages: PageInfo[] = [];
  try {
    pages = await api.listPages();
  } catch (err) {
    statusBar.textContent = `cannot reach the labeling service: ${String(err)}`;
    return;
  }
  if (!pages.length) {
    statusBar.textContent = "the service has no image/box pairs to label";
    return;
  }

  const items: HTMLLIElement[] = [];
  pages.forEach((page) => {
    const item = document.createElement("li");
    item.textContent = `${page.id} (${page.width}×${page.height})`;
    item.addEventListener("click", () => {
      void editor.load(page).then(() => {
        items.forEach((other) => other.classList.remove("active"));
        item.classList.add("active");
      });
    });
    items.push(item);
    listNode.appendChild(item);
  });
  items[0].click();
}

void start();
