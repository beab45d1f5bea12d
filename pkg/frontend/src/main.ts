/*
 * Entry point.  Reads the service base address — the UI's only
 * configuration — from <meta name="closeread-service">, asks for the
 * annotator's bearer token once, then drives batch list → batch screen →
 * passage screens.  Queued offline work is retried on every load.
 */

import { ApiError, BatchView, PassageView, ServiceClient } from "./api.js";
import { renderBatch } from "./batch.js";
import { DraftStore } from "./drafts.js";
import { renderPassage } from "./passage.js";

const TOKEN_KEY = "closeread:token";

function baseAddress(): string {
  const meta = document.querySelector<HTMLMetaElement>(
    'meta[name="closeread-service"]',
  );
  return meta?.content || window.location.origin;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function showError(app: HTMLElement, err: unknown): void {
  const box = el("div", "app-error");
  box.textContent = err instanceof Error ? err.message : String(err);
  app.prepend(box);
}

function tokenForm(app: HTMLElement, onToken: (token: string) => void): void {
  app.innerHTML = "";
  const form = el("form", "token-form");
  const label = el("label", undefined, "Annotator token ");
  const input = el("input");
  input.type = "password";
  input.name = "token";
  label.appendChild(input);
  form.appendChild(label);
  const go = el("button", undefined, "Start");
  go.type = "submit";
  form.appendChild(go);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const token = input.value.trim();
    if (token) onToken(token);
  });
  app.appendChild(form);
}

async function batchList(app: HTMLElement, client: ServiceClient, drafts: DraftStore) {
  app.innerHTML = "";
  const heading = el("h1", undefined, "Your batches");
  app.appendChild(heading);
  const list = el("ul", "batch-list");
  app.appendChild(list);

  const batches = await client.listBatches();
  for (const b of batches) {
    const item = el("li");
    const open = el("button", "open-batch", b.batch_id);
    open.type = "button";
    open.addEventListener("click", () => void batchScreen(app, client, drafts, b));
    item.appendChild(open);
    const pct = Math.round(b.progress * 100);
    item.appendChild(
      el("span", "batch-progress", ` ${pct}%${b.completed ? " — submitted" : ""}`),
    );
    if (b.is_training) item.appendChild(el("span", "training-tag", " (training)"));
    list.appendChild(item);
  }
}

async function batchScreen(
  app: HTMLElement,
  client: ServiceClient,
  drafts: DraftStore,
  batch: BatchView,
) {
  app.innerHTML = "";
  const back = el("button", "back-to-batches", "← batches");
  back.type = "button";
  back.addEventListener("click", () => void batchList(app, client, drafts));
  app.appendChild(back);

  const batchMount = el("div", "batch-mount");
  const passageMount = el("div", "passage-mount");
  app.appendChild(batchMount);
  app.appendChild(passageMount);

  let views: PassageView[] = await Promise.all(
    batch.passage_ids.map((pid) => client.getPassage(pid)),
  );

  const screen = renderBatch(batchMount, batch, views, {
    client,
    onOpenPassage: (pid, exprId) => void openPassage(pid, exprId),
  });

  async function openPassage(pid: string, exprId?: string): Promise<void> {
    const view = views.find((v) => v.passage_id === pid);
    if (!view) return;
    const passage = await renderPassage(passageMount, view, {
      client,
      drafts,
      onCompletionChange: () => {
        void (async () => {
          // refetch so the gate reflects the server's completion state
          const fresh = await client.getPassage(pid);
          views = views.map((v) => (v.passage_id === pid ? fresh : v));
          screen.refresh(views);
        })();
      },
    });
    if (exprId && !passage.blocked) passage.openRating(exprId);
  }

  if (batch.passage_ids.length > 0) await openPassage(batch.passage_ids[0]!);
}

(function boot() {
  if (typeof document === "undefined") return;
  const app = document.getElementById("app");
  if (!app) return;

  const drafts = new DraftStore(window.localStorage);

  const start = (token: string) => {
    window.localStorage.setItem(TOKEN_KEY, token);
    const client = new ServiceClient(baseAddress(), token);
    void drafts.flush(client).catch(() => undefined);
    batchList(app, client, drafts).catch((err) => {
      if (err instanceof ApiError && err.status === 401) {
        window.localStorage.removeItem(TOKEN_KEY);
        tokenForm(app, start);
      }
      showError(app, err);
    });
  };

  const saved = window.localStorage.getItem(TOKEN_KEY);
  if (saved) start(saved);
  else tokenForm(app, start);
})();
