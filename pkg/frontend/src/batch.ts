/*
 * Batch screen: per-passage progress, training-mode banner, and a submit
 * gate that stays disabled — with a jump-link to the first unrated
 * expression — until every pre-highlighted expression in the batch has a
 * rating.  Training batches may be completed early; the service applies
 * the same policy.
 */

import { BatchView, CompleteResult, PassageView, ServiceClient } from "./api.js";

export interface BatchDeps {
  client: Pick<ServiceClient, "completeBatch">;
  onOpenPassage?: (passageId: string, exprId?: string) => void;
}

export interface BatchScreen {
  root: HTMLElement;
  refresh(views: PassageView[]): void;
  submit(): Promise<CompleteResult | null>;
}

interface Unrated {
  passageId: string;
  exprId: string;
}

function firstUnrated(batch: BatchView, views: PassageView[]): Unrated | null {
  for (const pid of batch.passage_ids) {
    const view = views.find((v) => v.passage_id === pid);
    if (!view) continue;
    for (const span of view.spans) {
      if (!span.completed) return { passageId: pid, exprId: span.expr_id };
    }
  }
  return null;
}

export function renderBatch(
  mount: HTMLElement,
  batch: BatchView,
  views: PassageView[],
  deps: BatchDeps,
): BatchScreen {
  const doc = mount.ownerDocument;
  mount.innerHTML = "";

  const root = doc.createElement("section");
  root.className = "batch";
  root.setAttribute("data-batch", batch.batch_id);
  mount.appendChild(root);

  if (batch.is_training) {
    const banner = doc.createElement("div");
    banner.className = "training-banner";
    banner.textContent =
      "Training batch: your ratings will be discussed with you before the " +
      "main study. You may submit before rating everything.";
    root.appendChild(banner);
  }

  const list = doc.createElement("ul");
  list.className = "passage-list";
  root.appendChild(list);

  const gate = doc.createElement("div");
  gate.className = "submit-gate";
  root.appendChild(gate);

  const submitBtn = doc.createElement("button");
  submitBtn.type = "button";
  submitBtn.className = "batch-submit";
  submitBtn.textContent = "Submit batch";
  submitBtn.addEventListener("click", () => void submit());

  const gateNote = doc.createElement("div");
  gateNote.className = "gate-note";

  const resultBox = doc.createElement("div");
  resultBox.className = "submit-result";

  gate.appendChild(submitBtn);
  gate.appendChild(gateNote);
  gate.appendChild(resultBox);

  let currentViews = views;

  function refresh(next: PassageView[]): void {
    currentViews = next;
    list.innerHTML = "";
    for (const pid of batch.passage_ids) {
      const view = currentViews.find((v) => v.passage_id === pid);
      const item = doc.createElement("li");
      item.setAttribute("data-passage", pid);
      const open = doc.createElement("button");
      open.type = "button";
      open.className = "open-passage";
      open.textContent = pid;
      open.addEventListener("click", () => deps.onOpenPassage?.(pid));
      item.appendChild(open);
      const progress = doc.createElement("span");
      progress.className = "passage-progress";
      if (view) {
        const done = view.spans.filter((s) => s.completed).length;
        progress.textContent = ` ${done} / ${view.spans.length} rated`;
      } else {
        progress.textContent = " (not loaded)";
      }
      item.appendChild(progress);
      list.appendChild(item);
    }

    const gap = firstUnrated(batch, currentViews);
    gateNote.innerHTML = "";
    if (gap && !batch.is_training) {
      submitBtn.disabled = true;
      const link = doc.createElement("a");
      link.className = "jump-link";
      link.href = `#${gap.exprId}`;
      link.setAttribute("data-passage", gap.passageId);
      link.setAttribute("data-expr", gap.exprId);
      link.textContent = "Jump to the first unrated expression";
      link.addEventListener("click", (ev) => {
        ev.preventDefault();
        deps.onOpenPassage?.(gap.passageId, gap.exprId);
      });
      gateNote.appendChild(link);
    } else {
      submitBtn.disabled = false;
    }
  }

  async function submit(): Promise<CompleteResult | null> {
    if (submitBtn.disabled) return null;
    resultBox.innerHTML = "";
    let result: CompleteResult;
    try {
      result = await deps.client.completeBatch(batch.batch_id);
    } catch (err) {
      const msg = doc.createElement("div");
      msg.className = "batch-error";
      msg.textContent = err instanceof Error ? err.message : String(err);
      resultBox.appendChild(msg);
      return null;
    }
    if (result.accepted) {
      const done = doc.createElement("div");
      done.className = "batch-done";
      done.textContent = batch.is_training
        ? "Training batch submitted."
        : "Batch submitted. Thank you!";
      resultBox.appendChild(done);
    } else {
      // the service re-checked and found gaps (e.g. ratings from another
      // device were rolled back) — show exactly what is missing
      const missing = doc.createElement("ul");
      missing.className = "missing-list";
      for (const m of result.missing) {
        const item = doc.createElement("li");
        item.setAttribute("data-expr", m.expr_id);
        item.textContent = m.expr_id;
        missing.appendChild(item);
      }
      resultBox.appendChild(missing);
    }
    return result;
  }

  refresh(views);
  return { root, refresh, submit };
}
