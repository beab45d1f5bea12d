/*
 * Passage screen: running text with three visually distinct span styles
 * (pre-highlighted, completed, annotator-added highlights in green), the
 * rating popup, and the new-highlight flow.
 *
 * The screen object returned from renderPassage exposes the same actions
 * the DOM handlers call — openRating / submitRating / beginHighlight /
 * confirmOverlap / submitHighlight — so a scripted session can drive the
 * interface deterministically and await each submission.
 */

import {
  ApiError,
  PassageView,
  RatingPayload,
  sha256Hex,
} from "./api.js";
import {
  DraftStore,
  RatingDraft,
  SubmitApi,
  emptyDraft,
  validateDraft,
} from "./drafts.js";
import { atomize, overlapsAny } from "./segments.js";

export interface PassageDeps {
  client: SubmitApi;
  drafts: DraftStore;
  /** Timestamp factory; injectable so tests get stable records. */
  now?: () => string;
  onCompletionChange?: (exprId: string) => void;
}

export interface PassageScreen {
  root: HTMLElement;
  /** True when the integrity check failed and annotation is disabled. */
  blocked: boolean;
  completed(): Set<string>;
  openRating(exprId: string): void;
  closeRating(): void;
  submitRating(): Promise<boolean>;
  beginHighlight(charStart: number, charEnd: number): void;
  confirmOverlap(proceed: boolean): void;
  submitHighlight(): Promise<boolean>;
}

const QUESTION_WORDING: Array<[keyof RatingDraft & string, string]> = [
  ["sensical", "Makes sense on its own?"],
  ["pragmatic", "Makes sense contextually? (Flows naturally)"],
  ["novel", "Novel? (An expression you have not seen before)"],
];

type HighlightStage = { start: number; end: number; step: "confirm" | "rationale" };

export async function renderPassage(
  mount: HTMLElement,
  view: PassageView,
  deps: PassageDeps,
): Promise<PassageScreen> {
  const doc = mount.ownerDocument;
  const now = deps.now ?? (() => new Date().toISOString());
  mount.innerHTML = "";

  const root = doc.createElement("section");
  root.className = "passage";
  root.setAttribute("data-passage", view.passage_id);
  mount.appendChild(root);

  const noop: PassageScreen = {
    root,
    blocked: true,
    completed: () => new Set(),
    openRating: () => undefined,
    closeRating: () => undefined,
    submitRating: async () => false,
    beginHighlight: () => undefined,
    confirmOverlap: () => undefined,
    submitHighlight: async () => false,
  };

  // Span offsets were computed against one exact text; refuse to annotate
  // anything else.
  if ((await sha256Hex(view.text)) !== view.checksum) {
    const banner = doc.createElement("div");
    banner.className = "error-banner";
    banner.setAttribute("role", "alert");
    banner.textContent =
      "Integrity check failed: this passage's text does not match the copy " +
      "its expression offsets were computed against. Reload before annotating.";
    root.appendChild(banner);
    return noop;
  }

  const completed = new Set(
    view.spans.filter((s) => s.completed).map((s) => s.expr_id),
  );

  const textEl = doc.createElement("div");
  textEl.className = "passage-text";
  root.appendChild(textEl);

  if (view.spans.length === 0) {
    textEl.classList.add("highlight-only");
    const note = doc.createElement("p");
    note.className = "highlight-only-note";
    note.textContent =
      "No expressions are pre-highlighted here. Select any creative " +
      "expression in the text to highlight it.";
    root.appendChild(note);
  }

  const offlineNote = doc.createElement("div");
  offlineNote.className = "offline-note";
  offlineNote.hidden = true;
  offlineNote.textContent =
    "The service is unreachable. Your work is saved locally and will be " +
    "retried automatically.";
  root.appendChild(offlineNote);

  const popupMount = doc.createElement("div");
  popupMount.className = "popup-mount";
  root.appendChild(popupMount);

  const modalMount = doc.createElement("div");
  modalMount.className = "modal-mount";
  root.appendChild(modalMount);

  // ---- running text -------------------------------------------------------

  function renderText(): void {
    textEl.innerHTML = "";
    const greens = deps.drafts
      .highlights(view.passage_id)
      .map((h) => ({ start: h.charStart, end: h.charEnd }));
    const atoms = atomize(view.text.length, view.spans, greens);
    const lastAtomOf = new Map<string, HTMLElement>();

    for (const atom of atoms) {
      const isPre = atom.exprId !== null;
      const el = doc.createElement(isPre || atom.green ? "mark" : "span");
      el.textContent = view.text.slice(atom.start, atom.end);
      el.setAttribute("data-start", String(atom.start));
      el.setAttribute("data-end", String(atom.end));
      if (isPre) {
        const exprId = atom.exprId!;
        el.classList.add("pre-highlight");
        el.setAttribute("data-expr", exprId);
        if (completed.has(exprId)) el.classList.add("completed");
        el.addEventListener("click", () => openRating(exprId));
        lastAtomOf.set(exprId, el);
      } else {
        el.classList.add("plain");
      }
      if (atom.green) el.classList.add("annotator-highlight");
      textEl.appendChild(el);
    }

    for (const [exprId, el] of lastAtomOf) {
      if (!completed.has(exprId)) continue;
      const badge = doc.createElement("sup");
      badge.className = "completed-badge";
      badge.setAttribute("title", "rated");
      badge.textContent = "✓";
      el.appendChild(badge);
    }
  }

  renderText();

  // Browser path for new highlights: resolve the live selection against the
  // data-start offsets; scripted sessions call beginHighlight directly.
  textEl.addEventListener("mouseup", () => {
    const range = selectionRange();
    if (range) beginHighlight(range.start, range.end);
  });

  function selectionRange(): { start: number; end: number } | null {
    const sel = doc.defaultView?.getSelection?.();
    if (!sel || sel.rangeCount === 0 || sel.isCollapsed) return null;
    const r = sel.getRangeAt(0);
    const start = offsetAt(r.startContainer, r.startOffset);
    const end = offsetAt(r.endContainer, r.endOffset);
    if (start === null || end === null || end <= start) return null;
    return { start, end };
  }

  function offsetAt(node: Node, offset: number): number | null {
    let el: HTMLElement | null =
      node.nodeType === 3 ? (node.parentElement as HTMLElement | null)
      : (node as HTMLElement);
    while (el && el !== textEl && !el.hasAttribute("data-start")) {
      el = el.parentElement;
    }
    if (!el || el === textEl) return null;
    return Number(el.getAttribute("data-start")) + offset;
  }

  // ---- rating popup --------------------------------------------------------

  let popupExpr: string | null = null;

  function openRating(exprId: string): void {
    popupExpr = exprId;
    const span = view.spans.find((s) => s.expr_id === exprId);
    const draft = deps.drafts.loadDraft(exprId);
    popupMount.innerHTML = "";

    const popup = doc.createElement("div");
    popup.className = "rating-popup";
    popup.setAttribute("data-expr", exprId);
    popupMount.appendChild(popup);

    if (span) {
      const quote = doc.createElement("blockquote");
      quote.className = "popup-quote";
      quote.textContent = view.text.slice(span.char_start, span.char_end);
      popup.appendChild(quote);
    }

    for (const [field, wording] of QUESTION_WORDING) {
      const fs = doc.createElement("fieldset");
      fs.setAttribute("data-field", field);
      const legend = doc.createElement("legend");
      legend.textContent = wording;
      fs.appendChild(legend);
      for (const val of ["yes", "no"] as const) {
        const label = doc.createElement("label");
        const input = doc.createElement("input");
        input.type = "radio";
        input.name = field;
        input.value = val;
        const current = draft[field] as boolean | null;
        input.checked = current === (val === "yes");
        input.addEventListener("click", onEdit);
        input.addEventListener("change", onEdit);
        label.appendChild(input);
        label.appendChild(doc.createTextNode(" " + val));
        fs.appendChild(label);
      }
      fs.appendChild(fieldError(field));
      popup.appendChild(fs);
    }

    const rationaleLabel = doc.createElement("label");
    rationaleLabel.setAttribute("data-field", "rationale");
    rationaleLabel.appendChild(doc.createTextNode("Why is it creative?"));
    const rationale = doc.createElement("textarea");
    rationale.name = "rationale";
    rationale.value = draft.rationale;
    rationale.addEventListener("input", onEdit);
    rationaleLabel.appendChild(rationale);
    rationaleLabel.appendChild(fieldError("rationale"));
    popup.appendChild(rationaleLabel);

    const commentLabel = doc.createElement("label");
    commentLabel.setAttribute("data-field", "comment");
    commentLabel.appendChild(doc.createTextNode("Comment (optional)"));
    const comment = doc.createElement("textarea");
    comment.name = "comment";
    comment.value = draft.comment;
    comment.addEventListener("input", onEdit);
    commentLabel.appendChild(comment);
    popup.appendChild(commentLabel);

    const generalError = doc.createElement("div");
    generalError.className = "popup-error";
    generalError.hidden = true;
    popup.appendChild(generalError);

    const submit = doc.createElement("button");
    submit.type = "button";
    submit.className = "popup-submit";
    submit.textContent = "Submit rating";
    submit.addEventListener("click", () => void submitRating());
    popup.appendChild(submit);

    const cancel = doc.createElement("button");
    cancel.type = "button";
    cancel.className = "popup-cancel";
    cancel.textContent = "Close";
    cancel.addEventListener("click", closeRating);
    popup.appendChild(cancel);

    syncRationaleState(draft);
  }

  function fieldError(field: string): HTMLElement {
    const el = doc.createElement("div");
    el.className = "field-error";
    el.setAttribute("data-field", field);
    el.hidden = true;
    return el;
  }

  function readPopupDraft(): RatingDraft {
    const d = emptyDraft(popupExpr!);
    for (const [field] of QUESTION_WORDING) {
      const checked = popupMount.querySelector<HTMLInputElement>(
        `input[name="${field}"]:checked`,
      );
      if (checked) {
        (d as unknown as Record<string, boolean>)[field] = checked.value === "yes";
      }
    }
    d.rationale =
      popupMount.querySelector<HTMLTextAreaElement>('textarea[name="rationale"]')
        ?.value ?? "";
    d.comment =
      popupMount.querySelector<HTMLTextAreaElement>('textarea[name="comment"]')
        ?.value ?? "";
    return d;
  }

  // Autosave on every edit, and keep the rationale field's enabled state in
  // step with the novelty answer.
  function onEdit(): void {
    if (popupExpr === null) return;
    const d = readPopupDraft();
    deps.drafts.saveDraft(d);
    syncRationaleState(d);
    for (const el of popupMount.querySelectorAll<HTMLElement>(".field-error")) {
      el.hidden = true;
    }
  }

  function syncRationaleState(d: RatingDraft): void {
    const rationale = popupMount.querySelector<HTMLTextAreaElement>(
      'textarea[name="rationale"]',
    );
    if (rationale) rationale.disabled = d.novel !== true;
  }

  function showFieldError(field: string | null, message: string): void {
    const target = field
      ? popupMount.querySelector<HTMLElement>(`.field-error[data-field="${field}"]`)
      : null;
    if (target) {
      target.textContent = message;
      target.hidden = false;
      return;
    }
    const general = popupMount.querySelector<HTMLElement>(".popup-error");
    if (general) {
      general.textContent = message;
      general.hidden = false;
    }
  }

  function closeRating(): void {
    popupExpr = null;
    popupMount.innerHTML = "";
  }

  async function submitRating(): Promise<boolean> {
    if (popupExpr === null) return false;
    const draft = readPopupDraft();
    deps.drafts.saveDraft(draft);
    const bad = validateDraft(draft);
    if (bad) {
      showFieldError(bad.field, bad.message);
      return false;
    }
    const payload: RatingPayload = {
      expr_id: draft.exprId,
      sensical: draft.sensical!,
      pragmatic: draft.pragmatic!,
      novel: draft.novel!,
      rationale: draft.rationale,
      comment: draft.comment,
      timestamp: now(),
    };
    try {
      await deps.client.submitRating(payload);
    } catch (err) {
      if (err instanceof ApiError) {
        showFieldError(err.field, err.message);
        return false;
      }
      // unreachable service: the draft stays put and the payload is queued
      deps.drafts.enqueue({ kind: "rating", payload });
      offlineNote.hidden = false;
      return false;
    }
    deps.drafts.clearDraft(draft.exprId);
    completed.add(draft.exprId);
    closeRating();
    renderText();
    deps.onCompletionChange?.(draft.exprId);
    return true;
  }

  // ---- new-highlight flow --------------------------------------------------

  let highlightDraft: HighlightStage | null = null;

  function beginHighlight(charStart: number, charEnd: number): void {
    const start = Math.max(0, Math.trunc(charStart));
    const end = Math.min(view.text.length, Math.trunc(charEnd));
    if (end <= start) return;
    highlightDraft = {
      start,
      end,
      step: overlapsAny(view.spans, start, end) ? "confirm" : "rationale",
    };
    renderModal();
  }

  function renderModal(): void {
    modalMount.innerHTML = "";
    if (!highlightDraft) return;

    const modal = doc.createElement("div");
    modal.className = "highlight-modal";
    modalMount.appendChild(modal);

    const quote = doc.createElement("blockquote");
    quote.className = "modal-quote";
    quote.textContent = view.text.slice(highlightDraft.start, highlightDraft.end);
    modal.appendChild(quote);

    if (highlightDraft.step === "confirm") {
      const confirm = doc.createElement("div");
      confirm.className = "overlap-confirm";
      const msg = doc.createElement("p");
      msg.textContent =
        "This selection overlaps a pre-highlighted expression. Highlight it " +
        "as a separate creative expression anyway?";
      confirm.appendChild(msg);
      const proceed = doc.createElement("button");
      proceed.type = "button";
      proceed.className = "confirm-proceed";
      proceed.textContent = "Highlight anyway";
      proceed.addEventListener("click", () => confirmOverlap(true));
      confirm.appendChild(proceed);
      const cancel = doc.createElement("button");
      cancel.type = "button";
      cancel.className = "confirm-cancel";
      cancel.textContent = "Cancel";
      cancel.addEventListener("click", () => confirmOverlap(false));
      confirm.appendChild(cancel);
      modal.appendChild(confirm);
      return;
    }

    const label = doc.createElement("label");
    label.setAttribute("data-field", "rationale");
    label.appendChild(doc.createTextNode("Why is it creative?"));
    const rationale = doc.createElement("textarea");
    rationale.name = "hl-rationale";
    label.appendChild(rationale);
    label.appendChild(fieldError("rationale"));
    modal.appendChild(label);

    const submit = doc.createElement("button");
    submit.type = "button";
    submit.className = "highlight-submit";
    submit.textContent = "Save highlight";
    submit.addEventListener("click", () => void submitHighlight());
    modal.appendChild(submit);

    const cancel = doc.createElement("button");
    cancel.type = "button";
    cancel.className = "highlight-cancel";
    cancel.textContent = "Cancel";
    cancel.addEventListener("click", () => {
      highlightDraft = null;
      renderModal();
    });
    modal.appendChild(cancel);
  }

  function confirmOverlap(proceed: boolean): void {
    if (!highlightDraft || highlightDraft.step !== "confirm") return;
    highlightDraft = proceed ? { ...highlightDraft, step: "rationale" } : null;
    renderModal();
  }

  async function submitHighlight(): Promise<boolean> {
    if (!highlightDraft || highlightDraft.step !== "rationale") return false;
    const rationaleEl = modalMount.querySelector<HTMLTextAreaElement>(
      'textarea[name="hl-rationale"]',
    );
    const rationale = rationaleEl?.value ?? "";
    if (rationale.trim() === "") {
      const err = modalMount.querySelector<HTMLElement>(
        '.field-error[data-field="rationale"]',
      );
      if (err) {
        err.textContent = "A rationale is required for new highlights.";
        err.hidden = false;
      }
      return false;
    }
    const { start, end } = highlightDraft;
    const payload = {
      passage_id: view.passage_id,
      char_start: start,
      char_end: end,
      rationale,
      timestamp: now(),
    };
    let recordId: number | null = null;
    try {
      recordId = await deps.client.submitHighlight(payload);
    } catch (err) {
      if (err instanceof ApiError) {
        const box = modalMount.querySelector<HTMLElement>(
          '.field-error[data-field="rationale"]',
        );
        if (box) {
          box.textContent = err.message;
          box.hidden = false;
        }
        return false;
      }
      deps.drafts.enqueue({ kind: "highlight", payload });
      offlineNote.hidden = false;
    }
    deps.drafts.addHighlight({
      passageId: view.passage_id,
      charStart: start,
      charEnd: end,
      rationale,
      recordId,
    });
    highlightDraft = null;
    renderModal();
    renderText();
    return true;
  }

  return {
    root,
    blocked: false,
    completed: () => new Set(completed),
    openRating,
    closeRating,
    submitRating,
    beginHighlight,
    confirmOverlap,
    submitHighlight,
  };
}
