/*
 * Local annotation state: draft ratings, a memory of the annotator's own
 * submitted highlights, and an offline retry queue.
 *
 * Everything is persisted to Storage on every edit — a batch takes an
 * expert two to three hours, so drafts must survive refreshes, crashes
 * and dropped connections.  The server stays the source of truth for
 * completion; this store only protects work in flight.
 */

import {
  ApiError,
  HighlightPayload,
  RatingPayload,
  ServiceClient,
} from "./api.js";

export interface RatingDraft {
  exprId: string;
  sensical: boolean | null;
  pragmatic: boolean | null;
  novel: boolean | null;
  rationale: string;
  comment: string;
}

export function emptyDraft(exprId: string): RatingDraft {
  return {
    exprId,
    sensical: null,
    pragmatic: null,
    novel: null,
    rationale: "",
    comment: "",
  };
}

export interface FieldError {
  field: string;
  message: string;
}

const QUESTIONS = ["sensical", "pragmatic", "novel"] as const;

/**
 * Client-side mirror of the service rule: a draft is submittable only when
 * all three judgments are answered, and a novel=yes judgment carries a
 * non-blank rationale.
 */
export function validateDraft(d: RatingDraft): FieldError | null {
  for (const q of QUESTIONS) {
    if (d[q] === null) {
      return { field: q, message: "Answer all three questions before submitting." };
    }
  }
  if (d.novel === true && d.rationale.trim() === "") {
    return {
      field: "rationale",
      message: "A rationale is required when you judge the expression novel.",
    };
  }
  return null;
}

// Minimal structural slice of window.localStorage, so tests can swap in a
// plain in-memory map.
export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

/** A highlight the annotator added; recordId is null until the server acks. */
export interface LocalHighlight {
  passageId: string;
  charStart: number;
  charEnd: number;
  rationale: string;
  recordId: number | null;
}

export type Pending =
  | { kind: "rating"; payload: RatingPayload }
  | { kind: "highlight"; payload: HighlightPayload };

export type SubmitApi = Pick<ServiceClient, "submitRating" | "submitHighlight">;

export class DraftStore {
  constructor(
    private readonly storage: StorageLike,
    private readonly prefix: string = "closeread",
  ) {}

  private key(...parts: string[]): string {
    return [this.prefix, ...parts].join(":");
  }

  private read<T>(key: string, fallback: T): T {
    const raw = this.storage.getItem(key);
    if (raw === null) return fallback;
    try {
      return JSON.parse(raw) as T;
    } catch {
      return fallback;
    }
  }

  // -- rating drafts, saved on every edit --------------------------------

  loadDraft(exprId: string): RatingDraft {
    return this.read(this.key("draft", exprId), emptyDraft(exprId));
  }

  saveDraft(d: RatingDraft): void {
    this.storage.setItem(this.key("draft", d.exprId), JSON.stringify(d));
  }

  clearDraft(exprId: string): void {
    this.storage.removeItem(this.key("draft", exprId));
  }

  // -- the annotator's own highlights ------------------------------------

  highlights(passageId: string): LocalHighlight[] {
    return this.read<LocalHighlight[]>(this.key("highlights", passageId), []);
  }

  addHighlight(h: LocalHighlight): void {
    const all = this.highlights(h.passageId);
    all.push(h);
    this.storage.setItem(this.key("highlights", h.passageId), JSON.stringify(all));
  }

  private setHighlightRecordId(
    passageId: string,
    charStart: number,
    charEnd: number,
    recordId: number,
  ): void {
    const all = this.highlights(passageId);
    for (const h of all) {
      if (h.charStart === charStart && h.charEnd === charEnd && h.recordId === null) {
        h.recordId = recordId;
        break;
      }
    }
    this.storage.setItem(this.key("highlights", passageId), JSON.stringify(all));
  }

  // -- offline retry queue -------------------------------------------------

  pending(): Pending[] {
    return this.read<Pending[]>(this.key("pending"), []);
  }

  enqueue(item: Pending): void {
    const queue = this.pending();
    queue.push(item);
    this.storage.setItem(this.key("pending"), JSON.stringify(queue));
  }

  private writePending(queue: Pending[]): void {
    this.storage.setItem(this.key("pending"), JSON.stringify(queue));
  }

  /**
   * Retry queued submissions in order.  Entries the server accepts are
   * dropped (and their drafts cleared); entries it refuses are dropped and
   * returned for the UI to surface; a network failure keeps the remainder
   * queued for the next attempt.
   */
  async flush(client: SubmitApi): Promise<{ sent: number; rejected: Pending[] }> {
    const queue = this.pending();
    const keep: Pending[] = [];
    const rejected: Pending[] = [];
    let sent = 0;
    for (let i = 0; i < queue.length; i++) {
      const item = queue[i]!;
      try {
        if (item.kind === "rating") {
          await client.submitRating(item.payload);
          this.clearDraft(item.payload.expr_id);
        } else {
          const rid = await client.submitHighlight(item.payload);
          this.setHighlightRecordId(
            item.payload.passage_id,
            item.payload.char_start,
            item.payload.char_end,
            rid,
          );
        }
        sent += 1;
      } catch (err) {
        if (err instanceof ApiError) {
          rejected.push(item);
          continue;
        }
        keep.push(...queue.slice(i)); // still offline — try again later
        break;
      }
    }
    this.writePending(keep);
    return { sent, rejected };
  }
}
