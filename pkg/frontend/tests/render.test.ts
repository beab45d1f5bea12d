// DOM behavior of the passage and batch screens, driven against a fake
// service so every branch (validation, 422 surfacing, offline retry,
// overlap confirm) is reachable deterministically.

import { beforeEach, describe, expect, it } from "vitest";

import {
  ApiError,
  BatchView,
  HighlightPayload,
  PassageView,
  RatingPayload,
  sha256Hex,
} from "../src/api.js";
import { renderBatch } from "../src/batch.js";
import { DraftStore, SubmitApi } from "../src/drafts.js";
import { atomize, overlapsAny } from "../src/segments.js";
import { PassageScreen, renderPassage } from "../src/passage.js";
import { MemoryStorage } from "./helpers.js";

const TEXT =
  "The harbor light swung like a slow pendulum. Gulls wrote their hunger " +
  "across the sky. A rope of fog slid over the breakwater and untied itself.";

interface SpanSpec {
  expr: string;
  phrase: string;
  completed?: boolean;
}

async function makeView(
  passageId: string,
  text: string,
  spans: SpanSpec[],
): Promise<PassageView> {
  return {
    passage_id: passageId,
    text,
    checksum: await sha256Hex(text),
    word_count: text.split(/\s+/).length,
    spans: spans.map((s) => {
      const start = text.indexOf(s.phrase);
      if (start < 0) throw new Error(`phrase not in text: ${s.phrase}`);
      return {
        expr_id: s.expr,
        char_start: start,
        char_end: start + s.phrase.length,
        completed: s.completed ?? false,
      };
    }),
  };
}

const FOUR_SPANS: SpanSpec[] = [
  { expr: "x01", phrase: "The harbor light" },
  { expr: "x02", phrase: "like a slow pendulum" },
  { expr: "x03", phrase: "wrote their hunger across the sky" },
  { expr: "x04", phrase: "untied itself" },
];

interface FakeApi {
  api: SubmitApi;
  ratings: RatingPayload[];
  highlights: HighlightPayload[];
}

function fakeApi(overrides: Partial<SubmitApi> = {}): FakeApi {
  const ratings: RatingPayload[] = [];
  const highlights: HighlightPayload[] = [];
  const api: SubmitApi = {
    submitRating: async (p) => {
      ratings.push(p);
      return ratings.length;
    },
    submitHighlight: async (p) => {
      highlights.push(p);
      return highlights.length;
    },
    ...overrides,
  };
  return { api, ratings, highlights };
}

function mount(): HTMLElement {
  const el = document.createElement("div");
  document.body.appendChild(el);
  return el;
}

function strippedText(root: HTMLElement): string {
  const clone = root.querySelector(".passage-text")!.cloneNode(true) as HTMLElement;
  for (const badge of clone.querySelectorAll(".completed-badge")) badge.remove();
  return clone.textContent ?? "";
}

async function rate(
  screen: PassageScreen,
  root: HTMLElement,
  exprId: string,
  answers: { sensical: boolean; pragmatic: boolean; novel: boolean },
  rationale = "",
): Promise<boolean> {
  screen.openRating(exprId);
  for (const [field, value] of Object.entries(answers)) {
    const input = root.querySelector<HTMLInputElement>(
      `.rating-popup input[name="${field}"][value="${value ? "yes" : "no"}"]`,
    );
    input!.click();
  }
  if (rationale) {
    const box = root.querySelector<HTMLTextAreaElement>(
      '.rating-popup textarea[name="rationale"]',
    )!;
    box.value = rationale;
    box.dispatchEvent(new Event("input", { bubbles: true }));
  }
  return screen.submitRating();
}

describe("atomize", () => {
  it("tiles the text exactly, splitting at every boundary", () => {
    const pre = [
      { expr_id: "a", char_start: 4, char_end: 10 },
      { expr_id: "b", char_start: 20, char_end: 30 },
    ];
    const atoms = atomize(40, pre, [{ start: 8, end: 24 }]);
    expect(atoms[0]).toEqual({ start: 0, end: 4, exprId: null, green: false });
    let cursor = 0;
    for (const a of atoms) {
      expect(a.start).toBe(cursor);
      cursor = a.end;
    }
    expect(cursor).toBe(40);
    // the green range crosses out of "a" and into "b"
    expect(atoms.find((a) => a.start === 8)).toMatchObject({ exprId: "a", green: true });
    expect(atoms.find((a) => a.start === 20)).toMatchObject({ exprId: "b", green: true });
    expect(atoms.find((a) => a.start === 24)).toMatchObject({ exprId: "b", green: false });
  });

  it("overlap test matches half-open span semantics", () => {
    const pre = [{ expr_id: "a", char_start: 4, char_end: 10 }];
    expect(overlapsAny(pre, 0, 4)).toBe(false);
    expect(overlapsAny(pre, 10, 14)).toBe(false);
    expect(overlapsAny(pre, 9, 12)).toBe(true);
  });
});

describe("renderPassage", () => {
  let drafts: DraftStore;

  beforeEach(() => {
    document.body.innerHTML = "";
    drafts = new DraftStore(new MemoryStorage());
  });

  it("renders four spans as four clickable regions in document order", async () => {
    const view = await makeView("p1", TEXT, FOUR_SPANS);
    const m = mount();
    const screen = await renderPassage(m, view, { client: fakeApi().api, drafts });
    expect(screen.blocked).toBe(false);
    const marks = m.querySelectorAll("mark.pre-highlight[data-expr]");
    expect(marks).toHaveLength(4);
    expect(Array.from(marks).map((e) => e.getAttribute("data-expr"))).toEqual([
      "x01",
      "x02",
      "x03",
      "x04",
    ]);
    expect(strippedText(m)).toBe(TEXT);
  });

  it("zero spans → highlight-only mode", async () => {
    const view = await makeView("p2", TEXT, []);
    const m = mount();
    await renderPassage(m, view, { client: fakeApi().api, drafts });
    expect(m.querySelector(".passage-text.highlight-only")).not.toBeNull();
    expect(m.querySelector(".highlight-only-note")).not.toBeNull();
    expect(m.querySelectorAll("mark.pre-highlight")).toHaveLength(0);
    expect(strippedText(m)).toBe(TEXT);
  });

  it("a completed rating shows a badge", async () => {
    const spans = FOUR_SPANS.map((s, i) => ({ ...s, completed: i === 1 }));
    const view = await makeView("p1", TEXT, spans);
    const m = mount();
    await renderPassage(m, view, { client: fakeApi().api, drafts });
    const done = m.querySelector('mark.pre-highlight[data-expr="x02"]')!;
    expect(done.classList.contains("completed")).toBe(true);
    expect(done.querySelector(".completed-badge")).not.toBeNull();
    expect(m.querySelectorAll(".completed-badge")).toHaveLength(1);
  });

  it("checksum mismatch blocks annotation behind an error banner", async () => {
    const view = await makeView("p1", TEXT, FOUR_SPANS);
    view.checksum = "0".repeat(64);
    const m = mount();
    const screen = await renderPassage(m, view, { client: fakeApi().api, drafts });
    expect(screen.blocked).toBe(true);
    expect(m.querySelector(".error-banner")).not.toBeNull();
    expect(m.querySelectorAll("[data-expr]")).toHaveLength(0);
    screen.openRating("x01");
    expect(m.querySelector(".rating-popup")).toBeNull();
  });

  it("asks the three questions with the instrument's wording", async () => {
    const view = await makeView("p1", TEXT, FOUR_SPANS);
    const m = mount();
    const screen = await renderPassage(m, view, { client: fakeApi().api, drafts });
    screen.openRating("x02");
    const legends = Array.from(m.querySelectorAll(".rating-popup legend")).map(
      (l) => l.textContent,
    );
    expect(legends[0]).toBe("Makes sense on its own?");
    expect(legends[1]).toBe("Makes sense contextually? (Flows naturally)");
    expect(legends[2]).toContain("Novel?");
  });

  it("autosaves the draft on every edit", async () => {
    const view = await makeView("p1", TEXT, FOUR_SPANS);
    const m = mount();
    const screen = await renderPassage(m, view, { client: fakeApi().api, drafts });
    screen.openRating("x03");
    m.querySelector<HTMLInputElement>(
      '.rating-popup input[name="sensical"][value="yes"]',
    )!.click();
    expect(drafts.loadDraft("x03").sensical).toBe(true);
    m.querySelector<HTMLInputElement>(
      '.rating-popup input[name="novel"][value="yes"]',
    )!.click();
    const saved = drafts.loadDraft("x03");
    expect(saved.novel).toBe(true);
    expect(saved.sensical).toBe(true);
  });

  it("blocks novel=yes with an empty rationale client-side", async () => {
    const view = await makeView("p1", TEXT, FOUR_SPANS);
    const m = mount();
    const fake = fakeApi();
    const screen = await renderPassage(m, view, { client: fake.api, drafts });
    const ok = await rate(screen, m, "x02", {
      sensical: true,
      pragmatic: true,
      novel: true,
    });
    expect(ok).toBe(false);
    expect(fake.ratings).toHaveLength(0);
    const err = m.querySelector<HTMLElement>('.field-error[data-field="rationale"]');
    expect(err?.hidden).toBe(false);
    // the popup stays open with the draft intact
    expect(m.querySelector('.rating-popup[data-expr="x02"]')).not.toBeNull();
    expect(drafts.loadDraft("x02").novel).toBe(true);
  });

  it("rationale is enabled only when novel=yes, and optional otherwise", async () => {
    const view = await makeView("p1", TEXT, FOUR_SPANS);
    const m = mount();
    const fake = fakeApi();
    const screen = await renderPassage(m, view, { client: fake.api, drafts });
    screen.openRating("x01");
    const rationale = m.querySelector<HTMLTextAreaElement>(
      '.rating-popup textarea[name="rationale"]',
    )!;
    expect(rationale.disabled).toBe(true);
    m.querySelector<HTMLInputElement>(
      '.rating-popup input[name="novel"][value="yes"]',
    )!.click();
    expect(rationale.disabled).toBe(false);
    m.querySelector<HTMLInputElement>(
      '.rating-popup input[name="novel"][value="no"]',
    )!.click();
    expect(rationale.disabled).toBe(true);

    const ok = await rate(screen, m, "x01", {
      sensical: true,
      pragmatic: true,
      novel: false,
    });
    expect(ok).toBe(true);
    expect(fake.ratings).toHaveLength(1);
    expect(fake.ratings[0]).toMatchObject({
      expr_id: "x01",
      sensical: true,
      pragmatic: true,
      novel: false,
      rationale: "",
    });
    const done = m.querySelector('mark.pre-highlight[data-expr="x01"]')!;
    expect(done.classList.contains("completed")).toBe(true);
  });

  it("surfaces a service-side validation error on the offending field", async () => {
    const view = await makeView("p1", TEXT, FOUR_SPANS);
    const m = mount();
    const fake = fakeApi({
      submitRating: async () => {
        throw new ApiError(
          422,
          "validation_error",
          "a novelty judgment requires a rationale",
          "rationale",
        );
      },
    });
    const screen = await renderPassage(m, view, { client: fake.api, drafts });
    const ok = await rate(
      screen,
      m,
      "x02",
      { sensical: true, pragmatic: true, novel: true },
      "vivid", // passes the client check; the fake server still refuses
    );
    expect(ok).toBe(false);
    const err = m.querySelector<HTMLElement>('.field-error[data-field="rationale"]');
    expect(err?.hidden).toBe(false);
    expect(err?.textContent).toContain("rationale");
    expect(drafts.loadDraft("x02").rationale).toBe("vivid");
  });

  it("service offline → draft retained and queued for retry", async () => {
    const view = await makeView("p1", TEXT, FOUR_SPANS);
    const m = mount();
    const offline = fakeApi({
      submitRating: async () => {
        throw new TypeError("fetch failed");
      },
    });
    const screen = await renderPassage(m, view, { client: offline.api, drafts });
    const ok = await rate(screen, m, "x04", {
      sensical: true,
      pragmatic: false,
      novel: false,
    });
    expect(ok).toBe(false);
    expect(m.querySelector<HTMLElement>(".offline-note")?.hidden).toBe(false);
    expect(drafts.loadDraft("x04").pragmatic).toBe(false);
    expect(drafts.pending()).toHaveLength(1);

    const back = fakeApi();
    const flushed = await drafts.flush(back.api);
    expect(flushed.sent).toBe(1);
    expect(back.ratings[0]).toMatchObject({ expr_id: "x04", pragmatic: false });
    expect(drafts.pending()).toHaveLength(0);
  });

  it("highlight flow: rationale modal, then a green highlight", async () => {
    const view = await makeView("p2", TEXT, []);
    const m = mount();
    const fake = fakeApi();
    const screen = await renderPassage(m, view, {
      client: fake.api,
      drafts,
      now: () => "2026-03-02T08:00:00",
    });
    const start = TEXT.indexOf("A rope of fog");
    screen.beginHighlight(start, start + "A rope of fog".length);
    expect(m.querySelector(".highlight-modal")).not.toBeNull();
    expect(m.querySelector(".overlap-confirm")).toBeNull();

    let ok = await screen.submitHighlight();
    expect(ok).toBe(false); // empty rationale is blocked
    expect(
      m.querySelector<HTMLElement>(
        '.highlight-modal .field-error[data-field="rationale"]',
      )?.hidden,
    ).toBe(false);
    expect(fake.highlights).toHaveLength(0);

    const box = m.querySelector<HTMLTextAreaElement>(
      '.highlight-modal textarea[name="hl-rationale"]',
    )!;
    box.value = "fog as a knot coming undone";
    ok = await screen.submitHighlight();
    expect(ok).toBe(true);
    expect(fake.highlights[0]).toEqual({
      passage_id: "p2",
      char_start: start,
      char_end: start + "A rope of fog".length,
      rationale: "fog as a knot coming undone",
      timestamp: "2026-03-02T08:00:00",
    });
    expect(m.querySelector(".highlight-modal")).toBeNull();
    expect(m.querySelectorAll("mark.annotator-highlight").length).toBeGreaterThan(0);
    expect(strippedText(m)).toBe(TEXT);
  });

  it("selection over a pre-highlight asks for confirmation first", async () => {
    const view = await makeView("p1", TEXT, FOUR_SPANS);
    const m = mount();
    const fake = fakeApi();
    const screen = await renderPassage(m, view, { client: fake.api, drafts });
    const start = TEXT.indexOf("swung like a slow");
    screen.beginHighlight(start, start + "swung like a slow".length);
    expect(m.querySelector(".overlap-confirm")).not.toBeNull();

    screen.confirmOverlap(false);
    expect(m.querySelector(".highlight-modal")).toBeNull();
    expect(fake.highlights).toHaveLength(0);

    screen.beginHighlight(start, start + "swung like a slow".length);
    screen.confirmOverlap(true);
    expect(m.querySelector(".overlap-confirm")).toBeNull();
    const box = m.querySelector<HTMLTextAreaElement>(
      '.highlight-modal textarea[name="hl-rationale"]',
    )!;
    box.value = "motion borrowed from clockwork";
    expect(await screen.submitHighlight()).toBe(true);
    expect(fake.highlights).toHaveLength(1);
  });

  it("green highlights persist across a reload", async () => {
    const storage = new MemoryStorage();
    const before = new DraftStore(storage);
    const view = await makeView("p2", TEXT, []);
    const fake = fakeApi();
    let m = mount();
    const screen = await renderPassage(m, view, { client: fake.api, drafts: before });
    screen.beginHighlight(0, 16);
    m.querySelector<HTMLTextAreaElement>(
      '.highlight-modal textarea[name="hl-rationale"]',
    )!.value = "opening image";
    await screen.submitHighlight();

    // simulate a refresh: fresh DOM, fresh DraftStore over the same storage
    m = mount();
    await renderPassage(m, view, { client: fake.api, drafts: new DraftStore(storage) });
    const greens = m.querySelectorAll("mark.annotator-highlight");
    expect(greens).toHaveLength(1);
    expect(greens[0]!.textContent).toBe(TEXT.slice(0, 16));
  });
});

describe("renderBatch", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  function batchOf(views: PassageView[], isTraining = false): BatchView {
    const total = views.reduce((n, v) => n + v.spans.length, 0);
    const rated = views.reduce(
      (n, v) => n + v.spans.filter((s) => s.completed).length,
      0,
    );
    return {
      batch_id: "b-main",
      passage_ids: views.map((v) => v.passage_id),
      is_training: isTraining,
      n_expressions: total,
      n_rated: rated,
      progress: total ? rated / total : 1,
      completed: false,
    };
  }

  it("one unrated expression keeps submit disabled with a jump-link", async () => {
    const views = [
      await makeView("p1", TEXT, FOUR_SPANS.map((s, i) => ({ ...s, completed: i !== 2 }))),
      await makeView("p2", TEXT, []),
    ];
    const m = mount();
    const opened: Array<[string, string | undefined]> = [];
    renderBatch(m, batchOf(views), views, {
      client: { completeBatch: async () => ({ accepted: true, is_training: false, missing: [] }) },
      onOpenPassage: (pid, expr) => opened.push([pid, expr]),
    });
    const btn = m.querySelector<HTMLButtonElement>(".batch-submit")!;
    expect(btn.disabled).toBe(true);
    const link = m.querySelector<HTMLAnchorElement>(".jump-link")!;
    expect(link.getAttribute("data-expr")).toBe("x03");
    link.click();
    expect(opened).toEqual([["p1", "x03"]]);
  });

  it("all rated → submit enabled, and acceptance is reported", async () => {
    const views = [
      await makeView("p1", TEXT, FOUR_SPANS.map((s) => ({ ...s, completed: true }))),
    ];
    const m = mount();
    const screen = renderBatch(m, batchOf(views), views, {
      client: {
        completeBatch: async () => ({ accepted: true, is_training: false, missing: [] }),
      },
    });
    const btn = m.querySelector<HTMLButtonElement>(".batch-submit")!;
    expect(btn.disabled).toBe(false);
    expect(m.querySelector(".jump-link")).toBeNull();
    const result = await screen.submit();
    expect(result?.accepted).toBe(true);
    expect(m.querySelector(".batch-done")).not.toBeNull();
  });

  it("a refused completion lists what is missing", async () => {
    const views = [
      await makeView("p1", TEXT, FOUR_SPANS.map((s) => ({ ...s, completed: true }))),
    ];
    const m = mount();
    const screen = renderBatch(m, batchOf(views), views, {
      client: {
        completeBatch: async () => ({
          accepted: false,
          is_training: false,
          missing: [{ annotator_id: "writer1", expr_id: "x09" }],
        }),
      },
    });
    const result = await screen.submit();
    expect(result?.accepted).toBe(false);
    const items = m.querySelectorAll(".missing-list li");
    expect(items).toHaveLength(1);
    expect(items[0]!.getAttribute("data-expr")).toBe("x09");
  });

  it("training batches show a banner and may submit early", async () => {
    const views = [await makeView("p3", TEXT, [{ expr: "x04", phrase: "untied itself" }])];
    const m = mount();
    renderBatch(m, batchOf(views, true), views, {
      client: {
        completeBatch: async () => ({ accepted: true, is_training: true, missing: [] }),
      },
    });
    expect(m.querySelector(".training-banner")).not.toBeNull();
    expect(m.querySelector<HTMLButtonElement>(".batch-submit")!.disabled).toBe(false);
  });

  it("refresh re-evaluates the gate as ratings land", async () => {
    const unrated = [
      await makeView("p1", TEXT, FOUR_SPANS.map((s) => ({ ...s, completed: false }))),
    ];
    const m = mount();
    const screen = renderBatch(m, batchOf(unrated), unrated, {
      client: {
        completeBatch: async () => ({ accepted: true, is_training: false, missing: [] }),
      },
    });
    expect(m.querySelector<HTMLButtonElement>(".batch-submit")!.disabled).toBe(true);
    const rated = [
      await makeView("p1", TEXT, FOUR_SPANS.map((s) => ({ ...s, completed: true }))),
    ];
    screen.refresh(rated);
    expect(m.querySelector<HTMLButtonElement>(".batch-submit")!.disabled).toBe(false);
    expect(m.querySelector(".passage-progress")!.textContent).toContain("4 / 4");
  });
});
