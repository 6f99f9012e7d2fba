import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { AppViewModel } from "../src/app";
import { CarouselViewModel } from "../src/carousel";
import { SessionStore } from "../src/state";
import { startService, type TestService } from "./helpers";

let service: TestService;

beforeAll(async () => {
  service = await startService();
});

afterAll(async () => {
  await service.stop();
});

function freshApp(): AppViewModel {
  return new AppViewModel(service.api, new SessionStore(service.datasetId));
}

describe("order and filters", () => {
  it("flip reverses the card sequence up to ties", async () => {
    const app = freshApp();
    const linear = app.carousel("linear_relationship");
    await linear.load();
    const before = linear.cards.map((g) => ({ id: g.id, strength: g.strength }));
    expect(linear.activeOrder).toBe("descending");

    await linear.flipOrder();
    expect(linear.activeOrder).toBe("ascending");
    const after = linear.cards.map((g) => ({ id: g.id, strength: g.strength }));

    expect(after.map((c) => c.strength)).toEqual(
      [...before.map((c) => c.strength)].reverse(),
    );
    const reversed = [...before].reverse();
    after.forEach((card, i) => {
      const tied =
        reversed.filter((r) => Math.abs(r.strength - card.strength) < 1e-12).length > 1;
      if (!tied) expect(card.id).toBe(reversed[i].id);
    });

    await linear.flipOrder();
    expect(linear.activeOrder).toBe("descending");
    expect(linear.cards.map((g) => g.id)).toEqual(before.map((c) => c.id));
  });

  it("threshold slider narrows results to the strength window", async () => {
    const app = freshApp();
    const linear = app.carousel("linear_relationship");
    await linear.load();
    const total = linear.cards.length;

    await linear.setThreshold(0.5, null);
    expect(linear.cards.length).toBeGreaterThan(0);
    expect(linear.cards.length).toBeLessThan(total);
    for (const card of linear.cards) expect(card.strength).toBeGreaterThanOrEqual(0.5);

    await linear.setThreshold(0.5, 0.9);
    for (const card of linear.cards) {
      expect(card.strength).toBeGreaterThanOrEqual(0.5);
      expect(card.strength).toBeLessThanOrEqual(0.9);
    }
    expect(linear.cards.some((c) => c.strength > 0.99)).toBe(false);

    await linear.setThreshold(null, null);
    expect(linear.cards.length).toBe(total);
  });

  it("switching to the significance metric re-queries with alpha", async () => {
    const app = freshApp();
    const linear = app.carousel("linear_relationship");
    await linear.load();

    await linear.setMetric("significance_adjusted", 0.01);
    expect(linear.activeMetric).toBe("significance_adjusted");
    const top = linear.cards[0];
    expect(top.columns.map((c) => c.name).sort()).toEqual(["base", "copy"]);
    expect(top.strength).toBeCloseTo(1.0, 12);
    // Weak pairs fail the test at alpha=0.01 and drop to zero strength.
    expect(linear.cards.at(-1)?.strength).toBe(0);

    const rejected = linear.cards.filter((c) => c.strength === 0);
    expect(rejected.length).toBeGreaterThan(0);
  });

  it("rejects unknown setting keys before they reach the wire", () => {
    const session = new SessionStore(service.datasetId);
    expect(() => session.updateSettings("skew", { bogus: 1 } as never)).toThrow(
      /unknown setting key/,
    );
  });

  it("resolves concurrent loads last-write-wins", async () => {
    const gate: { release?: () => void } = {};
    const delayedOnce: typeof fetch = (() => {
      let delayed = false;
      return async (input: RequestInfo | URL, init?: RequestInit) => {
        const url = String(input);
        if (!delayed && url.includes("min=0.5")) {
          delayed = true;
          await new Promise<void>((resolve) => {
            gate.release = resolve;
          });
        }
        return fetch(input, init);
      };
    })();
    const api = new ApiClient(service.baseUrl, delayedOnce);
    const session = new SessionStore(service.datasetId);
    const carousel = new CarouselViewModel("linear_relationship", api, session);

    session.updateSettings("linear_relationship", { min: 0.5 });
    const first = carousel.load(); // stalls inside the fake fetch
    session.updateSettings("linear_relationship", { min: null });
    const second = carousel.load();
    await second;
    const winner = carousel.cards.length;
    gate.release?.();
    await first;
    expect(carousel.cards.length).toBe(winner); // stale response discarded
    expect(winner).toBe(10);
  });
});

describe("related guideposts", () => {
  it("focuses a pair and lists its three neighborhoods", async () => {
    const app = freshApp();
    await app.loadAll();
    const top = app.carousel("linear_relationship").cards[0];
    const related = await app.showRelated(top.id, 4);

    expect(app.session.focus).toBe(top.id);
    expect(related.focus_id).toBe(top.id);
    expect(related.focus_columns).toHaveLength(2);
    const [x, y] = related.focus_columns;

    expect(related.n_x.length).toBeGreaterThan(0);
    for (const card of related.n_x) {
      expect(card.columns[0].index).toBe(x);
    }
    for (const card of related.n_y) {
      expect(card.columns[0].index).toBe(y);
    }
    expect(related.n_xy.length).toBeLessThanOrEqual(4);
    const union = new Set([...related.n_x, ...related.n_y].map((c) => c.id));
    for (const card of related.n_xy) expect(union.has(card.id)).toBe(true);
  });

  it("refuses gracefully for an unknown focus", async () => {
    const app = freshApp();
    await expect(app.showRelated("0000000000000000")).rejects.toMatchObject({
      status: 404,
      code: "unknown_guidepost",
    });
  });
});

describe("session persistence", () => {
  it("keeps bookmarks, focus, and settings across a simulated reload", async () => {
    const app = freshApp();
    await app.loadAll();
    const linear = app.carousel("linear_relationship");
    const top = linear.cards[0];

    expect(app.toggleBookmark(top.id)).toBe(true);
    expect(app.toggleBookmark(top.id)).toBe(false); // toggle removes
    expect(app.toggleBookmark(top.id)).toBe(true);
    await app.showRelated(top.id);
    await linear.flipOrder(); // persisted as a descriptor setting
    const sessionId = await app.saveSession();

    // "Reload": brand-new store and view models, restore by session id.
    const reborn = new AppViewModel(service.api, new SessionStore(service.datasetId));
    await reborn.restoreSession(sessionId);

    expect(reborn.session.isBookmarked(top.id)).toBe(true);
    expect(reborn.session.focus).toBe(top.id);
    expect(reborn.carousel("linear_relationship").activeOrder).toBe("ascending");

    const panel = await reborn.bookmarkPanel();
    expect(panel.map((c) => c.id)).toContain(top.id);

    // Round-trip again: the stored document is unchanged by a second save.
    const again = await reborn.saveSession();
    expect(again).toBe(sessionId);
    const doc = await service.api.getSession(sessionId);
    expect(doc.bookmarks.map((b) => b.guidepost_id)).toEqual([top.id]);
    expect(doc.focus).toBe(top.id);
    expect(doc.settings.linear_relationship).toMatchObject({ order: "ascending" });
  });

  it("keeps the original bookmark timestamp when a restore re-adds it", async () => {
    const app = freshApp();
    await app.loadAll();
    const top = app.carousel("linear_relationship").cards[0];
    app.toggleBookmark(top.id);
    const created = app.session.bookmarks[0].created_at;
    const sessionId = await app.saveSession();

    const reborn = new AppViewModel(service.api, new SessionStore(service.datasetId));
    await reborn.restoreSession(sessionId);
    expect(reborn.session.bookmarks[0].created_at).toBeCloseTo(created, 6);
  });

  it("rejects saving a bookmark for a guidepost the dataset does not have", async () => {
    const app = freshApp();
    await app.loadAll();
    app.session.bookmarks.push({ guidepost_id: "ffffffffffffffff", created_at: 1 });
    await expect(app.saveSession()).rejects.toMatchObject({
      status: 400,
      code: "unknown_guidepost",
    });
  });
});

describe("bundle-building fallback", () => {
  it("shows exact results with a progress hint on 409", async () => {
    const building: typeof fetch = async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      if (url.includes("mode=approximate")) {
        return new Response(
          JSON.stringify({
            error: { code: "bundle_building", message: "sketch bundle is building" },
          }),
          { status: 409, headers: { "content-type": "application/json" } },
        );
      }
      return fetch(input, init);
    };
    const api = new ApiClient(service.baseUrl, building);
    const session = new SessionStore(service.datasetId);
    const carousel = new CarouselViewModel("linear_relationship", api, session);
    await carousel.setMode("approximate");

    expect(carousel.error).toBeNull(); // non-blocking
    expect(carousel.notice).toMatch(/building/);
    expect(carousel.activeMode).toBe("exact");
    expect(carousel.cards.length).toBe(10);
  });

  it("uses sketch rankings once the bundle is ready", async () => {
    const app = freshApp();
    const linear = app.carousel("linear_relationship");
    await linear.setMode("approximate");
    expect(linear.error).toBeNull();
    expect(linear.notice).toBeNull();
    expect(linear.activeMode).toBe("approximate");
    expect(linear.cards[0].approximate).toBe(true);
    expect(linear.cards[0].columns.map((c) => c.name).sort()).toEqual(["base", "copy"]);
  });
});
