// Top-level view model: six carousels in fixed order, the bookmark panel,
// related-guidepost navigation, overview heatmaps, the raw-data table, and
// session save/restore. Everything renders from service responses; the only
// client-side math is presentation scaling (colors, radii, pixel positions).

import { ApiClient } from "./api";
import { CarouselViewModel } from "./carousel";
import { SessionStore } from "./state";
import type {
  BoxplotPayload,
  GuidepostModel,
  NeighborhoodResponse,
  OverviewResponse,
  RowPageResponse,
} from "./types";

// Univariate descriptors first, pairwise last.
export const DESCRIPTOR_ORDER = [
  "dispersion",
  "skew",
  "heavy_tails",
  "outliers",
  "heterogeneous_frequencies",
  "linear_relationship",
] as const;

export interface HeatmapCell {
  row: number;
  col: number;
  strength: number | null;
  /** 0..1 presentation intensity: drives both fill color and mark radius. */
  intensity: number;
}

export interface HeatmapView {
  descriptor: string;
  columns: string[];
  /** Dataset column index behind each grid position. */
  columnIndices: number[];
  arity: 1 | 2;
  cells: HeatmapCell[];
}

export interface TableView {
  columns: string[];
  rows: (number | string | null)[][];
  total: number;
  offset: number;
  limit: number;
  /** Per displayed row: true when a cell of the focus column sits outside the fences. */
  highlighted: boolean[];
}

export class AppViewModel {
  carousels: CarouselViewModel[];
  related: NeighborhoodResponse | null = null;
  private cardCache = new Map<string, GuidepostModel>();

  constructor(
    public api: ApiClient,
    public session: SessionStore,
  ) {
    this.carousels = DESCRIPTOR_ORDER.map(
      (descriptor) => new CarouselViewModel(descriptor, api, session),
    );
  }

  carousel(descriptor: string): CarouselViewModel {
    const found = this.carousels.find((c) => c.descriptor === descriptor);
    if (!found) throw new Error(`unknown descriptor: ${descriptor}`);
    return found;
  }

  async loadAll(): Promise<void> {
    await Promise.all(this.carousels.map((c) => c.load()));
    for (const carousel of this.carousels) {
      for (const card of carousel.cards) this.cardCache.set(card.id, card);
    }
  }

  /** Focus a guidepost and fetch its neighborhoods. */
  async showRelated(guidepostId: string, k = 5): Promise<NeighborhoodResponse> {
    this.session.setFocus(guidepostId);
    this.related = await this.api.related(this.session.datasetId, guidepostId, k);
    for (const list of [this.related.n_x, this.related.n_y, this.related.n_xy]) {
      for (const card of list) this.cardCache.set(card.id, card);
    }
    return this.related;
  }

  /** Find a guidepost by id, consulting the cache before re-querying. */
  async resolveGuidepost(guidepostId: string): Promise<GuidepostModel | null> {
    const hit = this.cardCache.get(guidepostId);
    if (hit) return hit;
    for (const descriptor of DESCRIPTOR_ORDER) {
      const listing = await this.api.guideposts(this.session.datasetId, {
        descriptor,
        k: 1000,
      });
      for (const card of listing.guideposts) this.cardCache.set(card.id, card);
      const found = listing.guideposts.find((g) => g.id === guidepostId);
      if (found) return found;
    }
    return null;
  }

  toggleBookmark(guidepostId: string): boolean {
    return this.session.toggleBookmark(guidepostId);
  }

  async bookmarkPanel(): Promise<GuidepostModel[]> {
    const cards: GuidepostModel[] = [];
    for (const bookmark of this.session.bookmarks) {
      const card = await this.resolveGuidepost(bookmark.guidepost_id);
      if (card) cards.push(card);
    }
    return cards;
  }

  /** Overview grid with presentation intensities in [0, 1]. */
  async heatmap(descriptor: string, mode?: "exact" | "approximate"): Promise<HeatmapView> {
    const doc: OverviewResponse = await this.api.overview(
      this.session.datasetId,
      descriptor,
      mode,
    );
    const cells: HeatmapCell[] = [];
    if (doc.arity === 2) {
      for (let i = 0; i < doc.columns.length; i++) {
        for (let j = 0; j < doc.columns.length; j++) {
          cells.push({ row: i, col: j, strength: doc.matrix[i][j], intensity: 0 });
        }
      }
    } else {
      doc.strengths.forEach((strength, i) => {
        cells.push({ row: 0, col: i, strength, intensity: 0 });
      });
    }
    const finite = cells
      .map((c) => c.strength)
      .filter((s): s is number => s !== null && Number.isFinite(s));
    const top = finite.length ? Math.max(...finite.map(Math.abs)) : 0;
    for (const cell of cells) {
      cell.intensity =
        cell.strength === null || top === 0 ? 0 : Math.abs(cell.strength) / top;
    }
    return {
      descriptor: doc.descriptor,
      columns: doc.columns.map((c) => c.name),
      columnIndices: doc.columns.map((c) => c.index),
      arity: doc.arity,
      cells,
    };
  }

  /** Heatmap click-through: open the guidepost for a pair of dataset columns. */
  async openPair(xIndex: number, yIndex: number): Promise<GuidepostModel | null> {
    const listing = await this.api.guideposts(this.session.datasetId, {
      descriptor: "linear_relationship",
      k: 1000,
    });
    const wanted = new Set([xIndex, yIndex]);
    const found = listing.guideposts.find(
      (g) =>
        g.columns.length === 2 && g.columns.every((c) => wanted.has(c.index)),
    );
    if (found) this.cardCache.set(found.id, found);
    return found ?? null;
  }

  /**
   * Raw rows behind a guidepost: the table shows the guidepost's columns
   * first, and for outlier boxplots flags rows outside the payload fences.
   */
  async dataTable(card: GuidepostModel, limit = 50, offset = 0): Promise<TableView> {
    const page: RowPageResponse = await this.api.rows(this.session.datasetId, {
      limit,
      offset,
    });
    const names = card.columns.map((c) => c.name);
    const order = [
      ...names.map((n) => page.columns.indexOf(n)),
      ...page.columns.map((_, i) => i).filter((i) => !names.includes(page.columns[i])),
    ];
    const rows = page.rows.map((row) => order.map((i) => row[i]));
    let highlighted = rows.map(() => false);
    if (card.payload?.variant === "boxplot") {
      const fences = card.payload as BoxplotPayload;
      highlighted = rows.map((row) => {
        const value = row[0];
        return (
          typeof value === "number" &&
          (value < fences.fence_low || value > fences.fence_high)
        );
      });
    }
    return {
      columns: order.map((i) => page.columns[i]),
      rows,
      total: page.total,
      offset: page.offset,
      limit: page.limit,
      highlighted,
    };
  }

  saveSession(): Promise<string> {
    return this.session.save(this.api);
  }

  async restoreSession(sessionId: string): Promise<void> {
    await this.session.restore(this.api, sessionId);
    await this.loadAll();
  }
}
