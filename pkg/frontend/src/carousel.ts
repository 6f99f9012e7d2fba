// One carousel per descriptor: a ranked strip of guidepost cards with
// metric/order controls, a strength threshold, and five cards per page.
// Ordering always comes from the service response; the carousel never
// re-sorts or re-scores cards locally.

import { ApiClient, ApiError, GuidepostQueryParams } from "./api";
import type { SessionStore } from "./state";
import type { ErrorBody, GuidepostModel } from "./types";

export const PAGE_SIZE = 5;

export class CarouselViewModel {
  cards: GuidepostModel[] = [];
  page = 0;
  loading = false;
  error: ErrorBody | null = null;
  /** Progress hint shown while a sketch bundle is still building. */
  notice: string | null = null;
  /** Effective settings echoed by the last successful response. */
  activeMetric: string | null = null;
  activeOrder: "ascending" | "descending" | null = null;
  activeMode: "exact" | "approximate" | null = null;

  private requestSeq = 0;

  constructor(
    public readonly descriptor: string,
    private api: ApiClient,
    private session: SessionStore,
    public k: number = 50,
  ) {}

  private queryParams(overrides: Partial<GuidepostQueryParams> = {}): GuidepostQueryParams {
    const settings = this.session.settingsFor(this.descriptor);
    return {
      descriptor: this.descriptor,
      k: this.k,
      metric: settings.metric as string | undefined,
      order: settings.order as "ascending" | "descending" | undefined,
      min: settings.min as number | undefined,
      max: settings.max as number | undefined,
      mode: settings.mode as "exact" | "approximate" | undefined,
      alpha: settings.alpha as number | undefined,
      ...overrides,
    };
  }

  /** Re-query the service; concurrent calls resolve last-write-wins. */
  async load(): Promise<void> {
    const seq = ++this.requestSeq;
    this.loading = true;
    try {
      const response = await this.api.guideposts(this.session.datasetId, this.queryParams());
      if (seq !== this.requestSeq) return;
      this.cards = response.guideposts;
      this.activeMetric = response.metric;
      this.activeOrder = response.order;
      this.activeMode = response.mode;
      this.error = null;
      this.notice = null;
    } catch (err) {
      if (seq !== this.requestSeq) return;
      if (err instanceof ApiError && err.code === "bundle_building") {
        // Sketches are still building: show exact-mode results with a hint.
        const exact = await this.api.guideposts(
          this.session.datasetId,
          this.queryParams({ mode: "exact" }),
        );
        if (seq !== this.requestSeq) return;
        this.cards = exact.guideposts;
        this.activeMetric = exact.metric;
        this.activeOrder = exact.order;
        this.activeMode = exact.mode;
        this.error = null;
        this.notice = "sketch bundle building; showing exact results";
      } else if (err instanceof ApiError) {
        this.error = { code: err.code, message: err.message };
      } else {
        this.error = { code: "network_error", message: String(err) };
      }
    } finally {
      if (seq === this.requestSeq) {
        this.loading = false;
        if (this.page >= this.pageCount()) this.page = Math.max(0, this.pageCount() - 1);
      }
    }
  }

  async setMetric(metric: string | null, alpha?: number | null): Promise<void> {
    this.session.updateSettings(this.descriptor, { metric, alpha });
    await this.load();
  }

  async flipOrder(): Promise<void> {
    const flipped = this.activeOrder === "ascending" ? "descending" : "ascending";
    this.session.updateSettings(this.descriptor, { order: flipped });
    await this.load();
  }

  async setThreshold(min: number | null, max: number | null): Promise<void> {
    this.session.updateSettings(this.descriptor, { min, max });
    await this.load();
  }

  async setMode(mode: "exact" | "approximate" | null): Promise<void> {
    this.session.updateSettings(this.descriptor, { mode });
    await this.load();
  }

  currentPage(): GuidepostModel[] {
    return this.cards.slice(this.page * PAGE_SIZE, (this.page + 1) * PAGE_SIZE);
  }

  pageCount(): number {
    return Math.max(1, Math.ceil(this.cards.length / PAGE_SIZE));
  }

  nextPage(): void {
    if (this.page + 1 < this.pageCount()) this.page += 1;
  }

  prevPage(): void {
    if (this.page > 0) this.page -= 1;
  }
}
