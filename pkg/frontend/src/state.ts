// Client-side mirror of the server's session document. Every persistent UI
// choice lives here (bookmarks, focus, per-descriptor settings); view models
// read and write through this store so there is no hidden state elsewhere.

import type { ApiClient } from "./api";
import type { BookmarkModel, SessionModel } from "./types";

export const SETTING_KEYS = ["metric", "order", "min", "max", "mode", "alpha"] as const;
export type SettingKey = (typeof SETTING_KEYS)[number];
export type DescriptorSettings = Partial<Record<SettingKey, unknown>>;

export class SessionStore {
  version = 1;
  bookmarks: BookmarkModel[] = [];
  focus: string | null = null;
  settings: Record<string, DescriptorSettings> = {};
  sessionId: string | null = null;

  constructor(public datasetId: string) {}

  isBookmarked(guidepostId: string): boolean {
    return this.bookmarks.some((b) => b.guidepost_id === guidepostId);
  }

  /** Add the bookmark if absent, remove it if present. */
  toggleBookmark(guidepostId: string, now: () => number = () => Date.now() / 1000): boolean {
    if (this.isBookmarked(guidepostId)) {
      this.bookmarks = this.bookmarks.filter((b) => b.guidepost_id !== guidepostId);
      return false;
    }
    this.bookmarks.push({ guidepost_id: guidepostId, created_at: now() });
    return true;
  }

  setFocus(guidepostId: string | null): void {
    this.focus = guidepostId;
  }

  updateSettings(descriptor: string, patch: DescriptorSettings): void {
    for (const key of Object.keys(patch)) {
      if (!SETTING_KEYS.includes(key as SettingKey)) {
        throw new Error(`unknown setting key: ${key}`);
      }
    }
    const current = { ...(this.settings[descriptor] ?? {}) };
    for (const [key, value] of Object.entries(patch)) {
      if (value === undefined || value === null) delete current[key as SettingKey];
      else current[key as SettingKey] = value;
    }
    if (Object.keys(current).length === 0) delete this.settings[descriptor];
    else this.settings[descriptor] = current;
  }

  settingsFor(descriptor: string): DescriptorSettings {
    return this.settings[descriptor] ?? {};
  }

  toDoc(): SessionModel {
    return {
      version: this.version,
      dataset_id: this.datasetId,
      bookmarks: this.bookmarks.map((b) => ({ ...b })),
      focus: this.focus,
      settings: JSON.parse(JSON.stringify(this.settings)),
    };
  }

  applyDoc(doc: SessionModel): void {
    this.version = doc.version;
    this.datasetId = doc.dataset_id;
    this.bookmarks = doc.bookmarks.map((b) => ({ ...b }));
    this.focus = doc.focus;
    this.settings = JSON.parse(JSON.stringify(doc.settings));
  }

  /** Persist to the sessions endpoint, creating the session on first save. */
  async save(api: ApiClient): Promise<string> {
    if (this.sessionId === null) {
      const created = await api.createSession(this.datasetId);
      this.sessionId = created.session_id;
    }
    await api.putSession(this.sessionId, this.toDoc());
    return this.sessionId;
  }

  /** Replace local state with a stored session. */
  async restore(api: ApiClient, sessionId: string): Promise<void> {
    const doc = await api.getSession(sessionId);
    this.applyDoc(doc);
    this.sessionId = sessionId;
  }
}
