// Bootstrap: pick a dataset (upload or id from the URL), build the app view
// model, and wire the session save/restore controls.

import { ApiClient } from "./api";
import { AppViewModel } from "./app";
import { refreshBookmarkPanel, renderHeatmap, repaint } from "./render";
import { SessionStore } from "./state";
import { DESCRIPTOR_ORDER } from "./app";

const api = new ApiClient("");

async function start(datasetId: string, sessionId: string | null): Promise<void> {
  const session = new SessionStore(datasetId);
  const app = new AppViewModel(api, session);
  if (sessionId) await app.restoreSession(sessionId);
  else await app.loadAll();
  repaint(app);
  await refreshBookmarkPanel(app);

  const overviewSelect = document.getElementById("overview-descriptor") as HTMLSelectElement;
  for (const descriptor of DESCRIPTOR_ORDER) {
    const option = document.createElement("option");
    option.value = descriptor;
    option.textContent = descriptor;
    overviewSelect.appendChild(option);
  }
  overviewSelect.addEventListener("change", async () => {
    const view = await app.heatmap(overviewSelect.value);
    const host = document.getElementById("overview-panel");
    host?.replaceChildren(renderHeatmap(app, view));
  });

  document.getElementById("save-session")?.addEventListener("click", async () => {
    const id = await app.saveSession();
    const url = new URL(window.location.href);
    url.searchParams.set("dataset", datasetId);
    url.searchParams.set("session", id);
    history.replaceState(null, "", url);
    const status = document.getElementById("session-status");
    if (status) status.textContent = `session ${id} saved`;
  });
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const datasetId = params.get("dataset");
  if (datasetId) {
    await start(datasetId, params.get("session"));
    return;
  }
  const picker = document.getElementById("picker");
  picker?.classList.remove("hidden");
  const input = document.getElementById("csv-file") as HTMLInputElement;
  input?.addEventListener("change", async () => {
    const file = input.files?.[0];
    if (!file) return;
    const ingested = await api.ingest(file, file.name);
    const url = new URL(window.location.href);
    url.searchParams.set("dataset", ingested.dataset_id);
    history.replaceState(null, "", url);
    picker?.classList.add("hidden");
    await start(ingested.dataset_id, null);
  });
}

boot().catch((err) => {
  const host = document.getElementById("carousels");
  if (host) host.textContent = `failed to start: ${err}`;
});
