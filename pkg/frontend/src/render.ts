// DOM rendering: turns the view models into elements and wires control
// events back to them. Deliberately framework-free; every interaction maps
// to exactly one view-model method, which maps to one API parameter.

import type { AppViewModel, HeatmapView, TableView } from "./app";
import type { CarouselViewModel } from "./carousel";
import { PAGE_SIZE } from "./carousel";
import { chartSvg } from "./charts";
import type { GuidepostModel } from "./types";

const PAIR_METRICS = ["abs_pearson", "significance_adjusted"];

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

function cardTitle(card: GuidepostModel): string {
  return card.columns.map((c) => c.name).join(" × ");
}

export function renderCard(app: AppViewModel, card: GuidepostModel): HTMLElement {
  const node = el("div", "card");
  node.dataset.guidepostId = card.id;
  node.appendChild(el("div", "card-title", cardTitle(card)));
  node.appendChild(
    el(
      "div",
      "card-strength",
      `strength ${card.strength.toPrecision(4)}${card.approximate ? " (approx)" : ""}`,
    ),
  );
  if (card.payload) node.appendChild(chartSvg(card.payload));

  const actions = el("div", "card-actions");
  const bookmark = el("button", "bookmark", app.session.isBookmarked(card.id) ? "★" : "☆");
  bookmark.addEventListener("click", () => {
    app.toggleBookmark(card.id);
    bookmark.textContent = app.session.isBookmarked(card.id) ? "★" : "☆";
    refreshBookmarkPanel(app);
  });
  actions.appendChild(bookmark);

  const related = el("button", "related", "related");
  related.addEventListener("click", async () => {
    await app.showRelated(card.id);
    renderRelatedPanel(app);
  });
  actions.appendChild(related);

  const table = el("button", "data", "data");
  table.addEventListener("click", async () => {
    renderTablePanel(await app.dataTable(card));
  });
  actions.appendChild(table);

  node.appendChild(actions);
  return node;
}

export function renderCarousel(app: AppViewModel, carousel: CarouselViewModel): HTMLElement {
  const section = el("section", "carousel");
  section.dataset.descriptor = carousel.descriptor;

  const header = el("header");
  header.appendChild(el("h2", undefined, carousel.descriptor.replace(/_/g, " ")));

  if (carousel.descriptor === "linear_relationship") {
    const metric = el("select", "metric-select");
    for (const name of PAIR_METRICS) {
      const option = el("option", undefined, name);
      option.value = name;
      if (name === carousel.activeMetric) option.selected = true;
      metric.appendChild(option);
    }
    metric.addEventListener("change", async () => {
      await carousel.setMetric(metric.value, metric.value === "significance_adjusted" ? 0.05 : null);
      repaint(app);
    });
    header.appendChild(metric);
  }

  const flip = el("button", "flip", `order: ${carousel.activeOrder ?? "…"}`);
  flip.addEventListener("click", async () => {
    await carousel.flipOrder();
    repaint(app);
  });
  header.appendChild(flip);

  const threshold = el("span", "threshold");
  const min = el("input") as HTMLInputElement;
  min.type = "range";
  min.min = "0";
  min.max = "1";
  min.step = "0.01";
  const active = app.session.settingsFor(carousel.descriptor).min as
    | number
    | undefined;
  min.value = String(active ?? 0);
  const readout = el("span", "threshold-value", `≥ ${active ?? 0}`);
  min.addEventListener("change", async () => {
    const value = Number(min.value);
    readout.textContent = `≥ ${value}`;
    await carousel.setThreshold(value > 0 ? value : null, null);
    repaint(app);
  });
  threshold.appendChild(min);
  threshold.appendChild(readout);
  header.appendChild(threshold);
  section.appendChild(header);

  if (carousel.notice) section.appendChild(el("div", "notice", carousel.notice));
  if (carousel.error)
    section.appendChild(
      el("div", "error-banner", `${carousel.error.code}: ${carousel.error.message}`),
    );

  const strip = el("div", "cards");
  for (const card of carousel.currentPage()) strip.appendChild(renderCard(app, card));
  section.appendChild(strip);

  const pager = el("footer", "pager");
  const prev = el("button", "prev", "‹");
  prev.disabled = carousel.page === 0;
  prev.addEventListener("click", () => {
    carousel.prevPage();
    repaint(app);
  });
  const label = el("span", undefined, `${carousel.page + 1} / ${carousel.pageCount()}`);
  const next = el("button", "next", "›");
  next.disabled = carousel.page + 1 >= carousel.pageCount();
  next.addEventListener("click", () => {
    carousel.nextPage();
    repaint(app);
  });
  pager.append(prev, label, next);
  section.appendChild(pager);
  return section;
}

export function renderHeatmap(app: AppViewModel, view: HeatmapView): HTMLElement {
  const panel = el("section", "heatmap");
  panel.appendChild(el("h2", undefined, `overview: ${view.descriptor}`));
  const cell = 22;
  const pad = 80;
  const rows = view.arity === 2 ? view.columns.length : 1;
  const svgNs = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNs, "svg");
  svg.setAttribute(
    "viewBox",
    `0 0 ${pad + view.columns.length * cell} ${pad + rows * cell}`,
  );
  for (const c of view.cells) {
    if (c.strength === null) continue;
    const mark = document.createElementNS(svgNs, "circle");
    mark.setAttribute("cx", String(pad + c.col * cell + cell / 2));
    mark.setAttribute("cy", String(pad + c.row * cell + cell / 2));
    // Intensity drives both encodings: radius and color depth.
    mark.setAttribute("r", String(2 + c.intensity * (cell / 2 - 3)));
    mark.setAttribute("fill", `hsl(216 80% ${90 - c.intensity * 55}%)`);
    mark.setAttribute("class", "heat-cell");
    mark.setAttribute("data-strength", String(c.strength));
    mark.addEventListener("click", async () => {
      if (view.arity !== 2 || c.row === c.col) return;
      const card = await app.openPair(
        view.columnIndices[c.row],
        view.columnIndices[c.col],
      );
      const focus = document.getElementById("focus-card");
      if (card && focus) {
        focus.replaceChildren(renderCard(app, card));
      }
    });
    svg.appendChild(mark);
  }
  panel.appendChild(svg);
  return panel;
}

export function renderTablePanel(view: TableView): void {
  const host = document.getElementById("table-panel");
  if (!host) return;
  const table = el("table", "rows");
  const head = el("tr");
  for (const name of view.columns) head.appendChild(el("th", undefined, name));
  table.appendChild(head);
  view.rows.forEach((row, i) => {
    const tr = el("tr", view.highlighted[i] ? "outlier-row" : undefined);
    for (const value of row) tr.appendChild(el("td", undefined, value === null ? "" : String(value)));
    table.appendChild(tr);
  });
  host.replaceChildren(
    el("h2", undefined, `rows (${view.offset}–${view.offset + view.rows.length} of ${view.total})`),
    table,
  );
}

export function renderRelatedPanel(app: AppViewModel): void {
  const host = document.getElementById("related-panel");
  if (!host || !app.related) return;
  host.replaceChildren(el("h2", undefined, `related to ${app.related.focus_id}`));
  const lists: [string, GuidepostModel[]][] = [
    ["keep first column", app.related.n_x],
    ["keep second column", app.related.n_y],
    ["strongest overall", app.related.n_xy],
  ];
  for (const [label, cards] of lists) {
    const block = el("div", "related-list");
    block.appendChild(el("h3", undefined, label));
    for (const card of cards) block.appendChild(renderCard(app, card));
    host.appendChild(block);
  }
}

export async function refreshBookmarkPanel(app: AppViewModel): Promise<void> {
  const host = document.getElementById("bookmark-panel");
  if (!host) return;
  const cards = await app.bookmarkPanel();
  host.replaceChildren(el("h2", undefined, `bookmarks (${cards.length})`));
  for (const card of cards) host.appendChild(renderCard(app, card));
}

export function repaint(app: AppViewModel): void {
  const host = document.getElementById("carousels");
  if (!host) return;
  host.replaceChildren(...app.carousels.map((c) => renderCarousel(app, c)));
}
