// SVG renderers for the four chart payloads. Each is a pure function of the
// payload: positions and sizes are pixel-space rescalings of values the
// service already computed (pre-binned counts, five-number summaries,
// pre-sampled points, fitted slope/intercept).

import type {
  BoxplotPayload,
  HistogramPayload,
  ParetoPayload,
  ScatterPayload,
  VisualizationPayload,
} from "./types";

export const CHART_WIDTH = 240;
export const CHART_HEIGHT = 140;
const PAD = 14;

const SVG_NS = "http://www.w3.org/2000/svg";

function svgElement(tag: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

function emptySvg(variant: string): SVGElement {
  const svg = svgElement("svg", {
    viewBox: `0 0 ${CHART_WIDTH} ${CHART_HEIGHT}`,
    class: `chart chart-${variant}`,
  });
  return svg;
}

interface Scale {
  (value: number): number;
}

function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (value) => r0 + ((value - d0) / span) * (r1 - r0);
}

export function histogramSvg(payload: HistogramPayload): SVGElement {
  const svg = emptySvg("histogram");
  const { bin_edges: edges, counts } = payload;
  const peak = Math.max(...counts, 1);
  const x = linearScale(edges[0], edges[edges.length - 1], PAD, CHART_WIDTH - PAD);
  const y = linearScale(0, peak, CHART_HEIGHT - PAD, PAD);
  counts.forEach((count, i) => {
    const x0 = x(edges[i]);
    const x1 = x(edges[i + 1]);
    svg.appendChild(
      svgElement("rect", {
        class: "bar",
        x: x0,
        y: y(count),
        width: Math.max(x1 - x0, 1),
        height: Math.max(CHART_HEIGHT - PAD - y(count), 0),
        "data-count": count,
      }),
    );
  });
  return svg;
}

export function boxplotSvg(payload: BoxplotPayload): SVGElement {
  const svg = emptySvg("boxplot");
  const lo = Math.min(payload.min, payload.fence_low);
  const hi = Math.max(payload.max, payload.fence_high);
  const x = linearScale(lo, hi, PAD, CHART_WIDTH - PAD);
  const mid = CHART_HEIGHT / 2;
  const boxTop = mid - 22;
  const boxHeight = 44;
  // Whiskers span the inlier range [max(min, fence_low), min(max, fence_high)].
  const whiskerLo = Math.max(payload.min, payload.fence_low);
  const whiskerHi = Math.min(payload.max, payload.fence_high);
  svg.appendChild(
    svgElement("line", {
      class: "whisker",
      x1: x(whiskerLo),
      x2: x(payload.q1),
      y1: mid,
      y2: mid,
    }),
  );
  svg.appendChild(
    svgElement("line", {
      class: "whisker",
      x1: x(payload.q3),
      x2: x(whiskerHi),
      y1: mid,
      y2: mid,
    }),
  );
  svg.appendChild(
    svgElement("rect", {
      class: "box",
      x: x(payload.q1),
      y: boxTop,
      width: Math.max(x(payload.q3) - x(payload.q1), 1),
      height: boxHeight,
    }),
  );
  svg.appendChild(
    svgElement("line", {
      class: "median",
      x1: x(payload.median),
      x2: x(payload.median),
      y1: boxTop,
      y2: boxTop + boxHeight,
    }),
  );
  for (const fence of [payload.fence_low, payload.fence_high]) {
    svg.appendChild(
      svgElement("line", {
        class: "fence",
        x1: x(fence),
        x2: x(fence),
        y1: boxTop - 6,
        y2: boxTop + boxHeight + 6,
      }),
    );
  }
  for (const value of payload.outliers) {
    svg.appendChild(
      svgElement("circle", { class: "outlier", cx: x(value), cy: mid, r: 2.5 }),
    );
  }
  return svg;
}

export function paretoSvg(payload: ParetoPayload): SVGElement {
  const svg = emptySvg("pareto");
  const peak = Math.max(...payload.counts, 1);
  const n = payload.counts.length;
  const band = (CHART_WIDTH - 2 * PAD) / n;
  const y = linearScale(0, peak, CHART_HEIGHT - PAD, PAD);
  const yShare = linearScale(0, 1, CHART_HEIGHT - PAD, PAD);
  payload.counts.forEach((count, i) => {
    svg.appendChild(
      svgElement("rect", {
        class: "bar",
        x: PAD + i * band + 1,
        y: y(count),
        width: Math.max(band - 2, 1),
        height: Math.max(CHART_HEIGHT - PAD - y(count), 0),
        "data-category": payload.categories[i],
        "data-count": count,
      }),
    );
  });
  const points = payload.cumulative
    .map((share, i) => `${PAD + (i + 0.5) * band},${yShare(share)}`)
    .join(" ");
  svg.appendChild(svgElement("polyline", { class: "cumulative", points, fill: "none" }));
  return svg;
}

export function scatterSvg(payload: ScatterPayload): SVGElement {
  const svg = emptySvg("scatter");
  const xLo = Math.min(...payload.x);
  const xHi = Math.max(...payload.x);
  const yLo = Math.min(...payload.y);
  const yHi = Math.max(...payload.y);
  const x = linearScale(xLo, xHi, PAD, CHART_WIDTH - PAD);
  const y = linearScale(yLo, yHi, CHART_HEIGHT - PAD, PAD);
  payload.x.forEach((vx, i) => {
    svg.appendChild(
      svgElement("circle", { class: "pt", cx: x(vx), cy: y(payload.y[i]), r: 1.8 }),
    );
  });
  // Best-fit line straight from the payload's slope/intercept.
  svg.appendChild(
    svgElement("line", {
      class: "fit",
      x1: x(xLo),
      y1: y(payload.slope * xLo + payload.intercept),
      x2: x(xHi),
      y2: y(payload.slope * xHi + payload.intercept),
      "data-slope": payload.slope,
      "data-intercept": payload.intercept,
    }),
  );
  return svg;
}

export function chartSvg(payload: VisualizationPayload): SVGElement {
  switch (payload.variant) {
    case "histogram":
      return histogramSvg(payload);
    case "boxplot":
      return boxplotSvg(payload);
    case "pareto":
      return paretoSvg(payload);
    case "scatter":
      return scatterSvg(payload);
  }
}
