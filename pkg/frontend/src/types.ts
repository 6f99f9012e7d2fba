// JSON shapes of the guidepost HTTP API.

export interface ColumnRef {
  index: number;
  name: string;
}

export interface ColumnMeta {
  index: number;
  name: string;
  kind: string;
  missing_count: number;
  distinct_count: number | null;
  integer_valued: boolean;
}

export interface IngestResponse {
  dataset_id: string;
  n_rows: number;
  columns: ColumnMeta[];
  bundle_status: string;
}

export interface ColumnsResponse {
  dataset_id: string;
  n_rows: number;
  columns: ColumnMeta[];
}

export type ChartVariant = "histogram" | "boxplot" | "pareto" | "scatter";

export interface HistogramPayload {
  variant: "histogram";
  bin_edges: number[];
  counts: number[];
}

export interface BoxplotPayload {
  variant: "boxplot";
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
  fence_low: number;
  fence_high: number;
  outliers: number[];
  outlier_count: number;
}

export interface ParetoPayload {
  variant: "pareto";
  categories: string[];
  counts: number[];
  cumulative: number[];
}

export interface ScatterPayload {
  variant: "scatter";
  x: number[];
  y: number[];
  slope: number;
  intercept: number;
}

export type VisualizationPayload =
  | HistogramPayload
  | BoxplotPayload
  | ParetoPayload
  | ScatterPayload;

export interface GuidepostModel {
  id: string;
  descriptor: string;
  columns: ColumnRef[];
  raw: number;
  strength: number;
  auxiliary: Record<string, unknown>;
  approximate: boolean;
  payload: VisualizationPayload | null;
}

export interface GuidepostListResponse {
  dataset_id: string;
  descriptor: string;
  metric: string;
  order: "ascending" | "descending";
  mode: "exact" | "approximate";
  k: number;
  guideposts: GuidepostModel[];
}

export interface NeighborhoodResponse {
  dataset_id: string;
  focus_id: string;
  descriptor: string;
  focus_columns: number[];
  n_x: GuidepostModel[];
  n_y: GuidepostModel[];
  n_xy: GuidepostModel[];
}

export interface VectorOverviewResponse {
  dataset_id: string;
  descriptor: string;
  arity: 1;
  mode: string;
  columns: ColumnRef[];
  strengths: (number | null)[];
  raw: (number | null)[];
  excluded: (string | null)[];
}

export interface MatrixOverviewResponse {
  dataset_id: string;
  descriptor: string;
  arity: 2;
  mode: string;
  columns: ColumnRef[];
  matrix: (number | null)[][];
  raw: (number | null)[][];
}

export type OverviewResponse = VectorOverviewResponse | MatrixOverviewResponse;

export interface RowPageResponse {
  dataset_id: string;
  columns: string[];
  rows: (number | string | null)[][];
  total: number;
  offset: number;
  limit: number;
}

export interface BookmarkModel {
  guidepost_id: string;
  created_at: number;
}

export interface SessionModel {
  version: number;
  dataset_id: string;
  bookmarks: BookmarkModel[];
  focus: string | null;
  settings: Record<string, Record<string, unknown>>;
}

export interface SessionCreateResponse {
  session_id: string;
  session: SessionModel;
}

export interface ErrorBody {
  code: string;
  message: string;
}
