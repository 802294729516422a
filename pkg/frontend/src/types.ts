/** Wire types mirroring the workbench HTTP API. */

export interface ScatterPoint {
  id: string;
  x: number;
  y: number;
  hop: number;
  is_core: boolean;
}

export interface SessionSummary {
  n_papers: number;
  n_core: number;
  current_hop: number;
  hops: number[];
  journal_length: number;
  corpus_version: number;
  config: Record<string, unknown>;
}

export interface SelectionResponse {
  selection_id: string;
  ids: string[];
}

/** Wordcloud entries arrive as [token, count] pairs, already ranked. */
export type WordcloudCounts = [string, number][];

export interface TableRow {
  id: string;
  title: string;
  abstract: string;
  year: number | null;
  authors: string[];
  hop: number;
  is_core: boolean;
  citation_count: number;
  reference_count: number;
}

export interface CompactnessReport {
  score: number;
  n_documents: number;
}

export interface HopResponse {
  direction: string;
  hop: number;
  new_papers: number;
  failures: Record<string, string>;
  n_papers: number;
}

export interface MutationResponse {
  n_papers: number;
  [key: string]: unknown;
}

export type Point = [number, number];

export type Geometry =
  | { type: "lasso"; vertices: Point[] }
  | { type: "rectangle"; corners: [Point, Point] }
  | { type: "ids"; ids: string[] };
