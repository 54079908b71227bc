// Payload shapes of the analysis API. Every number displayed in the UI
// originates from one of these fields; views never recompute analytics.

export interface Period {
  start: string;
  end: string;
}

export interface ClusterPoint {
  id: string;
  x: number;
  y: number;
  cumulative_return: number;
}

export interface TimelineEntry {
  date: string;
  market_return: number;
}

export interface ClustersPayload {
  period: Period;
  points: ClusterPoint[];
  benchmarks: ClusterPoint[];
  timeline: TimelineEntry[];
  excluded: { id: string; overlap_days: number }[];
  tsne_kl: number;
}

export interface RollingPoint {
  date: string;
  value: number | null;
}

export interface CorrelationsPayload {
  period: Period;
  window: number;
  factors: string[];
  period_matrix: (number | null)[][];
  rolling: Record<string, RollingPoint[]>;
  cumulative_factor_returns: Record<string, { date: string; value: number }[]>;
}

export interface SignatureDay {
  date: string;
  exposures: number[];
}

export interface OverviewPayload {
  id: string;
  period: Period;
  signature: SignatureDay[];
  sectors: { bands: string[]; series: { date: string; values: number[] }[] };
  cumulative_return: { date: string; value: number }[];
}

export interface HoldingPosition {
  stock_id: string;
  weight: number;
  group: number;
}

export type DurationClass = ">30%" | "10-30%" | "<10%";

export interface HoldingsPayload {
  id: string;
  lifespan: { start: string; end: string; days: number };
  per_day: { date: string; invested: number; positions: HoldingPosition[] }[];
  groups_meta: { w_max: number; boundaries: number[] };
  legend: {
    counts: Record<DurationClass, number>;
    classes: Record<string, DurationClass>;
  };
}

export interface JobPayload {
  id: string;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  result: { kind: string; start: string; end: string } | null;
  error: string | null;
}

/** Everything the views need from the backend. */
export interface Api {
  clusters(start?: string, end?: string): Promise<ClustersPayload>;
  correlations(start?: string, end?: string): Promise<CorrelationsPayload>;
  overview(id: string, start?: string, end?: string): Promise<OverviewPayload>;
  holdings(id: string): Promise<HoldingsPayload>;
}
