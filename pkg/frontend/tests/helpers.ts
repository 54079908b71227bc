import { readFileSync } from "node:fs";
import { join } from "node:path";

import type {
  Api,
  ClustersPayload,
  CorrelationsPayload,
  HoldingsPayload,
  OverviewPayload,
} from "../src/types";

export function fixture<T>(name: string): T {
  const path = join(process.cwd(), "tests", "fixtures", name);
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

export const FIXTURE_IDS = ["0001", "0002", "0003"];

export function loadAll() {
  return {
    clusters: fixture<ClustersPayload>("clusters.json"),
    correlations: fixture<CorrelationsPayload>("correlations.json"),
    overviews: Object.fromEntries(
      FIXTURE_IDS.map((id) => [id, fixture<OverviewPayload>(`overview_${id}.json`)]),
    ),
    holdings: Object.fromEntries(
      FIXTURE_IDS.map((id) => [id, fixture<HoldingsPayload>(`holdings_${id}.json`)]),
    ),
  };
}

/** Records every call; serves the committed fixtures. */
export class FakeApi implements Api {
  calls = {
    clusters: [] as (string | undefined)[][],
    correlations: [] as (string | undefined)[][],
    overview: [] as (string | undefined)[][],
    holdings: [] as string[],
  };

  constructor(private data = loadAll()) {}

  async clusters(start?: string, end?: string): Promise<ClustersPayload> {
    this.calls.clusters.push([start, end]);
    return this.data.clusters;
  }

  async correlations(start?: string, end?: string): Promise<CorrelationsPayload> {
    this.calls.correlations.push([start, end]);
    return this.data.correlations;
  }

  async overview(id: string, start?: string, end?: string): Promise<OverviewPayload> {
    this.calls.overview.push([id, start, end]);
    const known = this.data.overviews[id];
    if (known) return known;
    return { ...this.data.overviews[FIXTURE_IDS[0]], id };
  }

  async holdings(id: string): Promise<HoldingsPayload> {
    this.calls.holdings.push(id);
    const known = this.data.holdings[id];
    if (known) return known;
    return { ...this.data.holdings[FIXTURE_IDS[0]], id };
  }
}

export function mount(): HTMLElement {
  const root = document.createElement("div");
  document.body.appendChild(root);
  return root;
}
