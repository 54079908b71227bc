import { ClusterView } from "./clusterView";
import { ComparisonView } from "./comparisonView";
import { CorrelationView } from "./correlationView";
import { IndividualView } from "./individualView";
import { ViewState } from "./state";
import type { Api, Period } from "./types";

/**
 * Wires the four views to the API and the shared view state.
 *
 * Cross-view contract: a timeline brush refetches exactly clusters and
 * correlations for the new bounds; a rectangular brush over cluster points
 * adds one comparison region per selection; clicking a portfolio id focuses
 * it (yellow ring in the cluster view) and opens its full-lifespan individual
 * view; hovering a correlation block mirrors it into the detail panel.
 */
export class App {
  readonly state = new ViewState();
  readonly clusterView: ClusterView;
  readonly correlationView: CorrelationView;
  readonly comparisonView: ComparisonView;
  readonly individualView: IndividualView;
  readonly status: HTMLElement;

  private generation = 0;
  private inflight: Promise<unknown>[] = [];

  constructor(root: HTMLElement, private api: Api) {
    this.status = document.createElement("div");
    this.status.className = "period-status";
    root.appendChild(this.status);

    const grid = document.createElement("div");
    grid.className = "view-grid";
    root.appendChild(grid);
    const panels = ["cluster", "correlation", "comparison", "individual"].map((name) => {
      const panel = document.createElement("div");
      panel.className = `panel panel-${name}`;
      grid.appendChild(panel);
      return panel;
    });

    this.clusterView = new ClusterView(panels[0]);
    this.correlationView = new CorrelationView(panels[1]);
    this.comparisonView = new ComparisonView(panels[2]);
    this.individualView = new IndividualView(panels[3]);

    this.clusterView.onPeriodBrushed = (start, end) => {
      this.track(this.refreshPeriod(start, end));
    };
    this.clusterView.onPointsBrushed = (ids) => {
      this.track(this.addComparison(ids));
    };
    this.comparisonView.onIdClick = (id) => {
      this.track(this.focusPortfolio(id));
    };
    this.correlationView.onCellHover = (j, k) => {
      this.state.setHover({ kind: "correlation-cell", key: `${j},${k}` });
    };
  }

  private track<T>(task: Promise<T>): Promise<T> {
    this.inflight.push(task);
    task.finally(() => {
      this.inflight = this.inflight.filter((t) => t !== task);
    });
    return task;
  }

  /** Settles when every in-flight fetch/render task has finished. */
  async idle(): Promise<void> {
    while (this.inflight.length > 0) {
      await Promise.allSettled(this.inflight);
    }
  }

  init(): Promise<void> {
    return this.track(this.refreshPeriod());
  }

  /** Exactly two refetches per period change: clusters and correlations. */
  private async refreshPeriod(start?: string, end?: string): Promise<void> {
    const generation = ++this.generation;
    const [clusters, correlations] = await Promise.all([
      this.api.clusters(start, end),
      this.api.correlations(start, end),
    ]);
    if (generation !== this.generation) return; // stale response discarded
    this.state.setPeriod(clusters.period);
    this.clusterView.render(clusters);
    this.correlationView.render(correlations);
    this.clusterView.setFocus(this.state.focusedId);
    this.status.textContent =
      `showing ${clusters.period.start} .. ${clusters.period.end}` +
      (clusters.excluded.length ? ` (${clusters.excluded.length} excluded)` : "");
  }

  private async addComparison(ids: string[]): Promise<void> {
    const selection = this.state.addSelection(ids);
    const period = this.state.period ?? undefined;
    const overviews = await Promise.all(
      ids.map((id) => this.api.overview(id, period?.start, period?.end)),
    );
    this.comparisonView.addRegion(selection.index, overviews);
  }

  private async focusPortfolio(id: string): Promise<void> {
    this.state.focus(id);
    this.clusterView.setFocus(id);
    this.comparisonView.setFocus(id);
    const holdings = await this.api.holdings(id); // entire lifespan, no period
    this.individualView.render(holdings);
  }

  periodOf(): Period | null {
    return this.state.period;
  }
}
