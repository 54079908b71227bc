import { beforeEach, describe, expect, it } from "vitest";

import { HttpApi } from "../src/api";
import { App } from "../src/app";
import { FIXTURE_IDS, FakeApi, loadAll, mount } from "./helpers";

const data = loadAll();

async function makeApp() {
  const api = new FakeApi();
  const app = new App(mount(), api);
  await app.init();
  await app.idle();
  return { api, app };
}

beforeEach(() => {
  document.body.replaceChildren();
});

describe("timeline brushing", () => {
  it("issues exactly the two refetches with the brushed bounds", async () => {
    const { api, app } = await makeApp();
    expect(api.calls.clusters.length).toBe(1);
    expect(api.calls.correlations.length).toBe(1);

    const dates = data.clusters.timeline.map((t) => t.date);
    app.clusterView.brushTimeline(dates[5], dates[30]);
    await app.idle();

    expect(api.calls.clusters.length).toBe(2);
    expect(api.calls.correlations.length).toBe(2);
    expect(api.calls.clusters[1]).toEqual([dates[5], dates[30]]);
    expect(api.calls.correlations[1]).toEqual([dates[5], dates[30]]);
    expect(api.calls.overview.length).toBe(0);
    expect(api.calls.holdings.length).toBe(0);
    expect(app.periodOf()).toEqual(data.clusters.period); // server-snapped echo
  });
});

describe("cluster brushing into comparison regions", () => {
  it("creates one region per selection with one overview per member", async () => {
    const { api, app } = await makeApp();
    // the brush rectangle may legitimately capture bystander points
    const first = app.clusterView.brushAround(FIXTURE_IDS);
    expect(first).toEqual(expect.arrayContaining(FIXTURE_IDS));
    await app.idle();

    expect(app.comparisonView.regionCount).toBe(1);
    const region = app.comparisonView.element.querySelector(".region")!;
    expect(region.querySelectorAll(".overview").length).toBe(first.length);
    expect(api.calls.overview.map((c) => c[0]).sort()).toEqual([...first].sort());

    app.clusterView.brushAround([data.clusters.points[5].id]);
    await app.idle();
    expect(app.comparisonView.regionCount).toBe(2);
    expect(app.state.selections.length).toBe(2);
  });
});

describe("drill-down to the individual view", () => {
  it("id click opens the full-lifespan view and rings the cluster node", async () => {
    const { api, app } = await makeApp();
    app.clusterView.brushAround(FIXTURE_IDS);
    await app.idle();

    const target = FIXTURE_IDS[1];
    const button = app.comparisonView.element.querySelector(
      `.overview[data-id="${target}"] button.portfolio-id`,
    ) as HTMLButtonElement;
    button.click();
    await app.idle();

    expect(api.calls.holdings).toEqual([target]); // no period parameters: entire span
    expect(app.state.focusedId).toBe(target);
    expect(app.individualView.focusedId).toBe(target);
    const days = app.individualView.element.querySelectorAll(".holdings-chart g.stock").length;
    expect(days).toBeGreaterThan(0);
    expect(
      app.individualView.element.querySelectorAll(".holdings-chart")[0]
        .querySelectorAll("line.stick").length,
    ).toBe(data.holdings[target].per_day.reduce((n, d) => n + d.positions.length, 0));

    const ring = app.clusterView.svg.querySelector("circle.focus-ring")!;
    expect(ring.getAttribute("visibility")).toBe("visible");
    expect(ring.getAttribute("stroke")).toBe("gold");
    const pos = app.clusterView.pointPosition(target)!;
    expect(Number(ring.getAttribute("cx"))).toBeCloseTo(pos.x, 6);
    expect(Number(ring.getAttribute("cy"))).toBeCloseTo(pos.y, 6);

    // the focused id is consistent across all three views
    const focusedBlocks = app.comparisonView.element.querySelectorAll(".overview.focused");
    expect(focusedBlocks.length).toBe(1);
    expect((focusedBlocks[0] as HTMLElement).dataset.id).toBe(target);
    expect(
      app.individualView.element.querySelector(".individual-title")!.textContent,
    ).toContain(target);
  });

  it("refuses to focus a portfolio outside every selection", async () => {
    const { app } = await makeApp();
    expect(() => app.state.focus("0001")).toThrow(/not in any current selection/);
  });
});

describe("correlation hover detail", () => {
  it("mirrors the hovered block into the lower-left panel with axis values", async () => {
    const { app } = await makeApp();
    const cell = app.correlationView.svg.querySelector('g.cell[data-j="2"][data-k="6"]')!;
    cell.dispatchEvent(new Event("mouseenter"));

    const panel = app.correlationView.svg.querySelector("g.detail-panel")!;
    expect(panel.getAttribute("data-j")).toBe("2");
    expect(panel.getAttribute("data-k")).toBe("6");
    expect(panel.querySelector("path.detail-line")).not.toBeNull();
    expect(panel.querySelectorAll("text.detail-tick-label").length).toBeGreaterThan(1);
    expect(app.state.hover).toEqual({ kind: "correlation-cell", key: "2,6" });

    const diagonal = app.correlationView.svg.querySelector('g.cell[data-j="4"][data-k="4"]')!;
    diagonal.dispatchEvent(new Event("mouseenter"));
    expect(panel.getAttribute("data-k")).toBe("4");
    expect(panel.querySelector("rect.detail-bg")!.getAttribute("fill")).toBe("#d9d9d9");
    expect(panel.querySelector("text.detail-title")!.textContent).toContain("accumulated return");
  });
});

describe("individual view interactions", () => {
  it("legend-bar click highlights exactly the API-tagged duration class", async () => {
    const { app } = await makeApp();
    app.clusterView.brushAround(FIXTURE_IDS);
    await app.idle();
    const target = FIXTURE_IDS[0];
    (app.comparisonView.element.querySelector(
      `.overview[data-id="${target}"] button.portfolio-id`,
    ) as HTMLButtonElement).click();
    await app.idle();

    const holdings = data.holdings[target];
    const classes = Object.entries(holdings.legend.classes);
    const cls = classes.some(([, c]) => c === ">30%") ? ">30%" : classes[0][1];
    const expected = classes.filter(([, c]) => c === cls).map(([sid]) => sid).sort();

    const bar = app.individualView.element.querySelector(
      `.legend-bar[data-duration-class="${cls}"]`,
    ) as HTMLButtonElement;
    bar.click();
    expect(app.individualView.highlightedStocks()).toEqual(expected);
    bar.click(); // toggle off
    expect(app.individualView.highlightedStocks()).toEqual([]);
  });

  it("hovering a stock marks its line and shows the order-book id", async () => {
    const { app } = await makeApp();
    app.clusterView.brushAround([FIXTURE_IDS[0]]);
    await app.idle();
    (app.comparisonView.element.querySelector("button.portfolio-id") as HTMLButtonElement).click();
    await app.idle();

    const stock = app.individualView.element.querySelector("g.stock")!;
    const sid = stock.getAttribute("data-stock")!;
    stock.dispatchEvent(new Event("mouseenter"));
    expect(stock.classList.contains("hovered")).toBe(true);
    const label = app.individualView.element.querySelector(".hover-label") as HTMLElement;
    expect(label.hidden).toBe(false);
    expect(label.textContent).toBe(sid);
    stock.dispatchEvent(new Event("mouseleave"));
    expect(stock.classList.contains("hovered")).toBe(false);
  });

  it("stock lines break when the stock is sold out", async () => {
    const { app } = await makeApp();
    app.clusterView.brushAround([FIXTURE_IDS[0]]);
    await app.idle();
    (app.comparisonView.element.querySelector("button.portfolio-id") as HTMLButtonElement).click();
    await app.idle();

    const holdings = data.holdings[FIXTURE_IDS[0]];
    const dayIdx = new Map(holdings.per_day.map((d, i) => [d.date, i]));
    for (const g of app.individualView.element.querySelectorAll("g.stock")) {
      const sid = g.getAttribute("data-stock")!;
      const held = holdings.per_day
        .filter((d) => d.positions.some((p) => p.stock_id === sid))
        .map((d) => dayIdx.get(d.date)!);
      let runs = held.length ? 1 : 0;
      for (let i = 1; i < held.length; i++) {
        if (held[i] !== held[i - 1] + 1) runs += 1;
      }
      expect(g.querySelectorAll("path.stock-line").length).toBe(runs);
    }
  });
});

describe("http client job flow", () => {
  it("follows 202 responses through the job endpoint", async () => {
    const calls: string[] = [];
    let clusterHits = 0;
    const fetchFn = async (url: string): Promise<Response> => {
      calls.push(url);
      if (url.includes("/api/clusters")) {
        clusterHits += 1;
        if (clusterHits === 1) {
          return new Response(
            JSON.stringify({ job_id: "abc123", state: "queued", progress: 0 }),
            { status: 202 },
          );
        }
        return new Response(JSON.stringify(data.clusters), { status: 200 });
      }
      if (url.includes("/api/jobs/abc123")) {
        return new Response(
          JSON.stringify({ id: "abc123", state: "done", progress: 1, result: null, error: null }),
          { status: 200 },
        );
      }
      throw new Error(`unexpected url ${url}`);
    };
    const api = new HttpApi("", fetchFn, 1);
    const payload = await api.clusters("2016-01-11", "2016-03-05");
    expect(payload.points.length).toBe(data.clusters.points.length);
    expect(calls.filter((u) => u.includes("/api/jobs/")).length).toBe(1);
    expect(clusterHits).toBe(2);
  });
});
