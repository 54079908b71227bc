import { scaleLinear } from "d3-scale";
import { select } from "d3-selection";

import type { DurationClass, HoldingsPayload } from "./types";

const WIDTH = 760;
const HEIGHT = 320;
const MARGIN = { top: 12, right: 46, bottom: 22, left: 52 };
const CLASSES: DurationClass[] = [">30%", "10-30%", "<10%"];

/**
 * Full-lifespan holdings chart. Background theme river: invested fraction of
 * total value (right axis). Foreground: one stick per held stock per day at
 * its weight level (left axis), connected into lines across continuous
 * holding runs that stop when the stock is sold out. Hover turns a stock's
 * line red and shows its order-book id; the stacked legend highlights stocks
 * by holding-duration class.
 */
export class IndividualView {
  readonly element: HTMLElement;
  private payload: HoldingsPayload | null = null;
  private highlighted: DurationClass | null = null;

  constructor(container: HTMLElement) {
    this.element = document.createElement("div");
    this.element.className = "individual-view";
    this.element.innerHTML = `
      <div class="individual-header">
        <span class="individual-title"></span>
        <span class="individual-span"></span>
      </div>
      <div class="individual-body">
        <div class="legend"></div>
        <svg class="holdings-chart" viewBox="0 0 ${WIDTH} ${HEIGHT}"></svg>
      </div>
      <div class="hover-label" hidden></div>
      <div class="empty-state" hidden>no holdings to display</div>`;
    container.appendChild(this.element);
  }

  get focusedId(): string | null {
    return this.payload?.id ?? null;
  }

  render(payload: HoldingsPayload): void {
    this.payload = payload;
    this.highlighted = null;
    const title = this.element.querySelector(".individual-title")!;
    title.textContent = `portfolio ${payload.id}`;
    const span = this.element.querySelector(".individual-span")!;
    span.textContent = `${payload.lifespan.start} .. ${payload.lifespan.end} (${payload.lifespan.days} days)`;

    const svg = select(this.element.querySelector("svg.holdings-chart") as SVGSVGElement);
    svg.selectAll("*").remove();
    const empty = this.element.querySelector(".empty-state") as HTMLElement;
    const anyPosition = payload.per_day.some((d) => d.positions.length > 0);
    empty.hidden = anyPosition;
    if (!anyPosition) return;

    const n = payload.per_day.length;
    const x = scaleLinear().domain([0, Math.max(1, n - 1)])
      .range([MARGIN.left, WIDTH - MARGIN.right]);
    const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
    const yWeight = scaleLinear()
      .domain([0, Math.max(payload.groups_meta.w_max, 1e-9)])
      .range([HEIGHT - MARGIN.bottom, MARGIN.top]);
    const yInvested = scaleLinear().domain([0, 1]).range([0, plotH]);

    // background theme river, centered vertically, right axis scale
    const mid = MARGIN.top + plotH / 2;
    let upper = "";
    let lower = "";
    payload.per_day.forEach((day, i) => {
      const half = yInvested(day.invested) / 2;
      upper += `${i ? "L" : "M"}${x(i)},${mid - half}`;
      lower = `L${x(i)},${mid + half}` + lower;
    });
    svg.append("path").attr("class", "theme-river")
      .attr("d", upper + lower + "Z")
      .attr("fill", "#dde6f2").attr("stroke", "none");

    // axes: weight ticks left (group boundaries), invested fraction right
    for (const boundary of [0, ...payload.groups_meta.boundaries, payload.groups_meta.w_max]) {
      svg.append("text").attr("class", "y-tick-left")
        .attr("x", 6).attr("y", yWeight(boundary) + 3)
        .attr("font-size", 9).text(`${(100 * boundary).toFixed(1)}%`);
      svg.append("line").attr("class", "gridline")
        .attr("x1", MARGIN.left).attr("x2", WIDTH - MARGIN.right)
        .attr("y1", yWeight(boundary)).attr("y2", yWeight(boundary))
        .attr("stroke", "#eceae4");
    }
    for (const frac of [0, 0.5, 1]) {
      svg.append("text").attr("class", "y-tick-right")
        .attr("x", WIDTH - MARGIN.right + 6)
        .attr("y", mid + yInvested(frac) / 2 + 3)
        .attr("font-size", 9).text(`${Math.round(100 * frac)}%`);
    }

    // per-stock runs of consecutive held days
    const dayIndex = new Map(payload.per_day.map((d, i) => [d.date, i]));
    const stockDays = new Map<string, { i: number; weight: number; group: number }[]>();
    payload.per_day.forEach((day) => {
      for (const pos of day.positions) {
        const entry = stockDays.get(pos.stock_id) ?? [];
        entry.push({ i: dayIndex.get(day.date)!, weight: pos.weight, group: pos.group });
        stockDays.set(pos.stock_id, entry);
      }
    });
    const sticks = svg.append("g").attr("class", "stocks");
    const halfStick = Math.max(1.2, (x(1) - x(0)) * 0.3);
    for (const [stockId, days] of stockDays) {
      const cls = payload.legend.classes[stockId];
      const stockG = sticks.append("g")
        .attr("class", "stock")
        .attr("data-stock", stockId)
        .attr("data-duration-class", cls);
      let run: typeof days = [];
      const flush = () => {
        if (run.length === 0) return;
        const d = run
          .map((p, idx) => `${idx ? "L" : "M"}${x(p.i)},${yWeight(p.weight)}`)
          .join("");
        stockG.append("path").attr("class", "stock-line")
          .attr("d", d).attr("fill", "none")
          .attr("stroke", "#6b7686").attr("stroke-width", 1);
        for (const p of run) {
          stockG.append("line").attr("class", `stick group-${p.group}`)
            .attr("data-group", p.group)
            .attr("x1", x(p.i) - halfStick).attr("x2", x(p.i) + halfStick)
            .attr("y1", yWeight(p.weight)).attr("y2", yWeight(p.weight))
            .attr("stroke", "#39465c").attr("stroke-width", 2);
        }
        run = [];
      };
      days.sort((a, b) => a.i - b.i);
      days.forEach((p, idx) => {
        if (idx > 0 && p.i !== days[idx - 1].i + 1) flush(); // sold out: line stops
        run.push(p);
      });
      flush();
      stockG.on("mouseenter", () => this.hoverStock(stockId));
      stockG.on("mouseleave", () => this.hoverStock(null));
    }

    this.renderLegend(payload);
    this.applyHighlight();
  }

  hoverStock(stockId: string | null): void {
    const label = this.element.querySelector(".hover-label") as HTMLElement;
    for (const g of this.element.querySelectorAll("g.stock")) {
      g.classList.toggle("hovered", g.getAttribute("data-stock") === stockId);
    }
    label.hidden = stockId === null;
    label.textContent = stockId ?? "";
  }

  private renderLegend(payload: HoldingsPayload): void {
    const legend = this.element.querySelector(".legend") as HTMLElement;
    legend.replaceChildren();
    const total = Math.max(1, Object.values(payload.legend.counts).reduce((a, b) => a + b, 0));
    for (const cls of CLASSES) {
      const count = payload.legend.counts[cls] ?? 0;
      const bar = document.createElement("button");
      bar.className = "legend-bar";
      bar.dataset.durationClass = cls;
      bar.style.height = `${8 + Math.round((72 * count) / total)}px`;
      bar.textContent = `${cls} (${count})`;
      bar.addEventListener("click", () => this.toggleHighlight(cls));
      legend.appendChild(bar);
    }
  }

  toggleHighlight(cls: DurationClass): void {
    this.highlighted = this.highlighted === cls ? null : cls;
    this.applyHighlight();
  }

  private applyHighlight(): void {
    for (const bar of this.element.querySelectorAll(".legend-bar")) {
      bar.classList.toggle(
        "active", (bar as HTMLElement).dataset.durationClass === this.highlighted,
      );
    }
    for (const g of this.element.querySelectorAll("g.stock")) {
      const match = this.highlighted !== null &&
        g.getAttribute("data-duration-class") === this.highlighted;
      g.classList.toggle("class-highlight", match);
    }
  }

  highlightedStocks(): string[] {
    return [...this.element.querySelectorAll("g.stock.class-highlight")]
      .map((g) => g.getAttribute("data-stock")!)
      .sort();
  }
}
