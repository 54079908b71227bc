import { extent } from "d3-array";
import { scaleLinear } from "d3-scale";
import { select, type Selection as D3Selection } from "d3-selection";
import { line } from "d3-shape";

import { correlationColor } from "./scales";
import type { CorrelationsPayload, RollingPoint } from "./types";

const CELL = 52;
const GAP = 3;
const LABEL = 86;
const N = 10;
export const DIAGONAL_FILL = "#d9d9d9";
export const UNDEFINED_FILL = "#f3f1ec";

/**
 * Composite 10x10 factor matrix. Upper-right cells: period-correlation color
 * (red positive, blue negative, saturation ~ |rho|) with an embedded rolling
 * sparkline on a y-scale shared across the whole view. Diagonal cells: gray
 * background with the factor's accumulated-return line. The lower-left
 * triangle hosts the enlarged detail of whichever block is hovered.
 */
export class CorrelationView {
  readonly svg: SVGSVGElement;
  onCellHover?: (j: number, k: number) => void;

  private payload: CorrelationsPayload | null = null;
  private root: D3Selection<SVGSVGElement, unknown, null, undefined>;

  constructor(container: HTMLElement) {
    const side = LABEL + N * (CELL + GAP);
    this.svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    this.svg.setAttribute("class", "correlation-view");
    this.svg.setAttribute("viewBox", `0 0 ${side} ${side}`);
    container.appendChild(this.svg);
    this.root = select(this.svg);
    const defs = this.root.append("defs");
    const hatch = defs.append("pattern")
      .attr("id", "undefined-hatch").attr("width", 6).attr("height", 6)
      .attr("patternUnits", "userSpaceOnUse").attr("patternTransform", "rotate(45)");
    hatch.append("rect").attr("width", 6).attr("height", 6).attr("fill", UNDEFINED_FILL);
    hatch.append("line").attr("x1", 0).attr("y1", 0).attr("x2", 0).attr("y2", 6)
      .attr("stroke", "#b9b2a4").attr("stroke-width", 1.5);
    this.root.append("g").attr("class", "cells");
    this.root.append("g").attr("class", "labels");
    this.root.append("g").attr("class", "detail-panel")
      .attr("transform", `translate(${LABEL}, ${LABEL + 5.2 * (CELL + GAP)})`);
  }

  private cellOrigin(j: number, k: number): [number, number] {
    // rows top-to-bottom and columns left-to-right in catalog order
    return [LABEL + k * (CELL + GAP), LABEL + j * (CELL + GAP)];
  }

  render(payload: CorrelationsPayload): void {
    this.payload = payload;
    const cells = this.root.select<SVGGElement>("g.cells");
    cells.selectAll("*").remove();
    const labels = this.root.select<SVGGElement>("g.labels");
    labels.selectAll("*").remove();

    for (let s = 0; s < N; s++) {
      const [cx] = this.cellOrigin(0, s);
      labels.append("text").attr("class", "col-label")
        .attr("x", cx + CELL / 2).attr("y", LABEL - 8)
        .attr("text-anchor", "start")
        .attr("transform", `rotate(-55, ${cx + CELL / 2}, ${LABEL - 8})`)
        .attr("font-size", 10).text(payload.factors[s]);
      const [, ry] = this.cellOrigin(s, 0);
      labels.append("text").attr("class", "row-label")
        .attr("x", LABEL - 8).attr("y", ry + CELL / 2 + 3)
        .attr("text-anchor", "end").attr("font-size", 10).text(payload.factors[s]);
    }

    const rollingExtent = this.rollingExtent(payload);
    const cumulativeExtent = this.cumulativeExtent(payload);

    for (let j = 0; j < N; j++) {
      for (let k = j; k < N; k++) {
        const [x, y] = this.cellOrigin(j, k);
        const group = cells.append("g")
          .attr("class", j === k ? "cell diagonal" : "cell pair")
          .attr("data-j", j).attr("data-k", k)
          .attr("transform", `translate(${x}, ${y})`);
        const rho = payload.period_matrix[j][k];
        let fill: string;
        let cls = "";
        if (j === k) {
          fill = DIAGONAL_FILL;
        } else if (rho === null) {
          fill = "url(#undefined-hatch)";
          cls = "undefined-cell";
        } else {
          fill = correlationColor(rho);
        }
        const rect = group.append("rect")
          .attr("class", `cell-bg ${cls}`.trim())
          .attr("width", CELL).attr("height", CELL)
          .attr("fill", fill);
        if (rho !== null && j !== k) rect.attr("data-rho", rho);
        if (cls) {
          group.append("title").text("insufficient data");
        }
        const series = j === k
          ? payload.cumulative_factor_returns[payload.factors[j]]
              .map((p) => ({ date: p.date, value: p.value as number | null }))
          : payload.rolling[`${j},${k}`];
        const yExtent = j === k ? cumulativeExtent : rollingExtent;
        const path = this.sparkPath(series, CELL, CELL, yExtent);
        group.append("path").attr("class", j === k ? "spark cumulative" : "spark rolling")
          .attr("d", path).attr("fill", "none")
          .attr("stroke", j === k ? "#444" : "#333")
          .attr("stroke-width", 1);
        group.on("mouseenter", () => {
          this.renderDetail(j, k);
          this.onCellHover?.(j, k);
        });
      }
    }
  }

  private rollingExtent(payload: CorrelationsPayload): [number, number] {
    // unified vertical scale across every rolling sparkline in the view
    let lo = Infinity;
    let hi = -Infinity;
    for (const series of Object.values(payload.rolling)) {
      for (const point of series) {
        if (point.value === null) continue;
        lo = Math.min(lo, point.value);
        hi = Math.max(hi, point.value);
      }
    }
    if (!Number.isFinite(lo)) return [-1, 1];
    return lo === hi ? [lo - 1e-6, hi + 1e-6] : [lo, hi];
  }

  private cumulativeExtent(payload: CorrelationsPayload): [number, number] {
    const all = Object.values(payload.cumulative_factor_returns)
      .flat().map((p) => p.value);
    const [lo, hi] = extent(all) as [number, number];
    return lo === hi ? [lo - 1e-6, hi + 1e-6] : [lo, hi];
  }

  private sparkPath(
    series: RollingPoint[], width: number, height: number,
    yExtent: [number, number], pad = 4,
  ): string {
    const x = scaleLinear().domain([0, Math.max(1, series.length - 1)])
      .range([pad, width - pad]);
    const y = scaleLinear().domain(yExtent).range([height - pad, pad]);
    const generator = line<RollingPoint>()
      .defined((p) => p.value !== null)
      .x((_, i) => x(i))
      .y((p) => y(p.value as number));
    return generator(series) ?? "";
  }

  /** Mirror the hovered block into the lower-left detail panel, with axes. */
  renderDetail(j: number, k: number): void {
    if (!this.payload) return;
    const payload = this.payload;
    const panel = this.root.select<SVGGElement>("g.detail-panel");
    panel.selectAll("*").remove();
    const width = 4.4 * (CELL + GAP);
    const height = 4.4 * (CELL + GAP);
    const diagonal = j === k;
    const rho = payload.period_matrix[j][k];
    panel.attr("data-j", j).attr("data-k", k);
    panel.append("rect").attr("class", "detail-bg")
      .attr("width", width).attr("height", height)
      .attr("fill", diagonal ? DIAGONAL_FILL : rho === null
        ? "url(#undefined-hatch)" : correlationColor(rho));
    const series = diagonal
      ? payload.cumulative_factor_returns[payload.factors[j]]
          .map((p) => ({ date: p.date, value: p.value as number | null }))
      : payload.rolling[`${j},${k}`];
    const values = series.map((p) => p.value).filter((v): v is number => v !== null);
    const [lo, hi] = values.length ? (extent(values) as [number, number]) : [-1, 1];
    const yExtent: [number, number] = lo === hi ? [lo - 1e-6, hi + 1e-6] : [lo, hi];
    panel.append("path").attr("class", "detail-line")
      .attr("d", this.sparkPath(series, width, height, yExtent, 14))
      .attr("fill", "none").attr("stroke", "#222").attr("stroke-width", 1.4);
    const y = scaleLinear().domain(yExtent).range([height - 14, 14]);
    for (const tick of y.ticks(4)) {
      panel.append("line").attr("class", "detail-tick")
        .attr("x1", 10).attr("x2", 16).attr("y1", y(tick)).attr("y2", y(tick))
        .attr("stroke", "#222");
      panel.append("text").attr("class", "detail-tick-label")
        .attr("x", 19).attr("y", y(tick) + 3).attr("font-size", 9)
        .text(tick.toPrecision(3));
    }
    const title = diagonal
      ? `${payload.factors[j]} accumulated return`
      : `${payload.factors[j]} vs ${payload.factors[k]}` +
        (rho === null ? " (insufficient data)" : ` rho=${rho.toFixed(2)}`);
    panel.append("text").attr("class", "detail-title")
      .attr("x", 10).attr("y", height - 4).attr("font-size", 10).text(title);
  }
}
