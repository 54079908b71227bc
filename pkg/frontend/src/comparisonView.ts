import { extent } from "d3-array";
import { scaleLinear } from "d3-scale";
import { select } from "d3-selection";
import { line } from "d3-shape";

import { signatureRadius, wasClipped } from "./scales";
import type { OverviewPayload } from "./types";

const SIG_SIZE = 150;
const SIG_INNER = 14;
const SIG_OUTER = 68;
export const HORIZON_FOLDS = 3; // folds per mirror side of each band
const HORIZON_BAND_HEIGHT = 15;
const HORIZON_WIDTH = 220;
const RETURNS_HEIGHT = 90;
export const MAX_REGIONS = 8;

/**
 * Horizontally juxtaposed regions, one per brushed cluster: member cumulative
 * returns on top, then one overview per portfolio (factor signature over ten
 * circular axes with one translucent polyline per trading day, and a 7-band
 * sector horizon graph). Clicking a portfolio id focuses it.
 */
export class ComparisonView {
  readonly element: HTMLElement;
  onIdClick?: (id: string) => void;

  constructor(container: HTMLElement) {
    this.element = document.createElement("div");
    this.element.className = "comparison-view";
    container.appendChild(this.element);
  }

  get regionCount(): number {
    return this.element.querySelectorAll(".region").length;
  }

  clear(): void {
    this.element.replaceChildren();
  }

  setFocus(id: string | null): void {
    for (const block of this.element.querySelectorAll(".overview")) {
      block.classList.toggle("focused", (block as HTMLElement).dataset.id === id);
    }
  }

  addRegion(selectionIndex: number, overviews: OverviewPayload[]): HTMLElement {
    const region = document.createElement("div");
    region.className = "region";
    region.dataset.selection = String(selectionIndex);
    this.element.appendChild(region);
    if (this.regionCount > MAX_REGIONS) {
      this.element.classList.add("scrolling"); // beyond 8 regions: scroll
    }

    region.appendChild(this.returnsChart(overviews));
    for (const overview of overviews) {
      region.appendChild(this.overviewBlock(overview));
    }
    return region;
  }

  private returnsChart(overviews: OverviewPayload[]): SVGSVGElement {
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("class", "region-returns");
    svg.setAttribute("viewBox", `0 0 ${HORIZON_WIDTH} ${RETURNS_HEIGHT}`);
    const all = overviews.flatMap((o) => o.cumulative_return.map((p) => p.value));
    const [lo, hi] = all.length ? (extent(all) as [number, number]) : [0, 1];
    const y = scaleLinear()
      .domain([Math.min(lo, 0), Math.max(hi, 1e-9)])
      .range([RETURNS_HEIGHT - 6, 6]);
    const root = select(svg);
    for (const overview of overviews) {
      const x = scaleLinear()
        .domain([0, Math.max(1, overview.cumulative_return.length - 1)])
        .range([4, HORIZON_WIDTH - 4]);
      const path = line<{ value: number }>((_, i) => x(i), (p) => y(p.value))(
        overview.cumulative_return,
      );
      root.append("path")
        .attr("class", "member-return")
        .attr("data-id", overview.id)
        .attr("d", path ?? "")
        .attr("fill", "none")
        .attr("stroke", "#3c5a8f")
        .attr("stroke-opacity", 0.75)
        .attr("stroke-width", 1);
    }
    return svg;
  }

  private overviewBlock(overview: OverviewPayload): HTMLElement {
    const block = document.createElement("div");
    block.className = "overview";
    block.dataset.id = overview.id;

    const header = document.createElement("button");
    header.className = "portfolio-id";
    header.textContent = overview.id;
    header.addEventListener("click", () => this.onIdClick?.(overview.id));
    block.appendChild(header);

    block.appendChild(this.signature(overview));
    block.appendChild(this.horizon(overview));
    return block;
  }

  /** Ten co-centric circular axes; one closed polyline per trading day. */
  private signature(overview: OverviewPayload): SVGSVGElement {
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("class", "signature");
    svg.setAttribute("viewBox", `0 0 ${SIG_SIZE} ${SIG_SIZE}`);
    const root = select(svg);
    const center = SIG_SIZE / 2;
    for (const level of [-3, -1.5, 0, 1.5, 3]) {
      root.append("circle")
        .attr("class", level === 0 ? "ring zero-ring" : "ring")
        .attr("cx", center).attr("cy", center)
        .attr("r", signatureRadius(level, SIG_INNER, SIG_OUTER))
        .attr("fill", "none")
        .attr("stroke", level === 0 ? "#8a8a8a" : "#d5d2ca")
        .attr("stroke-width", level === 0 ? 1.2 : 0.7);
    }
    const angle = (s: number) => (s / 10) * 2 * Math.PI - Math.PI / 2;
    for (let s = 0; s < 10; s++) {
      root.append("line").attr("class", "axis")
        .attr("x1", center + SIG_INNER * Math.cos(angle(s)))
        .attr("y1", center + SIG_INNER * Math.sin(angle(s)))
        .attr("x2", center + SIG_OUTER * Math.cos(angle(s)))
        .attr("y2", center + SIG_OUTER * Math.sin(angle(s)))
        .attr("stroke", "#d5d2ca").attr("stroke-width", 0.7);
    }
    for (const day of overview.signature) {
      const points = day.exposures.map((value, s) => {
        const radius = signatureRadius(value, SIG_INNER, SIG_OUTER);
        return `${center + radius * Math.cos(angle(s))},${center + radius * Math.sin(angle(s))}`;
      });
      const clipped = day.exposures.some(wasClipped);
      root.append("path")
        .attr("class", clipped ? "day-line clipped" : "day-line")
        .attr("data-date", day.date)
        .attr("d", `M${points.join("L")}Z`)
        .attr("fill", "none")
        .attr("stroke", "#1f3f7a")
        .attr("stroke-opacity", 0.13) // overlap reads as darkness
        .attr("stroke-width", 1);
    }
    return svg;
  }

  /** Sector horizon graph: cash + top-5 + rest, folded HORIZON_FOLDS deep. */
  private horizon(overview: OverviewPayload): SVGSVGElement {
    const bands = overview.sectors.bands;
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    svg.setAttribute("class", "horizon");
    svg.setAttribute(
      "viewBox", `0 0 ${HORIZON_WIDTH} ${bands.length * HORIZON_BAND_HEIGHT}`,
    );
    const root = select(svg);
    const series = overview.sectors.series;
    const n = series.length;
    const x = scaleLinear().domain([0, Math.max(1, n - 1)]).range([0, HORIZON_WIDTH]);
    const peak = Math.max(1e-9, ...series.flatMap((d) => d.values));
    const step = peak / HORIZON_FOLDS;

    bands.forEach((name, b) => {
      const top = b * HORIZON_BAND_HEIGHT;
      const group = root.append("g")
        .attr("class", "band")
        .attr("data-band", name)
        .attr("transform", `translate(0, ${top})`);
      group.append("rect").attr("class", "band-bg")
        .attr("width", HORIZON_WIDTH).attr("height", HORIZON_BAND_HEIGHT - 1)
        .attr("fill", "#f6f4ef");
      for (let fold = 0; fold < HORIZON_FOLDS; fold++) {
        const top_of = (value: number) => {
          const layer = Math.min(Math.max(value - fold * step, 0), step) / step;
          return (HORIZON_BAND_HEIGHT - 1) * (1 - layer);
        };
        let path = `M0,${HORIZON_BAND_HEIGHT - 1}`;
        series.forEach((day, i) => {
          path += `L${x(i)},${top_of(day.values[b])}`;
        });
        path += `L${HORIZON_WIDTH},${HORIZON_BAND_HEIGHT - 1}Z`;
        group.append("path")
          .attr("class", `fold fold-${fold}`)
          .attr("d", path)
          .attr("fill", "#4d7cba")
          .attr("fill-opacity", 0.28 + 0.3 * fold);
      }
      group.append("text").attr("class", "band-label")
        .attr("x", 3).attr("y", HORIZON_BAND_HEIGHT - 4)
        .attr("font-size", 8).attr("fill", "#56524a")
        .text(name);
    });
    return svg;
  }
}
