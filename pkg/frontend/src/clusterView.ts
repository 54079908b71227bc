import { extent, max } from "d3-array";
import { scaleLinear } from "d3-scale";
import { select, type Selection as D3Selection } from "d3-selection";
import { line } from "d3-shape";

import { returnColor } from "./scales";
import type { ClustersPayload, ClusterPoint } from "./types";

const WIDTH = 640;
const SCATTER_HEIGHT = 460;
const TIMELINE_HEIGHT = 72;
const MARGIN = 24;
export const POINT_RADIUS = 4;
export const BENCHMARK_RADIUS = POINT_RADIUS * 2.25;

/**
 * Strategy-map scatter plus the brushable timeline. Node color encodes the
 * window return (red high, green low); the two benchmark portfolios render as
 * enlarged nodes; the focused portfolio carries a yellow ring.
 */
export class ClusterView {
  readonly svg: SVGSVGElement;
  onPeriodBrushed?: (start: string, end: string) => void;
  onPointsBrushed?: (ids: string[]) => void;

  private payload: ClustersPayload | null = null;
  private positions = new Map<string, { x: number; y: number }>();
  private root: D3Selection<SVGSVGElement, unknown, null, undefined>;
  private dragStartX: number | null = null;

  constructor(container: HTMLElement) {
    this.svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    this.svg.setAttribute("class", "cluster-view");
    this.svg.setAttribute("viewBox", `0 0 ${WIDTH} ${SCATTER_HEIGHT + TIMELINE_HEIGHT}`);
    container.appendChild(this.svg);
    this.root = select(this.svg);
    this.root.append("g").attr("class", "points");
    this.root.append("g").attr("class", "benchmarks");
    this.root
      .append("circle")
      .attr("class", "focus-ring")
      .attr("r", BENCHMARK_RADIUS + 3)
      .attr("fill", "none")
      .attr("stroke", "gold")
      .attr("stroke-width", 2.5)
      .attr("visibility", "hidden");
    const timeline = this.root
      .append("g")
      .attr("class", "timeline")
      .attr("transform", `translate(0, ${SCATTER_HEIGHT})`);
    timeline.append("path").attr("class", "market-line").attr("fill", "none")
      .attr("stroke", "#5a6a85").attr("stroke-width", 1);
    timeline.append("rect").attr("class", "brush-extent")
      .attr("fill", "rgba(90, 120, 190, 0.25)").attr("visibility", "hidden")
      .attr("y", 8).attr("height", TIMELINE_HEIGHT - 16);
    const overlay = timeline.append("rect").attr("class", "brush-overlay")
      .attr("x", MARGIN).attr("y", 0)
      .attr("width", WIDTH - 2 * MARGIN).attr("height", TIMELINE_HEIGHT)
      .attr("fill", "transparent").attr("cursor", "crosshair");
    overlay.on("pointerdown", (event: PointerEvent) => {
      this.dragStartX = this.localX(event);
    });
    overlay.on("pointerup", (event: PointerEvent) => {
      if (this.dragStartX === null || !this.payload) return;
      const [a, b] = [this.dragStartX, this.localX(event)].sort((u, v) => u - v);
      this.dragStartX = null;
      const dates = this.payload.timeline.map((t) => t.date);
      const startIdx = Math.round(this.timelineIndexAt(a));
      const endIdx = Math.round(this.timelineIndexAt(b));
      if (endIdx > startIdx) {
        this.brushTimeline(dates[startIdx], dates[endIdx]);
      }
    });
  }

  private localX(event: PointerEvent): number {
    // offsetX is viewport-relative in jsdom-free browsers; fall back to clientX
    return (event as any).offsetX ?? event.clientX;
  }

  private timelineIndexAt(x: number): number {
    const n = this.payload?.timeline.length ?? 1;
    const t = (x - MARGIN) / (WIDTH - 2 * MARGIN);
    return Math.min(n - 1, Math.max(0, t * (n - 1)));
  }

  render(payload: ClustersPayload): void {
    this.payload = payload;
    const everything = [...payload.points, ...payload.benchmarks];
    const [xMin, xMax] = extent(everything, (p) => p.x) as [number, number];
    const [yMin, yMax] = extent(everything, (p) => p.y) as [number, number];
    const x = scaleLinear().domain([xMin, xMax]).range([MARGIN, WIDTH - MARGIN]);
    const y = scaleLinear().domain([yMin, yMax]).range([SCATTER_HEIGHT - MARGIN, MARGIN]);
    const magnitude = max(everything, (p) => Math.abs(p.cumulative_return)) ?? 0;

    this.positions.clear();
    for (const p of everything) {
      this.positions.set(p.id, { x: x(p.x), y: y(p.y) });
    }

    const join = (g: string, data: ClusterPoint[], cls: string, r: number) =>
      this.root
        .select<SVGGElement>(`g.${g}`)
        .selectAll<SVGCircleElement, ClusterPoint>("circle")
        .data(data, (d) => d.id)
        .join("circle")
        .attr("class", cls)
        .attr("data-id", (d) => d.id)
        .attr("cx", (d) => x(d.x))
        .attr("cy", (d) => y(d.y))
        .attr("r", r)
        .attr("fill", (d) => returnColor(d.cumulative_return, magnitude))
        .attr("stroke", "#49505c")
        .attr("stroke-width", 0.6);
    join("points", payload.points, "point", POINT_RADIUS);
    join("benchmarks", payload.benchmarks, "point benchmark", BENCHMARK_RADIUS);

    const n = payload.timeline.length;
    const tx = scaleLinear().domain([0, Math.max(1, n - 1)]).range([MARGIN, WIDTH - MARGIN]);
    let acc = 1;
    const levels = payload.timeline.map((t) => (acc *= 1 + t.market_return) - 1);
    const [lo, hi] = extent(levels) as [number, number];
    const ty = scaleLinear()
      .domain([Math.min(lo, 0), Math.max(hi, 1e-9)])
      .range([TIMELINE_HEIGHT - 10, 10]);
    const path = line<number>((_, i) => tx(i), (v) => ty(v))(levels) ?? "";
    this.root.select("path.market-line").attr("d", path);
  }

  /** Programmatic timeline brush; the pointer handler funnels through here. */
  brushTimeline(startDate: string, endDate: string): void {
    if (!this.payload) return;
    const dates = this.payload.timeline.map((t) => t.date);
    const i0 = dates.indexOf(startDate);
    const i1 = dates.indexOf(endDate);
    const n = dates.length;
    if (i0 >= 0 && i1 >= 0 && n > 1) {
      const px = (i: number) => MARGIN + (i / (n - 1)) * (WIDTH - 2 * MARGIN);
      this.root.select("rect.brush-extent")
        .attr("visibility", "visible")
        .attr("x", px(i0))
        .attr("width", Math.max(1, px(i1) - px(i0)));
    }
    this.onPeriodBrushed?.(startDate, endDate);
  }

  /** Rectangular brush over the scatter, in viewBox pixel coordinates. */
  brushPoints(x0: number, y0: number, x1: number, y1: number): string[] {
    if (!this.payload) return [];
    const [xa, xb] = [Math.min(x0, x1), Math.max(x0, x1)];
    const [ya, yb] = [Math.min(y0, y1), Math.max(y0, y1)];
    const ids = this.payload.points
      .filter((p) => {
        const pos = this.positions.get(p.id)!;
        return pos.x >= xa && pos.x <= xb && pos.y >= ya && pos.y <= yb;
      })
      .map((p) => p.id);
    if (ids.length > 0) this.onPointsBrushed?.(ids);
    return ids;
  }

  /** Selection rectangle around exactly these points (testing/scripting aid). */
  brushAround(ids: string[]): string[] {
    const pts = ids.map((i) => this.positions.get(i)).filter(Boolean) as { x: number; y: number }[];
    if (!pts.length) return [];
    const pad = 1.5;
    return this.brushPoints(
      Math.min(...pts.map((p) => p.x)) - pad,
      Math.min(...pts.map((p) => p.y)) - pad,
      Math.max(...pts.map((p) => p.x)) + pad,
      Math.max(...pts.map((p) => p.y)) + pad,
    );
  }

  setFocus(id: string | null): void {
    const ring = this.root.select("circle.focus-ring");
    const pos = id ? this.positions.get(id) : undefined;
    if (!pos) {
      ring.attr("visibility", "hidden");
      return;
    }
    ring.attr("visibility", "visible").attr("cx", pos.x).attr("cy", pos.y);
  }

  pointPosition(id: string): { x: number; y: number } | undefined {
    return this.positions.get(id);
  }
}
