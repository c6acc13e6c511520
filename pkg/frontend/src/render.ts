/**
 * Render a PlotSpec to an SVG string with echarts in server-side mode.
 *
 * Every (input, column) pair becomes one line series carrying its own
 * [x, y] points, so inputs with mismatched time grids are overlaid as-is,
 * never interpolated onto a common grid.
 */

import * as echarts from "echarts";

import { readCsv, requireColumn } from "./csv";
import { PlotSpec } from "./spec";

const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
  "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
];

export interface Series {
  name: string;
  points: [number, number][];
}

export function collectSeries(spec: PlotSpec): Series[] {
  const out: Series[] = [];
  for (const input of spec.inputs) {
    const table = readCsv(input.path);
    const xs = requireColumn(table, spec.xcolumn, input.path);
    for (const column of spec.columns) {
      const ys = requireColumn(table, column, input.path);
      const points: [number, number][] = [];
      for (let i = 0; i < xs.length; i++) {
        if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) continue; // nan rows (e.g. lift/drag warm-up)
        if (spec.yscale === "log" && ys[i] <= 0) continue;
        points.push([xs[i], ys[i]]);
      }
      const name =
        spec.columns.length > 1 ? `${input.label}: ${column}` : input.label;
      out.push({ name, points });
    }
  }
  return out;
}

export function buildOption(spec: PlotSpec, series: Series[]): echarts.EChartsOption {
  const yAxis: Record<string, unknown> = {
    type: spec.yscale === "log" ? "log" : "value",
    name: spec.ylabel,
    nameLocation: "middle",
    nameGap: 55,
    axisLine: { show: true },
  };
  if (spec.ylim) {
    yAxis.min = spec.ylim[0];
    yAxis.max = spec.ylim[1];
  }
  return {
    animation: false,
    backgroundColor: "#ffffff",
    title: { text: spec.title, left: "center" },
    legend: { bottom: 0 },
    grid: { left: 75, right: 25, top: 45, bottom: 60 },
    xAxis: {
      type: "value",
      name: spec.xlabel,
      nameLocation: "middle",
      nameGap: 28,
      min: "dataMin",
      max: "dataMax",
      axisLine: { show: true },
    },
    yAxis: yAxis as never,
    color: PALETTE,
    series: series.map((s) => ({
      name: s.name,
      type: "line",
      showSymbol: false,
      data: s.points,
      lineStyle: { width: 1.6 },
    })),
  };
}

export function render(spec: PlotSpec): string {
  const series = collectSeries(spec);
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: spec.width,
    height: spec.height,
  });
  try {
    chart.setOption(buildOption(spec, series));
    return chart.renderToSVGString();
  } finally {
    chart.dispose();
  }
}
