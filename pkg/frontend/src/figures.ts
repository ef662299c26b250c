import { mkdirSync, writeFileSync } from "fs";
import { join } from "path";

import { loadAggregate, normalizeToNcs, pivotMetric } from "./aggregate.js";
import { renderChart } from "./chart.js";

export interface FigureSpec {
  metric: string;
  title: string;
  yLabel: string;
  filename: string;
}

export const FIGURES: FigureSpec[] = [
  {
    metric: "failed_pct",
    title: "Failed tasks by vehicle density",
    yLabel: "Failed tasks (%)",
    filename: "failed_pct.svg",
  },
  {
    metric: "failed_length_gi",
    title: "Failed task length by vehicle density",
    yLabel: "Failed task length (GI)",
    filename: "failed_length.svg",
  },
  {
    metric: "offload_pct",
    title: "Tasks offloaded to edge and cloud",
    yLabel: "Offloaded tasks (%)",
    filename: "offload_pct.svg",
  },
  {
    metric: "offloaded_length_gi",
    title: "Offloaded task length by vehicle density",
    yLabel: "Offloaded task length (GI)",
    filename: "offloaded_length.svg",
  },
];

export function renderAll(csvPath: string, outDir: string, normalize = false): string[] {
  const rows = loadAggregate(csvPath);
  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  for (const fig of FIGURES) {
    let data = pivotMetric(rows, fig.metric);
    let yLabel = fig.yLabel;
    if (normalize) {
      data = normalizeToNcs(data);
      yLabel = `${fig.yLabel}, relative to NCS`;
    }
    const svg = renderChart(data, { title: fig.title, yLabel });
    const path = join(outDir, fig.filename);
    writeFileSync(path, svg);
    written.push(path);
  }
  return written;
}
