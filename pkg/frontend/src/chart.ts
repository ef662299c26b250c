import type { MetricSeries } from "./aggregate.js";

export interface ChartOptions {
  title: string;
  yLabel: string;
  width?: number;
  height?: number;
}

const COLORS: Record<string, string> = {
  ncs: "#d62728",
  airs: "#1f77b4",
  pirs: "#2ca02c",
};
const FALLBACK_COLORS = ["#9467bd", "#ff7f0e", "#8c564b", "#7f7f7f"];

const MARGIN = { top: 48, right: 24, bottom: 52, left: 72 };

function fmt(v: number): string {
  // compact fixed formatting keeps the SVG byte-stable across runs
  return Number(v.toFixed(2)).toString();
}

function tickValues(max: number, count: number): number[] {
  const rawStep = max / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => max / s <= count) ?? rawStep;
  const ticks: number[] = [];
  for (let v = 0; v <= max + step * 1e-9; v += step) ticks.push(v);
  return ticks;
}

function tickLabel(v: number): string {
  if (v >= 10000) return `${Number((v / 1000).toFixed(1))}k`;
  return Number(v.toFixed(3)).toString();
}

/** Render one mean-with-error-bars comparison chart as a standalone SVG. */
export function renderChart(data: MetricSeries, opts: ChartOptions): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 480;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  let yMax = 0;
  for (const s of data.series.values()) {
    s.mean.forEach((m, i) => {
      yMax = Math.max(yMax, m + s.std[i]);
    });
  }
  if (yMax <= 0) yMax = 1;
  yMax *= 1.05;

  const xMin = data.x[0];
  const xMax = data.x[data.x.length - 1];
  const sx = (v: number) =>
    MARGIN.left + (xMax === xMin ? plotW / 2 : ((v - xMin) / (xMax - xMin)) * plotW);
  const sy = (v: number) => MARGIN.top + plotH - (v / yMax) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="24" text-anchor="middle" font-size="16" font-weight="bold">` +
      `${opts.title}</text>`,
  );

  // gridlines and y axis
  for (const t of tickValues(yMax, 6)) {
    const y = sy(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${width - MARGIN.right}" y2="${fmt(y)}" ` +
        `stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-size="11">` +
        `${tickLabel(t)}</text>`,
    );
  }
  // x axis ticks at the sampled vehicle counts
  for (const n of data.x) {
    const x = sx(n);
    parts.push(
      `<line x1="${fmt(x)}" y1="${MARGIN.top + plotH}" x2="${fmt(x)}" ` +
        `y2="${MARGIN.top + plotH + 5}" stroke="#333333" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${fmt(x)}" y="${MARGIN.top + plotH + 20}" text-anchor="middle" font-size="11">` +
        `${n}</text>`,
    );
  }
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top + plotH}" x2="${width - MARGIN.right}" ` +
      `y2="${MARGIN.top + plotH}" stroke="#333333" stroke-width="1"/>`,
  );
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" ` +
      `y2="${MARGIN.top + plotH}" stroke="#333333" stroke-width="1"/>`,
  );
  parts.push(
    `<text x="${width / 2}" y="${height - 14}" text-anchor="middle" font-size="13">` +
      `Number of vehicles</text>`,
  );
  parts.push(
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="13" ` +
      `transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${opts.yLabel}</text>`,
  );

  let fallback = 0;
  let legendY = MARGIN.top + 10;
  for (const [name, s] of data.series) {
    const color = COLORS[name] ?? FALLBACK_COLORS[fallback++ % FALLBACK_COLORS.length];
    const pts = data.x.map((n, i) => `${fmt(sx(n))},${fmt(sy(s.mean[i]))}`).join(" ");
    parts.push(
      `<polyline class="series" data-name="${name}" points="${pts}" fill="none" ` +
        `stroke="${color}" stroke-width="2"/>`,
    );
    data.x.forEach((n, i) => {
      const x = sx(n);
      const y = sy(s.mean[i]);
      if (s.std[i] > 0) {
        const yLo = sy(Math.max(s.mean[i] - s.std[i], 0));
        const yHi = sy(s.mean[i] + s.std[i]);
        parts.push(
          `<line class="errorbar" x1="${fmt(x)}" y1="${fmt(yLo)}" x2="${fmt(x)}" ` +
            `y2="${fmt(yHi)}" stroke="${color}" stroke-width="1.5"/>`,
        );
        for (const yc of [yLo, yHi]) {
          parts.push(
            `<line class="errorcap" x1="${fmt(x - 4)}" y1="${fmt(yc)}" x2="${fmt(x + 4)}" ` +
              `y2="${fmt(yc)}" stroke="${color}" stroke-width="1.5"/>`,
          );
        }
      }
      parts.push(
        `<circle class="marker" cx="${fmt(x)}" cy="${fmt(y)}" r="3.5" fill="${color}"/>`,
      );
    });
    // legend entry
    const lx = width - MARGIN.right - 120;
    parts.push(
      `<line x1="${lx}" y1="${legendY}" x2="${lx + 24}" y2="${legendY}" ` +
        `stroke="${color}" stroke-width="2"/>`,
    );
    parts.push(
      `<text x="${lx + 30}" y="${legendY + 4}" font-size="12">${name.toUpperCase()}</text>`,
    );
    legendY += 18;
  }

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
