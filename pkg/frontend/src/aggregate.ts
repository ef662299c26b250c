import { readFileSync } from "fs";
import Papa from "papaparse";

export const REQUIRED_COLUMNS = [
  "strategy",
  "n_vehicles",
  "metric",
  "mean",
  "std",
  "n_reps",
] as const;

export interface AggregateRow {
  strategy: string;
  n_vehicles: number;
  metric: string;
  mean: number;
  std: number;
  n_reps: number;
}

/** One chartable metric pivoted into per-strategy series over vehicle count. */
export interface MetricSeries {
  metric: string;
  x: number[];
  series: Map<string, { mean: number[]; std: number[] }>;
}

export class SchemaError extends Error {}

// Strategies are drawn in this order when present; anything else follows
// alphabetically so output stays deterministic for arbitrary CSVs.
const STRATEGY_ORDER = ["ncs", "airs", "pirs"];

export function strategyOrder(names: Iterable<string>): string[] {
  const all = [...new Set(names)];
  const known = STRATEGY_ORDER.filter((s) => all.includes(s));
  const rest = all.filter((s) => !STRATEGY_ORDER.includes(s)).sort();
  return [...known, ...rest];
}

export function parseAggregate(text: string): AggregateRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaError(`CSV parse error: ${first.message} (row ${first.row})`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of REQUIRED_COLUMNS) {
    if (!fields.includes(col)) {
      throw new SchemaError(`aggregate.csv is missing required column "${col}"`);
    }
  }
  if (parsed.data.length === 0) {
    throw new SchemaError("aggregate.csv contains no data rows");
  }
  return parsed.data.map((raw, i) => {
    const row: AggregateRow = {
      strategy: raw.strategy,
      n_vehicles: Number(raw.n_vehicles),
      metric: raw.metric,
      mean: Number(raw.mean),
      std: Number(raw.std),
      n_reps: Number(raw.n_reps),
    };
    for (const key of ["n_vehicles", "mean", "std", "n_reps"] as const) {
      if (!Number.isFinite(row[key])) {
        throw new SchemaError(`non-numeric ${key} value "${raw[key]}" on data row ${i + 1}`);
      }
    }
    return row;
  });
}

export function loadAggregate(path: string): AggregateRow[] {
  return parseAggregate(readFileSync(path, "utf8"));
}

/** Pivot rows of one metric into aligned x/mean/std arrays per strategy. */
export function pivotMetric(rows: AggregateRow[], metric: string): MetricSeries {
  const mine = rows.filter((r) => r.metric === metric);
  if (mine.length === 0) {
    throw new SchemaError(`no rows found for metric "${metric}"`);
  }
  const x = [...new Set(mine.map((r) => r.n_vehicles))].sort((a, b) => a - b);
  const series = new Map<string, { mean: number[]; std: number[] }>();
  for (const name of strategyOrder(mine.map((r) => r.strategy))) {
    const mean: number[] = [];
    const std: number[] = [];
    for (const n of x) {
      const row = mine.find((r) => r.strategy === name && r.n_vehicles === n);
      if (!row) {
        throw new SchemaError(`strategy "${name}" has no ${metric} row at n_vehicles=${n}`);
      }
      mean.push(row.mean);
      std.push(row.std);
    }
    series.set(name, { mean, std });
  }
  return { metric, x, series };
}

/**
 * Divide every series by the ncs value at the same x. Error bars scale by
 * the same factor, so relative spread is preserved.
 */
export function normalizeToNcs(data: MetricSeries): MetricSeries {
  const base = data.series.get("ncs");
  if (!base) {
    throw new SchemaError(`cannot normalize ${data.metric}: no "ncs" series present`);
  }
  const series = new Map<string, { mean: number[]; std: number[] }>();
  for (const [name, s] of data.series) {
    series.set(name, {
      mean: s.mean.map((v, i) => (base.mean[i] === 0 ? 0 : v / base.mean[i])),
      std: s.std.map((v, i) => (base.mean[i] === 0 ? 0 : v / base.mean[i])),
    });
  }
  return { metric: data.metric, x: data.x, series };
}
