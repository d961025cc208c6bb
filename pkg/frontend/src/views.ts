/** Pure view-model builders.
 *
 * Rendered numbers are the payload values verbatim (String(x)); the client
 * never recomputes solver outputs.
 */

import type {
  CostGridPayload,
  HeatmapPayload,
  MultiLoadReport,
  SolveReport,
  SolveResponse,
} from './types.js';
import { isInfeasible, isMultiLoad, isTimeout } from './types.js';

export interface WeightBar {
  id: string;
  weight: number;
  upper: number;
  atUpper: boolean;
  atLower: boolean;
}

export function weightBars(report: SolveReport): WeightBar[] {
  return report.asset_ids.map((id, i) => ({
    id,
    weight: report.weights[i],
    upper: report.upper_bounds[i],
    atUpper: report.binding_upper.includes(id),
    atLower: report.binding_lower.includes(id),
  }));
}

export interface SummaryRow {
  label: string;
  value: string;
}

export function costSummary(report: SolveReport): SummaryRow[] {
  return [
    { label: 'hourly cost ($/h)', value: String(report.hourly_cost) },
    { label: 'cost per MWh of load', value: String(report.cost_per_mwh_load) },
    { label: 'achieved quantile', value: String(report.achieved_quantile) },
    { label: 'mean score', value: String(report.mean_score) },
    { label: 'over-procurement', value: String(report.over_procurement) },
    { label: 'solver status', value: report.status },
  ];
}

export function multiLoadSummary(report: MultiLoadReport): SummaryRow[] {
  const rows: SummaryRow[] = report.reports.map((r, k) => ({
    label: `load ${r.load} cost ($/h)`,
    value: String(report.costs[k]),
  }));
  rows.push({ label: 'total cost ($/h)', value: String(report.total_cost) });
  return rows;
}

/** Blue-to-amber ramp; the canvas renderer feeds this straight to ImageData. */
export function heatmapImage(payload: HeatmapPayload): {
  width: number;
  height: number;
  rgba: Uint8ClampedArray;
} {
  const width = payload.days;
  const height = payload.hours;
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let h = 0; h < height; h++) {
    for (let d = 0; d < width; d++) {
      const v = Math.min(1, Math.max(0, payload.values[h][d]));
      const o = (h * width + d) * 4;
      rgba[o] = Math.round(30 + 225 * v);
      rgba[o + 1] = Math.round(40 + 160 * v);
      rgba[o + 2] = Math.round(120 - 70 * v);
      rgba[o + 3] = 255;
    }
  }
  return { width, height, rgba };
}

export interface GridTable {
  header: string[];
  rows: string[][];
}

export function gridTable(grid: CostGridPayload): GridTable {
  const header = ['alpha \\ p_c', ...grid.pcs.map((p) => String(p))];
  const rows = grid.alphas.map((alpha, i) => [
    String(alpha),
    ...grid.pcs.map((_, j) => {
      const cell = grid.cost[i][j];
      return cell === null ? 'infeasible' : String(cell);
    }),
  ]);
  return { header, rows };
}

export interface FrontierRow {
  subset: string;
  size: number;
  cost: number;
  shortfallVar: number;
}

/** Reads the frontier CSV emitted by the analysis tooling, unchanged. */
export function parseFrontierCsv(text: string): FrontierRow[] {
  const lines = text.trim().split(/\r?\n/);
  if (lines.length === 0) return [];
  const header = lines[0].split(',');
  const idx = {
    subset: header.indexOf('subset'),
    size: header.indexOf('size'),
    cost: header.indexOf('cost_per_mwh_load'),
    shortfallVar: header.indexOf('shortfall_var'),
  };
  if (Object.values(idx).some((i) => i < 0)) {
    throw new Error('not a frontier CSV: missing columns');
  }
  return lines.slice(1).filter((l) => l.length > 0).map((line) => {
    const cells = line.split(',');
    return {
      subset: cells[idx.subset],
      size: Number(cells[idx.size]),
      cost: Number(cells[idx.cost]),
      shortfallVar: Number(cells[idx.shortfallVar]),
    };
  });
}

export interface ScatterPoint {
  x: number; // normalized shortfall VaR
  y: number; // normalized cost
  size: number;
  label: string;
}

export function frontierScatter(rows: FrontierRow[]): ScatterPoint[] {
  if (rows.length === 0) return [];
  const xs = rows.map((r) => r.shortfallVar);
  const ys = rows.map((r) => r.cost);
  const span = (vals: number[]) => {
    const lo = Math.min(...vals);
    const hi = Math.max(...vals);
    return { lo, width: hi - lo || 1 };
  };
  const sx = span(xs);
  const sy = span(ys);
  return rows.map((r) => ({
    x: (r.shortfallVar - sx.lo) / sx.width,
    y: (r.cost - sy.lo) / sy.width,
    size: r.size,
    label: `${r.subset} (${r.cost})`,
  }));
}

/** Banner text for non-report responses; null clears the banner. */
export function bannerText(resp: SolveResponse): string | null {
  if (isInfeasible(resp)) {
    const q = resp.max_attainable_quantile;
    const suffix = q === null ? '' : ` Maximum attainable quantile: ${q}.`;
    return `Target is infeasible: ${resp.detail}.${suffix}`;
  }
  if (isTimeout(resp)) {
    return `Solve timed out after ${resp.budget_seconds}s; try a smaller request.`;
  }
  return null;
}

/** The single-load report to chart, regardless of strategy. */
export function reportForLoad(resp: SolveResponse, load: number): SolveReport | null {
  if (isInfeasible(resp) || isTimeout(resp)) return null;
  if (isMultiLoad(resp)) {
    return resp.reports.find((r) => r.load === load) ?? resp.reports[0] ?? null;
  }
  return resp as SolveReport;
}
