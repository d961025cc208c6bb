import { describe, expect, it } from 'vitest';

import {
  bannerText,
  costSummary,
  frontierScatter,
  gridTable,
  heatmapImage,
  parseFrontierCsv,
  reportForLoad,
  weightBars,
} from '../src/views.js';
import type { MultiLoadReport, SolveReport } from '../src/types.js';

const report: SolveReport = {
  load: 0,
  p_c: 0.9,
  alpha: 0.95,
  asset_ids: ['sol1', 'win1', 'hyd'],
  weights: [0.228, 1.0, 0.0],
  upper_bounds: [1, 1, 1],
  hourly_cost: 3111.52,
  cost_per_mwh_load: 74.268,
  achieved_quantile: 0.9,
  mean_score: 0.9123,
  over_procurement: 1.253,
  binding_lower: ['hyd'],
  binding_upper: ['win1'],
  quantile_active: true,
  status: 'converged',
  iterations: 12,
};

describe('weight bars', () => {
  it('carry payload weights and binding flags', () => {
    const bars = weightBars(report);
    expect(bars.map((b) => b.weight)).toEqual([0.228, 1.0, 0.0]);
    expect(bars[1].atUpper).toBe(true);
    expect(bars[2].atLower).toBe(true);
    expect(bars[0].atUpper).toBe(false);
  });
});

describe('cost summary', () => {
  it('renders payload values verbatim, no reformatting', () => {
    const rows = costSummary(report);
    const byLabel = Object.fromEntries(rows.map((r) => [r.label, r.value]));
    expect(byLabel['cost per MWh of load']).toBe('74.268');
    expect(byLabel['over-procurement']).toBe('1.253');
    expect(byLabel['solver status']).toBe('converged');
  });
});

describe('heatmap image', () => {
  it('is fully saturated for an all-ones payload', () => {
    const image = heatmapImage({
      load: 0,
      hours: 2,
      days: 3,
      values: [
        [1, 1, 1],
        [1, 1, 1],
      ],
    });
    expect(image.width).toBe(3);
    expect(image.height).toBe(2);
    const first = image.rgba.slice(0, 4);
    for (let px = 0; px < 6; px++) {
      expect(Array.from(image.rgba.slice(px * 4, px * 4 + 4))).toEqual(
        Array.from(first),
      );
    }
    expect(first[3]).toBe(255);
  });

  it('distinguishes zero from one', () => {
    const image = heatmapImage({ load: 0, hours: 1, days: 2, values: [[0, 1]] });
    expect(image.rgba[0]).not.toBe(image.rgba[4]);
  });
});

describe('grid table', () => {
  it('renders infeasible cells as text, numbers verbatim', () => {
    const table = gridTable({
      alphas: [0.5, 0.9],
      pcs: [0.7, 0.95],
      cost: [
        [33.53, 92.55],
        [33.92, null],
      ],
      status: [
        ['converged', 'converged'],
        ['converged', 'infeasible'],
      ],
    });
    expect(table.header).toEqual(['alpha \\ p_c', '0.7', '0.95']);
    expect(table.rows[0]).toEqual(['0.5', '33.53', '92.55']);
    expect(table.rows[1][2]).toBe('infeasible');
  });
});

describe('frontier csv', () => {
  const csv = [
    'subset,size,cost_per_mwh_load,shortfall_var',
    'sol0;win0;hyd,3,44.63,0.41',
    'sol0;sol1;win0;win1;hyd,5,38.9,0.22',
  ].join('\n');

  it('parses the analysis emitter format unchanged', () => {
    const rows = parseFrontierCsv(csv);
    expect(rows).toHaveLength(2);
    expect(rows[1]).toEqual({
      subset: 'sol0;sol1;win0;win1;hyd',
      size: 5,
      cost: 38.9,
      shortfallVar: 0.22,
    });
  });

  it('rejects unrelated CSVs', () => {
    expect(() => parseFrontierCsv('a,b\n1,2')).toThrow(/frontier/);
  });

  it('normalizes scatter coordinates into the unit square', () => {
    const points = frontierScatter(parseFrontierCsv(csv));
    for (const p of points) {
      expect(p.x).toBeGreaterThanOrEqual(0);
      expect(p.x).toBeLessThanOrEqual(1);
      expect(p.y).toBeGreaterThanOrEqual(0);
      expect(p.y).toBeLessThanOrEqual(1);
    }
  });
});

describe('banner and report selection', () => {
  it('surfaces the max attainable quantile for infeasible targets', () => {
    const text = bannerText({
      status: 'infeasible',
      detail: 'beyond reach',
      max_attainable_quantile: 0.9934,
      load: 0,
    });
    expect(text).toContain('0.9934');
  });

  it('is null for solve reports', () => {
    expect(bannerText(report)).toBeNull();
  });

  it('selects the matching per-load report from multi-load payloads', () => {
    const multi: MultiLoadReport = {
      strategy: 'joint',
      reports: [report, { ...report, load: 1 }],
      costs: [3111.52, 2800.0],
      total_cost: 5911.52,
    };
    expect(reportForLoad(multi, 1)?.load).toBe(1);
    expect(reportForLoad(multi, 0)?.load).toBe(0);
    expect(reportForLoad(report, 0)).toBe(report);
  });
});
