/** Dashboard orchestration: state changes debounce into solve requests whose
 * responses re-render the views; stale responses are discarded by sequence
 * number.  DOM-free so the whole flow is unit-testable.
 */

import { DebouncedRequests } from './scheduler.js';
import {
  SessionState,
  Strategy,
  buildSolveRequest,
  decodeState,
  defaultState,
  encodeState,
  heatmapQuery,
  windowQuery,
} from './state.js';
import type {
  HeatmapPayload,
  SolveReport,
  SolveResponse,
  Universe,
  WindowPayload,
} from './types.js';
import { bannerText, reportForLoad } from './views.js';

export type FetchJson = (path: string, body?: string) => Promise<unknown>;

export interface RenderHooks {
  renderReport(resp: SolveResponse, chartReport: SolveReport): void;
  renderHeatmap(payload: HeatmapPayload): void;
  renderWindow(payload: WindowPayload): void;
  renderBanner(message: string | null): void;
  renderBusy(busy: boolean): void;
  onUrlChange(query: string): void;
}

export class DashboardController {
  state: SessionState;
  lastReport: SolveReport | null = null;
  scenario = 0;
  day = 0;
  windowDays = 2;

  private requests: DebouncedRequests;

  constructor(
    readonly universe: Universe,
    private readonly hooks: RenderHooks,
    private readonly fetchJson: FetchJson,
    initialQuery = '',
    debounceMs = 300,
  ) {
    this.state = initialQuery
      ? decodeState(initialQuery, universe)
      : defaultState(universe);
    this.requests = new DebouncedRequests(debounceMs);
  }

  get urlQuery(): string {
    return encodeState(this.state, this.universe);
  }

  setPc(value: number): void {
    this.state.pC = value;
    this.queueSolve();
  }

  setAlpha(value: number): void {
    this.state.alpha = value;
    this.queueSolve();
  }

  setLoad(load: number): void {
    this.state.load = load;
    this.queueSolve();
  }

  setStrategy(strategy: Strategy): void {
    this.state.strategy = strategy;
    this.queueSolve();
  }

  setAsset(id: string, selected: boolean, upper: number): void {
    this.state.assets[id] = { selected, upper };
    this.queueSolve();
  }

  setWindow(scenario: number, day: number, days: number): void {
    this.scenario = scenario;
    this.day = day;
    this.windowDays = days;
    if (this.lastReport) void this.refreshCharts(this.lastReport);
  }

  /** Debounced entry point used by every control change. */
  queueSolve(): void {
    this.hooks.onUrlChange(this.urlQuery);
    this.requests.schedule((seq) => void this.issue(seq));
  }

  private async issue(seq: number): Promise<void> {
    const { path, body } = buildSolveRequest(this.state, this.universe);
    this.hooks.renderBusy(true);
    try {
      const resp = (await this.fetchJson(path, body)) as SolveResponse;
      if (!this.requests.isCurrent(seq)) return; // superseded while in flight
      const banner = bannerText(resp);
      this.hooks.renderBanner(banner);
      if (banner !== null) return; // infeasible/timeout: keep previous charts
      const chartReport = reportForLoad(resp, this.state.load);
      if (!chartReport) return;
      this.lastReport = chartReport;
      this.hooks.renderReport(resp, chartReport);
      await this.refreshCharts(chartReport);
    } finally {
      if (this.requests.isCurrent(seq)) this.hooks.renderBusy(false);
    }
  }

  private async refreshCharts(report: SolveReport): Promise<void> {
    const heatmap = (await this.fetchJson(
      heatmapQuery(report.load, report.weights),
    )) as HeatmapPayload;
    this.hooks.renderHeatmap(heatmap);
    const maxDay = Math.floor(this.universe.n_hours / 24) - this.windowDays;
    const day = Math.max(0, Math.min(this.day, maxDay));
    const window = (await this.fetchJson(
      windowQuery(report.load, report.weights, this.scenario, day, this.windowDays),
    )) as WindowPayload;
    this.hooks.renderWindow(window);
  }
}
