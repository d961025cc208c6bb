/** Wire types mirroring the service JSON payloads, field for field. */

export interface AssetInfo {
  id: string;
  kind: string;
  capacity: number;
  cost: number;
  deterministic: boolean;
  avg_generation: number;
}

export interface Universe {
  assets: AssetInfo[];
  load_ids: string[];
  n_scenarios: number;
  n_hours: number;
}

export interface SolveReport {
  load: number;
  p_c: number;
  alpha: number;
  asset_ids: string[];
  weights: number[];
  upper_bounds: number[];
  hourly_cost: number;
  cost_per_mwh_load: number;
  achieved_quantile: number;
  mean_score: number;
  over_procurement: number;
  binding_lower: string[];
  binding_upper: string[];
  quantile_active: boolean;
  status: string;
  iterations: number;
}

export interface MultiLoadReport {
  strategy: string;
  reports: SolveReport[];
  costs: number[];
  total_cost: number;
}

export interface CostGridPayload {
  alphas: number[];
  pcs: number[];
  cost: (number | null)[][];
  status: string[][];
}

export interface HeatmapPayload {
  load: number;
  hours: number;
  days: number;
  values: number[][];
}

export interface WindowPayload {
  load: number;
  scenario: number;
  day: number;
  days: number;
  asset_ids: string[];
  series: number[][];
  portfolio: number[];
  load_mw: number[];
}

export interface InfeasiblePayload {
  status: 'infeasible';
  detail: string;
  max_attainable_quantile: number | null;
  load: number | null;
}

export interface TimeoutPayload {
  status: 'timeout';
  detail: string;
  budget_seconds: number;
}

export type SolveResponse = SolveReport | MultiLoadReport | InfeasiblePayload | TimeoutPayload;

export function isInfeasible(resp: SolveResponse): resp is InfeasiblePayload {
  return (resp as InfeasiblePayload).status === 'infeasible';
}

export function isTimeout(resp: SolveResponse): resp is TimeoutPayload {
  return (resp as TimeoutPayload).status === 'timeout';
}

export function isMultiLoad(resp: SolveResponse): resp is MultiLoadReport {
  return Array.isArray((resp as MultiLoadReport).reports);
}
