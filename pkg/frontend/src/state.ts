/** Session state, its URL query encoding, and the canonical request bodies.
 *
 * The request body is built through JSON.stringify over literals with a fixed
 * key layout, so the same state always yields the same bytes; reloading a
 * shared URL therefore reproduces the request body exactly.
 */

import type { Universe } from './types.js';

export type Strategy = 'single' | 'sequential' | 'split' | 'joint';

export interface AssetSetting {
  selected: boolean;
  upper: number; // procurement cap slider in [0, 1]
}

export interface SessionState {
  pC: number;
  alpha: number;
  load: number;
  strategy: Strategy;
  assets: Record<string, AssetSetting>;
}

const STRATEGIES: Strategy[] = ['single', 'sequential', 'split', 'joint'];

/** Sliders deal in hundredths; keep every number on that lattice. */
export function quantize(value: number): number {
  return Math.round(value * 100) / 100;
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

export function defaultState(universe: Universe): SessionState {
  const assets: Record<string, AssetSetting> = {};
  for (const a of universe.assets) assets[a.id] = { selected: true, upper: 1 };
  return { pC: 0.9, alpha: 0.95, load: 0, strategy: 'single', assets };
}

export function encodeState(state: SessionState, universe: Universe): string {
  const parts = universe.assets.map((a) => {
    const setting = state.assets[a.id] ?? { selected: true, upper: 1 };
    return `${setting.selected ? '' : '!'}${a.id}:${quantize(setting.upper)}`;
  });
  const params = new URLSearchParams();
  params.set('pc', String(quantize(state.pC)));
  params.set('alpha', String(quantize(state.alpha)));
  params.set('load', String(state.load));
  params.set('strategy', state.strategy);
  params.set('assets', parts.join(','));
  return params.toString();
}

export function decodeState(query: string, universe: Universe): SessionState {
  const params = new URLSearchParams(query);
  const state = defaultState(universe);
  const pc = Number(params.get('pc'));
  if (Number.isFinite(pc) && params.get('pc') !== null) state.pC = clamp(quantize(pc), 0.5, 1);
  const alpha = Number(params.get('alpha'));
  if (Number.isFinite(alpha) && params.get('alpha') !== null) {
    state.alpha = clamp(quantize(alpha), 0.5, 1);
  }
  const load = Number(params.get('load'));
  if (Number.isInteger(load) && load >= 0 && load < universe.load_ids.length) {
    state.load = load;
  }
  const strategy = params.get('strategy');
  if (strategy && (STRATEGIES as string[]).includes(strategy)) {
    state.strategy = strategy as Strategy;
  }
  const raw = params.get('assets');
  if (raw) {
    for (const token of raw.split(',')) {
      if (!token) continue;
      const selected = !token.startsWith('!');
      const body = selected ? token : token.slice(1);
      const sep = body.lastIndexOf(':');
      if (sep < 0) continue;
      const id = body.slice(0, sep);
      const upper = Number(body.slice(sep + 1));
      if (id in state.assets && Number.isFinite(upper)) {
        state.assets[id] = { selected, upper: clamp(quantize(upper), 0, 1) };
      }
    }
  }
  return state;
}

export interface SolveRequest {
  path: string;
  body: string;
}

function upperBounds(state: SessionState, universe: Universe): number[] {
  return universe.assets.map((a) => {
    const setting = state.assets[a.id] ?? { selected: true, upper: 1 };
    return setting.selected ? quantize(setting.upper) : 0;
  });
}

/** The one place request bodies are built; byte-stable for a given state. */
export function buildSolveRequest(state: SessionState, universe: Universe): SolveRequest {
  const upper = upperBounds(state, universe);
  const lower = upper.map(() => 0);
  const target = { p_c: quantize(state.pC), alpha: quantize(state.alpha) };
  if (state.strategy === 'single') {
    return {
      path: '/optimize',
      body: JSON.stringify({
        load: state.load,
        target,
        bounds: { lower, upper },
      }),
    };
  }
  return {
    path: '/multiload',
    body: JSON.stringify({
      strategy: state.strategy,
      loads: universe.load_ids.map((_, k) => ({ load: k, target, priority: k })),
      bounds: { lower, upper },
    }),
  };
}

export function heatmapQuery(load: number, weights: number[]): string {
  return `/heatmap?load=${load}&weights=${weights.join(',')}`;
}

export function windowQuery(
  load: number,
  weights: number[],
  scenario: number,
  day: number,
  days: number,
): string {
  return `/window?load=${load}&weights=${weights.join(',')}&scenario=${scenario}&day=${day}&days=${days}`;
}
