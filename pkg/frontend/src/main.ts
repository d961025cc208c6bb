/** Wires the controller to the page: sliders, selectors, charts, URL sync. */

import { DashboardController, RenderHooks } from './controller.js';
import {
  renderGridTable,
  renderHeatmapCanvas,
  renderScatter,
  renderSummary,
  renderWeightBars,
  renderWindowChart,
} from './charts.js';
import type { CostGridPayload, SolveReport, Universe } from './types.js';
import { isMultiLoad } from './types.js';
import {
  costSummary,
  frontierScatter,
  gridTable,
  multiLoadSummary,
  parseFrontierCsv,
  weightBars,
} from './views.js';
import type { Strategy } from './state.js';

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

async function fetchJson(path: string, body?: string): Promise<unknown> {
  const resp = await fetch(path, body === undefined
    ? undefined
    : { method: 'POST', headers: { 'Content-Type': 'application/json' }, body });
  if (!resp.ok && resp.status !== 504) {
    const payload = await resp.json().catch(() => null);
    const detail = payload && 'errors' in payload
      ? JSON.stringify(payload.errors)
      : resp.statusText;
    throw new Error(`${path}: ${detail}`);
  }
  return resp.json();
}

function controlInputs(): HTMLInputElement[] {
  return Array.from(document.querySelectorAll<HTMLInputElement>('input, select'));
}

async function boot(): Promise<void> {
  const universe = (await fetchJson('/universe')) as Universe;

  const hooks: RenderHooks = {
    renderReport(resp, chartReport: SolveReport) {
      renderWeightBars(byId('weights'), weightBars(chartReport));
      const rows = isMultiLoad(resp)
        ? [...costSummary(chartReport), ...multiLoadSummary(resp)]
        : costSummary(chartReport);
      renderSummary(byId('summary'), rows);
    },
    renderHeatmap(payload) {
      renderHeatmapCanvas(byId<HTMLCanvasElement>('heatmap'), payload);
    },
    renderWindow(payload) {
      renderWindowChart(byId<HTMLElement>('window-chart') as unknown as SVGSVGElement, payload);
    },
    renderBanner(message) {
      const banner = byId('banner');
      banner.textContent = message ?? '';
      banner.style.display = message === null ? 'none' : 'block';
    },
    renderBusy(busy) {
      for (const input of controlInputs()) input.disabled = busy;
      byId('busy').style.visibility = busy ? 'visible' : 'hidden';
    },
    onUrlChange(query) {
      history.replaceState(null, '', `?${query}`);
    },
  };

  const controller = new DashboardController(
    universe,
    hooks,
    fetchJson,
    window.location.search.replace(/^\?/, ''),
  );

  const pc = byId<HTMLInputElement>('pc');
  const pcValue = byId('pc-value');
  pc.value = String(controller.state.pC);
  pcValue.textContent = pc.value;
  pc.addEventListener('input', () => {
    pcValue.textContent = pc.value;
    controller.setPc(Number(pc.value));
  });

  const alpha = byId<HTMLInputElement>('alpha');
  const alphaValue = byId('alpha-value');
  alpha.value = String(controller.state.alpha);
  alphaValue.textContent = alpha.value;
  alpha.addEventListener('input', () => {
    alphaValue.textContent = alpha.value;
    controller.setAlpha(Number(alpha.value));
  });

  const loadSelect = byId<HTMLSelectElement>('load');
  universe.load_ids.forEach((id, k) => {
    const option = document.createElement('option');
    option.value = String(k);
    option.textContent = id;
    loadSelect.appendChild(option);
  });
  loadSelect.value = String(controller.state.load);
  loadSelect.addEventListener('change', () => controller.setLoad(Number(loadSelect.value)));

  const strategy = byId<HTMLSelectElement>('strategy');
  strategy.value = controller.state.strategy;
  strategy.addEventListener('change', () =>
    controller.setStrategy(strategy.value as Strategy));

  const assetList = byId('assets');
  for (const asset of universe.assets) {
    const row = document.createElement('div');
    row.className = 'asset-row';
    const checkbox = document.createElement('input');
    checkbox.type = 'checkbox';
    checkbox.checked = controller.state.assets[asset.id].selected;
    const label = document.createElement('label');
    label.textContent = `${asset.id} (${asset.kind}, ${asset.capacity} MW @ $${asset.cost}/MWh)`;
    const slider = document.createElement('input');
    slider.type = 'range';
    slider.min = '0';
    slider.max = '1';
    slider.step = '0.05';
    slider.value = String(controller.state.assets[asset.id].upper);
    const update = () =>
      controller.setAsset(asset.id, checkbox.checked, Number(slider.value));
    checkbox.addEventListener('change', update);
    slider.addEventListener('input', update);
    row.append(checkbox, label, slider);
    assetList.appendChild(row);
  }

  const scenario = byId<HTMLInputElement>('scenario');
  scenario.max = String(Math.min(universe.n_scenarios, 20) - 1);
  const day = byId<HTMLInputElement>('day');
  day.max = String(Math.floor(universe.n_hours / 24) - 2);
  const syncWindow = () =>
    controller.setWindow(Number(scenario.value), Number(day.value), 2);
  scenario.addEventListener('change', syncWindow);
  day.addEventListener('change', syncWindow);

  byId<HTMLButtonElement>('run-grid').addEventListener('click', async () => {
    const body = JSON.stringify({
      load: controller.state.load,
      alphas: [0.5, 0.7, 0.9],
      pcs: [0.5, 0.7, 0.9],
    });
    const grid = (await fetchJson('/grid', body)) as CostGridPayload;
    renderGridTable(byId('grid'), gridTable(grid));
  });

  byId<HTMLInputElement>('frontier-file').addEventListener('change', (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    void file.text().then((text) => {
      renderScatter(
        byId<HTMLElement>('frontier') as unknown as SVGSVGElement,
        frontierScatter(parseFrontierCsv(text)),
      );
    });
  });

  controller.queueSolve();
}

void boot();
