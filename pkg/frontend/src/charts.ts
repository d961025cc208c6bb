/** DOM renderers: dependency-free SVG/canvas drawing from view models. */

import type { GridTable, ScatterPoint, SummaryRow, WeightBar } from './views.js';
import { heatmapImage } from './views.js';
import type { HeatmapPayload, WindowPayload } from './types.js';

const SERIES_COLORS = ['#e8a33d', '#f2ce59', '#4f86c6', '#74b4e8', '#58a177', '#b06ab3', '#888'];

export function renderWeightBars(container: HTMLElement, bars: WeightBar[]): void {
  container.replaceChildren();
  for (const bar of bars) {
    const row = document.createElement('div');
    row.className = 'weight-row';
    const label = document.createElement('span');
    label.className = 'weight-label';
    label.textContent = bar.id;
    const track = document.createElement('div');
    track.className = 'weight-track';
    const fill = document.createElement('div');
    fill.className = 'weight-fill' + (bar.atUpper ? ' at-upper' : bar.atLower ? ' at-lower' : '');
    fill.style.width = `${Math.round(bar.weight * 100)}%`;
    const value = document.createElement('span');
    value.className = 'weight-value';
    value.textContent = String(bar.weight) + (bar.atUpper ? ' (at cap)' : bar.atLower ? ' (unused)' : '');
    track.appendChild(fill);
    row.append(label, track, value);
    container.appendChild(row);
  }
}

export function renderSummary(container: HTMLElement, rows: SummaryRow[]): void {
  container.replaceChildren();
  for (const row of rows) {
    const dt = document.createElement('dt');
    dt.textContent = row.label;
    const dd = document.createElement('dd');
    dd.textContent = row.value;
    container.append(dt, dd);
  }
}

export function renderHeatmapCanvas(canvas: HTMLCanvasElement, payload: HeatmapPayload): void {
  const img = heatmapImage(payload);
  canvas.width = img.width;
  canvas.height = img.height;
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const image = ctx.createImageData(img.width, img.height);
  image.data.set(img.rgba);
  ctx.putImageData(image, 0, 0);
}

export function renderGridTable(container: HTMLElement, table: GridTable): void {
  container.replaceChildren();
  const el = document.createElement('table');
  const head = el.createTHead().insertRow();
  for (const cell of table.header) {
    const th = document.createElement('th');
    th.textContent = cell;
    head.appendChild(th);
  }
  const body = el.createTBody();
  for (const row of table.rows) {
    const tr = body.insertRow();
    for (const cell of row) {
      const td = tr.insertCell();
      td.textContent = cell;
      if (cell === 'infeasible') td.className = 'infeasible-cell';
    }
  }
  container.appendChild(el);
}

export function renderScatter(svg: SVGSVGElement, points: ScatterPoint[]): void {
  svg.replaceChildren();
  const w = 420;
  const h = 260;
  const pad = 24;
  svg.setAttribute('viewBox', `0 0 ${w} ${h}`);
  for (const p of points) {
    const c = document.createElementNS('http://www.w3.org/2000/svg', 'circle');
    c.setAttribute('cx', String(pad + p.x * (w - 2 * pad)));
    c.setAttribute('cy', String(h - pad - (1 - p.y) * (h - 2 * pad)));
    c.setAttribute('r', String(2 + p.size));
    c.setAttribute('fill', 'rgba(79, 134, 198, 0.55)');
    const title = document.createElementNS('http://www.w3.org/2000/svg', 'title');
    title.textContent = p.label;
    c.appendChild(title);
    svg.appendChild(c);
  }
}

/** Stacked per-asset generation with the load line on top. */
export function renderWindowChart(svg: SVGSVGElement, payload: WindowPayload): void {
  svg.replaceChildren();
  const w = 640;
  const h = 280;
  const pad = 28;
  svg.setAttribute('viewBox', `0 0 ${w} ${h}`);
  const hours = payload.load_mw.length;
  if (hours === 0) return;
  const peak = Math.max(
    ...payload.load_mw,
    ...payload.portfolio,
  ) || 1;
  const x = (t: number) => pad + (t / (hours - 1)) * (w - 2 * pad);
  const y = (mw: number) => h - pad - (mw / peak) * (h - 2 * pad);

  const cumulative = new Array<number>(hours).fill(0);
  payload.series.forEach((series, idx) => {
    const lower = cumulative.slice();
    for (let t = 0; t < hours; t++) cumulative[t] += series[t];
    const upperPath = cumulative.map((v, t) => `${x(t)},${y(v)}`);
    const lowerPath = lower.map((v, t) => `${x(t)},${y(v)}`).reverse();
    const polygon = document.createElementNS('http://www.w3.org/2000/svg', 'polygon');
    polygon.setAttribute('points', [...upperPath, ...lowerPath].join(' '));
    polygon.setAttribute('fill', SERIES_COLORS[idx % SERIES_COLORS.length]);
    polygon.setAttribute('opacity', '0.8');
    const title = document.createElementNS('http://www.w3.org/2000/svg', 'title');
    title.textContent = payload.asset_ids[idx];
    polygon.appendChild(title);
    svg.appendChild(polygon);
  });

  const line = document.createElementNS('http://www.w3.org/2000/svg', 'polyline');
  line.setAttribute(
    'points',
    payload.load_mw.map((v, t) => `${x(t)},${y(v)}`).join(' '),
  );
  line.setAttribute('fill', 'none');
  line.setAttribute('stroke', '#222');
  line.setAttribute('stroke-width', '2');
  svg.appendChild(line);
}
