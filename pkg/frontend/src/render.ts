// String renderer for the results panel. Kept DOM-free so tests can assert
// the exact displayed text; main.ts injects the output into the page.
//
// Invariant: every figure below is a formatted field of the last
// ComputeResult. Nothing is recomputed client-side.

import type { AllocationBlock, ComputeResult } from './types.js';
import { isDirty, rowViolations, submissionBlocked, WorkbenchState } from './state.js';

/** Display precision: four decimals, matching the published tables. */
export function fmt(x: number): string {
  return x.toFixed(4);
}

function bar(value: number, scale: number, cls: string): string {
  const width = Math.min(Math.abs(value) / scale, 1) * 100;
  return `<span class="bar ${cls}${value < 0 ? ' neg' : ''}" style="width:${width.toFixed(1)}%"></span>`;
}

function allocationRows(labels: string[], block: AllocationBlock): string {
  const byAsset = new Map<number, number>();
  block.assets.forEach((asset, i) => byAsset.set(asset, block.weights[i]));
  return labels
    .map((label, i) => {
      const w = byAsset.get(i + 1);
      const cell = w === undefined ? 'excluded' : fmt(w);
      return `<tr><td>${label}</td><td class="alloc-weight" data-asset="${i + 1}">${cell}</td></tr>`;
    })
    .join('');
}

export function renderResults(state: WorkbenchState): string {
  const result = state.lastResult;
  if (!result) {
    return '<section class="results empty">No results yet. Recompute to populate.</section>';
  }
  const labels = result.asset_labels;
  const viewsOff = state.draftViews === null;
  // views-off mode displays the server's no-views baseline verbatim
  const alloc = viewsOff ? result.baseline : result.allocation;
  const posterior = viewsOff ? result.prior.pi : result.posterior.mean;

  const scale = Math.max(
    ...result.prior.pi.map(Math.abs),
    ...posterior.map(Math.abs),
    1e-12,
  );
  const pairs = labels
    .map((label, k) => {
      const prior = result.prior.pi[k];
      const post = posterior[k];
      return `
      <tr>
        <td>${label}</td>
        <td class="prior-value">${fmt(prior)}</td>
        <td>${bar(prior, scale, 'prior')}</td>
        <td class="posterior-value" data-asset="${k + 1}">${fmt(post)}</td>
        <td>${bar(post, scale, 'posterior')}</td>
      </tr>`;
    })
    .join('');

  const deltaScale = Math.max(...result.deltas.weights.map(Math.abs), 1e-12);
  const deltaRows = labels
    .map((label, k) => {
      const d = result.deltas.weights[k] ?? 0;
      return `<tr><td>${label}</td><td class="delta-value">${fmt(d)}</td><td>${bar(d, deltaScale, 'delta')}</td></tr>`;
    })
    .join('');

  const feasible = alloc.feasible;
  const banner = feasible
    ? '<div class="banner ok">allocation feasible</div>'
    : `<div class="banner infeasible">risk cap infeasible: minimum attainable risk is ` +
      `<span class="mv-risk">${fmt(alloc.min_variance_risk ?? NaN)}</span></div>`;

  const gauge = viewsOff
    ? '<div class="gauge" data-fit="0">views off</div>'
    : `<div class="gauge" data-fit="${result.views.view_fit}">view fit ` +
      `<span class="view-fit">${fmt(result.views.view_fit)}</span></div>`;

  const metrics =
    alloc.return !== null && alloc.risk !== null
      ? `<p class="metrics">return <span class="alloc-return">${fmt(alloc.return)}</span>
         risk <span class="alloc-risk">${fmt(alloc.risk)}</span></p>`
      : '';

  return `
  <section class="results${isDirty(state) ? ' dirty' : ''}">
    ${state.error ? `<div class="toast error">${state.error}</div>` : ''}
    ${state.staleRevision !== null ? '<button class="reload-revision">reload revision</button>' : ''}
    ${banner}
    ${gauge}
    <h3>prior vs posterior excess returns</h3>
    <table class="pairs"><tbody>${pairs}</tbody></table>
    <h3>allocation (${alloc === result.baseline ? 'prior only' : state.params.objective})</h3>
    <table class="allocation"><tbody>${allocationRows(labels, alloc)}</tbody></table>
    ${metrics}
    <h3>allocation shift vs no-views baseline</h3>
    <table class="delta"><tbody>${deltaRows}</tbody></table>
    <p class="market">lambda_M <span>${result.market.lambda_m.toExponential(4)}</span>
       delta_lambda <span>${fmt(result.market.delta_lambda)}</span></p>
  </section>`;
}

export function renderViolations(state: WorkbenchState): string {
  if (!state.draftViews) return '';
  const violations = rowViolations(state.draftViews);
  if (violations.length === 0) return '';
  const items = violations
    .map((v) => `<li class="violation" data-row="${v.row}">row ${v.row + 1}: ${v.message}</li>`)
    .join('');
  return `<ul class="violations">${items}</ul>`;
}

export function recomputeDisabled(state: WorkbenchState): boolean {
  return submissionBlocked(state);
}
