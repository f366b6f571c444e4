// Browser shell: builds the editor panel once, re-renders only the results
// panel on state changes so edit focus is never disturbed.

import { ServiceClient } from './api.js';
import { debounce, WorkbenchController } from './controller.js';
import { recomputeDisabled, renderResults, renderViolations } from './render.js';
import {
  clearAllViewRows,
  editViewRow,
  restoreViewRows,
  setParam,
} from './state.js';
import type { Gamma, Objective, Stance } from './types.js';

const API_BASE = (window as { SHADOWCAP_API?: string }).SHADOWCAP_API ?? 'http://127.0.0.1:8723';

const STANCES: (Stance | '')[] = ['', 'very_bearish', 'bearish', 'bullish', 'very_bullish'];

function el<T extends HTMLElement>(selector: string): T {
  const node = document.querySelector<T>(selector);
  if (!node) throw new Error(`missing element ${selector}`);
  return node;
}

async function boot(): Promise<void> {
  const client = new ServiceClient(API_BASE);
  const app = el<HTMLDivElement>('#app');
  app.innerHTML = `
    <header>
      <h1>shadowcap workbench</h1>
      <p class="hint">paste a scenario document, create it, then steer the model</p>
    </header>
    <section class="loader">
      <textarea id="scenario-input" rows="8" placeholder="scenario JSON"></textarea>
      <button id="create">create scenario</button>
      <input id="scenario-id" placeholder="or open existing id" />
      <button id="open">open</button>
      <div id="load-error" class="toast error" hidden></div>
    </section>
    <main id="workbench" hidden>
      <section id="editor"></section>
      <section id="results"></section>
    </main>`;

  el<HTMLButtonElement>('#create').addEventListener('click', async () => {
    try {
      const meta = await client.createScenario(el<HTMLTextAreaElement>('#scenario-input').value);
      await openWorkbench(client, meta.id);
    } catch (err) {
      showLoadError(err);
    }
  });
  el<HTMLButtonElement>('#open').addEventListener('click', async () => {
    try {
      await openWorkbench(client, el<HTMLInputElement>('#scenario-id').value.trim());
    } catch (err) {
      showLoadError(err);
    }
  });
}

function showLoadError(err: unknown): void {
  const node = el<HTMLDivElement>('#load-error');
  node.textContent = err instanceof Error ? err.message : String(err);
  node.hidden = false;
}

async function openWorkbench(client: ServiceClient, id: string): Promise<void> {
  const controller = await WorkbenchController.open(client, id);
  el<HTMLElement>('#workbench').hidden = false;
  buildEditor(controller);
  controller.onChange(() => paintResults(controller));
  await controller.recompute();
}

function buildEditor(controller: WorkbenchController): void {
  const state = controller.state;
  const editor = el<HTMLElement>('#editor');
  const n = state.assetLabels.length;

  const viewRows = (state.draftViews ?? [])
    .map((row, i) => {
      const cells = row.weights
        .map(
          (w, j) =>
            `<input class="weight" data-row="${i}" data-col="${j}" value="${w}" size="6" />`,
        )
        .join('');
      const stanceOptions = STANCES.map(
        (s) => `<option value="${s}"${row.stance === s ? ' selected' : ''}>${s || 'numeric q'}</option>`,
      ).join('');
      return `
      <tr>
        <td>${row.kind}</td>
        <td>${cells}</td>
        <td><input class="q" data-row="${i}" value="${row.q}" size="8" /></td>
        <td><select class="stance" data-row="${i}">${stanceOptions}</select></td>
      </tr>`;
    })
    .join('');

  editor.innerHTML = `
    <h3>views</h3>
    <table class="views"><tbody>${viewRows}</tbody></table>
    <div id="violations"></div>
    <button id="clear-views">clear all rows</button>
    <button id="restore-views">restore rows</button>
    <h3>model</h3>
    <label>confidence c
      <input id="c-slider" type="range" min="0.01" max="0.99" step="0.01" value="${state.params.c}" />
      <span id="c-value">${state.params.c}</span>
    </label>
    <label>tau
      <input id="tau-input" type="number" step="0.1" min="0.1" value="${state.params.tau}" />
    </label>
    <label>reference model gamma
      <select id="gamma-toggle">
        <option value="1"${state.params.gamma === 1 ? ' selected' : ''}>1 (scaled market)</option>
        <option value="0"${state.params.gamma === 0 ? ' selected' : ''}>0 (explained variance)</option>
      </select>
    </label>
    <label>objective
      <select id="objective">
        <option>unconstrained</option>
        <option>risk_constrained</option>
        <option>risk_budget_constrained</option>
        <option>min_variance</option>
      </select>
    </label>
    <label>risk cap sigma
      <input id="sigma-cap" type="number" step="0.005" min="0" placeholder="none" />
    </label>
    <fieldset id="info-set">
      <legend>information set</legend>
      ${state.assetLabels
        .map(
          (label, i) =>
            `<label><input type="checkbox" class="asset" data-asset="${i + 1}" checked />${label}</label>`,
        )
        .join('')}
    </fieldset>
    <button id="recompute">recompute</button>`;

  const repaintViolations = () => {
    el<HTMLElement>('#violations').innerHTML = renderViolations(controller.state);
    el<HTMLButtonElement>('#recompute').disabled = recomputeDisabled(controller.state);
  };
  const autoRecompute = debounce(() => void controller.recompute(), 300);

  editor.querySelectorAll<HTMLInputElement>('input.weight, input.q').forEach((input) => {
    input.addEventListener('input', () => {
      const row = Number(input.dataset.row);
      const draft = controller.state.draftViews;
      if (!draft) return;
      const weights = [...draft[row].weights];
      editor
        .querySelectorAll<HTMLInputElement>(`input.weight[data-row="${row}"]`)
        .forEach((w) => (weights[Number(w.dataset.col)] = Number(w.value) || 0));
      const qInput = el<HTMLInputElement>(`input.q[data-row="${row}"]`);
      controller.update(
        editViewRow(controller.state, row, weights, Number(qInput.value) || 0),
      );
      repaintViolations();
    });
  });
  editor.querySelectorAll<HTMLSelectElement>('select.stance').forEach((select) => {
    select.addEventListener('change', () => {
      const row = Number(select.dataset.row);
      const draft = controller.state.draftViews;
      if (!draft) return;
      const stance = select.value as Stance | '';
      if (stance === '') {
        controller.update(
          editViewRow(controller.state, row, draft[row].weights, draft[row].q),
        );
      } else {
        controller.update(
          editViewRow(controller.state, row, draft[row].weights, stance),
        );
      }
      void controller.recompute();
    });
  });

  el<HTMLButtonElement>('#clear-views').addEventListener('click', () => {
    controller.update(clearAllViewRows(controller.state));
    void controller.recompute();
  });
  el<HTMLButtonElement>('#restore-views').addEventListener('click', () => {
    controller.update(restoreViewRows(controller.state));
    buildEditor(controller);
    void controller.recompute();
  });

  const cSlider = el<HTMLInputElement>('#c-slider');
  cSlider.addEventListener('input', () => {
    el<HTMLElement>('#c-value').textContent = cSlider.value;
    controller.update(setParam(controller.state, 'c', Number(cSlider.value)));
    autoRecompute();
  });
  el<HTMLInputElement>('#tau-input').addEventListener('change', (e) => {
    controller.update(
      setParam(controller.state, 'tau', Number((e.target as HTMLInputElement).value)),
    );
    autoRecompute();
  });
  el<HTMLSelectElement>('#gamma-toggle').addEventListener('change', (e) => {
    const gamma = Number((e.target as HTMLSelectElement).value) as Gamma;
    controller.update(setParam(controller.state, 'gamma', gamma));
    void controller.recompute();
  });
  el<HTMLSelectElement>('#objective').addEventListener('change', (e) => {
    const objective = (e.target as HTMLSelectElement).value as Objective;
    controller.update(setParam(controller.state, 'objective', objective));
    void controller.recompute();
  });
  el<HTMLInputElement>('#sigma-cap').addEventListener('change', (e) => {
    const raw = (e.target as HTMLInputElement).value;
    controller.update(
      setParam(controller.state, 'sigmaCap', raw === '' ? null : Number(raw)),
    );
    void controller.recompute();
  });
  el<HTMLElement>('#info-set').addEventListener('change', () => {
    const checked = [...editor.querySelectorAll<HTMLInputElement>('input.asset:checked')].map(
      (box) => Number(box.dataset.asset),
    );
    const all = checked.length === controller.state.assetLabels.length;
    controller.update(setParam(controller.state, 'infoSet', all ? null : checked));
    void controller.recompute();
  });
  el<HTMLButtonElement>('#recompute').addEventListener('click', () => {
    void controller.recompute();
  });
}

function paintResults(controller: WorkbenchController): void {
  const results = el<HTMLElement>('#results');
  results.innerHTML = renderResults(controller.state);
  const reload = results.querySelector<HTMLButtonElement>('.reload-revision');
  if (reload) {
    reload.addEventListener('click', () => {
      void (async () => {
        const stored = await new ServiceClient(API_BASE).getScenario(
          controller.state.scenarioId,
        );
        const { reloadRevision } = await import('./state.js');
        controller.update(
          reloadRevision(controller.state, stored.revision, stored.scenario.views ?? null),
        );
        buildEditor(controller);
        await controller.recompute();
      })();
    });
  }
}

boot().catch((err) => {
  document.body.innerHTML = `<pre>failed to boot: ${err}</pre>`;
});
