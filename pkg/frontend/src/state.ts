// Workbench state and its pure transitions. The controller in main.ts feeds
// these from DOM events; tests drive them directly. No equilibrium math
// happens here: every displayed number is a field of the last ComputeResult.

import type {
  ComputeParams,
  ComputeResult,
  Gamma,
  Objective,
  ScenarioViews,
  Stance,
  ViewKind,
} from './types.js';

export const ROW_SUM_TOLERANCE = 1e-9;

export interface DraftViewRow {
  weights: number[];
  q: number;
  stance: Stance | null; // set -> server quantifies q on recompute
  kind: ViewKind;
}

export interface RowViolation {
  row: number;
  message: string;
}

export interface WorkbenchParams {
  tau: number;
  gamma: Gamma;
  c: number;
  objective: Objective;
  sigmaCap: number | null;
  infoSet: number[] | null; // 1-based asset indices, null = all
}

export interface WorkbenchState {
  scenarioId: string;
  revision: number;
  assetLabels: string[];
  baseViews: ScenarioViews | null;
  draftViews: DraftViewRow[] | null; // null = views cleared (views-off mode)
  params: WorkbenchParams;
  lastResult: ComputeResult | null;
  lastComputedKey: string | null;
  inFlightKey: string | null;
  error: string | null;
  staleRevision: number | null; // set on 409, cleared by reloadRevision
}

export function initialState(
  scenarioId: string,
  revision: number,
  assetLabels: string[],
  views: ScenarioViews | null,
  tau: number,
): WorkbenchState {
  return {
    scenarioId,
    revision,
    assetLabels,
    baseViews: views,
    draftViews: views ? draftFromViews(views) : null,
    params: {
      tau,
      gamma: 1,
      c: views?.confidence ?? 0.5,
      objective: 'unconstrained',
      sigmaCap: null,
      infoSet: null,
    },
    lastResult: null,
    lastComputedKey: null,
    inFlightKey: null,
    error: null,
    staleRevision: null,
  };
}

export function draftFromViews(views: ScenarioViews): DraftViewRow[] {
  return views.P.map((row, i) => ({
    weights: [...row],
    q: views.q[i],
    stance: null,
    kind: views.kinds[i],
  }));
}

// --- client-side validation mirror (blocks submission, server re-checks) ---

export function rowViolations(draft: DraftViewRow[]): RowViolation[] {
  const out: RowViolation[] = [];
  draft.forEach((row, i) => {
    const target = row.kind === 'absolute' ? 1 : 0;
    const sum = row.weights.reduce((acc, w) => acc + w, 0);
    if (Math.abs(sum - target) > ROW_SUM_TOLERANCE) {
      out.push({
        row: i,
        message: `${row.kind} row sums to ${sum}, expected ${target}`,
      });
    }
    if (row.weights.some((w) => w < -1 || w > 1)) {
      out.push({ row: i, message: 'weights must lie in [-1, 1]' });
    }
  });
  return out;
}

export function submissionBlocked(state: WorkbenchState): boolean {
  return state.draftViews !== null && rowViolations(state.draftViews).length > 0;
}

// --- edits ------------------------------------------------------------------

export function editViewRow(
  state: WorkbenchState,
  rowIndex: number,
  weights: number[],
  qOrStance: number | Stance,
): WorkbenchState {
  if (!state.draftViews || rowIndex < 0 || rowIndex >= state.draftViews.length) {
    throw new Error(`no view row ${rowIndex}`);
  }
  if (weights.length !== state.assetLabels.length) {
    throw new Error(`weights must have length ${state.assetLabels.length}`);
  }
  const draft = state.draftViews.map((row, i) => {
    if (i !== rowIndex) return row;
    if (typeof qOrStance === 'number') {
      return { ...row, weights: [...weights], q: qOrStance, stance: null };
    }
    return { ...row, weights: [...weights], stance: qOrStance };
  });
  return { ...state, draftViews: draft };
}

export function clearAllViewRows(state: WorkbenchState): WorkbenchState {
  return { ...state, draftViews: null };
}

export function restoreViewRows(state: WorkbenchState): WorkbenchState {
  return {
    ...state,
    draftViews: state.baseViews ? draftFromViews(state.baseViews) : null,
  };
}

export function setParam<K extends keyof WorkbenchParams>(
  state: WorkbenchState,
  key: K,
  value: WorkbenchParams[K],
): WorkbenchState {
  return { ...state, params: { ...state.params, [key]: value } };
}

// --- compute params and the identity key -------------------------------------

export function buildComputeParams(state: WorkbenchState): ComputeParams {
  const p: ComputeParams = {
    tau: state.params.tau,
    gamma: state.params.gamma,
    objective: state.params.objective,
  };
  if (state.draftViews) {
    p.c = state.params.c;
    const base = state.baseViews;
    const pMatrix = state.draftViews.map((r) => r.weights);
    const qVector = state.draftViews.map((r) => r.q);
    if (!base || !matrixEqual(pMatrix, base.P)) p.P_overrides = pMatrix;
    if (!base || !vectorEqual(qVector, base.q)) p.q_overrides = qVector;
    const stances = state.draftViews.map((r) => r.stance);
    if (stances.some((s) => s !== null)) p.stances = stances;
  }
  if (state.params.sigmaCap !== null) p.sigma_cap = state.params.sigmaCap;
  if (state.params.infoSet !== null) p.info_set = [...state.params.infoSet];
  return p;
}

function matrixEqual(a: number[][], b: number[][]): boolean {
  return a.length === b.length && a.every((row, i) => vectorEqual(row, b[i]));
}

function vectorEqual(a: number[], b: number[]): boolean {
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

/** Canonical identity of a compute request; used for the dirty flag and for
 * discarding stale responses (newest request wins). */
export function paramsKey(params: ComputeParams): string {
  return stableJson(params as Record<string, unknown>);
}

function stableJson(value: unknown): string {
  if (Array.isArray(value)) {
    return `[${value.map(stableJson).join(',')}]`;
  }
  if (value !== null && typeof value === 'object') {
    const entries = Object.entries(value as Record<string, unknown>)
      .filter(([, v]) => v !== undefined)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([k, v]) => `${JSON.stringify(k)}:${stableJson(v)}`);
    return `{${entries.join(',')}}`;
  }
  return JSON.stringify(value);
}

export function currentKey(state: WorkbenchState): string {
  return paramsKey(buildComputeParams(state));
}

/** Dirty iff the draft differs from the last successfully computed params. */
export function isDirty(state: WorkbenchState): boolean {
  return state.lastComputedKey !== currentKey(state);
}

// --- compute lifecycle (newest request wins) ----------------------------------

export function markInFlight(state: WorkbenchState, key: string): WorkbenchState {
  return { ...state, inFlightKey: key };
}

/** Apply a compute response unless a newer request has been issued since. */
export function applyResult(
  state: WorkbenchState,
  key: string,
  result: ComputeResult,
): WorkbenchState {
  if (state.inFlightKey !== key) {
    return state; // stale response; discard
  }
  return {
    ...state,
    lastResult: result,
    lastComputedKey: key,
    inFlightKey: null,
    error: null,
    staleRevision: null,
  };
}

export function applyFailure(
  state: WorkbenchState,
  key: string,
  message: string,
  currentRevision?: number,
): WorkbenchState {
  if (state.inFlightKey !== key) {
    return state;
  }
  return {
    ...state,
    inFlightKey: null,
    error: message,
    staleRevision: currentRevision ?? null,
  };
}

/** 409 recovery: adopt the server's revision and drop the conflict banner. */
export function reloadRevision(
  state: WorkbenchState,
  revision: number,
  views: ScenarioViews | null,
): WorkbenchState {
  return {
    ...state,
    revision,
    baseViews: views,
    draftViews: views ? draftFromViews(views) : null,
    staleRevision: null,
    error: null,
  };
}
