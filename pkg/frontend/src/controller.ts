// Glue between the service client and the pure state transitions. DOM-free:
// the browser shell and the tests drive the same object.

import { ApiError, ServiceClient } from './api.js';
import {
  applyFailure,
  applyResult,
  buildComputeParams,
  currentKey,
  initialState,
  markInFlight,
  submissionBlocked,
  WorkbenchState,
} from './state.js';
import type { ComputeResult, ScenarioDoc } from './types.js';

export class WorkbenchController {
  state: WorkbenchState;
  private listeners: Array<(s: WorkbenchState) => void> = [];

  constructor(
    private readonly client: ServiceClient,
    state: WorkbenchState,
  ) {
    this.state = state;
  }

  static async open(client: ServiceClient, scenarioId: string): Promise<WorkbenchController> {
    const stored = await client.getScenario(scenarioId);
    const doc = stored.scenario;
    const labels =
      doc.market.asset_labels ?? doc.market.sigma.map((_, i) => `Asset ${i + 1}`);
    const state = initialState(
      scenarioId,
      stored.revision,
      labels,
      doc.views ?? null,
      doc.shadow_costs.tau,
    );
    return new WorkbenchController(client, state);
  }

  onChange(listener: (s: WorkbenchState) => void): void {
    this.listeners.push(listener);
  }

  update(next: WorkbenchState): void {
    this.state = next;
    for (const listener of this.listeners) listener(next);
  }

  /** Issue a compute for the current draft. Stale responses are discarded:
   * whichever request was issued last wins, keyed by its params identity. */
  async recompute(): Promise<WorkbenchState> {
    if (submissionBlocked(this.state)) {
      return this.state; // inline violations shown; nothing sent
    }
    const params = buildComputeParams(this.state);
    const key = currentKey(this.state);
    this.update(markInFlight(this.state, key));
    try {
      const result: ComputeResult = await this.client.compute(
        this.state.scenarioId,
        params,
        this.state.revision,
      );
      this.update(applyResult(this.state, key, result));
    } catch (err) {
      if (err instanceof ApiError) {
        const detail =
          err.detail.violations && err.detail.violations.length
            ? `${err.detail.message}: ${err.detail.violations.join('; ')}`
            : err.detail.message;
        this.update(
          applyFailure(this.state, key, detail, err.detail.current_revision),
        );
      } else {
        // transport failure: keep the last good result, surface a toast
        const message = err instanceof Error ? err.message : String(err);
        this.update(applyFailure(this.state, key, `service unreachable: ${message}`));
      }
    }
    return this.state;
  }

  /** Structural edits (adding or removing view rows) change the stored
   * scenario itself; the revision check surfaces concurrent edits as 409. */
  async saveViews(doc: ScenarioDoc): Promise<void> {
    const meta = await this.client.putScenario(this.state.scenarioId, doc, this.state.revision);
    this.update({ ...this.state, revision: meta.revision });
  }
}

/** Trailing-edge debounce used for slider moves (300 ms per the design). */
export function debounce<T extends unknown[]>(
  fn: (...args: T) => void,
  delayMs = 300,
): (...args: T) => void {
  let handle: ReturnType<typeof setTimeout> | undefined;
  return (...args: T) => {
    if (handle !== undefined) clearTimeout(handle);
    handle = setTimeout(() => fn(...args), delayMs);
  };
}
