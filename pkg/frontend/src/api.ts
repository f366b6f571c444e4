// Thin fetch client for the scenario service. All numeric results shown in
// the UI come back through these calls; the client never computes them.

import type {
  ComputeParams,
  ComputeResult,
  ScenarioDoc,
  ServiceError,
  StoredScenarioMeta,
} from './types.js';

export class ApiError extends Error {
  readonly detail: ServiceError;

  constructor(detail: ServiceError) {
    super(detail.message);
    this.detail = detail;
  }
}

async function parseError(resp: Response): Promise<never> {
  let body: Record<string, unknown> = {};
  try {
    body = (await resp.json()) as Record<string, unknown>;
  } catch {
    // non-JSON error body; keep defaults
  }
  throw new ApiError({
    status: resp.status,
    code: typeof body.code === 'string' ? body.code : 'error',
    message: typeof body.message === 'string' ? body.message : resp.statusText,
    violations: Array.isArray(body.violations) ? (body.violations as string[]) : undefined,
    current_revision:
      typeof body.current_revision === 'number' ? body.current_revision : undefined,
  });
}

export class ServiceClient {
  constructor(private readonly base: string) {}

  async health(): Promise<boolean> {
    const resp = await fetch(`${this.base}/healthz`);
    return resp.ok;
  }

  async createScenario(doc: ScenarioDoc | string): Promise<StoredScenarioMeta> {
    const body = typeof doc === 'string' ? doc : JSON.stringify(doc);
    const resp = await fetch(`${this.base}/scenarios`, { method: 'POST', body });
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as StoredScenarioMeta;
  }

  async getScenario(id: string): Promise<StoredScenarioMeta & { scenario: ScenarioDoc }> {
    const resp = await fetch(`${this.base}/scenarios/${id}`);
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as StoredScenarioMeta & { scenario: ScenarioDoc };
  }

  async putScenario(
    id: string,
    doc: ScenarioDoc,
    revision: number,
  ): Promise<StoredScenarioMeta> {
    const resp = await fetch(`${this.base}/scenarios/${id}`, {
      method: 'PUT',
      body: JSON.stringify(doc),
      headers: { 'X-Revision': String(revision) },
    });
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as StoredScenarioMeta;
  }

  async deleteScenario(id: string): Promise<void> {
    const resp = await fetch(`${this.base}/scenarios/${id}`, { method: 'DELETE' });
    if (!resp.ok && resp.status !== 204) await parseError(resp);
  }

  async compute(
    id: string,
    params: ComputeParams,
    revision?: number,
  ): Promise<ComputeResult> {
    const headers: Record<string, string> = {};
    if (revision !== undefined) headers['X-Revision'] = String(revision);
    const resp = await fetch(`${this.base}/scenarios/${id}/compute`, {
      method: 'POST',
      body: JSON.stringify(params),
      headers,
    });
    if (!resp.ok) await parseError(resp);
    return (await resp.json()) as ComputeResult;
  }
}
