/** Thin fetch wrappers over the session endpoints. */

import { StateView, Weights } from './types.js';

export class ApiError extends Error {
  constructor(public status: number, public detail: unknown) {
    super(`HTTP ${status}: ${JSON.stringify(detail)}`);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  const body = await resp.json().catch(() => null);
  if (!resp.ok) {
    throw new ApiError(resp.status, body?.detail ?? body);
  }
  return body as T;
}

export class ApiClient {
  constructor(
    private base: string = '',
    private fetcher: typeof fetch = (...args) => fetch(...args),
  ) {}

  sessionUrl(id: string, suffix = ''): string {
    return `${this.base}/sessions/${encodeURIComponent(id)}${suffix}`;
  }

  async createSession(config: Record<string, unknown> = {}): Promise<string> {
    const resp = await this.fetcher(`${this.base}/sessions`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(config),
    });
    const body = await asJson<{ id: string }>(resp);
    return body.id;
  }

  async getState(id: string): Promise<StateView> {
    return asJson(await this.fetcher(this.sessionUrl(id, '/state')));
  }

  async postWeights(id: string, weights: Weights): Promise<StateView> {
    const resp = await this.fetcher(this.sessionUrl(id, '/weights'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(weights),
    });
    return asJson(resp);
  }

  async postDecision(
    id: string,
    action: 'accept' | 'steer' | 'stop',
    targetZ?: number,
  ): Promise<StateView> {
    const payload: Record<string, unknown> = { action };
    if (targetZ !== undefined) {
      payload.target_z = targetZ;
    }
    const resp = await this.fetcher(this.sessionUrl(id, '/decision'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(payload),
    });
    return asJson(resp);
  }

  eventsUrl(id: string): string {
    return this.sessionUrl(id, '/events');
  }
}
