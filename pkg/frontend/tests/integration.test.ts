/** Round-trip checks against a live service.
 *
 * Skipped unless GEODSS_URL points at a running `geodss serve` instance,
 * e.g. GEODSS_URL=http://127.0.0.1:8000 npx vitest run tests/integration.test.ts
 */

import { describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import { StateStream } from '../src/events.js';
import { sseOverFetch } from '../src/sse_fetch.js';
import { StateView } from '../src/types.js';

const BASE = process.env.GEODSS_URL;
const MEMBERS = Number(process.env.GEODSS_MEMBERS ?? '100');

describe.skipIf(!BASE)('live service round trip', () => {
  it(
    'reflects a weight change in the CDF and banner within 2 s',
    { timeout: 120_000 },
    async () => {
      const api = new ApiClient(BASE!);
      const id = await api.createSession({ ensemble_size: MEMBERS, seeds: [9, 10, 11] });
      const before = await api.getState(id);

      const events: StateView[] = [];
      const stream = new StateStream((v) => events.push(v), sseOverFetch);
      stream.connect(api.eventsUrl(id));
      try {
        const t0 = Date.now();
        await api.postWeights(id, { w_position: 0.3, w_sand: 0.7, w_cost: 1.0 });
        while (events.length < 1 && Date.now() - t0 < 5_000) {
          await new Promise((resolve) => setTimeout(resolve, 20));
        }
        const elapsed = Date.now() - t0;
        expect(events.length).toBeGreaterThan(0);
        expect(elapsed).toBeLessThan(2_000);
        const view = events[events.length - 1]!;
        expect(view.version).toBe(before.version + 1);
        expect(view.weights).toEqual({ w_position: 0.3, w_sand: 0.7, w_cost: 1.0 });
        expect(view.value_cdf).not.toEqual(before.value_cdf);
        expect(view.recommendation).not.toBeNull();
      } finally {
        stream.disconnect();
      }
    },
  );

  it(
    'keeps event order under 20 rapid interactions',
    { timeout: 300_000 },
    async () => {
      const api = new ApiClient(BASE!);
      const id = await api.createSession({ ensemble_size: MEMBERS, seeds: [21, 22, 23] });
      const versions: number[] = [];
      const stream = new StateStream((v) => versions.push(v.version), sseOverFetch);
      stream.connect(api.eventsUrl(id));
      try {
        const posts: Promise<unknown>[] = [];
        for (let i = 0; i < 20; i += 1) {
          posts.push(
            api.postWeights(id, { w_position: 1.0, w_sand: 0.02 * (i + 1), w_cost: 1.0 }),
          );
        }
        await Promise.all(posts);
        const deadline = Date.now() + 120_000;
        while (versions.length < 20 && Date.now() < deadline) {
          await new Promise((resolve) => setTimeout(resolve, 50));
        }
        expect(versions.length).toBe(20);
        for (let i = 1; i < versions.length; i += 1) {
          expect(versions[i]!).toBeGreaterThan(versions[i - 1]!);
        }
      } finally {
        stream.disconnect();
      }
    },
  );
});
