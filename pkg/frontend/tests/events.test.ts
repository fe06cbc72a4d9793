import { describe, expect, it } from 'vitest';

import { StateStream } from '../src/events.js';
import { StateView } from '../src/types.js';

function view(version: number): StateView {
  return {
    version,
    status: 'DRILLING',
    bit: { x: 0, z: 15, inclination: 80 },
    drilled: [[0, 15]],
    recommendation: { action: 'steer', expected_value: 1, target_z: 10, inclination_deg: 80.6 },
    weights: { w_position: 1, w_sand: 0, w_cost: 1 },
    per_realization: [],
    value_cdf: [],
    cdf_mean: 0,
    pointcloud: { nx: 1, nz: 1, origin: [0, 0], spacing: [1, 1], values: [10] },
    realization_count: 0,
  };
}

describe('StateStream version ordering', () => {
  it('applies strictly increasing versions', () => {
    const applied: number[] = [];
    const stream = new StateStream((v) => applied.push(v.version));
    expect(stream.accept(view(1))).toBe(true);
    expect(stream.accept(view(2))).toBe(true);
    expect(applied).toEqual([1, 2]);
  });

  it('drops stale and duplicate events', () => {
    const applied: number[] = [];
    const stream = new StateStream((v) => applied.push(v.version));
    stream.accept(view(3));
    expect(stream.accept(view(2))).toBe(false);
    expect(stream.accept(view(3))).toBe(false);
    expect(applied).toEqual([3]);
  });

  it('stays monotone under 20 rapid scrambled interactions', () => {
    const applied: number[] = [];
    const stream = new StateStream((v) => applied.push(v.version));
    // scrambled delivery of versions 1..20 with duplicates mixed in
    const order = [3, 1, 2, 5, 4, 5, 7, 6, 8, 10, 9, 11, 13, 12, 14, 16, 15, 18, 17, 20, 19, 20];
    for (const version of order) {
      stream.accept(view(version));
    }
    for (let i = 1; i < applied.length; i += 1) {
      expect(applied[i]!).toBeGreaterThan(applied[i - 1]!);
    }
    expect(stream.currentVersion).toBe(20);
  });

  it('parses message events through the factory seam', () => {
    const applied: number[] = [];
    let handler: ((ev: MessageEvent) => void) | null = null;
    const stream = new StateStream(
      (v) => applied.push(v.version),
      () => ({
        addEventListener: (type, cb) => {
          if (type === 'message') handler = cb;
        },
        close: () => undefined,
      }),
    );
    stream.connect('http://irrelevant/events');
    handler!({ data: JSON.stringify(view(1)) } as MessageEvent);
    handler!({ data: 'not json' } as MessageEvent);
    handler!({ data: JSON.stringify(view(2)) } as MessageEvent);
    expect(applied).toEqual([1, 2]);
  });
});
