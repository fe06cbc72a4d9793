import { describe, expect, it } from 'vitest';

import { Store } from '../src/store.js';
import { StateView } from '../src/types.js';

function view(version: number, count = 4): StateView {
  return {
    version,
    status: 'DRILLING',
    bit: { x: 0, z: 15, inclination: 80 },
    drilled: [[0, 15]],
    recommendation: { action: 'steer', expected_value: 5, target_z: 10, inclination_deg: 80.6 },
    weights: { w_position: 1, w_sand: 0, w_cost: 1 },
    per_realization: [],
    value_cdf: [1, 2, 3, 4].slice(0, count),
    cdf_mean: 2.5,
    pointcloud: { nx: 1, nz: 1, origin: [0, 0], spacing: [1, 1], values: [10] },
    realization_count: count,
  };
}

describe('Store', () => {
  it('latches one action at a time until the next state arrives', () => {
    const store = new Store();
    store.applyState(view(1));
    expect(store.beginAction()).toBe(true);
    expect(store.beginAction()).toBe(false);
    store.applyState(view(2));
    expect(store.beginAction()).toBe(true);
  });

  it('failAction reverts sliders to the committed weights', () => {
    const store = new Store();
    store.applyState(view(1));
    store.setSliders({ w_position: 0.3, w_sand: 0.7, w_cost: 1 });
    store.beginAction();
    store.failAction('rejected');
    expect(store.vm.pending).toBe(false);
    expect(store.vm.sliders).toEqual({ w_position: 1, w_sand: 0, w_cost: 1 });
    expect(store.vm.message).toContain('rejected');
  });

  it('clamps the selected member to the realization count', () => {
    const store = new Store();
    store.applyState(view(1, 3));
    store.selectMember(7);
    expect(store.vm.selectedMember).toBe(2);
    store.selectMember(-2);
    expect(store.vm.selectedMember).toBe(0);
  });

  it('slider dirtiness tracks the last posted weights', () => {
    const store = new Store();
    store.applyState(view(1));
    expect(store.slidersDirty()).toBe(false);  // sliders mirror server state
    store.setSliders({ w_position: 0.3, w_sand: 0.7, w_cost: 1 });
    expect(store.slidersDirty()).toBe(true);
    store.markWeightsPosted();
    expect(store.slidersDirty()).toBe(false);  // no-op release sends nothing
  });

  it('notifies subscribers on every change', () => {
    const store = new Store();
    let calls = 0;
    store.subscribe(() => {
      calls += 1;
    });
    store.applyState(view(1));
    store.selectMember(1);
    store.setSliders({ w_position: 1, w_sand: 0.5, w_cost: 1 });
    expect(calls).toBe(3);
  });
});
