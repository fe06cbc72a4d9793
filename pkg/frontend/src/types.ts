/** Wire types mirrored from the service's state view. */

export interface Weights {
  w_position: number;
  w_sand: number;
  w_cost: number;
}

export interface Recommendation {
  action: 'steer' | 'stop';
  expected_value: number;
  target_z?: number;
  inclination_deg?: number;
}

export interface PerRealization {
  trajectory: [number, number][];
  predicted_value: number;
}

export interface Pointcloud {
  nx: number;
  nz: number;
  origin: [number, number];
  spacing: [number, number];
  /** Row-major, top row first. */
  values: number[];
}

export interface StateView {
  version: number;
  status: 'DRILLING' | 'STOPPED' | 'COMPLETED';
  bit: { x: number; z: number; inclination: number };
  drilled: [number, number][];
  recommendation: Recommendation | null;
  weights: Weights;
  per_realization: PerRealization[];
  value_cdf: number[];
  cdf_mean: number;
  pointcloud: Pointcloud;
  realization_count: number;
}

/** Objective presets offered in the console. */
export const PRESET_POSITION_COST: Weights = { w_position: 1.0, w_sand: 0.0, w_cost: 1.0 };
export const PRESET_SAND_QUALITY: Weights = { w_position: 0.3, w_sand: 0.7, w_cost: 1.0 };
