/** Decision banner wording: an angle in degrees, or "stop". */

import { Recommendation } from './types.js';

export function formatAngle(deg: number): string {
  return `${deg.toFixed(1)}°`;
}

export function bannerText(rec: Recommendation | null, status: string): string {
  if (status === 'COMPLETED') {
    return 'completed';
  }
  if (status === 'STOPPED') {
    return 'stopped';
  }
  if (rec === null) {
    return '…';
  }
  if (rec.action === 'stop') {
    return 'stop';
  }
  return formatAngle(rec.inclination_deg ?? 90);
}

export function expectedValueText(rec: Recommendation | null): string {
  if (rec === null) {
    return '';
  }
  return `expected value ${rec.expected_value.toFixed(2)} units`;
}
