import { describe, expect, it } from 'vitest';

import { bannerText, expectedValueText, formatAngle } from '../src/banner.js';

describe('decision banner', () => {
  it('shows the proposed inclination in degrees', () => {
    const rec = { action: 'steer' as const, expected_value: 12.3, target_z: 10, inclination_deg: 81.1 };
    expect(bannerText(rec, 'DRILLING')).toBe('81.1°');
  });

  it('shows stop when stopping is recommended', () => {
    expect(bannerText({ action: 'stop', expected_value: 0 }, 'DRILLING')).toBe('stop');
  });

  it('shows terminal statuses', () => {
    expect(bannerText(null, 'COMPLETED')).toBe('completed');
    expect(bannerText(null, 'STOPPED')).toBe('stopped');
  });

  it('formats angles to a tenth of a degree', () => {
    expect(formatAngle(88.4999)).toBe('88.5°');
  });

  it('summarizes the expected value', () => {
    expect(expectedValueText({ action: 'stop', expected_value: 1.2345 })).toContain('1.23');
    expect(expectedValueText(null)).toBe('');
  });
});
