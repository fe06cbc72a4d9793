/** Complementary cumulative view of the per-realization predicted values:
 * for a value v on the x-axis, the curve gives the fraction of realizations
 * whose predicted well value exceeds v. */

export interface CdfPoint {
  value: number;
  fractionExceeding: number;
}

/** Step-curve points from an ascending list of member values. */
export function complementaryCdf(sortedValues: number[]): CdfPoint[] {
  const n = sortedValues.length;
  const points: CdfPoint[] = [];
  for (let i = 0; i < n; i += 1) {
    points.push({ value: sortedValues[i]!, fractionExceeding: 1 - (i + 1) / n });
  }
  return points;
}

/** Fraction of members strictly exceeding a value. */
export function exceedanceAt(sortedValues: number[], value: number): number {
  let lo = 0;
  let hi = sortedValues.length;
  while (lo < hi) {
    const mid = (lo + hi) >> 1;
    if (sortedValues[mid]! <= value) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return (sortedValues.length - lo) / sortedValues.length;
}
