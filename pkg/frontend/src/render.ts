/** Canvas renderers: uncertainty raster, trajectories, value curve.
 *
 * Depth is exaggerated 10:1 by default to match the familiar section aspect.
 */

import { complementaryCdf } from './cdf.js';
import { PerRealization, Pointcloud, StateView } from './types.js';

export const DEPTH_EXAGGERATION = 10;

export interface Viewport {
  width: number;
  height: number;
  xMin: number;
  xMax: number;
  zMin: number;
  zMax: number;
}

export function worldToScreen(
  vp: Viewport,
  x: number,
  z: number,
): [number, number] {
  const sx = ((x - vp.xMin) / (vp.xMax - vp.xMin)) * vp.width;
  const sy = ((vp.zMax - z) / (vp.zMax - vp.zMin)) * vp.height;
  return [sx, sy];
}

function resistivityColor(value: number): [number, number, number] {
  // dark shale (10) through bright sands (150, 250), log-scaled
  const t = Math.min(Math.max((Math.log10(value) - 1) / (Math.log10(250) - 1), 0), 1);
  const r = Math.round(40 + 215 * t);
  const g = Math.round(40 + 170 * t);
  const b = Math.round(48 + 30 * t);
  return [r, g, b];
}

export function drawPointcloud(
  ctx: CanvasRenderingContext2D,
  pc: Pointcloud,
  vp: Viewport,
): void {
  const image = ctx.createImageData(pc.nx, pc.nz);
  for (let i = 0; i < pc.values.length; i += 1) {
    const [r, g, b] = resistivityColor(pc.values[i] ?? 10);
    image.data[4 * i] = r;
    image.data[4 * i + 1] = g;
    image.data[4 * i + 2] = b;
    image.data[4 * i + 3] = 255;
  }
  const off = new OffscreenCanvas(pc.nx, pc.nz);
  const octx = off.getContext('2d') as OffscreenCanvasRenderingContext2D;
  octx.putImageData(image, 0, 0);
  const [x0, y0] = worldToScreen(vp, pc.origin[0], pc.origin[1] + pc.nz * pc.spacing[1]);
  const [x1, y1] = worldToScreen(vp, pc.origin[0] + pc.nx * pc.spacing[0], pc.origin[1]);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, x0, y0, x1 - x0, y1 - y0);
}

function drawPath(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  points: [number, number][],
  style: string,
  width: number,
): void {
  if (points.length < 2) {
    return;
  }
  ctx.strokeStyle = style;
  ctx.lineWidth = width;
  ctx.beginPath();
  const first = points[0]!;
  ctx.moveTo(...worldToScreen(vp, first[0], first[1]));
  for (const [x, z] of points.slice(1)) {
    ctx.lineTo(...worldToScreen(vp, x, z));
  }
  ctx.stroke();
}

export function drawTrajectories(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  state: StateView,
  selectedMember: number,
): void {
  state.per_realization.forEach((member: PerRealization, i: number) => {
    if (i !== selectedMember) {
      drawPath(ctx, vp, member.trajectory, 'rgba(255,255,255,0.25)', 1);
    }
  });
  const selected = state.per_realization[selectedMember];
  if (selected) {
    drawPath(ctx, vp, selected.trajectory, '#ffd34d', 2);
  }
  drawPath(ctx, vp, state.drilled, '#7a1010', 3);
  // the committed next segment in thick red
  const rec = state.recommendation;
  if (rec && rec.action === 'steer' && rec.target_z !== undefined) {
    const bit: [number, number] = [state.bit.x, state.bit.z];
    const next: [number, number] = [state.bit.x + 28.56, rec.target_z];
    drawPath(ctx, vp, [bit, next], '#ff2b2b', 4);
  }
}

export function drawValueCurve(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  state: StateView,
  selectedMember: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const values = state.value_cdf;
  if (values.length === 0) {
    return;
  }
  const lo = Math.min(values[0]!, 0);
  const hi = Math.max(values[values.length - 1]!, 1e-9);
  const toX = (v: number) => ((v - lo) / (hi - lo || 1)) * (width - 20) + 10;
  const toY = (f: number) => height - 15 - f * (height - 30);

  ctx.strokeStyle = '#9ecbff';
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(toX(lo), toY(1));
  let prevF = 1;
  for (const p of complementaryCdf(values)) {
    ctx.lineTo(toX(p.value), toY(prevF));
    ctx.lineTo(toX(p.value), toY(p.fractionExceeding));
    prevF = p.fractionExceeding;
  }
  ctx.stroke();

  const mark = (v: number, style: string) => {
    ctx.strokeStyle = style;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(toX(v), toY(0));
    ctx.lineTo(toX(v), toY(1));
    ctx.stroke();
  };
  mark(state.cdf_mean, '#ff9d2b');
  const member = state.per_realization[selectedMember];
  if (member) {
    mark(member.predicted_value, '#ffd34d');
  }
}
