/** Console wiring: session lifecycle, controls, and live rendering. */

import { ApiClient, ApiError } from './api.js';
import { bannerText, expectedValueText } from './banner.js';
import { debounce } from './debounce.js';
import { StateStream } from './events.js';
import { DEPTH_EXAGGERATION, Viewport, drawPointcloud, drawTrajectories, drawValueCurve } from './render.js';
import { Store } from './store.js';
import { PRESET_POSITION_COST, PRESET_SAND_QUALITY, StateView, Weights } from './types.js';

const api = new ApiClient('');
const store = new Store();
const stream = new StateStream((view) => store.applyState(view));

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

let sessionId: string | null = null;

function viewportFor(state: StateView, canvas: HTMLCanvasElement): Viewport {
  const pc = state.pointcloud;
  const xMin = pc.origin[0];
  const xMax = pc.origin[0] + pc.nx * pc.spacing[0];
  const zMin = pc.origin[1];
  const zMax = pc.origin[1] + pc.nz * pc.spacing[1];
  // honor the depth exaggeration by shaping the canvas height to the section
  const aspect = ((zMax - zMin) * DEPTH_EXAGGERATION) / (xMax - xMin);
  canvas.height = Math.round(canvas.width * aspect);
  return { width: canvas.width, height: canvas.height, xMin, xMax, zMin, zMax };
}

function render(): void {
  const vm = store.vm;
  const state = vm.state;
  el<HTMLDivElement>('message').textContent = vm.message;
  if (!state) {
    return;
  }
  el<HTMLDivElement>('banner').textContent = bannerText(state.recommendation, state.status);
  el<HTMLDivElement>('expected').textContent = expectedValueText(state.recommendation);
  el<HTMLDivElement>('meta').textContent =
    `v${state.version} | ${state.status} | bit x=${state.bit.x.toFixed(1)} m ` +
    `z=${state.bit.z.toFixed(2)} m @ ${state.bit.inclination.toFixed(2)}° | ` +
    `${state.realization_count} realizations`;
  el<HTMLSpanElement>('member-label').textContent =
    `${vm.selectedMember + 1}/${state.realization_count}`;

  for (const key of ['w_position', 'w_sand', 'w_cost'] as const) {
    const slider = el<HTMLInputElement>(key);
    if (document.activeElement !== slider) {
      slider.value = String(vm.sliders[key]);
    }
    el<HTMLSpanElement>(`${key}-label`).textContent = Number(vm.sliders[key]).toFixed(2);
  }

  const section = el<HTMLCanvasElement>('section');
  const ctx = section.getContext('2d');
  if (ctx) {
    const vp = viewportFor(state, section);
    ctx.clearRect(0, 0, vp.width, vp.height);
    drawPointcloud(ctx, state.pointcloud, vp);
    drawTrajectories(ctx, vp, state, vm.selectedMember);
  }
  const curve = el<HTMLCanvasElement>('cdf');
  const cctx = curve.getContext('2d');
  if (cctx) {
    drawValueCurve(cctx, curve.width, curve.height, state, vm.selectedMember);
  }

  const disabled = vm.pending || state.status !== 'DRILLING' || !sessionId;
  for (const id of ['accept', 'steer', 'stop']) {
    el<HTMLButtonElement>(id).disabled = disabled;
  }
}

store.subscribe(render);

const postWeights = debounce(async (weights: Weights) => {
  if (!sessionId || !store.slidersDirty()) {
    return;
  }
  try {
    store.markWeightsPosted();
    await api.postWeights(sessionId, weights);
    // the refreshed view arrives through the event stream
  } catch (err) {
    store.failAction(err instanceof ApiError ? `weights rejected: ${err.message}` : String(err));
  }
}, 250);

function hookSliders(): void {
  for (const key of ['w_position', 'w_sand', 'w_cost'] as const) {
    el<HTMLInputElement>(key).addEventListener('input', () => {
      const sliders = {
        w_position: Number(el<HTMLInputElement>('w_position').value),
        w_sand: Number(el<HTMLInputElement>('w_sand').value),
        w_cost: Number(el<HTMLInputElement>('w_cost').value),
      };
      store.setSliders(sliders);
      postWeights(sliders);
    });
  }
  el<HTMLButtonElement>('preset-position').addEventListener('click', () => {
    store.setSliders(PRESET_POSITION_COST);
    postWeights(PRESET_POSITION_COST);
  });
  el<HTMLButtonElement>('preset-sand').addEventListener('click', () => {
    store.setSliders(PRESET_SAND_QUALITY);
    postWeights(PRESET_SAND_QUALITY);
  });
}

async function decide(action: 'accept' | 'steer' | 'stop'): Promise<void> {
  if (!sessionId || !store.beginAction()) {
    return;
  }
  try {
    const targetZ =
      action === 'steer' ? Number(el<HTMLInputElement>('steer-target').value) : undefined;
    await api.postDecision(sessionId, action, targetZ);
    store.setMessage('');
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      store.failAction(`rejected: ${JSON.stringify(err.detail)}`);
    } else {
      store.failAction(String(err));
    }
  }
}

async function start(): Promise<void> {
  const ensemble = Number(el<HTMLInputElement>('ensemble').value) || 100;
  const seed = Number(el<HTMLInputElement>('seed').value) || 1;
  store.setMessage('creating session…');
  try {
    sessionId = await api.createSession({
      ensemble_size: ensemble,
      seeds: [seed, seed + 1, seed + 2],
    });
    store.setMessage('');
    stream.connect(api.eventsUrl(sessionId));
    store.applyState(await api.getState(sessionId));
  } catch (err) {
    store.setMessage(`session failed: ${String(err)}`);
  }
}

export function init(): void {
  hookSliders();
  el<HTMLButtonElement>('start').addEventListener('click', () => void start());
  el<HTMLButtonElement>('accept').addEventListener('click', () => void decide('accept'));
  el<HTMLButtonElement>('steer').addEventListener('click', () => void decide('steer'));
  el<HTMLButtonElement>('stop').addEventListener('click', () => void decide('stop'));
  el<HTMLButtonElement>('member-prev').addEventListener('click', () =>
    store.selectMember(store.vm.selectedMember - 1),
  );
  el<HTMLButtonElement>('member-next').addEventListener('click', () =>
    store.selectMember(store.vm.selectedMember + 1),
  );
}

if (typeof document !== 'undefined') {
  window.addEventListener('DOMContentLoaded', init);
}
