/** Client view-model: committed server state plus local UI state.
 *
 * All values shown come from the service; the store only tracks which
 * realization is selected, the slider positions, and the pending latch that
 * disables controls while a decision is in flight.
 */

import { StateView, Weights } from './types.js';

export interface ViewModel {
  state: StateView | null;
  selectedMember: number;
  sliders: Weights;
  pending: boolean;
  message: string;
}

export class Store {
  vm: ViewModel = {
    state: null,
    selectedMember: 0,
    sliders: { w_position: 1.0, w_sand: 0.0, w_cost: 1.0 },
    pending: false,
    message: '',
  };
  private lastPostedWeights: Weights | null = null;
  private listeners: Array<(vm: ViewModel) => void> = [];

  subscribe(listener: (vm: ViewModel) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.vm);
    }
  }

  applyState(view: StateView): void {
    this.vm.state = view;
    this.vm.pending = false;
    this.vm.sliders = { ...view.weights };
    this.lastPostedWeights = { ...view.weights };
    if (this.vm.selectedMember >= view.realization_count) {
      this.vm.selectedMember = 0;
    }
    this.emit();
  }

  selectMember(index: number): void {
    const count = this.vm.state?.realization_count ?? 0;
    if (count === 0) {
      this.vm.selectedMember = 0;
    } else {
      this.vm.selectedMember = Math.min(Math.max(index, 0), count - 1);
    }
    this.emit();
  }

  setSliders(weights: Weights): void {
    this.vm.sliders = { ...weights };
    this.emit();
  }

  /** Whether the sliders differ from the last posted weights (no-op guard). */
  slidersDirty(): boolean {
    const last = this.lastPostedWeights;
    if (last === null) {
      return true;
    }
    const w = this.vm.sliders;
    return (
      w.w_position !== last.w_position ||
      w.w_sand !== last.w_sand ||
      w.w_cost !== last.w_cost
    );
  }

  markWeightsPosted(): void {
    this.lastPostedWeights = { ...this.vm.sliders };
  }

  /** Latch a decision; returns false when one is already in flight. */
  beginAction(): boolean {
    if (this.vm.pending) {
      return false;
    }
    this.vm.pending = true;
    this.emit();
    return true;
  }

  failAction(message: string): void {
    this.vm.pending = false;
    this.vm.message = message;
    if (this.vm.state) {
      this.vm.sliders = { ...this.vm.state.weights };
    }
    this.emit();
  }

  setMessage(message: string): void {
    this.vm.message = message;
    this.emit();
  }
}
