/** Version-ordered consumer of the state event stream.
 *
 * Every mutation on the server emits one full state view; the consumer
 * applies them in version order and drops stale or duplicate events, so the
 * displayed version never decreases even if delivery is scrambled.
 */

import { StateView } from './types.js';

export interface EventSourceLike {
  addEventListener(type: string, listener: (ev: MessageEvent) => void): void;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export class StateStream {
  private source: EventSourceLike | null = null;
  private version = 0;

  constructor(
    private onState: (view: StateView) => void,
    private factory: EventSourceFactory = (url) => new EventSource(url),
  ) {}

  get currentVersion(): number {
    return this.version;
  }

  /** Apply a view if it is newer than anything seen; returns whether applied. */
  accept(view: StateView): boolean {
    if (view.version <= this.version) {
      return false;
    }
    this.version = view.version;
    this.onState(view);
    return true;
  }

  connect(url: string): void {
    this.disconnect();
    this.source = this.factory(url);
    this.source.addEventListener('message', (ev) => {
      try {
        this.accept(JSON.parse(ev.data) as StateView);
      } catch {
        // malformed frame: resynchronize via a plain state fetch if needed
      }
    });
  }

  disconnect(): void {
    if (this.source) {
      this.source.close();
      this.source = null;
    }
  }
}
