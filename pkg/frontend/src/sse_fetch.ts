/** Minimal server-sent-events reader over fetch streaming.
 *
 * Used where EventSource is unavailable (node tests); satisfies the
 * EventSourceLike seam of the state stream.
 */

import { EventSourceLike } from './events.js';

export function sseOverFetch(url: string): EventSourceLike {
  const controller = new AbortController();
  const listeners: Array<(ev: MessageEvent) => void> = [];

  (async () => {
    const resp = await fetch(url, { signal: controller.signal });
    if (!resp.ok || resp.body === null) {
      return;
    }
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buffer = '';
    for (;;) {
      const { done, value } = await reader.read();
      if (done) {
        break;
      }
      buffer += decoder.decode(value, { stream: true });
      let idx;
      while ((idx = buffer.indexOf('\n\n')) >= 0) {
        const frame = buffer.slice(0, idx);
        buffer = buffer.slice(idx + 2);
        const data = frame
          .split('\n')
          .filter((line) => line.startsWith('data: '))
          .map((line) => line.slice('data: '.length))
          .join('\n');
        if (data) {
          const ev = { data } as MessageEvent;
          for (const listener of listeners) {
            listener(ev);
          }
        }
      }
    }
  })().catch(() => {
    // stream closed or aborted; consumers resynchronize via getState
  });

  return {
    addEventListener(type: string, listener: (ev: MessageEvent) => void): void {
      if (type === 'message') {
        listeners.push(listener);
      }
    },
    close(): void {
      controller.abort();
    },
  };
}
