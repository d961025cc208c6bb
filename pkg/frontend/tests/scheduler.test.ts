import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { DebouncedRequests } from '../src/scheduler.js';

describe('debounced requests', () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it('collapses a burst of schedules into one fire', () => {
    const requests = new DebouncedRequests(300);
    const fire = vi.fn();
    for (let i = 0; i < 8; i++) {
      requests.schedule(fire);
      vi.advanceTimersByTime(100); // keep poking before the quiet period ends
    }
    expect(fire).not.toHaveBeenCalled();
    vi.advanceTimersByTime(300);
    expect(fire).toHaveBeenCalledTimes(1);
    expect(fire).toHaveBeenCalledWith(1);
  });

  it('assigns increasing sequence numbers per fire', () => {
    const requests = new DebouncedRequests(300);
    const seen: number[] = [];
    requests.schedule((seq) => seen.push(seq));
    vi.advanceTimersByTime(300);
    requests.schedule((seq) => seen.push(seq));
    vi.advanceTimersByTime(300);
    expect(seen).toEqual([1, 2]);
  });

  it('marks older sequences stale once a newer request fires', () => {
    const requests = new DebouncedRequests(300);
    let first = 0;
    requests.schedule((seq) => {
      first = seq;
    });
    vi.advanceTimersByTime(300);
    expect(requests.isCurrent(first)).toBe(true);
    requests.schedule(() => undefined);
    vi.advanceTimersByTime(300);
    expect(requests.isCurrent(first)).toBe(false);
  });

  it('reports pending state while the quiet period runs', () => {
    const requests = new DebouncedRequests(300);
    expect(requests.pending).toBe(false);
    requests.schedule(() => undefined);
    expect(requests.pending).toBe(true);
    vi.advanceTimersByTime(300);
    expect(requests.pending).toBe(false);
  });
});
