/** Debounced request scheduling with sequence-numbered stale discard.
 *
 * Slider drags collapse into one request after the quiet period; responses
 * carry the sequence number they were issued under and are dropped when a
 * newer request has been scheduled since.
 */

export class DebouncedRequests {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private seq = 0;

  constructor(private readonly delayMs: number = 300) {}

  /** Reset the quiet period; `fire` runs once it elapses with a fresh sequence number. */
  schedule(fire: (seq: number) => void): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      fire(++this.seq);
    }, this.delayMs);
  }

  /** True while `seq` is still the newest issued request. */
  isCurrent(seq: number): boolean {
    return seq === this.seq;
  }

  get pending(): boolean {
    return this.timer !== null;
  }
}
