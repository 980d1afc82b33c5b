/** Debounced single-flight runner for segmentation requests.
 *
 * Parameter changes schedule a run 300 ms out; scheduling again replaces the
 * pending one. While a request is in flight, new triggers queue-replace: at
 * most one request runs at a time and only the newest queued trigger fires
 * afterwards. runNow() (the Run button) skips the debounce but still
 * respects single-flight.
 */
export class SegmentRunner {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight = false;
  private queued: (() => Promise<void>) | null = null;

  constructor(private debounceMs = 300) {}

  schedule(run: () => Promise<void>): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.launch(run);
    }, this.debounceMs);
  }

  runNow(run: () => Promise<void>): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    return this.launch(run);
  }

  private async launch(run: () => Promise<void>): Promise<void> {
    if (this.inFlight) {
      this.queued = run; // replace whatever was waiting
      return;
    }
    this.inFlight = true;
    try {
      await run();
    } finally {
      this.inFlight = false;
      const next = this.queued;
      this.queued = null;
      if (next) void this.launch(next);
    }
  }

  get busy(): boolean {
    return this.inFlight;
  }
}
