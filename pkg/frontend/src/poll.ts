// Fixed-interval poller with overlap protection: if a tick is still
// running when the next interval fires, the new tick is skipped rather
// than stacked behind it.

export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private running = false;

  constructor(
    private readonly tick: () => Promise<void>,
    private readonly intervalMs = 2000,
  ) {}

  start(): void {
    if (this.timer !== null) {
      return;
    }
    void this.run();
    this.timer = setInterval(() => void this.run(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async run(): Promise<void> {
    if (this.running) {
      return;
    }
    this.running = true;
    try {
      await this.tick();
    } finally {
      this.running = false;
    }
  }
}
