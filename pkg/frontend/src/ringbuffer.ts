// Fixed-horizon time series for the strip charts: keeps the most recent
// window of (t, value) points and drops everything older. Persistence is the
// server's job, not ours.

export class TimeSeriesRing {
  private t: number[] = [];
  private v: number[] = [];

  constructor(readonly windowS: number = 30) {}

  push(t: number, value: number): void {
    this.t.push(t);
    this.v.push(value);
    const cutoff = t - this.windowS;
    let drop = 0;
    while (drop < this.t.length && this.t[drop] < cutoff) drop++;
    if (drop > 0) {
      this.t.splice(0, drop);
      this.v.splice(0, drop);
    }
  }

  get length(): number {
    return this.t.length;
  }

  times(): readonly number[] {
    return this.t;
  }

  values(): readonly number[] {
    return this.v;
  }

  clear(): void {
    this.t.length = 0;
    this.v.length = 0;
  }
}
