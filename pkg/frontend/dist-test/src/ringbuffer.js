// Fixed-horizon time series for the strip charts: keeps the most recent
// window of (t, value) points and drops everything older. Persistence is the
// server's job, not ours.
export class TimeSeriesRing {
    constructor(windowS = 30) {
        this.windowS = windowS;
        this.t = [];
        this.v = [];
    }
    push(t, value) {
        this.t.push(t);
        this.v.push(value);
        const cutoff = t - this.windowS;
        let drop = 0;
        while (drop < this.t.length && this.t[drop] < cutoff)
            drop++;
        if (drop > 0) {
            this.t.splice(0, drop);
            this.v.splice(0, drop);
        }
    }
    get length() {
        return this.t.length;
    }
    times() {
        return this.t;
    }
    values() {
        return this.v;
    }
    clear() {
        this.t.length = 0;
        this.v.length = 0;
    }
}
