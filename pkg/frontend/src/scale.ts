/** Linear axis mapping with conventional 1-2-5 tick placement. */

export interface LinearScale {
  map: (v: number) => number;
  ticks: number[];
  domain: [number, number];
}

export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const raw = (hi - lo) / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm < 1.5 ? 1 : norm < 3 ? 2 : norm < 7 ? 5 : 10) * mag;
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

export function linearScale(
  domain: [number, number],
  range: [number, number],
  tickCount = 5,
): LinearScale {
  let [d0, d1] = domain;
  if (d1 === d0) {
    // degenerate domains (single-point data) still need a usable axis
    d0 -= 0.5;
    d1 += 0.5;
  }
  const [r0, r1] = range;
  const k = (r1 - r0) / (d1 - d0);
  return {
    map: (v: number) => r0 + (v - d0) * k,
    ticks: niceTicks(d0, d1, tickCount),
    domain: [d0, d1],
  };
}
