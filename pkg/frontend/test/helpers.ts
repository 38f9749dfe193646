import { CampaignRow } from "../src/csv.js";

export function makeRow(over: Partial<CampaignRow> = {}): CampaignRow {
  return {
    pcp_prob: 0.1,
    n_abft: 4,
    n_snapshots: 400,
    beacons_mean: 6.3,
    beacons_ci: 0.12,
    fbck_mean: 5.9,
    fbck_ci: 0.11,
    acks_mean: 3.4,
    acks_ci: 0.1,
    delay_ms_mean: 40.0,
    delay_ms_ci: 1.5,
    npdr_mean: 0.6,
    npdr_ci: 0.02,
    alloc_pdr_mean: 0.99,
    conc0: 0.95,
    conc2: 0.03,
    conc3: 0.015,
    conc4: 0.005,
    ...over,
  };
}

/** Full grid of four probabilities by six slot counts with varied values. */
export function makeGrid(): CampaignRow[] {
  const rows: CampaignRow[] = [];
  const probs = [0.1, 0.2, 0.3, 0.4];
  const slots = [3, 4, 5, 6, 7, 8];
  probs.forEach((p, pi) => {
    slots.forEach((s, si) => {
      rows.push(
        makeRow({
          pcp_prob: p,
          n_abft: s,
          beacons_mean: 7 - pi * 0.8 + si * 0.05,
          fbck_mean: 6 - pi * 0.8 + si * 0.04,
          acks_mean: Math.min(s, 3.5 - pi * 0.4),
          delay_ms_mean: 25 + si * 12 + pi * 18,
          npdr_mean: 0.9 - 0.07 * Math.abs(si - 2) - 0.1 * pi,
          conc2: 0.01 + 0.012 * pi,
          conc3: 0.004 + 0.005 * pi,
          conc4: 0.001 + 0.002 * pi,
          conc0: 0.985 - 0.019 * pi,
        }),
      );
    });
  });
  return rows;
}
