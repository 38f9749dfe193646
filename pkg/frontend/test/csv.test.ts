import { describe, expect, it } from "vitest";

import { REQUIRED_COLUMNS, distinct, parseCampaignCsv } from "../src/csv.js";

const HEADER = REQUIRED_COLUMNS.join(",");

function row(prob: number, slots: number, npdr = 0.5): string {
  const byCol: Record<string, string> = {
    pcp_prob: prob.toFixed(2),
    n_abft: String(slots),
    n_snapshots: "400",
    beacons_mean: "6.350000",
    beacons_ci: "0.120000",
    fbck_mean: "5.900000",
    fbck_ci: "0.110000",
    acks_mean: "3.400000",
    acks_ci: "0.100000",
    delay_ms_mean: "39.160000",
    delay_ms_ci: "1.200000",
    npdr_mean: npdr.toFixed(6),
    npdr_ci: "0.010000",
    alloc_pdr_mean: "0.990000",
    conc0: "0.950000",
    conc2: "0.030000",
    conc3: "0.015000",
    conc4: "0.005000",
  };
  return REQUIRED_COLUMNS.map((c) => byCol[c]).join(",");
}

describe("parseCampaignCsv", () => {
  it("reads a well-formed file", () => {
    const text = [HEADER, row(0.1, 3), row(0.1, 4)].join("\n") + "\n";
    const rows = parseCampaignCsv(text);
    expect(rows).toHaveLength(2);
    expect(rows[0]!.pcp_prob).toBeCloseTo(0.1);
    expect(rows[0]!.n_abft).toBe(3);
    expect(rows[1]!.n_abft).toBe(4);
    expect(rows[0]!.delay_ms_mean).toBeCloseTo(39.16);
  });

  it("accepts columns in any order", () => {
    const cols = [...REQUIRED_COLUMNS].reverse();
    const cells = row(0.2, 5).split(",").reverse();
    const rows = parseCampaignCsv(`${cols.join(",")}\n${cells.join(",")}\n`);
    expect(rows[0]!.pcp_prob).toBeCloseTo(0.2);
    expect(rows[0]!.n_abft).toBe(5);
  });

  it("names every missing column", () => {
    const cols = REQUIRED_COLUMNS.filter(
      (c) => c !== "npdr_mean" && c !== "conc3",
    );
    const text = `${cols.join(",")}\n${cols.map(() => "1").join(",")}\n`;
    expect(() => parseCampaignCsv(text)).toThrowError(
      /missing columns: npdr_mean, conc3/,
    );
  });

  it("rejects ragged rows with the line number", () => {
    const text = `${HEADER}\n1,2,3\n`;
    expect(() => parseCampaignCsv(text)).toThrowError(/line 2/);
  });

  it("rejects non-numeric cells", () => {
    const bad = row(0.1, 3).replace("6.350000", "often");
    expect(() => parseCampaignCsv(`${HEADER}\n${bad}\n`)).toThrowError(
      /beacons_mean/,
    );
  });

  it("keeps nan cells as NaN", () => {
    const bad = row(0.1, 3).replace("0.990000", "nan");
    const rows = parseCampaignCsv(`${HEADER}\n${bad}\n`);
    expect(Number.isNaN(rows[0]!.alloc_pdr_mean)).toBe(true);
  });

  it("rejects empty and header-only input", () => {
    expect(() => parseCampaignCsv("")).toThrowError(/empty/);
    expect(() => parseCampaignCsv(`${HEADER}\n`)).toThrowError(/no data rows/);
  });
});

describe("distinct", () => {
  it("sorts and deduplicates", () => {
    const text =
      [HEADER, row(0.3, 4), row(0.1, 4), row(0.3, 5)].join("\n") + "\n";
    const rows = parseCampaignCsv(text);
    expect(distinct(rows, "pcp_prob")).toEqual([0.1, 0.3]);
    expect(distinct(rows, "n_abft")).toEqual([4, 5]);
  });
});
