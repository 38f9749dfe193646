/**
 * Reader for the simulator's sweep output.
 *
 * The file is plain ASCII with a fixed comma-separated header and one row
 * per campaign cell; every value is numeric.  Parsing is strict: unknown
 * dialects, missing columns and ragged rows are reported, not repaired.
 */

export interface CampaignRow {
  pcp_prob: number;
  n_abft: number;
  n_snapshots: number;
  beacons_mean: number;
  beacons_ci: number;
  fbck_mean: number;
  fbck_ci: number;
  acks_mean: number;
  acks_ci: number;
  delay_ms_mean: number;
  delay_ms_ci: number;
  npdr_mean: number;
  npdr_ci: number;
  alloc_pdr_mean: number;
  conc0: number;
  conc2: number;
  conc3: number;
  conc4: number;
}

export const REQUIRED_COLUMNS: readonly (keyof CampaignRow)[] = [
  "pcp_prob",
  "n_abft",
  "n_snapshots",
  "beacons_mean",
  "beacons_ci",
  "fbck_mean",
  "fbck_ci",
  "acks_mean",
  "acks_ci",
  "delay_ms_mean",
  "delay_ms_ci",
  "npdr_mean",
  "npdr_ci",
  "alloc_pdr_mean",
  "conc0",
  "conc2",
  "conc3",
  "conc4",
];

export function parseCampaignCsv(text: string): CampaignRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new Error("campaign CSV is empty");
  }
  const header = (lines[0] ?? "").split(",").map((h) => h.trim());
  const missing = REQUIRED_COLUMNS.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new Error(`campaign CSV is missing columns: ${missing.join(", ")}`);
  }
  const index = new Map(header.map((h, i) => [h, i]));
  const rows: CampaignRow[] = [];
  for (let ln = 1; ln < lines.length; ln++) {
    const cells = (lines[ln] ?? "").split(",");
    if (cells.length !== header.length) {
      throw new Error(
        `campaign CSV line ${ln + 1}: expected ${header.length} cells, got ${cells.length}`,
      );
    }
    const row = {} as Record<keyof CampaignRow, number>;
    for (const col of REQUIRED_COLUMNS) {
      const cell = (cells[index.get(col)!] ?? "").trim();
      const v = Number(cell);
      if (cell === "" || (Number.isNaN(v) && cell.toLowerCase() !== "nan")) {
        throw new Error(
          `campaign CSV line ${ln + 1}: column ${col} is not numeric: "${cell}"`,
        );
      }
      row[col] = v;
    }
    rows.push(row as CampaignRow);
  }
  if (rows.length === 0) {
    throw new Error("campaign CSV has a header but no data rows");
  }
  return rows;
}

/** Distinct values of a numeric column, ascending. */
export function distinct(rows: CampaignRow[], col: keyof CampaignRow): number[] {
  return [...new Set(rows.map((r) => r[col]))].sort((a, b) => a - b);
}
