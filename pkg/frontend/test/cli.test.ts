import { mkdtempSync, readdirSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { REQUIRED_COLUMNS } from "../src/csv.js";
import { main } from "../src/cli.js";
import { makeGrid } from "./helpers.js";

function gridCsv(): string {
  const rows = makeGrid();
  const lines = [REQUIRED_COLUMNS.join(",")];
  for (const r of rows) {
    lines.push(REQUIRED_COLUMNS.map((c) => String(r[c])).join(","));
  }
  return lines.join("\n") + "\n";
}

describe("command line entry", () => {
  let dir: string;

  beforeEach(() => {
    dir = mkdtempSync(join(tmpdir(), "figtest-"));
    vi.spyOn(process.stdout, "write").mockReturnValue(true);
    vi.spyOn(process.stderr, "write").mockReturnValue(true);
  });

  afterEach(() => {
    vi.restoreAllMocks();
  });

  it("renders all four figures", () => {
    const csv = join(dir, "campaign.csv");
    writeFileSync(csv, gridCsv());
    const out = join(dir, "figs");
    const code = main(["--csv", csv, "--outdir", out]);
    expect(code).toBe(0);
    const files = readdirSync(out).sort();
    expect(files).toEqual([
      "concurrency.svg",
      "delay.svg",
      "handshakes.svg",
      "npdr.svg",
    ]);
    for (const f of files) {
      expect(readFileSync(join(out, f), "utf8")).toContain("</svg>");
    }
  });

  it("renders a single named figure", () => {
    const csv = join(dir, "campaign.csv");
    writeFileSync(csv, gridCsv());
    const out = join(dir, "one");
    expect(main(["--csv", csv, "--outdir", out, "--figure", "npdr"])).toBe(0);
    expect(readdirSync(out)).toEqual(["npdr.svg"]);
  });

  it("rejects missing arguments", () => {
    expect(main([])).toBe(2);
    expect(main(["--csv", "x.csv"])).toBe(2);
  });

  it("rejects an unknown figure id", () => {
    const csv = join(dir, "campaign.csv");
    writeFileSync(csv, gridCsv());
    expect(main(["--csv", csv, "--outdir", dir, "--figure", "bogus"])).toBe(2);
  });

  it("fails descriptively on a truncated CSV", () => {
    const csv = join(dir, "bad.csv");
    const cols = REQUIRED_COLUMNS.filter((c) => c !== "npdr_mean");
    writeFileSync(csv, cols.join(",") + "\n");
    const err = vi.mocked(process.stderr.write);
    expect(main(["--csv", csv, "--outdir", join(dir, "figs")])).toBe(1);
    const msg = err.mock.calls.map((c) => String(c[0])).join("");
    expect(msg).toContain("missing columns");
    expect(msg).toContain("npdr_mean");
  });
});
