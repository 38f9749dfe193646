/** Figure dispatch: read the CSV once, build the requested image, write it. */

import { readFileSync, writeFileSync } from "node:fs";

import { CampaignRow, parseCampaignCsv } from "./csv.js";
import {
  concurrencyFigure,
  delayFigure,
  handshakesFigure,
  npdrFigure,
} from "./figures.js";

export type FigureId = "handshakes" | "delay" | "npdr" | "concurrency";

export const FIGURE_IDS: readonly FigureId[] = [
  "handshakes",
  "delay",
  "npdr",
  "concurrency",
];

export interface FigureSpec {
  figure: FigureId;
  csv: string;
  out: string;
}

const BUILDERS: Record<FigureId, (rows: CampaignRow[]) => string> = {
  handshakes: handshakesFigure,
  delay: delayFigure,
  npdr: npdrFigure,
  concurrency: concurrencyFigure,
};

export function buildFigure(id: FigureId, rows: CampaignRow[]): string {
  const builder = BUILDERS[id];
  if (!builder) {
    throw new Error(`unknown figure id: ${id}`);
  }
  return builder(rows);
}

export function render(spec: FigureSpec): void {
  const rows = parseCampaignCsv(readFileSync(spec.csv, "utf-8"));
  writeFileSync(spec.out, buildFigure(spec.figure, rows));
}
