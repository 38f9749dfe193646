"""Command-line interface: single-cell runs, campaign sweeps, benchmark.

Configuration files are flat ``key = value`` text; any key matching a field
of the scenario, beacon-interval, radio, antenna or MAC dataclasses overrides
that field.  Campaign-level keys: ``seed``, ``n_snapshots``, ``pcp_probs``,
``abft_slots``, ``snapshot_ms``, ``workers``.  Per-MCS overrides use keys of
the form ``mcs13_min_sinr_db``.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace

from .geometry import ScenarioConfig
from .mac import BiConfig, MacParams, SimConfig, run_snapshot
from .metrics import (
    CellResult,
    aggregate_cell,
    ideal_neighbor_count,
    rows_to_csv,
    summarize_snapshot,
    trace_to_text,
)
from .radio import AntennaConfig, McsEntry, PhyKind, RadioConfig, default_mcs_table

DEFAULT_PROBS = (0.1, 0.2, 0.3, 0.4)
DEFAULT_SLOTS = (3, 4, 5, 6, 7, 8)
CELL_SEED_STRIDE = 10**6
BENCH_SEED_OFFSET = 99 * 10**6


def parse_config_file(path: str) -> dict[str, object]:
    out: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            out[key] = _parse_value(val)
    return out


def _parse_value(text: str) -> object:
    if "," in text:
        return [_parse_scalar(t.strip()) for t in text.split(",") if t.strip()]
    return _parse_scalar(text)


def _parse_scalar(text: str) -> object:
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


_MCS_KEY = re.compile(r"^mcs(\d+)_(rate_bps|sensitivity_dbm|min_sinr_db|phy)$")


def build_sim_config(overrides: dict[str, object], pcp_prob: float,
                     n_abft: int) -> SimConfig:
    def pick(cls) -> dict:
        names = {f.name for f in fields(cls)}
        return {k: v for k, v in overrides.items() if k in names}

    scen = ScenarioConfig(**{**pick(ScenarioConfig),
                             "pcp_probability": pcp_prob})
    bi = BiConfig(**{**pick(BiConfig), "n_abft_slots": n_abft})
    mac = MacParams(**pick(MacParams))
    ant = AntennaConfig(**pick(AntennaConfig))
    mcs_table = default_mcs_table()
    for key, val in overrides.items():
        m = _MCS_KEY.match(key)
        if not m:
            continue
        idx = int(m.group(1))
        f = m.group(2)
        entry = mcs_table.get(idx) or McsEntry(idx, PhyKind.OFDM, 1, 0.0, 0.0)
        if f == "phy":
            entry = replace(entry, phy=PhyKind(val))
        else:
            entry = replace(entry, **{f: val})
        mcs_table[idx] = entry
    radio_kwargs = pick(RadioConfig)
    radio_kwargs.pop("antenna", None)
    radio_kwargs.pop("mcs", None)
    radio = RadioConfig(antenna=ant, mcs=mcs_table, **radio_kwargs)
    snapshot_ns = int(overrides.get("snapshot_ms", 2000)) * 1_000_000
    return SimConfig(scenario=scen, bi=bi, radio=radio, mac=mac,
                     snapshot_ns=snapshot_ns)


def _run_cell(args: tuple) -> tuple[int, dict[str, float]]:
    cell_index, seed_block, pcp_prob, n_abft, overrides, base_seed, \
        n_snapshots = args
    cfg = build_sim_config(overrides, pcp_prob, n_abft)
    snaps = []
    for i in range(n_snapshots):
        seed = base_seed + seed_block * CELL_SEED_STRIDE + i
        result = run_snapshot(cfg, seed)
        snaps.append(summarize_snapshot(result, cfg))
    row = aggregate_cell(CellResult(pcp_prob, n_abft, snaps))
    return cell_index, row


def run_campaign(
    overrides: dict[str, object],
    base_seed: int,
    n_snapshots: int,
    probs=DEFAULT_PROBS,
    slots=DEFAULT_SLOTS,
    workers: int = 1,
    progress=None,
) -> list[dict[str, float]]:
    # cells sharing a pcp probability share snapshot seeds: slot-count
    # comparisons are then paired over identical vehicle geometries
    probs_sorted = sorted(probs)
    cells = [(p, s) for p in probs_sorted for s in sorted(slots)]
    tasks = [
        (i, probs_sorted.index(p), p, s, overrides, base_seed, n_snapshots)
        for i, (p, s) in enumerate(cells)
    ]
    results: dict[int, dict[str, float]] = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for idx, row in pool.map(_run_cell, tasks):
                results[idx] = row
                if progress:
                    progress(len(results), len(tasks))
    else:
        for t in tasks:
            idx, row = _run_cell(t)
            results[idx] = row
            if progress:
                progress(len(results), len(tasks))
    return [results[i] for i in sorted(results)]


def run_benchmark(overrides: dict[str, object], base_seed: int,
                  n_snapshots: int, pcp_prob: float) -> tuple[float, float, int]:
    import math
    import random
    import statistics

    from .geometry import deploy

    cfg = build_sim_config(overrides, pcp_prob, 4)
    counts: list[int] = []
    for i in range(n_snapshots):
        seed = base_seed + BENCH_SEED_OFFSET + i
        rng = random.Random(f"{seed}:deploy")
        scenario = deploy(cfg.scenario, rng)
        counts.extend(ideal_neighbor_count(scenario, cfg.radio))
    mean = statistics.fmean(counts)
    ci = (
        1.96 * statistics.stdev(counts) / math.sqrt(len(counts))
        if len(counts) > 1
        else 0.0
    )
    return mean, ci, len(counts)


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="mmwv2v",
        description="Beacon-interval MAC simulator for 60 GHz V2V links",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int, help="base seed override")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--snapshots", type=int, help="snapshot count override")
        p.add_argument("--workers", type=int, default=0,
                       help="parallel workers (0 = cpu count)")

    p_run = sub.add_parser("run", help="simulate one configuration cell")
    common(p_run)
    p_run.add_argument("--pcp-prob", type=float, default=0.1)
    p_run.add_argument("--n-abft", type=int, default=4)
    p_run.add_argument("--trace", help="write first snapshot trace to this path")

    p_sweep = sub.add_parser("sweep", help="full campaign over the default grid")
    common(p_sweep)

    p_bench = sub.add_parser(
        "bench", help="ideal-beamforming neighbor benchmark (no MAC)"
    )
    common(p_bench)
    p_bench.add_argument("--pcp-prob", type=float, default=0.1)

    args = ap.parse_args(argv)
    overrides = parse_config_file(args.config) if args.config else {}
    base_seed = args.seed if args.seed is not None else int(overrides.get("seed", 1))
    n_snapshots = (
        args.snapshots
        if args.snapshots is not None
        else int(overrides.get("n_snapshots", 200))
    )
    workers = args.workers or os.cpu_count() or 1

    if args.command == "run":
        cfg = build_sim_config(overrides, args.pcp_prob, args.n_abft)
        if args.trace:
            result = run_snapshot(cfg, base_seed)
            with open(args.trace, "w", encoding="utf-8") as fh:
                fh.write(trace_to_text(result))
        t0 = time.perf_counter()
        _, row = _run_cell(
            (0, 0, args.pcp_prob, args.n_abft, overrides, base_seed,
             n_snapshots)
        )
        dt = time.perf_counter() - t0
        csv = rows_to_csv([row])
        sys.stdout.write(csv)
        sys.stderr.write(f"# {n_snapshots} snapshots in {dt:.1f} s\n")
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(csv)
        return 0

    if args.command == "sweep":
        probs = overrides.get("pcp_probs", list(DEFAULT_PROBS))
        slots = overrides.get("abft_slots", list(DEFAULT_SLOTS))
        if not isinstance(probs, list):
            probs = [probs]
        if not isinstance(slots, list):
            slots = [slots]
        t0 = time.perf_counter()

        def progress(done, total):
            sys.stderr.write(
                f"\r# cell {done}/{total} ({time.perf_counter() - t0:.0f} s)"
            )
            sys.stderr.flush()

        rows = run_campaign(
            overrides, base_seed, n_snapshots, probs, slots, workers, progress
        )
        sys.stderr.write("\n")
        csv = rows_to_csv(rows)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(csv)
        else:
            sys.stdout.write(csv)
        return 0

    if args.command == "bench":
        mean, ci, n = run_benchmark(
            overrides, base_seed, n_snapshots, args.pcp_prob
        )
        line = (
            "n_samples,ideal_neighbors_mean,ideal_neighbors_ci\n"
            f"{n},{mean:.6f},{ci:.6f}\n"
        )
        sys.stdout.write(line)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(line)
        return 0

    return 1


if __name__ == "__main__":
    raise SystemExit(main())
