"""Per-snapshot metrics, campaign aggregation and CSV output.

Counters follow the coordinator's first beacon interval (how many stations
decoded a beacon, completed training feedback, acknowledged an allocation),
while delivery metrics integrate over the whole snapshot.  The normalized
packet delivery ratio divides delivered packets by the full burst size times
the number of service-period windows that started before the snapshot end,
i.e. by what an ideally allocated DTI would have carried.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

from .geometry import Scenario
from .mac import SimConfig, SnapshotResult, validate_config
from .radio import RadioConfig


@dataclass
class PcpMetrics:
    pcp: int
    n_beacon_responders: int = 0
    n_fbck_responders: int = 0
    n_acks: int = 0
    delay_ns: int | None = None
    npdr: float = 0.0
    attempted: int = 0
    delivered: int = 0


@dataclass
class SnapshotMetrics:
    per_pcp: list[PcpMetrics] = field(default_factory=list)
    # fraction of snapshot time with exactly k concurrent data transmissions,
    # folded at 4 (index 4 means four or more)
    concurrency: tuple[float, ...] = (1.0, 0.0, 0.0, 0.0, 0.0)

    @property
    def alloc_pdr(self) -> float | None:
        att = sum(p.attempted for p in self.per_pcp)
        if att == 0:
            return None
        return sum(p.delivered for p in self.per_pcp) / att


def summarize_snapshot(result: SnapshotResult, cfg: SimConfig) -> SnapshotMetrics:
    ft = validate_config(cfg)
    burst_len = cfg.mac.burst_packets
    horizon = cfg.snapshot_ns
    pcps = result.scenario.pcp_ids
    per = {p: PcpMetrics(p) for p in pcps}
    gen: dict[int, int] = {}
    beacon_stns: dict[int, set[int]] = {p: set() for p in pcps}
    fbck_stns: dict[int, set[int]] = {p: set() for p in pcps}
    n_windows: dict[int, int] = {p: 0 for p in pcps}
    intervals: list[tuple[int, int]] = []
    for rec in result.trace:
        kind = rec[0]
        if kind == "gen":
            gen[rec[2]] = rec[1]
        elif kind == "brx":
            if rec[4] == 0:
                beacon_stns[rec[2]].add(rec[3])
        elif kind == "frx":
            if rec[4] == 0:
                fbck_stns[rec[2]].add(rec[3])
        elif kind == "arx":
            if rec[4] == 0:
                per[rec[2]].n_acks += 1
        elif kind == "spw":
            n_windows[rec[2]] += 1
        elif kind == "burst":
            _, sp_start, pid, _sid, _rnd, _k, att, dlv, _txs, _rxs, runs = rec
            m = per[pid]
            if att > 0:
                m.attempted += att
                m.delivered += dlv
                if m.delay_ns is None:
                    m.delay_ns = sp_start - gen[pid]
            for run_start, n_frames in runs:
                end = run_start + (n_frames - 1) * ft.data_step + ft.data
                s = max(0, run_start)
                e = min(horizon, end)
                if e > s:
                    intervals.append((s, e))
    for p in pcps:
        m = per[p]
        m.n_beacon_responders = len(beacon_stns[p])
        m.n_fbck_responders = len(fbck_stns[p])
        denom = burst_len * n_windows[p]
        m.npdr = m.delivered / denom if denom else 0.0
    return SnapshotMetrics(
        per_pcp=[per[p] for p in pcps],
        concurrency=_concurrency_fractions(intervals, horizon),
    )


def _concurrency_fractions(
    intervals: list[tuple[int, int]], horizon: int
) -> tuple[float, ...]:
    if horizon <= 0:
        return (1.0, 0.0, 0.0, 0.0, 0.0)
    events: list[tuple[int, int]] = []
    for s, e in intervals:
        events.append((s, 1))
        events.append((e, -1))
    events.sort()
    time_at = [0] * 5
    prev = 0
    count = 0
    for t, d in events:
        if t > prev:
            time_at[min(count, 4)] += t - prev
            prev = t
        count += d
    if horizon > prev:
        time_at[0] += horizon - prev
    return tuple(x / horizon for x in time_at)


def ideal_neighbor_count(scenario: Scenario, radio: RadioConfig) -> list[int]:
    """Per coordinator: stations reachable at control rate with both antennas
    ideally pointed (peak gain both ends, no interference)."""
    from .geometry import build_pair_table
    from .radio import Decode, decode_outcome, path_loss_db

    pt = build_pair_table(scenario)
    mcs = radio.mcs[radio.control_mcs]
    peak = radio.antenna.peak_db
    out = []
    for p in scenario.pcp_ids:
        n = 0
        for v in scenario.vehicles:
            if v.vid == p:
                continue
            pl = path_loss_db(pt.dist[p][v.vid], pt.blockers[p][v.vid])
            rx = radio.tx_power_dbm + 2.0 * peak - pl
            if decode_outcome(rx, [], mcs, radio.noise_floor_dbm) is Decode.OK:
                n += 1
        out.append(n)
    return out


# -- campaign aggregation ---------------------------------------------------


@dataclass
class CellResult:
    pcp_prob: float
    n_abft: int
    snapshots: list[SnapshotMetrics]


CSV_COLUMNS = [
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
]


def _mean_ci(values: list[float]) -> tuple[float, float]:
    if not values:
        return (float("nan"), float("nan"))
    m = statistics.fmean(values)
    if len(values) < 2:
        return (m, 0.0)
    sd = statistics.stdev(values)
    return (m, 1.96 * sd / math.sqrt(len(values)))


def aggregate_cell(cell: CellResult) -> dict[str, float]:
    beacons: list[float] = []
    fbcks: list[float] = []
    acks: list[float] = []
    delays: list[float] = []
    npdrs: list[float] = []
    alloc: list[float] = []
    conc = [0.0] * 5
    for sm in cell.snapshots:
        for pm in sm.per_pcp:
            beacons.append(pm.n_beacon_responders)
            fbcks.append(pm.n_fbck_responders)
            acks.append(pm.n_acks)
            npdrs.append(pm.npdr)
            if pm.delay_ns is not None:
                delays.append(pm.delay_ns / 1e6)
        a = sm.alloc_pdr
        if a is not None:
            alloc.append(a)
        for i in range(5):
            conc[i] += sm.concurrency[i]
    n_snap = len(cell.snapshots)
    conc = [c / n_snap for c in conc] if n_snap else conc
    b_m, b_c = _mean_ci(beacons)
    f_m, f_c = _mean_ci(fbcks)
    a_m, a_c = _mean_ci(acks)
    d_m, d_c = _mean_ci(delays)
    n_m, n_c = _mean_ci(npdrs)
    al_m = statistics.fmean(alloc) if alloc else float("nan")
    return {
        "pcp_prob": cell.pcp_prob,
        "n_abft": cell.n_abft,
        "n_snapshots": n_snap,
        "beacons_mean": b_m,
        "beacons_ci": b_c,
        "fbck_mean": f_m,
        "fbck_ci": f_c,
        "acks_mean": a_m,
        "acks_ci": a_c,
        "delay_ms_mean": d_m,
        "delay_ms_ci": d_c,
        "npdr_mean": n_m,
        "npdr_ci": n_c,
        "alloc_pdr_mean": al_m,
        # conc0 folds "idle or single transmitter"
        "conc0": conc[0] + conc[1],
        "conc2": conc[2],
        "conc3": conc[3],
        "conc4": conc[4],
    }


def rows_to_csv(rows: list[dict[str, float]]) -> str:
    out = [",".join(CSV_COLUMNS)]
    for row in sorted(rows, key=lambda r: (r["pcp_prob"], r["n_abft"])):
        cells = []
        for col in CSV_COLUMNS:
            v = row[col]
            if col == "pcp_prob":
                cells.append(f"{v:.2f}")
            elif col in ("n_abft", "n_snapshots"):
                cells.append(str(int(v)))
            else:
                cells.append(f"{v:.6f}")
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def trace_to_text(result: SnapshotResult) -> str:
    lines = [result.scenario.to_text().rstrip("\n"), "# trace"]
    for rec in result.trace:
        lines.append("\t".join(str(x) for x in rec))
    return "\n".join(lines) + "\n"
