"""Beacon-interval MAC: sector-sweep training, service-period scheduling, data bursts.

Each PCP (coordinator) runs a repeating beacon interval: a beacon transmission
interval (BTI) sweeping all sectors, an association beamforming training
window (A-BFT) in which responders contend in randomly chosen slots with their
own sector sweeps, an announcement window (ATI) carrying allocation requests
and acknowledgements, and a data transmission interval (DTI) divided into
fixed service periods (SPs), one per A-BFT slot.

The shared medium is a registry of transmission intervals.  A reception
attempt accumulates every interval overlapping its frame (any overlap counts
in full) and classifies the outcome from signal power, aggregate interference
and receiver noise at close time.  Data bursts are laid out analytically: the
inter-frame gap is shorter than every frame's airtime, so a back-to-back frame
train is indistinguishable from one continuous interferer, and per-frame
delivery inside a burst is resolved with integer interval arithmetic instead
of one event per frame.

Stations keep a commitment calendar of non-overlapping bookings (their own
beacon-interval structure, contention slots they committed to, service
periods they agreed to receive in).  A frame is transmitted only if it does
not overlap a booking made for a different engagement; later conflicting
frames are simply not transmitted.  The calendar doubles as the antenna-mode
timeline: outside bookings a station listens quasi-omni.
"""

from __future__ import annotations

import math
import random
from bisect import insort
from dataclasses import dataclass, field

from .engine import Engine, MS, SEC, TU
from .geometry import (
    PairTable,
    Scenario,
    ScenarioConfig,
    build_pair_table,
    deploy,
)
from .radio import (
    Decode,
    PhyKind,
    RadioConfig,
    decode_outcome,
    frame_airtime_ns,
    sector_gain_dbi,
)

TAU = 2.0 * math.pi


class ConfigError(ValueError):
    """Raised for inconsistent protocol timing configuration."""


@dataclass(frozen=True)
class BiConfig:
    """Beacon-interval structure.  One SP per A-BFT slot."""

    n_abft_slots: int = 4
    bti_tu: int = 5
    abft_slot_tu: int = 5
    ati_tu: int = 5
    sp_ms: int = 50

    def __post_init__(self) -> None:
        if not 3 <= self.n_abft_slots <= 8:
            raise ConfigError(
                f"n_abft_slots must be in 3..8, got {self.n_abft_slots}"
            )
        if min(self.bti_tu, self.abft_slot_tu, self.ati_tu, self.sp_ms) <= 0:
            raise ConfigError("all interval durations must be positive")

    @property
    def bti_ns(self) -> int:
        return self.bti_tu * TU

    @property
    def slot_ns(self) -> int:
        return self.abft_slot_tu * TU

    @property
    def abft_ns(self) -> int:
        return self.n_abft_slots * self.slot_ns

    @property
    def ati_ns(self) -> int:
        return self.ati_tu * TU

    @property
    def bhi_ns(self) -> int:
        return self.bti_ns + self.abft_ns + self.ati_ns

    @property
    def n_sp(self) -> int:
        return self.n_abft_slots

    @property
    def sp_ns(self) -> int:
        return self.sp_ms * MS

    @property
    def dti_ns(self) -> int:
        return self.n_sp * self.sp_ns

    @property
    def bi_ns(self) -> int:
        return self.bhi_ns + self.dti_ns


@dataclass(frozen=True)
class MacParams:
    """Frame sizes, inter-frame spacings and channel-access parameters."""

    beacon_bytes: int = 40
    ssw_bytes: int = 26
    fbck_bytes: int = 28
    req_bytes: int = 28
    ack_bytes: int = 28
    data_bytes: int = 1600
    burst_packets: int = 600
    sbifs_ns: int = 1_000
    sifs_ns: int = 3_000
    # last fraction of an A-BFT slot reserved for the coordinator's feedback
    fbck_tail_fraction: float = 0.2
    # coordinator start offset drawn uniformly from [0, jitter_tu) TU, or
    # over one whole beacon interval when None: independent networks keep
    # free-running clocks, so their phases are unrelated
    jitter_tu: int | None = None
    lbt_threshold_dbm: float = -48.0
    lbt_slot_ns: int = 5_000
    # extra margin when shortlisting stations a transmitter could sense
    lbt_margin_db: float = 7.0


@dataclass(frozen=True)
class SimConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    bi: BiConfig = field(default_factory=BiConfig)
    radio: RadioConfig = field(default_factory=RadioConfig)
    mac: MacParams = field(default_factory=MacParams)
    snapshot_ns: int = 2 * SEC


class FrameTimes:
    """Airtimes and derived spacings for the configured frame sizes."""

    __slots__ = (
        "beacon",
        "ssw",
        "fbck",
        "req",
        "ack",
        "data",
        "beacon_step",
        "ssw_step",
        "fbck_step",
        "ati_step",
        "data_step",
    )

    def __init__(self, cfg: SimConfig) -> None:
        radio = cfg.radio
        mac = cfg.mac
        ctrl = radio.mcs[radio.control_mcs]
        data = radio.mcs[radio.data_mcs]
        self.beacon = frame_airtime_ns(mac.beacon_bytes, ctrl, radio)
        self.ssw = frame_airtime_ns(mac.ssw_bytes, ctrl, radio)
        self.fbck = frame_airtime_ns(mac.fbck_bytes, ctrl, radio)
        self.req = frame_airtime_ns(mac.req_bytes, data, radio)
        self.ack = frame_airtime_ns(mac.ack_bytes, data, radio)
        self.data = frame_airtime_ns(mac.data_bytes, data, radio)
        self.beacon_step = self.beacon + mac.sbifs_ns
        self.ssw_step = self.ssw + mac.sbifs_ns
        self.fbck_step = self.fbck + mac.sbifs_ns
        self.ati_step = self.req + mac.sifs_ns + self.ack + mac.sifs_ns
        self.data_step = self.data + mac.sifs_ns


def validate_config(cfg: SimConfig) -> FrameTimes:
    """Check that every protocol phase fits its window; returns frame timings."""
    ft = FrameTimes(cfg)
    bi = cfg.bi
    n_sec = cfg.radio.antenna.n_sectors
    train = n_sec * ft.beacon + (n_sec - 1) * cfg.mac.sbifs_ns
    if train > bi.bti_ns:
        raise ConfigError(
            f"beacon train ({train} ns) does not fit in BTI ({bi.bti_ns} ns)"
        )
    tail_ns = int(bi.slot_ns * cfg.mac.fbck_tail_fraction)
    sweep_window = bi.slot_ns - tail_ns
    sweep = n_sec * ft.ssw + (n_sec - 1) * cfg.mac.sbifs_ns
    if sweep > sweep_window:
        raise ConfigError(
            f"sector sweep ({sweep} ns) does not fit in A-BFT slot sweep window "
            f"({sweep_window} ns)"
        )
    if ft.fbck > tail_ns:
        raise ConfigError("feedback frame does not fit in A-BFT slot tail")
    if bi.n_sp * ft.ati_step > bi.ati_ns:
        raise ConfigError("request/ack exchanges do not fit in ATI")
    if ft.data > bi.sp_ns:
        raise ConfigError("data frame does not fit in a service period")
    return ft


class TxInterval:
    """One on-air transmission (or an entire back-to-back frame run)."""

    __slots__ = ("tx", "start", "end", "sector", "boresight")

    def __init__(self, tx: int, start: int, end: int, sector: int, boresight: float):
        self.tx = tx
        self.start = start
        self.end = end
        self.sector = sector
        self.boresight = boresight


class RxAttempt:
    """Open reception of one control frame; interferers accumulate until close."""

    __slots__ = ("rx", "tx", "start", "end", "signal", "rx_sector", "rx_boresight",
                 "interferers", "self_tx", "on_ok")

    def __init__(self, rx, tx, start, end, signal, rx_sector, rx_boresight, on_ok):
        self.rx = rx
        self.tx = tx
        self.start = start
        self.end = end
        self.signal = signal
        self.rx_sector = rx_sector
        self.rx_boresight = rx_boresight
        self.interferers: list[TxInterval] = []
        self.self_tx = False
        self.on_ok = on_ok

    def note(self, iv: TxInterval) -> None:
        if iv.tx == self.rx:
            self.self_tx = True
        elif iv.tx != self.tx:
            self.interferers.append(iv)


class BurstRx:
    """Open reception of a data burst; resolved analytically at close."""

    __slots__ = ("rx", "tx", "start", "end", "signal_dbm", "rx_sector",
                 "rx_boresight", "interferers", "runs", "meta")

    def __init__(self, rx, tx, start, end, signal_dbm, rx_sector, rx_boresight,
                 runs, meta):
        self.rx = rx
        self.tx = tx
        self.start = start
        self.end = end
        self.signal_dbm = signal_dbm
        self.rx_sector = rx_sector
        self.rx_boresight = rx_boresight
        # (start, end, power_lin_mw, is_self) per overlapping foreign interval
        self.interferers: list[tuple[int, int, float, bool]] = []
        self.runs = runs  # (run_start, n_frames) tuples
        # (pcp id, responder id, round, sp index, sp start, tx sector, rx sector)
        self.meta = meta

    def note(self, iv: TxInterval, power_lin: float) -> None:
        self.interferers.append((iv.start, iv.end, power_lin, iv.tx == self.rx))


class Booking:
    __slots__ = ("start", "end", "tag", "sector", "attend_end")

    def __init__(self, start: int, end: int, tag: tuple, sector: int | None,
                 attend_end: int | None = None):
        self.start = start
        self.end = end
        self.tag = tag
        self.sector = sector
        # the station holds the sector only this long; for the rest of the
        # window it keeps the reservation but listens quasi-omni
        self.attend_end = end if attend_end is None else attend_end

    def __lt__(self, other: "Booking") -> bool:
        return self.start < other.start


class Station:
    __slots__ = ("sid", "is_pcp", "rng", "boresight", "bookings", "tx_busy_until",
                 "jitter", "beam_power", "beam_sector", "beam_round", "tried",
                 "handshake_sector", "handshake_round", "bi_state", "ati_sector")

    def __init__(self, sid: int, is_pcp: bool, rng: random.Random, jitter_ns: int):
        self.sid = sid
        self.is_pcp = is_pcp
        self.rng = rng
        self.boresight = rng.uniform(0.0, TAU)
        self.bookings: list[Booking] = []
        self.tx_busy_until = 0
        # drawn as a fraction of the window so the same station keeps the
        # same relative phase when the interval layout changes
        self.jitter = int(rng.random() * jitter_ns) if is_pcp else 0
        # per-coordinator beacon tracking, keyed by pcp id
        self.beam_power: dict[int, float] = {}
        self.beam_sector: dict[int, int] = {}
        self.beam_round: dict[int, int] = {}
        self.tried: set[tuple[int, int]] = set()
        # pcp id -> own best sector toward it, learned from decoded feedback,
        # valid only for the interval recorded in handshake_round
        self.handshake_sector: dict[int, int] = {}
        self.handshake_round: dict[int, int] = {}
        self.bi_state: PcpBi | None = None
        self.ati_sector: int | None = None

    # -- commitment calendar ------------------------------------------------

    def _prune(self, now: int) -> None:
        bs = self.bookings
        i = 0
        for b in bs:
            if b.end > now:
                break
            i += 1
        if i:
            del bs[:i]

    def try_book(self, start: int, end: int, tag: tuple, sector: int | None,
                 now: int, attend_end: int | None = None) -> bool:
        self._prune(now)
        for b in self.bookings:
            if b.start >= end:
                break
            if b.end > start:
                return False
        insort(self.bookings, Booking(start, end, tag, sector, attend_end))
        return True

    def force_book(self, start: int, end: int, tag: tuple, sector: int | None,
                   now: int) -> None:
        """Book unconditionally, truncating earlier bookings that overlap."""
        self._prune(now)
        keep = []
        for b in self.bookings:
            if b.start < end and b.end > start:
                if b.start < start:
                    b.end = start
                    keep.append(b)
                # bookings fully inside the new window are dropped
            else:
                keep.append(b)
        self.bookings = keep
        insort(self.bookings, Booking(start, end, tag, sector))

    def tx_allowed(self, start: int, end: int, tag: tuple) -> bool:
        if start < self.tx_busy_until:
            return False
        for b in self.bookings:
            if b.start >= end:
                break
            if b.end > start and b.tag != tag:
                return False
        return True

    def unbook(self, tag: tuple) -> None:
        self.bookings = [b for b in self.bookings if b.tag != tag]

    def mode_at(self, t: int) -> tuple[int | None, tuple | None]:
        """(rx sector or None for quasi-omni, booking tag) at time t."""
        for b in self.bookings:
            if b.start > t:
                break
            if b.end > t:
                if b.tag[0] == "ati":
                    return self.ati_sector, b.tag
                if t >= b.attend_end:
                    return None, b.tag
                return b.sector, b.tag
        return None, None

    def booked_sector(self, tag: tuple) -> int | None:
        for b in self.bookings:
            if b.tag == tag:
                return b.sector
        return None


class PcpBi:
    """Per-beacon-interval coordinator state."""

    __slots__ = ("round", "bi_start", "start_sector", "slot_decodes", "ssw_first",
                 "ssw_best_power", "ssw_best_sector", "ssw_echo", "candidates",
                 "alloc", "req_order", "spares")

    def __init__(self, rnd: int, bi_start: int) -> None:
        self.round = rnd
        self.bi_start = bi_start
        self.start_sector = 0
        self.slot_decodes: list[set[int]] = []
        self.ssw_first: dict[int, int] = {}
        self.ssw_best_power: dict[int, float] = {}
        self.ssw_best_sector: dict[int, int] = {}
        self.ssw_echo: dict[int, int] = {}
        self.candidates: set[int] = set()
        self.alloc: dict[int, int] = {}
        self.req_order: list[tuple[int, int]] = []
        self.spares: list[int] = []


class SnapshotSim:
    """One static deployment simulated for a fixed horizon."""

    def __init__(self, cfg: SimConfig, scenario: Scenario, seed: int):
        self.cfg = cfg
        self.scenario = scenario
        self.seed = seed
        self.ft = validate_config(cfg)
        self.engine = Engine()
        self.trace: list[tuple] = []
        self.pairs: PairTable = build_pair_table(scenario)
        self._pl = self._build_pl()
        radio = cfg.radio
        self.noise_lin = 10.0 ** (radio.noise_floor_dbm / 10.0)
        self.ctrl_mcs = radio.mcs[radio.control_mcs]
        self.data_mcs = radio.mcs[radio.data_mcs]
        jt = cfg.mac.jitter_tu
        jitter_ns = cfg.bi.bi_ns if jt is None else jt * TU
        self.stations = [
            Station(v.vid, v.is_pcp, random.Random(f"{seed}:stn:{v.vid}"), jitter_ns)
            for v in scenario.vehicles
        ]
        self.active: list[TxInterval] = []
        self.open_rx: list[RxAttempt] = []
        self.open_bursts: list[BurstRx] = []
        self.by_tx: dict[int, list[TxInterval]] = {s.sid: [] for s in self.stations}
        self.tail_ns = int(cfg.bi.slot_ns * cfg.mac.fbck_tail_fraction)
        # span of a full back-to-back data burst; beyond it a scheduled
        # station stops pointing and scans quasi-omni while still reserved
        self.engage_ns = (cfg.mac.burst_packets - 1) * self.ft.data_step \
            + self.ft.data
        self._lbt_sources = self._build_lbt_shortlist()
        self.finished_bursts: list[tuple] = []

    def _rng(self, *key) -> random.Random:
        """Content-addressed stream: the same (seed, key) always rolls the
        same values, independent of event ordering elsewhere in the run."""
        return random.Random(":".join(map(str, (self.seed,) + key)))

    # -- precomputation -----------------------------------------------------

    def _build_pl(self) -> list[list[float]]:
        from .radio import path_loss_db

        n = self.scenario.n
        pl = [[0.0] * n for _ in range(n)]
        pt = self.pairs
        for i in range(n):
            for j in range(i + 1, n):
                v = path_loss_db(pt.dist[i][j], pt.blockers[i][j])
                pl[i][j] = pl[j][i] = v
        return pl

    def _build_lbt_shortlist(self) -> dict[int, list[int]]:
        """Stations whose transmissions could exceed the LBT threshold at s."""
        radio = self.cfg.radio
        ant = radio.antenna
        budget = (
            radio.tx_power_dbm
            + 2.0 * ant.peak_db
            - self.cfg.mac.lbt_threshold_dbm
            + self.cfg.mac.lbt_margin_db
        )
        out: dict[int, list[int]] = {}
        n = self.scenario.n
        for i in range(n):
            out[i] = [j for j in range(n) if j != i and self._pl[i][j] <= budget]
        return out

    # -- medium -------------------------------------------------------------

    def _add_interval(self, iv: TxInterval) -> None:
        now = iv.start
        active = self.active
        if len(active) > 8:
            self.active = active = [a for a in active if a.end > now]
        active.append(iv)
        self.by_tx[iv.tx].append(iv)
        for att in self.open_rx:
            if iv.start < att.end:
                att.note(iv)
        for b in self.open_bursts:
            if iv.start < b.end and iv.tx != b.tx:
                if iv.tx == b.rx:
                    b.interferers.append((iv.start, iv.end, 0.0, True))
                else:
                    b.note(iv, self._power_lin_at(b, iv))

    def _power_lin_at(self, b: BurstRx, iv: TxInterval) -> float:
        p = self._power_dbm(iv.tx, iv.sector, iv.boresight, b.rx, b.rx_sector,
                            b.rx_boresight)
        return 10.0 ** (p / 10.0)

    def _power_dbm(self, tx: int, tx_sector: int, tx_boresight: float,
                   rx: int, rx_sector: int | None, rx_boresight: float) -> float:
        ant = self.cfg.radio.antenna
        pt = self.pairs
        g_tx = sector_gain_dbi(ant, tx_boresight, tx_sector, pt.bear[tx][rx])
        if rx_sector is None:
            g_rx = ant.omni_db
        else:
            g_rx = sector_gain_dbi(ant, rx_boresight, rx_sector, pt.bear[rx][tx])
        return self.cfg.radio.tx_power_dbm + g_tx + g_rx - self._pl[tx][rx]

    def _transmit(self, tx: Station, start: int, end: int, sector: int,
                  tag: tuple) -> TxInterval | None:
        if not tx.tx_allowed(start, end, tag):
            return None
        tx.tx_busy_until = end
        iv = TxInterval(tx.sid, start, end, sector, tx.boresight)
        self._add_interval(iv)
        return iv

    def _open_attempt(self, iv: TxInterval, rx: Station, mcs, on_ok) -> None:
        rx_sector, _tag = rx.mode_at(iv.start)
        signal = self._power_dbm(iv.tx, iv.sector, iv.boresight, rx.sid,
                                 rx_sector, rx.boresight)
        if signal < mcs.sensitivity_dbm:
            return
        att = RxAttempt(rx.sid, iv.tx, iv.start, iv.end, signal, rx_sector,
                        rx.boresight, on_ok)
        for other in self.active:
            if other is not iv and other.end > iv.start and other.start < iv.end:
                att.note(other)
        self.open_rx.append(att)
        self.engine.schedule(iv.end, lambda a=att, m=mcs: self._close_attempt(a, m))

    def _close_attempt(self, att: RxAttempt, mcs) -> None:
        self.open_rx.remove(att)
        if att.self_tx:
            return
        interferers = [
            self._power_dbm(iv.tx, iv.sector, iv.boresight, att.rx,
                            att.rx_sector, att.rx_boresight)
            for iv in att.interferers
        ]
        if decode_outcome(att.signal, interferers, mcs,
                          self.cfg.radio.noise_floor_dbm) is Decode.OK:
            att.on_ok(att)

    # -- protocol: beacon interval ------------------------------------------

    def run(self) -> None:
        horizon = self.cfg.snapshot_ns
        for s in self.stations:
            if s.is_pcp:
                self.engine.schedule(s.jitter, lambda p=s: self._advance_bi(p))
        self.engine.run_until(horizon)
        self._flush_bursts(horizon)

    def _advance_bi(self, p: Station) -> None:
        now = self.engine.now
        bi = self.cfg.bi
        if now >= self.cfg.snapshot_ns:
            return
        rnd = (now - p.jitter) // bi.bi_ns
        st = PcpBi(rnd, now)
        # fresh antenna orientation and sweep origin every interval, so
        # repeated intervals of a static snapshot sample fresh geometry
        # instead of replaying one alignment
        p.boresight = self._rng("bore", p.sid, rnd).uniform(0.0, TAU)
        st.start_sector = self._rng("bi", p.sid, rnd).randrange(
            self.cfg.radio.antenna.n_sectors)
        st.slot_decodes = [set() for _ in range(bi.n_abft_slots)]
        p.bi_state = st
        p.ati_sector = None
        self.trace.append(("bi", now, p.sid, rnd))
        if rnd == 0:
            self.trace.append(("gen", now, p.sid))
        bti_end = now + bi.bti_ns
        abft_end = bti_end + bi.abft_ns
        ati_end = abft_end + bi.ati_ns
        p.force_book(now, bti_end, ("bti", p.sid, rnd), None, now)
        p.force_book(bti_end, abft_end, ("abft_listen", p.sid, rnd), None, now)
        p.force_book(abft_end, ati_end, ("ati", p.sid, rnd), None, now)
        sched = self.engine.schedule
        ft = self.ft
        n_sec = self.cfg.radio.antenna.n_sectors
        for j in range(n_sec):
            sched(now + j * ft.beacon_step,
                  lambda pp=p, jj=j: self._tx_beacon(pp, jj))
        for slot in range(bi.n_abft_slots):
            fb_start = bti_end + slot * bi.slot_ns + bi.slot_ns - self.tail_ns
            sched(fb_start, lambda pp=p, ss=slot, rr=rnd: self._fbck_phase(pp, ss, rr))
        sched(abft_end, lambda pp=p, rr=rnd: self._ati_phase(pp, rr))
        for k in range(bi.n_sp):
            t_k = ati_end + k * bi.sp_ns
            if t_k < self.cfg.snapshot_ns:
                self.trace.append(("spw", t_k, p.sid, rnd, k))
        sched(now + bi.bi_ns, lambda pp=p: self._advance_bi(pp))

    def _tx_beacon(self, p: Station, j: int) -> None:
        st = p.bi_state
        now = self.engine.now
        n_sec = self.cfg.radio.antenna.n_sectors
        sector = (st.start_sector + j) % n_sec
        iv = self._transmit(p, now, now + self.ft.beacon, sector,
                            ("bti", p.sid, st.round))
        if iv is None:
            return
        rnd = st.round
        bi_start = st.bi_start
        for s in self.stations:
            if s.sid == p.sid:
                continue
            self._open_attempt(
                iv, s, self.ctrl_mcs,
                lambda att, stn=s, pp=p, rr=rnd, sec=sector, b0=bi_start:
                    self._on_beacon(att, stn, pp, rr, sec, b0),
            )

    def _on_beacon(self, att: RxAttempt, stn: Station, p: Station, rnd: int,
                   sector: int, bi_start: int) -> None:
        pid = p.sid
        if stn.beam_round.get(pid) != rnd:
            stn.beam_round[pid] = rnd
            stn.beam_power[pid] = att.signal
            stn.beam_sector[pid] = sector
            self.trace.append(("brx", self.engine.now, pid, stn.sid, rnd))
        elif att.signal > stn.beam_power[pid]:
            stn.beam_power[pid] = att.signal
            stn.beam_sector[pid] = sector
        if (pid, rnd) in stn.tried:
            return
        stn.tried.add((pid, rnd))
        bi = self.cfg.bi
        now = self.engine.now
        abft_start = bi_start + bi.bti_ns
        if stn.is_pcp:
            cap = stn.jitter + ((now - stn.jitter) // bi.bi_ns + 1) * bi.bi_ns
        else:
            cap = None
        free = []
        for s in range(bi.n_abft_slots):
            s0 = abft_start + s * bi.slot_ns
            s1 = s0 + bi.slot_ns
            if cap is not None and s1 > cap:
                continue
            if stn.tx_allowed(max(s0, now), s1, ("abft", pid, rnd)):
                free.append(s)
        if not free:
            return
        slot = free[int(self._rng("slot", stn.sid, pid, rnd).random() * len(free))]
        slot_start = abft_start + slot * bi.slot_ns
        tag = ("abft", pid, rnd)
        if not stn.try_book(slot_start, slot_start + bi.slot_ns, tag, None, now):
            return
        self.engine.schedule(
            slot_start,
            lambda ss=stn, pp=p, rr=rnd, t0=slot_start: self._sweep(ss, pp, rr, t0),
        )

    def _sweep(self, stn: Station, p: Station, rnd: int, slot_start: int) -> None:
        echo = stn.beam_sector[p.sid]
        n_sec = self.cfg.radio.antenna.n_sectors
        start = self._rng("sweep", stn.sid, p.sid, rnd).randrange(n_sec)
        tag = ("abft", p.sid, rnd)
        ft = self.ft
        sched = self.engine.schedule
        for i in range(n_sec):
            sector = (start + i) % n_sec
            sched(
                slot_start + i * ft.ssw_step,
                lambda ss=stn, pp=p, rr=rnd, sec=sector, ec=echo, tg=tag:
                    self._tx_ssw(ss, pp, rr, sec, ec, tg),
            )

    def _tx_ssw(self, stn: Station, p: Station, rnd: int, sector: int,
                echo: int, tag: tuple) -> None:
        now = self.engine.now
        iv = self._transmit(stn, now, now + self.ft.ssw, sector, tag)
        if iv is None:
            return
        st = p.bi_state
        if st is None or st.round != rnd:
            return
        slot = (now - (st.bi_start + self.cfg.bi.bti_ns)) // self.cfg.bi.slot_ns
        self._open_attempt(
            iv, p, self.ctrl_mcs,
            lambda att, ss=stn, pp=p, rr=rnd, sec=sector, ec=echo, sl=slot:
                self._on_ssw(att, ss, pp, rr, sec, ec, sl),
        )

    def _on_ssw(self, att: RxAttempt, stn: Station, p: Station, rnd: int,
                sector: int, echo: int, slot: int) -> None:
        st = p.bi_state
        if st is None or st.round != rnd:
            return
        sid = stn.sid
        if sid not in st.ssw_first:
            st.ssw_first[sid] = self.engine.now
            st.ssw_best_power[sid] = att.signal
            st.ssw_best_sector[sid] = sector
            self.trace.append(("srx", self.engine.now, p.sid, sid, rnd))
        elif att.signal > st.ssw_best_power[sid]:
            st.ssw_best_power[sid] = att.signal
            st.ssw_best_sector[sid] = sector
        st.ssw_echo[sid] = echo
        if 0 <= slot < len(st.slot_decodes):
            st.slot_decodes[slot].add(sid)

    def _fbck_phase(self, p: Station, slot: int, rnd: int) -> None:
        st = p.bi_state
        if st is None or st.round != rnd:
            return
        now = self.engine.now
        bi = self.cfg.bi
        slot_end = st.bi_start + bi.bti_ns + (slot + 1) * bi.slot_ns
        stns = sorted(st.slot_decodes[slot], key=lambda s: (st.ssw_first[s], s))
        ft = self.ft
        t = now
        for sid in stns:
            if t + ft.fbck > slot_end:
                break
            self.engine.schedule(
                t, lambda pp=p, ss=sid, rr=rnd: self._tx_fbck(pp, ss, rr)
            )
            t += ft.fbck_step

    def _tx_fbck(self, p: Station, sid: int, rnd: int) -> None:
        st = p.bi_state
        if st is None or st.round != rnd:
            return
        now = self.engine.now
        sector = st.ssw_echo[sid]
        iv = self._transmit(p, now, now + self.ft.fbck, sector,
                            ("abft_listen", p.sid, rnd))
        if iv is None:
            return
        # feedback out means this responder's sweep is answered, which is
        # what qualifies it for a scheduling request later this interval
        st.candidates.add(sid)
        stn = self.stations[sid]
        best = st.ssw_best_sector[sid]
        self._open_attempt(
            iv, stn, self.ctrl_mcs,
            lambda att, ss=stn, pp=p, rr=rnd, bb=best: self._on_fbck(ss, pp, rr, bb),
        )

    def _on_fbck(self, stn: Station, p: Station, rnd: int, best_sector: int) -> None:
        stn.handshake_sector[p.sid] = best_sector
        stn.handshake_round[p.sid] = rnd
        self.trace.append(("frx", self.engine.now, p.sid, stn.sid, rnd))

    # -- protocol: announcement window --------------------------------------

    def _ati_phase(self, p: Station, rnd: int) -> None:
        st = p.bi_state
        if st is None or st.round != rnd:
            return
        bi = self.cfg.bi
        cands = sorted(st.candidates)
        n_req = min(bi.n_sp, len(cands))
        if n_req == 0:
            return
        chosen = self._rng("req", p.sid, rnd).sample(cands, n_req)
        st.req_order = list(enumerate(chosen))
        spare = [c for c in cands if c not in set(chosen)]
        if spare:
            spare = self._rng("req2", p.sid, rnd).sample(spare, len(spare))
        st.spares = spare
        now = self.engine.now
        for k, sid in st.req_order:
            self.engine.schedule(
                now + k * self.ft.ati_step,
                lambda pp=p, ss=sid, kk=k, rr=rnd: self._tx_req(pp, ss, kk, rr),
            )
        base = now + n_req * self.ft.ati_step
        self.engine.schedule(
            base, lambda pp=p, rr=rnd, bb=base: self._retry_phase(pp, rr, bb, 2))

    def _retry_phase(self, p: Station, rnd: int, base: int, left: int) -> None:
        """Re-request unacknowledged windows while announcement time remains.

        A fresh candidate is the best replacement target. Failing that, the
        silent stations are rotated across the open windows: a station that
        stayed quiet because the proposed period clashed with a commitment it
        already holds can usually take one of the other windows, while a
        station whose acknowledgement was lost simply repeats it for the
        window it already reserved. Asking the same station for the same
        window again is the last resort.
        """
        st = p.bi_state
        if st is None or st.round != rnd:
            return
        failed = [(k, sid) for k, sid in st.req_order if st.alloc.get(k) is None]
        if not failed:
            return
        ks = [k for k, _ in failed]
        sids = [sid for _, sid in failed]
        if len(sids) > 1:
            sids = sids[1:] + sids[:1]
        taken = set(st.alloc.values())
        targets = st.spares + [s for s in sids if s not in taken]
        st.spares = st.spares[len(ks):]
        step = self.ft.ati_step
        for j, k in enumerate(ks[:len(targets)]):
            self.engine.schedule(
                base + j * step,
                lambda pp=p, ss=targets[j], kk=k, rr=rnd:
                    self._tx_req(pp, ss, kk, rr),
            )
        nxt = base + len(ks) * step
        ati_end = st.bi_start + self.cfg.bi.bhi_ns
        if left > 1 and nxt + step <= ati_end:
            self.engine.schedule(
                nxt, lambda pp=p, rr=rnd, bb=nxt, ll=left - 1:
                    self._retry_phase(pp, rr, bb, ll))

    def _tx_req(self, p: Station, sid: int, k: int, rnd: int) -> None:
        st = p.bi_state
        if st is None or st.round != rnd:
            return
        now = self.engine.now
        p.ati_sector = st.ssw_echo[sid]
        iv = self._transmit(p, now, now + self.ft.req, p.ati_sector,
                            ("ati", p.sid, rnd))
        if iv is None:
            return
        self.trace.append(("qtx", now, p.sid, sid, rnd, k))
        stn = self.stations[sid]
        self._open_attempt(
            iv, stn, self.data_mcs,
            lambda att, ss=stn, pp=p, kk=k, rr=rnd: self._on_req(ss, pp, kk, rr),
        )

    def _on_req(self, stn: Station, p: Station, k: int, rnd: int) -> None:
        self.trace.append(("qrx", self.engine.now, p.sid, stn.sid, rnd, k))
        if stn.handshake_round.get(p.sid) != rnd:
            return
        st = p.bi_state
        bi = self.cfg.bi
        now = self.engine.now
        grid = st.bi_start + bi.bhi_ns
        sector = stn.handshake_sector[p.sid]
        ack_start = now + self.cfg.mac.sifs_ns
        for b in stn.bookings:
            t = b.tag
            if t[0] == "sp" and t[1] == p.sid and t[2] == rnd:
                # repeated request means the earlier acknowledgement was
                # lost; repeat it for the period already reserved
                self.engine.schedule(
                    ack_start,
                    lambda ss=stn, pp=p, kk=t[3], rr=rnd, sec=sector:
                        self._tx_ack(ss, pp, kk, rr, sec),
                )
                return
        # grant only if the acknowledgement itself can go out: a booked SP
        # the coordinator never hears about would just poison the calendar
        if not stn.tx_allowed(ack_start, ack_start + self.ft.ack,
                              ("ack", p.sid, rnd, k)):
            self.trace.append(("qbusy", now, p.sid, stn.sid, rnd, k))
            return
        sp_start = grid + k * bi.sp_ns
        sp_end = sp_start + bi.sp_ns
        if stn.is_pcp:
            # a coordinator serving another network still starts its own
            # interval on time; whatever overlaps it is forfeited
            nxt = stn.jitter + ((now - stn.jitter) // bi.bi_ns + 1) * bi.bi_ns
            sp_end = min(sp_end, nxt)
        if sp_end > sp_start and stn.try_book(
                sp_start, sp_end, ("sp", p.sid, rnd, k), sector, now,
                attend_end=min(sp_end, sp_start + self.engage_ns)):
            self.engine.schedule(
                ack_start,
                lambda ss=stn, pp=p, kk=k, rr=rnd, sec=sector:
                    self._tx_ack(ss, pp, kk, rr, sec),
            )
            return
        self.trace.append(("qbusy", now, p.sid, stn.sid, rnd, k))

    def _tx_ack(self, stn: Station, p: Station, k: int, rnd: int,
                sector: int) -> None:
        now = self.engine.now
        iv = self._transmit(stn, now, now + self.ft.ack, sector,
                            ("ack", p.sid, rnd, k))
        if iv is None:
            stn.unbook(("sp", p.sid, rnd, k))
            return
        self._open_attempt(
            iv, p, self.data_mcs,
            lambda att, ss=stn, pp=p, kk=k, rr=rnd: self._on_ack(ss, pp, kk, rr),
        )

    def _on_ack(self, stn: Station, p: Station, k: int, rnd: int) -> None:
        st = p.bi_state
        if st is None or st.round != rnd:
            return
        if st.alloc.get(k) is not None:
            # a repeated acknowledgement must not schedule the burst twice
            return
        bi = self.cfg.bi
        now = self.engine.now
        sp_start = st.bi_start + bi.bhi_ns + k * bi.sp_ns
        sector = st.ssw_echo[stn.sid]
        st.alloc[k] = stn.sid
        self.trace.append(("arx", now, p.sid, stn.sid, rnd, k))
        # claim the window on the coordinator's own calendar too; if it
        # already promised part of it to another network, that earlier
        # promise wins and the burst defers around it
        p.try_book(sp_start, sp_start + bi.sp_ns, ("dti", p.sid, rnd, k),
                   sector, now)
        self.engine.schedule(
            sp_start,
            lambda pp=p, ss=stn, kk=k, rr=rnd, sec=sector:
                self._start_burst(pp, ss, kk, rr, sec),
        )

    # -- protocol: data bursts ----------------------------------------------

    def _sensed_busy_ivs(self, p: Station, sector: int, start: int,
                         end: int) -> list[tuple[int, int, float]]:
        """Intervals a transmitter could sense above threshold, as linear power."""
        ant = self.cfg.radio.antenna
        pt = self.pairs
        out = []
        for src in self._lbt_sources[p.sid]:
            for iv in self.by_tx[src]:
                if iv.end > start and iv.start < end:
                    g_tx = sector_gain_dbi(ant, iv.boresight, iv.sector,
                                           pt.bear[src][p.sid])
                    g_rx = sector_gain_dbi(ant, p.boresight, sector,
                                           pt.bear[p.sid][src])
                    dbm = (self.cfg.radio.tx_power_dbm + g_tx + g_rx
                           - self._pl[src][p.sid])
                    out.append((iv.start, iv.end, 10.0 ** (dbm / 10.0)))
        return out

    def _start_burst(self, p: Station, stn: Station, k: int, rnd: int,
                     tx_sector: int) -> None:
        mac = self.cfg.mac
        bi = self.cfg.bi
        ft = self.ft
        sp_start = self.engine.now
        sp_end = sp_start + bi.sp_ns
        thresh_lin = 10.0 ** (mac.lbt_threshold_dbm / 10.0)
        sensed = self._sensed_busy_ivs(p, tx_sector, sp_start, sp_end)
        own = ("dti", p.sid, rnd, k)
        for b in p.bookings:
            if b.start >= sp_end:
                break
            if b.end > sp_start and b.tag != own:
                # a window already promised to another network is honoured
                # like a busy channel: no frames go out during it
                sensed.append((b.start, b.end, math.inf))
        step = ft.data_step
        tau = ft.data
        slot = mac.lbt_slot_ns
        left = mac.burst_packets
        runs: list[tuple[int, int]] = []
        t = sp_start
        while left > 0 and t + tau <= sp_end:
            level = sum(pw for (s, e, pw) in sensed if s <= t < e)
            if level > thresh_lin:
                clear = max(e for (s, e, pw) in sensed if s <= t < e)
                steps = (clear - t + slot - 1) // slot
                t += max(1, steps) * slot
                continue
            onsets = [s for (s, e, pw) in sensed if s > t]
            horizon = min(onsets) if onsets else sp_end
            fit = (sp_end - tau - t) // step + 1
            k_run = min(left, fit)
            if horizon < sp_end:
                until_busy = max(1, -((t - horizon) // step))
                k_run = min(k_run, until_busy)
            if k_run <= 0:
                break
            runs.append((t, k_run))
            left -= k_run
            t += k_run * step
        rx_sector = stn.booked_sector(("sp", p.sid, rnd, k))
        if not runs:
            self.trace.append(("burst", sp_start, p.sid, stn.sid, rnd, k, 0, 0,
                               tx_sector, rx_sector, ()))
            return
        first = runs[0][0]
        last_end = runs[-1][0] + (runs[-1][1] - 1) * step + tau
        signal = self._power_dbm(p.sid, tx_sector, p.boresight, stn.sid,
                                 rx_sector, stn.boresight)
        meta = (p.sid, stn.sid, rnd, k, sp_start, tx_sector, rx_sector)
        burst = BurstRx(stn.sid, p.sid, first, last_end, signal, rx_sector,
                        stn.boresight, tuple(runs), meta)
        for run_start, n_frames in runs:
            run_end = run_start + (n_frames - 1) * step + tau
            iv = TxInterval(p.sid, run_start, run_end, tx_sector, p.boresight)
            if run_start == first:
                for other in self.active:
                    if other.end > first and other.start < last_end \
                            and other.tx != p.sid:
                        if other.tx == stn.sid:
                            burst.interferers.append(
                                (other.start, other.end, 0.0, True))
                        else:
                            burst.note(other, self._power_lin_at(burst, other))
                self.open_bursts.append(burst)
            self._add_interval(iv)
        p.tx_busy_until = last_end
        self.engine.schedule(
            last_end, lambda b=burst: self._close_burst(b, None)
        )

    def _close_burst(self, b: BurstRx, cutoff: int | None) -> None:
        if b not in self.open_bursts:
            return
        self.open_bursts.remove(b)
        pid, sid, rnd, k, sp_start, tx_sector, rx_sector = b.meta
        step = self.ft.data_step
        tau = self.ft.data
        attempted = 0
        delivered = 0
        sens = self.data_mcs.sensitivity_dbm
        min_sinr = self.data_mcs.min_sinr_db
        sig = b.signal_dbm
        noise = self.noise_lin
        for run_start, n_frames in b.runs:
            if cutoff is not None:
                n_frames = min(n_frames, (cutoff - tau - run_start) // step + 1)
                if n_frames <= 0:
                    continue
            attempted += n_frames
            if sig < sens:
                continue
            events: list[tuple[int, float]] = []
            blocked: list[tuple[int, int]] = []
            for (s, e, pw, is_self) in b.interferers:
                i_lo = (s - tau - run_start) // step + 1
                i_hi = (e - run_start - 1) // step
                if i_lo < 0:
                    i_lo = 0
                if i_hi > n_frames - 1:
                    i_hi = n_frames - 1
                if i_lo > i_hi:
                    continue
                if is_self:
                    blocked.append((i_lo, i_hi))
                else:
                    events.append((i_lo, pw))
                    events.append((i_hi + 1, -pw))
            events.sort(key=lambda x: x[0])
            idx = 0
            cur = 0.0
            ei = 0
            ok_frames = 0
            while idx < n_frames:
                while ei < len(events) and events[ei][0] <= idx:
                    cur += events[ei][1]
                    ei += 1
                nxt = events[ei][0] if ei < len(events) else n_frames
                nxt = min(nxt, n_frames)
                seg = nxt - idx
                interf = cur if cur > 0.0 else 0.0
                sinr = sig - 10.0 * math.log10(noise + interf)
                if sinr >= min_sinr:
                    ok_frames += seg
                idx = nxt
            if blocked and ok_frames:
                span = set()
                for lo, hi in blocked:
                    span.update(range(lo, hi + 1))
                # self-transmission overrides any per-segment success
                ok_frames = self._recount_with_blocked(
                    events, n_frames, sig, noise, min_sinr, span)
            delivered += ok_frames
        self.trace.append(("burst", sp_start, pid, sid, rnd, k, attempted,
                           delivered, tx_sector, rx_sector, b.runs))

    def _recount_with_blocked(self, events, n_frames, sig, noise, min_sinr,
                              blocked_idx) -> int:
        cur = 0.0
        ei = 0
        ok = 0
        idx = 0
        while idx < n_frames:
            while ei < len(events) and events[ei][0] <= idx:
                cur += events[ei][1]
                ei += 1
            nxt = events[ei][0] if ei < len(events) else n_frames
            nxt = min(nxt, n_frames)
            interf = cur if cur > 0.0 else 0.0
            sinr = sig - 10.0 * math.log10(noise + interf)
            if sinr >= min_sinr:
                ok += sum(1 for i in range(idx, nxt) if i not in blocked_idx)
            idx = nxt
        return ok

    def _flush_bursts(self, horizon: int) -> None:
        for b in list(self.open_bursts):
            self._close_burst(b, horizon)


@dataclass
class SnapshotResult:
    scenario: Scenario
    trace: list[tuple]


def run_snapshot(cfg: SimConfig, snapshot_seed: int) -> SnapshotResult:
    rng = random.Random(f"{snapshot_seed}:deploy")
    scenario = deploy(cfg.scenario, rng)
    sim = SnapshotSim(cfg, scenario, snapshot_seed)
    sim.run()
    return SnapshotResult(scenario, sim.trace)
