"""Protocol-layer tests.

Covers the beacon-interval layout, frame timing tables, the per-station
commitment calendar, and conservation laws that every snapshot trace has to
satisfy regardless of topology.  Timing goldens are frozen integers computed
independently from the frame sizes and rates.
"""

import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmwv2v.engine import MS, SEC, TU
from mmwv2v.geometry import Scenario, ScenarioConfig, Vehicle
from mmwv2v.mac import (
    BiConfig,
    ConfigError,
    FrameTimes,
    MacParams,
    SimConfig,
    SnapshotResult,
    SnapshotSim,
    Station,
    run_snapshot,
    validate_config,
)
from mmwv2v.metrics import summarize_snapshot

# --------------------------------------------------------- interval layout

# n_abft_slots -> exact header and whole-interval durations in ns
BHI_NS = {
    3: 25_600_000,
    4: 30_720_000,
    5: 35_840_000,
    6: 40_960_000,
    7: 46_080_000,
    8: 51_200_000,
}
BI_NS = {
    3: 175_600_000,
    4: 230_720_000,
    5: 285_840_000,
    6: 340_960_000,
    7: 396_080_000,
    8: 451_200_000,
}


@pytest.mark.parametrize("n", sorted(BHI_NS))
def test_interval_durations_exact(n):
    bi = BiConfig(n_abft_slots=n)
    assert bi.bti_ns == 5 * TU
    assert bi.slot_ns == 5 * TU
    assert bi.abft_ns == n * 5 * TU
    assert bi.ati_ns == 5 * TU
    assert bi.bhi_ns == BHI_NS[n]
    assert bi.sp_ns == 50 * MS
    assert bi.n_sp == n
    assert bi.dti_ns == n * 50 * MS
    assert bi.bi_ns == BI_NS[n]


def test_slot_count_bounds():
    for bad in (2, 9, 0, -1):
        with pytest.raises(ConfigError):
            BiConfig(n_abft_slots=bad)
    for ok in range(3, 9):
        BiConfig(n_abft_slots=ok)


def test_durations_must_be_positive():
    with pytest.raises(ConfigError):
        BiConfig(bti_tu=0)
    with pytest.raises(ConfigError):
        BiConfig(sp_ms=-1)


# ------------------------------------------------------------ frame timing


def test_frame_times_goldens():
    ft = FrameTimes(SimConfig())
    assert ft.beacon == 20_737
    assert ft.ssw == 16_664
    assert ft.fbck == 17_246
    assert ft.req == 4_524
    assert ft.ack == 4_524
    assert ft.data == 22_671
    assert ft.beacon_step == 21_737
    assert ft.ssw_step == 17_664
    assert ft.fbck_step == 18_246
    assert ft.ati_step == 15_048
    assert ft.data_step == 25_671


def test_validate_config_accepts_defaults():
    for n in range(3, 9):
        ft = validate_config(SimConfig(bi=BiConfig(n_abft_slots=n)))
        assert isinstance(ft, FrameTimes)


def test_validate_rejects_oversized_frames():
    with pytest.raises(ConfigError, match="beacon train"):
        validate_config(SimConfig(mac=MacParams(beacon_bytes=50_000)))
    with pytest.raises(ConfigError, match="sweep"):
        validate_config(SimConfig(mac=MacParams(ssw_bytes=50_000)))
    with pytest.raises(ConfigError, match="feedback"):
        validate_config(SimConfig(mac=MacParams(fbck_bytes=4_000)))
    with pytest.raises(ConfigError, match="ATI"):
        validate_config(SimConfig(mac=MacParams(req_bytes=300_000)))
    with pytest.raises(ConfigError, match="service period"):
        validate_config(SimConfig(mac=MacParams(data_bytes=5_000_000)))


# ----------------------------------------------------- commitment calendar


def _station(jitter_ns=0, is_pcp=True, seed=1):
    return Station(0, is_pcp, random.Random(seed), jitter_ns)


def test_try_book_rejects_overlap_allows_adjacent():
    s = _station()
    assert s.try_book(100, 200, ("a",), 3, 0)
    assert not s.try_book(150, 250, ("b",), 1, 0)
    assert not s.try_book(50, 101, ("c",), 1, 0)
    # half-open windows: [200, 300) touches [100, 200) without conflict
    assert s.try_book(200, 300, ("d",), 2, 0)
    assert s.try_book(0, 100, ("e",), 2, 0)


def test_try_book_prunes_expired_windows():
    s = _station()
    assert s.try_book(0, 100, ("old",), 1, 0)
    # the expired window no longer blocks once now has moved past it
    assert s.try_book(50, 80, ("new",), 2, 150)
    assert s.booked_sector(("old",)) is None


def test_force_book_truncates_and_drops():
    s = _station()
    assert s.try_book(0, 1000, ("long",), 1, 0)
    assert s.try_book(1200, 1300, ("inner",), 2, 0)
    s.force_book(500, 1500, ("takeover",), 3, 0)
    # the long booking survives but ends where the takeover starts
    assert s.mode_at(400) == (1, ("long",))
    assert s.mode_at(600) == (3, ("takeover",))
    # the fully covered booking is gone
    assert s.booked_sector(("inner",)) is None
    assert s.mode_at(1250) == (3, ("takeover",))


def test_tx_allowed_semantics():
    s = _station()
    assert s.try_book(100, 200, ("mine",), 1, 0)
    assert s.tx_allowed(100, 200, ("mine",))
    assert not s.tx_allowed(150, 160, ("other",))
    assert s.tx_allowed(200, 300, ("other",))
    s.tx_busy_until = 250
    assert not s.tx_allowed(200, 300, ("other",))
    assert s.tx_allowed(250, 300, ("other",))


def test_mode_at_attend_window():
    """After attend_end the reservation holds but the antenna goes quasi-omni."""
    s = _station()
    assert s.try_book(0, 1000, ("sp", 1), 5, 0, attend_end=300)
    assert s.mode_at(0) == (5, ("sp", 1))
    assert s.mode_at(299) == (5, ("sp", 1))
    assert s.mode_at(300) == (None, ("sp", 1))
    assert s.mode_at(999) == (None, ("sp", 1))
    assert s.mode_at(1000) == (None, None)


def test_mode_at_ati_uses_learned_sector():
    s = _station()
    assert s.try_book(0, 100, ("ati", 7), None, 0)
    s.ati_sector = 9
    assert s.mode_at(50) == (9, ("ati", 7))


def test_unbook_and_booked_sector():
    s = _station()
    assert s.try_book(0, 100, ("a",), 4, 0)
    assert s.try_book(100, 200, ("b",), 6, 0)
    assert s.booked_sector(("a",)) == 4
    s.unbook(("a",))
    assert s.booked_sector(("a",)) is None
    assert s.booked_sector(("b",)) == 6


@given(
    st.lists(
        st.tuples(
            st.integers(min_value=0, max_value=500),
            st.integers(min_value=1, max_value=120),
        ),
        min_size=1,
        max_size=30,
    )
)
@settings(max_examples=200, deadline=None)
def test_calendar_stays_sorted_and_disjoint(windows):
    s = _station()
    for i, (start, dur) in enumerate(windows):
        s.try_book(start, start + dur, ("w", i), i % 14, 0)
    bs = s.bookings
    for a, b in zip(bs, bs[1:]):
        assert a.start <= b.start
        assert a.end <= b.start


def test_member_station_has_no_jitter():
    assert _station(jitter_ns=10**9, is_pcp=False).jitter == 0


def test_jitter_is_fraction_of_window():
    """The same seed keeps the same relative phase across window lengths."""
    r = random.Random(5)
    r.uniform(0.0, 2 * 3.141592653589793)  # boresight is drawn first
    u = r.random()
    for window in (1_000, 230_720_000):
        assert _station(jitter_ns=window, seed=5).jitter == int(u * window)


# ------------------------------------------------------ single-link oracle


def _single_link(n_slots=4, seed=7):
    cfg = SimConfig(
        scenario=ScenarioConfig(n_vehicles=2),
        bi=BiConfig(n_abft_slots=n_slots),
    )
    sc = Scenario(
        cfg.scenario,
        [
            Vehicle(0, 0, 20.0, 2.0, True),
            Vehicle(1, 0, 30.0, 2.0, False),
        ],
    )
    sim = SnapshotSim(cfg, sc, seed)
    sim.run()
    return cfg, SnapshotResult(sc, sim.trace)


@pytest.mark.parametrize("n_slots", [3, 5, 8])
def test_single_link_delay_equals_header(n_slots):
    """One coordinator, one member, clear channel.

    The member must win the handshake in the first interval and get the first
    service period, so its allocation delay is exactly the header duration and
    every attempted packet is delivered.  Network delivery is one busy window
    out of n_slots, which the capacity-normalized ratio reflects exactly.
    """
    cfg, res = _single_link(n_slots=n_slots)
    m = summarize_snapshot(res, cfg)
    assert len(m.per_pcp) == 1
    pm = m.per_pcp[0]
    assert pm.delay_ns == BHI_NS[n_slots]
    assert pm.attempted > 0
    assert pm.delivered == pm.attempted
    assert m.alloc_pdr == 1.0
    n_windows = sum(1 for r in res.trace if r[0] == "spw")
    assert pm.npdr == pm.delivered / (cfg.mac.burst_packets * n_windows)
    assert pm.n_beacon_responders == 1
    assert pm.n_fbck_responders == 1
    assert pm.n_acks == 1


def test_single_link_first_round_grants_first_sp():
    _, res = _single_link()
    grants = [r for r in res.trace if r[0] == "arx" and r[4] == 0]
    assert len(grants) == 1
    assert grants[0][5] == 0  # service period index


def test_single_link_never_declines_busy():
    _, res = _single_link()
    assert not any(r[0] == "qbusy" for r in res.trace)


def test_single_link_bursts_complete():
    cfg, res = _single_link()
    bursts = [r for r in res.trace if r[0] == "burst"]
    assert bursts
    full = cfg.mac.burst_packets
    for rec in bursts:
        attempted, delivered = rec[6], rec[7]
        assert delivered == attempted
        assert attempted <= full
    # all but a possibly horizon-cut final burst carry the full load
    assert all(rec[6] == full for rec in bursts[:-1])


def test_engaged_span_matches_burst_layout():
    cfg, _ = _single_link()
    sim = SnapshotSim(
        cfg, Scenario(cfg.scenario, [Vehicle(0, 0, 10.0, 2.0, True)]), 1
    )
    ft = FrameTimes(cfg)
    want = (cfg.mac.burst_packets - 1) * ft.data_step + ft.data
    assert sim.engage_ns == want == 15_399_600


# ----------------------------------------------------- trace conservation


def _key(rec, n):
    return tuple(rec[2 : 2 + n])


def _check_chain(trace, bi_cfg):
    bi_starts = {}
    gen = {}
    by_kind = {}
    for rec in trace:
        by_kind.setdefault(rec[0], []).append(rec)
    for rec in by_kind.get("bi", []):
        bi_starts[(rec[2], rec[3])] = rec[1]
    for rec in by_kind.get("gen", []):
        assert rec[2] not in gen, "duplicate generation record"
        gen[rec[2]] = rec[1]

    # interval starts advance by exactly one interval per round
    per_pcp_rounds = {}
    for (pid, rnd), t in bi_starts.items():
        per_pcp_rounds.setdefault(pid, []).append((rnd, t))
    for pid, rounds in per_pcp_rounds.items():
        rounds.sort()
        assert [r for r, _ in rounds] == list(range(len(rounds)))
        for (r0, t0), (r1, t1) in zip(rounds, rounds[1:]):
            assert t1 - t0 == bi_cfg.bi_ns
        # generation is pinned to the first interval start
        assert gen[pid] == rounds[0][1]

    brx = {_key(r, 3) for r in by_kind.get("brx", [])}
    srx = {_key(r, 3) for r in by_kind.get("srx", [])}
    frx = {_key(r, 3) for r in by_kind.get("frx", [])}
    qtx = {_key(r, 4) for r in by_kind.get("qtx", [])}
    qrx = {_key(r, 4) for r in by_kind.get("qrx", [])}
    arx = {_key(r, 4) for r in by_kind.get("arx", [])}
    bursts = by_kind.get("burst", [])

    # each stage only ever follows the one before it
    assert srx <= brx, "sweep decoded without a decoded beacon"
    assert frx <= srx, "feedback decoded without a decoded sweep"
    assert {k[:3] for k in qtx} <= srx, "request sent to a non-candidate"
    assert qrx <= qtx, "request decoded but never sent"
    assert arx <= qrx, "ack decoded without a decoded request"
    assert {_key(r, 4) for r in bursts} <= arx, "burst without a grant"

    n_sp = bi_cfg.n_sp
    for pid_stn_rnd_k in qtx | arx:
        assert 0 <= pid_stn_rnd_k[3] < n_sp

    # one grant per service period and per member within a round
    per_round = {}
    for pid, stn, rnd, k in arx:
        per_round.setdefault((pid, rnd), []).append((stn, k))
    for grants in per_round.values():
        stns = [s for s, _ in grants]
        ks = [k for _, k in grants]
        assert len(set(stns)) == len(stns)
        assert len(set(ks)) == len(ks)

    for rec in bursts:
        attempted, delivered = rec[6], rec[7]
        assert 0 <= delivered <= attempted

    # announced service-period starts line up with the interval grid
    for rec in by_kind.get("spw", []):
        _, t_k, pid, rnd, k = rec
        start = bi_starts[(pid, rnd)]
        assert t_k == start + bi_cfg.bhi_ns + k * bi_cfg.sp_ns


def test_protocol_chain_invariants_across_snapshots():
    cfg = SimConfig(scenario=ScenarioConfig(pcp_probability=0.3))
    for seed in range(8):
        res = run_snapshot(cfg, 1000 + seed)
        _check_chain(res.trace, cfg.bi)


def test_chain_invariants_hold_at_extreme_slot_counts():
    for n in (3, 8):
        cfg = SimConfig(
            scenario=ScenarioConfig(pcp_probability=0.4),
            bi=BiConfig(n_abft_slots=n),
        )
        for seed in range(3):
            res = run_snapshot(cfg, 500 + seed)
            _check_chain(res.trace, cfg.bi)


def test_snapshot_is_deterministic():
    cfg = SimConfig()
    a = run_snapshot(cfg, 42)
    b = run_snapshot(cfg, 42)
    assert a.scenario == b.scenario
    assert a.trace == b.trace
    c = run_snapshot(cfg, 43)
    assert c.trace != a.trace


# -------------------------------------------------- responder slot choice


def test_abft_slot_choice_is_uniform():
    """A lone responder spreads its slot picks evenly across the frame.

    Chi-square over the slot histogram from many independent snapshots;
    the 0.001 critical value for 7 degrees of freedom is 24.32.
    """
    n_slots = 8
    counts = Counter()
    for seed in range(220):
        cfg, res = _single_link(n_slots=n_slots, seed=seed)
        bi_starts = {}
        for rec in res.trace:
            if rec[0] == "bi":
                bi_starts[(rec[2], rec[3])] = rec[1]
        seen = set()
        for rec in res.trace:
            if rec[0] == "srx":
                _, t, pid, stn, rnd = rec
                if (pid, rnd) in seen:
                    continue
                seen.add((pid, rnd))
                slot = (t - bi_starts[(pid, rnd)] - cfg.bi.bti_ns) // cfg.bi.slot_ns
                counts[slot] += 1
    total = sum(counts.values())
    assert total >= 700
    assert set(counts) <= set(range(n_slots))
    expect = total / n_slots
    chi2 = sum((counts.get(k, 0) - expect) ** 2 / expect for k in range(n_slots))
    assert chi2 < 24.32
