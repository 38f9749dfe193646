"""60 GHz physical layer: path loss, sectored antennas, link budget, airtime.

Path loss follows an empirical log-distance model with per-blocker-count
coefficient classes plus a 15 dB/km atmospheric absorption term.  Antennas are
idealized sector patterns: a parabolic main lobe per sector over a constant
sidelobe floor, with a quasi-omni mode used while listening for training
frames.  The default main-lobe peak is derived from power conservation (the
mean linear gain over all directions equals one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

TAU = 2.0 * math.pi

# (slope multiplier A, intercept C in dB) per blocker-count class; counts
# beyond the last class reuse it.
PATH_LOSS_CLASSES: dict[int, tuple[float, float]] = {
    0: (1.77, 70.0),
    1: (1.71, 78.6),
    2: (0.635, 115.0),
    3: (0.362, 126.0),
}
ABSORPTION_DB_PER_KM = 15.0


def path_loss_db(distance_m: float, n_blockers: int) -> float:
    """Path loss in dB for a link of given length and blocker count."""
    a, c = PATH_LOSS_CLASSES[min(n_blockers, max(PATH_LOSS_CLASSES))]
    return (
        a * 10.0 * math.log10(distance_m)
        + c
        + ABSORPTION_DB_PER_KM * distance_m / 1000.0
    )


# Parabolic lobe rolloff coefficient: 3.01 dB at the sector edge.
_LOBE_ROLLOFF_DB = 3.01


def conservation_peak_gain_dbi(n_sectors: int, sidelobe_gain_dbi: float) -> float:
    """Main-lobe peak for which the all-direction mean linear gain is one.

    The lobe is g(u) = G - 3.01 u^2 dB for |u| <= 1 with u the normalized
    offset, so its linear integral is G_lin * I with
    I = integral_0^1 exp(-a u^2) du, a = 0.301 ln 10.
    """
    a = (_LOBE_ROLLOFF_DB / 10.0) * math.log(10.0)
    lobe_integral = 0.5 * math.sqrt(math.pi / a) * math.erf(math.sqrt(a))
    side_lin = 10.0 ** (sidelobe_gain_dbi / 10.0)
    peak_lin = n_sectors * (1.0 - (1.0 - 1.0 / n_sectors) * side_lin) / lobe_integral
    return 10.0 * math.log10(peak_lin)


@dataclass(frozen=True)
class AntennaConfig:
    n_sectors: int = 14
    sidelobe_gain_dbi: float = -10.0
    # None selects the power-conservation peak.
    peak_gain_dbi: float | None = None
    # None reuses the main-lobe peak, modelling a high-gain listening mode in
    # which training frames are received as well as they were sent.
    quasi_omni_gain_dbi: float | None = None

    def __post_init__(self) -> None:
        peak = (
            self.peak_gain_dbi
            if self.peak_gain_dbi is not None
            else conservation_peak_gain_dbi(self.n_sectors, self.sidelobe_gain_dbi)
        )
        omni = self.quasi_omni_gain_dbi if self.quasi_omni_gain_dbi is not None else peak
        object.__setattr__(self, "peak_db", peak)
        object.__setattr__(self, "omni_db", omni)
        object.__setattr__(self, "sector_width", TAU / self.n_sectors)


def sector_gain_dbi(
    ant: AntennaConfig, boresight: float, sector: int, bearing_to_peer: float
) -> float:
    """Directional gain of ``sector`` toward a peer at ``bearing_to_peer``.

    Sector k spans [boresight + k*w, boresight + (k+1)*w); its center points at
    boresight + (k + 0.5)*w.
    """
    w = ant.sector_width
    center = boresight + (sector + 0.5) * w
    off = (bearing_to_peer - center + math.pi) % TAU - math.pi
    half = w / 2.0
    if -half <= off <= half:
        u = off / half
        return ant.peak_db - _LOBE_ROLLOFF_DB * u * u
    return ant.sidelobe_gain_dbi


def quasi_omni_gain_dbi(ant: AntennaConfig) -> float:
    return ant.omni_db


def best_sector(ant: AntennaConfig, boresight: float, bearing_to_peer: float) -> int:
    """Sector whose center is nearest the peer bearing (the gain argmax)."""
    rel = (bearing_to_peer - boresight) % TAU
    return int(rel / ant.sector_width) % ant.n_sectors


class PhyKind(Enum):
    CONTROL = "control"
    OFDM = "ofdm"


@dataclass(frozen=True)
class McsEntry:
    index: int
    phy: PhyKind
    rate_bps: int
    sensitivity_dbm: float
    min_sinr_db: float


def default_mcs_table() -> dict[int, McsEntry]:
    return {
        0: McsEntry(0, PhyKind.CONTROL, 27_500_000, -78.0, 1.0),
        13: McsEntry(13, PhyKind.OFDM, 693_000_000, -66.0, 4.0),
    }


@dataclass(frozen=True)
class RadioConfig:
    tx_power_dbm: float = 10.0
    bandwidth_hz: float = 2.16e9
    noise_figure_db: float = 10.0
    preamble_control_ns: int = 9_100
    preamble_ofdm_ns: int = 4_200
    antenna: AntennaConfig = field(default_factory=AntennaConfig)
    mcs: dict[int, McsEntry] = field(default_factory=default_mcs_table)
    control_mcs: int = 0
    data_mcs: int = 13

    def __post_init__(self) -> None:
        nf = (
            -174.0
            + 10.0 * math.log10(self.bandwidth_hz)
            + self.noise_figure_db
        )
        object.__setattr__(self, "noise_floor_dbm", nf)


def rx_power_dbm(
    tx_power_dbm: float, tx_gain_dbi: float, rx_gain_dbi: float, pl_db: float
) -> float:
    return tx_power_dbm + tx_gain_dbi + rx_gain_dbi - pl_db


def frame_airtime_ns(payload_bytes: int, mcs: McsEntry, radio: RadioConfig) -> int:
    """Preamble plus payload transmission time, rounded up to whole ns."""
    preamble = (
        radio.preamble_control_ns
        if mcs.phy is PhyKind.CONTROL
        else radio.preamble_ofdm_ns
    )
    bits = payload_bytes * 8
    return preamble + (bits * 1_000_000_000 + mcs.rate_bps - 1) // mcs.rate_bps


class Decode(Enum):
    OK = "ok"
    FAIL_SENSITIVITY = "fail_sensitivity"
    FAIL_SINR = "fail_sinr"


def decode_outcome(
    signal_dbm: float,
    interferers_dbm: list[float],
    mcs: McsEntry,
    noise_floor_dbm: float,
) -> Decode:
    """Classify a reception attempt given co-channel interferer powers."""
    if signal_dbm < mcs.sensitivity_dbm:
        return Decode.FAIL_SENSITIVITY
    denom = 10.0 ** (noise_floor_dbm / 10.0)
    for p in interferers_dbm:
        denom += 10.0 ** (p / 10.0)
    sinr = signal_dbm - 10.0 * math.log10(denom)
    if sinr < mcs.min_sinr_db:
        return Decode.FAIL_SINR
    return Decode.OK


def aggregate_dbm(levels_dbm: list[float]) -> float:
    """Sum power levels in linear domain; -inf for an empty list."""
    if not levels_dbm:
        return -math.inf
    return 10.0 * math.log10(sum(10.0 ** (p / 10.0) for p in levels_dbm))
