"""Road deployment and blockage geometry.

Vehicles are axis-aligned rectangles on a straight multi-lane road segment.
A link between two vehicles is blocked by every other vehicle whose rectangle
intersects the open center-to-center segment; the blocker count later selects
the path-loss class in :mod:`mmwv2v.radio`.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

TAU = 2.0 * math.pi


@dataclass(frozen=True)
class ScenarioConfig:
    """Static deployment parameters for one road segment."""

    road_length_m: float = 80.0
    road_width_m: float = 16.0
    n_lanes: int = 4
    vehicle_length_m: float = 5.0
    vehicle_width_m: float = 2.0
    n_vehicles: int = 10
    pcp_probability: float = 0.1
    # rejection-sampling retry budget per vehicle placement
    max_placement_retries: int = 1000

    def lane_center_y(self, lane: int) -> float:
        lane_width = self.road_width_m / self.n_lanes
        return lane_width * (lane + 0.5)


@dataclass(frozen=True)
class Vehicle:
    vid: int
    lane: int
    x: float
    y: float
    is_pcp: bool


@dataclass
class Scenario:
    cfg: ScenarioConfig
    vehicles: list[Vehicle] = field(default_factory=list)

    @property
    def pcp_ids(self) -> list[int]:
        return [v.vid for v in self.vehicles if v.is_pcp]

    @property
    def n(self) -> int:
        return len(self.vehicles)

    def to_text(self) -> str:
        lines = ["# vid lane x y pcp"]
        for v in self.vehicles:
            lines.append(f"{v.vid} {v.lane} {v.x:.6f} {v.y:.6f} {int(v.is_pcp)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, cfg: ScenarioConfig | None = None) -> "Scenario":
        cfg = cfg or ScenarioConfig()
        vehicles = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            vid, lane, x, y, pcp = line.split()
            vehicles.append(
                Vehicle(int(vid), int(lane), float(x), float(y), bool(int(pcp)))
            )
        return cls(cfg, vehicles)


class PlacementError(Exception):
    """Raised when rejection sampling cannot place all vehicles."""


def deploy(cfg: ScenarioConfig, rng: random.Random) -> Scenario:
    """Draw one random deployment.

    Each vehicle picks a uniform lane and a uniform x position; placements
    overlapping an already placed same-lane vehicle are rejected and redrawn.
    Roles are redrawn until at least one vehicle is a PCP, so every scenario
    has at least one coordinator.
    """
    half_len = cfg.vehicle_length_m / 2.0
    x_lo = half_len
    x_hi = cfg.road_length_m - half_len
    placed: list[tuple[int, float]] = []
    for _ in range(cfg.n_vehicles):
        for _attempt in range(cfg.max_placement_retries):
            lane = rng.randrange(cfg.n_lanes)
            x = rng.uniform(x_lo, x_hi)
            if all(
                lane != other_lane or abs(x - other_x) >= cfg.vehicle_length_m
                for other_lane, other_x in placed
            ):
                placed.append((lane, x))
                break
        else:
            raise PlacementError(
                f"could not place vehicle after {cfg.max_placement_retries} retries"
            )
    while True:
        roles = [rng.random() < cfg.pcp_probability for _ in range(cfg.n_vehicles)]
        if any(roles):
            break
    vehicles = [
        Vehicle(i, lane, x, cfg.lane_center_y(lane), roles[i])
        for i, (lane, x) in enumerate(placed)
    ]
    return Scenario(cfg, vehicles)


def segment_intersects_rect(
    px: float,
    py: float,
    qx: float,
    qy: float,
    xlo: float,
    xhi: float,
    ylo: float,
    yhi: float,
) -> bool:
    """True if the open segment P-Q crosses the closed rectangle.

    Standard slab clipping.  Intersections confined to the segment endpoints
    themselves do not count (tmin < 1 and tmax > 0), so a vehicle touching
    only the exact endpoint of a link is not a blocker.
    """
    dx = qx - px
    dy = qy - py
    tmin = 0.0
    tmax = 1.0
    for p, d, lo, hi in ((px, dx, xlo, xhi), (py, dy, ylo, yhi)):
        if d == 0.0:
            if p < lo or p > hi:
                return False
        else:
            t1 = (lo - p) / d
            t2 = (hi - p) / d
            if t1 > t2:
                t1, t2 = t2, t1
            if t1 > tmin:
                tmin = t1
            if t2 < tmax:
                tmax = t2
    return tmax >= tmin and tmax > 0.0 and tmin < 1.0


def count_blockers(scenario: Scenario, i: int, j: int) -> int:
    """Number of other vehicles whose rectangle crosses the i-j center segment."""
    cfg = scenario.cfg
    vi = scenario.vehicles[i]
    vj = scenario.vehicles[j]
    hl = cfg.vehicle_length_m / 2.0
    hw = cfg.vehicle_width_m / 2.0
    n = 0
    for v in scenario.vehicles:
        if v.vid == vi.vid or v.vid == vj.vid:
            continue
        if segment_intersects_rect(
            vi.x, vi.y, vj.x, vj.y, v.x - hl, v.x + hl, v.y - hw, v.y + hw
        ):
            n += 1
    return n


def bearing(px: float, py: float, qx: float, qy: float) -> float:
    """Bearing from P to Q in radians, wrapped to [0, 2*pi)."""
    b = math.atan2(qy - py, qx - px) % TAU
    # float modulo of a tiny negative angle can round up to the period itself
    return 0.0 if b >= TAU else b


@dataclass
class PairTable:
    """Per-scenario cache of pairwise distance, bearing and blocker count."""

    dist: list[list[float]]
    bear: list[list[float]]
    blockers: list[list[int]]


def build_pair_table(scenario: Scenario) -> PairTable:
    n = scenario.n
    vs = scenario.vehicles
    dist = [[0.0] * n for _ in range(n)]
    bear = [[0.0] * n for _ in range(n)]
    blk = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = math.hypot(vs[j].x - vs[i].x, vs[j].y - vs[i].y)
            b = count_blockers(scenario, i, j)
            dist[i][j] = dist[j][i] = d
            blk[i][j] = blk[j][i] = b
            bear[i][j] = bearing(vs[i].x, vs[i].y, vs[j].x, vs[j].y)
            bear[j][i] = bearing(vs[j].x, vs[j].y, vs[i].x, vs[i].y)
    return PairTable(dist, bear, blk)
