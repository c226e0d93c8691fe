#!/usr/bin/env python3
"""Writes the synthetic Florence-like inputs under data/florence/.

The tile populations are a smooth two-scale density with lognormal noise,
masked by an irregular municipal boundary and rounded to 363060 residents.
Everything is deterministic; rerunning reproduces the checked-in files.
"""

import json
import math
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent / "data" / "florence"

ORIGIN_LAT = 43.72
ORIGIN_LON = 11.15
TILE_KM = 1.0
ROWS = 15  # south to north
COLS = 12  # west to east
TOTAL = 363060
EARTH_KM = 6371.0088

AGE_BREAKS = [0, 18, 35, 65]
AGE_FRACTIONS = [0.151, 0.169, 0.431, 0.249]

# (household_type, role, probability) per age group.
ROLES = [
    [("two-parents", "child", 0.82), ("single-parent", "child", 0.18)],
    [("two-parents", "child", 0.67), ("single-parent", "child", 0.12), ("two-parents", "parent", 0.05),
     ("single-parent", "parent", 0.01), ("couples", "peer", 0.05), ("singles", "single", 0.04),
     ("various", "various", 0.06)],
    [("two-parents", "parent", 0.43), ("single-parent", "parent", 0.06), ("couples", "peer", 0.18),
     ("singles", "single", 0.12), ("various", "various", 0.21)],
    [("two-parents", "parent", 0.18), ("single-parent", "parent", 0.04), ("couples", "peer", 0.42),
     ("singles", "single", 0.28), ("various", "various", 0.08)],
]

SIZES = {
    "singles": {1: 1.0},
    "couples": {2: 1.0},
    "single-parent": {2: 0.35, 3: 0.40, 4: 0.25},
    "two-parents": {3: 0.10, 4: 0.30, 5: 0.30, 6: 0.20, 7: 0.10},
    "various": {2: 0.30, 3: 0.30, 4: 0.25, 5: 0.15},
}

# Daily contacts of a member of row group with column group.
# Density shape: core and western lobe widths (km), broad background weight,
# lognormal tile noise and the damping of hill tiles.
CORE_SIGMA = 2.2
WEST_SIGMA = 1.5
BACKGROUND = 0.35
NOISE = 0.3
HILL_DAMP = 0.08

CONTACTS = [
    [7.0, 1.6, 3.5, 0.7],
    [1.5, 5.5, 3.6, 0.8],
    [1.2, 1.4, 5.2, 1.2],
    [0.4, 0.6, 2.2, 2.5],
]

# Boundary in (east_km, north_km) on the local plane.
BOUNDARY_KM = [
    (0.3, 4.2), (1.8, 1.6), (4.5, 0.4), (7.6, 0.9), (10.2, 2.3), (11.7, 5.0),
    (11.4, 8.8), (10.1, 11.9), (8.3, 14.6), (5.2, 14.8), (2.6, 13.4), (0.9, 10.7),
    (0.2, 7.3),
]


def to_latlon(east, north):
    lat = ORIGIN_LAT + math.degrees(north / EARTH_KM)
    lon = ORIGIN_LON + math.degrees(east / (EARTH_KM * math.cos(math.radians(ORIGIN_LAT))))
    return lat, lon


def inside(x, y, ring):
    hit = False
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xc:
                hit = not hit
    return hit


def largest_remainder(weights, total):
    raw = weights / weights.sum() * total
    base = np.floor(raw).astype(np.int64)
    rest = total - base.sum()
    order = np.argsort(-(raw - base), kind="stable")
    base[order[:rest]] += 1
    return base


def tiles():
    rng = np.random.default_rng(20240611)
    weights = np.zeros((ROWS, COLS))
    for r in range(ROWS):
        for c in range(COLS):
            x, y = (c + 0.5) * TILE_KM, (r + 0.5) * TILE_KM
            if not inside(x, y, BOUNDARY_KM):
                continue
            d_core = math.hypot(x - 6.2, y - 7.4)
            d_west = math.hypot(x - 3.0, y - 6.0)
            w = (math.exp(-d_core ** 2 / (2 * CORE_SIGMA ** 2)) + 0.45 * math.exp(-d_west ** 2 / (2 * WEST_SIGMA ** 2))
                 + BACKGROUND * math.exp(-d_core ** 2 / (2 * 5.0 ** 2)))
            w *= rng.lognormal(0.0, NOISE)
            # Hills to the south-east and north: sparsely inhabited tiles.
            if y > 12.0 or (x > 8.5 and y < 4.5):
                w *= HILL_DAMP
            weights[r, c] = w
    counts = largest_remainder(weights.ravel(), TOTAL).reshape(ROWS, COLS)
    lines = ["row,col,population"]
    for r in range(ROWS):
        for c in range(COLS):
            if counts[r, c] > 0:
                lines.append(f"{r},{c},{counts[r, c]}")
    (ROOT / "tiles.csv").write_text("\n".join(lines) + "\n")
    return counts


def polygon():
    ring = [[round(lat, 6), round(lon, 6)] for lat, lon in (to_latlon(x, y) for x, y in BOUNDARY_KM)]
    (ROOT / "polygon.json").write_text(json.dumps([ring]) + "\n")


def write_csv(name, header, rows):
    lines = [header] + [",".join(str(v) for v in r) for r in rows]
    (ROOT / name).write_text("\n".join(lines) + "\n")


def tables():
    write_csv("age_distribution.csv", "group_index,age_break_low,fraction",
              [(i, b, f) for i, (b, f) in enumerate(zip(AGE_BREAKS, AGE_FRACTIONS))])
    rows = []
    for g, row in enumerate(ROLES):
        assert abs(sum(p for _, _, p in row) - 1.0) < 1e-12, g
        rows += [(g, t, r, p) for t, r, p in row]
    write_csv("roles.csv", "age_group,household_type,role,probability", rows)
    rows = []
    for t, dist in SIZES.items():
        assert abs(sum(dist.values()) - 1.0) < 1e-12, t
        rows += [(t, k, p) for k, p in dist.items()]
    write_csv("sizes.csv", "household_type,size,probability", rows)
    labels = [f"g{i}" for i in range(len(CONTACTS))]
    (ROOT / "contact_matrix.csv").write_text(
        ",".join(["group"] + labels) + "\n"
        + "".join(",".join([labels[i]] + [str(v) for v in r]) + "\n" for i, r in enumerate(CONTACTS)))


def main():
    ROOT.mkdir(parents=True, exist_ok=True)
    counts = tiles()
    polygon()
    tables()
    print(f"{(counts > 0).sum()} populated tiles, {counts.sum()} residents, max {counts.max()}")


if __name__ == "__main__":
    main()
