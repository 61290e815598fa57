#!/usr/bin/env python3
"""Regenerates the network bundles and scenario files in this directory.

Deterministic: no randomness, only closed-form profiles. Run from anywhere:

    python3 crates/core/fixtures/generate.py
"""

import csv
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))
YEAR = 8760.0

# Annualized generator and line costs, EUR/MW/yr (investment x (annuity + FOM)).
def annuity(rate, years):
    return rate / (1.0 - (1.0 + rate) ** -years) if rate > 0 else 1.0 / years

WIND_CAPEX = round(1100e3 * (annuity(0.07, 25) + 0.03), 2)
SOLAR_CAPEX = round(450e3 * (annuity(0.07, 25) + 0.02), 2)
LINE_CAPEX_PER_KM = round(400.0 * annuity(0.07, 40) + 400.0 * 0.02, 4)

CARRIERS = [
    ("wind", 0.0, True),
    ("solar", 0.0, True),
    ("gas", 0.4, False),
]

COMPONENT_FIELDS = ["investment", "fom", "lifetime", "efficiency", "discount_rate",
                    "existing", "extendable", "capacity_max"]

# Component data: (investment EUR/kW or EUR/kWh, FOM fraction, lifetime, efficiency, rate).
ELECTROLYSER_LOW = (339, 0.02, 25, 0.68, 0.07)
ELECTROLYSER_HIGH = (677, 0.03, 15, 0.79, 0.07)
FUEL_CELL_LOW = (339, 0.02, 20, 0.47, 0.07)
FUEL_CELL_HIGH = (423, 0.03, 20, 0.58, 0.07)
H2_TANK = (8.4, 0.0, 20, 1.0, 0.07)
INVERTER = (209, 0.03, 10, 0.90, 0.07)
# The inverter is one device; its cost sits on the charger side only.
INVERTER_DISCHARGE = (0, 0.0, 10, 0.90, 0.07)
BATTERY_CELLS = (188, 0.0, 10, 1.0, 0.07)


def storage_row(tid, tech, bus, coupling, hub, ep, shared, charger, store, discharger):
    row = {
        "id": tid, "technology": tech, "bus": bus, "coupling": coupling, "hub_id": hub or "",
        "ep_ratio_hours": "" if ep is None else ep,
        "shared_converter": str(shared).lower(), "spillage_allowed": "false",
        "epsilon_cost": "",
    }
    for name, spec in (("charger", charger), ("store", store), ("discharger", discharger)):
        inv, fom, life, eff, rate = spec
        row.update({
            f"{name}_investment": inv, f"{name}_fom": fom, f"{name}_lifetime": life,
            f"{name}_efficiency": eff, f"{name}_discount_rate": rate,
            f"{name}_existing": 0, f"{name}_extendable": "true", f"{name}_capacity_max": "inf",
        })
    return row


def battery(tid, bus):
    return storage_row(tid, "battery", bus, "free", None, 4, True, INVERTER, BATTERY_CELLS, INVERTER_DISCHARGE)


def h2_pair(prefix, bus, hub):
    return [
        storage_row(f"{prefix}-low", "h2-low", bus, "hub_member", hub, 100, False,
                    ELECTROLYSER_LOW, H2_TANK, FUEL_CELL_LOW),
        storage_row(f"{prefix}-high", "h2-high", bus, "hub_member", hub, 100, False,
                    ELECTROLYSER_HIGH, H2_TANK, FUEL_CELL_HIGH),
    ]


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(r[h]) if isinstance(r, dict) else fmt(r[i]) for i, h in enumerate(header)])


def fmt(v):
    if isinstance(v, float) and math.isfinite(v):
        return repr(v)
    return str(v)


def write_bundle(name, snapshots, buses, generators, lines, storage, loads, availability):
    d = os.path.join(HERE, name)
    os.makedirs(d, exist_ok=True)
    write_csv(os.path.join(d, "snapshots.csv"), ["timestamp", "weight"], snapshots)
    write_csv(os.path.join(d, "buses.csv"), ["id", "country", "lat", "lon"], buses)
    write_csv(os.path.join(d, "carriers.csv"), ["name", "emission_factor", "variable_renewable"],
              [(n, e, str(v).lower()) for n, e, v in CARRIERS])
    write_csv(os.path.join(d, "generators.csv"),
              ["id", "bus", "carrier", "existing_capacity", "extendable", "capacity_min",
               "capacity_max", "capital_cost", "marginal_cost"], generators)
    write_csv(os.path.join(d, "lines.csv"),
              ["id", "bus_from", "bus_to", "reactance", "length", "existing_capacity",
               "extendable", "capacity_max", "capital_cost"], lines)
    header = ["id", "technology", "bus", "coupling", "hub_id", "ep_ratio_hours", "shared_converter",
              "spillage_allowed", "epsilon_cost"]
    for c in ("charger", "store", "discharger"):
        header += [f"{c}_{f}" for f in COMPONENT_FIELDS]
    write_csv(os.path.join(d, "storage.csv"), header, storage)
    stamps = [s[0] for s in snapshots]
    bus_ids = [b[0] for b in buses]
    write_csv(os.path.join(d, "loads.csv"), ["timestamp"] + bus_ids,
              [[stamps[t]] + [loads[b][t] for b in bus_ids] for t in range(len(stamps))])
    avail_path = os.path.join(d, "availability.csv")
    if availability:
        ids = list(availability)
        write_csv(avail_path, ["timestamp"] + ids,
                  [[stamps[t]] + [availability[i][t] for i in ids] for t in range(len(stamps))])
    elif os.path.exists(avail_path):
        os.remove(avail_path)


def snapshots(count):
    w = YEAR / count
    return [(f"s{t:03d}", w) for t in range(count)]


def solar_profile(count, scale=1.0):
    """Diurnal shape on a 24-step day, with a slow seasonal swing."""
    out = []
    for t in range(count):
        h = t % 24
        day = max(0.0, math.sin(math.pi * (h - 6) / 12)) if 6 <= h <= 18 else 0.0
        season = 0.8 + 0.2 * math.cos(2 * math.pi * t / count)
        out.append(round(min(1.0, scale * day * season), 4))
    return out


def wind_profile(count, phase, lull_every=None, lull_len=0, base=0.5, swing=0.35):
    out = []
    for t in range(count):
        v = base + swing * math.sin(2 * math.pi * t / 56 + phase) + 0.08 * math.sin(2 * math.pi * t / 9 + 2 * phase)
        if lull_every and (t % lull_every) < lull_len:
            v = 0.02
        out.append(round(min(1.0, max(0.0, v)), 4))
    return out


def demand_profile(count, base, swing=0.2):
    return [round(base * (1 + swing * math.sin(2 * math.pi * ((t % 24) - 8) / 24)), 4) for t in range(count)]


def two_bus():
    n = 24
    snaps = snapshots(n)
    buses = [("A", "AA", 52.0, 13.0), ("B", "AA", 52.5, 13.5)]
    generators = [
        ("gas-A", "A", "gas", 150.0, "false", 0, 150.0, 0, 50.0),
        ("solar-A", "A", "solar", 0.0, "true", 0, "inf", SOLAR_CAPEX, 0.0),
    ]
    lines = [("A-B", "A", "B", 0.1, 100.0, 200.0, "false", 200.0, 0.0)]
    loads = {"A": [0.0] * n, "B": demand_profile(n, 80.0)}
    availability = {"solar-A": solar_profile(n)}
    write_bundle("two-bus", snaps, buses, generators, lines, [], loads, availability)


FIVE_BUS_WIND = {"N1": (0.0, 1.0), "N2": (1.5, 0.55), "N3": (2.5, 0.45), "N4": (0.6, 1.0), "N5": (3.5, 0.6)}
FIVE_BUS_SOLAR = {"N1": 0.6, "N2": 0.95, "N3": 1.0, "N4": 0.55, "N5": 0.9}
FIVE_BUS_DEMAND = {"N1": 120.0, "N2": 220.0, "N3": 260.0, "N4": 100.0, "N5": 180.0}


def five_bus():
    n = 168
    snaps = snapshots(n)
    buses = [("N1", "AA", 55.0, 9.0), ("N2", "AA", 52.0, 10.0), ("N3", "AA", 50.0, 8.0),
             ("N4", "BB", 53.0, 5.0), ("N5", "BB", 49.0, 4.0)]
    generators = []
    availability = {}
    loads = {}
    for b, _, _, _ in buses:
        phase, scale = FIVE_BUS_WIND[b]
        generators.append((f"wind-{b}", b, "wind", 0.0, "true", 0, "inf", WIND_CAPEX, 0.0))
        generators.append((f"solar-{b}", b, "solar", 0.0, "true", 0, "inf", SOLAR_CAPEX, 0.0))
        generators.append((f"gas-{b}", b, "gas", 80.0, "false", 0, 80.0, 0, 70.0))
        availability[f"wind-{b}"] = [round(v * scale, 4) for v in wind_profile(n, phase, 40, 9)]
        availability[f"solar-{b}"] = solar_profile(n, FIVE_BUS_SOLAR[b])
        loads[b] = demand_profile(n, FIVE_BUS_DEMAND[b])
    lines = []
    for lid, a, b, length, cap in [
        ("L12", "N1", "N2", 300.0, 150.0), ("L23", "N2", "N3", 250.0, 150.0),
        ("L31", "N3", "N1", 500.0, 100.0), ("L34", "N3", "N4", 400.0, 120.0),
        ("L45", "N4", "N5", 450.0, 100.0), ("L53", "N5", "N3", 350.0, 120.0),
        ("L14", "N1", "N4", 600.0, 80.0),
    ]:
        lines.append((lid, a, b, round(length / 1000.0, 4), length, cap, "true", "inf",
                      round(LINE_CAPEX_PER_KM * length, 2)))
    storage = [battery(f"battery-{b}", b) for b in ("N2", "N3", "N5")]
    storage += h2_pair("h2-N1", "N1", "hub-N1") + h2_pair("h2-N4", "N4", "hub-N4")
    write_bundle("five-bus", snaps, buses, generators, lines, storage, loads, availability)


def hydrogen_toy():
    """Single wind-only bus with a long lull every night and steady demand.

    Four hourly days with unit weights, so store sizes follow the hourly
    lull lengths and converter power sets the storage bill."""
    n = 96
    snaps = [(f"h{t:03d}", 1.0) for t in range(n)]
    buses = [("W", "AA", 57.0, 8.0)]
    wind = []
    for t in range(n):
        k = t % 24
        wind.append(0.0 if k >= 16 else 0.9)
    generators = [("wind-W", "W", "wind", 0.0, "true", 0, "inf", WIND_CAPEX, 0.0)]
    storage = [
        storage_row("h2-low", "h2-low", "W", "fixed_ep", None, 100, False, ELECTROLYSER_LOW, H2_TANK, FUEL_CELL_LOW),
        storage_row("h2-high", "h2-high", "W", "fixed_ep", None, 100, False, ELECTROLYSER_HIGH, H2_TANK, FUEL_CELL_HIGH),
    ]
    loads = {"W": [100.0] * n}
    write_bundle("hydrogen-toy", snaps, buses, generators, [], storage, loads, {"wind-W": wind})


def scenarios():
    d = os.path.join(HERE, "scenarios")
    os.makedirs(d, exist_ok=True)
    for mode in ("fixed_ep", "variable_ep", "h2_hub"):
        with open(os.path.join(d, f"{mode}.cfg"), "w") as f:
            f.write(f"# Zero-emission run, {mode.replace('_', ' ')} storage sizing\n")
            f.write(f"storage_mode = {mode}\nco2_cap = 0\n")
            f.write("equity_fraction = 0.8\nline_volume_expansion_frac = 0.25\n")


if __name__ == "__main__":
    two_bus()
    five_bus()
    hydrogen_toy()
    scenarios()
