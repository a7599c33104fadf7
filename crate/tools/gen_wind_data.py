#!/usr/bin/env python3
"""Generate the bundled synthetic hub-height wind records.

Both files follow the ingest schema `timestamp,wind_speed_ms,direction_deg`.
Speeds are an Ornstein-Uhlenbeck turbulence process around a slowly varying
mean, so the records look like met-mast exports without being real data.

  below_rated_8h.csv   8 h at 10 s cadence, light winds (mostly 5-8 m/s)
  mixed_100h.csv       100 h at 60 s cadence, diurnal and synoptic swings
                       spanning cut-in to cut-off

Usage: python3 tools/gen_wind_data.py [out_dir]
"""
import math
import sys
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

START = datetime(2023, 6, 1, 0, 0, 0)


def ou(rng, mean, intensity, tau, dt):
    x = np.empty_like(mean)
    x[0] = 0.0
    a = math.exp(-dt / tau)
    for i in range(1, len(mean)):
        sd = intensity * mean[i] * math.sqrt(1.0 - a * a)
        x[i] = a * x[i - 1] + sd * rng.standard_normal()
    return mean + x


def write(path, dt, speeds, directions):
    with open(path, "w") as f:
        f.write("# synthetic hub-height wind, generated by tools/gen_wind_data.py\n")
        f.write("timestamp,wind_speed_ms,direction_deg\n")
        for i, (u, d) in enumerate(zip(speeds, directions)):
            t = START + timedelta(seconds=i * dt)
            f.write(f"{t:%Y-%m-%dT%H:%M:%S},{max(u, 0.0):.3f},{d % 360.0:.1f}\n")


def light_8h(rng):
    dt = 10.0
    n = int(8 * 3600 / dt)
    t = np.arange(n) * dt
    mean = 6.3 + 0.8 * np.sin(2 * math.pi * t / (5.5 * 3600)) + 0.4 * np.sin(2 * math.pi * t / 5400 + 1.0)
    u = ou(rng, mean, 0.10, 240.0, dt)
    d = 250.0 + np.cumsum(rng.normal(0.0, 0.4, n))
    return dt, u, d


def mixed_100h(rng):
    dt = 60.0
    n = int(100 * 3600 / dt)
    t = np.arange(n) * dt
    day = 24 * 3600
    mean = (
        9.5
        + 2.5 * np.sin(2 * math.pi * t / day - 1.2)
        + 3.0 * np.sin(2 * math.pi * t / (3.7 * day) + 0.4)
        + 1.0 * np.sin(2 * math.pi * t / (0.45 * day))
    )
    u = ou(rng, mean, 0.12, 600.0, dt)
    d = 230.0 + np.cumsum(rng.normal(0.0, 1.0, n))
    return dt, u, d


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "wind"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20230601)
    dt, u, d = light_8h(rng)
    write(out / "below_rated_8h.csv", dt, u, d)
    dt, u, d = mixed_100h(rng)
    write(out / "mixed_100h.csv", dt, u, d)


if __name__ == "__main__":
    main()
