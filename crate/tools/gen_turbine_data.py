#!/usr/bin/env python3
"""Generate the bundled synthetic rotor geometry and airfoil polar.

The rotor is a 46.5 m, three-bladed design laid out with the Schmitz
optimum-chord rule for a design tip-speed ratio, with chord and twist capped
inboard. The polar is a generic cambered-airfoil family: a linear attached
lift curve with smooth blending into flat-plate post-stall coefficients over
the full +-180 degree range. The fourth polar column is a suction-side
displacement-thickness estimate (turbulent flat plate at a representative
Reynolds number, scaled with angle of attack).

Usage: python3 tools/gen_turbine_data.py [out_dir]
"""
import math
import sys
from pathlib import Path

# rotor
BLADE_RADIUS = 46.5
HUB_RADIUS = 2.0
N_BLADES = 3
N_SEGMENTS = 20
DESIGN_TSR = 8.5
DESIGN_ALPHA = 6.0
MAX_CHORD = 3.4
MAX_TWIST = 16.0
RATED_POWER = 2.3e6
RATED_RPM = 14.0

# polar
ZERO_LIFT_ALPHA = -2.5
LIFT_SLOPE = 2.0 * math.pi * 0.95  # per radian
STALL_ALPHA = 12.5
STALL_WIDTH = 1.6
NEG_STALL_ALPHA = -12.0
CD0 = 0.007
CD_MAX = 1.3
REPRESENTATIVE_RE = 3.0e6


def polar_point(alpha):
    a = math.radians(alpha)
    cl_att = LIFT_SLOPE * math.radians(alpha - ZERO_LIFT_ALPHA)
    cd_att = CD0 + 0.00012 * (alpha - 2.0) ** 2
    cl_fp = 1.1 * math.sin(2.0 * a)
    cd_fp = 0.02 + CD_MAX * math.sin(a) ** 2
    w_pos = 1.0 / (1.0 + math.exp(-(alpha - STALL_ALPHA) / STALL_WIDTH))
    w_neg = 1.0 / (1.0 + math.exp((alpha - NEG_STALL_ALPHA) / STALL_WIDTH))
    w = max(w_pos, w_neg)
    if abs(alpha) > 40.0:
        w = 1.0
    cl = (1.0 - w) * cl_att + w * cl_fp
    cd = (1.0 - w) * cd_att + w * cd_fp
    dstar0 = 0.048 * REPRESENTATIVE_RE ** -0.2
    a_bl = min(max(alpha, -5.0), 12.5)
    dstar = dstar0 * 10.0 ** (0.0679 * a_bl)
    return cl, cd, dstar


def polar_angles():
    out = list(range(-180, -30, 5)) + list(range(-30, 31)) + list(range(35, 181, 5))
    return [float(a) for a in out]


def geometry_rows():
    width = (BLADE_RADIUS - HUB_RADIUS) / N_SEGMENTS
    rows = []
    for i in range(N_SEGMENTS):
        r = HUB_RADIUS + (i + 0.5) * width
        lr = DESIGN_TSR * r / BLADE_RADIUS
        phi = 2.0 / 3.0 * math.atan(1.0 / lr)
        cl_design, _, _ = polar_point(DESIGN_ALPHA)
        chord = 8.0 * math.pi * r * (1.0 - math.cos(phi)) / (N_BLADES * cl_design)
        chord = min(chord, MAX_CHORD)
        twist = min(math.degrees(phi) - DESIGN_ALPHA, MAX_TWIST)
        rows.append((r, width, chord, twist))
    return rows


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "crates/core/data"
    (out / "polars").mkdir(parents=True, exist_ok=True)
    with open(out / "swt93_generic.geom", "w") as f:
        f.write("# Synthetic 46.5 m three-bladed rotor (generated by tools/gen_turbine_data.py)\n")
        f.write(f"# Schmitz chord layout for design TSR {DESIGN_TSR}, design alpha {DESIGN_ALPHA} deg\n")
        f.write(f"blade_radius_m = {BLADE_RADIUS}\n")
        f.write(f"hub_radius_m = {HUB_RADIUS}\n")
        f.write(f"n_blades = {N_BLADES}\n")
        f.write(f"rated_power_w = {RATED_POWER:.6e}\n")
        f.write(f"rated_rpm = {RATED_RPM}\n")
        f.write("station_m,width_m,chord_m,twist_deg,airfoil_id\n")
        for r, w, c, t in geometry_rows():
            f.write(f"{r:.6f},{w:.6f},{c:.6f},{t:.6f},generic\n")
    with open(out / "polars" / "generic.polar", "w") as f:
        f.write("# Synthetic cambered-airfoil polar (generated by tools/gen_turbine_data.py)\n")
        f.write("alpha_deg,cl,cd,dstar_over_chord\n")
        for a in polar_angles():
            cl, cd, ds = polar_point(a)
            f.write(f"{a:.1f},{cl:.6f},{cd:.6f},{ds:.6e}\n")


if __name__ == "__main__":
    main()
