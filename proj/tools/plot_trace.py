#!/usr/bin/env python3
"""Plot a quadsafe trace.csv: positions, velocities, barrier values and filtered inputs."""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

BARRIERS = ["h_alt", "h_altvel", "h_latpos", "h_latvel"]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("trace", type=Path, help="trace.csv written by `quadsafe run`")
    ap.add_argument("-o", "--out", type=Path, help="output image (default: next to the trace)")
    args = ap.parse_args()

    d = pd.read_csv(args.trace)
    fig, ax = plt.subplots(4, 1, figsize=(10, 12), sharex=True)

    for c in ("x", "y", "z"):
        ax[0].plot(d.t, d[c], label=c)
    ax[0].set_ylabel("position [m]")

    for c in ("vx", "vy", "vz"):
        ax[1].plot(d.t, d[c], label=c)
    ax[1].set_ylabel("velocity [m/s]")

    present = [c for c in BARRIERS if d[c].notna().any()]
    for c in present:
        ax[2].plot(d.t, d[c], label=c)
    ax[2].axhline(0.0, color="k", lw=0.8)
    ax[2].set_ylabel("h")
    if not present:
        ax[2].text(0.5, 0.5, "no barriers", transform=ax[2].transAxes, ha="center")

    ax[3].plot(d.t, d.f_hat, "--", label="f_hat")
    ax[3].plot(d.t, d.F_star, label="F*")
    ax[3].plot(d.t, d.Mx_star, label="Mx*")
    ax[3].plot(d.t, d.My_star, label="My*")
    ax[3].set_ylabel("input [N, N m]")
    ax[3].set_xlabel("t [s]")

    for a in ax:
        a.grid(True, alpha=0.3)
        if a.get_legend_handles_labels()[0]:
            a.legend(loc="upper right", fontsize="small")

    out = args.out or args.trace.with_suffix(".png")
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print(out)


if __name__ == "__main__":
    main()
