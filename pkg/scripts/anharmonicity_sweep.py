#!/usr/bin/env python3
"""Sweep the qubit-phonon detuning and map out the mechanical mode's
induced anharmonicity, hybridization weights, and inherited dephasing.

Writes a CSV plus a three-panel overview figure.  The dashed marker is
the operating point used everywhere else in this repo (-0.71 MHz).

    python3 scripts/anharmonicity_sweep.py --out results/theory
"""

import argparse
import csv
import math
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mechq import device
from mechq.device import DEFAULT_OPERATING_DELTA_HZ, DeviceParams

TWO_PI = 2.0 * math.pi
CONFIG = pathlib.Path(__file__).resolve().parents[1] / "configs" / "device.json"


def sweep(params, deltas_hz):
    rows = []
    for d in deltas_hz:
        delta = TWO_PI * d
        budget = device.coherence_budget(params, delta)
        rows.append(
            dict(
                delta_hz=d,
                alpha_hz=budget.alpha / TWO_PI,
                p_phonon_1=device.phonon_weight(params.g, delta, 1),
                gamma2_purcell_per_s=budget.Gamma2_purcell,
                gamma2_total_per_s=budget.Gamma2_total,
                ratio=budget.ratio_alpha_gamma2,
            )
        )
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/theory", help="output directory")
    ap.add_argument("--delta-min-mhz", type=float, default=-4.0)
    ap.add_argument("--delta-max-mhz", type=float, default=-0.5)
    ap.add_argument("--n", type=int, default=351)
    args = ap.parse_args()

    params = DeviceParams.from_json_file(CONFIG)
    deltas = np.linspace(args.delta_min_mhz, args.delta_max_mhz, args.n) * 1e6
    rows = sweep(params, deltas)

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "anharmonicity_sweep.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)

    d_mhz = deltas / 1e6
    alpha_khz = np.array([r["alpha_hz"] for r in rows]) / 1e3
    p1 = np.array([r["p_phonon_1"] for r in rows])
    ratio = np.array([r["ratio"] for r in rows])

    fig, axes = plt.subplots(1, 3, figsize=(12, 3.4), constrained_layout=True)
    axes[0].plot(d_mhz, np.abs(alpha_khz))
    axes[0].set_yscale("log")
    axes[0].set_ylabel(r"$|\alpha|/2\pi$ (kHz)")
    axes[1].plot(d_mhz, p1)
    axes[1].set_ylabel(r"phonon weight $p_{p,1}$")
    axes[2].plot(d_mhz, ratio)
    axes[2].set_ylabel(r"$|\alpha| / \Gamma_2$")
    for ax in axes:
        ax.set_xlabel(r"$\Delta/2\pi$ (MHz)")
        ax.axvline(DEFAULT_OPERATING_DELTA_HZ / 1e6, ls="--", c="gray", lw=0.8)
    fig.savefig(out / "anharmonicity_sweep.png", dpi=160)

    op = sweep(params, [DEFAULT_OPERATING_DELTA_HZ])[0]
    print(f"wrote {csv_path}")
    print(
        f"operating point: alpha/2pi = {op['alpha_hz']/1e3:.3f} kHz, "
        f"p_p1 = {op['p_phonon_1']:.4f}, "
        f"|alpha|/Gamma2 = {op['ratio']:.2f}"
    )


if __name__ == "__main__":
    main()
