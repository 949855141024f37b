#!/usr/bin/env python3
"""Calibrate the mechanical Rabi drive line.

Runs an amplitude sweep in the linear (weak-drive) regime, fits each
trace to a damped cosine, and regresses fitted frequency against the
qubit-line amplitude through the origin.  The slope is the drive
participation of the mechanical branch and should match g/|Delta|.
Also plots one full Rabi trace at the pi-pulse calibration amplitude.

    python3 scripts/rabi_calibration.py --out results/rabi
"""

import argparse
import math
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mechq import estimation, sequences
from mechq.device import DEFAULT_OPERATING_DELTA_HZ, DeviceParams

TWO_PI = 2.0 * math.pi
CONFIG = pathlib.Path(__file__).resolve().parents[1] / "configs" / "device.json"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/rabi")
    ap.add_argument(
        "--mech-amps-khz", type=float, nargs="+", default=[5, 6, 7, 8, 9],
        help="effective mechanical drive amplitudes for the sweep",
    )
    args = ap.parse_args()

    params = DeviceParams.from_json_file(CONFIG)
    delta = TWO_PI * DEFAULT_OPERATING_DELTA_HZ
    eps = params.g / abs(delta)

    mech_amps = TWO_PI * np.asarray(args.mech_amps_khz) * 1e3
    qline = mech_amps / eps
    result = sequences.rabi_amplitude_sweep(
        params, delta, qline, n_periods=1.25, n_points=101
    )
    fitted = np.array(
        [estimation.fit_damped_cosine(r.times, r.p_excited).omega
         for r in result.records]
    )
    slope = float(np.sum(fitted * qline) / np.sum(qline * qline))
    print(f"drive participation: slope = {slope:.5f}, g/|Delta| = {eps:.5f} "
          f"({(slope/eps - 1)*100:+.2f}%)")

    # one trace at the pi-pulse point for the record
    rec = sequences.run_mech_rabi(
        params, delta, drive_amplitude=TWO_PI * 10.6e3
    )

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.4),
                                   constrained_layout=True)
    ax0.plot(qline / TWO_PI / 1e3, fitted / TWO_PI / 1e3, "o")
    xs = np.linspace(0.0, qline.max() / TWO_PI / 1e3, 50)
    ax0.plot(xs, slope * xs, "-", lw=0.8,
             label=f"slope {slope:.4f} (vs {eps:.4f})")
    ax0.set_xlabel("qubit-line amplitude (kHz)")
    ax0.set_ylabel("fitted Rabi frequency (kHz)")
    ax0.legend()
    ax1.plot(rec.times * 1e6, rec.p_excited, label=r"$P_1$")
    ax1.plot(rec.times * 1e6, rec.extras["p2_bare"], label=r"$P_2$")
    ax1.set_xlabel("drive duration (us)")
    ax1.set_ylabel("population")
    ax1.legend()
    fig.savefig(out / "rabi_calibration.png", dpi=160)

    i_pi = int(np.argmax(rec.p_excited))
    print(f"pi pulse: t = {rec.times[i_pi]*1e6:.2f} us, "
          f"P1 = {rec.p_excited[i_pi]:.4f}, "
          f"P2 = {rec.extras['p2_bare'][i_pi]:.4f}")
    print(f"wrote {out / 'rabi_calibration.png'}")


if __name__ == "__main__":
    main()
