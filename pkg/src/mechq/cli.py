"""Command-line interface.

    mechq theory --config configs/device.json --out results/
    mechq run --config configs/device.json --experiment mech_rabi --out results/
    mechq fit --data results/phonon_t1.csv
    mechq wigner --config configs/device.json --label one --out results/
    mechq replay results/mech_rabi_manifest.json

Every product (CSV) gets a JSON manifest sidecar echoing the resolved
device configuration, the parameters, the seed, the tool version, and
the wall time; ``replay`` reruns a manifest and, in exact-sampling mode,
reproduces the CSV byte for byte.  Contract violations exit nonzero.
``MECHQ_THREADS`` caps the worker pool used for parameter sweeps.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, device, estimation, sequences
from .device import DEFAULT_OPERATING_DELTA_HZ, DeviceParams
from .hilbert import ContractViolationError

TWO_PI = 2.0 * math.pi

EXPERIMENTS = (
    "theory",
    "spectroscopy",
    "ramsey_anharmonicity",
    "rpn",
    "mech_rabi",
    "phonon_t1",
    "phonon_t2",
    "cardinal_states",
)


def _max_workers() -> int:
    raw = os.environ.get("MECHQ_THREADS")
    if raw:
        value = int(raw)
        if value < 1:
            raise ContractViolationError("MECHQ_THREADS must be >= 1")
        return value
    return os.cpu_count() or 1


@dataclass
class RunConfig:
    device: str
    experiment: str
    parameters: dict = field(default_factory=dict)
    output_dir: str = "results"
    seed: int = 1234
    shots: object = "exact"

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ContractViolationError(
                f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}"
            )
        if self.shots != "exact":
            self.shots = int(self.shots)
            if self.shots < 1:
                raise ContractViolationError("shots must be 'exact' or a positive int")

    @classmethod
    def from_json_file(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls(**json.load(fh))


# ---------------------------------------------------------------------------
# output helpers


def _fmt(value) -> str:
    return repr(float(value))


def _write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, (int, float, np.floating))
                             else v for v in row])


def _write_manifest(
    path: Path, command: str, params: DeviceParams | None, run: RunConfig | None,
    outputs: list, wall_time: float, extra: dict | None = None,
) -> None:
    manifest = {
        "tool": "mechq",
        "version": __version__,
        "command": command,
        "config": params.to_dict() if params is not None else None,
        "experiment": run.experiment if run else None,
        "parameters": run.parameters if run else {},
        "seed": run.seed if run else None,
        "shots": run.shots if run else None,
        "outputs": [str(o) for o in outputs],
        "wall_time_s": wall_time,
    }
    if extra:
        manifest.update(extra)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _record_to_csv(path: Path, record: sequences.MeasurementRecord) -> None:
    header = [record.axis, "p_excited"] + sorted(record.extras)
    columns = [record.times, record.p_excited] + [
        record.extras[k] for k in sorted(record.extras)
    ]
    _write_csv(path, header, zip(*columns))


def _load_record_csv(path) -> tuple:
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [list(map(float, row)) for row in reader]
    data = np.asarray(rows, dtype=float)
    return header, data


def _sidecar_manifest(data_path) -> dict | None:
    p = Path(data_path)
    manifest = p.with_name(p.stem + "_manifest.json")
    if manifest.exists():
        with open(manifest) as fh:
            return json.load(fh)
    return None


# ---------------------------------------------------------------------------
# theory table


def theory_rows(
    g: float, gamma2_qubit: float, gamma2_phonon: float, deltas_hz: np.ndarray
) -> list:
    """One row per detuning: the closed-form budget of the mech branch.

    Works for g = 0 as well (a decoupled device has zero inherited
    anharmonicity and weight), which is why this does not go through
    DeviceParams validation.
    """
    rows = []
    for d_hz in deltas_hz:
        delta = TWO_PI * d_hz
        if delta == 0:
            raise ContractViolationError("theory grid must avoid delta = 0")
        if g == 0:
            alpha = 0.0
            pp1 = 0.0
        else:
            s = 1.0 if delta > 0 else -1.0
            alpha = -delta / 2.0 + s * (
                math.sqrt(delta**2 + 4.0 * g**2)
                - 0.5 * math.sqrt(delta**2 + 8.0 * g**2)
            )
            pp1 = device.phonon_weight(g, delta, 1)
        epsilon = g / abs(delta)
        purcell = epsilon**2 * gamma2_qubit
        total = purcell + gamma2_phonon
        rows.append(
            (
                d_hz,
                alpha / TWO_PI,
                purcell,
                total,
                pp1,
                abs(alpha) / total,
            )
        )
    return rows


THEORY_HEADER = [
    "delta_hz",
    "alpha_hz",
    "gamma2_purcell_per_s",
    "gamma2_total_per_s",
    "p_phonon_1",
    "ratio_alpha_gamma2",
]


def cmd_theory(args) -> int:
    t0 = time.monotonic()
    params = DeviceParams.from_json_file(args.config)
    g = TWO_PI * args.g_hz if args.g_hz is not None else params.g
    deltas = np.arange(args.delta_min_hz, args.delta_max_hz + 0.5 * args.delta_step_hz,
                       args.delta_step_hz)
    rows = theory_rows(g, params.gamma2_qubit, params.gamma2_phonon, deltas)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "theory.csv"
    _write_csv(csv_path, THEORY_HEADER, rows)
    run = RunConfig(
        device=str(args.config),
        experiment="theory",
        parameters={
            "delta_min_hz": args.delta_min_hz,
            "delta_max_hz": args.delta_max_hz,
            "delta_step_hz": args.delta_step_hz,
            "g_hz": args.g_hz,
        },
        output_dir=str(out_dir),
    )
    _write_manifest(
        out_dir / "theory_manifest.json", "theory", params, run, [csv_path],
        time.monotonic() - t0,
    )
    print(f"wrote {csv_path} ({len(rows)} rows)")
    return 0


# ---------------------------------------------------------------------------
# experiment runner


def _run_experiment(params: DeviceParams, run: RunConfig):
    p = run.parameters
    delta = TWO_PI * p.get("delta_hz", DEFAULT_OPERATING_DELTA_HZ)
    if run.experiment == "spectroscopy":
        if "probe_amplitude_hz" not in p:
            raise ContractViolationError(
                "spectroscopy requires parameters.probe_amplitude_hz"
            )
        detunings = p.get("detunings_hz")
        pump = bool(p.get("pump", False))

        def scan(pump_flag):
            return sequences.run_spectroscopy(
                params,
                delta,
                probe_amplitude=TWO_PI * p["probe_amplitude_hz"],
                detunings=TWO_PI * np.asarray(detunings, dtype=float)
                if detunings is not None
                else None,
                probe_duration=p.get("probe_duration_s", 250e-6),
                pump=pump_flag,
            )

        if detunings is None and not pump:
            return [scan(False)]
        return [scan(pump)]
    if run.experiment == "ramsey_anharmonicity":
        return [
            sequences.run_ramsey_anharmonicity(
                params,
                delta,
                omega_ad=TWO_PI * p.get("omega_ad_hz", 100e3),
                t_max=p.get("t_max_s", 50e-6),
                n_points=int(p.get("n_points", 161)),
            )
        ]
    if run.experiment == "rpn":
        return [
            sequences.run_rpn(
                params,
                t_max=p.get("t_max_s", 3e-6),
                n_points=int(p.get("n_points", 61)),
            )
        ]
    if run.experiment == "mech_rabi":
        drive = TWO_PI * p.get("drive_amplitude_hz", 10.6e3)
        return [
            sequences.run_mech_rabi(
                params,
                delta,
                drive_amplitude=drive,
                t_max=p.get("t_max_s"),
                n_points=int(p.get("n_points", 65)),
            )
        ]
    if run.experiment == "phonon_t1":
        return [
            sequences.run_phonon_t1(
                params,
                delta,
                delta_park=TWO_PI * p.get("delta_park_hz", -4e6),
                t_max=p.get("t_max_s", 320e-6),
                n_points=int(p.get("n_points", 49)),
            )
        ]
    if run.experiment == "phonon_t2":
        return [
            sequences.run_phonon_t2_ramsey(
                params,
                delta,
                delta_park=TWO_PI * p.get("delta_park_hz", -4e6),
                f_ad=p.get("f_ad_hz", 10e3),
                t_max=p.get("t_max_s", 400e-6),
                n_points=int(p.get("n_points", 81)),
            )
        ]
    if run.experiment == "cardinal_states":
        drive = TWO_PI * p.get("drive_amplitude_hz", 10.6e3)
        labels = p.get("labels", ["zero", "one", "plus", "minus", "plus_i", "minus_i"])
        rows = []
        with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
            preps = list(
                pool.map(
                    lambda lbl: sequences.prepare_cardinal_state(
                        params, delta, lbl, drive_amplitude=drive
                    ),
                    labels,
                )
            )
        for prep in preps:
            overlap = float(
                np.real(prep.target.conj() @ prep.rho_bare @ prep.target)
            )
            rows.append(
                (
                    prep.label,
                    overlap,
                    float(np.real(prep.rho_bare[0, 0])),
                    float(np.real(prep.rho_bare[1, 1])),
                    float(np.abs(prep.rho_bare[0, 1])),
                    float(np.angle(prep.rho_bare[1, 0])),
                )
            )
        return rows
    raise ContractViolationError(f"experiment {run.experiment!r} has no runner")


def cmd_run(args) -> int:
    t0 = time.monotonic()
    if args.run_config:
        run = RunConfig.from_json_file(args.run_config)
        if args.out:
            run.output_dir = args.out
    else:
        parameters = {}
        if args.delta_hz is not None:
            parameters["delta_hz"] = args.delta_hz
        if args.drive_hz is not None:
            parameters["drive_amplitude_hz"] = args.drive_hz
        if args.probe_amplitude_hz is not None:
            parameters["probe_amplitude_hz"] = args.probe_amplitude_hz
        if args.t_max_us is not None:
            parameters["t_max_s"] = args.t_max_us * 1e-6
        if args.omega_ad_hz is not None:
            parameters["omega_ad_hz"] = args.omega_ad_hz
        if args.delta_park_hz is not None:
            parameters["delta_park_hz"] = args.delta_park_hz
        if args.pump:
            parameters["pump"] = True
        run = RunConfig(
            device=args.config,
            experiment=args.experiment,
            parameters=parameters,
            output_dir=args.out or "results",
            seed=args.seed,
            shots="exact" if args.shots in (None, "exact") else int(args.shots),
        )
    params = DeviceParams.from_json_file(run.device)
    if run.experiment == "theory":
        raise ContractViolationError("use the dedicated `mechq theory` command")

    out_dir = Path(run.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    result = _run_experiment(params, run)
    if run.experiment == "cardinal_states":
        csv_path = out_dir / "cardinal_states.csv"
        _write_csv(
            csv_path,
            ["label", "target_overlap", "p0_bare", "p1_bare",
             "coherence_abs", "coherence_arg"],
            result,
        )
        outputs.append(csv_path)
    else:
        for record in result:
            if run.shots != "exact":
                record = sequences.sample_shots(record, run.shots, run.seed)
            csv_path = out_dir / f"{record.name}.csv"
            _record_to_csv(csv_path, record)
            outputs.append(csv_path)
    manifest_extra = {}
    if run.experiment == "ramsey_anharmonicity" and result:
        manifest_extra["record_metadata"] = result[0].metadata
    _write_manifest(
        out_dir / f"{run.experiment}_manifest.json",
        "run",
        params,
        run,
        outputs,
        time.monotonic() - t0,
        extra=manifest_extra,
    )
    for path in outputs:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# fits


def cmd_fit(args) -> int:
    header, data = _load_record_csv(args.data)
    axis = data[:, 0]
    signal = data[:, 1]
    manifest = _sidecar_manifest(args.data)
    stem = Path(args.data).stem
    experiment = args.experiment or stem

    if experiment == "phonon_t1":
        t_min = (args.t_min_us or 40.0) * 1e-6
        mask = axis >= t_min
        fit = estimation.fit_exponential(axis[mask], signal[mask])
        payload = {
            "t1_s": fit.time_constant,
            "amplitude": fit.amplitude,
            "offset": fit.offset,
            "rss": fit.rss,
            "fit_window_start_s": t_min,
        }
    elif experiment == "phonon_t2":
        fit = estimation.fit_damped_cosine(axis, signal, with_offset=True)
        payload = {
            "t2_s": 1.0 / fit.kappa,
            "fringe_hz": fit.omega / TWO_PI,
            "amplitude": fit.amplitude,
            "rss": fit.rss,
        }
    elif experiment == "mech_rabi":
        fit = estimation.fit_damped_cosine(axis, signal)
        payload = {
            "rabi_hz": fit.omega / TWO_PI,
            "decay_per_s": fit.kappa,
            "amplitude": fit.amplitude,
            "rss": fit.rss,
        }
    elif experiment == "spectroscopy":
        fit = estimation.fit_lorentzian(axis, signal)
        payload = {
            "center_hz": fit.center,
            "width_hz": fit.width,
            "amplitude": fit.amplitude,
            "offset": fit.offset,
            "rss": fit.rss,
        }
    elif experiment == "ramsey_anharmonicity":
        if manifest is None or "record_metadata" not in manifest:
            raise ContractViolationError(
                "ramsey fit needs the record manifest for gamma1 and omega_ad"
            )
        meta = manifest["record_metadata"]
        fit = estimation.fit_ramsey_anharmonicity(
            axis, signal,
            gamma1=meta["gamma1_eff"],
            omega_ad=TWO_PI * meta["omega_ad_hz"],
        )
        payload = {
            "alpha_hz": fit.alpha / TWO_PI,
            "gamma_phi_per_s": fit.gamma_phi,
            "rss": fit.rss,
        }
    elif experiment == "rpn":
        if manifest is None or not manifest.get("config"):
            raise ContractViolationError("rpn fit needs the manifest's device config")
        params = DeviceParams.from_dict(manifest["config"])
        dist = estimation.rpn_fit(axis, signal, params)
        payload = {
            "probabilities": dist.probabilities.tolist(),
            "condition_number": dist.condition_number,
            "residual_norm": dist.residual_norm,
        }
    else:
        raise ContractViolationError(f"no fit registered for {experiment!r}")

    text = json.dumps({"experiment": experiment, "data": str(args.data),
                       "fit": payload}, indent=2, sort_keys=True)
    print(text)
    if args.out:
        out_path = Path(args.out)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text + "\n")
    return 0


# ---------------------------------------------------------------------------
# Wigner maps


def cmd_wigner(args) -> int:
    t0 = time.monotonic()
    params = DeviceParams.from_json_file(args.config)
    delta = TWO_PI * (args.delta_hz if args.delta_hz is not None
                      else DEFAULT_OPERATING_DELTA_HZ)
    prep = sequences.prepare_cardinal_state(params, delta, args.label)
    n_points = args.n_points
    xs = np.linspace(-args.extent, args.extent, n_points)
    grid_x, grid_y = np.meshgrid(xs, xs)
    betas = (grid_x + 1j * grid_y).ravel()
    chunks = np.array_split(np.arange(betas.size), _max_workers())
    values = np.empty(betas.size)
    rho = prep.rho_bare

    def fill(idx):
        if idx.size:
            values[idx] = estimation.wigner_values(rho, betas[idx])

    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        list(pool.map(fill, chunks))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"wigner_{args.label}.csv"
    rows = zip(grid_x.ravel(), grid_y.ravel(), values)
    _write_csv(csv_path, ["re_beta", "im_beta", "w"], rows)
    run = RunConfig(
        device=str(args.config),
        experiment="cardinal_states",
        parameters={"label": args.label, "extent": args.extent,
                    "n_points": n_points,
                    "delta_hz": delta / TWO_PI},
        output_dir=str(out_dir),
    )
    _write_manifest(
        out_dir / f"wigner_{args.label}_manifest.json", "wigner", params, run,
        [csv_path], time.monotonic() - t0,
    )
    print(f"wrote {csv_path}; min W = {values.min():.6f}, max W = {values.max():.6f}")
    return 0


# ---------------------------------------------------------------------------
# replay


def cmd_replay(args) -> int:
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    command = manifest.get("command")
    out_dir = args.out or manifest.get("parameters", {}).get("output_dir") \
        or str(Path(args.manifest).parent)
    if command == "run":
        run = RunConfig(
            device="<manifest>",
            experiment=manifest["experiment"],
            parameters=manifest.get("parameters", {}),
            output_dir=out_dir,
            seed=manifest.get("seed", 1234),
            shots=manifest.get("shots", "exact"),
        )
        params = DeviceParams.from_dict(manifest["config"])
        t0 = time.monotonic()
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        outputs = []
        result = _run_experiment(params, run)
        if run.experiment == "cardinal_states":
            csv_path = out_path / "cardinal_states.csv"
            _write_csv(
                csv_path,
                ["label", "target_overlap", "p0_bare", "p1_bare",
                 "coherence_abs", "coherence_arg"],
                result,
            )
            outputs.append(csv_path)
        else:
            for record in result:
                if run.shots != "exact":
                    record = sequences.sample_shots(record, run.shots, run.seed)
                csv_path = out_path / f"{record.name}.csv"
                _record_to_csv(csv_path, record)
                outputs.append(csv_path)
        _write_manifest(
            out_path / f"{run.experiment}_manifest.json", "run", params, run,
            outputs, time.monotonic() - t0,
            extra={"record_metadata": result[0].metadata}
            if run.experiment == "ramsey_anharmonicity" else None,
        )
        for path in outputs:
            print(f"replayed {path}")
        return 0
    raise ContractViolationError(f"manifest command {command!r} cannot be replayed")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mechq",
        description="simulate and estimate a dispersively hybridized mechanical qubit",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_theory = sub.add_parser("theory", help="closed-form detuning table")
    p_theory.add_argument("--config", required=True)
    p_theory.add_argument("--out", default="results", help="output directory")
    p_theory.add_argument("--delta-min-hz", type=float, default=-4e6)
    p_theory.add_argument("--delta-max-hz", type=float, default=-0.5e6)
    p_theory.add_argument("--delta-step-hz", type=float, default=1e4)
    p_theory.add_argument("--g-hz", type=float, default=None,
                          help="override the coupling (0 allowed)")
    p_theory.set_defaults(func=cmd_theory)

    p_run = sub.add_parser("run", help="run a registered experiment")
    p_run.add_argument("--config")
    p_run.add_argument("--experiment", choices=EXPERIMENTS)
    p_run.add_argument("--run-config", help="JSON RunConfig (overrides flags)")
    p_run.add_argument("--out", help="output directory")
    p_run.add_argument("--seed", type=int, default=1234)
    p_run.add_argument("--shots", default=None,
                       help="integer shot count or 'exact'")
    p_run.add_argument("--delta-hz", type=float, default=None)
    p_run.add_argument("--drive-hz", type=float, default=None)
    p_run.add_argument("--probe-amplitude-hz", type=float, default=None)
    p_run.add_argument("--t-max-us", type=float, default=None)
    p_run.add_argument("--omega-ad-hz", type=float, default=None)
    p_run.add_argument("--delta-park-hz", type=float, default=None)
    p_run.add_argument("--pump", action="store_true")
    p_run.set_defaults(func=cmd_run)

    p_fit = sub.add_parser("fit", help="fit a recorded CSV")
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--experiment", default=None,
                       help="defaults to the CSV stem")
    p_fit.add_argument("--out", default=None)
    p_fit.add_argument("--t-min-us", type=float, default=None)
    p_fit.set_defaults(func=cmd_fit)

    p_wigner = sub.add_parser("wigner", help="Wigner map of a prepared state")
    p_wigner.add_argument("--config", required=True)
    p_wigner.add_argument("--label", default="one",
                          choices=["zero", "one", "plus", "minus",
                                   "plus_i", "minus_i"])
    p_wigner.add_argument("--out", default="results", help="output directory")
    p_wigner.add_argument("--extent", type=float, default=2.5)
    p_wigner.add_argument("--n-points", type=int, default=41)
    p_wigner.add_argument("--delta-hz", type=float, default=None)
    p_wigner.set_defaults(func=cmd_wigner)

    p_replay = sub.add_parser("replay", help="rerun a manifest")
    p_replay.add_argument("manifest")
    p_replay.add_argument("--out", default=None)
    p_replay.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run" and not args.run_config:
        if not args.config or not args.experiment:
            parser.error("run needs --config and --experiment (or --run-config)")
    try:
        return args.func(args)
    except ContractViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
