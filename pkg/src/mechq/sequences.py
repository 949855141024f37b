"""Pulse sequences and experiment executors.

Two validated state spaces drive everything here:

* the full composite 2 x N space for gate-based interferometry (qubit
  pulses are instantaneous unitaries, the swap family runs the resonant
  Jaynes-Cummings window under the bare collapse channels), and
* the N-level effective ladder of the phonon-like branch for dispersive
  segments (waits, mediated phonon drives, Stark parks), whose
  Hamiltonian is the residual Kerr ladder plus a drive with the exact
  dressed matrix-element ratios, and whose collapse rates are the
  weight-blended qubit/phonon rates.

Stark segments switch the dispersive parameters suddenly while the
adiabatic level labels carry the state across (the control frame tracks
the 0-1 transition of whichever park is active).  Drive amplitudes on
the ladder are the achieved 0-1 Rabi rates; the charge-line amplitude
behind them is larger by 1/epsilon (see
``dynamics.effective_phonon_drive``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import device
from .hilbert import ContractViolationError, QuantumState
from .device import (
    DeviceParams,
    OutsideDispersiveRegimeError,
    effective_mech_rates,
    kerr_ladder_frequencies,
    ladder_ratios,
    mech_branch_energy,
    phonon_weight,
    qubit_weight,
)
from .dynamics import LindbladModel, evolve, liouvillian

TWO_PI = 2.0 * math.pi
BOUNDARY_TRACE_TOL = 1e-8
DEFAULT_N_POINTS = 101


# ---------------------------------------------------------------------------
# sequence description


@dataclass(frozen=True)
class SequenceSegment:
    """One step of a pulse sequence.

    kind is one of: qubit_pulse, iswap, sqrt_iswap, wait, phonon_drive,
    stark_shift, reset.  Unused fields are ignored by the other kinds.
    """

    kind: str
    duration: float = 0.0
    angle: float = math.pi
    phase: float = 0.0
    amplitude: float = 0.0
    detuning: float = 0.0
    delta_target: float = 0.0
    fock_sector: int = 1

    def __post_init__(self) -> None:
        if self.kind not in (
            "qubit_pulse",
            "iswap",
            "sqrt_iswap",
            "wait",
            "phonon_drive",
            "stark_shift",
            "reset",
        ):
            raise ContractViolationError(f"unknown segment kind {self.kind!r}")
        if self.fock_sector < 1:
            raise ContractViolationError("fock_sector must be >= 1")
        if self.amplitude < 0:
            raise ContractViolationError("segment amplitude must be >= 0")


def qubit_pulse(angle: float = math.pi, phase: float = 0.0) -> SequenceSegment:
    return SequenceSegment("qubit_pulse", angle=angle, phase=phase)


def iswap(fock_sector: int = 1) -> SequenceSegment:
    """Full population swap on the chosen n-excitation sector."""
    return SequenceSegment("iswap", fock_sector=fock_sector)


def sqrt_iswap(fock_sector: int = 1) -> SequenceSegment:
    return SequenceSegment("sqrt_iswap", fock_sector=fock_sector)


def wait(duration: float) -> SequenceSegment:
    return SequenceSegment("wait", duration=duration)


def phonon_drive(
    amplitude: float, duration: float, phase: float = 0.0, detuning: float = 0.0
) -> SequenceSegment:
    """Mediated drive of the mech ladder; amplitude is the achieved 0-1 rate."""
    return SequenceSegment(
        "phonon_drive",
        amplitude=amplitude,
        duration=duration,
        phase=phase,
        detuning=detuning,
    )


def stark_shift(delta_target: float) -> SequenceSegment:
    return SequenceSegment("stark_shift", delta_target=delta_target)


def reset() -> SequenceSegment:
    return SequenceSegment("reset")


@dataclass(frozen=True)
class PulseSequence:
    name: str
    segments: tuple[SequenceSegment, ...]

    def __iter__(self):
        return iter(self.segments)


def iswap_duration(params: DeviceParams, fock_sector: int = 1) -> float:
    """pi / (2 g sqrt(n)); the calibrated full-swap window of sector n."""
    return math.pi / (2.0 * params.g * math.sqrt(fock_sector))


# ---------------------------------------------------------------------------
# records


@dataclass
class MeasurementRecord:
    """One measured trace: axis values, excited-state probability, extras."""

    name: str
    times: np.ndarray
    p_excited: np.ndarray
    axis: str = "t_s"
    extras: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.p_excited = np.asarray(self.p_excited, dtype=float)
        if self.times.shape != self.p_excited.shape:
            raise ContractViolationError("record axis/probability shape mismatch")


@dataclass
class ExperimentResult:
    experiment: str
    records: list
    metadata: dict = field(default_factory=dict)


def sample_shots(
    record: MeasurementRecord, shots: int, seed: int = 1234
) -> MeasurementRecord:
    """Binomial projection noise on a record (extras are passed through)."""
    if shots < 1:
        raise ContractViolationError("shots must be a positive integer")
    rng = np.random.default_rng(seed)
    p = np.clip(record.p_excited, 0.0, 1.0)
    noisy = rng.binomial(shots, p) / shots
    return MeasurementRecord(
        name=record.name,
        times=record.times.copy(),
        p_excited=noisy,
        axis=record.axis,
        extras=dict(record.extras),
        metadata={**record.metadata, "shots": shots, "seed": seed},
    )


def apply_readout_contrast(
    record: MeasurementRecord, floor: float, scale: float
) -> MeasurementRecord:
    """Affine readout model p -> floor + scale * p."""
    return MeasurementRecord(
        name=record.name,
        times=record.times.copy(),
        p_excited=floor + scale * record.p_excited,
        axis=record.axis,
        extras=dict(record.extras),
        metadata={**record.metadata, "readout_floor": floor, "readout_scale": scale},
    )


# ---------------------------------------------------------------------------
# effective ladder model (dispersive segments)


class MechLadderModel:
    """Effective N-level model of the phonon-like branch at one detuning."""

    def __init__(
        self,
        params: DeviceParams,
        delta: float,
        dim_fock: int = 10,
        lossless: bool = False,
    ):
        if delta == 0:
            raise OutsideDispersiveRegimeError("ladder model needs nonzero detuning")
        self.params = params
        self.delta = delta
        self.dim = dim_fock
        self.lossless = lossless
        self.lowering = np.diag(
            np.sqrt(np.arange(1.0, dim_fock)), k=1
        ).astype(complex)
        self.n_op = np.diag(np.arange(dim_fock, dtype=float)).astype(complex)
        self.kerr = np.diag(
            kerr_ladder_frequencies(params.g, delta, dim_fock)
        ).astype(complex)
        s = ladder_ratios(params.g, delta, dim_fock)
        raising = np.zeros((dim_fock, dim_fock), dtype=complex)
        for n in range(dim_fock - 1):
            raising[n + 1, n] = s[n]
        self.raising = raising
        self.gamma1_eff, self.gamma_phi_eff = effective_mech_rates(params, delta)
        self.p_phonon = np.array(
            [phonon_weight(params.g, delta, n) for n in range(dim_fock)]
        )
        self.p_qubit = 1.0 - self.p_phonon

    def collapse_ops(self) -> list:
        if self.lossless:
            return []
        return [
            (self.lowering, self.gamma1_eff),
            (self.n_op, 2.0 * self.gamma_phi_eff),
        ]

    def hamiltonian(
        self, amplitude: float = 0.0, phase: float = 0.0, probe_detuning: float = 0.0
    ) -> np.ndarray:
        h = self.kerr.copy()
        if probe_detuning:
            h = h - probe_detuning * self.n_op
        if amplitude:
            h = h + 0.5 * amplitude * (
                self.raising * np.exp(1j * phase)
                + self.raising.conj().T * np.exp(-1j * phase)
            )
        return h

    def model(self, amplitude=0.0, phase=0.0, probe_detuning=0.0) -> LindbladModel:
        return LindbladModel(
            hamiltonian=self.hamiltonian(amplitude, phase, probe_detuning),
            collapse_ops=self.collapse_ops(),
        )

    def evolve(
        self, rho0, times, amplitude=0.0, phase=0.0, probe_detuning=0.0
    ) -> np.ndarray:
        return evolve(self.model(amplitude, phase, probe_detuning), rho0, times)

    def vacuum(self) -> np.ndarray:
        rho = np.zeros((self.dim, self.dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho

    def to_bare(self, rho: np.ndarray) -> np.ndarray:
        """Bare-phonon marginal of a dressed ladder state.

        Each dressed level |n'> splits into its phonon component (weight
        p_p,n, phonon number n) and its qubit component (weight p_q,n,
        phonon number n - 1); coherences carry the geometric means.
        """
        cp = np.sqrt(self.p_phonon)
        cq = np.sqrt(self.p_qubit)
        out = rho * np.outer(cp, cp)
        out[: self.dim - 1, : self.dim - 1] += rho[1:, 1:] * np.outer(cq[1:], cq[1:])
        return out

    def residual_qubit_population(self, rho: np.ndarray) -> float:
        """Qubit-character weight of a dressed state, sum_n p_q,n P(n)."""
        return float(np.real(np.sum(self.p_qubit * np.diag(rho))))


def pi_time(amplitude: float) -> float:
    if amplitude <= 0:
        raise ContractViolationError("pi time needs a positive amplitude")
    return math.pi / amplitude


# ---------------------------------------------------------------------------
# full-space engine (gates + label-space dispersive evolution)


class SequenceEngine:
    """Executes segments on the composite 2 x N space.

    Gates act in the bare basis; dispersive segments act on the
    adiabatic label space (branch energies on the diagonal, effective
    collapse rates), which coincides with the bare basis up to the
    hybridization corrections already folded into those energies and
    rates.  The trace is checked at every segment boundary.
    """

    def __init__(
        self,
        params: DeviceParams,
        delta: float,
        dim_fock: int = 6,
        lossless: bool = False,
    ):
        self.params = params
        self.delta = delta
        self.nf = dim_fock
        self.dim = 2 * dim_fock
        self.lossless = lossless

        nf = dim_fock
        pf = np.diag(np.sqrt(np.arange(1.0, nf)), k=1).astype(complex)
        i2 = np.eye(2, dtype=complex)
        self._pf = pf
        self._if = np.eye(nf, dtype=complex)
        self.P = np.kron(i2, pf)
        self.NOP = self.P.conj().T @ self.P
        sm = np.zeros((2, 2), dtype=complex)
        sm[0, 1] = 1.0
        self.SM = np.kron(sm, self._if)
        self.SZ = np.kron(np.diag([-1.0 + 0j, 1.0]), self._if)
        self.H_res = params.g * (
            np.kron(sm, pf.conj().T) + np.kron(sm.conj().T, pf)
        )
        self.P_excited = np.kron(np.diag([0.0, 1.0]), self._if).real

        self.rho = np.zeros((self.dim, self.dim), dtype=complex)
        self.rho[0, 0] = 1.0
        self._prop_cache: dict = {}

    # -- collapse sets

    def bare_collapse(self) -> list:
        if self.lossless:
            return []
        p = self.params
        return [
            (self.P, p.gamma1_phonon),
            (self.NOP, 2.0 * (p.gamma2_phonon - 0.5 * p.gamma1_phonon)),
            (self.SM, p.gamma1_qubit),
            (self.SZ, 0.5 * (p.gamma2_qubit - 0.5 * p.gamma1_qubit)),
        ]

    def dispersive_collapse(self, delta: float) -> list:
        if self.lossless:
            return []
        p = self.params
        gamma1_eff, gamma_phi_eff = effective_mech_rates(p, delta)
        return [
            (self.P, gamma1_eff),
            (self.NOP, 2.0 * gamma_phi_eff),
            (self.SM, p.gamma1_qubit),
            (self.SZ, 0.5 * (p.gamma2_qubit - 0.5 * p.gamma1_qubit)),
        ]

    # -- generators

    def dispersive_hamiltonian(
        self, delta: float, amplitude: float = 0.0, phase: float = 0.0,
        probe_detuning: float = 0.0,
    ) -> np.ndarray:
        """Label-space diagonal plus an optional mech-ladder drive.

        Ground-branch levels sit at the Kerr-ladder offsets mu_n; the
        excited branch at nu_n = E_other(n+1) - E(0) - n d01 (one more
        excitation, other branch of the avoided crossing).
        """
        g = self.params.g
        nf = self.nf
        e0 = mech_branch_energy(g, delta, 0)
        d01 = mech_branch_energy(g, delta, 1) - e0
        mu = np.empty(nf)
        nu = np.empty(nf)
        sgn = 1.0 if delta > 0 else -1.0
        for n in range(nf):
            mu[n] = mech_branch_energy(g, delta, n) - e0 - n * d01
            other = sgn * 0.5 * math.sqrt(delta**2 + 4.0 * g**2 * (n + 1))
            nu[n] = other - e0 - n * d01
        h = np.diag(np.concatenate([mu, nu])).astype(complex)
        if probe_detuning:
            h = h - probe_detuning * self.NOP
        if amplitude:
            s = ladder_ratios(g, delta, nf)
            raising = np.zeros((nf, nf), dtype=complex)
            for n in range(nf - 1):
                raising[n + 1, n] = s[n]
            block = 0.5 * amplitude * (
                raising * np.exp(1j * phase) + raising.conj().T * np.exp(-1j * phase)
            )
            h = h + np.kron(np.diag([1.0 + 0j, 0.0]), block)
        return h

    # -- propagation helpers

    def _propagator(self, key, generator_builder, duration: float) -> np.ndarray:
        cache_key = (key, duration)
        prop = self._prop_cache.get(cache_key)
        if prop is None:
            prop = expm(generator_builder() * duration)
            self._prop_cache[cache_key] = prop
        return prop

    def apply_unitary(self, u: np.ndarray) -> None:
        self.rho = u @ self.rho @ u.conj().T

    def qubit_unitary(self, angle: float, phase: float) -> np.ndarray:
        sx = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        sy = np.array([[0.0, -1j], [1j, 0.0]], dtype=complex)
        axis = math.cos(phase) * sx + math.sin(phase) * sy
        half = 0.5 * angle
        u2 = math.cos(half) * np.eye(2, dtype=complex) - 1j * math.sin(half) * axis
        return np.kron(u2, self._if)

    def resonant_propagator(self, duration: float) -> np.ndarray:
        return self._propagator(
            "resonant",
            lambda: liouvillian(self.H_res, self.bare_collapse()),
            duration,
        )

    def dispersive_propagator(
        self, duration: float, amplitude=0.0, phase=0.0, probe_detuning=0.0
    ) -> np.ndarray:
        key = ("dispersive", self.delta, amplitude, phase, probe_detuning)
        return self._propagator(
            key,
            lambda: liouvillian(
                self.dispersive_hamiltonian(
                    self.delta, amplitude, phase, probe_detuning
                ),
                self.dispersive_collapse(self.delta),
            ),
            duration,
        )

    def apply_propagator(self, prop: np.ndarray) -> None:
        self.rho = (prop @ self.rho.reshape(-1)).reshape(self.dim, self.dim)

    # -- segment dispatch

    def apply(self, segment: SequenceSegment) -> None:
        if segment.kind == "qubit_pulse":
            self.apply_unitary(self.qubit_unitary(segment.angle, segment.phase))
        elif segment.kind in ("iswap", "sqrt_iswap"):
            duration = iswap_duration(self.params, segment.fock_sector)
            if segment.kind == "sqrt_iswap":
                duration *= 0.5
            self.apply_propagator(self.resonant_propagator(duration))
        elif segment.kind == "wait":
            if segment.duration > 0:
                self.apply_propagator(self.dispersive_propagator(segment.duration))
        elif segment.kind == "phonon_drive":
            prop = self.dispersive_propagator(
                segment.duration, segment.amplitude, segment.phase, segment.detuning
            )
            self.apply_propagator(prop)
        elif segment.kind == "stark_shift":
            self.delta = segment.delta_target
        elif segment.kind == "reset":
            nf = self.nf
            block = self.rho[:nf, :nf].copy()
            weight = float(np.real(np.trace(block)))
            if weight < 1e-12:
                raise ContractViolationError(
                    "reset cannot post-select: no ground-state population"
                )
            self.rho = np.zeros_like(self.rho)
            self.rho[:nf, :nf] = block / weight
        else:  # pragma: no cover - guarded in SequenceSegment
            raise ContractViolationError(f"unknown segment kind {segment.kind!r}")
        self._check_boundary()

    def _check_boundary(self) -> None:
        err = abs(float(np.real(np.trace(self.rho))) - 1.0)
        if err > BOUNDARY_TRACE_TOL:
            raise ContractViolationError(
                f"total population drifted by {err:.3e} at a segment boundary"
            )

    def p_excited(self) -> float:
        return float(np.real(np.trace(self.P_excited @ self.rho)))

    def run(self, sequence: PulseSequence) -> QuantumState:
        for segment in sequence:
            self.apply(segment)
        return QuantumState("density", self.rho.copy())


def run_sequence(
    params: DeviceParams,
    sequence: PulseSequence,
    delta: float,
    dim_fock: int = 6,
    lossless: bool = False,
) -> QuantumState:
    """Execute a sequence from |g,0> and return the final composite state."""
    engine = SequenceEngine(params, delta, dim_fock=dim_fock, lossless=lossless)
    return engine.run(sequence)


# ---------------------------------------------------------------------------
# experiment: anharmonicity Ramsey interferometer


def ramsey_generation_sequence() -> PulseSequence:
    """pi -> sqrt(iswap) -> pi -> sector-2 iswap maps |g,0> to (|g,0>+|g,2>)/sqrt2."""
    return PulseSequence(
        "ramsey_generation",
        (
            qubit_pulse(),
            sqrt_iswap(),
            qubit_pulse(),
            iswap(fock_sector=2),
        ),
    )


def run_ramsey_anharmonicity(
    params: DeviceParams,
    delta: float,
    omega_ad: float,
    t_max: float,
    n_points: int = DEFAULT_N_POINTS,
    lossless: bool = False,
    dim_fock: int = 6,
) -> MeasurementRecord:
    """Two-phonon Ramsey fringe of the 0-2 coherence.

    The interferometer generates (|g,0> + |g,2>)/sqrt2, lets it precess
    for a variable wait, and reverses the generation with the closing
    qubit pulse advanced by omega_ad * t, so the fringe appears at
    alpha + 2 omega_ad.  At t = 0 the lossless interferometer closes
    exactly.
    """
    if abs(delta) <= 2.0 * params.g:
        raise OutsideDispersiveRegimeError(
            "interferometer needs |delta| > 2g to park outside the avoided crossing"
        )
    engine = SequenceEngine(params, delta, dim_fock=dim_fock, lossless=lossless)
    engine.run(ramsey_generation_sequence())
    v_wait = engine.rho.copy()

    times = np.linspace(0.0, t_max, n_points)
    dt = times[1] - times[0] if n_points > 1 else 0.0
    u_wait = engine.dispersive_propagator(dt) if dt > 0 else None
    u_iswap2 = engine.resonant_propagator(iswap_duration(params, 2))
    u_sq = engine.resonant_propagator(0.5 * iswap_duration(params, 1))

    p_excited = np.empty(n_points)
    vec = v_wait.reshape(-1)
    dim = engine.dim
    for k, t in enumerate(times):
        if k:
            vec = u_wait @ vec
        u_pi = engine.qubit_unitary(math.pi, omega_ad * t)
        rho = (u_iswap2 @ vec).reshape(dim, dim)
        rho = u_pi @ rho @ u_pi.conj().T
        rho = (u_sq @ rho.reshape(-1)).reshape(dim, dim)
        p_excited[k] = float(np.real(np.trace(engine.P_excited @ rho)))
    return MeasurementRecord(
        name="ramsey_anharmonicity",
        times=times,
        p_excited=p_excited,
        metadata={
            "delta_hz": delta / TWO_PI,
            "omega_ad_hz": omega_ad / TWO_PI,
            "lossless": lossless,
            "gamma1_eff": effective_mech_rates(params, delta)[0],
        },
    )


# ---------------------------------------------------------------------------
# experiment: resonant phonon-number readout (RPN)


def run_rpn(
    params: DeviceParams,
    state_prep=None,
    t_max: float = 3e-6,
    n_points: int = 61,
    dim_fock: int = 8,
    prep_delta: float | None = None,
    lossless: bool = False,
) -> MeasurementRecord:
    """Excited-qubit population during a resonant exchange window.

    ``state_prep`` may be None (vacuum), a phonon ket/density matrix, or
    a PulseSequence of dispersive segments executed on the effective
    ladder before the readout.  The readout itself resets the qubit,
    excites it, and tunes it onto resonance: a Fock state |n> then
    oscillates at g sqrt(n+1), so the vacuum shows its first minimum at
    pi/(2g) and each added phonon speeds the exchange by sqrt(n+1).
    Mixtures produce the population-weighted average trace.
    """
    if state_prep is None:
        rho_ph = np.zeros((dim_fock, dim_fock), dtype=complex)
        rho_ph[0, 0] = 1.0
    elif isinstance(state_prep, PulseSequence):
        delta = prep_delta if prep_delta is not None else (
            TWO_PI * device.DEFAULT_OPERATING_DELTA_HZ
        )
        ladder = MechLadderModel(params, delta, dim_fock=dim_fock, lossless=lossless)
        rho = ladder.vacuum()
        for seg in state_prep:
            if seg.kind == "phonon_drive":
                rho = ladder.evolve(
                    rho,
                    np.linspace(0.0, seg.duration, 33),
                    amplitude=seg.amplitude,
                    phase=seg.phase,
                    probe_detuning=seg.detuning,
                )[-1]
            elif seg.kind == "wait":
                rho = ladder.evolve(rho, np.array([0.0, seg.duration]))[-1]
            elif seg.kind == "stark_shift":
                ladder = MechLadderModel(
                    params, seg.delta_target, dim_fock=dim_fock, lossless=lossless
                )
            else:
                raise ContractViolationError(
                    f"RPN state_prep supports dispersive segments only, got {seg.kind!r}"
                )
        rho_ph = ladder.to_bare(rho)
    else:
        if isinstance(state_prep, QuantumState):
            rho_ph = state_prep.to_density()
        else:
            arr = np.asarray(state_prep, dtype=complex)
            rho_ph = np.outer(arr, arr.conj()) if arr.ndim == 1 else arr.copy()
        if rho_ph.shape[0] > dim_fock:
            raise ContractViolationError("prepared state exceeds the Fock cutoff")
        padded = np.zeros((dim_fock, dim_fock), dtype=complex)
        padded[: rho_ph.shape[0], : rho_ph.shape[1]] = rho_ph
        rho_ph = padded

    engine = SequenceEngine(params, delta=-2.0 * TWO_PI * 1e6, dim_fock=dim_fock,
                            lossless=lossless)
    nf = dim_fock
    rho0 = np.zeros((2 * nf, 2 * nf), dtype=complex)
    rho0[nf:, nf:] = rho_ph  # qubit reset + pi: excited, phonon state intact
    times = np.linspace(0.0, t_max, n_points)
    model = LindbladModel(
        hamiltonian=engine.H_res, collapse_ops=engine.bare_collapse()
    )
    states = evolve(model, rho0, times)
    p_excited = np.array(
        [float(np.real(np.trace(engine.P_excited @ r))) for r in states]
    )
    return MeasurementRecord(
        name="rpn",
        times=times,
        p_excited=p_excited,
        metadata={"t_max_s": t_max, "dim_fock": dim_fock, "lossless": lossless},
    )


# ---------------------------------------------------------------------------
# experiment: mech Rabi and amplitude calibration


def run_mech_rabi(
    params: DeviceParams,
    delta: float,
    drive_amplitude: float,
    t_max: float | None = None,
    n_points: int = 65,
    phase: float = 0.0,
    dim_fock: int = 10,
) -> MeasurementRecord:
    """Driven Rabi oscillation of the mech ladder from vacuum.

    ``p_excited`` is the bare-phonon P(1); extras carry the bare P(2),
    the dressed populations, and the residual qubit character of the
    dressed state (the weight a qubit-projective readout would click on
    even with the phonon perfectly prepared).
    """
    if drive_amplitude <= 0:
        raise ContractViolationError("mech Rabi needs a positive drive amplitude")
    ladder = MechLadderModel(params, delta, dim_fock=dim_fock)
    if t_max is None:
        t_max = pi_time(drive_amplitude)
    times = np.linspace(0.0, t_max, n_points)
    states = ladder.evolve(ladder.vacuum(), times, amplitude=drive_amplitude,
                           phase=phase)
    p1 = np.empty(n_points)
    p2 = np.empty(n_points)
    p1_dressed = np.empty(n_points)
    p2_dressed = np.empty(n_points)
    resid = np.empty(n_points)
    for k, rho in enumerate(states):
        bare = ladder.to_bare(rho)
        p1[k] = float(np.real(bare[1, 1]))
        p2[k] = float(np.real(bare[2, 2]))
        p1_dressed[k] = float(np.real(rho[1, 1]))
        p2_dressed[k] = float(np.real(rho[2, 2]))
        resid[k] = ladder.residual_qubit_population(rho)
    return MeasurementRecord(
        name="mech_rabi",
        times=times,
        p_excited=p1,
        extras={
            "p2_bare": p2,
            "p1_dressed": p1_dressed,
            "p2_dressed": p2_dressed,
            "residual_qubit": resid,
        },
        metadata={
            "delta_hz": delta / TWO_PI,
            "drive_amplitude_hz": drive_amplitude / TWO_PI,
            "qubit_line_amplitude_hz": drive_amplitude
            / (params.g / abs(delta))
            / TWO_PI,
        },
    )


def rabi_amplitude_sweep(
    params: DeviceParams,
    delta: float,
    qubit_line_amplitudes,
    n_periods: float = 1.25,
    n_points: int = DEFAULT_N_POINTS,
) -> ExperimentResult:
    """Mech Rabi traces for a sweep of charge-line amplitudes.

    The achieved ladder drive is epsilon times the commanded qubit-line
    amplitude; fitting each trace and regressing against the command
    recovers epsilon as the slope.
    """
    epsilon = params.g / abs(delta)
    records = []
    for omega_q in qubit_line_amplitudes:
        omega = epsilon * omega_q
        t_max = n_periods * TWO_PI / omega
        rec = run_mech_rabi(
            params, delta, omega, t_max=t_max, n_points=n_points
        )
        rec.metadata["qubit_line_amplitude_hz"] = omega_q / TWO_PI
        records.append(rec)
    return ExperimentResult(
        experiment="rabi_amplitude_sweep",
        records=records,
        metadata={"delta_hz": delta / TWO_PI, "epsilon": epsilon},
    )


# ---------------------------------------------------------------------------
# experiment: phonon T1 / T2


def run_phonon_t1(
    params: DeviceParams,
    delta: float,
    delta_park: float,
    prep_amplitude: float = TWO_PI * 3e3,
    t_max: float = 320e-6,
    n_points: int = 49,
    dim_fock: int = 10,
) -> MeasurementRecord:
    """Energy decay of the n = 1 mech level at a far-detuned park.

    A gentle pi pulse at the operating point keeps the two-phonon
    leakage negligible (hard pulses feed level 1 from level 2 during the
    decay and bias the fit); the level is then parked and its population
    tracked.
    """
    op = MechLadderModel(params, delta, dim_fock=dim_fock)
    prep_times = np.linspace(0.0, pi_time(prep_amplitude), 49)
    rho1 = op.evolve(op.vacuum(), prep_times, amplitude=prep_amplitude)[-1]

    park = MechLadderModel(params, delta_park, dim_fock=dim_fock)
    times = np.linspace(0.0, t_max, n_points)
    states = park.evolve(rho1, times)
    p1 = np.array([float(np.real(r[1, 1])) for r in states])
    return MeasurementRecord(
        name="phonon_t1",
        times=times,
        p_excited=p1,
        metadata={
            "delta_hz": delta / TWO_PI,
            "delta_park_hz": delta_park / TWO_PI,
            "prep_amplitude_hz": prep_amplitude / TWO_PI,
            "prep_p2": float(np.real(rho1[2, 2])),
        },
    )


def run_phonon_t2_ramsey(
    params: DeviceParams,
    delta: float,
    delta_park: float,
    f_ad: float = 10e3,
    prep_amplitude: float = TWO_PI * 3e3,
    t_max: float = 400e-6,
    n_points: int = 81,
    dim_fock: int = 10,
) -> MeasurementRecord:
    """Ramsey decay of the 0-1 mech coherence at a far-detuned park.

    Half-pi prepare at the operating point, park for a variable wait,
    return and close with a half-pi whose phase advances at the
    artificial detuning f_ad; the fringe decays at T2 of the parked
    level.
    """
    op = MechLadderModel(params, delta, dim_fock=dim_fock)
    prep_amp_time = 0.5 * pi_time(prep_amplitude)
    rho_h = op.evolve(
        op.vacuum(), np.linspace(0.0, prep_amp_time, 41), amplitude=prep_amplitude
    )[-1]

    park = MechLadderModel(params, delta_park, dim_fock=dim_fock)
    times = np.linspace(0.0, t_max, n_points)
    dt = times[1] - times[0]
    u_park = expm(
        liouvillian(park.hamiltonian(), park.collapse_ops()) * dt
    )
    vec = rho_h.reshape(-1)
    p1 = np.empty(n_points)
    for k, t in enumerate(times):
        if k:
            vec = u_park @ vec
        phase = TWO_PI * f_ad * t
        u_close = expm(
            liouvillian(
                op.hamiltonian(amplitude=prep_amplitude, phase=phase),
                op.collapse_ops(),
            )
            * prep_amp_time
        )
        rho_out = (u_close @ vec).reshape(dim_fock, dim_fock)
        p1[k] = float(np.real(rho_out[1, 1]))
    return MeasurementRecord(
        name="phonon_t2_ramsey",
        times=times,
        p_excited=p1,
        metadata={
            "delta_hz": delta / TWO_PI,
            "delta_park_hz": delta_park / TWO_PI,
            "f_ad_hz": f_ad,
            "prep_amplitude_hz": prep_amplitude / TWO_PI,
        },
    )


# ---------------------------------------------------------------------------
# experiment: spectroscopy


def run_spectroscopy(
    params: DeviceParams,
    delta: float,
    probe_amplitude: float,
    detunings=None,
    probe_duration: float = 250e-6,
    pump: bool = False,
    pump_amplitude: float = TWO_PI * 3e3,
    dim_fock: int = 10,
) -> MeasurementRecord:
    """Quasi-steady excitation versus probe detuning from the 0-1 line.

    Without a pump the scan shows the single 0-1 peak at zero detuning.
    With ``pump=True`` a pi pulse first fills level 1 and the recorded
    observable becomes the population above it, so the 1-2 peak appears
    shifted by the inherited anharmonicity.  Zero probe amplitude leaves
    the vacuum untouched (flat record).
    """
    if probe_amplitude is None or probe_amplitude < 0:
        raise ContractViolationError("probe_amplitude is required and must be >= 0")
    if detunings is None:
        alpha = device.anharmonicity(params, delta)
        center = alpha if pump else 0.0
        detunings = center + TWO_PI * np.linspace(-6e3, 6e3, 25)
    detunings = np.asarray(detunings, dtype=float)

    ladder = MechLadderModel(params, delta, dim_fock=dim_fock)
    rho0 = ladder.vacuum()
    if pump:
        rho0 = ladder.evolve(
            rho0,
            np.linspace(0.0, pi_time(pump_amplitude), 49),
            amplitude=pump_amplitude,
        )[-1]

    signal = np.empty(len(detunings))
    times = np.array([0.0, probe_duration])
    for k, det in enumerate(detunings):
        rho = ladder.evolve(
            rho0, times, amplitude=probe_amplitude, probe_detuning=det
        )[-1]
        pops = np.real(np.diag(rho))
        signal[k] = float(np.sum(pops[2:]) if pump else 1.0 - pops[0])
    return MeasurementRecord(
        name="spectroscopy",
        times=detunings / TWO_PI,
        p_excited=signal,
        axis="detuning_hz",
        metadata={
            "delta_hz": delta / TWO_PI,
            "probe_amplitude_hz": probe_amplitude / TWO_PI,
            "probe_duration_s": probe_duration,
            "pump": pump,
        },
    )


# ---------------------------------------------------------------------------
# experiment: cardinal-state preparation


CARDINAL_TARGET_PHASES = {
    "plus": 0.0,
    "plus_i": 0.5 * math.pi,
    "minus": math.pi,
    "minus_i": -0.5 * math.pi,
}


@dataclass
class CardinalPrep:
    label: str
    rho_dressed: np.ndarray
    rho_bare: np.ndarray
    target: np.ndarray
    metadata: dict = field(default_factory=dict)


def prepare_cardinal_state(
    params: DeviceParams,
    delta: float,
    label: str,
    drive_amplitude: float = TWO_PI * 10.6e3,
    dim_fock: int = 10,
) -> CardinalPrep:
    """Prepare a cardinal state of the {|0>, |1>} mech manifold.

    ``zero`` is the idle vacuum, ``one`` a pi pulse, and the four
    equatorial states are half-pi pulses whose drive phase is the target
    phase plus pi/2 (the drive rotates the state onto the equator a
    quarter turn behind its own phase).
    """
    ladder = MechLadderModel(params, delta, dim_fock=dim_fock)
    if label == "zero":
        rho = ladder.vacuum()
        target = np.zeros(dim_fock, dtype=complex)
        target[0] = 1.0
    elif label == "one":
        times = np.linspace(0.0, pi_time(drive_amplitude), 49)
        rho = ladder.evolve(ladder.vacuum(), times, amplitude=drive_amplitude)[-1]
        target = np.zeros(dim_fock, dtype=complex)
        target[1] = 1.0
    elif label in CARDINAL_TARGET_PHASES:
        theta = CARDINAL_TARGET_PHASES[label]
        phase = theta + 0.5 * math.pi
        times = np.linspace(0.0, 0.5 * pi_time(drive_amplitude), 49)
        rho = ladder.evolve(
            ladder.vacuum(), times, amplitude=drive_amplitude, phase=phase
        )[-1]
        target = np.zeros(dim_fock, dtype=complex)
        target[0] = 1.0 / math.sqrt(2.0)
        target[1] = np.exp(1j * theta) / math.sqrt(2.0)
    else:
        raise ContractViolationError(
            f"unknown cardinal label {label!r}; use zero, one, plus, minus, "
            "plus_i, minus_i"
        )
    return CardinalPrep(
        label=label,
        rho_dressed=rho,
        rho_bare=ladder.to_bare(rho),
        target=target,
        metadata={
            "delta_hz": delta / TWO_PI,
            "drive_amplitude_hz": drive_amplitude / TWO_PI,
        },
    )
