"""Open-system dynamics: Lindblad models, drives, and propagation.

Models live in the phonon rotating frame; drive tones are pre-rotated
analytically (rotating-wave approximation, counter-rotating terms
dropped), so a ``DriveTerm.frequency`` is the tone's detuning from the
frame, not a lab frequency.

Density matrices are vectorized row-major; the Liouvillian acts as

    L = -i (H (x) I - I (x) H^T)
        + sum_k r_k [ c_k (x) conj(c_k) - 1/2 (c_k^dag c_k (x) I + I (x) (c_k^dag c_k)^T) ]

Propagation is exact matrix-exponential stepping whenever the generator
is constant on the requested grid, and fixed-step RK4 (default 1 ns)
with a step-halving convergence check when drives make it
time-dependent.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .hilbert import ComplexOperator, ContractViolationError, QuantumState, fock_ket


def _as_operator(op) -> np.ndarray:
    if isinstance(op, ComplexOperator):
        return op.matrix.astype(complex)
    return np.asarray(op, dtype=complex)

TRACE_TOL = 1e-8
POSITIVITY_FLOOR = -1e-9
DEFAULT_RK4_STEP = 1e-9
CONVERGENCE_TOL = 1e-6


class IntegrationFailureError(ContractViolationError):
    """Propagation failed its accuracy or trace contract."""


# ---------------------------------------------------------------------------
# drive terms


@dataclass(frozen=True)
class DriveTerm:
    """One charge-line tone in the rotating frame.

    ``amplitude`` is the on-resonance Rabi rate (rad/s), ``frequency``
    the detuning from the model frame, ``phase`` the tone phase at
    ``t_start``.  The envelope is a rectangle over the window or a
    Gaussian of width ``sigma`` centered in it (truncated at the window
    edges, which is why ``pulse_area`` carries erf corrections).
    """

    amplitude: float
    frequency: float
    duration: float
    phase: float = 0.0
    t_start: float = 0.0
    envelope: str = "rect"
    sigma: float | None = None
    target: str = "qubit-charge-line"

    def __post_init__(self) -> None:
        if self.amplitude < 0:
            raise ContractViolationError(
                f"drive amplitude must be >= 0, got {self.amplitude}"
            )
        if self.duration <= 0:
            raise ContractViolationError("drive duration must be positive")
        if self.target != "qubit-charge-line":
            raise ContractViolationError(
                f"unsupported drive target {self.target!r}"
            )
        if self.envelope == "gaussian":
            if self.sigma is None or self.sigma <= 0:
                raise ContractViolationError("gaussian envelope needs sigma > 0")
        elif self.envelope != "rect":
            raise ContractViolationError(
                f"envelope must be 'rect' or 'gaussian', got {self.envelope!r}"
            )

    def envelope_value(self, t: float) -> float:
        """Dimensionless envelope at absolute time t (0 outside the window)."""
        tau = t - self.t_start
        if tau < 0 or tau > self.duration:
            return 0.0
        if self.envelope == "rect":
            return 1.0
        center = 0.5 * self.duration
        return math.exp(-0.5 * ((tau - center) / self.sigma) ** 2)

    def pulse_area(self) -> float:
        """Analytic integral of amplitude * envelope over the window."""
        if self.envelope == "rect":
            return self.amplitude * self.duration
        half = 0.5 * self.duration
        return (
            self.amplitude
            * self.sigma
            * math.sqrt(2.0 * math.pi)
            * math.erf(half / (self.sigma * math.sqrt(2.0)))
        )


# ---------------------------------------------------------------------------
# model


@dataclass
class LindbladModel:
    """Static Hamiltonian, collapse channels, optional drive schedule.

    ``collapse_ops`` is a list of (operator, rate) pairs; the rate
    multiplies the whole dissipator, so a pure-dephasing channel with
    operator n and rate 2*gamma_phi decays an |n><m| coherence at
    gamma_phi (n - m)^2.
    """

    hamiltonian: np.ndarray
    collapse_ops: list[tuple[np.ndarray, float]] = field(default_factory=list)
    drives: tuple[DriveTerm, ...] = ()
    drive_coupling: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.hamiltonian = _as_operator(self.hamiltonian)
        d = self.hamiltonian.shape[0]
        if self.hamiltonian.shape != (d, d):
            raise ContractViolationError("hamiltonian must be square")
        defect = float(np.max(np.abs(self.hamiltonian - self.hamiltonian.conj().T)))
        if defect > 1e-12:
            raise ContractViolationError(
                f"hamiltonian must be Hermitian, defect {defect:.3e}"
            )
        clean = []
        for op, rate in self.collapse_ops:
            op = _as_operator(op)
            if op.shape != (d, d):
                raise ContractViolationError("collapse operator dimension mismatch")
            if rate < 0:
                raise ContractViolationError(f"collapse rate must be >= 0, got {rate}")
            clean.append((op, float(rate)))
        self.collapse_ops = clean
        if self.drives and self.drive_coupling is None:
            raise ContractViolationError("drives need a drive_coupling operator")
        if self.drive_coupling is not None:
            self.drive_coupling = _as_operator(self.drive_coupling)
            if self.drive_coupling.shape != (d, d):
                raise ContractViolationError("drive_coupling dimension mismatch")

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def liouvillian(hamiltonian: np.ndarray, collapse_ops) -> np.ndarray:
    """Row-major vectorized Lindblad generator."""
    h = np.asarray(hamiltonian, dtype=complex)
    d = h.shape[0]
    eye = np.eye(d, dtype=complex)
    gen = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for op, rate in collapse_ops:
        c = np.asarray(op, dtype=complex)
        cdc = c.conj().T @ c
        gen += rate * (
            np.kron(c, c.conj())
            - 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
        )
    return gen


def _hamiltonian_superops(h: np.ndarray):
    d = h.shape[0]
    eye = np.eye(d, dtype=complex)
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T))


def _drive_coefficient(term: DriveTerm, t: float) -> complex:
    """Coefficient of sigma_+ (raising part) at absolute time t."""
    env = term.envelope_value(t)
    if env == 0.0:
        return 0.0
    phase = term.frequency * (t - term.t_start) + term.phase
    return 0.5 * term.amplitude * env * complex(math.cos(phase), -math.sin(phase))


# ---------------------------------------------------------------------------
# propagation


def _as_density(state) -> np.ndarray:
    if isinstance(state, QuantumState):
        return state.to_density()
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return np.outer(state, state.conj())
    return state.copy()


def _check_trace(rho: np.ndarray, t: float) -> None:
    err = abs(complex(np.trace(rho)).real - 1.0) + abs(complex(np.trace(rho)).imag)
    if not np.isfinite(err) or err > TRACE_TOL:
        raise IntegrationFailureError(
            f"trace drifted by {err:.3e} at t = {t:.3e} s"
        )


def evolve(
    model: LindbladModel,
    initial_state,
    times,
    step: float = DEFAULT_RK4_STEP,
    convergence_check: bool = True,
    convergence_tol: float = CONVERGENCE_TOL,
) -> np.ndarray:
    """Propagate and return density matrices at the requested times.

    Trace is verified at every output point (1e-8).  The final state is
    checked against the positivity floor and a warning is emitted if an
    eigenvalue dips below -1e-9.  With no drives the propagation is
    exact exponential stepping and deterministic to the last bit for a
    fixed grid; with drives it is fixed-step RK4 whose final state must
    agree with a half-step rerun within ``convergence_tol``.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ContractViolationError("times must be a non-empty 1-D array")
    if times[0] < 0 or np.any(np.diff(times) < 0):
        raise ContractViolationError("times must be non-negative and sorted")
    rho0 = _as_density(initial_state)
    if rho0.shape != (model.dim, model.dim):
        raise ContractViolationError("initial state dimension mismatch")

    if not model.drives:
        out = _evolve_static(model, rho0, times)
    else:
        out = _evolve_rk4(model, rho0, times, step)
        if convergence_check:
            refined = _evolve_rk4(model, rho0, times[-1:], step / 2.0)
            local = float(np.max(np.abs(out[-1] - refined[-1])))
            if not np.isfinite(local) or local > convergence_tol:
                raise IntegrationFailureError(
                    f"step-halving check failed: max local error {local:.3e} "
                    f"exceeds {convergence_tol:.0e} (step {step:.1e} s)"
                )
    for rho, t in zip(out, times):
        _check_trace(rho, t)
    min_eig = float(np.linalg.eigvalsh(out[-1]).min())
    if min_eig < POSITIVITY_FLOOR:
        warnings.warn(
            f"final state eigenvalue {min_eig:.3e} below positivity floor",
            RuntimeWarning,
            stacklevel=2,
        )
    return out


def _evolve_static(model: LindbladModel, rho0: np.ndarray, times) -> np.ndarray:
    gen = liouvillian(model.hamiltonian, model.collapse_ops)
    d = model.dim
    vec = rho0.reshape(-1)
    out = np.empty((len(times), d, d), dtype=complex)
    propagators: dict[float, np.ndarray] = {}
    t_prev = 0.0
    for k, t in enumerate(times):
        dt = t - t_prev
        if dt > 0:
            prop = propagators.get(dt)
            if prop is None:
                prop = expm(gen * dt)
                propagators[dt] = prop
            vec = prop @ vec
        out[k] = vec.reshape(d, d)
        t_prev = t
    return out


def _evolve_rk4(
    model: LindbladModel, rho0: np.ndarray, times, step: float
) -> np.ndarray:
    d = model.dim
    gen0 = liouvillian(model.hamiltonian, model.collapse_ops)
    coupling = model.drive_coupling
    gen_plus = _hamiltonian_superops(coupling)
    gen_minus = _hamiltonian_superops(coupling.conj().T)

    def rhs(t: float, vec: np.ndarray) -> np.ndarray:
        c = 0.0 + 0.0j
        out_vec = gen0 @ vec
        for term in model.drives:
            c = _drive_coefficient(term, t)
            if c != 0.0:
                out_vec += c * (gen_plus @ vec) + np.conj(c) * (gen_minus @ vec)
        return out_vec

    vec = rho0.reshape(-1).astype(complex)
    out = np.empty((len(times), d, d), dtype=complex)
    t = 0.0
    for k, t_target in enumerate(times):
        while t < t_target - 1e-15:
            h = min(step, t_target - t)
            k1 = rhs(t, vec)
            k2 = rhs(t + 0.5 * h, vec + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, vec + 0.5 * h * k2)
            k4 = rhs(t + h, vec + h * k3)
            vec = vec + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        out[k] = vec.reshape(d, d)
    return out


# ---------------------------------------------------------------------------
# analytic reference: Kerr oscillator with loss


def analytic_kerr_evolution(
    alpha: float,
    gamma1: float,
    gamma_phi: float,
    t: float,
    dim_fock: int = 3,
) -> QuantumState:
    """Closed-form state of (|0> + |2>)/sqrt(2) under Kerr + loss.

    The Kerr ladder E_n = alpha/2 * n (n-1) leaves |0>, |1> degenerate,
    so the only phase is on the 0-2 coherence, which rotates as
    e^{+i alpha t} and decays at gamma1 + 4 gamma_phi (one quantum-jump
    ladder step plus the (n - m)^2 = 4 dephasing weight).  Populations
    cascade 2 -> 1 -> 0.  Trace is exactly 1 by construction.
    """
    if dim_fock < 3:
        raise ContractViolationError("need dim_fock >= 3 for the 0-2 superposition")
    p2 = 0.5 * math.exp(-2.0 * gamma1 * t)
    p1 = math.exp(-gamma1 * t) - math.exp(-2.0 * gamma1 * t)
    p0 = 1.0 - p1 - p2
    coh = 0.5 * np.exp(1j * alpha * t) * math.exp(-(gamma1 + 4.0 * gamma_phi) * t)
    rho = np.zeros((dim_fock, dim_fock), dtype=complex)
    rho[0, 0] = p0
    rho[1, 1] = p1
    rho[2, 2] = p2
    rho[0, 2] = coh
    rho[2, 0] = np.conj(coh)
    return QuantumState("density", rho)


def kerr_model(
    alpha: float, gamma1: float, gamma_phi: float, dim_fock: int = 3
) -> LindbladModel:
    """Lindblad twin of `analytic_kerr_evolution` for cross-checks."""
    n_op = np.diag(np.arange(dim_fock, dtype=float)).astype(complex)
    lowering = np.diag(np.sqrt(np.arange(1, dim_fock, dtype=float)), k=1).astype(
        complex
    )
    h = 0.5 * alpha * (n_op @ n_op - n_op)
    return LindbladModel(
        hamiltonian=h,
        collapse_ops=[(lowering, gamma1), (n_op, 2.0 * gamma_phi)],
    )


def superposition_02(dim_fock: int = 3) -> QuantumState:
    ket = (fock_ket(0, dim_fock) + fock_ket(2, dim_fock)) / math.sqrt(2.0)
    return QuantumState("ket", ket)


# ---------------------------------------------------------------------------
# mediated drive


def effective_phonon_drive(params, delta: float, qubit_drive_amplitude: float) -> float:
    """Phonon Rabi rate of a charge-line tone mediated by the coupling.

    Driving the qubit line at the mech frequency moves the phonon at
    (g/|delta|) * Omega_q to leading order.
    """
    if delta == 0:
        raise ContractViolationError("mediated drive needs nonzero detuning")
    if qubit_drive_amplitude < 0:
        raise ContractViolationError("drive amplitude must be >= 0")
    return params.g / abs(delta) * qubit_drive_amplitude


# ---------------------------------------------------------------------------
# trajectory output


def write_population_csv(path, times, states, dim_fock: int) -> None:
    """CSV with one row per time: t_s, P(g,n), P(e,n) for n = 0..N-1."""
    times = np.asarray(times, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["t_s"]
        header += [f"p_g{n}" for n in range(dim_fock)]
        header += [f"p_e{n}" for n in range(dim_fock)]
        writer.writerow(header)
        for t, rho in zip(times, states):
            pops = np.real(np.diag(rho))
            writer.writerow(
                [repr(float(t))] + [repr(float(x)) for x in pops]
            )
