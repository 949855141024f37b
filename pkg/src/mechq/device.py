"""Device parameters and closed-form hybridization theory.

The transmon (frequency ``omega_q``) couples to a phonon mode
(``omega_p``) with Jaynes-Cummings strength ``g``.  At qubit-phonon
detuning ``delta = omega_q - omega_p`` the n-excitation manifold splits
into two branches; the phonon-like ("mech") branch inherits a weak
anharmonicity and a filtered share of the qubit decoherence.  Everything
here is exact two-level-per-manifold algebra, no perturbative expansion
unless a function says so.

All frequencies are angular (rad/s) unless a name carries a ``_hz``
suffix; times are seconds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .hilbert import (
    DEFAULT_FOCK_DIM,
    ComplexOperator,
    ContractViolationError,
    annihilation,
    eigh,
    identity,
    number,
    sigma_minus,
    sigma_plus,
    sigma_z,
    tensor,
)

TWO_PI = 2.0 * math.pi

# Standard operating point of the shipped device configuration: the qubit
# is Stark-tuned to sit 0.71 MHz below the phonon mode.
DEFAULT_OPERATING_DELTA_HZ = -0.71e6


class OutsideDispersiveRegimeError(ContractViolationError):
    """The requested detuning does not support a dispersive treatment."""


class DegenerateBranchError(ContractViolationError):
    """Branches cannot be labeled at zero detuning."""


class InsideAvoidedCrossingError(ContractViolationError):
    """A dressed splitting below 2g has no real bare detuning."""


def _sign(x: float) -> float:
    return 1.0 if x > 0 else -1.0


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class DeviceParams:
    """Calibrated device constants.

    omega_q, omega_p, g, alpha_qubit : angular frequencies (rad/s)
    T1_q, T2_q_ramsey, T2_q_echo     : transmon lifetimes (s)
    T1_p, T2_p                       : phonon lifetimes (s)
    """

    omega_q: float
    omega_p: float
    g: float
    alpha_qubit: float
    T1_q: float
    T2_q_ramsey: float
    T2_q_echo: float
    T1_p: float
    T2_p: float

    def __post_init__(self) -> None:
        if self.g <= 0:
            raise ContractViolationError(f"coupling g must be positive, got {self.g}")
        for name in ("omega_q", "omega_p"):
            if getattr(self, name) <= 0:
                raise ContractViolationError(f"{name} must be positive")
        for name in ("T1_q", "T2_q_ramsey", "T2_q_echo", "T1_p", "T2_p"):
            value = getattr(self, name)
            if value <= 0:
                raise ContractViolationError(f"{name} must be positive, got {value}")
        if self.T2_q_ramsey > 2 * self.T1_q + 1e-15:
            raise ContractViolationError("T2_q_ramsey exceeds 2*T1_q")
        if self.T2_q_echo > 2 * self.T1_q + 1e-15:
            raise ContractViolationError("T2_q_echo exceeds 2*T1_q")
        if self.T2_p > 2 * self.T1_p + 1e-15:
            raise ContractViolationError("T2_p exceeds 2*T1_p")

    # -- serialization (config files carry Hz / seconds with unit suffixes)

    @classmethod
    def from_dict(cls, cfg: dict) -> "DeviceParams":
        return cls(
            omega_q=TWO_PI * float(cfg["f_q_hz"]),
            omega_p=TWO_PI * float(cfg["f_p_hz"]),
            g=TWO_PI * float(cfg["g_hz"]),
            alpha_qubit=TWO_PI * float(cfg["alpha_qubit_hz"]),
            T1_q=float(cfg["t1_q_s"]),
            T2_q_ramsey=float(cfg["t2_q_ramsey_s"]),
            T2_q_echo=float(cfg["t2_q_echo_s"]),
            T1_p=float(cfg["t1_p_s"]),
            T2_p=float(cfg["t2_p_s"]),
        )

    def to_dict(self) -> dict:
        return {
            "f_q_hz": self.omega_q / TWO_PI,
            "f_p_hz": self.omega_p / TWO_PI,
            "g_hz": self.g / TWO_PI,
            "alpha_qubit_hz": self.alpha_qubit / TWO_PI,
            "t1_q_s": self.T1_q,
            "t2_q_ramsey_s": self.T2_q_ramsey,
            "t2_q_echo_s": self.T2_q_echo,
            "t1_p_s": self.T1_p,
            "t2_p_s": self.T2_p,
        }

    @classmethod
    def from_json_file(cls, path) -> "DeviceParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    # bare decoherence rates (1/s)

    @property
    def gamma1_qubit(self) -> float:
        return 1.0 / self.T1_q

    @property
    def gamma2_qubit(self) -> float:
        """Free-evolution (Ramsey) decoherence rate of the transmon."""
        return 1.0 / self.T2_q_ramsey

    @property
    def gamma1_phonon(self) -> float:
        return 1.0 / self.T1_p

    @property
    def gamma2_phonon(self) -> float:
        return 1.0 / self.T2_p


@dataclass(frozen=True)
class DerivedRates:
    """Dispersive mixing angle and inherited decoherence at a detuning."""

    delta: float
    epsilon: float
    chi: float
    gamma2_qubit: float
    Gamma2_intrinsic: float
    Gamma2_purcell: float
    Gamma2_total: float


def derived_rates(params: DeviceParams, delta: float) -> DerivedRates:
    """Mixing angle epsilon = g/|delta| and the inherited dephasing budget.

    Gamma2_purcell = epsilon**2 * gamma2_qubit is the inverse-Purcell
    inheritance; chi = 2 g**2 / delta is the full dispersive pull.
    """
    if delta == 0:
        raise OutsideDispersiveRegimeError("derived rates need a nonzero detuning")
    epsilon = params.g / abs(delta)
    gamma2 = params.gamma2_qubit
    purcell = epsilon**2 * gamma2
    intrinsic = params.gamma2_phonon
    return DerivedRates(
        delta=delta,
        epsilon=epsilon,
        chi=2.0 * params.g**2 / delta,
        gamma2_qubit=gamma2,
        Gamma2_intrinsic=intrinsic,
        Gamma2_purcell=purcell,
        Gamma2_total=intrinsic + purcell,
    )


# ---------------------------------------------------------------------------
# Hamiltonians


def build_jc_hamiltonian(
    params: DeviceParams,
    frame: str = "phonon-rotating",
    dim_fock: int = DEFAULT_FOCK_DIM,
    delta: float | None = None,
) -> ComplexOperator:
    """Jaynes-Cummings Hamiltonian on the composite space (units of hbar).

    ``frame="lab"``:    omega_p p^dag p + (omega_q/2) sigma_z + g(sigma_+ p + h.c.)
    ``frame="phonon-rotating"``: (delta/2) sigma_z + g(sigma_+ p + h.c.)

    ``delta`` overrides omega_q - omega_p (the qubit is Stark-tunable);
    in the lab frame the override shifts omega_q accordingly.
    """
    p = annihilation(dim_fock)
    iq = identity(2)
    ifock = identity(dim_fock)
    coupling = params.g * (
        tensor(sigma_plus(), p) + tensor(sigma_minus(), p.conj().T)
    )
    if delta is None:
        delta = params.omega_q - params.omega_p
    if frame == "lab":
        omega_q = params.omega_p + delta
        h = (
            params.omega_p * tensor(iq, number(dim_fock))
            + 0.5 * omega_q * tensor(sigma_z(), ifock)
            + coupling
        )
    elif frame == "phonon-rotating":
        h = 0.5 * delta * tensor(sigma_z(), ifock) + coupling
    else:
        raise ContractViolationError(
            f"frame must be 'lab' or 'phonon-rotating', got {frame!r}"
        )
    return ComplexOperator(2, dim_fock, h).require_hermitian()


# ---------------------------------------------------------------------------
# branch structure


def mech_branch_energy(g: float, delta: float, n: int) -> float:
    """Phonon-like branch eigenvalue of the n-excitation manifold.

    Rotating-frame energy -sign(delta)/2 * sqrt(delta^2 + 4 g^2 n); the
    n = 0 value -delta/2 is the unhybridized ground level.
    """
    if delta == 0:
        raise DegenerateBranchError("branches are degenerate at delta = 0")
    return -_sign(delta) * 0.5 * math.sqrt(delta * delta + 4.0 * g * g * n)


def phonon_weight(g: float, delta: float, n: int) -> float:
    """Phonon character |<g,n|n'>|^2 of the n-th mech-branch state.

    Exceeds 1/2 whenever the branch is phonon-dominant; tends to 1 as
    g/|delta| -> 0.  The vacuum level is taken as weight 1.
    """
    if delta == 0:
        raise DegenerateBranchError("branches are degenerate at delta = 0")
    if n == 0:
        return 1.0
    gap = delta - _sign(delta) * math.sqrt(delta * delta + 4.0 * g * g * n)
    return 4.0 * g * g * n / (4.0 * g * g * n + gap * gap)


def qubit_weight(g: float, delta: float, n: int) -> float:
    return 1.0 - phonon_weight(g, delta, n)


def dressed_levels(
    params: DeviceParams, delta: float, n_max: int
) -> list[tuple[float, float]]:
    """Mech-branch (energy, phonon weight) pairs for n = 0 .. n_max."""
    if n_max < 1:
        raise ContractViolationError(f"n_max must be >= 1, got {n_max}")
    if delta == 0:
        raise DegenerateBranchError("branches are degenerate at delta = 0")
    return [
        (mech_branch_energy(params.g, delta, n), phonon_weight(params.g, delta, n))
        for n in range(n_max + 1)
    ]


def ladder_ratios(g: float, delta: float, dim: int) -> np.ndarray:
    """Dressed transition-matrix-element ratios s_n for the mech ladder.

    s_n multiplies the n -> n+1 element of the driven ladder, normalized
    to s_0 = 1.  Slightly super-harmonic: the hybridized ladder beats
    sqrt(n) because higher manifolds mix more strongly.
    """
    s = np.empty(dim - 1)
    norm = math.sqrt(qubit_weight(g, delta, 1) * phonon_weight(g, delta, 0))
    for n in range(dim - 1):
        s[n] = (
            math.sqrt(
                qubit_weight(g, delta, n + 1) * phonon_weight(g, delta, n)
            )
            / norm
        )
    return s


def kerr_ladder_frequencies(g: float, delta: float, dim: int) -> np.ndarray:
    """Residual level shifts mu_n of the mech ladder in the 0->1 frame.

    mu_n = E(n) - E(0) - n * (E(1) - E(0)); mu_2 = alpha, and higher
    levels pick up the super-linear remainder of the branch curvature.
    """
    e = np.array([mech_branch_energy(g, delta, n) for n in range(dim)])
    d01 = e[1] - e[0]
    return e - e[0] - np.arange(dim) * d01


def effective_mech_rates(params: DeviceParams, delta: float) -> tuple[float, float]:
    """Weight-mixed (Gamma1_eff, gamma_phi_eff) of the n = 1 mech level.

    The dressed level decays and dephases as a weighted blend of its
    constituents: Gamma_k,eff = p_q1 gamma_k,qubit + p_p1 gamma_k,phonon.
    The pure-dephasing rate is gamma_phi = Gamma2 - Gamma1/2.
    """
    pq1 = qubit_weight(params.g, delta, 1)
    pp1 = 1.0 - pq1
    gamma1_eff = pq1 * params.gamma1_qubit + pp1 * params.gamma1_phonon
    gamma2_eff = pq1 * params.gamma2_qubit + pp1 * params.gamma2_phonon
    gamma_phi = gamma2_eff - 0.5 * gamma1_eff
    return gamma1_eff, gamma_phi


# ---------------------------------------------------------------------------
# anharmonicity


def anharmonicity(params: DeviceParams, delta: float) -> float:
    """Closed-form inherited anharmonicity of the mech branch (rad/s).

    alpha = E(2) - 2 E(1) + E(0) evaluated on the branch energies:

        alpha = -delta/2 + sign(delta) * (sqrt(delta^2 + 4 g^2)
                                          - sqrt(delta^2 + 8 g^2) / 2)

    Same sign as the detuning; tends to 2 g^4 / delta^3 for |delta| >> g.
    """
    if delta == 0:
        raise OutsideDispersiveRegimeError(
            "anharmonicity is defined for nonzero detuning"
        )
    g = params.g
    s = _sign(delta)
    return -delta / 2.0 + s * (
        math.sqrt(delta * delta + 4.0 * g * g)
        - 0.5 * math.sqrt(delta * delta + 8.0 * g * g)
    )


def anharmonicity_asymptotic(params: DeviceParams, delta: float) -> float:
    """Leading dispersive term 2 g^4 / delta^3."""
    if delta == 0:
        raise OutsideDispersiveRegimeError("asymptote needs nonzero detuning")
    return 2.0 * params.g**4 / delta**3


def anharmonicity_from_spectrum(
    params: DeviceParams, delta: float, dim_fock: int = DEFAULT_FOCK_DIM
) -> float:
    """Anharmonicity from numerical diagonalization of the composite JC model.

    Independent route to the closed form: diagonalize the full Hamiltonian,
    identify the three lowest mech-branch levels by their overlap with the
    bare |g,n> states, and difference them.  Agreement with the closed form
    degrades as (delta/g)^4 in double precision because the curvature is
    extracted from near-cancelling large eigenvalues.
    """
    if delta == 0:
        raise OutsideDispersiveRegimeError("spectrum route needs nonzero detuning")
    if dim_fock < 3:
        raise ContractViolationError("need dim_fock >= 3 to difference three levels")
    h = build_jc_hamiltonian(params, "phonon-rotating", dim_fock, delta)
    values, vectors = eigh(h)
    energies = np.empty(3)
    for n in range(3):
        idx = n  # |g,n> component in the qubit-major layout
        overlaps = np.abs(vectors[idx, :]) ** 2
        energies[n] = values[int(np.argmax(overlaps))]
    return float(energies[2] - 2.0 * energies[1] + energies[0])


# ---------------------------------------------------------------------------
# budget and inversion


@dataclass(frozen=True)
class CoherenceBudget:
    """Anharmonicity against inherited decoherence at one detuning."""

    delta: float
    epsilon: float
    alpha: float
    alpha_dispersive_approx: float
    chi: float
    Gamma2_purcell: float
    Gamma2_intrinsic: float
    Gamma2_total: float
    ratio_alpha_gamma2: float


def coherence_budget(params: DeviceParams, delta: float) -> CoherenceBudget:
    """The figure of merit |alpha| / Gamma2_total and its ingredients."""
    rates = derived_rates(params, delta)
    alpha = anharmonicity(params, delta)
    return CoherenceBudget(
        delta=delta,
        epsilon=rates.epsilon,
        alpha=alpha,
        alpha_dispersive_approx=anharmonicity_asymptotic(params, delta),
        chi=rates.chi,
        Gamma2_purcell=rates.Gamma2_purcell,
        Gamma2_intrinsic=rates.Gamma2_intrinsic,
        Gamma2_total=rates.Gamma2_total,
        ratio_alpha_gamma2=abs(alpha) / rates.Gamma2_total,
    )


def dressed_detuning_from_bare(params: DeviceParams, delta: float) -> float:
    """Signed n = 1 branch splitting sqrt(delta^2 + 4 g^2)."""
    if delta == 0:
        raise DegenerateBranchError("sign is undefined at delta = 0")
    return _sign(delta) * math.sqrt(delta * delta + 4.0 * params.g**2)


def bare_detuning_from_dressed(params: DeviceParams, delta_dressed: float) -> float:
    """Invert the measured n = 1 branch splitting to the bare detuning.

    Preserves sign.  Splittings inside the 2g avoided-crossing gap have
    no real preimage.
    """
    g2 = 4.0 * params.g**2
    if delta_dressed * delta_dressed < g2:
        raise InsideAvoidedCrossingError(
            f"|dressed detuning| {abs(delta_dressed):.6g} rad/s is below the "
            f"avoided-crossing gap 2g = {math.sqrt(g2):.6g} rad/s"
        )
    return _sign(delta_dressed) * math.sqrt(delta_dressed * delta_dressed - g2)
