"""Estimation: curve fits, phonon-number decomposition, Wigner tomography.

The Wigner kernel is the displaced parity D(2 beta) Pi in closed form
(Laguerre recurrence); orientation is pinned by the coherent-state test
in the suite.  Reconstruction is least-squares over a Cholesky-like
parameterization, so the result is positive semidefinite with unit
trace by construction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import curve_fit, minimize, nnls

from .hilbert import ContractViolationError, QuantumState
from .sequences import MeasurementRecord, run_rpn

TWO_PI = 2.0 * math.pi
MIN_FIT_POINTS = 8
WIGNER_BOUND = 2.0 / math.pi
TRUNCATION_POPULATION_TOL = 1e-4
DEFAULT_WIGNER_EXTENT = 2.5
DEFAULT_WIGNER_POINTS = 41


class IllConditionedBasisError(ContractViolationError):
    """The readout basis cannot resolve the requested populations."""


class FitInitializationError(ContractViolationError):
    """No usable starting point could be extracted from the data."""


def _require_points(x, n: int = MIN_FIT_POINTS) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.size < n:
        raise FitInitializationError(f"fit needs at least {n} points, got {x.size}")
    return x


def _as_phonon_density(state) -> np.ndarray:
    if isinstance(state, QuantumState):
        return state.to_density()
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        return np.outer(arr, arr.conj())
    return arr


# ---------------------------------------------------------------------------
# elementary fits


@dataclass(frozen=True)
class ExponentialFit:
    amplitude: float
    time_constant: float
    offset: float
    rss: float


def fit_exponential(times, values) -> ExponentialFit:
    """Least-squares A exp(-t/T) + c."""
    t = _require_points(times)
    y = np.asarray(values, dtype=float)
    a0 = y[0] - y[-1]
    c0 = y[-1]
    t0 = max(t[-1] / 3.0, 1e-12)
    popt, _ = curve_fit(
        lambda tt, a, tau, c: a * np.exp(-tt / tau) + c,
        t,
        y,
        p0=[a0 if a0 != 0 else 1.0, t0, c0],
        maxfev=20000,
    )
    resid = y - (popt[0] * np.exp(-t / popt[1]) + popt[2])
    return ExponentialFit(popt[0], popt[1], popt[2], float(np.sum(resid**2)))


@dataclass(frozen=True)
class DampedCosineFit:
    amplitude: float
    kappa: float
    omega: float
    phase: float
    offset: float
    rss: float


def _fft_frequency(t: np.ndarray, y: np.ndarray) -> float:
    """Dominant non-DC angular frequency, or raise if there is no peak."""
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-6, atol=0):
        raise FitInitializationError("FFT initialization needs a uniform grid")
    spectrum = np.abs(np.fft.rfft(y - y.mean())) ** 2
    freqs = np.fft.rfftfreq(len(y), dt)
    if len(spectrum) < 3:
        raise FitInitializationError("too few points for spectral initialization")
    spectrum[0] = 0.0
    peak = int(np.argmax(spectrum))
    floor = float(np.median(spectrum[1:]))
    if spectrum[peak] < 5.0 * floor or spectrum[peak] <= 0:
        raise FitInitializationError(
            "no significant spectral peak to initialize the oscillation frequency"
        )
    return TWO_PI * freqs[peak]


def fit_damped_cosine(times, values, with_offset: bool = False) -> DampedCosineFit:
    """Least-squares A (1 - e^{-kappa t} cos(omega t + phi)) [+ c].

    The optional constant extends the model to records whose steady
    level is not half the oscillation amplitude (e.g. free-decay Ramsey
    fringes).
    """
    t = _require_points(times)
    y = np.asarray(values, dtype=float)
    omega0 = _fft_frequency(t, y)
    a0 = max(float(y.mean()), 1e-3)
    kappa0 = 2.0 / t[-1]

    if with_offset:
        model = lambda tt, a, k, w, ph, c: a * (
            1.0 - np.exp(-k * tt) * np.cos(w * tt + ph)
        ) + c
        p0 = [0.5 * (y.max() - y.min()), kappa0, omega0, 0.0, y.min()]
    else:
        model = lambda tt, a, k, w, ph: a * (
            1.0 - np.exp(-k * tt) * np.cos(w * tt + ph)
        )
        p0 = [a0, kappa0, omega0, 0.0]
    popt, _ = curve_fit(model, t, y, p0=p0, maxfev=40000)
    resid = y - model(t, *popt)
    offset = popt[4] if with_offset else 0.0
    return DampedCosineFit(
        amplitude=popt[0],
        kappa=abs(popt[1]),
        omega=abs(popt[2]),
        phase=popt[3],
        offset=offset,
        rss=float(np.sum(resid**2)),
    )


@dataclass(frozen=True)
class LorentzianFit:
    amplitude: float
    center: float
    width: float
    offset: float
    rss: float


def fit_lorentzian(detunings, values) -> LorentzianFit:
    """Least-squares A (G/2)^2 / ((x - x0)^2 + (G/2)^2) + c."""
    x = _require_points(detunings)
    y = np.asarray(values, dtype=float)
    c0 = float(np.median(y))
    peak = int(np.argmax(np.abs(y - c0)))
    a0 = y[peak] - c0
    span = x.max() - x.min()
    g0 = span / 5.0

    def model(xx, a, x0, g, c):
        hw = 0.5 * g
        return a * hw**2 / ((xx - x0) ** 2 + hw**2) + c

    popt, _ = curve_fit(
        model, x, y, p0=[a0, x[peak], g0, c0], maxfev=40000
    )
    resid = y - model(x, *popt)
    return LorentzianFit(
        amplitude=popt[0],
        center=popt[1],
        width=abs(popt[2]),
        offset=popt[3],
        rss=float(np.sum(resid**2)),
    )


# ---------------------------------------------------------------------------
# anharmonicity Ramsey fit


def ramsey_fringe_model(
    t, alpha: float, gamma_phi: float, gamma1: float, omega_ad: float,
    amplitude: float = 1.0,
):
    """Closed-form interferometer response.

    The sector-2 swap leaves a fixed fraction of the population on a
    path that decays but does not interfere, giving the non-oscillating
    e^{-2 gamma1 t} - e^{-gamma1 t} term; the fringe itself rides at
    alpha + 2 omega_ad and decays at gamma1 + 4 gamma_phi.
    """
    t = np.asarray(t, dtype=float)
    x = math.pi / (2.0 * math.sqrt(2.0))
    coef = 1.0 - 2.0 * math.cos(x) ** 4
    return 0.5 + 0.5 * amplitude * (
        coef * (np.exp(-2.0 * gamma1 * t) - np.exp(-gamma1 * t))
        + np.exp(-(gamma1 + 4.0 * gamma_phi) * t)
        * np.cos((alpha + 2.0 * omega_ad) * t)
    )


@dataclass(frozen=True)
class RamseyFit:
    alpha: float
    gamma_phi: float
    rss: float
    alpha_init: float


def fit_ramsey_anharmonicity(
    times, p_excited, gamma1: float, omega_ad: float
) -> RamseyFit:
    """Recover (alpha, gamma_phi) from an interferometer record.

    The fringe model is even in (alpha + 2 omega_ad), so a single record
    cannot distinguish alpha = f - 2 omega_ad from alpha = -f - 2 omega_ad
    (f = measured fringe frequency).  The protocol's validity condition
    2 omega_ad > |alpha| makes the first preimage the physical one, and
    that branch seeds the refinement.  A record without a spectral peak
    raises FitInitializationError.
    """
    t = _require_points(times)
    y = np.asarray(p_excited, dtype=float)
    omega_fringe = _fft_frequency(t, y)

    alpha0 = omega_fringe - 2.0 * omega_ad
    try:
        popt, _ = curve_fit(
            lambda tt, a, gp: ramsey_fringe_model(tt, a, gp, gamma1, omega_ad),
            t,
            y,
            p0=[alpha0, 3000.0],
            maxfev=20000,
        )
    except RuntimeError as exc:
        raise FitInitializationError(f"Ramsey fit did not converge: {exc}") from exc
    resid = y - ramsey_fringe_model(t, popt[0], popt[1], gamma1, omega_ad)
    rss = float(np.sum(resid**2))
    return RamseyFit(alpha=float(popt[0]), gamma_phi=abs(popt[1]), rss=rss,
                     alpha_init=alpha0)


# ---------------------------------------------------------------------------
# phonon-number decomposition


@dataclass(frozen=True)
class FockDistribution:
    probabilities: np.ndarray
    residual_norm: float
    condition_number: float


_RPN_BASIS_CACHE: dict = {}


def rpn_basis(
    params, times, n_max: int = 4, dim_fock: int = 8
) -> np.ndarray:
    """Readout traces of the pure Fock states |0> .. |n_max|.

    Cached on the coupling, the decoherence rates, and the time grid;
    building a row runs the full composite readout simulation.
    """
    times = np.asarray(times, dtype=float)
    key = (
        round(params.g, 6),
        round(params.gamma1_qubit, 9),
        round(params.gamma2_qubit, 9),
        round(params.gamma1_phonon, 9),
        round(params.gamma2_phonon, 9),
        times.tobytes(),
        n_max,
        dim_fock,
    )
    basis = _RPN_BASIS_CACHE.get(key)
    if basis is None:
        basis = np.empty((n_max + 1, len(times)))
        for n in range(n_max + 1):
            ket = np.zeros(dim_fock, dtype=complex)
            ket[n] = 1.0
            rec = run_rpn(
                params,
                state_prep=ket,
                t_max=float(times[-1]),
                n_points=len(times),
                dim_fock=dim_fock,
            )
            basis[n] = rec.p_excited
        _RPN_BASIS_CACHE[key] = basis
    return basis


def rpn_fit(
    times,
    p_excited,
    params,
    n_max: int = 4,
    dim_fock: int = 8,
    condition_limit: float = 1e6,
) -> FockDistribution:
    """Phonon-number populations from a resonant-exchange record.

    Non-negative least squares on the simulated Fock traces with a
    heavily weighted sum row pinning the simplex constraint; the result
    is renormalized to exactly unit sum.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(p_excited, dtype=float)
    if t.shape != y.shape:
        raise ContractViolationError("times/p_excited shape mismatch")
    if t.size > 1 and not np.allclose(np.diff(t), t[1] - t[0], rtol=1e-6, atol=0):
        raise FitInitializationError("RPN fit needs a uniform time grid")
    basis = rpn_basis(params, t, n_max=n_max, dim_fock=dim_fock)
    cond = float(np.linalg.cond(basis.T))
    if not np.isfinite(cond) or cond > condition_limit:
        raise IllConditionedBasisError(
            f"basis condition number {cond:.3g} exceeds {condition_limit:.3g}"
        )
    weight = 100.0
    a = np.vstack([basis.T, weight * np.ones((1, n_max + 1))])
    b = np.concatenate([y, [weight]])
    sol, rnorm = nnls(a, b)
    total = sol.sum()
    if total <= 0:
        raise IllConditionedBasisError("NNLS returned an empty distribution")
    return FockDistribution(
        probabilities=sol / total,
        residual_norm=float(rnorm),
        condition_number=cond,
    )


def rpn_fit_record(record: MeasurementRecord, params, **kwargs) -> FockDistribution:
    return rpn_fit(record.times, record.p_excited, params, **kwargs)


# ---------------------------------------------------------------------------
# Wigner function


def wigner_kernel(dim: int, betas) -> np.ndarray:
    """Displaced-parity kernel K(beta) = D(2 beta) Pi, truncated to dim.

    For m >= n the element is
    (-1)^n sqrt(n!/m!) (2 conj(beta))^{m-n} e^{-2|beta|^2} L_n^{m-n}(4|beta|^2);
    the lower triangle is the Hermitian mirror.  Laguerre values come
    from the three-term recurrence in n at fixed superdiagonal offset.
    """
    b = np.asarray(betas, dtype=complex).ravel()
    x = 4.0 * np.abs(b) ** 2
    gauss = np.exp(-2.0 * np.abs(b) ** 2)
    kernel = np.zeros((b.size, dim, dim), dtype=complex)
    for a in range(dim):
        # sqrt(n!/(n+a)!) built incrementally along the diagonal offset
        ratio = 1.0 / math.sqrt(math.prod(range(1, a + 1))) if a else 1.0
        l_prev = np.ones_like(x)
        l_cur = 1.0 + a - x
        for n in range(dim - a):
            if n == 0:
                lag = l_prev
            elif n == 1:
                lag = l_cur
            else:
                l_next = ((2.0 * (n - 1) + 1.0 + a - x) * l_cur
                          - (n - 1 + a) * l_prev) / n
                l_prev, l_cur = l_cur, l_next
                lag = l_cur
            if n > 0:
                ratio *= math.sqrt(n / (n + a))
            val = ((-1.0) ** n) * ratio * (2.0 * b.conj()) ** a * gauss * lag
            kernel[:, n, n + a] = val
            if a:
                kernel[:, n + a, n] = val.conj()
    return kernel


def wigner_values(state, betas) -> np.ndarray:
    """W(beta) = (2/pi) Tr[rho D(2 beta) Pi] at arbitrary phase-space points."""
    rho = _as_phonon_density(state)
    dim = rho.shape[0]
    pops = np.real(np.diag(rho))
    if dim >= 2 and pops[-1] + pops[-2] > TRUNCATION_POPULATION_TOL:
        warnings.warn(
            f"top two Fock populations hold {pops[-1] + pops[-2]:.2e} of the "
            "state; the Wigner map is truncation-limited",
            RuntimeWarning,
            stacklevel=2,
        )
    kernel = wigner_kernel(dim, betas)
    return (2.0 / math.pi) * np.real(np.einsum("inm,mn->i", kernel, rho))


@dataclass
class WignerMap:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)


def wigner(
    state,
    extent: float = DEFAULT_WIGNER_EXTENT,
    n_points: int = DEFAULT_WIGNER_POINTS,
) -> WignerMap:
    """Wigner map on a square grid beta = x + i y, |x|,|y| <= extent."""
    xs = np.linspace(-extent, extent, n_points)
    ys = np.linspace(-extent, extent, n_points)
    gx, gy = np.meshgrid(xs, ys)
    betas = (gx + 1j * gy).ravel()
    values = wigner_values(state, betas).reshape(n_points, n_points)
    return WignerMap(x=xs, y=ys, values=values,
                     metadata={"extent": extent, "n_points": n_points})


# ---------------------------------------------------------------------------
# maximum-likelihood state reconstruction


def mle_reconstruct(
    betas,
    w_values,
    n_max: int,
    max_iterations: int = 500,
    tol: float = 1e-9,
) -> np.ndarray:
    """Density matrix from Wigner samples (Gaussian likelihood).

    rho = T^dag T / Tr with T lower triangular, so positivity and unit
    trace are exact; the quasi-Newton search is deterministic from a
    fixed identity-like start.  Needs at least (n_max + 1)^2 samples.
    """
    b = np.asarray(betas, dtype=complex).ravel()
    w = np.asarray(w_values, dtype=float).ravel()
    dim = n_max + 1
    if b.size != w.size:
        raise ContractViolationError("betas and w_values must align")
    if b.size < dim * dim:
        raise FitInitializationError(
            f"need at least (n_max+1)^2 = {dim * dim} samples, got {b.size}"
        )
    kernel = wigner_kernel(dim, b)
    rows, cols = np.tril_indices(dim, -1)
    n_offdiag = rows.size

    def unpack(x: np.ndarray) -> np.ndarray:
        t = np.diag(x[:dim].astype(complex))
        t[rows, cols] = x[dim : dim + n_offdiag] + 1j * x[dim + n_offdiag :]
        return t

    def objective(x: np.ndarray) -> float:
        t = unpack(x)
        rho = t.conj().T @ t
        rho /= np.trace(rho).real
        model = (2.0 / math.pi) * np.real(np.einsum("inm,mn->i", kernel, rho))
        return float(np.sum((model - w) ** 2))

    x0 = np.zeros(dim + 2 * n_offdiag)
    x0[:dim] = 1.0
    result = minimize(
        objective,
        x0,
        method="L-BFGS-B",
        options={"maxiter": max_iterations, "ftol": tol * 1e-6, "gtol": tol},
    )
    t = unpack(result.x)
    rho = t.conj().T @ t
    return rho / np.trace(rho).real


# ---------------------------------------------------------------------------
# fidelity


def fidelity(state_a, state_b) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)) in [0, 1].

    Square-root convention: for pure states this is |<psi|phi>|, and the
    squared value is the population overlap.  Negative rounding dust in
    the spectra is floored at zero.
    """
    rho = _as_phonon_density(state_a)
    sigma = _as_phonon_density(state_b)
    if rho.shape != sigma.shape:
        raise ContractViolationError("fidelity needs states of equal dimension")
    lam, vec = np.linalg.eigh(rho)
    lam = np.clip(lam, 0.0, None)
    sqrt_rho = vec @ np.diag(np.sqrt(lam)) @ vec.conj().T
    inner = np.clip(np.linalg.eigvalsh(sqrt_rho @ sigma @ sqrt_rho), 0.0, None)
    return float(np.sum(np.sqrt(inner)))
