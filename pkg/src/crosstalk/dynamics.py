"""Gaussian-state dynamics of two probes under the quadratic master equation.

Conventions: quadratures ``R = (x1, p1, x2, p2)`` with ``a = (x + i p)/sqrt(2)``,
``[R_a, R_b] = i J_ab`` and covariance ``sigma_ab = <{dR_a, dR_b}>/2`` so the
vacuum has ``sigma = I/2``.

For jump operators ``F_j = u_j . R`` and rates ``Gamma_jl`` the Kossakowski
matrix ``K = sum_jl Gamma_jl u_j u_l^dag`` splits into ``K_R + i K_I``; with the
Hamiltonian ``H = R^T H_q R / 2`` the moments obey

    d<R>/dt = A <R>,      d sigma/dt = A sigma + sigma A^T + D,
    A = J (H_q - K_I),     D = K_R.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov

from crosstalk.damping import DampingMatrix, crosstalk_long_time
from crosstalk.errors import DomainError, InvalidCoefficientsError, StepSizeError

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
J4 = np.kron(np.eye(2), J2)
UNCERTAINTY_TOL = 1e-8
STABILITY_BOUND = 0.1

# rows: a1, a1^dag, a2, a2^dag as linear forms in (x1, p1, x2, p2)
_U = np.array([[1, 1j, 0, 0], [1, -1j, 0, 0], [0, 0, 1, 1j], [0, 0, 1, -1j]]) / np.sqrt(2)


def symplectic_eigenvalues(cov):
    """Symplectic spectrum of a 4x4 covariance matrix (ascending, one per mode)."""
    ev = np.sort(np.abs(np.linalg.eigvals(1j * J4 @ np.asarray(cov, dtype=float))))
    return ev[::2]


@dataclass(frozen=True)
class GaussianState:
    """First moments and covariance of a two-mode Gaussian state.

    Raises
    ------
    DomainError
        If the covariance is not symmetric or violates the uncertainty
        relation (smallest symplectic eigenvalue below ``1/2``).
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(4)
        cov = np.asarray(self.cov, dtype=float).reshape(4, 4)
        if np.max(np.abs(cov - cov.T)) > 1e-9 * max(1.0, np.max(np.abs(cov))):
            raise DomainError("covariance must be symmetric")
        cov = 0.5 * (cov + cov.T)
        if symplectic_eigenvalues(cov)[0] < 0.5 - UNCERTAINTY_TOL:
            raise DomainError("covariance violates the uncertainty relation")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def vacuum(cls):
        return cls(np.zeros(4), 0.5 * np.eye(4))

    @classmethod
    def thermal(cls, n):
        return cls(np.zeros(4), (n + 0.5) * np.eye(4))

    @classmethod
    def two_mode_squeezed(cls, r, mean=None):
        """Two-mode squeezed vacuum ``exp(r (a1 a2 - a1^dag a2^dag))``."""
        c, s = np.cosh(2 * r), np.sinh(2 * r)
        Z = np.diag([1.0, -1.0])
        cov = 0.5 * np.block([[c * np.eye(2), s * Z], [s * Z, c * np.eye(2)]])
        return cls(np.zeros(4) if mean is None else mean, cov)

    @classmethod
    def coherent(cls, alpha1, alpha2=0.0):
        a = np.array([alpha1, alpha2], dtype=complex) * np.sqrt(2)
        return cls(np.array([a[0].real, a[0].imag, a[1].real, a[1].imag]), 0.5 * np.eye(4))

    @property
    def amplitudes(self):
        """``(<a1>, <a2>)``."""
        m = self.mean
        return np.array([m[0] + 1j * m[1], m[2] + 1j * m[3]]) / np.sqrt(2)

    def min_symplectic(self):
        return float(symplectic_eigenvalues(self.cov)[0])


def _mode_transform(sign):
    return np.hstack([np.eye(2), sign * np.eye(2)]) / np.sqrt(2)


def symmetric_block(state):
    """Covariance of ``((x1 + x2)/sqrt2, (p1 + p2)/sqrt2)``."""
    T = _mode_transform(1.0)
    return T @ state.cov @ T.T


def antisymmetric_block(state):
    """Covariance of ``((x1 - x2)/sqrt2, (p1 - p2)/sqrt2)``."""
    T = _mode_transform(-1.0)
    return T @ state.cov @ T.T


def log_negativity(state):
    """``max(0, -ln(2 nu_minus))`` of the partially transposed covariance."""
    P = np.diag([1.0, 1.0, 1.0, -1.0])
    nu = symplectic_eigenvalues(P @ state.cov @ P)[0]
    return float(max(0.0, -math.log(2 * nu)))


@dataclass(frozen=True)
class EvolutionGenerators:
    """Drift ``A``, diffusion ``D`` and the Kossakowski matrix they came from."""

    drift: np.ndarray
    diffusion: np.ndarray
    kossakowski: np.ndarray
    hamiltonian: np.ndarray

    @property
    def dissipative_drift(self):
        return self.drift - J4 @ self.hamiltonian

    def derivative(self, state):
        """``(d mean/dt, d cov/dt)`` at ``state``."""
        A = self.drift
        return A @ state.mean, A @ state.cov + state.cov @ A.T + self.diffusion


def build_generators(damping, omega, psd_tol=1e-12):
    """Moment equations for the two-probe master equation.

    Parameters
    ----------
    damping : DampingMatrix
    omega : float
        Bare probe frequency; the coherent part is
        ``(omega + delta_omega)(n1 + n2) + gamma_coh (a1^dag a2 + a2^dag a1)``.

    Raises
    ------
    InvalidCoefficientsError
        If the rate matrix is not positive semidefinite.
    """
    G = np.asarray(damping.gamma, dtype=float)
    if not np.allclose(G, G.T, atol=1e-15, rtol=1e-12):
        raise InvalidCoefficientsError("rate matrix must be symmetric")
    scale = max(np.max(np.abs(G)), 1e-300)
    low = np.linalg.eigvalsh(G)[0]
    if low < -psd_tol * scale:
        raise InvalidCoefficientsError(f"rate matrix has negative eigenvalue {low:.3e}; "
                                       "check |Gamma13| <= Gamma11 and |Gamma24| <= Gamma22")
    K = _U.T @ G @ _U.conj()
    w = omega + damping.delta_omega
    Hq = np.kron(np.array([[w, damping.gamma_coh], [damping.gamma_coh, w]]), np.eye(2))
    A = J4 @ (Hq - K.imag)
    D = 0.5 * (K.real + K.real.T)
    return EvolutionGenerators(A, D, K, Hq)


def steady_state(generators):
    """Covariance solving ``A sigma + sigma A^T + D = 0``."""
    return solve_continuous_lyapunov(generators.drift, -generators.diffusion)


def default_step(omega, gamma11):
    return 0.01 / max(omega, gamma11)


def _rk4_affine(M, c, h):
    """Exact one-step map of classical RK4 on ``y' = M y + c``: ``y -> P y + q``."""
    n = M.shape[0]
    hM = h * M
    P = np.eye(n)
    Q = np.eye(n)
    term = np.eye(n)
    for j in range(1, 5):
        term = term @ hM / j
        P = P + term
        if j < 4:
            Q = Q + term / (j + 1)
    return P, h * Q @ c


def _augmented_step(generators, h):
    A, D = generators.drift, generators.diffusion
    # row-major vec: vec(A S) = (A kron I) vec S, vec(S A^T) = (I kron A) vec S
    M = np.kron(A, np.eye(4)) + np.kron(np.eye(4), A)
    P_cov, q_cov = _rk4_affine(M, D.reshape(-1), h)
    P_mean, _ = _rk4_affine(A, np.zeros(4), h)
    aug = np.zeros((21, 21))
    aug[:4, :4] = P_mean
    aug[4:20, 4:20] = P_cov
    aug[4:20, 20] = q_cov
    aug[20, 20] = 1.0
    return aug


def _check_step(generators, dt):
    if not dt > 0:
        raise StepSizeError("dt must be positive")
    norm = np.linalg.norm(generators.drift, 2)
    if dt * norm >= STABILITY_BOUND:
        raise StepSizeError(f"dt*||A|| = {dt * norm:.3g} exceeds {STABILITY_BOUND}; "
                            f"use dt < {STABILITY_BOUND / norm:.3g}")


def trajectory(state, generators, times, dt):
    """States at the requested (increasing) times using fixed-step RK4.

    The step is shrunk so each interval holds a whole number of steps; with
    constant generators the RK4 update is an affine map, applied by repeated
    squaring.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise DomainError("times must be non-negative and increasing")
    _check_step(generators, dt)
    y = np.concatenate([state.mean, state.cov.reshape(-1), [1.0]])
    out, t_prev = [], 0.0
    for t in times:
        span = t - t_prev
        if span > 0:
            n = int(math.ceil(span / dt - 1e-9))
            step = _augmented_step(generators, span / n)
            y = np.linalg.matrix_power(step, n) @ y
        S = y[4:20].reshape(4, 4)
        out.append(GaussianState(y[:4], 0.5 * (S + S.T)))
        t_prev = t
    return out


def evolve(state, generators, t, dt):
    """Integrate mean and covariance from time 0 to ``t``.

    Raises
    ------
    StepSizeError
        If ``dt * ||A|| >= 0.1`` or ``dt <= 0``.
    """
    if t == 0:
        _check_step(generators, dt)
        return state
    return trajectory(state, generators, [t], dt)[0]


def evolve_stepwise(state, generator_at, t, dt):
    """RK4 with generators rebuilt at every stage time.

    ``generator_at(s)`` returns :class:`EvolutionGenerators` for time ``s``,
    e.g. from finite-time rates.
    """
    n = int(math.ceil(t / dt - 1e-9)) if t > 0 else 0
    h = t / n if n else 0.0
    m, S = state.mean.copy(), state.cov.copy()

    def f(s, m, S):
        g = generator_at(s)
        _check_step(g, h)
        A = g.drift
        return A @ m, A @ S + S @ A.T + g.diffusion

    for i in range(n):
        s = i * h
        k1 = f(s, m, S)
        k2 = f(s + h / 2, m + h / 2 * k1[0], S + h / 2 * k1[1])
        k3 = f(s + h / 2, m + h / 2 * k2[0], S + h / 2 * k2[1])
        k4 = f(s + h, m + h * k3[0], S + h * k3[1])
        m = m + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        S = S + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return GaussianState(m, 0.5 * (S + S.T))


def rotation(omega, t):
    """Free evolution ``exp(J omega t)`` of one mode's quadratures."""
    return expm(J2 * omega * t)


@dataclass(frozen=True)
class SurvivalRow:
    distance: float
    normalized: float
    log_negativity: float


def survival_scan(spec, probes, distances, t_final, squeezing=1.0, method="manifold",
                  dt=None, lamb=True):
    """Entanglement left after ``t_final`` as a function of probe separation.

    For each separation the long-time rates are computed, a two-mode squeezed
    vacuum with parameter ``squeezing`` is evolved and its log-negativity
    recorded.

    Parameters
    ----------
    distances : array_like
        Scalars (along the first lattice vector) or full separation vectors.

    Returns
    -------
    list of SurvivalRow
    """
    d = np.asarray(distances, dtype=float)
    if d.ndim == 1:
        r = np.outer(d, spec.direct_basis[0])
        mags = np.abs(d)
    else:
        r = d
        mags = np.linalg.norm(d, axis=1)
    prof = crosstalk_long_time(spec, probes, r, method=method, lamb=lamb)
    rows = []
    init = GaussianState.two_mode_squeezed(squeezing)
    for i in range(len(prof)):
        m = prof.matrix(i)
        gen = build_generators(m, probes.omega)
        step = dt or default_step(probes.omega, m.gamma11)
        final = evolve(init, gen, t_final, step)
        rows.append(SurvivalRow(float(mags[i]), float(prof.normalized[i]), log_negativity(final)))
    return rows


def rates_matrix(gamma11, gamma13, gamma22=0.0, gamma24=0.0, delta_omega=0.0, gamma_coh=0.0):
    """Convenience constructor for hand-built rate matrices."""
    return DampingMatrix.from_rates(gamma11, gamma13, gamma22, gamma24, delta_omega, gamma_coh)
