"""Master-equation coefficients for two probes coupled to a harmonic crystal.

Rates are written for probes at sites ``n`` and ``n + r`` with bilinear
coupling ``lambda * q_i * Q_site``.  Finite-time coefficients use the
``sin(t Delta) / Delta`` kernel (``Delta = Omega - omega_k``) integrated over a
uniform zone grid; long-time coefficients replace the kernel by
``pi * delta(Delta)`` and are evaluated either on the resonant manifold or
with a Gaussian-broadened delta on the grid.

Indices follow the jump-operator ordering ``F = (a1, a1^dag, a2, a2^dag)``:
``gamma11``/``gamma13`` are emission rates, ``gamma22``/``gamma24``
absorption rates.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from crosstalk.errors import (DomainError, IllConditionedWarning, OutOfBandError,
                              ResolutionError, WeakCouplingWarning)
from crosstalk.lattice import (CUBIC, LatticeSpec, dispersion, group_velocity,
                               max_group_velocity, resonant_manifold)
from crosstalk.quadrature import ZoneGrid, as_separations

FINITE_TIME = "finite_time"
MANIFOLD = "manifold"
BROADENED_GRID = "broadened_grid"

WEAK_COUPLING_RATIO = 0.1
_BROADENING = 3.0


# -- thermal helpers ---------------------------------------------------------

def bose(omega, temperature):
    """Bose occupation ``1 / (exp(omega / T) - 1)``; zero at ``T = 0``."""
    omega = np.asarray(omega, dtype=float)
    if temperature <= 0:
        return np.zeros_like(omega)
    return 1.0 / np.expm1(omega / temperature)


def thermal_factor(omega, temperature):
    """Emission enhancement ``n + 1 = (coth(omega / 2T) + 1) / 2``."""
    return bose(omega, temperature) + 1.0


# -- contacts ----------------------------------------------------------------

@dataclass(frozen=True)
class Contact:
    """Spatial profile ``g(R)`` of the probe-bath contact.

    Use the constructors :meth:`point`, :meth:`gaussian` and :meth:`profile`.
    The Gaussian contact uses the continuum form factor
    ``exp(-|k|^2 sigma^2)``, which equals 1 at ``k = 0`` for every width.
    Explicit profiles are normalized to ``sum g^2 = 1``.
    """

    kind: str = "point"
    sigma: float = 0.0
    sites: tuple = ()
    amplitudes: tuple = ()

    def __post_init__(self):
        if self.kind not in ("point", "gaussian", "profile"):
            raise DomainError(f"unknown contact kind {self.kind!r}")
        if not self.sigma >= 0:
            raise DomainError("contact width sigma must be non-negative")
        if self.kind == "profile":
            if len(self.sites) == 0 or len(self.sites) != len(self.amplitudes):
                raise DomainError("profile contact needs matching sites and amplitudes")
            norm = math.sqrt(math.fsum(a * a for a in self.amplitudes))
            if norm == 0:
                raise DomainError("profile amplitudes are all zero")
            object.__setattr__(self, "amplitudes", tuple(a / norm for a in self.amplitudes))
            object.__setattr__(self, "sites", tuple(tuple(map(float, s)) for s in self.sites))

    @classmethod
    def point(cls):
        return cls()

    @classmethod
    def gaussian(cls, sigma):
        return cls(kind="gaussian", sigma=float(sigma))

    @classmethod
    def profile(cls, sites, amplitudes):
        return cls(kind="profile", sites=tuple(map(tuple, np.atleast_2d(sites).tolist())),
                   amplitudes=tuple(float(a) for a in amplitudes))

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind == "gaussian":
            out["sigma"] = self.sigma
        if self.kind == "profile":
            out["sites"] = [list(s) for s in self.sites]
            out["amplitudes"] = list(self.amplitudes)
        return out


def form_factor(contact, k):
    """Momentum filter ``Phi(k) = |sum_R g(R) exp(i k.R)|^2`` of a contact.

    Parameters
    ----------
    contact : Contact
    k : array_like, shape (..., D)
        Wave vectors inside the Brillouin zone.
    """
    k = np.asarray(k, dtype=float)
    if k.ndim == 0:
        k = k[None]
    if contact.kind == "point" or (contact.kind == "gaussian" and contact.sigma == 0):
        return np.ones(k.shape[:-1])
    if contact.kind == "gaussian":
        return np.exp(-np.sum(k**2, axis=-1) * contact.sigma**2)
    R = np.asarray(contact.sites)
    g = np.asarray(contact.amplitudes)
    phase = k @ R.T
    return (np.cos(phase) @ g) ** 2 + (np.sin(phase) @ g) ** 2


# -- probe configuration -------------------------------------------------------

@dataclass(frozen=True)
class ProbeConfig:
    """Two identical probes of frequency ``omega`` at sites ``n`` and ``n + r``.

    Parameters
    ----------
    omega : float
        Probe frequency.
    coupling : float
        System-bath coupling ``lambda``; only ``lambda^2`` enters the rates.
    separation : tuple of float, optional
        ``r = n' - n`` in lattice units; ``None`` means coincident probes.
    temperature : float
        Bath temperature (``k_B = hbar = 1``).
    contact : Contact
    """

    omega: float
    coupling: float = 0.05
    separation: tuple = None
    temperature: float = 0.0
    contact: Contact = field(default_factory=Contact)

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError("probe frequency must be positive")
        if not self.coupling >= 0:
            raise DomainError("coupling must be non-negative")
        if not self.temperature >= 0:
            raise DomainError("temperature must be non-negative")
        if self.separation is not None:
            object.__setattr__(self, "separation",
                               tuple(float(x) for x in np.atleast_1d(self.separation)))

    @classmethod
    def from_sites(cls, n, n_prime, omega, **kwargs):
        sep = np.asarray(n_prime, dtype=float) - np.asarray(n, dtype=float)
        return cls(omega=omega, separation=tuple(np.atleast_1d(sep)), **kwargs)

    def separation_for(self, spec):
        if self.separation is None:
            return np.zeros(spec.dimension)
        return as_separations(spec, self.separation)[0]

    def with_separation(self, r):
        return ProbeConfig(self.omega, self.coupling, tuple(np.atleast_1d(r)),
                           self.temperature, self.contact)

    def with_temperature(self, temperature):
        return ProbeConfig(self.omega, self.coupling, self.separation, temperature, self.contact)


def check_weak_coupling(spec, probes):
    """Warn when ``lambda^2`` is not small against ``Omega * omega0``."""
    if probes.coupling**2 > WEAK_COUPLING_RATIO * probes.omega * spec.omega0:
        warnings.warn(f"lambda^2 = {probes.coupling**2:.3g} is not small compared with "
                      f"Omega*omega0 = {probes.omega * spec.omega0:.3g}; the Born-Markov "
                      "rates may be unreliable", WeakCouplingWarning, stacklevel=3)


# -- results -----------------------------------------------------------------

def _normalize(num, den):
    den = np.asarray(den, dtype=float)
    if np.any(np.abs(den) < 1e-300) or np.any(np.abs(den) < 1e-12 * np.max(np.abs(num), initial=0)):
        warnings.warn("self-damping is (close to) zero; normalized cross-talk is ill-conditioned",
                      IllConditionedWarning, stacklevel=3)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.asarray(num) / den


@dataclass(frozen=True)
class DampingMatrix:
    """Coefficient matrix ``Gamma_jl`` and Lamb-shift terms for one separation.

    Attributes
    ----------
    gamma : ndarray, shape (4, 4)
        Rates in the ``(a1, a1^dag, a2, a2^dag)`` basis; only the diagonal and
        the ``13``/``24`` pairs are non-zero.
    delta_omega : float
        Frequency shift of each probe.
    gamma_coh : float
        Induced coherent probe-probe coupling.
    time : float
        Evaluation time, ``inf`` for the long-time limit.
    method : str
    """

    gamma: np.ndarray
    delta_omega: float = 0.0
    gamma_coh: float = 0.0
    time: float = math.inf
    method: str = MANIFOLD

    @classmethod
    def from_rates(cls, g11, g13, g22=0.0, g24=0.0, delta_omega=0.0, gamma_coh=0.0,
                   time=math.inf, method=MANIFOLD):
        G = np.zeros((4, 4))
        G[0, 0] = G[2, 2] = g11
        G[1, 1] = G[3, 3] = g22
        G[0, 2] = G[2, 0] = g13
        G[1, 3] = G[3, 1] = g24
        return cls(G, float(delta_omega), float(gamma_coh), float(time), method)

    @property
    def gamma11(self):
        return float(self.gamma[0, 0])

    @property
    def gamma22(self):
        return float(self.gamma[1, 1])

    @property
    def gamma13(self):
        return float(self.gamma[0, 2])

    @property
    def gamma24(self):
        return float(self.gamma[1, 3])

    @property
    def normalized(self):
        """``Gamma13 / Gamma11``."""
        return float(_normalize(self.gamma13, self.gamma11))

    @property
    def lamb_shift(self):
        return self.delta_omega, self.gamma_coh

    def to_dict(self):
        return {"gamma11": self.gamma11, "gamma22": self.gamma22, "gamma13": self.gamma13,
                "gamma24": self.gamma24, "delta_omega": self.delta_omega,
                "gamma_coh": self.gamma_coh, "time": self.time, "method": self.method}


@dataclass(frozen=True)
class CrossTalkProfile:
    """Coefficients for one probe pair geometry evaluated at many separations."""

    separations: np.ndarray
    gamma11: float
    gamma22: float
    gamma13: np.ndarray
    gamma24: np.ndarray
    delta_omega: float
    gamma_coh: np.ndarray
    time: float
    method: str

    @property
    def normalized(self):
        """``Gamma13(r) / Gamma11`` for every separation."""
        return _normalize(self.gamma13, self.gamma11)

    def __len__(self):
        return self.separations.shape[0]

    def matrix(self, i):
        return DampingMatrix.from_rates(self.gamma11, self.gamma13[i], self.gamma22,
                                        self.gamma24[i], self.delta_omega, self.gamma_coh[i],
                                        self.time, self.method)


# -- grid sizing -------------------------------------------------------------

def resonance_speed(spec, omega):
    """Largest ``|grad omega|`` on the resonant manifold (0 if off-band)."""
    if not spec.band_min < omega < spec.band_max:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = resonant_manifold(spec, omega, resolution=128)
    return float(np.max(m.speed))


def _r_max(separations):
    return float(np.max(np.linalg.norm(separations, axis=-1), initial=0.0))


def suggest_grid(spec, omega, t, r_max=0.0):
    """Nodes per axis that resolve the sinc kernel and avoid real-space aliasing.

    The grid must resolve a frequency window of ``1/t`` around resonance
    (``v_res * dk * t <= pi/4``, twice the enforced bound) and its real-space
    period must exceed the light cone ``v_max * t`` plus the largest
    separation.
    """
    L = 2 * ZoneGrid(spec, 2).spacing  # zone width along a grid axis
    v_res = resonance_speed(spec, omega)
    v_max = max_group_velocity(spec, 64)
    n_res = 4.0 * v_res * t * L / np.pi
    n_cone = 1.25 * v_max * t + 2.0 * r_max + 16
    n = int(math.ceil(max(n_res, n_cone, 32)))
    return n + (-n) % 8


def check_resolution(grid, omega, t):
    """Raise :class:`ResolutionError` if the sinc kernel is not resolved."""
    v_res = resonance_speed(grid.spec, omega)
    if v_res * grid.spacing * t > np.pi / 2:
        raise ResolutionError(
            f"grid with {grid.n} nodes per axis cannot resolve t={t} at Omega={omega}",
            suggested=suggest_grid(grid.spec, omega, t))


# -- finite time -------------------------------------------------------------

def _finite_kernel(spec, probes, t, thermal):
    pref = (2 * np.pi) ** (-spec.dimension)
    n_T = probes.temperature

    def kernel(k):
        w = dispersion(spec, k, check=False)
        base = pref * form_factor(probes.contact, k) / w
        delta = probes.omega - w
        sinc = t * np.sinc(t * delta / np.pi)
        lamb = t * np.sin(0.5 * t * delta) * np.sinc(t * delta / (2 * np.pi))
        chans = [base * thermal_factor(w, n_T) * sinc, base * lamb]
        if thermal:
            chans.append(base * bose(w, n_T) * sinc)
        return np.stack(chans)

    return kernel


def crosstalk_finite_time(spec, probes, t, separations=None, resolution=None, threads=None):
    """Finite-time coefficients at many separations.

    Parameters
    ----------
    spec : LatticeSpec
    probes : ProbeConfig
    t : float
        Time since the coupling was switched on.
    separations : array_like, shape (R, D), optional
        Defaults to the probes' own separation.
    resolution : int, optional
        Grid nodes per axis; chosen by :func:`suggest_grid` when omitted.
    threads : int, optional

    Returns
    -------
    CrossTalkProfile

    Raises
    ------
    ResolutionError
        If an explicit grid is too coarse for ``t``.
    """
    if not t >= 0:
        raise DomainError("time must be non-negative")
    check_weak_coupling(spec, probes)
    if separations is None:
        separations = probes.separation_for(spec)[None, :]
    r = as_separations(spec, separations)
    zeros = np.zeros(r.shape[0])
    if t == 0:
        return CrossTalkProfile(r, 0.0, 0.0, zeros, zeros.copy(), 0.0, zeros.copy(),
                                0.0, FINITE_TIME)
    n = resolution or suggest_grid(spec, probes.omega, t, _r_max(r))
    grid = ZoneGrid(spec, int(n))
    check_resolution(grid, probes.omega, t)
    thermal = probes.temperature > 0
    pts = np.vstack([np.zeros((1, spec.dimension)), r])
    sums = grid.fourier_sum(_finite_kernel(spec, probes, t, thermal), pts, threads)
    lam2 = probes.coupling**2
    emit = lam2 / (2 * probes.omega) * sums[0]
    shift = -lam2 / (4 * probes.omega) * sums[1]
    absorb = lam2 / (2 * probes.omega) * sums[2] if thermal else np.zeros_like(emit)
    return CrossTalkProfile(r, float(emit[0]), float(absorb[0]), emit[1:], absorb[1:],
                            float(shift[0]), shift[1:], float(t), FINITE_TIME)


def gamma_finite_time(spec, probes, t, resolution=None, threads=None):
    """Coefficient matrix at time ``t`` for the probes' separation."""
    return crosstalk_finite_time(spec, probes, t, None, resolution, threads).matrix(0)


def lamb_shift(spec, probes, t, resolution=None, threads=None):
    """``(delta_omega, gamma_coh)`` at time ``t``."""
    m = gamma_finite_time(spec, probes, t, resolution, threads)
    return m.delta_omega, m.gamma_coh


# -- long time ---------------------------------------------------------------

def _check_band(spec, omega):
    tol = 1e-12 * spec.omega0
    if omega < spec.band_min - tol or omega > spec.band_max + tol:
        raise OutOfBandError(f"Omega={omega} outside the band [{spec.band_min}, {spec.band_max}]")


def _long_time_prefactor(spec, probes):
    lam2 = probes.coupling**2
    return np.pi * lam2 / (2 * probes.omega**2 * (2 * np.pi) ** spec.dimension)


def _manifold_sums(spec, probes, r, resolution):
    m = resonant_manifold(spec, probes.omega, resolution)
    pts, w = m.expand()
    w = w * form_factor(probes.contact, pts)
    phase = np.cos(pts @ r.T)  # (M, R)
    return np.array([math.fsum(w)] + [math.fsum(col) for col in (w[:, None] * phase).T])


def _broadening(spec, k, h):
    v = np.linalg.norm(group_velocity(spec, k, check=False), axis=-1)
    return _BROADENING * np.sqrt((v * h) ** 2 + (0.5 * spec.curvature_scale * h * h) ** 2)


def _broadened_sums(spec, probes, r, resolution, threads):
    grid = ZoneGrid(spec, int(resolution))
    h = grid.spacing

    def kernel(k):
        w = dispersion(spec, k, check=False)
        eta = _broadening(spec, k, h)
        d = (probes.omega - w) / eta
        delta = np.exp(-0.5 * d * d) / (np.sqrt(2 * np.pi) * eta)
        return (delta * form_factor(probes.contact, k))[None]

    pts = np.vstack([np.zeros((1, spec.dimension)), r])
    return grid.fourier_sum(kernel, pts, threads)[0]


def default_long_time_resolution(spec, method, r_max):
    """Default grid (or contour) resolution for the long-time estimators."""
    if method == MANIFOLD:
        return int(max(512, 32 * r_max)) if spec.dimension == 2 else int(max(96, 24 * r_max))
    base = {1: 8192, 2: 512, 3: 96}[spec.dimension]
    return int(max(base, 160 * r_max))


def lamb_shift_long_time(spec, probes, separations, resolution=None, threads=None):
    """Principal-value Lamb shift with a Lorentzian-regularized pole.

    Returns ``(delta_omega, gamma_coh)`` with ``gamma_coh`` an array over
    separations.
    """
    r = as_separations(spec, separations)
    n = resolution or {1: 65536, 2: 1024, 3: 128}[spec.dimension]
    grid = ZoneGrid(spec, int(n))
    h = grid.spacing
    pref = (2 * np.pi) ** (-spec.dimension)

    def kernel(k):
        w = dispersion(spec, k, check=False)
        eta = _broadening(spec, k, h)
        delta = probes.omega - w
        return (pref * form_factor(probes.contact, k) / w * delta / (delta**2 + eta**2))[None]

    pts = np.vstack([np.zeros((1, spec.dimension)), r])
    s = -probes.coupling**2 / (4 * probes.omega) * grid.fourier_sum(kernel, pts, threads)[0]
    return float(s[0]), s[1:]


def crosstalk_long_time(spec, probes, separations=None, method=MANIFOLD, resolution=None,
                        lamb=True, threads=None):
    """Long-time coefficients at many separations.

    Parameters
    ----------
    method : {"manifold", "broadened_grid"}
        Resonant-manifold line/surface integral, or a Gaussian-broadened
        delta (width three times the local grid frequency spacing) on the
        uniform zone grid.
    resolution : int, optional
        Contour grid (manifold) or zone grid (broadened) resolution.
    lamb : bool
        Also compute the principal-value Lamb shift.

    Raises
    ------
    OutOfBandError
        If ``Omega`` lies outside the band.
    """
    _check_band(spec, probes.omega)
    check_weak_coupling(spec, probes)
    if separations is None:
        separations = probes.separation_for(spec)[None, :]
    r = as_separations(spec, separations)
    res = resolution or default_long_time_resolution(spec, method, _r_max(r))
    if method == MANIFOLD:
        sums = _manifold_sums(spec, probes, r, res)
    elif method == BROADENED_GRID:
        sums = _broadened_sums(spec, probes, r, res, threads)
    else:
        raise DomainError(f"unknown long-time method {method!r}")
    base = _long_time_prefactor(spec, probes) * sums
    n = float(bose(probes.omega, probes.temperature))
    emit, absorb = (n + 1) * base, n * base
    if lamb:
        shift, coh = lamb_shift_long_time(spec, probes, r, threads=threads)
    else:
        shift, coh = 0.0, np.zeros(r.shape[0])
    return CrossTalkProfile(r, float(emit[0]), float(absorb[0]), emit[1:], absorb[1:],
                            shift, coh, math.inf, method)


def gamma_long_time(spec, probes, method=MANIFOLD, resolution=None, lamb=True, threads=None):
    """Long-time coefficient matrix for the probes' separation."""
    return crosstalk_long_time(spec, probes, None, method, resolution, lamb, threads).matrix(0)


# -- closed forms ------------------------------------------------------------

def resonant_wavenumber(spec, omega):
    """``|k_Omega|`` along a lattice axis of a cubic crystal."""
    if spec.symmetry != CUBIC:
        raise DomainError("axis wavenumber is defined for cubic lattices")
    s = (omega**2 - spec.omega0**2) / (4 * spec.dimension * spec.g)
    if not 0 <= s <= 1:
        raise OutOfBandError(f"Omega={omega} has no resonant wave vector along a lattice axis")
    return float(2 * np.arcsin(np.sqrt(s)))


def analytic_isotropic(dimension, k_mag, r_mag):
    """Normalized cross-talk for a spherical resonant manifold.

    ``cos(k r)`` in 1D, ``J0(k r)`` in 2D and ``sin(k r) / (k r)`` in 3D.
    """
    x = np.asarray(k_mag, dtype=float) * np.asarray(r_mag, dtype=float)
    if dimension == 1:
        return np.cos(x)
    if dimension == 2:
        return j0(x)
    if dimension == 3:
        return np.sinc(x / np.pi)
    raise DomainError("dimension must be 1, 2 or 3")


def _diag_h(s):
    q = np.sqrt(s)
    return q * np.sin(np.pi * q)


def _diag_dh(s):
    q = np.sqrt(s)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = (np.sin(np.pi * q) + np.pi * q * np.cos(np.pi * q)) / (2 * q)
    return np.where(q < 1e-8, np.pi, val)


def analytic_special_2d(case, r):
    """Closed-form normalized cross-talk on the square lattice.

    ``"diagonal"`` (square resonant contour through the zone-edge midpoints):
    ``(x sin(pi x) - y sin(pi y)) / (pi (x^2 - y^2))``, continued to its limit
    on ``x^2 = y^2``.  ``"eggcrate"`` (small contour around the zone corner):
    ``cos(pi x) cos(pi y)``.

    Parameters
    ----------
    case : {"diagonal", "eggcrate"}
    r : array_like, shape (..., 2)
    """
    r = np.asarray(r, dtype=float)
    x, y = r[..., 0], r[..., 1]
    if case == "eggcrate":
        return np.cos(np.pi * x) * np.cos(np.pi * y)
    if case != "diagonal":
        raise DomainError(f"unknown case {case!r}")
    # divided difference of h(s) = sqrt(s) sin(pi sqrt(s)) at s = x^2, y^2
    s1, s2 = x * x, y * y
    near = np.abs(s1 - s2) < 1e-4
    with np.errstate(invalid="ignore", divide="ignore"):
        dd = (_diag_h(s1) - _diag_h(s2)) / (s1 - s2)
    dd = np.where(near, _diag_dh(0.5 * (s1 + s2)), dd)
    return dd / np.pi
