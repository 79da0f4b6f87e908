"""Finite harmonic chains with static on-site disorder.

Without translation invariance the bath modes are the eigenvectors ``f_{n,k}``
of the chain's dynamical matrix, and the cross-damping between sites ``n``
and ``n'`` is a sum over modes of ``f_{n,k} f_{n',k}`` times the finite-time
kernel.
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, eigh, eigh_tridiagonal

from crosstalk.damping import ProbeConfig, bose, crosstalk_finite_time
from crosstalk.errors import (DomainError, EigensolverError, IllConditionedWarning,
                              WeakCouplingWarning)
from crosstalk.lattice import LatticeSpec, dispersion, resonant_manifold

FIXED = "fixed"
PERIODIC = "periodic"
ONE_SIDED = "one_sided"
SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class DisorderedChain:
    """Chain of ``n_sites`` oscillators with on-site frequencies squared ``omega0^2 + w_n``.

    ``w_n`` is drawn i.i.d. uniform on ``[0, delta]`` (one-sided law) or
    ``[-delta/2, delta/2]`` (symmetric law) from
    ``numpy.random.default_rng(seed)``.  The same seed gives the same unit
    draws for every ``delta``, so realizations at different disorder
    strengths are scaled copies of each other.
    """

    n_sites: int
    omega0: float
    g: float
    delta: float
    seed: int
    boundary: str
    onsite: np.ndarray = field(repr=False)
    law: str = ONE_SIDED

    @property
    def diagonal(self):
        return self.omega0**2 + self.onsite + 2 * self.g

    @property
    def off_diagonal(self):
        return np.full(self.n_sites - 1, -self.g)

    def matrix(self):
        """Dense dynamical matrix."""
        M = np.diag(self.diagonal) + np.diag(self.off_diagonal, 1) + np.diag(self.off_diagonal, -1)
        if self.boundary == PERIODIC and self.n_sites > 2:
            M[0, -1] = M[-1, 0] = -self.g
        elif self.boundary == PERIODIC:
            M[0, 1] = M[1, 0] = -2 * self.g
        return M


def build_chain(n_sites, omega0=1.0, g=0.75, delta=0.0, seed=0, boundary=FIXED, law=ONE_SIDED):
    """Sample a disordered chain.

    Parameters
    ----------
    n_sites : int
        At least 2.
    omega0, g : float
        Clean on-site frequency and nearest-neighbour coupling.
    delta : float
        Width of the uniform disorder in frequency squared.
    seed : int
    boundary : {"fixed", "periodic"}
    law : {"one_sided", "symmetric"}
    """
    if n_sites < 2:
        raise DomainError("a chain needs at least 2 sites")
    if boundary not in (FIXED, PERIODIC):
        raise DomainError(f"unknown boundary {boundary!r}")
    if not omega0 > 0 or not g >= 0 or not delta >= 0:
        raise DomainError("need omega0 > 0, g >= 0 and delta >= 0")
    if law not in (ONE_SIDED, SYMMETRIC):
        raise DomainError(f"unknown disorder law {law!r}")
    if law == SYMMETRIC and delta / 2 >= omega0**2:
        raise DomainError("symmetric disorder wider than 2 omega0^2 makes the chain unstable")
    u = np.random.default_rng(seed).random(n_sites)
    if law == SYMMETRIC:
        u = u - 0.5
    return DisorderedChain(int(n_sites), float(omega0), float(g), float(delta), int(seed),
                           boundary, delta * u, law)


@dataclass(frozen=True)
class EigenmodeBasis:
    """Eigenfrequencies (ascending) and real orthonormal mode profiles (columns)."""

    frequencies: np.ndarray
    modes: np.ndarray

    @property
    def n_sites(self):
        return self.modes.shape[0]

    def residuals(self):
        """Orthonormality and completeness errors (max abs entry)."""
        eye = np.eye(self.n_sites)
        ortho = np.max(np.abs(self.modes.T @ self.modes - eye))
        complete = np.max(np.abs(self.modes @ self.modes.T - eye))
        return float(ortho), float(complete)


def diagonalize(chain):
    """Full eigendecomposition of the chain's dynamical matrix.

    Raises
    ------
    EigensolverError
        If LAPACK fails to converge or returns a negative eigenvalue.
    """
    try:
        if chain.boundary == FIXED:
            evals, evecs = eigh_tridiagonal(chain.diagonal, chain.off_diagonal)
        else:
            evals, evecs = eigh(chain.matrix())
    except LinAlgError as exc:
        d = chain.diagonal
        raise EigensolverError(f"eigensolver failed for N={chain.n_sites}, diagonal range "
                               f"[{d.min():.6g}, {d.max():.6g}], g={chain.g}: {exc}") from exc
    if evals[0] <= 0:
        raise EigensolverError(f"non-positive eigenvalue {evals[0]:.3g}")
    return EigenmodeBasis(np.sqrt(evals), evecs)


@dataclass(frozen=True)
class ChainCrossTalk:
    """Cross-damping from a reference site ``n0`` to sites ``n0 + x``."""

    n0: int
    x: np.ndarray
    gamma13: np.ndarray
    gamma11: float

    @property
    def normalized(self):
        return self.gamma13 / self.gamma11


def mode_kernel(basis, omega, t, coupling=1.0, temperature=0.0, weight=None):
    """Per-mode factor ``(lambda^2/2 Omega) (N_k+1) h(omega_k) sin(t Delta)/Delta``.

    ``weight`` is the mode weight ``h(omega_k)``; the harmonic chain uses
    ``1 / omega_k``.
    """
    w = basis.frequencies
    h = 1.0 / w if weight is None else np.asarray(weight(w), dtype=float)
    sinc = t * np.sinc(t * (w - omega) / np.pi)
    return coupling**2 / (2 * omega) * (bose(w, temperature) + 1) * h * sinc


def self_damping(basis, omega, t, coupling=1.0, temperature=0.0, weight=None):
    """``Gamma11`` at every site."""
    K = mode_kernel(basis, omega, t, coupling, temperature, weight)
    return (basis.modes**2) @ K


def cross_talk_disordered(basis, omega, n0, x, t, coupling=1.0, temperature=0.0, weight=None):
    """Cross-damping between site ``n0`` and sites ``n0 + x`` at time ``t``.

    Parameters
    ----------
    basis : EigenmodeBasis
    omega : float
        Probe frequency.
    n0 : int
    x : array_like of int
        Offsets; every ``n0 + x`` must lie in the chain.
    t : float
        Positive time.
    weight : callable, optional
        Mode weight replacing ``1 / omega_k`` for generic exchange baths.

    Returns
    -------
    ChainCrossTalk
    """
    if not t > 0:
        raise DomainError("time must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=int))
    sites = n0 + x
    if not 0 <= n0 < basis.n_sites or np.any(sites < 0) or np.any(sites >= basis.n_sites):
        raise DomainError("sites outside the chain")
    w = basis.frequencies
    if omega < w[0] - 5 / t or omega > w[-1] + 5 / t:
        warnings.warn(f"Omega={omega} lies outside the chain spectrum [{w[0]:.6g}, {w[-1]:.6g}]; "
                      "self-damping is nearly zero", IllConditionedWarning, stacklevel=2)
    K = mode_kernel(basis, omega, t, coupling, temperature, weight)
    V = basis.modes
    # elementwise product first so that swapping the two sites is exact
    g13 = np.sum((V[n0][None, :] * V[sites]) * K[None, :], axis=1)
    g11 = float(np.sum((V[n0] * V[n0]) * K))
    return ChainCrossTalk(int(n0), x, g13, g11)


# -- ensembles ---------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleParams:
    """Chain and probe parameters shared by every realization.

    ``time`` must satisfy ``time * v_res < n_sites`` so the resonant
    wave packet has not crossed the chain.
    """

    n_sites: int = 2500
    omega0: float = 1.0
    g: float = 0.75
    delta: float = 0.1
    omega: float = None
    time: float = 1e4
    boundary: str = FIXED
    law: str = ONE_SIDED
    coupling: float = 1.0
    seed: int = 0
    min_self_fraction: float = 0.25

    def resolved_omega(self):
        if self.omega is not None:
            return float(self.omega)
        return float(dispersion(LatticeSpec(1, omega0=self.omega0, g=self.g), 0.164))


def clean_self_damping(params):
    """Long-time self-damping of the infinite clean chain (``None`` off-band)."""
    spec = LatticeSpec(1, omega0=params.omega0, g=params.g)
    omega = params.resolved_omega()
    if not spec.band_min < omega < spec.band_max:
        return None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = resonant_manifold(spec, omega)
    # pi * delta(omega_k - Omega) / omega_k integrated over k / (2 pi)
    return params.coupling**2 / (2 * omega) * np.sum(m.expand()[1]) / (2 * omega)


def _check_time(params):
    spec = LatticeSpec(1, omega0=params.omega0, g=params.g)
    omega = params.resolved_omega()
    if spec.band_min < omega < spec.band_max:
        v = float(np.max(resonant_manifold(spec, omega).speed))
        if params.time * v >= params.n_sites:
            raise DomainError(f"t={params.time} lets the resonant packet (speed {v:.3g}) "
                              f"cross the {params.n_sites}-site chain")


def choose_reference_site(self_rates, n_sites, x_max, rng, threshold=None):
    """Pick ``n0`` uniformly among central sites with usable self-damping.

    Sites within ``n_sites / 10`` of either end (or too close to the right
    end for the largest offset) are excluded.  When ``threshold`` is given,
    only sites whose self-damping reaches it qualify; if none does the site
    with the largest self-damping is returned.
    """
    margin = int(math.ceil(n_sites / 10))
    hi = n_sites - margin - int(x_max)
    if hi <= margin:
        raise DomainError("chain too short for the requested offsets")
    cand = np.arange(margin, hi)
    if threshold is not None:
        ok = cand[self_rates[cand] >= threshold]
        if ok.size == 0:
            warnings.warn("no site reaches the self-damping threshold; using the largest",
                          IllConditionedWarning, stacklevel=2)
            return int(cand[np.argmax(self_rates[cand])])
        cand = ok
    return int(rng.choice(cand))


def realization(params, index, x):
    """Normalized cross-talk for realization ``index`` (seed ``params.seed + index``)."""
    omega = params.resolved_omega()
    seed = params.seed + index
    chain = build_chain(params.n_sites, params.omega0, params.g, params.delta, seed,
                        params.boundary, params.law)
    basis = diagonalize(chain)
    rates = self_damping(basis, omega, params.time, params.coupling)
    clean = clean_self_damping(params)
    threshold = None if clean is None else params.min_self_fraction * clean
    rng = np.random.default_rng([seed, 1])
    n0 = choose_reference_site(rates, params.n_sites, np.max(x, initial=0), rng, threshold)
    return cross_talk_disordered(basis, omega, n0, x, params.time, params.coupling)


@dataclass(frozen=True)
class EnsembleEnvelope:
    """Statistics of ``|normalized cross-talk|`` over realizations."""

    x: np.ndarray
    samples: np.ndarray  # (n_realizations, len(x))

    @property
    def mean(self):
        return self.samples.mean(axis=0)

    @property
    def median(self):
        return np.median(self.samples, axis=0)

    def quantile(self, q):
        return np.quantile(self.samples, q, axis=0)

    @property
    def q10(self):
        return self.quantile(0.1)

    @property
    def q90(self):
        return self.quantile(0.9)


def ensemble_envelope(params, n_realizations, x_list, workers=1):
    """Ensemble of ``|Gamma_{n0}(x)|`` over seeds and reference sites.

    With ``delta == 0`` every realization equals the infinite clean crystal,
    so the finite-time crystal result is used directly and the ensemble has
    zero spread.

    Parameters
    ----------
    params : EnsembleParams
    n_realizations : int
    x_list : array_like of int
    workers : int
        Realizations are independent; each is fully determined by its seed,
        so the result does not depend on scheduling.
    """
    if n_realizations < 1:
        raise DomainError("need at least one realization")
    x = np.atleast_1d(np.asarray(x_list, dtype=int))
    _check_time(params)
    if params.delta == 0:
        spec = LatticeSpec(1, omega0=params.omega0, g=params.g)
        probes = ProbeConfig(params.resolved_omega(), coupling=params.coupling)
        with warnings.catch_warnings():
            # only the normalized profile is used, which does not depend on the coupling
            warnings.simplefilter("ignore", WeakCouplingWarning)
            row = np.abs(crosstalk_finite_time(spec, probes, params.time, x[:, None]).normalized)
        return EnsembleEnvelope(x, np.tile(row, (n_realizations, 1)))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IllConditionedWarning)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(lambda i: realization(params, i, x).normalized,
                                     range(n_realizations)))
        else:
            rows = [realization(params, i, x).normalized for i in range(n_realizations)]
    n_bad = sum(issubclass(w.category, IllConditionedWarning) for w in caught)
    if n_bad:
        warnings.warn(f"{n_bad} of {n_realizations} realizations raised ill-conditioning "
                      "warnings (Omega off the chain spectrum or weak self-damping)",
                      IllConditionedWarning, stacklevel=2)
    return EnsembleEnvelope(x, np.abs(np.array(rows)))


def bootstrap_mean_difference(a, b, n_boot=2000, seed=0):
    """Bootstrap samples of ``mean(b) - mean(a)`` (independent resampling)."""
    rng = np.random.default_rng(seed)
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    ia = rng.integers(0, a.size, (n_boot, a.size))
    ib = rng.integers(0, b.size, (n_boot, b.size))
    return b[ib].mean(axis=1) - a[ia].mean(axis=1)


def is_non_increasing(samples, confidence=0.95, n_boot=2000, seed=0):
    """Whether consecutive sample means are non-increasing at the given confidence.

    For each consecutive pair the bootstrap quantile ``confidence`` of
    ``mean(next) - mean(prev)`` must not exceed zero.
    """
    for i, (a, b) in enumerate(zip(samples[:-1], samples[1:])):
        diff = bootstrap_mean_difference(a, b, n_boot, seed + i)
        if np.quantile(diff, confidence) > 0:
            return False
    return True
