"""Equal-time spatial correlations of the crystal displacement field.

``C(R) = <Q_r Q_{r+R}> = (2 pi)^-D int d^Dk cos(k.R) coth(omega_k / 2T) / (2 omega_k)``

which reduces to the vacuum term ``1 / (2 omega_k)`` at ``T = 0``.  The
integrand is smooth and periodic on a gapped band, so the uniform zone grid
converges geometrically; every evaluation is checked against a grid of
double resolution.
"""

from dataclasses import dataclass

import numpy as np

from crosstalk._contour import marching_squares
from crosstalk.errors import DomainError, ResolutionError
from crosstalk.lattice import dispersion
from crosstalk.quadrature import ZoneGrid, as_separations

REFINE_TOL = 1e-3
_MAX_NODES = {1: 1 << 16, 2: 2048, 3: 256}


def occupation_weight(omega, temperature):
    """``n(omega) + 1/2 = coth(omega / 2T) / 2``."""
    omega = np.asarray(omega, dtype=float)
    if temperature <= 0:
        return np.full_like(omega, 0.5)
    return 0.5 / np.tanh(omega / (2 * temperature))


def _grid_values(spec, r, temperature, n, threads):
    pref = (2 * np.pi) ** (-spec.dimension)

    def kernel(k):
        w = dispersion(spec, k, check=False)
        return (pref * occupation_weight(w, temperature) / w)[None]

    pts = np.vstack([np.zeros((1, spec.dimension)), r])
    vals = ZoneGrid(spec, n).fourier_sum(kernel, pts, threads)[0]
    return vals[0], vals[1:]


def _start_nodes(spec, r):
    r_max = float(np.max(np.abs(r), initial=0.0))
    return int(max(32, 4 * r_max + 16))


@dataclass(frozen=True)
class CorrelationProfile:
    """Correlation values at a list of separations.

    Attributes
    ----------
    separations : ndarray, shape (R, D)
    raw : ndarray, shape (R,)
        ``C(R)`` in units of the vacuum displacement variance.
    c0 : float
        ``C(0)``.
    temperature : float
    resolution : int
        Grid nodes per axis of the accepted evaluation.
    """

    separations: np.ndarray
    raw: np.ndarray
    c0: float
    temperature: float
    resolution: int

    @property
    def values(self):
        """``C(R) / C(0)``."""
        return self.raw / self.c0


def correlation(spec, separations, temperature=0.0, resolution=None, threads=None):
    """Correlation function at the given separations.

    Parameters
    ----------
    spec : LatticeSpec
    separations : array_like, shape (R, D)
        Lattice vectors.
    temperature : float
    resolution : int, optional
        Grid nodes per axis.  When given, the result is compared with a grid
        of twice the resolution; otherwise the grid is refined automatically.

    Raises
    ------
    ResolutionError
        If doubling the grid changes some value by more than 0.1 % of ``C(0)``.
    """
    if not temperature >= 0:
        raise DomainError("temperature must be non-negative")
    r = as_separations(spec, separations)
    n = int(resolution) if resolution else _start_nodes(spec, r)
    c0, vals = _grid_values(spec, r, temperature, n, threads)
    while True:
        c0_fine, fine = _grid_values(spec, r, temperature, 2 * n, threads)
        change = np.max(np.abs(np.append(fine, c0_fine) - np.append(vals, c0)), initial=0.0)
        if change <= REFINE_TOL * abs(c0_fine):
            return CorrelationProfile(r, fine, float(c0_fine), float(temperature), 2 * n)
        if resolution or 4 * n > _MAX_NODES[spec.dimension]:
            raise ResolutionError(f"correlation not converged at {2 * n} nodes per axis "
                                  f"(change {change / abs(c0_fine):.2e})", suggested=4 * n)
        n, c0, vals = 2 * n, c0_fine, fine


@dataclass(frozen=True)
class CorrelationMap:
    """Normalized correlation on a window of lattice sites in a 2D crystal.

    ``values[i, j]`` belongs to the site ``m[i] * v1 + m[j] * v2``; ``points``
    holds the Cartesian coordinates.  ``contour`` is a list of Cartesian
    segments ``(p, q)`` of the level set ``C / C(0) = level``.
    """

    m: np.ndarray
    values: np.ndarray
    points: np.ndarray
    contour: tuple
    level: float
    temperature: float
    resolution: int


def correlation_map(spec, extent, temperature=0.0, level=0.01, resolution=None, threads=None):
    """Normalized correlation over the sites with lattice coordinates in ``[-extent, extent]^2``.

    Works for cubic and triangular symmetry; the iso-level contour is traced
    in lattice coordinates and mapped to Cartesian space.
    """
    if spec.dimension != 2:
        raise DomainError("correlation maps need a 2D crystal")
    extent = int(extent)
    if extent < 0:
        raise DomainError("extent must be non-negative")
    m = np.arange(-extent, extent + 1)
    mm = np.stack(np.meshgrid(m, m, indexing="ij"), -1).reshape(-1, 2).astype(float)
    pts = mm @ spec.direct_basis
    prof = correlation(spec, pts, temperature, resolution, threads)
    vals = prof.values.reshape(m.size, m.size)
    if m.size > 1:
        p, q = marching_squares(vals - level)
        p, q = (p - extent) @ spec.direct_basis, (q - extent) @ spec.direct_basis
    else:
        p = q = np.empty((0, 2))
    return CorrelationMap(m, vals, pts.reshape(m.size, m.size, 2), (p, q), float(level),
                          float(temperature), prof.resolution)


def axis_profile(spec, x_max, temperature=0.0, resolution=None, threads=None):
    """Normalized correlation along the first lattice vector, ``x = 0 .. x_max``."""
    x = np.arange(int(x_max) + 1, dtype=float)
    r = np.outer(x, spec.direct_basis[0])
    return correlation(spec, r, temperature, resolution, threads)


def correlation_length(spec, temperature=0.0, x_max=50, resolution=None):
    """Distance along a lattice axis where ``|C| / C(0)`` first drops below ``1/e``.

    Linear interpolation between neighbouring sites.
    """
    vals = np.abs(axis_profile(spec, x_max, temperature, resolution).values)
    target = np.exp(-1.0)
    below = np.nonzero(vals < target)[0]
    if below.size == 0:
        raise DomainError(f"correlation stays above 1/e up to x={x_max}")
    i = int(below[0])
    return float(i - 1 + (vals[i - 1] - target) / (vals[i - 1] - vals[i]))


def decay_distance(spec, level=0.1, temperature=0.0, x_max=50, resolution=None):
    """Smallest site offset beyond which ``|C| / C(0)`` stays below ``level`` (up to ``x_max``)."""
    vals = np.abs(axis_profile(spec, x_max, temperature, resolution).values)
    above = np.nonzero(vals >= level)[0]
    return int(above[-1] + 1)


def contour_radius(cmap):
    """Largest distance from the origin reached by the map's iso-level contour."""
    p, q = cmap.contour
    if p.shape[0] == 0:
        return 0.0
    return float(np.max(np.linalg.norm(np.vstack([p, q]), axis=1)))

