"""Crystal geometry: dispersion relations, Brillouin zones and iso-frequency manifolds.

Units: hbar = m = a = 1, so wave vectors are dimensionless and frequencies are
angular frequencies.  Two Bravais lattices are supported: hypercubic in
D = 1, 2, 3 and the 2D triangular lattice.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize

from crosstalk._contour import marching_squares, marching_tetrahedra
from crosstalk.errors import DegenerateManifoldWarning, DomainError, OutOfBandError

CUBIC = "cubic"
TRIANGULAR = "triangular"

SPEED_FLOOR = 1e-6
_SQRT3 = np.sqrt(3.0)
# gradients of the three bond phases l1, l2, l3 of the triangular lattice
_TRI_BONDS = np.array([[1.0, 0.0], [0.5, _SQRT3 / 2], [0.5, -_SQRT3 / 2]])


@dataclass(frozen=True)
class LatticeSpec:
    """Harmonic crystal with nearest-neighbour coupling and one polarization.

    Parameters
    ----------
    dimension : int
        1, 2 or 3 (triangular requires 2).
    symmetry : {"cubic", "triangular"}
    omega0 : float
        On-site frequency; the band bottom.
    g : float
        Nearest-neighbour coupling (frequency squared).
    """

    dimension: int
    symmetry: str = CUBIC
    omega0: float = 1.0
    g: float = 0.0

    def __post_init__(self):
        if self.symmetry not in (CUBIC, TRIANGULAR):
            raise DomainError(f"unknown symmetry {self.symmetry!r}")
        if self.symmetry == CUBIC and self.dimension not in (1, 2, 3):
            raise DomainError("cubic lattices need dimension 1, 2 or 3")
        if self.symmetry == TRIANGULAR and self.dimension != 2:
            raise DomainError("the triangular lattice is two-dimensional")
        if not self.omega0 > 0:
            raise DomainError("omega0 must be positive")
        if not self.g >= 0:
            raise DomainError("g must be non-negative")

    @property
    def band_min(self):
        return float(self.omega0)

    @property
    def band_max(self):
        if self.symmetry == CUBIC:
            return float(np.sqrt(self.omega0**2 + 4 * self.dimension**2 * self.g))
        return float(np.sqrt(self.omega0**2 + 18 * self.g))

    @property
    def direct_basis(self):
        """Primitive lattice vectors as rows."""
        if self.symmetry == CUBIC:
            return np.eye(self.dimension)
        return np.array([[1.0, 0.0], [0.5, _SQRT3 / 2]])

    @property
    def reciprocal_basis(self):
        """Reciprocal lattice vectors as rows, ``b_i . v_j = 2 pi delta_ij``."""
        return 2 * np.pi * np.linalg.inv(self.direct_basis).T

    @property
    def cell_volume(self):
        """Measure of the Brillouin zone."""
        return float(abs(np.linalg.det(self.reciprocal_basis)))

    @property
    def curvature_scale(self):
        """Order of magnitude of the band curvature, used to floor broadening widths."""
        if self.symmetry == CUBIC:
            return self.dimension * self.g / self.omega0
        return 3 * self.g / self.omega0


def _as_k(spec, k):
    k = np.asarray(k, dtype=float)
    if spec.dimension == 1 and (k.ndim == 0 or k.shape[-1] != 1):
        k = k[..., None]
    if k.shape[-1] != spec.dimension:
        raise DomainError(f"wave vectors must have {spec.dimension} components, got shape {k.shape}")
    return k


def in_domain(spec, k, atol=1e-9):
    """Whether each wave vector lies in the (closed) Wigner-Seitz cell."""
    k = _as_k(spec, k)
    if spec.symmetry == CUBIC:
        return np.all(np.abs(k) <= np.pi + atol, axis=-1)
    # hexagon: |k . b| <= |b|^2 / 2 for b1, b2 and b1 + b2
    b = spec.reciprocal_basis
    normals = np.stack([b[0], b[1], b[0] + b[1]])
    proj = np.abs(k @ normals.T)
    return np.all(proj <= 0.5 * np.sum(normals**2, axis=1) + atol, axis=-1)


def _check_domain(spec, k):
    if not np.all(in_domain(spec, k)):
        raise DomainError("wave vector outside the Brillouin zone")


def fold_to_cell(spec, k):
    """Map wave vectors to their equivalent inside the Wigner-Seitz cell."""
    k = _as_k(spec, k)
    if spec.symmetry == CUBIC:
        return (k + np.pi) % (2 * np.pi) - np.pi
    b = spec.reciprocal_basis
    frac = k @ np.linalg.inv(b)
    base = k - np.floor(frac) @ b
    best = base
    best_norm = np.sum(base**2, axis=-1)
    for m1 in (0, 1, -1):
        for m2 in (0, 1, -1):
            cand = base - (m1 * b[0] + m2 * b[1])
            norm = np.sum(cand**2, axis=-1)
            better = norm < best_norm - 1e-12
            best = np.where(better[..., None], cand, best)
            best_norm = np.where(better, norm, best_norm)
    return best


def _omega_sq(spec, k):
    if spec.symmetry == CUBIC:
        s = np.sum(np.sin(0.5 * k) ** 2, axis=-1)
        return spec.omega0**2 + 4 * spec.dimension * spec.g * s
    phases = k @ _TRI_BONDS.T
    return spec.omega0**2 + 8 * spec.g * np.sum(np.sin(0.5 * phases) ** 2, axis=-1)


def dispersion(spec, k, check=True):
    """Phonon frequency at wave vector(s) ``k`` (last axis holds components).

    Cubic: ``sqrt(omega0^2 + 4 D g sum_i sin^2(k_i / 2))``.
    Triangular: ``sqrt(omega0^2 + 8 g sum_j sin^2(l_j / 2))`` with bond phases
    ``l1 = kx``, ``l2 = kx/2 + sqrt(3) ky/2``, ``l3 = kx/2 - sqrt(3) ky/2``.
    """
    k = _as_k(spec, k)
    if check:
        _check_domain(spec, k)
    return np.sqrt(_omega_sq(spec, k))


def group_velocity(spec, k, check=True):
    """Analytic gradient of :func:`dispersion` with respect to ``k``."""
    k = _as_k(spec, k)
    if check:
        _check_domain(spec, k)
    w = np.sqrt(_omega_sq(spec, k))[..., None]
    if spec.symmetry == CUBIC:
        return spec.dimension * spec.g * np.sin(k) / w
    phases = k @ _TRI_BONDS.T
    return 2 * spec.g * (np.sin(phases) @ _TRI_BONDS) / w


def critical_frequencies(spec):
    """Frequencies of the band's critical points (band edges and saddles)."""
    if spec.symmetry == CUBIC:
        m = np.arange(spec.dimension + 1)
        return np.sqrt(spec.omega0**2 + 4 * spec.g * spec.dimension * m)
    return np.sqrt(spec.omega0**2 + spec.g * np.array([0.0, 16.0, 18.0]))


def bz_domain(spec, n_per_axis):
    """Uniform quadrature over the Brillouin zone.

    Cubic lattices use the midpoint grid on ``[-pi, pi]^D``; the triangular
    lattice uses a midpoint grid in reduced coordinates folded into the
    hexagonal Wigner-Seitz cell.  All weights are equal and sum to the cell
    measure.

    Returns
    -------
    nodes : ndarray, shape (n**D, D)
    weights : ndarray, shape (n**D,)
    """
    n = int(n_per_axis)
    if n < 2:
        raise DomainError("n_per_axis must be at least 2")
    frac = (np.arange(n) + 0.5) / n
    if spec.symmetry == CUBIC:
        axes = [2 * np.pi * frac - np.pi] * spec.dimension
        nodes = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, spec.dimension)
    else:
        u, v = np.meshgrid(frac, frac, indexing="ij")
        nodes = fold_to_cell(spec, np.stack([u.ravel(), v.ravel()], axis=-1) @ spec.reciprocal_basis)
    weights = np.full(nodes.shape[0], spec.cell_volume / n**spec.dimension)
    return nodes, weights


def band_range_scan(spec, n_per_axis=256):
    """Band minimum and maximum by grid search plus local refinement."""
    nodes, _ = bz_domain(spec, n_per_axis)
    w = dispersion(spec, nodes, check=False)

    def refine(start, sign):
        res = minimize(lambda k: sign * float(dispersion(spec, k, check=False)), start,
                       method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15})
        return sign * res.fun

    lo = min(float(w.min()), refine(nodes[np.argmin(w)], 1.0))
    hi = max(float(w.max()), refine(nodes[np.argmax(w)], -1.0))
    return lo, hi


def max_group_velocity(spec, n_per_axis=256):
    """Largest group speed over the zone (grid search plus local refinement)."""
    nodes, _ = bz_domain(spec, n_per_axis)
    speed = np.linalg.norm(group_velocity(spec, nodes, check=False), axis=-1)
    start = nodes[np.argmax(speed)]
    res = minimize(lambda k: -float(np.linalg.norm(group_velocity(spec, k, check=False))),
                   start, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15})
    return max(float(speed.max()), -float(res.fun))


@dataclass(frozen=True)
class IsoFrequencyManifold:
    """Discretized resonant manifold ``omega(k) = Omega``.

    Only an irreducible piece is stored; ``ops`` lists the symmetry
    operations whose images tile the full manifold.  Elements lying on a
    mirror of the stored wedge carry a reduced ``measure`` so the expanded
    manifold counts them once.

    Attributes
    ----------
    omega : float
    points : ndarray, shape (M, D)
        Element representatives (polished onto the manifold).
    measure : ndarray, shape (M,)
        Segment length (2D), triangle area (3D) or point multiplicity (1D).
    speed : ndarray, shape (M,)
        ``|grad omega|`` at each representative.
    ops : ndarray, shape (G, D, D)
    """

    omega: float
    points: np.ndarray
    measure: np.ndarray
    speed: np.ndarray
    ops: np.ndarray

    @property
    def degenerate(self):
        return self.speed < SPEED_FLOOR

    @property
    def weights(self):
        """Delta-function weights ``measure / |grad omega|`` (speed clamped)."""
        return self.measure / np.maximum(self.speed, SPEED_FLOOR)

    def __len__(self):
        return self.points.shape[0] * self.ops.shape[0]

    def expand(self):
        """Full manifold: all symmetry images of the stored elements."""
        pts = np.einsum("gij,mj->gmi", self.ops, self.points).reshape(-1, self.points.shape[1])
        return pts, np.tile(self.weights, self.ops.shape[0])

    def integrate(self, fn):
        """``sum_elements weight * fn(k)``, i.e. the integral of ``fn * delta(omega_k - Omega)``."""
        pts, w = self.expand()
        return float(np.sum(w * fn(pts)))


def _sign_ops(dim):
    signs = np.array(np.meshgrid(*[[1.0, -1.0]] * dim, indexing="ij")).reshape(dim, -1).T
    return np.stack([np.diag(s) for s in signs])


def _polish(spec, k, omega):
    w = dispersion(spec, k, check=False)
    v = group_velocity(spec, k, check=False)
    v2 = np.sum(v**2, axis=-1)
    step = np.where(v2 > SPEED_FLOOR**2, (w - omega) / np.where(v2 > 0, v2, 1.0), 0.0)
    return k - step[:, None] * v


def _edge_manifold(spec, omega, at_top):
    dim = spec.dimension
    if spec.symmetry == CUBIC:
        ops = _sign_ops(dim)
        point = np.full(dim, np.pi if at_top else 0.0)
        measure = 1.0 / ops.shape[0]
    else:
        ops = np.stack([np.eye(2), -np.eye(2)])
        point = np.array([4 * np.pi / 3, 0.0]) if at_top else np.zeros(2)
        measure = 1.0 if at_top else 0.5
    warnings.warn(f"Omega={omega} sits on a band edge; resonant weight clamped",
                  DegenerateManifoldWarning, stacklevel=3)
    return IsoFrequencyManifold(float(omega), point[None, :], np.array([measure]),
                                np.zeros(1), ops)


def resonant_manifold(spec, omega, resolution=512):
    """Locate all wave vectors with ``dispersion(k) == omega``.

    1D: bracketed roots in ``[0, pi]`` polished by Brent's method; 2D:
    marching squares on a ``resolution``-cell grid of the irreducible wedge;
    3D: marching tetrahedra.  In 2D/3D each element's midpoint receives one
    Newton step along the gradient before the weight is evaluated.

    Raises
    ------
    OutOfBandError
        If ``omega`` lies outside ``[band_min, band_max]``.
    """
    omega = float(omega)
    lo, hi = spec.band_min, spec.band_max
    tol = 1e-12 * spec.omega0
    if omega < lo - tol or omega > hi + tol:
        raise OutOfBandError(f"Omega={omega} outside the band [{lo}, {hi}]")
    if spec.g == 0 or abs(omega - lo) <= tol:
        return _edge_manifold(spec, omega, at_top=False)
    if abs(omega - hi) <= tol:
        return _edge_manifold(spec, omega, at_top=True)

    if spec.dimension == 1:
        return _manifold_1d(spec, omega, resolution)
    if spec.dimension == 2:
        return _manifold_2d(spec, omega, resolution)
    return _manifold_3d(spec, omega, resolution)


def _manifold_1d(spec, omega, resolution):
    grid = np.linspace(0.0, np.pi, max(int(resolution), 8) + 1)
    f = dispersion(spec, grid, check=False) - omega
    roots = []
    for i in np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) <= 0)[0]:
        if f[i] == 0 and roots and abs(roots[-1] - grid[i]) < 1e-15:
            continue
        r = brentq(lambda k: float(dispersion(spec, k, check=False)) - omega,
                   grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
        if not roots or abs(r - roots[-1]) > 1e-12:
            roots.append(r)
    pts = np.array(roots)[:, None]
    # a root on a mirror (k = 0 or pi) is its own image
    fixed = (np.abs(pts[:, 0]) < 1e-12) | (np.abs(pts[:, 0] - np.pi) < 1e-12)
    measure = np.where(fixed, 0.5, 1.0)
    speed = np.abs(group_velocity(spec, pts, check=False)[:, 0])
    return _finish(IsoFrequencyManifold(omega, pts, measure, speed, _sign_ops(1)))


def _manifold_2d(spec, omega, resolution):
    n = max(int(resolution), 8)
    if spec.symmetry == CUBIC:
        ax = np.linspace(0.0, np.pi, n + 1)
        f = dispersion(spec, np.stack(np.meshgrid(ax, ax, indexing="ij"), -1), check=False) - omega
        p, q = marching_squares(f)
        p, q = p * (np.pi / n), q * (np.pi / n)
        ops = _sign_ops(2)
    else:
        # reduced coordinates: u periodic over [0, 1), v over [0, 1/2];
        # inversion maps this strip onto the rest of the cell
        b = spec.reciprocal_basis
        n += n % 2
        u = np.arange(n) / n
        v = np.arange(n // 2 + 1) / n
        uu, vv = np.meshgrid(u, v, indexing="ij")
        k = np.stack([uu, vv], -1) @ b
        f = dispersion(spec, k, check=False) - omega
        p, q = marching_squares(f, wrap0=True)
        p, q = (p / n) @ b, (q / n) @ b
        ops = np.stack([np.eye(2), -np.eye(2)])
    length = np.linalg.norm(q - p, axis=1)
    keep = length > 0
    mid = _polish(spec, 0.5 * (p + q)[keep], omega)
    if spec.symmetry == TRIANGULAR:
        mid = fold_to_cell(spec, mid)
    speed = np.linalg.norm(group_velocity(spec, mid, check=False), axis=1)
    return _finish(IsoFrequencyManifold(omega, mid, length[keep], speed, ops))


def _manifold_3d(spec, omega, resolution):
    n = max(int(resolution), 4)
    ax = np.linspace(0.0, np.pi, n + 1)
    f = dispersion(spec, np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), -1), check=False) - omega
    tri = marching_tetrahedra(f) * (np.pi / n)
    area = 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    keep = area > 0
    centroid = _polish(spec, tri[keep].mean(axis=1), omega)
    speed = np.linalg.norm(group_velocity(spec, centroid, check=False), axis=1)
    return _finish(IsoFrequencyManifold(omega, centroid, area[keep], speed, _sign_ops(3)))


def _finish(manifold):
    if manifold.points.shape[0] == 0:
        raise OutOfBandError(f"no resonant wave vectors found at Omega={manifold.omega}")
    n_bad = int(np.count_nonzero(manifold.degenerate))
    if n_bad:
        warnings.warn(f"{n_bad} manifold elements have |grad omega| < {SPEED_FLOOR}; "
                      "their weights are clamped", DegenerateManifoldWarning, stacklevel=3)
    return manifold
