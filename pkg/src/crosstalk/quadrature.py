"""Uniform Brillouin-zone grids and blocked Fourier-type sums.

Every momentum integral in the package has the form

    sum_k  w * K_c(k) * cos(k . r)

for a handful of kernel channels ``c`` and many separations ``r``.  The grid
is a tensor product, so the cosine factorizes per axis and the sum becomes a
chain of small matrix products.  Work is split into fixed-size blocks along
the first axis; block partials are combined with :func:`math.fsum`, which is
exactly rounded, so results do not depend on the number of worker threads.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from crosstalk.errors import DomainError
from crosstalk.lattice import CUBIC, LatticeSpec, fold_to_cell

_BLOCK_ELEMENTS = 1 << 18


def default_threads():
    """Worker count: ``CROSSTALK_THREADS`` if set, else the CPU count."""
    env = os.environ.get("CROSSTALK_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def as_separations(spec, separations):
    """Coerce separations to an ``(R, D)`` float array."""
    r = np.asarray(separations, dtype=float)
    if r.ndim == 0:
        r = r.reshape(1, 1)
    elif r.ndim == 1:
        r = r[:, None] if spec.dimension == 1 else r[None, :]
    if r.shape[-1] != spec.dimension:
        raise DomainError(f"separations need {spec.dimension} components, got shape {r.shape}")
    return r


def lattice_coordinates(spec, separations):
    """Integer coordinates of separations in the direct basis.

    Raises
    ------
    DomainError
        If a separation is not a lattice vector.
    """
    r = as_separations(spec, separations)
    m = r @ np.linalg.inv(spec.direct_basis)
    mi = np.rint(m)
    if np.any(np.abs(m - mi) > 1e-9):
        raise DomainError("triangular-lattice separations must be lattice vectors")
    return mi


@dataclass(frozen=True)
class ZoneGrid:
    """Midpoint grid with ``n`` nodes per axis across the full zone.

    Cubic grids store only the positive orthant (kernels are even in every
    component) and fold the ``2^D`` multiplicity into the weight.  The
    triangular grid covers the primitive cell in reduced coordinates and
    hands folded wave vectors to kernels.
    """

    spec: LatticeSpec
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("grid needs at least 2 nodes per axis")
        if self.spec.symmetry == CUBIC and self.n % 2:
            object.__setattr__(self, "n", self.n + 1)

    @property
    def spacing(self):
        """Distance between neighbouring nodes along a grid axis."""
        if self.spec.symmetry == CUBIC:
            return 2 * np.pi / self.n
        return float(np.linalg.norm(self.spec.reciprocal_basis[0])) / self.n

    @property
    def shape(self):
        m = self.n // 2 if self.spec.symmetry == CUBIC else self.n
        return (m,) * self.spec.dimension

    @property
    def weight(self):
        if self.spec.symmetry == CUBIC:
            return (2 * np.pi / self.n) ** self.spec.dimension * 2**self.spec.dimension
        return self.spec.cell_volume / self.n**2

    @property
    def axis(self):
        """Node coordinates along one axis (k for cubic, reduced for triangular)."""
        i = np.arange(self.shape[0]) + 0.5
        if self.spec.symmetry == CUBIC:
            return i * (2 * np.pi / self.n)
        return i / self.n

    def nodes(self, rows=slice(None)):
        """Wave vectors for the given range of first-axis indices, shape (b, ..., D)."""
        ax = self.axis
        axes = [ax[rows]] + [ax] * (self.spec.dimension - 1)
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        if self.spec.symmetry == CUBIC:
            return grid
        return fold_to_cell(self.spec, grid @ self.spec.reciprocal_basis)

    def size(self):
        return int(np.prod(self.shape))

    def _phase_tables(self, separations):
        ax = self.axis
        if self.spec.symmetry == CUBIC:
            r = as_separations(self.spec, separations)
            return [np.cos(np.outer(ax, r[:, a])) for a in range(self.spec.dimension)]
        m = lattice_coordinates(self.spec, separations)
        return [np.exp(2j * np.pi * np.outer(ax, m[:, a])) for a in range(2)]

    def fourier_sum(self, kernel, separations, threads=None):
        """Evaluate ``sum_k w K_c(k) cos(k . r)`` for every channel and separation.

        Parameters
        ----------
        kernel : callable
            Maps wave vectors of shape ``(..., D)`` to channel values of shape
            ``(C, ...)``.
        separations : array_like, shape (R, D)

        Returns
        -------
        ndarray, shape (C, R)
        """
        tables = self._phase_tables(separations)
        m = self.shape[0]
        per_row = max(1, self.size() // m)
        rows_per_block = max(1, _BLOCK_ELEMENTS // per_row)
        blocks = [slice(s, min(s + rows_per_block, m)) for s in range(0, m, rows_per_block)]
        dim = self.spec.dimension

        def partial(rows):
            K = np.asarray(kernel(self.nodes(rows)))
            t0 = tables[0][rows]
            if dim == 1:
                out = K @ t0
            elif dim == 2:
                out = np.sum(t0[None] * (K @ tables[1]), axis=1)
            else:
                inner = np.sum((K @ tables[2]) * tables[1][None, None], axis=2)
                out = np.sum(t0[None] * inner, axis=1)
            return np.real(out)

        threads = threads or default_threads()
        if threads > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(partial, blocks))
        else:
            parts = [partial(b) for b in blocks]
        stacked = np.stack(parts)
        total = np.empty(stacked.shape[1:])
        for idx in np.ndindex(total.shape):
            total[idx] = math.fsum(stacked[(slice(None),) + idx])
        return self.weight * total
