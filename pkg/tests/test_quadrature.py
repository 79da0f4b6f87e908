import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crosstalk._contour import marching_squares, marching_tetrahedra
from crosstalk.errors import DomainError
from crosstalk.lattice import TRIANGULAR, LatticeSpec, dispersion
from crosstalk.quadrature import ZoneGrid, as_separations, default_threads, lattice_coordinates

SQUARE = LatticeSpec(2, g=3 / 16)
TRI = LatticeSpec(2, TRIANGULAR, g=0.165)


def test_as_separations_shapes():
    assert as_separations(LatticeSpec(1, g=1), 3.0).shape == (1, 1)
    assert as_separations(LatticeSpec(1, g=1), [1, 2, 3]).shape == (3, 1)
    assert as_separations(SQUARE, [1, 2]).shape == (1, 2)
    with pytest.raises(DomainError):
        as_separations(SQUARE, [[1, 2, 3]])


def test_lattice_coordinates():
    r = np.array([[1.5, np.sqrt(3) / 2], [-1.0, 0.0]])
    assert lattice_coordinates(TRI, r) == pytest.approx(np.array([[1, 1], [-1, 0]]))
    with pytest.raises(DomainError):
        lattice_coordinates(TRI, [[0.3, 0.1]])


def test_default_threads_env(monkeypatch):
    monkeypatch.setenv("CROSSTALK_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.delenv("CROSSTALK_THREADS")
    assert default_threads() >= 1


@pytest.mark.parametrize("spec", [SQUARE, TRI], ids=["square", "triangular"])
def test_weights_integrate_constant(spec):
    grid = ZoneGrid(spec, 16)
    one = grid.fourier_sum(lambda k: np.ones((1,) + k.shape[:-1]), np.zeros((1, 2)))
    assert one[0, 0] == pytest.approx(spec.cell_volume)


def test_fourier_sum_matches_direct_sum():
    grid = ZoneGrid(SQUARE, 24)
    r = np.array([[0.0, 0.0], [2.0, 1.0], [3.0, -4.0]])
    kern = lambda k: np.stack([1 / dispersion(SQUARE, k, check=False),
                               dispersion(SQUARE, k, check=False)])
    fast = grid.fourier_sum(kern, r)
    ax = (np.arange(24) + 0.5) * 2 * np.pi / 24 - np.pi
    K = np.stack(np.meshgrid(ax, ax, indexing="ij"), -1).reshape(-1, 2)
    w = (2 * np.pi / 24) ** 2
    direct = np.array([[w * np.sum(c * np.cos(K @ rr)) for rr in r] for c in kern(K)])
    assert np.allclose(fast, direct, rtol=1e-12, atol=1e-14)


def test_triangular_sum_direct():
    grid = ZoneGrid(TRI, 18)
    r = np.array([[1.0, 0.0], [1.5, np.sqrt(3) / 2], [-2.0, 0.0]])
    fast = grid.fourier_sum(lambda k: (1 / dispersion(TRI, k, check=False))[None], r)[0]
    u = (np.arange(18) + 0.5) / 18
    uu, vv = np.meshgrid(u, u, indexing="ij")
    K = np.stack([uu.ravel(), vv.ravel()], -1) @ TRI.reciprocal_basis
    direct = [TRI.cell_volume / 324 * np.sum(np.cos(K @ rr) / dispersion(TRI, K, check=False))
              for rr in r]
    assert np.allclose(fast, direct, rtol=1e-12)


def test_thread_count_independent():
    grid = ZoneGrid(SQUARE, 1024)
    r = np.array([[3.0, 5.0], [10.0, 0.0]])
    kern = lambda k: (1 / dispersion(SQUARE, k, check=False))[None]
    a = grid.fourier_sum(kern, r, threads=1)
    b = grid.fourier_sum(kern, r, threads=4)
    assert np.array_equal(a, b)


def test_odd_cubic_grid_bumped():
    assert ZoneGrid(SQUARE, 15).n == 16


@given(st.floats(0.3, 0.9))
def test_marching_squares_circle(radius):
    n = 80
    ax = np.linspace(-1, 1, n + 1)
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    p, q = marching_squares(X**2 + Y**2 - radius**2)
    h = 2 / n
    length = np.sum(np.linalg.norm(q - p, axis=1)) * h
    assert length == pytest.approx(2 * np.pi * radius, rel=2e-3)
    mid = 0.5 * (p + q) * h - 1
    assert np.allclose(np.linalg.norm(mid, axis=1), radius, atol=h * h)


def test_marching_tetrahedra_sphere_area():
    n = 32
    ax = np.linspace(-1, 1, n + 1)
    X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij")
    tri = marching_tetrahedra(X**2 + Y**2 + Z**2 - 0.7**2) * (2 / n)
    area = 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    assert area.sum() == pytest.approx(4 * np.pi * 0.49, rel=1e-2)
