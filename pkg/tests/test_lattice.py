import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crosstalk.errors import DegenerateManifoldWarning, DomainError, OutOfBandError
from crosstalk.lattice import (CUBIC, TRIANGULAR, LatticeSpec, band_range_scan, bz_domain,
                               critical_frequencies, dispersion, fold_to_cell, group_velocity,
                               in_domain, max_group_velocity, resonant_manifold)

CHAIN = LatticeSpec(1, g=0.75)
SQUARE = LatticeSpec(2, g=3 / 16)
CUBE = LatticeSpec(3, g=1 / 8)
TRI = LatticeSpec(2, TRIANGULAR, g=0.165)
ALL = [CHAIN, SQUARE, CUBE, TRI]


def test_spec_validation():
    with pytest.raises(DomainError):
        LatticeSpec(4)
    with pytest.raises(DomainError):
        LatticeSpec(3, TRIANGULAR)
    with pytest.raises(DomainError):
        LatticeSpec(2, "hexagonal")
    with pytest.raises(DomainError):
        LatticeSpec(1, omega0=0.0)
    with pytest.raises(DomainError):
        LatticeSpec(1, g=-1.0)


def test_band_edges_closed_form():
    assert SQUARE.band_min == 1.0 and SQUARE.band_max == 2.0
    assert TRI.band_max == pytest.approx(np.sqrt(1 + 18 * 0.165), abs=1e-15)
    assert TRI.band_max == pytest.approx(1.992, abs=1e-3)
    assert CHAIN.band_max == pytest.approx(2.0)


@pytest.mark.parametrize("spec", ALL, ids=lambda s: f"{s.symmetry}{s.dimension}")
def test_band_scan_matches_edges(spec):
    lo, hi = band_range_scan(spec, 64)
    assert lo == pytest.approx(spec.band_min, abs=1e-9)
    assert hi == pytest.approx(spec.band_max, abs=1e-9)


def test_reciprocal_duality():
    for spec in ALL:
        prod = spec.direct_basis @ spec.reciprocal_basis.T
        assert np.allclose(prod, 2 * np.pi * np.eye(spec.dimension), atol=1e-14)
    assert TRI.reciprocal_basis == pytest.approx(
        np.array([[2 * np.pi, -2 * np.pi / np.sqrt(3)], [0.0, 4 * np.pi / np.sqrt(3)]]))


def test_critical_frequencies():
    assert np.allclose(critical_frequencies(SQUARE), [1.0, np.sqrt(2.5), 2.0])
    assert np.allclose(critical_frequencies(TRI) ** 2, [1.0, 1 + 16 * 0.165, 1 + 18 * 0.165])


def test_dispersion_special_points():
    assert dispersion(SQUARE, [np.pi, 0.0]) == pytest.approx(np.sqrt(2.5))
    assert dispersion(TRI, [4 * np.pi / 3, 0.0]) == pytest.approx(TRI.band_max)
    # M point of the hexagon is the saddle
    assert dispersion(TRI, [np.pi, np.pi / np.sqrt(3)]) == pytest.approx(np.sqrt(1 + 16 * 0.165))
    with pytest.raises(DomainError):
        dispersion(SQUARE, [4.0, 0.0])
    with pytest.raises(DomainError):
        dispersion(SQUARE, [0.1, 0.2, 0.3])


@pytest.mark.parametrize("spec", ALL, ids=lambda s: f"{s.symmetry}{s.dimension}")
def test_group_velocity_finite_difference(spec):
    rng = np.random.default_rng(3)
    k = fold_to_cell(spec, rng.uniform(-2.5, 2.5, (20, spec.dimension)))
    v = group_velocity(spec, k, check=False)
    h = 1e-6
    for a in range(spec.dimension):
        e = np.zeros(spec.dimension)
        e[a] = h
        fd = (dispersion(spec, k + e, check=False) - dispersion(spec, k - e, check=False)) / (2 * h)
        assert np.allclose(v[:, a], fd, atol=1e-8)


def test_max_group_velocity_square():
    # maximal along the zone diagonal: |v| = sqrt(2) D g sin k / omega maximized
    ks = np.linspace(0, np.pi, 200001)
    w = np.sqrt(1 + 8 * SQUARE.g * 2 * np.sin(ks / 2) ** 2)
    oracle = np.max(np.sqrt(2) * 2 * SQUARE.g * np.sin(ks) / w)
    assert max_group_velocity(SQUARE) == pytest.approx(oracle, rel=1e-8)


@pytest.mark.parametrize("spec", ALL, ids=lambda s: f"{s.symmetry}{s.dimension}")
def test_bz_domain_measure(spec):
    nodes, w = bz_domain(spec, 12)
    assert w.sum() == pytest.approx(spec.cell_volume)
    assert np.all(in_domain(spec, nodes))


coords = st.floats(-30, 30, allow_nan=False)


@given(st.lists(coords, min_size=2, max_size=2), st.integers(-3, 3), st.integers(-3, 3))
def test_triangular_periodicity(k, m1, m2):
    k = np.array(k)
    shift = m1 * TRI.reciprocal_basis[0] + m2 * TRI.reciprocal_basis[1]
    folded = fold_to_cell(TRI, k)
    assert in_domain(TRI, folded)
    assert np.isclose(dispersion(TRI, folded), dispersion(TRI, fold_to_cell(TRI, k + shift)),
                      atol=1e-12)
    assert np.isclose(dispersion(TRI, folded), dispersion(TRI, k, check=False), atol=1e-12)


@given(st.lists(coords, min_size=3, max_size=3))
def test_cubic_band_bounds_and_folding(k):
    k = np.array(k)
    w = dispersion(CUBE, k, check=False)
    assert CUBE.band_min - 1e-12 <= w <= CUBE.band_max + 1e-12
    assert np.isclose(w, dispersion(CUBE, fold_to_cell(CUBE, k)), atol=1e-12)


@given(st.floats(1.0005, 1.9995))
def test_manifold_on_shell_1d(omega):
    m = resonant_manifold(CHAIN, omega)
    pts, _ = m.expand()
    assert np.allclose(dispersion(CHAIN, pts), omega, atol=1e-12)
    k = 2 * np.arcsin(np.sqrt((omega**2 - 1) / 3.0))
    assert np.sort(pts[:, 0]) == pytest.approx([-k, k], abs=1e-12)


@pytest.mark.parametrize("spec,omega", [(SQUARE, 1.3), (SQUARE, 1.9), (TRI, 1.5), (TRI, 1.95),
                                        (CUBE, 1.4)], ids=str)
def test_manifold_points_on_shell(spec, omega):
    # one Newton step from the chord midpoints: residual shrinks fast with resolution
    coarse = resonant_manifold(spec, omega, 64 if spec.dimension == 2 else 12)
    m = resonant_manifold(spec, omega, 256 if spec.dimension == 2 else 48)
    err = lambda man: np.max(np.abs(dispersion(spec, man.expand()[0]) - omega))
    assert err(m) < 1e-6
    assert err(m) < err(coarse)


def test_manifold_length_circle_limit():
    # near the band bottom the square-lattice contour is a circle of radius k
    omega = 1.001
    k = 2 * np.arcsin(np.sqrt((omega**2 - 1) / (8 * SQUARE.g)))
    m = resonant_manifold(SQUARE, omega, 4096)
    assert m.measure.sum() * m.ops.shape[0] == pytest.approx(2 * np.pi * k, rel=1e-4)


def test_density_of_states_matches_grid_histogram():
    # manifold weight = d(area)/d(omega); compare with a fine-grid count
    omega, dw = 1.45, 2e-3
    m = resonant_manifold(SQUARE, omega, 1024)
    nodes, w = bz_domain(SQUARE, 2048)
    f = dispersion(SQUARE, nodes, check=False)
    count = w[np.abs(f - omega) < dw / 2].sum() / dw
    assert m.expand()[1].sum() == pytest.approx(count, rel=5e-3)


def test_manifold_errors_and_edges():
    with pytest.raises(OutOfBandError):
        resonant_manifold(SQUARE, 2.5)
    with pytest.raises(OutOfBandError):
        resonant_manifold(SQUARE, 0.5)
    with pytest.warns(DegenerateManifoldWarning):
        m = resonant_manifold(CHAIN, 2.0)
    assert np.allclose(np.abs(m.expand()[0]), np.pi)


def test_symmetry_constants():
    assert CUBIC == "cubic" and TRIANGULAR == "triangular"
