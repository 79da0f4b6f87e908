import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crosstalk.correlation import (axis_profile, contour_radius, correlation, correlation_length,
                                   correlation_map, decay_distance, occupation_weight)
from crosstalk.errors import DomainError, ResolutionError
from crosstalk.lattice import TRIANGULAR, LatticeSpec

CHAIN = LatticeSpec(1, g=0.75)
SQUARE = LatticeSpec(2, g=3 / 16)
TRI = LatticeSpec(2, TRIANGULAR, g=0.165)

# adaptive-quadrature oracles (scipy quad / dblquad)
C1D_T0 = (0.3432201251545876, [0.16912003679316692, 0.04248897065148212, 0.011831899661385661,
                               0.0034561628529004036, 0.0010378939015899219])
C1D_T1 = (0.5800866925609933, [0.28891520288883277, 0.09579789913697137, 0.03192418001471057,
                               0.010641244585025461, 0.0035470788798732875])
C2D = (0.32890772467322565, [0.0836039752966836, 0.020422081375585613, 0.004296498490218229])
CTRI = (0.34772978658065445, [0.07347564475133231, 0.015278670521966105])


def test_occupation_weight():
    assert occupation_weight(1.0, 0.0) == 0.5
    assert occupation_weight(1.0, 2.0) == pytest.approx(0.5 / np.tanh(0.25))


@pytest.mark.parametrize("T,oracle", [(0.0, C1D_T0), (1.0, C1D_T1)])
def test_chain_oracle(T, oracle):
    prof = correlation(CHAIN, np.arange(6.0)[:, None], T)
    assert prof.c0 == pytest.approx(oracle[0], rel=1e-9)
    assert prof.values[1:] == pytest.approx(oracle[1], rel=1e-6)


def test_square_and_triangular_oracles():
    prof = correlation(SQUARE, [[1.0, 0.0], [1.0, 1.0], [2.0, 1.0]])
    assert prof.c0 == pytest.approx(C2D[0], rel=1e-8)
    assert prof.values == pytest.approx(C2D[1], rel=1e-5)
    tri = correlation(TRI, [[1.0, 0.0], [1.5, np.sqrt(3) / 2]])
    assert tri.c0 == pytest.approx(CTRI[0], rel=1e-8)
    assert tri.values == pytest.approx(CTRI[1], rel=1e-5)


def test_short_range_1d():
    assert decay_distance(CHAIN, 0.1) == 2
    assert correlation_length(CHAIN) == pytest.approx(0.761, abs=2e-3)
    vals = axis_profile(CHAIN, 40).values
    assert np.all(np.abs(vals[5:]) < 0.1)


def test_map_contours():
    for spec in (SQUARE, TRI):
        cmap = correlation_map(spec, 8)
        assert cmap.values[8, 8] == pytest.approx(1.0)
        assert 1.0 < contour_radius(cmap) < 4.0
        p, q = cmap.contour
        assert p.shape == q.shape and p.shape[1] == 2


def test_contour_grows_with_temperature():
    radii = [contour_radius(correlation_map(SQUARE, 8, T)) for T in (0.0, 1.0, 100.0)]
    assert radii[0] < radii[1] < radii[2] < 4.0


def test_errors():
    with pytest.raises(DomainError):
        correlation(CHAIN, [[1.0]], -1.0)
    with pytest.raises(DomainError):
        correlation_map(CHAIN, 4)
    with pytest.raises(ResolutionError):
        correlation(CHAIN, np.arange(3.0)[:, None], 100.0, resolution=8)


@given(st.floats(0.0, 20.0), st.lists(st.integers(-8, 8), min_size=2, max_size=2))
def test_map_symmetries(T, r):
    a, b = r
    prof = correlation(SQUARE, [[a, b], [-a, -b], [b, a], [a, -b]], T)
    assert np.allclose(prof.raw, prof.raw[0], rtol=1e-12, atol=1e-15)
    assert abs(prof.values[0]) <= 1.0 + 1e-12
