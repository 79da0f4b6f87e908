import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crosstalk.damping import ProbeConfig, crosstalk_finite_time
from crosstalk.disorder import (FIXED, PERIODIC, SYMMETRIC, EnsembleParams, build_chain,
                                bootstrap_mean_difference, choose_reference_site,
                                clean_self_damping, cross_talk_disordered, diagonalize,
                                ensemble_envelope, is_non_increasing, realization, self_damping)
from crosstalk.errors import DomainError, IllConditionedWarning
from crosstalk.lattice import LatticeSpec, dispersion

CHAIN = LatticeSpec(1, g=0.75)


def test_clean_fixed_chain_matrix():
    c = build_chain(4, 1.0, 0.75, 0.0, seed=5)
    M = c.matrix()
    expected = 2.5 * np.eye(4) - 0.75 * (np.eye(4, k=1) + np.eye(4, k=-1))
    assert np.array_equal(M, expected)


def test_periodic_corners():
    M = build_chain(5, boundary=PERIODIC).matrix()
    assert M[0, 4] == M[4, 0] == -0.75


def test_seed_reproducible_and_scaled():
    a = build_chain(2500, delta=0.1, seed=1)
    b = build_chain(2500, delta=0.1, seed=1)
    c = build_chain(2500, delta=0.2, seed=1)
    assert np.array_equal(a.diagonal, b.diagonal)
    diff = c.diagonal - a.diagonal
    assert diff.min() >= 0 and diff.max() <= 0.1
    assert np.all((a.onsite >= 0) & (a.onsite <= 0.1))
    s = build_chain(100, delta=0.1, seed=1, law=SYMMETRIC)
    assert np.all(np.abs(s.onsite) <= 0.05)


def test_build_chain_errors():
    with pytest.raises(DomainError):
        build_chain(1)
    with pytest.raises(DomainError):
        build_chain(10, boundary="open")
    with pytest.raises(DomainError):
        build_chain(10, delta=-1)


def test_large_chain_residuals():
    basis = diagonalize(build_chain(2500, delta=0.1, seed=1))
    ortho, complete = basis.residuals()
    assert ortho < 1e-10 and complete < 1e-10
    assert np.all(np.diff(basis.frequencies) >= 0)


def test_periodic_clean_chain_matches_crystal():
    # plane-wave eigenmodes reproduce the Brillouin-zone sum
    N, t = 600, 100.0
    basis = diagonalize(build_chain(N, boundary=PERIODIC))
    x = np.arange(0, 40)
    omega = 1.3
    chain = cross_talk_disordered(basis, omega, 100, x, t, coupling=0.05)
    crystal = crosstalk_finite_time(CHAIN, ProbeConfig(omega), t, x[:, None])
    assert chain.normalized == pytest.approx(crystal.normalized, abs=1e-9)
    assert chain.gamma11 == pytest.approx(crystal.gamma11, rel=1e-9)


def test_normalized_at_zero_and_ranges():
    basis = diagonalize(build_chain(200, delta=0.1, seed=3))
    ct = cross_talk_disordered(basis, 1.3, 50, [0, 1, 5], 50.0)
    assert ct.normalized[0] == 1.0
    with pytest.raises(DomainError):
        cross_talk_disordered(basis, 1.3, 190, [20], 50.0)
    with pytest.raises(DomainError):
        cross_talk_disordered(basis, 1.3, 50, [1], 0.0)
    with pytest.warns(IllConditionedWarning):
        cross_talk_disordered(basis, 0.5, 50, [1], 50.0)


@given(st.integers(0, 10_000), st.integers(20, 170), st.integers(20, 170), st.floats(1.05, 1.95))
def test_swap_symmetry(seed, n, m, omega):
    basis = diagonalize(build_chain(200, delta=0.1, seed=seed))
    a = cross_talk_disordered(basis, omega, n, [m - n], 40.0).gamma13[0]
    b = cross_talk_disordered(basis, omega, m, [n - m], 40.0).gamma13[0]
    assert a == b


def test_reference_site_rule():
    rates = np.zeros(100)
    rates[40] = 1.0
    rng = np.random.default_rng(0)
    assert choose_reference_site(rates, 100, 10, rng, threshold=0.5) == 40
    with pytest.warns(IllConditionedWarning):
        choose_reference_site(rates, 100, 10, rng, threshold=2.0)
    with pytest.raises(DomainError):
        choose_reference_site(rates, 100, 90, rng)
    picks = {choose_reference_site(np.ones(100), 100, 10, np.random.default_rng(s))
             for s in range(50)}
    assert min(picks) >= 10 and max(picks) < 80


def test_clean_ensemble_is_exact():
    params = EnsembleParams(n_sites=2500, delta=0.0, time=1000.0, omega=1.3)
    env = ensemble_envelope(params, 3, [0, 10, 20])
    assert np.all(env.samples.std(axis=0) == 0)
    crystal = crosstalk_finite_time(CHAIN, ProbeConfig(1.3, coupling=1.0), 1000.0,
                                    [[0.0], [10.0], [20.0]])
    assert np.array_equal(env.samples[0], np.abs(crystal.normalized))
    assert env.mean == pytest.approx(np.abs(crystal.normalized), rel=1e-15)


def test_time_guard():
    with pytest.raises(DomainError):
        ensemble_envelope(EnsembleParams(n_sites=200, time=1e4, omega=1.3), 1, [0])


def test_realization_deterministic_and_threaded():
    params = EnsembleParams(n_sites=400, delta=0.1, time=200.0, omega=1.3, seed=7)
    x = np.arange(0, 30)
    a = realization(params, 2, x)
    b = realization(params, 2, x)
    assert a.n0 == b.n0 and np.array_equal(a.gamma13, b.gamma13)
    s1 = ensemble_envelope(params, 4, x).samples
    s4 = ensemble_envelope(params, 4, x, workers=4).samples
    assert np.array_equal(s1, s4)


def test_clean_self_damping_closed_form():
    params = EnsembleParams(omega=1.3, coupling=0.05)
    k = 2 * np.arcsin(np.sqrt((1.3**2 - 1) / 3))
    assert clean_self_damping(params) == pytest.approx(0.05**2 / (2 * 1.3 * 0.75 * np.sin(k)))
    assert EnsembleParams().resolved_omega() == pytest.approx(float(dispersion(CHAIN, 0.164)))


def test_self_damping_sum_rule():
    # completeness: summing site rates gives the plain mode sum of the kernel
    basis = diagonalize(build_chain(300, delta=0.05, seed=2))
    rates = self_damping(basis, 1.3, 20.0)
    w = basis.frequencies
    kernel = 1 / (2 * 1.3) / w * 20.0 * np.sinc(20.0 * (w - 1.3) / np.pi)
    assert rates.sum() == pytest.approx(kernel.sum(), rel=1e-10)


def test_bootstrap_monotonicity():
    rng = np.random.default_rng(0)
    falling = [rng.normal(mu, 0.05, 50) for mu in (1.0, 0.6, 0.3)]
    rising = [rng.normal(mu, 0.05, 50) for mu in (0.3, 0.6)]
    assert is_non_increasing(falling)
    assert not is_non_increasing(rising)
    d = bootstrap_mean_difference(np.ones(10), 2 * np.ones(10))
    assert np.all(d == 1.0)
