import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jcpostselect.errors import TruncationError, UndefinedMeanError
from jcpostselect.fock import ProtocolParams, coherent_state, fock_state
from jcpostselect.metrics import (
    QuadratureStats,
    beta_fn,
    mandel_q,
    mandel_q_from_probabilities,
    photon_moments_beta,
    photon_statistics,
    photon_statistics_from_state,
    quadrature_moments_closed_form,
    quadrature_moments_trace,
    quadrature_operator,
    uncertainty_product,
)
from jcpostselect.postselect import ps_state

SQRT10 = math.sqrt(10)
PHASES = (0.0, math.pi / 4, math.pi / 2)


def mp_beta(alpha, r, N, k, terms=200):
    """Brute-force 50-digit sum of |a|^{2l}/l! cos^{2N}(r sqrt(l+k)) to l = terms."""
    with mp.workdps(50):
        mean = mp.mpf(abs(alpha)) ** 2
        return mp.fsum(
            mean**l / mp.factorial(l) * mp.cos(mp.mpf(r) * mp.sqrt(l + k)) ** (2 * N) for l in range(terms + 1)
        )


def test_quadrature_stats_computed_fields():
    q = QuadratureStats(0.0, 1.0, 1.5)
    assert q.variance == pytest.approx(0.5)
    assert q.normal_ordered_variance == pytest.approx(-0.5)
    assert q.squeezing_db == pytest.approx(10 * math.log10(0.5))


@pytest.mark.parametrize("phi", [0.0, 0.4, math.pi / 2, 2.0])
def test_identity_case_quadrature(phi):
    alpha = 1.2 + 2.1j
    q = quadrature_moments_closed_form(alpha, 0.0, 3, phi)
    assert q.mean == pytest.approx(2 * (alpha * np.exp(-1j * phi)).real, abs=1e-10)
    assert q.variance == pytest.approx(1.0, abs=1e-10)
    assert abs(q.squeezing_db) < 1e-9


def test_identity_case_triple():
    assert mandel_q(SQRT10, 0.0, 2) == pytest.approx(0.0, abs=1e-10)
    stats = photon_statistics(SQRT10, 0.0, 2)
    n = np.arange(stats.probabilities.size)
    poisson = np.array([math.exp(-10) * 10.0**k / math.factorial(k) for k in n])
    np.testing.assert_allclose(stats.probabilities, poisson, rtol=1e-9, atol=1e-300)
    assert stats.mean_n == pytest.approx(10.0, rel=1e-12)
    assert stats.variance_n == pytest.approx(10.0, rel=1e-9)


def test_trace_moments_vacuum_and_coherent():
    for phi in PHASES:
        vac = quadrature_moments_trace(fock_state(0, 10), phi)
        assert vac.mean == pytest.approx(0.0, abs=1e-15)
        assert vac.variance == pytest.approx(1.0, abs=1e-14)
    coh = quadrature_moments_trace(coherent_state(SQRT10, 60), 0.0)
    assert coh.mean == pytest.approx(2 * SQRT10, rel=1e-9)
    assert coh.variance == pytest.approx(1.0, abs=1e-9)


def test_quadrature_operator_is_hermitian():
    x = quadrature_operator(6, 0.3)
    np.testing.assert_allclose(x, x.conj().T, atol=1e-15)
    assert x[0, 1] == pytest.approx(np.exp(-0.3j))


@pytest.mark.parametrize("r, N", [(1.0, 1), (0.9, 5), (0.51, 2), (2.3, 3)])
def test_closed_form_matches_trace_oracle(r, N):
    state = ps_state(ProtocolParams(SQRT10, r, N)).state
    for phi in PHASES:
        closed = quadrature_moments_closed_form(SQRT10, r, N, phi)
        oracle = quadrature_moments_trace(state, phi)
        assert closed.mean == pytest.approx(oracle.mean, abs=1e-9)
        assert closed.second_moment == pytest.approx(oracle.second_moment, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(
    amp=st.floats(0.0, 3.5),
    phase=st.floats(0.0, 2 * math.pi),
    r=st.floats(0.0, 3.0),
    N=st.integers(1, 6),
    phi=st.floats(0.0, math.pi),
)
def test_closed_form_matches_trace_random(amp, phase, r, N, phi):
    alpha = amp * np.exp(1j * phase)
    state = ps_state(ProtocolParams(alpha, r, N)).state
    closed = quadrature_moments_closed_form(alpha, r, N, phi)
    oracle = quadrature_moments_trace(state, phi)
    assert abs(closed.mean - oracle.mean) < 1e-9
    assert abs(closed.second_moment - oracle.second_moment) < 1e-9


def test_uncertainty_examples():
    assert uncertainty_product(fock_state(0, 10)) == pytest.approx(1.0, abs=1e-12)
    assert uncertainty_product(coherent_state(SQRT10, 60)) == pytest.approx(1.0, abs=1e-9)
    assert uncertainty_product(ps_state(ProtocolParams(SQRT10, 1.0, 5)).state) >= 1 - 1e-9


@settings(max_examples=30, deadline=None)
@given(amp=st.floats(0.0, 3.5), r=st.floats(0.0, 3.0), N=st.integers(1, 6))
def test_uncertainty_relation(amp, r, N):
    state = ps_state(ProtocolParams(amp, r, N)).state
    for phi in PHASES:
        assert uncertainty_product(state, phi) >= 1 - 1e-9


def test_beta_no_coupling_and_vacuum():
    for k in range(4):
        assert beta_fn(1.7, 0.0, 3, k) == pytest.approx(math.exp(1.7**2), rel=1e-12)
    for k in range(4):
        assert beta_fn(0.0, 0.8, 2, k) == pytest.approx(math.cos(0.8 * math.sqrt(k)) ** 4, abs=1e-15)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_beta_against_brute_force(k):
    ref = mp_beta(SQRT10, 1.0, 2, k)
    assert beta_fn(SQRT10, 1.0, 2, k) == pytest.approx(float(ref), rel=1e-12)


def test_beta_rejects_short_cutoff():
    with pytest.raises(TruncationError):
        beta_fn(SQRT10, 1.0, 2, 1, cutoff=30)


def test_photon_moments_from_beta():
    mean, second = photon_moments_beta(SQRT10, 1.0, 2)
    b0, b1, b2 = (float(mp_beta(SQRT10, 1.0, 2, k)) for k in range(3))
    assert mean == pytest.approx(10 * b1 / b0, rel=1e-12)
    assert second == pytest.approx(10 / b0 * (10 * b2 + b1), rel=1e-12)


@pytest.mark.parametrize("r, N", [(1.0, 5), (0.51, 1), (2.0, 2), (1.7, 3)])
def test_mandel_two_routes(r, N):
    stats = photon_statistics_from_state(ps_state(ProtocolParams(SQRT10, r, N)).state)
    assert mandel_q(SQRT10, r, N) == pytest.approx(stats.mandel_q, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(amp=st.floats(0.1, 3.5), r=st.floats(0.0, 3.0), N=st.integers(1, 6))
def test_mandel_two_routes_random(amp, r, N):
    stats = photon_statistics(amp, r, N)
    assert abs(mandel_q(amp, r, N) - stats.mandel_q) < 1e-10
    assert abs(mandel_q_from_probabilities(stats.probabilities) - stats.mandel_q) < 1e-10


@pytest.mark.parametrize("r", [0.75, 0.9, 1.0, 1.1, 1.25, 1.75, 1.9, 2.0, 2.15])
def test_sub_poissonian_windows(r):
    assert mandel_q(SQRT10, r, 1) < 0


def test_mandel_undefined_for_vacuum():
    with pytest.raises(UndefinedMeanError):
        mandel_q(0.0, 1.0, 1)
    assert math.isnan(mandel_q_from_probabilities(np.array([1.0, 0.0])))


def test_photon_statistics_vacuum_and_sum():
    vac = photon_statistics(0.0, 1.0, 3)
    assert vac.probabilities[0] == 1.0
    stats = photon_statistics(SQRT10, 0.51, 1)
    assert stats.probabilities.sum() == pytest.approx(1.0, abs=1e-10)
    assert np.all(stats.probabilities >= 0)


def test_photon_statistics_holes():
    # cos(0.51 sqrt n) vanishes near n = (pi / 1.02)^2 ~ 9.5
    probs = photon_statistics(SQRT10, 0.51, 1).probabilities
    poisson = np.array([math.exp(-10) * 10.0**k / math.factorial(k) for k in range(probs.size)])
    ratio = probs / poisson
    assert ratio[9] < 0.01 * ratio[2]
    assert ratio[10] < 0.01 * ratio[2]
    assert int(np.argmin(ratio[:20])) in (9, 10)


def test_photon_aggregates_match_distribution():
    stats = photon_statistics(SQRT10, 1.3, 2)
    n = np.arange(stats.probabilities.size)
    assert stats.mean_n == pytest.approx(np.sum(n * stats.probabilities), rel=1e-10)
    assert stats.second_moment_n == pytest.approx(np.sum(n**2 * stats.probabilities), rel=1e-10)


@pytest.mark.parametrize("r, N", [(1.0, 5), (0.9, 5), (1.2, 1), (1.15, 2)])
def test_amplitude_quadrature_is_most_squeezed(r, N):
    base = quadrature_moments_closed_form(SQRT10, r, N, 0.0)
    assert base.squeezing_db < 0
    for phi in np.linspace(0.1, math.pi, 12):
        assert base.variance <= quadrature_moments_closed_form(SQRT10, r, N, phi).variance + 1e-12


def _min_db(N, lo=0.7, hi=1.3, step=0.005):
    rs = np.arange(lo + step, hi, step)
    values = [quadrature_moments_closed_form(SQRT10, r, N).squeezing_db for r in rs]
    i = int(np.argmin(values))
    return rs[i], values[i]


def test_squeezing_minima():
    r5, db5 = _min_db(5)
    assert -4.5 <= db5 <= -3.5
    assert db5 == pytest.approx(-3.58, abs=0.01)
    assert r5 == pytest.approx(0.925, abs=0.01)
    assert _min_db(1)[1] < 0
    assert _min_db(2)[1] < 0
