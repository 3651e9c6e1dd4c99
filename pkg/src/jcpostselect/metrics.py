"""Nonclassicality measures: quadrature squeezing and photon-number statistics.

Closed forms are evaluated as sums over Poisson weights
``w_n = e^{-|a|^2} |a|^{2n} / n!`` built in log space, so large photon
numbers never form ``n!`` explicitly. Each closed form has a matrix-trace
counterpart that works on any :class:`~jcpostselect.fock.FieldState`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TruncationError, UndefinedMeanError
from .fock import FieldState, annihilation, default_cutoff, log_amplitude_terms, poisson_tail

__all__ = [
    "BETA_TAIL_LIMIT",
    "VACUUM_VARIANCE",
    "PhotonStats",
    "QuadratureStats",
    "beta_fn",
    "mandel_q",
    "mandel_q_from_probabilities",
    "photon_moments_beta",
    "photon_statistics",
    "photon_statistics_from_state",
    "quadrature_moments_closed_form",
    "quadrature_moments_trace",
    "quadrature_operator",
    "uncertainty_product",
]

VACUUM_VARIANCE = 1.0
BETA_TAIL_LIMIT = 1e-14


@dataclass(frozen=True)
class QuadratureStats:
    phase: float
    mean: float
    second_moment: float

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean**2

    @property
    def normal_ordered_variance(self) -> float:
        """``<:(dx)^2:>``; negative means squeezed."""
        return self.variance - VACUUM_VARIANCE

    @property
    def squeezing_db(self) -> float:
        return 10.0 * math.log10(self.variance / VACUUM_VARIANCE)


@dataclass(frozen=True)
class PhotonStats:
    probabilities: np.ndarray
    mean_n: float
    second_moment_n: float
    mandel_q: float

    @property
    def variance_n(self) -> float:
        return self.second_moment_n - self.mean_n**2


def _poisson_weights(alpha: complex, size: int) -> np.ndarray:
    n = np.arange(size)
    return np.exp(2.0 * log_amplitude_terms(alpha, n) - abs(alpha) ** 2)


def _resolve_cutoff(alpha, cutoff, limit):
    cutoff = default_cutoff(alpha) if cutoff is None else int(cutoff)
    tail = poisson_tail(abs(alpha) ** 2, cutoff)
    if tail > limit:
        raise TruncationError(
            f"cutoff {cutoff} drops Poisson tail mass {tail:.3e} > {limit:g} for |alpha|^2 = {abs(alpha) ** 2:.6g}"
        )
    return cutoff


def _cos_pow(r: float, n: np.ndarray, power: int) -> np.ndarray:
    return np.cos(r * np.sqrt(n)) ** power


def quadrature_moments_closed_form(alpha, r, N, phi=0.0, cutoff=None) -> QuadratureStats:
    """First and second moments of ``x(phi) = a e^{-i phi} + a^dag e^{i phi}``.

    Single sums over ``n`` of Poisson weights times products of
    ``cos^N(r sqrt(n + j))``, ``j = 0, 1, 2``, divided by the success
    probability.
    """
    alpha = complex(alpha)
    cutoff = _resolve_cutoff(alpha, cutoff, BETA_TAIL_LIMIT)
    n = np.arange(cutoff + 1, dtype=float)
    w = _poisson_weights(alpha, cutoff + 1)
    c0 = _cos_pow(r, n, N)
    c1 = _cos_pow(r, n + 1, N)
    c2 = _cos_pow(r, n + 2, N)

    trace = float(np.sum(w * c0 * c0))
    rot = np.exp(-1j * phi)
    mean = 2.0 * (alpha * rot).real * float(np.sum(w * c0 * c1)) / trace
    second = (
        2.0 * (alpha**2 * rot**2).real * float(np.sum(w * c0 * c2))
        + 2.0 * abs(alpha) ** 2 * float(np.sum(w * c1 * c1))
        + trace
    ) / trace
    return QuadratureStats(float(phi), mean, second)


def quadrature_operator(cutoff: int, phi: float) -> np.ndarray:
    a = annihilation(cutoff).matrix
    return a * np.exp(-1j * phi) + a.conj().T * np.exp(1j * phi)


def quadrature_moments_trace(state: FieldState, phi=0.0) -> QuadratureStats:
    """Moments from ``Tr[rho x]`` and ``Tr[rho x^2]`` with truncated ladder matrices."""
    x = quadrature_operator(state.cutoff, phi)
    rho = state.matrix
    mean = float(np.real(np.trace(rho @ x)))
    second = float(np.real(np.trace(rho @ x @ x)))
    return QuadratureStats(float(phi), mean, second)


def uncertainty_product(state: FieldState, phi=0.0) -> float:
    """``<(dx(phi))^2> <(dx(phi + pi/2))^2>``, bounded below by 1."""
    v1 = quadrature_moments_trace(state, phi).variance
    v2 = quadrature_moments_trace(state, phi + 0.5 * math.pi).variance
    return v1 * v2


def _beta_scaled(alpha, r, N, ks, cutoff):
    # e^{-|a|^2} beta(k): the Poisson factor keeps large |alpha| finite.
    n = np.arange(cutoff + 1, dtype=float)
    w = _poisson_weights(alpha, cutoff + 1)
    return [float(np.sum(w * _cos_pow(r, n + k, 2 * N))) for k in ks]


def beta_fn(alpha, r, N, k, cutoff=None) -> float:
    """``beta(k) = sum_l |a|^{2l}/l! cos^{2N}(r sqrt(l + k))``.

    The sum stops at the shared cutoff; the neglected part is at most
    ``e^{|a|^2}`` times the Poisson tail above the cutoff, which is checked
    to be below ``1e-14``.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    cutoff = _resolve_cutoff(complex(alpha), cutoff, BETA_TAIL_LIMIT)
    (scaled,) = _beta_scaled(complex(alpha), r, N, [k], cutoff)
    return scaled * math.exp(abs(alpha) ** 2)


def photon_moments_beta(alpha, r, N, cutoff=None) -> tuple[float, float]:
    """``(<n>, <n^2>)`` from ratios of ``beta(0)``, ``beta(1)``, ``beta(2)``."""
    alpha = complex(alpha)
    cutoff = _resolve_cutoff(alpha, cutoff, BETA_TAIL_LIMIT)
    b0, b1, b2 = _beta_scaled(alpha, r, N, (0, 1, 2), cutoff)
    a2 = abs(alpha) ** 2
    return a2 * b1 / b0, a2 / b0 * (a2 * b2 + b1)


def mandel_q(alpha, r, N, cutoff=None) -> float:
    """Mandel parameter ``|a|^2 (beta(2)/beta(1) - beta(1)/beta(0))``.

    Raises
    ------
    UndefinedMeanError
        For ``alpha = 0``, where ``<n> = 0`` leaves the parameter undefined.
    """
    alpha = complex(alpha)
    if alpha == 0:
        raise UndefinedMeanError("Mandel Q is undefined for alpha = 0 (zero mean photon number)")
    cutoff = _resolve_cutoff(alpha, cutoff, BETA_TAIL_LIMIT)
    b0, b1, b2 = _beta_scaled(alpha, r, N, (0, 1, 2), cutoff)
    if b1 == 0.0:
        raise UndefinedMeanError(f"mean photon number vanishes at r={r}, N={N}")
    return abs(alpha) ** 2 * (b2 / b1 - b1 / b0)


def mandel_q_from_probabilities(probs) -> float:
    """``(<n^2> - <n>^2)/<n> - 1`` from a photon-number distribution; NaN at zero mean."""
    probs = np.asarray(probs, dtype=float)
    n = np.arange(probs.size, dtype=float)
    mean = float(np.dot(n, probs))
    if mean == 0.0:
        return math.nan
    second = float(np.dot(n * n, probs))
    return (second - mean * mean) / mean - 1.0


def photon_statistics_from_state(state: FieldState) -> PhotonStats:
    probs = state.probabilities()
    n = np.arange(probs.size, dtype=float)
    return PhotonStats(
        probabilities=probs,
        mean_n=float(np.dot(n, probs)),
        second_moment_n=float(np.dot(n * n, probs)),
        mandel_q=mandel_q_from_probabilities(probs),
    )


def photon_statistics(alpha, r, N, cutoff=None) -> PhotonStats:
    """Photon-number distribution ``c_n`` of the post-selected state.

    ``c_n = |a|^{2n}/n! cos^{2N}(r sqrt n) / sum_k (same)``. ``mandel_q`` is
    NaN when the mean photon number is zero.
    """
    alpha = complex(alpha)
    cutoff = _resolve_cutoff(alpha, cutoff, BETA_TAIL_LIMIT)
    n = np.arange(cutoff + 1, dtype=float)
    raw = _poisson_weights(alpha, cutoff + 1) * _cos_pow(r, n, 2 * N)
    probs = raw / raw.sum()
    probs.setflags(write=False)
    mean = float(np.dot(n, probs))
    second = float(np.dot(n * n, probs))
    return PhotonStats(probs, mean, second, mandel_q_from_probabilities(probs))
