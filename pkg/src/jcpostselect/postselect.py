"""Cavity-field state after post-selecting N atoms in the ground state."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import cosine_coupling_diag
from .errors import DegenerateTraceError, TruncationError
from .fock import (
    COHERENT_TAIL_LIMIT,
    MAX_ATOMS,
    FieldState,
    ProtocolParams,
    default_cutoff,
    log_amplitude_terms,
    poisson_tail,
)

__all__ = [
    "DEGENERATE_TRACE",
    "PSOutcome",
    "iterate_ps",
    "ps_amplitudes",
    "ps_coefficient",
    "ps_state",
    "success_probability",
    "success_probability_curve",
]

DEGENERATE_TRACE = 1e-300


@dataclass(frozen=True)
class PSOutcome:
    """Normalized post-selected state with the probability of producing it.

    ``params`` is ``None`` for runs started from an arbitrary field state.
    ``step_probabilities`` holds the conditional ground-state probability of
    each atom, so their product is ``success_probability``.
    """

    state: FieldState
    success_probability: float
    params: ProtocolParams | None = None
    step_probabilities: tuple[float, ...] = ()


def ps_coefficient(alpha: complex, r: float, N: int, n: int, m: int) -> complex:
    """``alpha^n conj(alpha)^m cos^N(r sqrt n) cos^N(r sqrt m) / sqrt(n! m!)``."""
    if n < 0 or m < 0:
        raise ValueError("photon numbers must be nonnegative")
    if N < 1:
        raise ValueError("N must be >= 1")
    cn = math.cos(r * math.sqrt(n))
    cm = math.cos(r * math.sqrt(m))
    if cn == 0.0 or cm == 0.0:
        return 0j
    logmag = float(log_amplitude_terms(alpha, np.array([n, m])).sum())
    if logmag == -math.inf:
        return 0j
    logmag += N * (math.log(abs(cn)) + math.log(abs(cm)))
    sign = (1 if cn > 0 else -1) ** N * (1 if cm > 0 else -1) ** N
    phase = (n - m) * math.atan2(complex(alpha).imag, complex(alpha).real)
    return sign * math.exp(logmag) * complex(math.cos(phase), math.sin(phase))


def _poisson_weights(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff + 1)
    return np.exp(2 * log_amplitude_terms(alpha, n) - abs(alpha) ** 2)


def _retained_probability(weights: np.ndarray, cos2n: np.ndarray) -> float:
    # relative to the Poisson mass kept by the cutoff, so r = 0 or alpha = 0
    # give exactly 1 and the result matches iterating on the truncated input
    return float(np.sum(weights * cos2n) / np.sum(weights))


def ps_amplitudes(alpha: complex, r: float, N: int, cutoff: int) -> np.ndarray:
    """Unnormalized amplitudes ``e^{-|a|^2/2} a^n cos^N(r sqrt n) / sqrt(n!)``.

    The post-selected operator ``rho^N_22`` is the outer product of this
    vector with itself, so its squared norm is the success probability (up to
    the Poisson mass lost above the cutoff).
    """
    n = np.arange(cutoff + 1)
    logmag = log_amplitude_terms(alpha, n) - 0.5 * abs(alpha) ** 2
    amp = np.exp(logmag) * np.exp(1j * n * np.angle(alpha))
    return amp * cosine_coupling_diag(r, cutoff) ** N


def _check_tail(alpha: complex, cutoff: int):
    tail = poisson_tail(abs(alpha) ** 2, cutoff)
    if tail > COHERENT_TAIL_LIMIT:
        raise TruncationError(
            f"cutoff {cutoff} drops Poisson tail mass {tail:.3e} > "
            f"{COHERENT_TAIL_LIMIT:g} for |alpha|^2 = {abs(alpha) ** 2:.6g}"
        )


def ps_state(params: ProtocolParams) -> PSOutcome:
    """Closed-form N-atom post-selected state for a coherent input.

    Raises
    ------
    TruncationError
        If the cutoff loses more than ``1e-9`` of the input Poisson mass.
    DegenerateTraceError
        If the success probability underflows below ``1e-300``.
    """
    _check_tail(params.alpha, params.cutoff)
    psi = ps_amplitudes(params.alpha, params.r, params.atoms, params.cutoff)
    cos2n = cosine_coupling_diag(params.r, params.cutoff) ** (2 * params.atoms)
    prob = _retained_probability(_poisson_weights(params.alpha, params.cutoff), cos2n)
    if not prob > DEGENERATE_TRACE:
        raise DegenerateTraceError(
            f"post-selected trace {prob:.3e} vanishes at r={params.r}, N={params.atoms}"
        )
    unit = psi / np.linalg.norm(psi)
    state = FieldState(np.outer(unit, unit.conj()))
    return PSOutcome(state, prob, params)


def iterate_ps(state: FieldState, r: float | Sequence[float], N: int) -> PSOutcome:
    """Post-select ``N`` atoms one by one: ``rho <- C' rho C' / Tr[C' rho C']``.

    Works for any normalized input. ``r`` may be a single coupling shared by
    all atoms or one value per atom.
    """
    if N < 1 or N > MAX_ATOMS:
        raise ValueError(f"N must lie in 1..{MAX_ATOMS}")
    couplings = np.broadcast_to(np.asarray(r, dtype=float), (N,))
    rho = np.array(state.matrix)
    steps = []
    for r_i in couplings:
        c = cosine_coupling_diag(float(r_i), state.cutoff)
        rho = c[:, None] * rho * c[None, :]
        p = float(np.real(np.trace(rho)))
        if not p > DEGENERATE_TRACE:
            raise DegenerateTraceError(f"trace {p:.3e} vanishes at step {len(steps) + 1}")
        rho = rho / p
        steps.append(p)
    return PSOutcome(
        FieldState(rho),
        float(np.prod(steps)),
        None,
        tuple(steps),
    )


def success_probability(alpha: complex, r: float, N: int, cutoff: int | None = None) -> float:
    """``P_N = e^{-|a|^2} sum_n |a|^{2n}/n! cos^{2N}(r sqrt n)``."""
    cutoff = default_cutoff(alpha) if cutoff is None else cutoff
    _check_tail(alpha, cutoff)
    cos2n = cosine_coupling_diag(r, cutoff) ** (2 * N)
    return _retained_probability(_poisson_weights(alpha, cutoff), cos2n)


def success_probability_curve(alpha, N, r_grid, cutoff=None):
    """List of ``(r, P_N)`` pairs sorted by ``r``."""
    r_values = np.sort(np.asarray(r_grid, dtype=float).ravel())
    if r_values.size == 0:
        raise ValueError("r_grid must be nonempty")
    if np.any(r_values < 0):
        raise ValueError("r values must be >= 0")
    cutoff = default_cutoff(alpha) if cutoff is None else cutoff
    _check_tail(alpha, cutoff)
    weights = _poisson_weights(alpha, cutoff)
    cos2n = np.cos(np.outer(r_values, np.sqrt(np.arange(cutoff + 1)))) ** (2 * N)
    return [(float(r), _retained_probability(weights, c)) for r, c in zip(r_values, cos2n)]
