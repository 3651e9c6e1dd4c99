"""Resonant Jaynes-Cummings evolution of a ground-state atom crossing the cavity.

For an atom entering in ``|g>`` the joint state after the transit has four
field-space blocks (``1`` = excited, ``2`` = ground)::

    rho11 = S' rho S'^dag      rho12 = S' rho C'
    rho21 = C' rho S'^dag      rho22 = C' rho C'

with ``C' = cos(r sqrt(n))`` and ``S' = -i a sin(r sqrt(n)) / sqrt(n)``.
Since ``S'^dag = -S`` for the operator ``S = -i a^dag sin(r sqrt(a a^dag)) / sqrt(a a^dag)``,
``rho11 = -S' rho S`` and ``rho21 = -C' rho S`` are the same objects written
with ``S``. The explicit minus sign therefore cancels the ``i * (-i)`` phase
and ``rho11`` is positive semidefinite; the matrix-exponential oracle
confirms this convention (see ``tests/test_dynamics.py``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import NumericalError
from .fock import FieldState, annihilation

__all__ = [
    "JointBlocks",
    "closed_form_blocks",
    "cosine_coupling_diag",
    "excited_branch",
    "ground_branch",
    "jc_hamiltonian",
    "joint_evolution_oracle",
    "sine_coupling_diag",
]


@dataclass(frozen=True)
class JointBlocks:
    """Unnormalized field blocks of the joint density matrix after one transit."""

    rho11: np.ndarray
    rho12: np.ndarray
    rho21: np.ndarray
    rho22: np.ndarray

    @property
    def excited(self) -> FieldState:
        return FieldState(self.rho11, normalized=False)

    @property
    def ground(self) -> FieldState:
        return FieldState(self.rho22, normalized=False)

    def total_trace(self) -> float:
        return float(np.real(np.trace(self.rho11) + np.trace(self.rho22)))


def cosine_coupling_diag(r: float, cutoff: int) -> np.ndarray:
    """Diagonal of ``cos(r sqrt(a^dag a))``: ``cos(r sqrt(n))`` for ``n = 0..cutoff``."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return np.cos(r * np.sqrt(np.arange(cutoff + 1, dtype=float)))


def sine_coupling_diag(r: float, cutoff: int) -> np.ndarray:
    if r < 0:
        raise ValueError("r must be >= 0")
    return np.sin(r * np.sqrt(np.arange(cutoff + 1, dtype=float)))


def ground_branch(state: FieldState, r: float) -> FieldState:
    """Field block for the atom leaving in the ground state, ``C' rho C'``."""
    c = cosine_coupling_diag(r, state.cutoff)
    return FieldState(c[:, None] * state.matrix * c[None, :], normalized=False)


def excited_branch(state: FieldState, r: float) -> FieldState:
    """Field block for the atom leaving excited, ``S' rho S'^dag``.

    Entry ``(n-1, m-1)`` is ``sin(r sqrt n) rho[n, m] sin(r sqrt m)``; the top
    row and column stay zero because one photon has been absorbed.
    """
    s = sine_coupling_diag(r, state.cutoff)
    shifted = s[:, None] * state.matrix * s[None, :]
    out = np.zeros_like(state.matrix)
    out[:-1, :-1] = shifted[1:, 1:]
    return FieldState(out, normalized=False)


def closed_form_blocks(state: FieldState, r: float) -> JointBlocks:
    """All four blocks from the operator sandwiches (no matrix exponential)."""
    c = cosine_coupling_diag(r, state.cutoff)
    s = sine_coupling_diag(r, state.cutoff)
    rho = state.matrix
    dim = state.dim

    # S' rho: row n of (-i sin(r sqrt n) rho) moves to row n-1
    s_rho = np.zeros((dim, dim), dtype=np.complex128)
    s_rho[:-1, :] = -1j * s[1:, None] * rho[1:, :]
    rho12 = s_rho * c[None, :]
    rho21 = rho12.conj().T
    return JointBlocks(
        rho11=excited_branch(state, r).matrix,
        rho12=rho12,
        rho21=rho21,
        rho22=ground_branch(state, r).matrix,
    )


def jc_hamiltonian(cutoff: int) -> np.ndarray:
    """Interaction ``sigma_+ a + sigma_- a^dag`` in units of ``hbar Omega_0 / 2``.

    Basis order is ``|e, 0..cutoff>`` followed by ``|g, 0..cutoff>``, so the
    2x2 block layout matches the atomic-basis expansion of the joint state.
    """
    a = annihilation(cutoff).matrix
    dim = cutoff + 1
    ham = np.zeros((2 * dim, 2 * dim), dtype=np.complex128)
    # sigma_+ = |e><g| sits in the upper-right block
    ham[:dim, dim:] = a
    ham[dim:, :dim] = a.conj().T
    return ham


def joint_evolution_oracle(state: FieldState, r: float) -> JointBlocks:
    """Evolve ``rho_F (x) |g><g|`` with ``exp(-i r H)`` and split the blocks.

    This is the brute-force reference for :func:`closed_form_blocks`. With the
    atom starting in ``|g>`` the dynamics stays inside ``{|g,n>, |e,n-1>}``,
    but the top excited level is still clipped by the truncation, so callers
    comparing against closed forms should skip the top two Fock indices.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    dim = state.dim
    unitary = expm(-1j * r * jc_hamiltonian(state.cutoff))
    if not np.all(np.isfinite(unitary)):
        raise NumericalError("matrix exponential produced non-finite entries")
    defect = np.max(np.abs(unitary.conj().T @ unitary - np.eye(2 * dim)))
    if defect > 1e-10:
        raise NumericalError(f"propagator not unitary to 1e-10 (defect {defect:.2e})")

    rho0 = np.zeros((2 * dim, 2 * dim), dtype=np.complex128)
    rho0[dim:, dim:] = state.matrix
    rho_t = unitary @ rho0 @ unitary.conj().T
    return JointBlocks(
        rho11=rho_t[:dim, :dim],
        rho12=rho_t[:dim, dim:],
        rho21=rho_t[dim:, :dim],
        rho22=rho_t[dim:, dim:],
    )
