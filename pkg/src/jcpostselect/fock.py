"""Truncated Fock-space states and ladder operators for a single cavity mode.

All matrices are dense ``complex128`` arrays indexed by photon number
``0..cutoff``. States are immutable: the backing array is marked read-only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import TruncationError

__all__ = [
    "CUTOFF_FLOOR",
    "COHERENT_TAIL_LIMIT",
    "MAX_ATOMS",
    "FieldState",
    "LadderMatrix",
    "ProtocolParams",
    "StateDiagnostics",
    "annihilation",
    "choose_cutoff",
    "coherent_amplitudes",
    "coherent_state",
    "creation",
    "default_cutoff",
    "fock_state",
    "ladder",
    "number",
    "poisson_tail",
    "validate_state",
]

CUTOFF_FLOOR = 32
# Largest Poisson mass beyond the cutoff a coherent state may lose.
COHERENT_TAIL_LIMIT = 1e-9
MAX_ATOMS = 64


def poisson_tail(mean: float, n_max: int) -> float:
    """Probability mass of Poisson(``mean``) strictly above ``n_max``."""
    if mean <= 0.0:
        return 0.0
    return float(poisson.sf(n_max, mean))


def default_cutoff(alpha: complex) -> int:
    """Default cutoff ``max(32, ceil(|a|^2 + 8|a| + 16))``."""
    amp = abs(alpha)
    return max(CUTOFF_FLOOR, math.ceil(amp * amp + 8.0 * amp + 16.0))


def choose_cutoff(alpha: complex, tail_epsilon: float) -> int:
    """Smallest cutoff whose Poisson(|alpha|^2) tail is below ``tail_epsilon``.

    The result is never smaller than :data:`CUTOFF_FLOOR`.
    """
    if not 0.0 < tail_epsilon < 1.0:
        raise ValueError("tail_epsilon must lie in (0, 1)")
    mean = abs(alpha) ** 2
    n_max = 0
    while poisson_tail(mean, n_max) >= tail_epsilon:
        n_max += 1
    return max(CUTOFF_FLOOR, n_max)


def log_amplitude_terms(alpha: complex, n: np.ndarray) -> np.ndarray:
    """``log(|alpha|^n / sqrt(n!))`` for an integer array ``n``; -inf where alpha is 0 and n > 0."""
    n = np.asarray(n)
    amp = abs(alpha)
    if amp == 0.0:
        out = np.full(n.shape, -np.inf)
        out[n == 0] = 0.0
        return out
    return n * math.log(amp) - 0.5 * gammaln(n + 1)


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Untruncated coherent-state amplitudes ``e^{-|a|^2/2} a^n / sqrt(n!)``."""
    n = np.arange(cutoff + 1)
    logmag = log_amplitude_terms(alpha, n) - 0.5 * abs(alpha) ** 2
    return np.exp(logmag) * np.exp(1j * n * np.angle(alpha))


@dataclass(frozen=True)
class FieldState:
    """Density matrix of the cavity mode in a truncated Fock basis.

    Parameters
    ----------
    matrix : ndarray
        Square complex matrix, entry ``(n, m)`` is ``<n|rho|m>``.
    normalized : bool
        Whether the matrix is meant to have unit trace. Unnormalized states
        are the branch operators produced by the atom-field evolution.
    """

    matrix: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.complex128, copy=True)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
            raise ValueError(f"expected a non-empty square matrix, got shape {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def cutoff(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def probabilities(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    def purity(self) -> float:
        return float(np.real(np.einsum("ij,ji->", self.matrix, self.matrix)))

    def renormalized(self) -> "FieldState":
        tr = self.trace().real
        return FieldState(self.matrix / tr, normalized=True)

    def to_dict(self) -> dict:
        """JSON-ready form: ``{"cutoff", "re", "im"}`` with flat row-major arrays."""
        return {
            "cutoff": self.cutoff,
            "re": self.matrix.real.ravel().tolist(),
            "im": self.matrix.imag.ravel().tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "FieldState":
        dim = int(data["cutoff"]) + 1
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
        if re.size != dim * dim or im.size != dim * dim:
            raise ValueError(f"expected {dim * dim} entries for cutoff {dim - 1}")
        mat = (re + 1j * im).reshape(dim, dim)
        normalized = abs(np.trace(mat) - 1.0) < 1e-10
        return cls(mat, normalized=normalized)

    @classmethod
    def from_json(cls, text: str) -> "FieldState":
        return cls.from_dict(json.loads(text))


class StateDiagnostics(NamedTuple):
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float

    def ok(self, tol: float = 1e-10) -> bool:
        return (
            self.hermiticity_defect < tol
            and self.trace_defect < tol
            and self.min_eigenvalue >= -tol
        )


def validate_state(state: FieldState) -> StateDiagnostics:
    """Return hermiticity defect, trace defect and smallest eigenvalue.

    The trace defect is ``|Tr rho - 1|`` for normalized states and the size
    of the imaginary part of the trace otherwise. The eigenvalue is taken
    from the Hermitian part so a non-Hermitian input still gets a number.
    """
    mat = state.matrix
    herm = float(np.max(np.abs(mat - mat.conj().T)))
    tr = np.trace(mat)
    trace_defect = float(abs(tr - 1.0)) if state.normalized else float(abs(tr.imag))
    hpart = 0.5 * (mat + mat.conj().T)
    min_eig = float(np.linalg.eigvalsh(hpart)[0])
    return StateDiagnostics(herm, trace_defect, min_eig)


def coherent_state(alpha: complex, cutoff: int) -> FieldState:
    """Coherent state ``|alpha><alpha|`` truncated at ``cutoff`` and renormalized.

    Raises
    ------
    TruncationError
        If the Poisson mass above ``cutoff`` exceeds :data:`COHERENT_TAIL_LIMIT`.
    """
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    tail = poisson_tail(abs(alpha) ** 2, cutoff)
    if tail > COHERENT_TAIL_LIMIT:
        raise TruncationError(
            f"cutoff {cutoff} drops Poisson tail mass {tail:.3e} > {COHERENT_TAIL_LIMIT:g} "
            f"for |alpha|^2 = {abs(alpha) ** 2:.6g}"
        )
    psi = coherent_amplitudes(alpha, cutoff)
    psi /= np.linalg.norm(psi)
    return FieldState(np.outer(psi, psi.conj()))


def fock_state(n: int, cutoff: int) -> FieldState:
    if not 0 <= n <= cutoff:
        raise ValueError(f"photon number {n} outside 0..{cutoff}")
    mat = np.zeros((cutoff + 1, cutoff + 1), dtype=np.complex128)
    mat[n, n] = 1.0
    return FieldState(mat)


@dataclass(frozen=True)
class LadderMatrix:
    matrix: np.ndarray
    kind: Literal["annihilation", "creation", "number"]


def _annihilation_array(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1).astype(np.complex128)


def ladder(kind: str, cutoff: int) -> LadderMatrix:
    if kind == "annihilation":
        mat = _annihilation_array(cutoff)
    elif kind == "creation":
        mat = _annihilation_array(cutoff).conj().T.copy()
    elif kind == "number":
        mat = np.diag(np.arange(cutoff + 1, dtype=float)).astype(np.complex128)
    else:
        raise ValueError(f"unknown ladder kind {kind!r}")
    mat.setflags(write=False)
    return LadderMatrix(mat, kind)


def annihilation(cutoff: int) -> LadderMatrix:
    return ladder("annihilation", cutoff)


def creation(cutoff: int) -> LadderMatrix:
    return ladder("creation", cutoff)


def number(cutoff: int) -> LadderMatrix:
    return ladder("number", cutoff)


@dataclass(frozen=True)
class ProtocolParams:
    """Parameters of one post-selection run.

    ``r`` is the dimensionless coupling (vacuum Rabi frequency times transit
    time over two). Leaving ``cutoff`` as ``None`` selects
    :func:`default_cutoff`; passing one explicitly overrides that policy.
    """

    alpha: complex = complex(math.sqrt(10.0))
    r: float = 0.0
    atoms: int = 1
    cutoff: int | None = None
    phase: float = 0.0
    cutoff_overridden: bool = field(default=False, init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "r", float(self.r))
        if not math.isfinite(self.r) or self.r < 0.0:
            raise ValueError(f"r must be finite and >= 0, got {self.r}")
        if int(self.atoms) != self.atoms or not 1 <= self.atoms <= MAX_ATOMS:
            raise ValueError(f"atoms must be an integer in 1..{MAX_ATOMS}, got {self.atoms}")
        object.__setattr__(self, "atoms", int(self.atoms))
        if self.cutoff is None:
            object.__setattr__(self, "cutoff", default_cutoff(self.alpha))
        else:
            if int(self.cutoff) != self.cutoff or self.cutoff < 1:
                raise ValueError(f"cutoff must be a positive integer, got {self.cutoff}")
            object.__setattr__(self, "cutoff", int(self.cutoff))
            object.__setattr__(self, "cutoff_overridden", True)

    def tail_mass(self) -> float:
        return poisson_tail(abs(self.alpha) ** 2, self.cutoff)
